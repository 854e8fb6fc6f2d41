"""
Modulo con la grilla de ablación.

Variantes sobre la configuración completa (L=2, atención con tipos de arista, GRU, lectura
sobre los destinos, unidireccional): suma con compuerta, una sola capa, capa totalmente
conectada, pooling sobre todos los nodos, sin atributos de arista, L de 1 a 4 y ambos
sentidos. Las configuraciones repetidas se conservan una sola vez con el primer nombre.
"""

import csv
from dataclasses import replace
from typing import IO, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core.dagnn_params import init_dagnn_params
from src.core.train_eval import evaluate, train
from src.models.ablation_result import METRIC_NAMES, AblationResult, Stat
from src.models.dagnn_config import Aggregator, Combiner, DagnnConfig, ReadoutScope
from src.models.metrics import Metrics, Task
from src.models.sample import Sample
from src.models.train_config import TrainConfig
from src.services.logger_service import LoggerService

ABLATION_SEEDS: Tuple[int, ...] = (1, 2, 3)


def ablation_grid(base: DagnnConfig) -> List[Tuple[str, DagnnConfig]]:
    """
    Configuraciones de la grilla, sin repetidos.

    Args:
        base (DagnnConfig):
            Configuración con las dimensiones y la salida de la tarea.

    Returns:
        List[Tuple[str, DagnnConfig]]:
            Pares (nombre, configuración) en orden.
    """
    full: DagnnConfig = base.with_changes(
        num_layers=2,
        aggregator=Aggregator.ATTENTION_EDGE,
        combiner=Combiner.GRU,
        readout_scope=ReadoutScope.TARGETS_ONLY,
        bidirectional=False,
    )
    candidates: List[Tuple[str, DagnnConfig]] = [
        ("full", full),
        ("gated_sum", full.with_changes(aggregator=Aggregator.GATED_SUM)),
        ("single_layer", full.with_changes(num_layers=1)),
        ("fc_layer", full.with_changes(combiner=Combiner.FULLY_CONNECTED)),
        ("pool_all_nodes", full.with_changes(readout_scope=ReadoutScope.ALL_NODES)),
        ("no_edge_attr", full.with_changes(aggregator=Aggregator.ATTENTION)),
    ]
    candidates += [(f"layers_{layers}", full.with_changes(num_layers=layers)) for layers in range(1, 5)]
    candidates += [
        ("unidirectional", full),
        ("bidirectional", full.with_changes(bidirectional=True)),
    ]

    grid: List[Tuple[str, DagnnConfig]] = []
    for name, config in candidates:
        if all(config != kept for _, kept in grid):
            grid.append((name, config))
    return grid


def _summarize(values: Sequence[Optional[float]]) -> Stat:
    defined: List[float] = [v for v in values if v is not None]
    if not defined:
        return None, None
    return float(np.mean(defined)), float(np.std(defined))


def run_ablation_grid(
    samples: Sequence[Sample],
    task: Task,
    base: DagnnConfig,
    train_config: TrainConfig,
    val_samples: Optional[Sequence[Sample]] = None,
    test_samples: Optional[Sequence[Sample]] = None,
    seeds: Sequence[int] = ABLATION_SEEDS,
    logger_service: Optional[LoggerService] = None,
) -> List[AblationResult]:
    """
    Entrena y evalúa cada configuración de la grilla con cada semilla.

    Args:
        samples (Sequence[Sample]):
            Conjunto de entrenamiento.
        task (Task):
            Tarea.
        base (DagnnConfig):
            Configuración base.
        train_config (TrainConfig):
            Hiperparámetros; la semilla se reemplaza por cada semilla de la grilla.
        val_samples (Optional[Sequence[Sample]]):
            Conjunto de validación; por defecto el de entrenamiento.
        test_samples (Optional[Sequence[Sample]]):
            Conjunto donde se reportan las métricas; por defecto el de validación.
        seeds (Sequence[int]):
            Semillas de inicialización y barajado.
        logger_service (Optional[LoggerService]):
            Servicio de logging.

    Returns:
        List[AblationResult]:
            Una fila por configuración con media y desviación de cada métrica.
    """
    report_on: Sequence[Sample] = test_samples or val_samples or samples
    results: List[AblationResult] = []
    for name, config in ablation_grid(base):
        runs: List[Metrics] = []
        for seed in seeds:
            if logger_service is not None:
                logger_service.log_info(f'Ablación {{1}} {{2}}" "1={name}" "2=semilla {seed}')
            outcome = train(
                config,
                init_dagnn_params(config, seed),
                samples,
                replace(train_config, seed=seed),
                task,
                val_samples=val_samples,
                logger_service=logger_service,
            )
            runs.append(
                evaluate(outcome.params, report_on, task, config, batch_size=train_config.data_batch_size)
            )
        stats: Dict[str, Stat] = {
            metric: _summarize([getattr(run, metric) for run in runs]) for metric in METRIC_NAMES
        }
        results.append(
            AblationResult(
                name=name,
                num_layers=config.num_layers,
                aggregator=config.aggregator.value,
                combiner=config.combiner.value,
                readout_scope=config.readout_scope.value,
                bidirectional=config.bidirectional,
                num_seeds=len(runs),
                stats=stats,
            )
        )
    return results


def write_ablation_csv(handle: IO[str], results: Sequence[AblationResult]) -> None:
    """Escribe una fila por configuración."""
    writer = csv.DictWriter(handle, fieldnames=AblationResult.CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for result in results:
        writer.writerow(result.as_row())


def read_ablation_csv(handle: IO[str]) -> List[AblationResult]:
    """Lee un CSV escrito por write_ablation_csv."""
    return [AblationResult.from_row(row) for row in csv.DictReader(handle)]
