"""
Modulo con las acciones de la línea de comandos.
"""

import csv
import sys
from argparse import Namespace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO, Tuple

from src.core.ablation import ablation_grid, run_ablation_grid, write_ablation_csv
from src.core.dag_operations import longest_path_node_count
from src.core.dagnn_params import DagnnParams, init_dagnn_params, init_mpnn_params
from src.core.datasets import SPLIT_NAMES, gen_random_dag, gen_splits, generate, label_histogram, lp_label
from src.core.error_handling import ConfigError, DatasetIOError, EmptyInput
from src.core.grad_check import model_grad_check
from src.core.topo_batching import compute_batches
from src.core.train_eval import (
    evaluate,
    evaluate_majority,
    majority_baseline,
    train,
    write_history_csv,
    write_metrics_csv,
)
from src.models.checkpoint import Checkpoint, ModelKind
from src.models.dagnn_config import (
    Aggregator,
    Combiner,
    DagnnConfig,
    OutputKind,
    ReadoutScope,
)
from src.models.generator_config import GeneratorConfig
from src.models.metrics import Metrics, Task
from src.models.sample import Sample
from src.models.train_config import TrainConfig
from src.services.checkpoint_service import CheckpointService
from src.services.dataset_service import DatasetService
from src.services.logger_service import LoggerService
from src.utils.environment import Environment

BATCH_INFO_COLUMNS = (
    "graph",
    "num_nodes",
    "num_edges",
    "num_batches",
    "longest_path_nodes",
    "max_batch_width",
)

# Configuración pequeña para la verificación de gradientes
GRADCHECK_HIDDEN_DIM: int = 3
GRADCHECK_CLASSES: int = 3
GRADCHECK_GENERATOR: GeneratorConfig = GeneratorConfig(n_min=4, n_max=6, edge_prob=0.5, num_edge_types=2)


class Actions:
    """
    Clase para ejecutar los subcomandos de la línea de comandos.
    """

    def __init__(self, services: Dict[str, Any], stdout: Optional[TextIO] = None) -> None:
        """
        Inicializa los atributos necesarios para la clase.

        Args:
            services (Dict[str, Any]):
                Diccionario con las instancias de los servicios.
            stdout (Optional[TextIO]):
                Salida de los CSV de resultados; por defecto la salida estándar.
        """
        # Atributo para el manejo de las variables de entorno
        self.env: Environment = services["env"]
        # Atributo para registrar logs
        self.logger_service: LoggerService = services["logger_service"]
        # Atributo para leer y escribir conjuntos de datos
        self.dataset_service: DatasetService = services["dataset_service"]
        # Atributo para leer y escribir checkpoints
        self.checkpoint_service: CheckpointService = services["checkpoint_service"]
        self.stdout: TextIO = stdout or sys.stdout

    def run(self, args: Namespace) -> None:
        """
        Ejecuta el subcomando indicado en los argumentos.

        Args:
            args (Namespace):
                Argumentos ya interpretados por argparse.
        """
        handlers = {
            "batch-info": self.batch_info,
            "generate": self.generate,
            "train": self.train,
            "eval": self.evaluate,
            "ablate": self.ablate,
            "gradcheck": self.gradcheck,
        }
        self.logger_service.log_info(f'Inicia el comando {{1}}" "1={args.command}')
        handlers[args.command](args)
        self.logger_service.log_info(f'Finaliza el comando {{1}}" "1={args.command}')

    def batch_info(self, args: Namespace) -> None:
        """Imprime por grafo los nodos, aristas, lotes, camino más largo y ancho máximo."""
        samples: List[Sample] = self.dataset_service.load(args.data)
        writer = csv.DictWriter(self.stdout, fieldnames=BATCH_INFO_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for index, sample in enumerate(samples):
            batches = compute_batches(sample.dag)
            writer.writerow(
                {
                    "graph": index,
                    "num_nodes": sample.dag.num_nodes,
                    "num_edges": sample.dag.num_edges,
                    "num_batches": batches.num_batches,
                    "longest_path_nodes": longest_path_node_count(sample.dag),
                    "max_batch_width": batches.max_width,
                }
            )

    def generate(self, args: Namespace) -> None:
        """Genera un conjunto de datos (o los tres conjuntos) e imprime su resumen."""
        config: GeneratorConfig = GeneratorConfig(
            n_min=args.n_min,
            n_max=args.n_max,
            edge_prob=args.edge_prob,
            num_edge_types=args.edge_types,
            feature_mode=args.features,
        )
        task: Task = Task(args.task)
        if args.splits:
            sizes: Tuple[int, int, int] = (args.count, args.count // 4, args.count // 4)
            splits: Dict[str, List[Sample]] = gen_splits(task, config, args.seed, sizes)
            for name in SPLIT_NAMES:
                self.dataset_service.save(split_path(args.out, name), splits[name])
            samples: List[Sample] = splits["train"]
        else:
            samples = generate(task, args.count, config, args.seed)
            self.dataset_service.save(args.out, samples)

        if task == Task.LP:
            writer = csv.writer(self.stdout, lineterminator="\n")
            writer.writerow(("label", "count"))
            for label, count in label_histogram(samples).items():
                writer.writerow((label, count))

    def _train_config(self, args: Namespace) -> TrainConfig:
        # Los argumentos explícitos tienen prioridad sobre las variables de entorno
        return TrainConfig(
            learning_rate=_pick(args.lr, self.env.DAGNN_LEARNING_RATE),
            max_epochs=_pick(args.epochs, self.env.DAGNN_MAX_EPOCHS),
            patience=_pick(args.patience, self.env.DAGNN_PATIENCE),
            grad_clip=_pick(args.grad_clip, self.env.DAGNN_GRAD_CLIP),
            data_batch_size=_pick(args.batch_size, self.env.DAGNN_BATCH_SIZE),
            seed=args.seed,
        )

    def _model_config(self, args: Namespace, task: Task, datasets: Sequence[List[Sample]]) -> DagnnConfig:
        samples: List[Sample] = [sample for dataset in datasets for sample in dataset]
        if not samples:
            raise EmptyInput("El conjunto de entrenamiento está vacío")
        if args.aggregator == "gated_sum":
            aggregator: Aggregator = Aggregator.GATED_SUM
        elif args.no_edge_attr:
            aggregator = Aggregator.ATTENTION
        else:
            aggregator = Aggregator.ATTENTION_EDGE
        return DagnnConfig(
            num_layers=args.layers,
            hidden_dim=_pick(args.hidden_dim, self.env.DAGNN_HIDDEN_DIM),
            input_dim=samples[0].dag.input_dim,
            num_edge_types=_num_edge_types(args.num_edge_types, samples),
            bidirectional=args.bidirectional,
            aggregator=aggregator,
            combiner=Combiner.GRU if args.combiner == "gru" else Combiner.FULLY_CONNECTED,
            readout_scope=(
                ReadoutScope.TARGETS_ONLY if args.readout == "targets" else ReadoutScope.ALL_NODES
            ),
            output=OutputKind.CLASSES if task == Task.LP else OutputKind.SCALAR,
            num_classes=_num_classes(args.n_max, samples) if task == Task.LP else 2,
        )

    def train(self, args: Namespace) -> None:
        """Entrena un modelo, guarda el checkpoint e imprime las métricas finales."""
        task: Task = Task(args.task)
        model: ModelKind = ModelKind(args.model)
        samples: List[Sample] = self.dataset_service.load(args.data)
        val: List[Sample] = self.dataset_service.load(args.val) if args.val else samples
        test: Optional[List[Sample]] = self.dataset_service.load(args.test) if args.test else None
        config: DagnnConfig = self._model_config(args, task, [samples, val, test or []])
        train_config: TrainConfig = self._train_config(args)

        if model == ModelKind.MAJORITY:
            checkpoint, reports = self._train_majority(task, config, val, test)
        else:
            init = init_dagnn_params if model == ModelKind.DAGNN else init_mpnn_params
            result = train(
                config,
                init(config, train_config.seed),
                samples,
                train_config,
                task,
                val_samples=val,
                model=model,
                logger_service=self.logger_service,
            )
            self.logger_service.log_info(
                f'Entrenamiento terminado {{1}} {{2}}" "1={len(result.history)} épocas" '
                f'"2=mejor época {result.best_epoch}'
            )
            if args.log:
                try:
                    with open(args.log, "w", encoding="utf-8") as handle:
                        write_history_csv(handle, result.history)
                except OSError as e:
                    raise DatasetIOError(f"No se pudo escribir {args.log}: {e}") from e
            checkpoint = Checkpoint(model=model, task=task, config=config, params=result.params)
            batch: int = train_config.data_batch_size
            reports = [("val", evaluate(result.params, val, task, config, model, batch))]
            if test is not None:
                reports.append(("test", evaluate(result.params, test, task, config, model, batch)))

        self.checkpoint_service.save(args.out, checkpoint)
        write_metrics_csv(self.stdout, [m for _, m in reports], [name for name, _ in reports])

    @staticmethod
    def _train_majority(
        task: Task,
        config: DagnnConfig,
        val: List[Sample],
        test: Optional[List[Sample]],
    ) -> Tuple[Checkpoint, List[Tuple[str, Metrics]]]:
        if task != Task.LP:
            raise ConfigError("El clasificador de mayoría solo aplica a la tarea LP")
        label: int = majority_baseline(val)
        checkpoint: Checkpoint = Checkpoint(
            model=ModelKind.MAJORITY,
            task=task,
            config=config,
            params=DagnnParams.from_arrays({}),
            majority_label=label,
        )
        reports: List[Tuple[str, Metrics]] = [
            ("val", evaluate_majority(label, val, config.num_classes))
        ]
        if test is not None:
            reports.append(("test", evaluate_majority(label, test, config.num_classes)))
        return checkpoint, reports

    def evaluate(self, args: Namespace) -> None:
        """Evalúa un checkpoint sobre un conjunto de datos."""
        checkpoint: Checkpoint = self.checkpoint_service.load(args.ckpt)
        samples: List[Sample] = self.dataset_service.load(args.data)
        if checkpoint.model == ModelKind.MAJORITY:
            metrics: Metrics = evaluate_majority(
                checkpoint.majority_label, samples, checkpoint.config.num_classes
            )
        else:
            metrics = evaluate(
                checkpoint.params,
                samples,
                checkpoint.task,
                checkpoint.config,
                checkpoint.model,
                self.env.DAGNN_BATCH_SIZE,
            )
        write_metrics_csv(self.stdout, [metrics], ["eval"])

    def ablate(self, args: Namespace) -> None:
        """Ejecuta la grilla de ablación y escribe una fila por configuración."""
        task: Task = Task(args.task)
        samples: List[Sample] = self.dataset_service.load(args.data)
        val: Optional[List[Sample]] = self.dataset_service.load(args.val) if args.val else None
        test: Optional[List[Sample]] = self.dataset_service.load(args.test) if args.test else None
        base: DagnnConfig = self._model_config(args, task, [samples, val or [], test or []])
        results = run_ablation_grid(
            samples,
            task,
            base,
            self._train_config(args),
            val_samples=val,
            test_samples=test,
            logger_service=self.logger_service,
        )
        try:
            with open(args.out, "w", encoding="utf-8") as handle:
                write_ablation_csv(handle, results)
        except OSError as e:
            raise DatasetIOError(f"No se pudo escribir {args.out}: {e}") from e
        write_ablation_csv(self.stdout, results)

    def gradcheck(self, args: Namespace) -> None:
        """Imprime el máximo error relativo del gradiente por configuración."""
        base: DagnnConfig = DagnnConfig(
            hidden_dim=GRADCHECK_HIDDEN_DIM,
            input_dim=GRADCHECK_GENERATOR.feature_dim,
            num_edge_types=GRADCHECK_GENERATOR.num_edge_types,
            num_classes=GRADCHECK_CLASSES,
        )
        grid: List[Tuple[str, DagnnConfig]] = ablation_grid(base) if args.all_configs else [
            ("full", ablation_grid(base)[0][1])
        ]
        dag = gen_random_dag(
            n_min=GRADCHECK_GENERATOR.n_min,
            n_max=GRADCHECK_GENERATOR.n_max,
            edge_prob=GRADCHECK_GENERATOR.edge_prob,
            num_edge_types=GRADCHECK_GENERATOR.num_edge_types,
            rng_seed=args.seed,
        )
        writer = csv.writer(self.stdout, lineterminator="\n")
        writer.writerow(("config", "max_relative_error"))
        for name, config in grid:
            error: float = model_grad_check(config, dag, lp_label(dag), seed=args.seed)
            self.logger_service.log_debug(f'Verificación de gradiente {{1}} {{2}}" "1={name}" "2={error!r}')
            writer.writerow((name, repr(error)))


def _pick(value: Any, default: Any) -> Any:
    return default if value is None else value


def _num_classes(n_max: int, samples: Sequence[Sample]) -> int:
    # El camino más largo de un grafo de n_max nodos tiene a lo sumo n_max - 1 aristas
    largest: int = max(int(sample.label) for sample in samples)
    if largest >= n_max:
        raise ConfigError(f"La etiqueta {largest} no cabe en n_max={n_max} clases")
    return max(2, n_max)


def _num_edge_types(requested: Optional[int], samples: Sequence[Sample]) -> int:
    # La tabla de tipos viene del archivo; el argumento solo puede ampliarla
    stored: int = max(sample.dag.num_edge_types for sample in samples)
    if requested is None:
        return stored
    if requested < stored:
        raise ConfigError(f"--num-edge-types={requested} es menor que los {stored} tipos del conjunto")
    return requested


def split_path(out: str, name: str) -> Path:
    """Ruta de un conjunto: datos.jsonl -> datos_train.jsonl."""
    path: Path = Path(out)
    return path.with_name(f"{path.stem}_{name}{path.suffix or '.jsonl'}")
