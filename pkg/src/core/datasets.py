"""
Modulo para la generación de conjuntos de datos sintéticos de DAG con etiquetas exactas.

Los nodos se generan en un orden total y solo se permiten aristas (i, j) con i < j, por lo
que todo grafo generado es acíclico por construcción. La generación es una función pura de
los parámetros y la semilla.
"""

from collections import Counter
from typing import Dict, List, Sequence, Union

import numpy as np
from numpy.typing import NDArray

from src.core.dag_operations import build_dag, longest_path_node_count
from src.core.error_handling import GeneratorConfigError
from src.models.dag import Dag
from src.models.generator_config import RANDOM_FEATURE_DIM, FeatureMode, GeneratorConfig
from src.models.metrics import Task
from src.models.sample import Sample

Seed = Union[int, np.random.SeedSequence]

# Constantes del puntaje sintético
SCORE_PATH_WEIGHT: float = 1.0
SCORE_INDEGREE_WEIGHT: float = 0.5
SCORE_EDGE_TYPE_WEIGHT: float = 0.25
SCORE_NOISE_STD: float = 0.05

SPLIT_NAMES = ("train", "val", "test")
DEFAULT_SPLIT_SIZES = (2000, 500, 500)


def _features(
    mode: FeatureMode,
    num_nodes: int,
    n_max: int,
    heads: NDArray[np.int64],
    rng: np.random.Generator,
) -> NDArray[np.float64]:
    if mode == FeatureMode.RANDOM:
        return rng.standard_normal((num_nodes, RANDOM_FEATURE_DIM))
    matrix: NDArray[np.float64] = np.zeros((num_nodes, n_max))
    if mode == FeatureMode.ONEHOT_INDEGREE:
        matrix[np.arange(num_nodes), np.bincount(heads, minlength=num_nodes)] = 1.0
    else:
        # Los nodos ya vienen en orden topológico
        matrix[np.arange(num_nodes), np.arange(num_nodes)] = 1.0
    return matrix


def _sample_dag(config: GeneratorConfig, rng: np.random.Generator) -> Dag:
    num_nodes: int = int(rng.integers(config.n_min, config.n_max + 1))
    # Matriz triangular superior estricta: solo aristas i -> j con i < j
    upper: NDArray[np.bool_] = np.triu(rng.random((num_nodes, num_nodes)) < config.edge_prob, k=1)
    tails, heads = np.nonzero(upper)
    types: NDArray[np.int64] = rng.integers(0, config.num_edge_types, size=tails.shape[0])
    features: NDArray[np.float64] = _features(
        config.feature_mode, num_nodes, config.n_max, heads, rng
    )
    return build_dag(
        num_nodes,
        zip(tails.tolist(), heads.tolist(), types.tolist()),
        features,
        num_edge_types=config.num_edge_types,
    )


def gen_random_dag(
    n_min: int = 4,
    n_max: int = 15,
    edge_prob: float = 0.35,
    num_edge_types: int = 2,
    feature_mode: Union[FeatureMode, str] = FeatureMode.ONEHOT_INDEGREE,
    rng_seed: Seed = 0,
) -> Dag:
    """
    Genera un DAG aleatorio.

    El número de nodos se sortea uniforme en [n_min, n_max]; cada par i < j recibe la arista
    (i, j) con probabilidad edge_prob y un tipo uniforme.

    Args:
        n_min (int):
            Número mínimo de nodos.
        n_max (int):
            Número máximo de nodos.
        edge_prob (float):
            Probabilidad de cada arista.
        num_edge_types (int):
            Número de tipos de arista.
        feature_mode (Union[FeatureMode, str]):
            Características de los nodos.
        rng_seed (Seed):
            Semilla del generador.

    Returns:
        Dag:
            Grafo validado.

    Raises:
        GeneratorConfigError:
            Si los parámetros no son válidos.
    """
    config: GeneratorConfig = GeneratorConfig(
        n_min=n_min,
        n_max=n_max,
        edge_prob=edge_prob,
        num_edge_types=num_edge_types,
        feature_mode=feature_mode,
    )
    return _sample_dag(config, np.random.default_rng(rng_seed))


def lp_label(dag: Dag) -> int:
    """Número de aristas del camino más largo."""
    return longest_path_node_count(dag) - 1


def raw_score(dag: Dag) -> float:
    """
    Puntaje sin ruido ni estandarización.

    1.0 · (nodos del camino más largo) + 0.5 · (grado de entrada medio)
    + 0.25 · sum sobre las aristas de (tipo + 1).
    """
    type_weights: int = sum(edge.edge_type + 1 for edge in dag.edges)
    return (
        SCORE_PATH_WEIGHT * longest_path_node_count(dag)
        + SCORE_INDEGREE_WEIGHT * dag.num_edges / dag.num_nodes
        + SCORE_EDGE_TYPE_WEIGHT * type_weights
    )


def gen_lp_dataset(count: int, config: GeneratorConfig, seed: Seed = 0) -> List[Sample]:
    """
    Conjunto de datos de la tarea de camino más largo, clasificación en n_max clases.

    Args:
        count (int):
            Número de muestras.
        config (GeneratorConfig):
            Parámetros del generador.
        seed (Seed):
            Semilla.

    Returns:
        List[Sample]:
            Muestras con etiqueta entera en [0, n_max).

    Raises:
        GeneratorConfigError:
            Si las características revelan la profundidad de los nodos.
    """
    if config.feature_mode == FeatureMode.ONEHOT_TOPOINDEX:
        raise GeneratorConfigError(
            "La tarea LP no admite onehot_topoindex: la característica revela la profundidad"
        )
    rng: np.random.Generator = np.random.default_rng(seed)
    samples: List[Sample] = []
    for _ in range(count):
        dag: Dag = _sample_dag(config, rng)
        samples.append(Sample(dag=dag, label=lp_label(dag)))
    return samples


def standardize(values: Sequence[float]) -> NDArray[np.float64]:
    """
    Lleva los valores a media cero y varianza poblacional uno.

    Si la desviación es cero solo se centran.
    """
    array: NDArray[np.float64] = np.asarray(values, dtype=np.float64)
    if array.size == 0:
        return array
    centered: NDArray[np.float64] = array - array.mean()
    std: float = float(array.std())
    return centered / std if std > 0 else centered


def gen_score_dataset(count: int, config: GeneratorConfig, seed: Seed = 0) -> List[Sample]:
    """
    Conjunto de datos de regresión con un puntaje estructural estandarizado.

    Args:
        count (int):
            Número de muestras.
        config (GeneratorConfig):
            Parámetros del generador.
        seed (Seed):
            Semilla.

    Returns:
        List[Sample]:
            Muestras con etiqueta real, estandarizadas sobre el conjunto.
    """
    rng: np.random.Generator = np.random.default_rng(seed)
    dags: List[Dag] = []
    scores: List[float] = []
    for _ in range(count):
        dag: Dag = _sample_dag(config, rng)
        dags.append(dag)
        scores.append(raw_score(dag) + float(rng.normal(0.0, SCORE_NOISE_STD)))
    labels: NDArray[np.float64] = standardize(scores)
    return [Sample(dag=dag, label=float(label)) for dag, label in zip(dags, labels)]


def generate(task: Union[Task, str], count: int, config: GeneratorConfig, seed: Seed = 0) -> List[Sample]:
    """Genera un conjunto de datos de la tarea indicada."""
    if Task(task) == Task.LP:
        return gen_lp_dataset(count, config, seed)
    return gen_score_dataset(count, config, seed)


def gen_splits(
    task: Union[Task, str],
    config: GeneratorConfig,
    seed: int = 0,
    sizes: Sequence[int] = DEFAULT_SPLIT_SIZES,
) -> Dict[str, List[Sample]]:
    """
    Genera entrenamiento, validación y prueba con flujos de semilla independientes.

    Args:
        task (Union[Task, str]):
            Tarea.
        config (GeneratorConfig):
            Parámetros del generador.
        seed (int):
            Semilla raíz; se divide en tres semillas hijas.
        sizes (Sequence[int]):
            Tamaños de train, val y test.

    Returns:
        Dict[str, List[Sample]]:
            Conjuntos por nombre.
    """
    if len(sizes) != len(SPLIT_NAMES):
        raise GeneratorConfigError(f"Se esperaban {len(SPLIT_NAMES)} tamaños, se recibieron {len(sizes)}")
    children: List[np.random.SeedSequence] = np.random.SeedSequence(seed).spawn(len(SPLIT_NAMES))
    return {
        name: generate(task, size, config, child)
        for name, size, child in zip(SPLIT_NAMES, sizes, children)
    }


def label_histogram(samples: Sequence[Sample]) -> Dict[int, int]:
    """Número de muestras por etiqueta, ordenado por etiqueta."""
    counts: Counter = Counter(int(sample.label) for sample in samples)
    return dict(sorted(counts.items()))
