""" Módulo que define los parámetros del generador de DAG sintéticos. """

from dataclasses import dataclass
from enum import Enum

from src.core.error_handling import GeneratorConfigError

# Dimensión de las características aleatorias
RANDOM_FEATURE_DIM: int = 8


class FeatureMode(str, Enum):
    """Tipo de características de los nodos generados."""

    ONEHOT_INDEGREE = "onehot_indegree"
    RANDOM = "random"
    ONEHOT_TOPOINDEX = "onehot_topoindex"


@dataclass(frozen=True)
class GeneratorConfig:
    """
    Parámetros del generador de DAG aleatorios.

    Attributes:
        n_min (int):
            Número mínimo de nodos.
        n_max (int):
            Número máximo de nodos; también fija la dimensión de las codificaciones one-hot
            y el número de clases de la tarea LP.
        edge_prob (float):
            Probabilidad de cada arista (i, j) con i < j.
        num_edge_types (int):
            Número de tipos de arista, sorteados de forma uniforme.
        feature_mode (FeatureMode):
            Características de los nodos.
    """

    n_min: int = 4
    n_max: int = 15
    edge_prob: float = 0.35
    num_edge_types: int = 2
    feature_mode: FeatureMode = FeatureMode.ONEHOT_INDEGREE

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "feature_mode", FeatureMode(self.feature_mode))
        except ValueError as e:
            raise GeneratorConfigError(f"feature_mode desconocido: {self.feature_mode}") from e
        if not 1 <= self.n_min <= self.n_max:
            raise GeneratorConfigError(
                f"Se requiere 1 <= n_min <= n_max, se recibió [{self.n_min}, {self.n_max}]"
            )
        if not 0.0 <= self.edge_prob <= 1.0:
            raise GeneratorConfigError(f"edge_prob fuera de [0, 1]: {self.edge_prob}")
        if self.num_edge_types < 1:
            raise GeneratorConfigError("num_edge_types debe ser >= 1")

    @property
    def feature_dim(self) -> int:
        """Dimensión d_in de las características generadas."""
        if self.feature_mode == FeatureMode.RANDOM:
            return RANDOM_FEATURE_DIM
        return self.n_max
