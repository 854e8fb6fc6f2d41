""" Módulo que define la configuración de la arquitectura. """

from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import Any, Dict

from src.core.error_handling import ConfigError


class Aggregator(str, Enum):
    """Operador de agregación de los predecesores."""

    ATTENTION = "attention"
    ATTENTION_EDGE = "attention_edge"
    GATED_SUM = "gated_sum"


class Combiner(str, Enum):
    """Operador que combina el estado previo con el mensaje."""

    GRU = "gru"
    FULLY_CONNECTED = "fully_connected"


class ReadoutScope(str, Enum):
    """Nodos sobre los que se hace el max-pooling de la lectura."""

    TARGETS_ONLY = "targets_only"
    ALL_NODES = "all_nodes"


class OutputKind(str, Enum):
    """Tipo de salida del modelo."""

    CLASSES = "classes"
    SCALAR = "scalar"


class Direction(str, Enum):
    """Sentido de procesamiento del DAG."""

    FORWARD = "fwd"
    REVERSE = "rev"


# pylint: disable=too-many-instance-attributes
@dataclass(frozen=True)
class DagnnConfig:
    """
    Hiperparámetros estructurales del modelo.

    La misma configuración se usa para la línea base MPNN, que solo lee num_layers,
    hidden_dim, input_dim y la salida.

    Attributes:
        num_layers (int):
            Número de capas L (>= 1).
        hidden_dim (int):
            Dimensión d de los estados ocultos.
        input_dim (int):
            Dimensión d_in de las características de entrada.
        num_edge_types (int):
            Tamaño de la tabla de embeddings de aristas.
        bidirectional (bool):
            Si también se procesa el DAG invertido.
        aggregator (Aggregator):
            Agregador de los predecesores.
        combiner (Combiner):
            Combinador del estado previo y el mensaje.
        readout_scope (ReadoutScope):
            Nodos incluidos en el pooling de la lectura.
        output (OutputKind):
            Clasificación en num_classes clases o un escalar.
        num_classes (int):
            Número de clases cuando output es CLASSES.
    """

    num_layers: int = 2
    hidden_dim: int = 32
    input_dim: int = 1
    num_edge_types: int = 1
    bidirectional: bool = False
    aggregator: Aggregator = Aggregator.ATTENTION_EDGE
    combiner: Combiner = Combiner.GRU
    readout_scope: ReadoutScope = ReadoutScope.TARGETS_ONLY
    output: OutputKind = OutputKind.CLASSES
    num_classes: int = 2

    def __post_init__(self) -> None:
        # Normaliza los valores recibidos como texto (por ejemplo desde un checkpoint)
        try:
            object.__setattr__(self, "aggregator", Aggregator(self.aggregator))
            object.__setattr__(self, "combiner", Combiner(self.combiner))
            object.__setattr__(self, "readout_scope", ReadoutScope(self.readout_scope))
            object.__setattr__(self, "output", OutputKind(self.output))
        except ValueError as e:
            raise ConfigError(str(e)) from e
        if self.num_layers < 1:
            raise ConfigError(f"num_layers debe ser >= 1, se recibió {self.num_layers}")
        for name in ("hidden_dim", "input_dim", "num_edge_types"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} debe ser >= 1, se recibió {getattr(self, name)}")
        if self.output == OutputKind.CLASSES and self.num_classes < 2:
            raise ConfigError(f"num_classes debe ser >= 2, se recibió {self.num_classes}")

    @property
    def output_dim(self) -> int:
        """Número de salidas: k logits o un escalar."""
        return self.num_classes if self.output == OutputKind.CLASSES else 1

    @property
    def directions(self) -> tuple:
        """Sentidos de procesamiento activos."""
        if self.bidirectional:
            return (Direction.FORWARD, Direction.REVERSE)
        return (Direction.FORWARD,)

    @property
    def readout_input_dim(self) -> int:
        """Dimensión previa a la capa FC de la lectura: (2 si bidireccional) * (L+1) * d."""
        return len(self.directions) * (self.num_layers + 1) * self.hidden_dim

    def with_changes(self, **changes: Any) -> "DagnnConfig":
        """Copia de la configuración con los campos indicados reemplazados."""
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        """Representación serializable en JSON."""
        values: Dict[str, Any] = asdict(self)
        for key, value in values.items():
            if isinstance(value, Enum):
                values[key] = value.value
        return values

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "DagnnConfig":
        """Reconstruye la configuración desde su representación JSON."""
        try:
            return cls(**values)
        except TypeError as e:
            raise ConfigError(f"Configuración inválida: {e}") from e
