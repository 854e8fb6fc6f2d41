"""
Modulo con el contenedor de parámetros entrenables y su inicialización.

Los nombres de los parámetros son fijos para que los checkpoints sean portables:

    input.W, input.b                         proyección de entrada d_in -> d
    layer{l}.{dir}.w1, layer{l}.{dir}.w2     vectores de atención (w3 atado a w1)
    edge_emb.{dir}                           embeddings de tipos de arista
    gate{l}.{dir}.Gw|Gb|Mw|Mb                agregador de suma con compuerta
    gru{l}.{dir}.Wz|Uz|bz|Wr|Ur|br|Wn|Un|bn  celda GRU
    fc{l}.{dir}.W|b                          combinador totalmente conectado
    mpnn{l}.W1|W2|b                          capas de la línea base MPNN
    readout.W, readout.b                     capa FC de la lectura
"""

from collections import OrderedDict
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from src.core.autodiff import DenseArray, Value, parameter
from src.core.error_handling import CheckpointError
from src.models.dagnn_config import Aggregator, Combiner, DagnnConfig

GRU_GATES: Tuple[str, ...] = ("Wz", "Uz", "bz", "Wr", "Ur", "br", "Wn", "Un", "bn")


class DagnnParams:
    """
    Conjunto ordenado de parámetros entrenables, indexado por nombre.
    """

    def __init__(self, values: "OrderedDict[str, Value]") -> None:
        self._values: "OrderedDict[str, Value]" = values

    def __getitem__(self, name: str) -> Value:
        try:
            return self._values[name]
        except KeyError as e:
            raise CheckpointError(f"Parámetro inexistente: {name}") from e

    def __contains__(self, name: str) -> bool:
        return name in self._values

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def get(self, name: str) -> Optional[Value]:
        """Parámetro por nombre o None si no existe."""
        return self._values.get(name)

    def items(self) -> List[Tuple[str, Value]]:
        """Pares (nombre, parámetro) en orden."""
        return list(self._values.items())

    def values(self) -> List[Value]:
        """Parámetros en orden."""
        return list(self._values.values())

    @property
    def num_scalars(self) -> int:
        """Número total de coordenadas entrenables."""
        return int(sum(v.data.size for v in self._values.values()))

    def zero_grad(self) -> None:
        """Reinicia los gradientes de todos los parámetros."""
        for value in self._values.values():
            value.zero_grad()

    def to_arrays(self) -> Dict[str, DenseArray]:
        """Copia de los valores como arreglos numpy."""
        return {name: value.data.copy() for name, value in self._values.items()}

    def copy(self) -> "DagnnParams":
        """Copia profunda con gradientes en cero."""
        return DagnnParams(
            OrderedDict((name, parameter(value.data.copy())) for name, value in self._values.items())
        )

    @classmethod
    def from_arrays(cls, arrays: Dict[str, DenseArray]) -> "DagnnParams":
        """Construye el contenedor a partir de arreglos (por ejemplo de un checkpoint)."""
        return cls(OrderedDict((name, parameter(array)) for name, array in arrays.items()))

    def check_compatible(self, expected: "DagnnParams") -> None:
        """
        Verifica que los nombres y formas coincidan con los de otro conjunto.

        Raises:
            CheckpointError:
                Si falta un parámetro, sobra uno o una forma difiere.
        """
        if list(self._values) != list(expected):
            missing = sorted(set(expected) - set(self._values))
            extra = sorted(set(self._values) - set(expected))
            raise CheckpointError(f"Parámetros incompatibles; faltan {missing}, sobran {extra}")
        for name, value in self._values.items():
            if value.shape != expected[name].shape:
                raise CheckpointError(
                    f"Forma de {name}: {value.shape}, se esperaba {expected[name].shape}"
                )


class _Initializer:
    # Uniforme en [-1/sqrt(d), 1/sqrt(d)] para matrices y vectores; ceros para sesgos
    def __init__(self, hidden_dim: int, seed: int) -> None:
        self.rng: np.random.Generator = np.random.default_rng(seed)
        self.bound: float = 1.0 / np.sqrt(hidden_dim)
        self.values: "OrderedDict[str, Value]" = OrderedDict()

    def weight(self, name: str, shape: Tuple[int, ...]) -> None:
        self.values[name] = parameter(self.rng.uniform(-self.bound, self.bound, size=shape))

    def bias(self, name: str, size: int) -> None:
        self.values[name] = parameter(np.zeros(size))


def init_dagnn_params(config: DagnnConfig, seed: int = 0) -> DagnnParams:
    """
    Inicializa los parámetros de DAGNN para una configuración.

    Los parámetros de cada sentido de procesamiento son independientes; la proyección de
    entrada y la lectura son compartidas.

    Args:
        config (DagnnConfig):
            Configuración del modelo.
        seed (int):
            Semilla de la inicialización.

    Returns:
        DagnnParams:
            Parámetros con las formas de la configuración.
    """
    d: int = config.hidden_dim
    init: _Initializer = _Initializer(d, seed)
    init.weight("input.W", (config.input_dim, d))
    init.bias("input.b", d)

    for direction in config.directions:
        tag: str = direction.value
        if config.aggregator == Aggregator.ATTENTION_EDGE:
            init.weight(f"edge_emb.{tag}", (config.num_edge_types, d))
        for layer in range(1, config.num_layers + 1):
            if config.aggregator == Aggregator.GATED_SUM:
                init.weight(f"gate{layer}.{tag}.Gw", (d, d))
                init.bias(f"gate{layer}.{tag}.Gb", d)
                init.weight(f"gate{layer}.{tag}.Mw", (d, d))
                init.bias(f"gate{layer}.{tag}.Mb", d)
            else:
                init.weight(f"layer{layer}.{tag}.w1", (d,))
                init.weight(f"layer{layer}.{tag}.w2", (d,))
            if config.combiner == Combiner.GRU:
                for gate in GRU_GATES:
                    if gate.startswith("b"):
                        init.bias(f"gru{layer}.{tag}.{gate}", d)
                    else:
                        init.weight(f"gru{layer}.{tag}.{gate}", (d, d))
            else:
                init.weight(f"fc{layer}.{tag}.W", (2 * d, d))
                init.bias(f"fc{layer}.{tag}.b", d)

    init.weight("readout.W", (config.readout_input_dim, config.output_dim))
    init.bias("readout.b", config.output_dim)
    return DagnnParams(init.values)


def init_mpnn_params(config: DagnnConfig, seed: int = 0) -> DagnnParams:
    """
    Inicializa los parámetros de la línea base MPNN.

    Args:
        config (DagnnConfig):
            Configuración; se usan num_layers, hidden_dim, input_dim y la salida.
        seed (int):
            Semilla de la inicialización.

    Returns:
        DagnnParams:
            Parámetros de la línea base.
    """
    d: int = config.hidden_dim
    init: _Initializer = _Initializer(d, seed)
    init.weight("input.W", (config.input_dim, d))
    init.bias("input.b", d)
    for layer in range(1, config.num_layers + 1):
        init.weight(f"mpnn{layer}.W1", (d, d))
        init.weight(f"mpnn{layer}.W2", (d, d))
        init.bias(f"mpnn{layer}.b", d)
    init.weight("readout.W", (d, config.output_dim))
    init.bias("readout.b", config.output_dim)
    return DagnnParams(init.values)
