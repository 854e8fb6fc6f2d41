""" Módulo que define el modelo de datos del grafo dirigido acíclico. """

from dataclasses import dataclass
from typing import FrozenSet, Tuple

import numpy as np
from numpy.typing import NDArray


@dataclass(frozen=True)
class Edge:
    """
    Arista dirigida con tipo.

    Attributes:
        tail (int):
            Nodo de origen.
        head (int):
            Nodo de destino.
        edge_type (int):
            Índice del tipo de arista, menor que num_edge_types.
    """

    tail: int
    head: int
    edge_type: int = 0


# pylint: disable=too-many-instance-attributes
@dataclass(frozen=True, eq=False)
class Dag:
    """
    Grafo dirigido acíclico validado e inmutable.

    Se construye con src.core.dag_operations.build_dag, que verifica la aciclicidad y
    llena los índices de predecesores y sucesores. Las características de los nodos se
    guardan como una matriz fila por nodo de solo lectura.

    Attributes:
        num_nodes (int):
            Número de nodos; los índices van de 0 a num_nodes - 1.
        edges (Tuple[Edge, ...]):
            Aristas en el orden recibido.
        features (NDArray[np.float64]):
            Matriz (num_nodes, d_in) con las características de entrada.
        num_edge_types (int):
            Tamaño de la tabla de tipos de arista.
        predecessors (Tuple[Tuple[Tuple[int, int], ...], ...]):
            Para cada nodo, pares (predecesor directo, tipo de arista) ordenados por nodo.
        successors (Tuple[Tuple[int, ...], ...]):
            Para cada nodo, sucesores directos ordenados.
        sources (FrozenSet[int]):
            Nodos sin predecesores directos.
        targets (FrozenSet[int]):
            Nodos sin sucesores directos.
    """

    num_nodes: int
    edges: Tuple[Edge, ...]
    features: NDArray[np.float64]
    num_edge_types: int
    predecessors: Tuple[Tuple[Tuple[int, int], ...], ...]
    successors: Tuple[Tuple[int, ...], ...]
    sources: FrozenSet[int]
    targets: FrozenSet[int]

    @property
    def input_dim(self) -> int:
        """Dimensión d_in de las características."""
        return int(self.features.shape[1])

    @property
    def num_edges(self) -> int:
        """Número de aristas."""
        return len(self.edges)

    def in_degree(self, node: int) -> int:
        """Grado de entrada de un nodo."""
        return len(self.predecessors[node])

    def edge_set(self) -> FrozenSet[Tuple[int, int, int]]:
        """Aristas como conjunto de tripletas (cola, cabeza, tipo)."""
        return frozenset((e.tail, e.head, e.edge_type) for e in self.edges)

    def __eq__(self, other: object) -> bool:
        # Igualdad estructural: mismos nodos, mismas aristas y mismas características
        if not isinstance(other, Dag):
            return NotImplemented
        return (
            self.num_nodes == other.num_nodes
            and self.edge_set() == other.edge_set()
            and self.features.shape == other.features.shape
            and bool(np.array_equal(self.features, other.features))
        )

    __hash__ = None  # type: ignore[assignment]
