""" Módulo que define el modelo de datos de los lotes topológicos. """

from dataclasses import dataclass
from typing import Iterator, List, Tuple


@dataclass(frozen=True)
class TopoBatches:
    """
    Partición ordenada de los nodos de un DAG en lotes B_0, B_1, ...

    Los lotes deben procesarse en orden; los nodos de un mismo lote no dependen entre sí
    y pueden procesarse en cualquier orden o en paralelo.

    Attributes:
        batches (Tuple[Tuple[int, ...], ...]):
            Lotes en orden de procesamiento, cada uno con sus nodos en orden ascendente.
        batch_index (Tuple[int, ...]):
            Índice del lote de cada nodo, para consultas O(1).
    """

    batches: Tuple[Tuple[int, ...], ...]
    batch_index: Tuple[int, ...]

    @classmethod
    def from_batches(cls, batches: List[List[int]], num_nodes: int) -> "TopoBatches":
        """
        Construye la estructura a partir de las listas de nodos de cada lote.

        Args:
            batches (List[List[int]]):
                Nodos de cada lote.
            num_nodes (int):
                Número total de nodos.

        Returns:
            TopoBatches:
                Lotes ordenados con el índice por nodo ya calculado.
        """
        index: List[int] = [-1] * num_nodes
        for i, batch in enumerate(batches):
            for node in batch:
                index[node] = i
        return cls(
            batches=tuple(tuple(sorted(batch)) for batch in batches),
            batch_index=tuple(index),
        )

    @property
    def num_batches(self) -> int:
        """Número de lotes."""
        return len(self.batches)

    @property
    def max_width(self) -> int:
        """Tamaño del lote más grande."""
        return max((len(batch) for batch in self.batches), default=0)

    def __iter__(self) -> Iterator[Tuple[int, ...]]:
        return iter(self.batches)

    def __len__(self) -> int:
        return len(self.batches)
