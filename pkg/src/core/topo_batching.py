"""
Modulo para el cálculo de los lotes topológicos de un DAG.

Los lotes se obtienen pelando el grafo: los nodos sin predecesores forman el primer lote, se
retiran junto con sus aristas salientes y los nodos que quedan sin predecesores forman el
siguiente. El número de lotes coincide con el número de nodos del camino más largo.
"""

from typing import List, Sequence

from src.core.error_handling import EmptyInput
from src.models.dag import Dag
from src.models.topo_batches import TopoBatches


def peel(num_nodes: int, successors: Sequence[Sequence[int]], in_degree: Sequence[int]) -> List[List[int]]:
    """
    Pela el grafo por conteo de grados de entrada (estilo Kahn), en O(|V|+|E|).

    Args:
        num_nodes (int):
            Número de nodos.
        successors (Sequence[Sequence[int]]):
            Sucesores de cada nodo en el sentido del pelado.
        in_degree (Sequence[int]):
            Grado de entrada de cada nodo en el sentido del pelado.

    Returns:
        List[List[int]]:
            Capas en orden, cada una ordenada de forma ascendente. Si el grafo tiene un ciclo
            los nodos del ciclo no aparecen en ninguna capa.
    """
    remaining: List[int] = list(in_degree)
    current: List[int] = [v for v in range(num_nodes) if remaining[v] == 0]
    layers: List[List[int]] = []
    while current:
        layers.append(current)
        following: List[int] = []
        for node in current:
            for succ in successors[node]:
                remaining[succ] -= 1
                if remaining[succ] == 0:
                    following.append(succ)
        current = sorted(following)
    return layers


def compute_batches(dag: Dag) -> TopoBatches:
    """
    Calcula los lotes topológicos del DAG.

    Args:
        dag (Dag):
            Grafo validado.

    Returns:
        TopoBatches:
            Lotes con B_0 igual a las fuentes del grafo.
    """
    layers: List[List[int]] = peel(
        dag.num_nodes,
        dag.successors,
        [len(preds) for preds in dag.predecessors],
    )
    return TopoBatches.from_batches(layers, dag.num_nodes)


def compute_batches_reverse(dag: Dag) -> TopoBatches:
    """
    Calcula los lotes topológicos del DAG invertido sin construirlo.

    Args:
        dag (Dag):
            Grafo validado.

    Returns:
        TopoBatches:
            Lotes del grafo invertido; el primero son los destinos del grafo original.
    """
    predecessor_nodes: List[List[int]] = [[u for u, _ in preds] for preds in dag.predecessors]
    layers: List[List[int]] = peel(
        dag.num_nodes,
        predecessor_nodes,
        [len(succs) for succs in dag.successors],
    )
    return TopoBatches.from_batches(layers, dag.num_nodes)


def merge_batches(graphs: Sequence[Dag]) -> TopoBatches:
    """
    Une los lotes de varios grafos: el lote i combinado es la unión de los lotes i.

    Los nodos se desplazan al espacio de índices de la unión disjunta, en el orden de la
    lista de grafos.

    Args:
        graphs (Sequence[Dag]):
            Grafos a combinar.

    Returns:
        TopoBatches:
            Lotes sobre la unión disjunta.

    Raises:
        EmptyInput:
            Si la lista de grafos está vacía.
    """
    if not graphs:
        raise EmptyInput("merge_batches requiere al menos un grafo")

    merged: List[List[int]] = []
    offset: int = 0
    for dag in graphs:
        for i, batch in enumerate(compute_batches(dag)):
            if i == len(merged):
                merged.append([])
            merged[i].extend(node + offset for node in batch)
        offset += dag.num_nodes
    return TopoBatches.from_batches(merged, offset)
