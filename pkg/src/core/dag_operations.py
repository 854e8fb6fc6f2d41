""" Modulo con la construcción y las transformaciones de los DAG. """

from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.core.error_handling import (
    CycleError,
    DimensionError,
    DuplicateEdgeError,
    EmptyInput,
    InvalidPermutation,
    NodeIndexError,
    NonFiniteError,
    SelfLoopError,
)
from src.core.topo_batching import peel
from src.models.dag import Dag, Edge

EdgeLike = Union[Edge, Tuple[int, int], Tuple[int, int, int], Sequence[int]]


def _to_edge(edge: EdgeLike) -> Edge:
    if isinstance(edge, Edge):
        return edge
    values: List[int] = [int(v) for v in edge]
    if len(values) == 2:
        return Edge(values[0], values[1], 0)
    if len(values) == 3:
        return Edge(values[0], values[1], values[2])
    raise NodeIndexError(f"Arista mal formada: {edge!r}")


def _to_features(features: ArrayLike, num_nodes: int) -> NDArray[np.float64]:
    try:
        matrix: NDArray[np.float64] = np.array(features, dtype=np.float64)
    except (ValueError, TypeError) as e:
        raise DimensionError(f"Características irregulares: {e}") from e
    if matrix.ndim != 2:
        raise DimensionError(
            f"Las características deben ser una matriz (nodos, d_in), se recibió forma {matrix.shape}"
        )
    if matrix.shape[0] != num_nodes:
        raise DimensionError(
            f"Se esperaban {num_nodes} vectores de características, se recibieron {matrix.shape[0]}"
        )
    if not np.all(np.isfinite(matrix)):
        raise NonFiniteError("Las características contienen valores no finitos")
    matrix.setflags(write=False)
    return matrix


def _assemble(
    num_nodes: int,
    edges: Tuple[Edge, ...],
    features: NDArray[np.float64],
    num_edge_types: int,
) -> Dag:
    # Construye los índices sin validar; quien llama garantiza que el grafo es un DAG
    predecessors: List[List[Tuple[int, int]]] = [[] for _ in range(num_nodes)]
    successors: List[List[int]] = [[] for _ in range(num_nodes)]
    for edge in edges:
        predecessors[edge.head].append((edge.tail, edge.edge_type))
        successors[edge.tail].append(edge.head)
    return Dag(
        num_nodes=num_nodes,
        edges=edges,
        features=features,
        num_edge_types=num_edge_types,
        predecessors=tuple(tuple(sorted(p)) for p in predecessors),
        successors=tuple(tuple(sorted(s)) for s in successors),
        sources=frozenset(v for v in range(num_nodes) if not predecessors[v]),
        targets=frozenset(v for v in range(num_nodes) if not successors[v]),
    )


def build_dag(
    num_nodes: int,
    edges: Iterable[EdgeLike],
    features: ArrayLike,
    num_edge_types: Optional[int] = None,
) -> Dag:
    """
    Construye un DAG validado.

    Args:
        num_nodes (int):
            Número de nodos (>= 1).
        edges (Iterable[EdgeLike]):
            Aristas como Edge o tuplas (cola, cabeza[, tipo]).
        features (ArrayLike):
            Un vector de características por nodo, todos de la misma dimensión.
        num_edge_types (Optional[int]):
            Tamaño de la tabla de tipos; por defecto el mayor tipo presente más uno.

    Returns:
        Dag:
            Grafo con predecesores, sucesores, fuentes y destinos calculados.

    Raises:
        NodeIndexError:
            Si un nodo o un tipo de arista está fuera de rango.
        SelfLoopError:
            Si una arista va de un nodo a sí mismo.
        DuplicateEdgeError:
            Si un par (cola, cabeza) se repite.
        DimensionError:
            Si las características son irregulares o no coinciden con num_nodes.
        CycleError:
            Si el pelado de Kahn no consume todos los nodos.
    """
    if num_nodes < 1:
        raise DimensionError("El grafo debe tener al menos un nodo")

    edge_list: Tuple[Edge, ...] = tuple(_to_edge(edge) for edge in edges)
    max_type: int = max((edge.edge_type for edge in edge_list), default=0)
    types: int = num_edge_types if num_edge_types is not None else max_type + 1
    if types < 1:
        raise DimensionError(f"Se requiere al menos un tipo de arista, se recibió {types}")

    seen: set = set()
    for edge in edge_list:
        if not (0 <= edge.tail < num_nodes and 0 <= edge.head < num_nodes):
            raise NodeIndexError(f"Arista ({edge.tail}, {edge.head}) fuera de [0, {num_nodes})")
        if not 0 <= edge.edge_type < types:
            raise NodeIndexError(f"Tipo de arista {edge.edge_type} fuera de [0, {types})")
        if edge.tail == edge.head:
            raise SelfLoopError(f"Lazo en el nodo {edge.tail}")
        if (edge.tail, edge.head) in seen:
            raise DuplicateEdgeError(f"Arista duplicada ({edge.tail}, {edge.head})")
        seen.add((edge.tail, edge.head))

    matrix: NDArray[np.float64] = _to_features(features, num_nodes)
    dag: Dag = _assemble(num_nodes, edge_list, matrix, types)

    layers: List[List[int]] = peel(
        num_nodes, dag.successors, [len(preds) for preds in dag.predecessors]
    )
    consumed: int = sum(len(layer) for layer in layers)
    if consumed != num_nodes:
        raise CycleError(f"El grafo tiene un ciclo: {num_nodes - consumed} nodos sin pelar")
    return dag


def reverse(dag: Dag) -> Dag:
    """
    Invierte el sentido de todas las aristas conservando tipos y características.

    Args:
        dag (Dag):
            Grafo validado.

    Returns:
        Dag:
            Grafo invertido; fuentes y destinos intercambian su papel.
    """
    edges: Tuple[Edge, ...] = tuple(Edge(e.head, e.tail, e.edge_type) for e in dag.edges)
    return _assemble(dag.num_nodes, edges, dag.features, dag.num_edge_types)


def topological_order(dag: Dag) -> List[int]:
    """
    Orden topológico por recorrido en profundidad (postorden invertido).

    Es independiente del pelado por lotes, por eso sirve como oráculo.
    """
    visited: List[bool] = [False] * dag.num_nodes
    postorder: List[int] = []
    for root in range(dag.num_nodes):
        if visited[root]:
            continue
        visited[root] = True
        stack: List[Tuple[int, int]] = [(root, 0)]
        while stack:
            node, child = stack[-1]
            succs: Tuple[int, ...] = dag.successors[node]
            if child < len(succs):
                stack[-1] = (node, child + 1)
                nxt: int = succs[child]
                if not visited[nxt]:
                    visited[nxt] = True
                    stack.append((nxt, 0))
            else:
                stack.pop()
                postorder.append(node)
    return postorder[::-1]


def longest_path_node_count(dag: Dag) -> int:
    """
    Número de nodos del camino dirigido más largo, por programación dinámica.

    Args:
        dag (Dag):
            Grafo validado.

    Returns:
        int:
            Máximo, sobre todos los caminos, del número de nodos del camino.
    """
    depth: List[int] = [1] * dag.num_nodes
    for node in topological_order(dag):
        for pred, _ in dag.predecessors[node]:
            depth[node] = max(depth[node], depth[pred] + 1)
    return max(depth)


def permute(dag: Dag, perm: Sequence[int]) -> Dag:
    """
    Renombra los nodos: el nodo i pasa a llamarse perm[i].

    Args:
        dag (Dag):
            Grafo validado.
        perm (Sequence[int]):
            Biyección sobre [0, num_nodes).

    Returns:
        Dag:
            Grafo isomorfo con características y tipos de arista trasladados.

    Raises:
        InvalidPermutation:
            Si perm no es una biyección sobre los nodos.
    """
    mapping: List[int] = [int(p) for p in perm]
    if sorted(mapping) != list(range(dag.num_nodes)):
        raise InvalidPermutation(
            f"La permutación no es una biyección sobre [0, {dag.num_nodes})"
        )
    features: NDArray[np.float64] = np.empty_like(dag.features)
    features[mapping] = dag.features
    features.setflags(write=False)
    edges: Tuple[Edge, ...] = tuple(
        Edge(mapping[e.tail], mapping[e.head], e.edge_type) for e in dag.edges
    )
    return _assemble(dag.num_nodes, edges, features, dag.num_edge_types)


def disjoint_union(graphs: Sequence[Dag]) -> Tuple[Dag, List[int]]:
    """
    Une varios DAG en un solo grafo desconectado.

    Args:
        graphs (Sequence[Dag]):
            Grafos a unir, con la misma dimensión de características.

    Returns:
        Tuple[Dag, List[int]]:
            Grafo unión y desplazamiento del primer nodo de cada grafo.

    Raises:
        EmptyInput:
            Si la lista está vacía.
        DimensionError:
            Si las dimensiones de las características difieren.
    """
    if not graphs:
        raise EmptyInput("disjoint_union requiere al menos un grafo")
    if len({dag.input_dim for dag in graphs}) != 1:
        raise DimensionError("Los grafos tienen dimensiones de características distintas")
    if len(graphs) == 1:
        return graphs[0], [0]

    offsets: List[int] = []
    edges: List[Edge] = []
    offset: int = 0
    for dag in graphs:
        offsets.append(offset)
        edges.extend(Edge(e.tail + offset, e.head + offset, e.edge_type) for e in dag.edges)
        offset += dag.num_nodes
    features: NDArray[np.float64] = np.concatenate([dag.features for dag in graphs], axis=0)
    features.setflags(write=False)
    return (
        _assemble(offset, tuple(edges), features, max(dag.num_edge_types for dag in graphs)),
        offsets,
    )
