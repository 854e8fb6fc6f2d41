""" Grafos de uso común en las pruebas. """

import networkx as nx
import numpy as np

from src.core.dag_operations import build_dag


def figure_graph(dim=5):
    """Grafo de cinco nodos: 0, 1 y 2 apuntan a 3 y 3 apunta a 4."""
    features = np.eye(5) if dim == 5 else np.random.default_rng(7).standard_normal((5, dim))
    return build_dag(5, [(0, 3), (1, 3, 1), (2, 3), (3, 4, 1)], features, num_edge_types=2)


def chain(length, dim=1, features=None):
    """Cadena 0 -> 1 -> ... -> length - 1."""
    values = np.ones((length, dim)) if features is None else features
    return build_dag(length, [(i, i + 1) for i in range(length - 1)], values)


def to_networkx(dag):
    """Copia del grafo en networkx, como oráculo independiente."""
    graph = nx.DiGraph()
    graph.add_nodes_from(range(dag.num_nodes))
    graph.add_edges_from((e.tail, e.head) for e in dag.edges)
    return graph
