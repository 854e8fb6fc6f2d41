"""
Modulo con la línea base de paso de mensajes (MPNN).

Cada capa actualiza todos los nodos a la vez a partir de los estados de la capa anterior de
su vecindario no dirigido:

    h_v^l = tanh(h_v^{l-1} W1 + mean_{u in N(v)} h_u^{l-1} W2 + b)

La información avanza un salto por capa, a diferencia de DAGNN, que usa los estados de la
capa actual de los predecesores. La lectura es el promedio de los nodos de cada grafo
seguido de la capa FC.
"""

from typing import List, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from src.core.autodiff import Value, constant, gather_rows, matmul, reshape, segment_mean, tanh
from src.core.dag_operations import disjoint_union
from src.core.dagnn_params import DagnnParams
from src.core.error_handling import ShapeError
from src.models.dag import Dag
from src.models.dagnn_config import DagnnConfig


def _neighborhood(dag: Dag) -> Tuple[NDArray[np.int64], NDArray[np.int64]]:
    # Cada arista aporta un vecino en ambos sentidos
    tails: NDArray[np.int64] = np.asarray([e.tail for e in dag.edges], dtype=np.int64)
    heads: NDArray[np.int64] = np.asarray([e.head for e in dag.edges], dtype=np.int64)
    return np.concatenate([tails, heads]), np.concatenate([heads, tails])


def mpnn_states(dag: Dag, params: DagnnParams, config: DagnnConfig) -> List[Value]:
    """
    Estados de todas las capas de la línea base.

    Args:
        dag (Dag):
            Grafo (o unión disjunta de grafos).
        params (DagnnParams):
            Parámetros creados con init_mpnn_params.
        config (DagnnConfig):
            Configuración; se usan num_layers y las dimensiones.

    Returns:
        List[Value]:
            Matrices (num_nodes, d) para l = 0..L.

    Raises:
        ShapeError:
            Si la dimensión de las características no coincide con la configuración.
    """
    if dag.input_dim != config.input_dim:
        raise ShapeError(f"El grafo tiene d_in={dag.input_dim}, la configuración {config.input_dim}")
    neighbors, owners = _neighborhood(dag)
    states: List[Value] = [
        matmul(constant(dag.features), params["input.W"]) + params["input.b"]
    ]
    for layer in range(1, config.num_layers + 1):
        previous: Value = states[-1]
        # Un nodo aislado recibe el promedio vacío, que es cero
        gathered: Value = segment_mean(gather_rows(previous, neighbors), owners, dag.num_nodes)
        states.append(
            tanh(
                matmul(previous, params[f"mpnn{layer}.W1"])
                + matmul(gathered, params[f"mpnn{layer}.W2"])
                + params[f"mpnn{layer}.b"]
            )
        )
    return states


def mpnn_forward_batch(dags: Sequence[Dag], params: DagnnParams, config: DagnnConfig) -> Value:
    """
    Pasada de la línea base sobre varios grafos como una unión disjunta.

    Returns:
        Value:
            Matriz (len(dags), salida).
    """
    union, offsets = disjoint_union(dags)
    final: Value = mpnn_states(union, params, config)[-1]
    graph_of: NDArray[np.int64] = (
        np.searchsorted(np.asarray(offsets), np.arange(union.num_nodes), side="right") - 1
    )
    pooled: Value = segment_mean(final, graph_of, len(offsets))
    return matmul(pooled, params["readout.W"]) + params["readout.b"]


def mpnn_baseline_forward(dag: Dag, params: DagnnParams, config: DagnnConfig) -> Value:
    """Salida de la línea base para un grafo: k logits o un escalar."""
    return reshape(mpnn_forward_batch([dag], params, config), (config.output_dim,))
