"""
Modulo con la pasada hacia adelante de DAGNN.

Cada capa recorre los lotes topológicos en orden. Para cada nodo v del lote actual el
agregador combina los estados de sus predecesores directos en la capa actual (ya calculados,
porque ocupan lotes anteriores) con su estado de la capa previa, y el combinador produce el
nuevo estado. La capa termina sobre todos los lotes antes de empezar la siguiente.

Dentro de un lote los nodos no dependen entre sí, así que se procesan juntos como filas de
una matriz. Las funciones por nodo (aggregate_*, combine_*) definen la semántica y alimentan
el oráculo recursivo forward_recursive.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from src.core.autodiff import (
    Value,
    concat,
    constant,
    gather_rows,
    matmul,
    reshape,
    segment_max,
    segment_softmax,
    segment_sum,
    sigmoid,
    softmax,
    sum_,
    tanh,
)
from src.core.dag_operations import disjoint_union, reverse
from src.core.dagnn_params import DagnnParams
from src.core.error_handling import ShapeError
from src.core.topo_batching import compute_batches, compute_batches_reverse, merge_batches
from src.models.dag import Dag
from src.models.dagnn_config import (
    Aggregator,
    Combiner,
    DagnnConfig,
    Direction,
    ReadoutScope,
)
from src.models.topo_batches import TopoBatches

PredStates = Sequence[Tuple[Value, int]]


@dataclass
class NodeStates:
    """
    Estados de todos los nodos en todas las capas para un sentido de procesamiento.

    Attributes:
        direction (Direction):
            Sentido en que se calcularon.
        layers (List[Value]):
            layers[l] es la matriz (num_nodes, d) con h_v^l; layers[0] es la proyección de
            las características de entrada.
    """

    direction: Direction
    layers: List[Value]

    def state(self, layer: int, node: int) -> NDArray[np.float64]:
        """Vector h_node^layer."""
        return self.layers[layer].data[node]

    def stacked(self) -> Value:
        """Concatenación (num_nodes, (L+1)·d) de los estados de todas las capas."""
        return concat(self.layers, axis=1)


def _check_vector(name: str, value: Value, size: int) -> None:
    # Los operadores por nodo reciben vectores de longitud d
    if value.shape != (size,):
        raise ShapeError(f"{name}: se esperaba un vector de longitud {size}, forma {value.shape}")


def attention_weights(
    h_prev_v: Value,
    pred_states: PredStates,
    params: DagnnParams,
    layer: int,
    direction: Direction = Direction.FORWARD,
    use_edge_attr: bool = False,
) -> Value:
    """
    Coeficientes de atención alpha_vu sobre los predecesores directos de v.

    El puntaje de u es w1·h_v^{l-1} + w2·h_u^l (+ w1·y_tau(u,v) con atributos de arista).
    El término de consulta es común a todos los u y el softmax lo cancela.

    Args:
        h_prev_v (Value):
            Estado de v en la capa anterior (consulta).
        pred_states (PredStates):
            Pares (h_u^l, tipo de arista) de los predecesores; no vacío.
        params (DagnnParams):
            Parámetros del modelo.
        layer (int):
            Capa l (desde 1).
        direction (Direction):
            Sentido de procesamiento.
        use_edge_attr (bool):
            Si se incluye el embedding del tipo de arista.

    Returns:
        Value:
            Vector con un coeficiente por predecesor, que suma 1.
    """
    tag: str = direction.value
    w1: Value = params[f"layer{layer}.{tag}.w1"]
    w2: Value = params[f"layer{layer}.{tag}.w2"]
    size: int = w1.shape[0]
    _check_vector("h_prev_v", h_prev_v, size)
    if not pred_states:
        raise ShapeError("attention_weights requiere al menos un predecesor")

    keys: List[Value] = []
    for h_u, edge_type in pred_states:
        _check_vector("h_u", h_u, size)
        key: Value = matmul(h_u, w2)
        if use_edge_attr:
            embedding: Value = reshape(gather_rows(params[f"edge_emb.{tag}"], [edge_type]), (size,))
            key = key + matmul(embedding, w1)
        keys.append(reshape(key, (1,)))
    return softmax(concat(keys, axis=0), shift=matmul(h_prev_v, w1))


def aggregate_attention(
    h_prev_v: Value,
    pred_states: PredStates,
    params: DagnnParams,
    layer: int,
    direction: Direction = Direction.FORWARD,
    use_edge_attr: bool = False,
) -> Value:
    """
    Mensaje m_v^l = sum_u alpha_vu h_u^l; el vector cero si v no tiene predecesores.

    Args:
        h_prev_v (Value):
            Estado de v en la capa anterior.
        pred_states (PredStates):
            Pares (h_u^l, tipo de arista) de los predecesores directos.
        params (DagnnParams):
            Parámetros del modelo.
        layer (int):
            Capa l (desde 1).
        direction (Direction):
            Sentido de procesamiento.
        use_edge_attr (bool):
            Si los coeficientes incluyen el tipo de arista.

    Returns:
        Value:
            Mensaje de longitud d.
    """
    size: int = h_prev_v.shape[0]
    if not pred_states:
        return constant(np.zeros(size))
    alpha: Value = attention_weights(h_prev_v, pred_states, params, layer, direction, use_edge_attr)
    stacked: Value = concat([reshape(h_u, (1, size)) for h_u, _ in pred_states], axis=0)
    return sum_(stacked * reshape(alpha, (len(pred_states), 1)), axis=0)


def aggregate_gated_sum(
    h_prev_v: Value,
    pred_states: PredStates,
    params: DagnnParams,
    layer: int,
    direction: Direction = Direction.FORWARD,
) -> Value:
    """
    Mensaje m = sum_u sigmoid(h_u Gw + Gb) * (h_u Mw + Mb).

    No usa la consulta h_prev_v; el conjunto vacío produce el vector cero.
    """
    size: int = h_prev_v.shape[0]
    if not pred_states:
        return constant(np.zeros(size))
    prefix: str = f"gate{layer}.{direction.value}"
    message: Optional[Value] = None
    for h_u, _ in pred_states:
        _check_vector("h_u", h_u, size)
        gate: Value = sigmoid(matmul(h_u, params[f"{prefix}.Gw"]) + params[f"{prefix}.Gb"])
        mapped: Value = matmul(h_u, params[f"{prefix}.Mw"]) + params[f"{prefix}.Mb"]
        term: Value = gate * mapped
        message = term if message is None else message + term
    return message


def combine_gru(
    h_prev_v: Value,
    m_v: Value,
    params: DagnnParams,
    layer: int,
    direction: Direction = Direction.FORWARD,
) -> Value:
    """
    Celda GRU con entrada x = h_v^{l-1} y estado s = m_v^l.

        z = sigmoid(x Wz + s Uz + bz)
        r = sigmoid(x Wr + s Ur + br)
        n = tanh(x Wn + (r * s) Un + bn)
        h = (1 - z) * n + z * s

    Returns:
        Value:
            Nuevo estado h_v^l.
    """
    if h_prev_v.shape != m_v.shape:
        raise ShapeError(f"combine_gru: formas {h_prev_v.shape} y {m_v.shape}")
    return _gru(h_prev_v, m_v, params, f"gru{layer}.{direction.value}")


def combine_fc(
    h_prev_v: Value,
    m_v: Value,
    params: DagnnParams,
    layer: int,
    direction: Direction = Direction.FORWARD,
) -> Value:
    """Combinador totalmente conectado: h = tanh([h_prev_v ∥ m_v] W + b)."""
    if h_prev_v.shape != m_v.shape:
        raise ShapeError(f"combine_fc: formas {h_prev_v.shape} y {m_v.shape}")
    return _fully_connected(h_prev_v, m_v, params, f"fc{layer}.{direction.value}")


def _gru(x: Value, s: Value, params: DagnnParams, prefix: str) -> Value:
    # Vale para vectores (d,) y para matrices (filas, d)
    def gate(name: str) -> Value:
        return params[f"{prefix}.{name}"]

    z: Value = sigmoid(matmul(x, gate("Wz")) + matmul(s, gate("Uz")) + gate("bz"))
    r: Value = sigmoid(matmul(x, gate("Wr")) + matmul(s, gate("Ur")) + gate("br"))
    n: Value = tanh(matmul(x, gate("Wn")) + matmul(r * s, gate("Un")) + gate("bn"))
    return (1.0 - z) * n + z * s


def _fully_connected(x: Value, s: Value, params: DagnnParams, prefix: str) -> Value:
    joined: Value = concat([x, s], axis=-1)
    return tanh(matmul(joined, params[f"{prefix}.W"]) + params[f"{prefix}.b"])


@dataclass(frozen=True)
class _BatchPlan:
    # Índices precalculados de un lote: filas de sus nodos y de las aristas entrantes
    nodes: NDArray[np.int64]
    pred_parts: NDArray[np.int64]
    pred_rows: NDArray[np.int64]
    segments: NDArray[np.int64]
    edge_types: NDArray[np.int64]


def _plan(graph: Dag, batches: TopoBatches) -> Tuple[List[_BatchPlan], NDArray[np.int64], NDArray[np.int64]]:
    if len(batches.batch_index) != graph.num_nodes:
        raise ShapeError("Los lotes no corresponden al grafo")
    row_of: List[int] = [0] * graph.num_nodes
    for batch in batches:
        for row, node in enumerate(batch):
            row_of[node] = row

    plans: List[_BatchPlan] = []
    for i, batch in enumerate(batches):
        parts: List[int] = []
        rows: List[int] = []
        segments: List[int] = []
        types: List[int] = []
        for row, node in enumerate(batch):
            for pred, edge_type in graph.predecessors[node]:
                if batches.batch_index[pred] >= i:
                    raise ShapeError(f"El predecesor {pred} de {node} no está en un lote anterior")
                parts.append(batches.batch_index[pred])
                rows.append(row_of[pred])
                segments.append(row)
                types.append(edge_type)
        plans.append(
            _BatchPlan(
                nodes=np.asarray(batch, dtype=np.int64),
                pred_parts=np.asarray(parts, dtype=np.int64),
                pred_rows=np.asarray(rows, dtype=np.int64),
                segments=np.asarray(segments, dtype=np.int64),
                edge_types=np.asarray(types, dtype=np.int64),
            )
        )
    return plans, np.asarray(batches.batch_index, dtype=np.int64), np.asarray(row_of, dtype=np.int64)


def _aggregate_batch(
    x: Value,
    preds: Value,
    plan: _BatchPlan,
    params: DagnnParams,
    config: DagnnConfig,
    layer: int,
    tag: str,
) -> Value:
    count: int = plan.nodes.shape[0]
    if config.aggregator == Aggregator.GATED_SUM:
        prefix: str = f"gate{layer}.{tag}"
        gate: Value = sigmoid(matmul(preds, params[f"{prefix}.Gw"]) + params[f"{prefix}.Gb"])
        mapped: Value = matmul(preds, params[f"{prefix}.Mw"]) + params[f"{prefix}.Mb"]
        return segment_sum(gate * mapped, plan.segments, count)

    w1: Value = params[f"layer{layer}.{tag}.w1"]
    keys: Value = matmul(preds, params[f"layer{layer}.{tag}.w2"])
    if config.aggregator == Aggregator.ATTENTION_EDGE:
        embeddings: Value = gather_rows(params[f"edge_emb.{tag}"], plan.edge_types)
        keys = keys + matmul(embeddings, w1)
    # La consulta entra como desplazamiento por segmento del softmax
    alpha: Value = segment_softmax(keys, plan.segments, count, shift=matmul(x, w1))
    weighted: Value = preds * reshape(alpha, (plan.segments.shape[0], 1))
    return segment_sum(weighted, plan.segments, count)


def _propagate(
    graph: Dag,
    batches: TopoBatches,
    params: DagnnParams,
    config: DagnnConfig,
    direction: Direction,
    initial: Value,
) -> NodeStates:
    plans, part_of, row_of = _plan(graph, batches)
    tag: str = direction.value
    d: int = config.hidden_dim
    layers: List[Value] = [initial]

    for layer in range(1, config.num_layers + 1):
        previous: Value = layers[-1]
        parts: List[Value] = []
        for plan in plans:
            x: Value = gather_rows(previous, plan.nodes)
            if plan.segments.shape[0] == 0:
                message: Value = constant(np.zeros((plan.nodes.shape[0], d)))
            else:
                preds: Value = gather_rows(parts, plan.pred_rows, plan.pred_parts)
                message = _aggregate_batch(x, preds, plan, params, config, layer, tag)
            if config.combiner == Combiner.GRU:
                parts.append(_gru(x, message, params, f"gru{layer}.{tag}"))
            else:
                parts.append(_fully_connected(x, message, params, f"fc{layer}.{tag}"))
        layers.append(gather_rows(parts, row_of, part_of))
    return NodeStates(direction=direction, layers=layers)


def input_projection(dag: Dag, params: DagnnParams) -> Value:
    """Estados h_v^0 = x_v W_in + b_in como matriz (num_nodes, d)."""
    if dag.input_dim != params["input.W"].shape[0]:
        raise ShapeError(
            f"El grafo tiene d_in={dag.input_dim}, el modelo espera {params['input.W'].shape[0]}"
        )
    return matmul(constant(dag.features), params["input.W"]) + params["input.b"]


def forward_direction(
    dag: Dag,
    batches: TopoBatches,
    params: DagnnParams,
    config: DagnnConfig,
    direction: Direction = Direction.FORWARD,
    initial: Optional[Value] = None,
) -> NodeStates:
    """
    Calcula los estados de todas las capas en un sentido, lote por lote.

    Args:
        dag (Dag):
            Grafo original.
        batches (TopoBatches):
            Lotes de dag (sentido FORWARD) o de reverse(dag) (sentido REVERSE).
        params (DagnnParams):
            Parámetros del modelo.
        config (DagnnConfig):
            Configuración del modelo.
        direction (Direction):
            Sentido de procesamiento.
        initial (Optional[Value]):
            Estados h^0 ya proyectados; por defecto se calculan.

    Returns:
        NodeStates:
            Estados h_v^l para l = 0..L.

    Raises:
        ShapeError:
            Si los lotes no son consistentes con el grafo o las dimensiones no coinciden.
    """
    graph: Dag = dag if direction == Direction.FORWARD else reverse(dag)
    h0: Value = initial if initial is not None else input_projection(dag, params)
    return _propagate(graph, batches, params, config, direction, h0)


def forward_recursive(
    dag: Dag,
    params: DagnnParams,
    config: DagnnConfig,
    direction: Direction = Direction.FORWARD,
) -> NodeStates:
    """
    Evaluación nodo por nodo, sin lotes, por recursión memorizada sobre el orden parcial.

    Sirve de oráculo para la pasada por lotes.
    """
    graph: Dag = dag if direction == Direction.FORWARD else reverse(dag)
    h0: Value = input_projection(dag, params)
    d: int = config.hidden_dim
    rows: List[Value] = [reshape(gather_rows(h0, [v]), (d,)) for v in range(dag.num_nodes)]
    layers: List[Value] = [h0]

    for layer in range(1, config.num_layers + 1):
        memo: Dict[int, Value] = {}

        def state(node: int, layer: int = layer, previous: List[Value] = rows) -> Value:
            if node not in memo:
                preds: List[Tuple[Value, int]] = [
                    (state(u), edge_type) for u, edge_type in graph.predecessors[node]
                ]
                h_prev: Value = previous[node]
                if config.aggregator == Aggregator.GATED_SUM:
                    message: Value = aggregate_gated_sum(h_prev, preds, params, layer, direction)
                else:
                    message = aggregate_attention(
                        h_prev,
                        preds,
                        params,
                        layer,
                        direction,
                        use_edge_attr=config.aggregator == Aggregator.ATTENTION_EDGE,
                    )
                if config.combiner == Combiner.GRU:
                    memo[node] = combine_gru(h_prev, message, params, layer, direction)
                else:
                    memo[node] = combine_fc(h_prev, message, params, layer, direction)
            return memo[node]

        rows = [state(v) for v in range(dag.num_nodes)]
        layers.append(concat([reshape(row, (1, d)) for row in rows], axis=0))
    return NodeStates(direction=direction, layers=layers)


def _pool_nodes(graph: Dag, scope: ReadoutScope, use_sources: bool) -> List[int]:
    # En la dirección inversa los destinos son las fuentes del grafo original
    if scope == ReadoutScope.ALL_NODES:
        return list(range(graph.num_nodes))
    return sorted(graph.sources if use_sources else graph.targets)


def pooled_representation(
    states: NodeStates,
    reverse_states: Optional[NodeStates],
    dag: Dag,
    config: DagnnConfig,
    offsets: Optional[Sequence[int]] = None,
) -> Value:
    """
    Max-pooling de los estados concatenados sobre los destinos (y sobre las fuentes en el
    sentido inverso, que son los destinos del grafo invertido).

    Args:
        states (NodeStates):
            Estados del sentido directo.
        reverse_states (Optional[NodeStates]):
            Estados del sentido inverso, o None si el modelo es unidireccional.
        dag (Dag):
            Grafo (o unión disjunta de grafos).
        config (DagnnConfig):
            Configuración del modelo.
        offsets (Optional[Sequence[int]]):
            Primer nodo de cada grafo de la unión; por defecto un solo grafo.

    Returns:
        Value:
            Matriz (num_grafos, (2 si bidireccional)·(L+1)·d).
    """
    starts: NDArray[np.int64] = np.asarray(offsets if offsets is not None else [0], dtype=np.int64)
    graph_of: NDArray[np.int64] = np.searchsorted(starts, np.arange(dag.num_nodes), side="right") - 1
    count: int = starts.shape[0]

    pooled: List[Value] = []
    for node_states, use_sources in ((states, False), (reverse_states, True)):
        if node_states is None:
            continue
        nodes: List[int] = _pool_nodes(dag, config.readout_scope, use_sources)
        selected: Value = gather_rows(node_states.stacked(), nodes)
        pooled.append(segment_max(selected, graph_of[nodes], count))
    return pooled[0] if len(pooled) == 1 else concat(pooled, axis=1)


def readout(
    states: NodeStates,
    reverse_states: Optional[NodeStates],
    dag: Dag,
    params: DagnnParams,
    config: DagnnConfig,
    offsets: Optional[Sequence[int]] = None,
) -> Value:
    """
    Representación del grafo: pooling sobre los destinos seguido de la capa FC.

    Returns:
        Value:
            Vector (salida,) para un grafo, o matriz (num_grafos, salida) si se indican
            offsets.
    """
    pooled: Value = pooled_representation(states, reverse_states, dag, config, offsets)
    if pooled.shape[1] != params["readout.W"].shape[0]:
        raise ShapeError(
            f"Lectura de dimensión {pooled.shape[1]}, la capa FC espera {params['readout.W'].shape[0]}"
        )
    output: Value = matmul(pooled, params["readout.W"]) + params["readout.b"]
    if offsets is None:
        return reshape(output, (config.output_dim,))
    return output


def _check_graph(dag: Dag, config: DagnnConfig) -> None:
    if dag.input_dim != config.input_dim:
        raise ShapeError(f"El grafo tiene d_in={dag.input_dim}, la configuración {config.input_dim}")
    if any(edge.edge_type >= config.num_edge_types for edge in dag.edges):
        raise ShapeError(f"Tipo de arista fuera de [0, {config.num_edge_types})")


def model_forward_batch(dags: Sequence[Dag], params: DagnnParams, config: DagnnConfig) -> Value:
    """
    Pasada completa sobre varios grafos procesados como una sola unión disjunta.

    Los lotes i de todos los grafos se combinan en un solo lote y la lectura se segmenta por
    grafo.

    Returns:
        Value:
            Matriz (len(dags), salida) con logits o escalares.
    """
    for dag in dags:
        _check_graph(dag, config)
    union, offsets = disjoint_union(dags)
    h0: Value = input_projection(union, params)
    states: NodeStates = _propagate(
        union, merge_batches(dags), params, config, Direction.FORWARD, h0
    )
    reverse_states: Optional[NodeStates] = None
    if config.bidirectional:
        reverse_states = _propagate(
            reverse(union), compute_batches_reverse(union), params, config, Direction.REVERSE, h0
        )
    return readout(states, reverse_states, union, params, config, offsets)


def model_forward(dag: Dag, params: DagnnParams, config: DagnnConfig) -> Value:
    """
    Pasada completa de DAGNN sobre un grafo.

    Returns:
        Value:
            Vector de k logits (clasificación) o de un escalar (regresión).
    """
    _check_graph(dag, config)
    h0: Value = input_projection(dag, params)
    states: NodeStates = forward_direction(dag, compute_batches(dag), params, config, Direction.FORWARD, h0)
    reverse_states: Optional[NodeStates] = None
    if config.bidirectional:
        reverse_states = forward_direction(
            dag, compute_batches_reverse(dag), params, config, Direction.REVERSE, h0
        )
    return readout(states, reverse_states, dag, params, config)
