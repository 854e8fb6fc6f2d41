import math
import unittest

import numpy as np

from src.core.autodiff import constant
from src.core.dag_operations import build_dag, permute
from src.core.dagnn_layers import (
    aggregate_attention,
    aggregate_gated_sum,
    attention_weights,
    combine_fc,
    combine_gru,
    forward_direction,
    forward_recursive,
    input_projection,
    model_forward,
    model_forward_batch,
    pooled_representation,
    readout,
)
from src.core.dagnn_params import DagnnParams, init_dagnn_params, init_mpnn_params
from src.core.datasets import gen_random_dag
from src.core.error_handling import ShapeError
from src.core.mpnn_baseline import mpnn_states
from src.core.topo_batching import compute_batches, compute_batches_reverse
from src.models.dagnn_config import (
    Aggregator,
    Combiner,
    DagnnConfig,
    Direction,
    OutputKind,
    ReadoutScope,
)
from tests.fixtures import chain, figure_graph


def zero_params(config):
    params = init_dagnn_params(config)
    return DagnnParams.from_arrays({name: np.zeros_like(a) for name, a in params.to_arrays().items()})


def sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


def reference_gru(x, s, arrays, prefix):
    # Celda GRU coordenada por coordenada
    d = len(x)

    def affine(name_w, name_u, name_b, state, j):
        total = arrays[f"{prefix}.{name_b}"][j]
        for i in range(d):
            total += x[i] * arrays[f"{prefix}.{name_w}"][i, j]
            total += state[i] * arrays[f"{prefix}.{name_u}"][i, j]
        return total

    z = [sigmoid(affine("Wz", "Uz", "bz", s, j)) for j in range(d)]
    r = [sigmoid(affine("Wr", "Ur", "br", s, j)) for j in range(d)]
    gated = [r[i] * s[i] for i in range(d)]
    n = [math.tanh(affine("Wn", "Un", "bn", gated, j)) for j in range(d)]
    return [(1 - z[j]) * n[j] + z[j] * s[j] for j in range(d)]


class TestAggregators(unittest.TestCase):
    """Pruebas de los agregadores por nodo."""

    def setUp(self):
        self.config = DagnnConfig(hidden_dim=2, input_dim=1, num_edge_types=2)
        self.params = init_dagnn_params(self.config, seed=3)
        self.rng = np.random.default_rng(8)

    def test_empty_predecessors_give_zero(self):
        h = constant([0.3, -0.1])
        np.testing.assert_array_equal(aggregate_attention(h, [], self.params, 1).data, [0.0, 0.0])
        gated = DagnnConfig(hidden_dim=2, aggregator=Aggregator.GATED_SUM)
        gated_params = init_dagnn_params(gated)
        np.testing.assert_array_equal(aggregate_gated_sum(h, [], gated_params, 1).data, [0.0, 0.0])

    def test_zero_attention_is_uniform(self):
        params = zero_params(self.config)
        preds = [(constant([1.0, 0.0]), 0), (constant([0.0, 1.0]), 1)]
        h = constant([0.4, 0.9])
        alpha = attention_weights(h, preds, params, 1, use_edge_attr=True)
        np.testing.assert_allclose(alpha.data, [0.5, 0.5])
        message = aggregate_attention(h, preds, params, 1, use_edge_attr=True)
        np.testing.assert_allclose(message.data, [0.5, 0.5])

    def test_weights_sum_to_one(self):
        for _ in range(50):
            count = int(self.rng.integers(1, 6))
            preds = [(constant(self.rng.standard_normal(2)), int(self.rng.integers(2))) for _ in range(count)]
            alpha = attention_weights(constant(self.rng.standard_normal(2)), preds, self.params, 2, use_edge_attr=True)
            self.assertLess(abs(alpha.data.sum() - 1.0), 1e-12)

    def test_query_cancels(self):
        for trial in range(100):
            preds = [(constant(self.rng.standard_normal(2)), int(self.rng.integers(2))) for _ in range(3)]
            first = constant(self.rng.uniform(-5, 5, 2))
            second = constant(self.rng.uniform(-5, 5, 2))
            for use_edge_attr in (False, True):
                a = attention_weights(first, preds, self.params, 1, use_edge_attr=use_edge_attr)
                b = attention_weights(second, preds, self.params, 1, use_edge_attr=use_edge_attr)
                self.assertLess(np.max(np.abs(a.data - b.data)), 1e-12, msg=f"intento {trial}")

    def test_edge_type_changes_weights(self):
        h_u = constant([0.5, -0.5])
        preds = [(h_u, 0), (h_u, 1)]
        query = constant([0.0, 0.0])
        plain = attention_weights(query, preds, self.params, 1, use_edge_attr=False)
        typed = attention_weights(query, preds, self.params, 1, use_edge_attr=True)
        np.testing.assert_allclose(plain.data, [0.5, 0.5])
        self.assertGreater(abs(typed.data[0] - 0.5), 1e-6)

    def test_gated_sum_zero_gates(self):
        config = DagnnConfig(hidden_dim=2, aggregator=Aggregator.GATED_SUM)
        arrays = init_dagnn_params(config, seed=1).to_arrays()
        arrays["gate1.fwd.Gw"] = np.zeros((2, 2))
        arrays["gate1.fwd.Mb"] = np.array([0.1, -0.2])
        params = DagnnParams.from_arrays(arrays)
        h_u = np.array([1.5, -0.5])
        message = aggregate_gated_sum(constant([9.0, 9.0]), [(constant(h_u), 0)], params, 1)
        expected = 0.5 * (h_u @ arrays["gate1.fwd.Mw"] + arrays["gate1.fwd.Mb"])
        np.testing.assert_allclose(message.data, expected)

    def test_gated_sum_ignores_query(self):
        config = DagnnConfig(hidden_dim=2, aggregator=Aggregator.GATED_SUM)
        params = init_dagnn_params(config, seed=2)
        preds = [(constant([0.2, 0.7]), 0), (constant([-1.0, 0.3]), 0)]
        first = aggregate_gated_sum(constant([1.0, 2.0]), preds, params, 1)
        second = aggregate_gated_sum(constant([-4.0, 0.0]), preds, params, 1)
        np.testing.assert_array_equal(first.data, second.data)

    def test_shape_mismatch(self):
        with self.assertRaises(ShapeError):
            aggregate_attention(constant([1.0, 2.0]), [(constant([1.0, 2.0, 3.0]), 0)], self.params, 1)


class TestCombiners(unittest.TestCase):
    """Pruebas de los combinadores GRU y FC."""

    def setUp(self):
        self.config = DagnnConfig(hidden_dim=3)
        self.rng = np.random.default_rng(21)

    def test_gru_zero_params(self):
        params = zero_params(self.config)
        np.testing.assert_array_equal(combine_gru(constant(np.zeros(3)), constant(np.zeros(3)), params, 1).data, np.zeros(3))
        s = np.array([0.8, -2.0, 4.0])
        np.testing.assert_allclose(combine_gru(constant([1.0, 1.0, 1.0]), constant(s), params, 1).data, 0.5 * s)

    def test_gru_matches_reference(self):
        arrays = init_dagnn_params(self.config, seed=4).to_arrays()
        for name in list(arrays):
            if name.startswith("gru1.fwd.b"):
                arrays[name] = self.rng.uniform(-0.5, 0.5, 3)
        params = DagnnParams.from_arrays(arrays)
        for _ in range(10):
            x, s = self.rng.uniform(-2, 2, 3), self.rng.uniform(-2, 2, 3)
            out = combine_gru(constant(x), constant(s), params, 1)
            np.testing.assert_allclose(out.data, reference_gru(x, s, arrays, "gru1.fwd"), atol=1e-12)

    def test_fc_zero_params(self):
        config = self.config.with_changes(combiner=Combiner.FULLY_CONNECTED)
        out = combine_fc(constant([1.0, 2.0, 3.0]), constant([4.0, 5.0, 6.0]), zero_params(config), 1)
        np.testing.assert_array_equal(out.data, np.zeros(3))

    def test_fc_output_range(self):
        config = self.config.with_changes(combiner=Combiner.FULLY_CONNECTED)
        params = init_dagnn_params(config, seed=5)
        for _ in range(10):
            out = combine_fc(constant(self.rng.uniform(-50, 50, 3)), constant(self.rng.uniform(-50, 50, 3)), params, 1)
            self.assertTrue(np.all(np.abs(out.data) <= 1.0))

    def test_combiner_shape_mismatch(self):
        params = init_dagnn_params(self.config)
        with self.assertRaises(ShapeError):
            combine_gru(constant(np.zeros(3)), constant(np.zeros(2)), params, 1)


class TestForwardDirection(unittest.TestCase):
    """Pruebas de la pasada por lotes."""

    def setUp(self):
        self.config = DagnnConfig(hidden_dim=4, input_dim=5, num_edge_types=2, num_layers=1)
        self.params = init_dagnn_params(self.config, seed=9)

    def test_current_layer_aggregation(self):
        dag = figure_graph()
        states = forward_direction(dag, compute_batches(dag), self.params, self.config)
        layer1 = states.layers[1]
        preds = [(constant(layer1.data[u]), t) for u, t in dag.predecessors[3]]
        h_prev = constant(states.state(0, 3))
        message = aggregate_attention(h_prev, preds, self.params, 1, use_edge_attr=True)
        expected = combine_gru(h_prev, message, self.params, 1)
        np.testing.assert_allclose(states.state(1, 3), expected.data, atol=1e-12)

    def test_no_edges(self):
        dag = build_dag(3, [], np.eye(3, 5))
        config = self.config.with_changes(num_layers=2)
        params = init_dagnn_params(config, seed=1)
        states = forward_direction(dag, compute_batches(dag), params, config)
        zero = constant(np.zeros(4))
        for layer in (1, 2):
            for node in range(3):
                expected = combine_gru(constant(states.state(layer - 1, node)), zero, params, layer)
                np.testing.assert_allclose(states.state(layer, node), expected.data, atol=1e-12)

    def test_batched_matches_recursive(self):
        rng = np.random.default_rng(0)
        variants = [
            {},
            {"aggregator": Aggregator.ATTENTION},
            {"aggregator": Aggregator.GATED_SUM},
            {"combiner": Combiner.FULLY_CONNECTED},
        ]
        for trial in range(100):
            dag = gen_random_dag(n_min=1, n_max=10, edge_prob=float(rng.uniform(0.1, 0.8)), rng_seed=trial)
            changes = variants[trial % len(variants)]
            config = DagnnConfig(hidden_dim=3, input_dim=dag.input_dim, num_edge_types=2, num_layers=2, bidirectional=True, **changes)
            params = init_dagnn_params(config, seed=trial)
            for direction, batches in (
                (Direction.FORWARD, compute_batches(dag)),
                (Direction.REVERSE, compute_batches_reverse(dag)),
            ):
                batched = forward_direction(dag, batches, params, config, direction)
                recursive = forward_recursive(dag, params, config, direction)
                for layer in range(config.num_layers + 1):
                    diff = np.max(np.abs(batched.layers[layer].data - recursive.layers[layer].data))
                    self.assertLess(diff, 1e-12, msg=f"intento {trial}, capa {layer}")

    def test_inconsistent_batches(self):
        dag = figure_graph()
        with self.assertRaises(ShapeError):
            forward_direction(dag, compute_batches(chain(3, dim=5)), self.params, self.config)
        with self.assertRaises(ShapeError):
            forward_direction(dag, compute_batches(dag), self.params, self.config, Direction.REVERSE)

    def test_information_flows_through_chain_in_one_layer(self):
        config = DagnnConfig(hidden_dim=4, input_dim=1, num_layers=1)
        params = init_dagnn_params(config, seed=2)
        mpnn_params = init_mpnn_params(config, seed=2)
        base = np.ones((6, 1))
        moved = base.copy()
        moved[0, 0] = 3.0
        dagnn = [forward_direction(chain(6, features=f), compute_batches(chain(6)), params, config) for f in (base, moved)]
        self.assertGreater(np.max(np.abs(dagnn[0].state(1, 5) - dagnn[1].state(1, 5))), 1e-6)
        mpnn = [mpnn_states(chain(6, features=f), mpnn_params, config)[1].data[5] for f in (base, moved)]
        self.assertLess(np.max(np.abs(mpnn[0] - mpnn[1])), 1e-12)


class TestReadout(unittest.TestCase):
    """Pruebas de la lectura y de la pasada completa."""

    def setUp(self):
        self.config = DagnnConfig(hidden_dim=3, input_dim=5, num_edge_types=2, num_layers=2, num_classes=4)

    def test_single_target_dimension(self):
        dag = figure_graph()
        params = init_dagnn_params(self.config)
        states = forward_direction(dag, compute_batches(dag), params, self.config)
        pooled = pooled_representation(states, None, dag, self.config)
        self.assertEqual(pooled.shape, (1, 9))
        np.testing.assert_array_equal(pooled.data[0], states.stacked().data[4])
        expected = states.stacked().data[4] @ params["readout.W"].data + params["readout.b"].data
        np.testing.assert_allclose(readout(states, None, dag, params, self.config).data, expected)

    def test_bidirectional_dimension(self):
        config = self.config.with_changes(bidirectional=True)
        self.assertEqual(config.readout_input_dim, 18)
        self.assertEqual(init_dagnn_params(config)["readout.W"].shape, (18, 4))
        self.assertEqual(model_forward(figure_graph(), init_dagnn_params(config), config).shape, (4,))

    def test_max_matches_brute_force(self):
        for seed in range(10):
            dag = gen_random_dag(rng_seed=seed)
            for scope in ReadoutScope:
                config = DagnnConfig(hidden_dim=3, input_dim=dag.input_dim, num_edge_types=2, bidirectional=True, readout_scope=scope)
                params = init_dagnn_params(config, seed=seed)
                h0 = input_projection(dag, params)
                forward = forward_direction(dag, compute_batches(dag), params, config, Direction.FORWARD, h0)
                backward = forward_direction(dag, compute_batches_reverse(dag), params, config, Direction.REVERSE, h0)
                pooled = pooled_representation(forward, backward, dag, config).data[0]
                if scope == ReadoutScope.ALL_NODES:
                    targets = sources = range(dag.num_nodes)
                else:
                    targets, sources = sorted(dag.targets), sorted(dag.sources)
                stacked_fwd, stacked_rev = forward.stacked().data, backward.stacked().data
                width = stacked_fwd.shape[1]
                for j in range(width):
                    self.assertEqual(pooled[j], max(stacked_fwd[v, j] for v in targets))
                    self.assertEqual(pooled[width + j], max(stacked_rev[u, j] for u in sources))

    def test_model_forward_shapes_and_determinism(self):
        params = init_dagnn_params(self.config, seed=1)
        first = model_forward(figure_graph(), params, self.config)
        second = model_forward(figure_graph(), params, self.config)
        self.assertEqual(first.shape, (4,))
        np.testing.assert_array_equal(first.data, second.data)
        scalar = self.config.with_changes(output=OutputKind.SCALAR)
        self.assertEqual(model_forward(figure_graph(), init_dagnn_params(scalar), scalar).shape, (1,))

    def test_permutation_invariance(self):
        rng = np.random.default_rng(123)
        for trial in range(100):
            dag = gen_random_dag(rng_seed=trial)
            config = DagnnConfig(
                hidden_dim=4,
                input_dim=dag.input_dim,
                num_edge_types=2,
                num_layers=2,
                bidirectional=bool(trial % 2),
                num_classes=3,
            )
            params = init_dagnn_params(config, seed=trial)
            perm = rng.permutation(dag.num_nodes)
            original = model_forward(dag, params, config).data
            relabeled = model_forward(permute(dag, perm), params, config).data
            self.assertLess(np.max(np.abs(original - relabeled)), 1e-9, msg=f"intento {trial}")

    def test_batch_matches_single_graph(self):
        graphs = [gen_random_dag(rng_seed=seed) for seed in range(5)]
        config = DagnnConfig(hidden_dim=3, input_dim=graphs[0].input_dim, num_edge_types=2, bidirectional=True)
        params = init_dagnn_params(config, seed=7)
        batch = model_forward_batch(graphs, params, config)
        self.assertEqual(batch.shape, (5, 2))
        for row, dag in enumerate(graphs):
            np.testing.assert_allclose(batch.data[row], model_forward(dag, params, config).data, atol=1e-12)

    def test_input_dimension_mismatch(self):
        params = init_dagnn_params(self.config)
        with self.assertRaises(ShapeError):
            model_forward(chain(3, dim=2), params, self.config)

    def test_edge_type_outside_table(self):
        config = self.config.with_changes(num_edge_types=1)
        with self.assertRaises(ShapeError):
            model_forward(figure_graph(), init_dagnn_params(config), config)


if __name__ == "__main__":
    unittest.main()
