import unittest

import numpy as np

from src.core.dag_operations import build_dag
from src.core.dagnn_params import DagnnParams, init_mpnn_params
from src.core.error_handling import ShapeError
from src.core.mpnn_baseline import mpnn_baseline_forward, mpnn_forward_batch, mpnn_states
from src.models.dagnn_config import DagnnConfig
from tests.fixtures import chain, figure_graph


class TestMpnnBaseline(unittest.TestCase):
    """Pruebas de la línea base de paso de mensajes."""

    def setUp(self):
        self.config = DagnnConfig(num_layers=1, hidden_dim=3, input_dim=1)
        self.params = init_mpnn_params(self.config, seed=4)

    def test_one_hop_per_layer(self):
        base = np.ones((3, 1))
        moved = base.copy()
        moved[0, 0] = -2.0
        before = mpnn_states(chain(3, features=base), self.params, self.config)[1].data
        after = mpnn_states(chain(3, features=moved), self.params, self.config)[1].data
        np.testing.assert_array_equal(before[2], after[2])
        self.assertGreater(np.max(np.abs(before[1] - after[1])), 1e-6)

    def test_two_layers_reach_two_hops(self):
        config = self.config.with_changes(num_layers=2)
        params = init_mpnn_params(config, seed=4)
        base = np.ones((3, 1))
        moved = base.copy()
        moved[0, 0] = -2.0
        before = mpnn_states(chain(3, features=base), params, config)[2].data
        after = mpnn_states(chain(3, features=moved), params, config)[2].data
        self.assertGreater(np.max(np.abs(before[2] - after[2])), 1e-9)

    def test_isolated_node(self):
        dag = build_dag(1, [], [[0.5]])
        states = mpnn_states(dag, self.params, self.config)
        arrays = self.params.to_arrays()
        h0 = np.array([0.5]) @ arrays["input.W"] + arrays["input.b"]
        expected = np.tanh(h0 @ arrays["mpnn1.W1"] + arrays["mpnn1.b"])
        np.testing.assert_allclose(states[1].data[0], expected)

    def test_mean_readout(self):
        arrays = {name: np.zeros_like(a) for name, a in self.params.to_arrays().items()}
        arrays["readout.b"] = np.array([1.0, -1.0])
        params = DagnnParams.from_arrays(arrays)
        np.testing.assert_array_equal(mpnn_baseline_forward(chain(4), params, self.config).data, [1.0, -1.0])

    def test_batch_matches_single(self):
        config = DagnnConfig(num_layers=2, hidden_dim=3, input_dim=5, num_edge_types=2)
        params = init_mpnn_params(config, seed=1)
        graphs = [figure_graph(), build_dag(2, [(0, 1)], np.eye(2, 5))]
        batch = mpnn_forward_batch(graphs, params, config)
        for row, dag in enumerate(graphs):
            np.testing.assert_allclose(batch.data[row], mpnn_baseline_forward(dag, params, config).data, atol=1e-12)

    def test_input_dimension_mismatch(self):
        with self.assertRaises(ShapeError):
            mpnn_states(chain(3, dim=2), self.params, self.config)


if __name__ == "__main__":
    unittest.main()
