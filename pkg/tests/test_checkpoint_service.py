import json
import os
import tempfile
import unittest
from unittest.mock import MagicMock

import numpy as np

from src.core.dagnn_params import DagnnParams, init_dagnn_params, init_mpnn_params
from src.core.error_handling import CheckpointError, DatasetIOError
from src.models.checkpoint import CHECKPOINT_FORMAT, Checkpoint, ModelKind
from src.models.dagnn_config import DagnnConfig
from src.models.metrics import Task
from src.services.checkpoint_service import CheckpointService
from src.services.logger_service import LoggerService


class TestCheckpointService(unittest.TestCase):
    """Clase para el manejo de tests de CheckpointService"""

    def setUp(self):
        self.mock_logger_service = MagicMock(LoggerService)
        CheckpointService.clear_instance()
        self.checkpoint_service = CheckpointService(logger_service=self.mock_logger_service)
        self.tempdir = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tempdir.name, "model.json")
        self.config = DagnnConfig(hidden_dim=3, input_dim=4, num_edge_types=2, bidirectional=True)
        self.checkpoint = Checkpoint(
            model=ModelKind.DAGNN,
            task=Task.LP,
            config=self.config,
            params=init_dagnn_params(self.config, seed=5),
        )

    def tearDown(self):
        self.tempdir.cleanup()
        CheckpointService.clear_instance()

    def test_round_trip(self):
        """Validar que los parámetros se recuperen exactamente."""
        self.checkpoint_service.save(self.path, self.checkpoint)
        loaded = self.checkpoint_service.load(self.path)
        self.assertEqual(loaded.model, ModelKind.DAGNN)
        self.assertEqual(loaded.config, self.config)
        self.assertEqual(list(loaded.params), list(self.checkpoint.params))
        for name, value in self.checkpoint.params.items():
            np.testing.assert_array_equal(loaded.params[name].data, value.data)

    def test_mpnn_and_majority(self):
        """Validar los otros tipos de modelo."""
        mpnn = Checkpoint(ModelKind.MPNN, Task.SCORE, self.config, init_mpnn_params(self.config))
        loaded = CheckpointService.from_json(CheckpointService.to_json(mpnn))
        self.assertEqual(loaded.task, Task.SCORE)
        majority = Checkpoint(ModelKind.MAJORITY, Task.LP, self.config, DagnnParams.from_arrays({}), majority_label=3)
        self.assertEqual(CheckpointService.from_json(CheckpointService.to_json(majority)).majority_label, 3)

    def test_majority_without_label(self):
        document = CheckpointService.to_json(
            Checkpoint(ModelKind.MAJORITY, Task.LP, self.config, DagnnParams.from_arrays({}))
        )
        with self.assertRaises(CheckpointError):
            CheckpointService.from_json(document)

    def test_rejects_non_finite(self):
        """Validar que no se guarden parámetros no finitos."""
        self.checkpoint.params["readout.b"].data[0] = np.nan
        with self.assertRaises(CheckpointError):
            self.checkpoint_service.save(self.path, self.checkpoint)

    def test_invalid_documents(self):
        """Validar los errores de contenido."""
        document = CheckpointService.to_json(self.checkpoint)
        cases = []
        cases.append({**document, "format": "otro/1"})
        cases.append({key: value for key, value in document.items() if key != "task"})
        cases.append({**document, "model": "transformer"})
        cases.append({**document, "config": {**document["config"], "hidden_dim": 4}})
        params = dict(document["params"])
        params.pop("input.W")
        cases.append({**document, "params": params})
        params = dict(document["params"])
        params["input.b"] = {"shape": [3], "data": [0.0, float("inf"), 0.0]}
        cases.append({**document, "params": params})
        params = dict(document["params"])
        params["input.b"] = {"shape": [2], "data": [0.0, 1.0, 0.0]}
        cases.append({**document, "params": params})
        for index, case in enumerate(cases):
            with self.subTest(case=index), self.assertRaises(CheckpointError):
                CheckpointService.from_json(case)

    def test_not_json(self):
        with open(self.path, "w", encoding="utf-8") as handle:
            handle.write("{roto")
        with self.assertRaises(CheckpointError):
            self.checkpoint_service.load(self.path)

    def test_missing_file(self):
        with self.assertRaises(DatasetIOError):
            self.checkpoint_service.load(os.path.join(self.tempdir.name, "nada.json"))
        self.mock_logger_service.log_error.assert_called_once()

    def test_document_format(self):
        self.checkpoint_service.save(self.path, self.checkpoint)
        with open(self.path, "r", encoding="utf-8") as handle:
            document = json.load(handle)
        self.assertEqual(document["format"], CHECKPOINT_FORMAT)
        self.assertEqual(document["params"]["input.W"]["shape"], [4, 3])
        self.assertNotIn("majority_label", document)


if __name__ == "__main__":
    unittest.main()
