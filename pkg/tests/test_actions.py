import io
import os
import tempfile
import unittest
from unittest.mock import MagicMock, patch

import numpy as np

from main import build_parser
from src.core.actions import Actions, split_path
from src.core.dag_operations import build_dag
from src.core.error_handling import ConfigError, EmptyInput
from src.core.datasets import gen_lp_dataset
from src.models.checkpoint import ModelKind
from src.models.generator_config import GeneratorConfig
from src.models.sample import Sample
from src.services.checkpoint_service import CheckpointService
from src.services.dataset_service import DatasetService
from src.services.logger_service import LoggerService
from tests.fixtures import chain, figure_graph

METRICS_HEADER = "split,task,loss,accuracy,rmse,pearson_r"


class TestActions(unittest.TestCase):
    """Clase para el manejo de tests de los subcomandos"""

    def setUp(self):
        # Mock de las variables de entorno
        self.mock_env = MagicMock()
        self.mock_env.DAGNN_HIDDEN_DIM = 4
        self.mock_env.DAGNN_BATCH_SIZE = 8
        self.mock_env.DAGNN_MAX_EPOCHS = 2
        self.mock_env.DAGNN_PATIENCE = 10
        self.mock_env.DAGNN_GRAD_CLIP = 0.25
        self.mock_env.DAGNN_LEARNING_RATE = 1e-3
        self.mock_logger_service = MagicMock(LoggerService)

        DatasetService.clear_instance()
        CheckpointService.clear_instance()
        self.services = {
            "env": self.mock_env,
            "logger_service": self.mock_logger_service,
            "dataset_service": DatasetService(logger_service=self.mock_logger_service),
            "checkpoint_service": CheckpointService(logger_service=self.mock_logger_service),
        }
        self.tempdir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tempdir.cleanup()
        DatasetService.clear_instance()
        CheckpointService.clear_instance()

    def path(self, name):
        return os.path.join(self.tempdir.name, name)

    def run_command(self, *argv):
        stdout = io.StringIO()
        args = build_parser().parse_args(list(argv))
        Actions(services=self.services, stdout=stdout).run(args)
        return stdout.getvalue()

    def write_lp(self, name, count, seed):
        samples = gen_lp_dataset(count, GeneratorConfig(n_min=3, n_max=6), seed=seed)
        self.services["dataset_service"].save(self.path(name), samples)
        return samples

    def test_run_logs_start_and_end(self):
        """Validar que cada comando registre su inicio y su fin."""
        self.write_lp("data.jsonl", 3, seed=1)
        self.run_command("batch-info", self.path("data.jsonl"))
        messages = [c.args[0] for c in self.mock_logger_service.log_info.call_args_list]
        self.assertIn('Inicia el comando {1}" "1=batch-info', messages)
        self.assertIn('Finaliza el comando {1}" "1=batch-info', messages)

    def test_batch_info(self):
        """Validar el resumen de lotes de un grafo conocido."""
        self.services["dataset_service"].save(
            self.path("figure.jsonl"), [Sample(dag=figure_graph(), label=2)]
        )
        output = self.run_command("batch-info", self.path("figure.jsonl"))
        self.assertEqual(
            output.splitlines(),
            [
                "graph,num_nodes,num_edges,num_batches,longest_path_nodes,max_batch_width",
                "0,5,4,3,3,3",
            ],
        )

    def test_generate_lp(self):
        """Validar que generate escriba el conjunto e imprima el histograma."""
        output = self.run_command(
            "generate", "--task", "lp", "--count", "20", "--seed", "5", "--out", self.path("lp.jsonl")
        )
        samples = self.services["dataset_service"].load(self.path("lp.jsonl"))
        self.assertEqual(len(samples), 20)
        lines = output.splitlines()
        self.assertEqual(lines[0], "label,count")
        self.assertEqual(sum(int(line.split(",")[1]) for line in lines[1:]), 20)

    def test_generate_is_deterministic(self):
        """Validar que la misma semilla produzca el mismo archivo."""
        for name in ("a.jsonl", "b.jsonl"):
            self.run_command("generate", "--task", "score", "--count", "6", "--out", self.path(name))
        with open(self.path("a.jsonl"), encoding="utf-8") as a, open(self.path("b.jsonl"), encoding="utf-8") as b:
            self.assertEqual(a.read(), b.read())

    def test_generate_score_prints_nothing(self):
        """Validar que la tarea de puntaje no imprima histograma."""
        output = self.run_command("generate", "--task", "score", "--count", "4", "--out", self.path("s.jsonl"))
        self.assertEqual(output, "")

    def test_generate_splits(self):
        """Validar que --splits escriba los tres conjuntos."""
        out = self.path("data.jsonl")
        self.run_command("generate", "--task", "lp", "--count", "8", "--out", out, "--splits")
        sizes = [len(self.services["dataset_service"].load(split_path(out, name))) for name in ("train", "val", "test")]
        self.assertEqual(sizes, [8, 2, 2])
        self.assertFalse(os.path.exists(out))

    def test_split_path(self):
        """Validar el nombre de los archivos de cada conjunto."""
        self.assertEqual(split_path("/tmp/datos.jsonl", "val").name, "datos_val.jsonl")
        self.assertEqual(split_path("/tmp/datos", "test").name, "datos_test.jsonl")

    def test_train_then_eval(self):
        """Validar que eval reproduzca las métricas de prueba del entrenamiento."""
        self.write_lp("train.jsonl", 10, seed=1)
        self.write_lp("test.jsonl", 5, seed=2)
        ckpt = self.path("model.json")
        output = self.run_command(
            "train", "--data", self.path("train.jsonl"), "--test", self.path("test.jsonl"),
            "--epochs", "2", "--hidden-dim", "4", "--batch-size", "8", "--out", ckpt,
            "--log", self.path("history.csv"),
        )
        lines = output.splitlines()
        self.assertEqual(lines[0], METRICS_HEADER)
        self.assertTrue(lines[1].startswith("val,lp,"))
        self.assertTrue(lines[2].startswith("test,lp,"))

        checkpoint = self.services["checkpoint_service"].load(ckpt)
        self.assertEqual(checkpoint.model, ModelKind.DAGNN)
        self.assertEqual(checkpoint.config.hidden_dim, 4)

        with open(self.path("history.csv"), encoding="utf-8") as handle:
            history = handle.read().splitlines()
        self.assertEqual(history[0], "epoch,train_loss,val_loss,val_accuracy,val_rmse,val_pearson_r")
        self.assertEqual(len(history), 3)

        evaluated = self.run_command("eval", "--ckpt", ckpt, "--data", self.path("test.jsonl"))
        self.assertEqual(evaluated.splitlines()[1], "eval" + lines[2][len("test"):])

    def test_train_is_deterministic(self):
        """Validar que dos corridas iguales impriman y registren lo mismo."""
        self.write_lp("train.jsonl", 6, seed=3)
        argv = ("train", "--data", self.path("train.jsonl"), "--epochs", "2", "--out", self.path("m.json"))
        first = self.run_command(*argv)
        first_logs = list(self.mock_logger_service.method_calls)
        self.mock_logger_service.reset_mock()
        second = self.run_command(*argv)
        self.assertEqual(first, second)
        self.assertEqual(first_logs, list(self.mock_logger_service.method_calls))

    def test_eval_on_longer_graphs_than_training(self):
        """Validar que las clases y los tipos de arista no dependan del tamaño de los datos de entrenamiento."""
        short = build_dag(3, [(0, 1), (1, 2)], np.ones((3, 1)), num_edge_types=2)
        long = build_dag(6, [(i, i + 1, 1) for i in range(5)], np.ones((6, 1)), num_edge_types=2)
        self.services["dataset_service"].save(self.path("short.jsonl"), [Sample(dag=short, label=2)])
        self.services["dataset_service"].save(self.path("long.jsonl"), [Sample(dag=long, label=5)])
        ckpt = self.path("model.json")
        self.run_command("train", "--data", self.path("short.jsonl"), "--epochs", "1", "--out", ckpt)

        config = self.services["checkpoint_service"].load(ckpt).config
        self.assertEqual(config.num_classes, 15)
        self.assertEqual(config.num_edge_types, 2)
        output = self.run_command("eval", "--ckpt", ckpt, "--data", self.path("long.jsonl"))
        self.assertTrue(output.splitlines()[1].startswith("eval,lp,"))

    def test_class_and_edge_type_options(self):
        """Validar --n-max y --num-edge-types."""
        self.services["dataset_service"].save(self.path("short.jsonl"), [Sample(dag=chain(3), label=2)])
        base = ("train", "--data", self.path("short.jsonl"), "--epochs", "1", "--out", self.path("m.json"))
        self.run_command(*base, "--n-max", "8", "--num-edge-types", "3")
        config = self.services["checkpoint_service"].load(self.path("m.json")).config
        self.assertEqual((config.num_classes, config.num_edge_types), (8, 3))
        with self.assertRaises(ConfigError):
            self.run_command(*base, "--n-max", "2")
        with self.assertRaises(ConfigError):
            self.run_command(*base, "--num-edge-types", "0")

    def test_train_mpnn(self):
        """Validar el entrenamiento del modelo de paso de mensajes."""
        self.write_lp("train.jsonl", 6, seed=4)
        self.run_command(
            "train", "--model", "mpnn", "--data", self.path("train.jsonl"), "--epochs", "1",
            "--out", self.path("mpnn.json"),
        )
        checkpoint = self.services["checkpoint_service"].load(self.path("mpnn.json"))
        self.assertEqual(checkpoint.model, ModelKind.MPNN)

    def test_train_majority_then_eval(self):
        """Validar el clasificador de mayoría de punta a punta."""
        samples = self.write_lp("train.jsonl", 12, seed=5)
        ckpt = self.path("majority.json")
        self.run_command("train", "--model", "majority", "--data", self.path("train.jsonl"), "--out", ckpt)
        checkpoint = self.services["checkpoint_service"].load(ckpt)
        self.assertEqual(checkpoint.model, ModelKind.MAJORITY)
        self.assertIn(checkpoint.majority_label, {int(sample.label) for sample in samples})
        output = self.run_command("eval", "--ckpt", ckpt, "--data", self.path("train.jsonl"))
        self.assertTrue(output.splitlines()[1].startswith("eval,lp,"))

    def test_train_majority_rejects_score(self):
        """Validar que la mayoría no aplique a la tarea de puntaje."""
        self.run_command("generate", "--task", "score", "--count", "4", "--out", self.path("s.jsonl"))
        with self.assertRaises(ConfigError):
            self.run_command(
                "train", "--task", "score", "--model", "majority", "--data", self.path("s.jsonl"),
                "--out", self.path("m.json"),
            )

    def test_train_empty_dataset(self):
        """Validar que un conjunto vacío falle con EmptyInput."""
        self.services["dataset_service"].save(self.path("empty.jsonl"), [])
        with self.assertRaises(EmptyInput):
            self.run_command("train", "--data", self.path("empty.jsonl"), "--out", self.path("m.json"))

    def test_train_model_options(self):
        """Validar que las opciones de arquitectura lleguen a la configuración."""
        self.write_lp("train.jsonl", 4, seed=6)
        self.run_command(
            "train", "--data", self.path("train.jsonl"), "--epochs", "1", "--layers", "1",
            "--bidirectional", "--aggregator", "gated_sum", "--combiner", "fc", "--readout", "all",
            "--out", self.path("m.json"),
        )
        config = self.services["checkpoint_service"].load(self.path("m.json")).config
        self.assertEqual(config.num_layers, 1)
        self.assertTrue(config.bidirectional)
        self.assertEqual(config.aggregator.value, "gated_sum")
        self.assertEqual(config.combiner.value, "fully_connected")
        self.assertEqual(config.readout_scope.value, "all_nodes")

    @patch("src.core.actions.run_ablation_grid")
    def test_ablate(self, mock_run_ablation_grid):
        """Validar que ablate entregue los conjuntos y escriba el CSV."""
        mock_run_ablation_grid.return_value = []
        self.write_lp("train.jsonl", 4, seed=7)
        self.write_lp("test.jsonl", 2, seed=8)
        out = self.path("ablation.csv")
        output = self.run_command(
            "ablate", "--data", self.path("train.jsonl"), "--test", self.path("test.jsonl"),
            "--no-edge-attr", "--out", out,
        )
        args, kwargs = mock_run_ablation_grid.call_args
        self.assertEqual(len(args[0]), 4)
        self.assertEqual(args[2].aggregator.value, "attention")
        self.assertIsNone(kwargs["val_samples"])
        self.assertEqual(len(kwargs["test_samples"]), 2)
        with open(out, encoding="utf-8") as handle:
            self.assertEqual(handle.read(), output)
        self.assertTrue(output.startswith("config,num_layers,"))

    def test_gradcheck(self):
        """Validar que la verificación de gradientes imprima un error pequeño."""
        output = self.run_command("gradcheck", "--seed", "1")
        lines = output.splitlines()
        self.assertEqual(lines[0], "config,max_relative_error")
        self.assertEqual(len(lines), 2)
        name, error = lines[1].split(",")
        self.assertEqual(name, "full")
        self.assertLess(float(error), 1e-4)


if __name__ == "__main__":
    unittest.main()
