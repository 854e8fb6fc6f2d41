import unittest
from unittest.mock import MagicMock

from src.core.error_handling import (
    CheckpointError,
    CycleError,
    DagnnError,
    DagValidationError,
    DatasetIOError,
    ErrorHandling,
    NonFiniteError,
    NonFiniteLoss,
    ParseError,
)
from src.services.logger_service import LoggerService
from src.utils.environment import Environment


class TestErrorHandling(unittest.TestCase):

    def setUp(self):
        # Mock de los servicios
        self.mock_logger_service = MagicMock(LoggerService)
        self.mock_env = MagicMock(Environment)
        self.services = {"env": self.mock_env, "logger_service": self.mock_logger_service}

        # Instancia de ErrorHandling
        self.error_handling = ErrorHandling(self.services, command="train")

    def test_domain_error(self):
        code = self.error_handling.process_error(CycleError("ciclo 0 -> 1 -> 0"))
        self.assertEqual(code, ErrorHandling.EXIT_DOMAIN)
        message = self.mock_logger_service.log_warning.call_args[0][0]
        self.assertIn("[train]", message)
        self.assertIn("CycleError", message)

    def test_io_errors(self):
        for error in (DatasetIOError("no existe"), FileNotFoundError("data.jsonl")):
            with self.subTest(error=type(error).__name__):
                self.assertEqual(self.error_handling.process_error(error), ErrorHandling.EXIT_IO)
        self.mock_logger_service.log_error.assert_not_called()

    def test_unexpected_error(self):
        code = self.error_handling.process_error(KeyError("x"))
        self.assertEqual(code, ErrorHandling.EXIT_UNEXPECTED)
        self.mock_logger_service.log_error.assert_called_once()

    def test_default_command(self):
        handler = ErrorHandling(self.services)
        handler.process_error(CheckpointError("formato"))
        self.assertIn("[-]", self.mock_logger_service.log_warning.call_args[0][0])

    def test_hierarchy(self):
        self.assertTrue(issubclass(CycleError, DagValidationError))
        self.assertTrue(issubclass(NonFiniteLoss, NonFiniteError))
        self.assertTrue(issubclass(ParseError, DagnnError))

    def test_error_attributes(self):
        loss = NonFiniteLoss(epoch=3, step=7, value=float("nan"))
        self.assertEqual((loss.epoch, loss.step), (3, 7))
        self.assertIn("época 3", str(loss))
        parse = ParseError(12, "faltan campos")
        self.assertEqual(parse.line_number, 12)
        self.assertEqual(str(parse), "Línea 12: faltan campos")


if __name__ == "__main__":
    unittest.main()
