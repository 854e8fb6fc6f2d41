""" Modulo para el manejo de errores. """

from typing import Any, Dict, Optional

from src.services.logger_service import LoggerService


class DagnnError(Exception):
    """Error base de la librería."""


class DagValidationError(DagnnError):
    """El grafo recibido no cumple la definición de DAG."""


class CycleError(DagValidationError):
    """El grafo contiene un ciclo dirigido."""


class SelfLoopError(DagValidationError):
    """Una arista conecta un nodo consigo mismo."""


class DuplicateEdgeError(DagValidationError):
    """Dos aristas comparten el par (cola, cabeza)."""


class DimensionError(DagValidationError):
    """Las características de los nodos no tienen la misma dimensión."""


class NodeIndexError(DagValidationError):
    """Un índice de nodo o de tipo de arista está fuera de rango."""


class InvalidPermutation(DagnnError):
    """La permutación no es una biyección sobre los nodos."""


class EmptyInput(DagnnError):
    """Se esperaba una colección no vacía."""


class ShapeError(DagnnError):
    """Las dimensiones de los operandos no son compatibles."""


class NonFiniteError(DagnnError):
    """Se encontró un NaN o un infinito en un punto de control."""


class NonFiniteLoss(NonFiniteError):
    """La pérdida de entrenamiento dejó de ser finita."""

    def __init__(self, epoch: int, step: int, value: float) -> None:
        super().__init__(f"Pérdida no finita ({value}) en la época {epoch}, paso {step}")
        self.epoch: int = epoch
        self.step: int = step
        self.value: float = value


class ParseError(DagnnError):
    """Una línea del archivo de datos no se pudo interpretar."""

    def __init__(self, line_number: int, detail: str) -> None:
        super().__init__(f"Línea {line_number}: {detail}")
        self.line_number: int = line_number
        self.detail: str = detail


class DatasetIOError(DagnnError):
    """No fue posible leer o escribir un archivo de datos."""


class DegenerateError(DagnnError):
    """La métrica no está definida (denominador cero)."""


class CheckpointError(DagnnError):
    """El checkpoint de parámetros es inválido."""


class GeneratorConfigError(DagnnError):
    """Los parámetros del generador de datos son inválidos."""


class ConfigError(DagnnError):
    """La configuración del modelo o del entrenamiento es inválida."""


class ErrorHandling:
    """
    Clase para el manejo de los errores de la línea de comandos.

    Convierte una excepción en un log y en el código de salida del proceso.
    """

    EXIT_OK: int = 0
    EXIT_UNEXPECTED: int = 1
    EXIT_DOMAIN: int = 2
    EXIT_IO: int = 3

    def __init__(self, services: Dict[str, Any], command: Optional[str] = None) -> None:
        """
        Inicializa los atributos necesarios para la clase.

        Args:
            services (Dict[str, Any]):
                Diccionario con las instancias de los servicios.
            command (Optional[str]):
                Subcomando en ejecución, se incluye en los mensajes.
        """
        self.logger_service: LoggerService = services["logger_service"]
        self.command: str = command or "-"

    def process_error(self, error: BaseException) -> int:
        """
        Registra el error y determina el código de salida.

        Args:
            error (BaseException):
                Excepción capturada.

        Returns:
            int:
                Código de salida del proceso.
        """
        if isinstance(error, (DatasetIOError, OSError)):
            self.logger_service.log_warning(
                f'Error de entrada/salida {{1}}" "1=[{self.command}] {error}'
            )
            return self.EXIT_IO
        if isinstance(error, DagnnError):
            self.logger_service.log_warning(
                f'Error de validación {{1}}" "1=[{self.command}] '
                f"{type(error).__name__}: {error}"
            )
            return self.EXIT_DOMAIN
        self.logger_service.log_error(f'Error no controlado {{1}}" "1=[{self.command}] {error}')
        return self.EXIT_UNEXPECTED
