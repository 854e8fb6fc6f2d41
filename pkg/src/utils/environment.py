""" Modulo para gestionar las variables de entorno. """

# Dependencias
import json
import os
from typing import Any, Dict, Optional, Tuple, Type, Union

# Dependencias externas
from dotenv import load_dotenv

# pylint: disable=import-error
# Services
from src.services.logger_service import LoggerService

# Utils
from src.utils.singleton import Singleton

# Valor centinela para las variables sin valor por defecto
REQUIRED = object()

# Variables de entorno de la herramienta: nombre -> (tipo, valor por defecto)
DEFAULT_EXPECTED_VARS: Dict[str, Tuple[Type, Any]] = {
    "SERVICE_NAME": (str, "dagnn"),
    "DEBUG_MODE": (bool, False),
    "LOG_TIMEZONE": (str, "America/Bogota"),
    "DAGNN_HIDDEN_DIM": (int, 32),
    "DAGNN_BATCH_SIZE": (int, 32),
    "DAGNN_MAX_EPOCHS": (int, 100),
    "DAGNN_PATIENCE": (int, 10),
    "DAGNN_GRAD_CLIP": (float, 0.25),
    "DAGNN_LEARNING_RATE": (float, 1e-3),
}


# pylint: disable=too-few-public-methods
class Environment(metaclass=Singleton):
    """
    Clase singleton para gestionar variables de entorno.

    Esta clase garantiza que las variables de entorno se carguen y se validen correctamente.
    Las variables con valor por defecto son opcionales; las marcadas con REQUIRED deben
    estar configuradas.
    """

    # Bandera para asegurar que la inicialización de la instancia se realice solo una vez
    _initialized: bool = False

    def __init__(
        self,
        logger_service: LoggerService,
        expected_vars: Optional[Dict[str, Tuple[Type, Any]]] = None,
    ) -> None:
        """
        Inicializa una instancia de la clase Environment.

        Args:
            logger_service (LoggerService):
                Servicio de logging para registrar errores y eventos.
            expected_vars (Optional[Dict[str, Tuple[Type, Any]]]):
                Diccionario con las variables esperadas, su tipo de dato y su valor por
                defecto. Por defecto DEFAULT_EXPECTED_VARS.

        Raises:
            EnvironmentError:
                Si hay errores al cargar o validar las variables de entorno.
        """
        if not self._initialized:
            self._initialized = True
            # Carga las variables de entorno desde un archivo .env si existe
            load_dotenv()
            self.logger_service: LoggerService = logger_service
            self.logger_service.log_debug("Inicia cargue de las variables de entorno")
            self.expected_vars: Dict[str, Tuple[Type, Any]] = (
                expected_vars if expected_vars is not None else DEFAULT_EXPECTED_VARS
            )
            # Bandera para validar si se generaron errores obteniendo las variables de entorno
            self.error: bool = False
            self._load_env_variables()
            self.logger_service.log_debug(
                "Finaliza correctamente el cargue de las variables de entorno"
            )

    def _load_env_variables(self) -> None:
        """
        Carga y valida las variables de entorno.

        Cada variable se convierte al tipo declarado y se establece como atributo de la
        instancia. Los errores se acumulan para reportarlos todos antes de fallar.

        Raises:
            EnvironmentError:
                Si falta una variable obligatoria o alguna conversión falla.
        """
        for var, (var_type, default) in self.expected_vars.items():
            value: Union[str, None] = os.getenv(var)

            if value is None:
                if default is REQUIRED:
                    self.logger_service.log_fatal(
                        f'Error al cargar las variables de entorno {{1}}" '
                        f'"1=La variable de entorno {var} no se encuentra configurada'
                    )
                    self.error = True
                else:
                    setattr(self, var, default)
                continue

            try:
                setattr(self, var, self._convert_type(value=value, var_type=var_type))
            except ValueError as e:
                self.logger_service.log_fatal(
                    f'Error al cargar las variables de entorno {{1}}" '
                    f'"1=Error al convertir la variable de entorno {var}: {e}'
                )
                self.error = True

        if self.error:
            raise EnvironmentError("Error en la configuración de las variables de entorno")

    @staticmethod
    def _convert_type(value: str, var_type: Type) -> Union[str, int, float, bool, dict, list]:
        """
        Convierte la variable de entorno al tipo especificado.

        Args:
            value (str):
                Valor de la variable de entorno.
            var_type (Type):
                Tipo de dato al cual se debe convertir el valor.

        Returns:
            Union[str, int, float, bool, dict, list]:
                Valor convertido al tipo especificado.

        Raises:
            ValueError:
                Si el valor no se puede convertir al tipo especificado. json.JSONDecodeError
                es subclase de ValueError.
        """
        if var_type == bool:
            if value.lower() in ["true", "false"]:
                return value.lower() == "true"
            raise ValueError(f'invalid value for boolean: "{value}"')
        if var_type == int:
            return int(value)
        if var_type == float:
            return float(value)
        if var_type in [dict, list]:
            return json.loads(value)
        return value
