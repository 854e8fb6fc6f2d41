""" Modulo para guardar y cargar los parámetros entrenados en formato JSON. """

import json
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

# pylint: disable=import-error
from src.core.dagnn_params import DagnnParams, init_dagnn_params, init_mpnn_params
from src.core.error_handling import CheckpointError, ConfigError, DatasetIOError
from src.models.checkpoint import CHECKPOINT_FORMAT, Checkpoint, ModelKind
from src.models.dagnn_config import DagnnConfig
from src.models.metrics import Task
from src.services.logger_service import LoggerService
from src.utils.singleton import Singleton


def expected_params(model: ModelKind, config: DagnnConfig) -> DagnnParams:
    """Parámetros con los nombres y formas que corresponden al modelo y la configuración."""
    if model == ModelKind.DAGNN:
        return init_dagnn_params(config)
    if model == ModelKind.MPNN:
        return init_mpnn_params(config)
    return DagnnParams.from_arrays({})


class CheckpointService(metaclass=Singleton):
    """
    Clase para la persistencia de los modelos entrenados.

    El archivo es un objeto JSON con el formato, el modelo, la tarea, la configuración y un
    mapa nombre -> {"shape": [...], "data": [...]} con los parámetros.
    """

    # Bandera para asegurar que la inicialización de la instancia se realice solo una vez
    _initialized: bool = False

    def __init__(self, logger_service: LoggerService) -> None:
        """
        Inicializa una instancia de la clase CheckpointService.

        Args:
            logger_service (LoggerService):
                Servicio de logging para registrar errores y eventos.
        """
        if not self._initialized:
            self._initialized = True
            self.logger_service: LoggerService = logger_service

    @staticmethod
    def to_json(checkpoint: Checkpoint) -> Dict[str, Any]:
        """
        Representación JSON de un checkpoint.

        Raises:
            CheckpointError:
                Si algún parámetro contiene valores no finitos.
        """
        params: Dict[str, Any] = {}
        for name, value in checkpoint.params.items():
            if not np.all(np.isfinite(value.data)):
                raise CheckpointError(f"El parámetro {name} contiene valores no finitos")
            params[name] = {"shape": list(value.shape), "data": value.data.reshape(-1).tolist()}
        document: Dict[str, Any] = {
            "format": CHECKPOINT_FORMAT,
            "model": checkpoint.model.value,
            "task": checkpoint.task.value,
            "config": checkpoint.config.to_dict(),
            "params": params,
        }
        if checkpoint.majority_label is not None:
            document["majority_label"] = checkpoint.majority_label
        return document

    @staticmethod
    def from_json(document: Dict[str, Any]) -> Checkpoint:
        """
        Reconstruye un checkpoint y valida nombres, formas y valores de los parámetros.

        Raises:
            CheckpointError:
                Si el formato es desconocido, falta un campo o los parámetros no corresponden
                a la configuración.
        """
        if not isinstance(document, dict) or document.get("format") != CHECKPOINT_FORMAT:
            raise CheckpointError(f"Formato de checkpoint desconocido, se esperaba {CHECKPOINT_FORMAT}")
        try:
            model: ModelKind = ModelKind(document["model"])
            task: Task = Task(document["task"])
            config: DagnnConfig = DagnnConfig.from_dict(document["config"])
            arrays: Dict[str, np.ndarray] = {}
            for name, entry in document["params"].items():
                array: np.ndarray = np.asarray(entry["data"], dtype=np.float64).reshape(entry["shape"])
                if not np.all(np.isfinite(array)):
                    raise CheckpointError(f"El parámetro {name} contiene valores no finitos")
                arrays[name] = array
        except (KeyError, TypeError, ValueError, ConfigError) as e:
            raise CheckpointError(f"Checkpoint inválido: {type(e).__name__}: {e}") from e

        params: DagnnParams = DagnnParams.from_arrays(arrays)
        params.check_compatible(expected_params(model, config))
        majority_label = document.get("majority_label")
        if model == ModelKind.MAJORITY and not isinstance(majority_label, int):
            raise CheckpointError("El clasificador de mayoría requiere majority_label entero")
        return Checkpoint(
            model=model, task=task, config=config, params=params, majority_label=majority_label
        )

    def save(self, path: Union[str, Path], checkpoint: Checkpoint) -> None:
        """
        Escribe el checkpoint en disco.

        Raises:
            CheckpointError:
                Si hay parámetros no finitos.
            DatasetIOError:
                Si el archivo no se puede escribir.
        """
        document: Dict[str, Any] = self.to_json(checkpoint)
        try:
            with open(path, "w", encoding="utf-8") as handle:
                json.dump(document, handle)
        except OSError as e:
            self.logger_service.log_error(f'Error escribiendo el checkpoint {{1}}" "1={path}')
            raise DatasetIOError(f"No se pudo escribir {path}: {e}") from e
        self.logger_service.log_info(
            f'Checkpoint guardado {{1}} {{2}}" "1={path}" "2={len(checkpoint.params)} parámetros'
        )

    def load(self, path: Union[str, Path]) -> Checkpoint:
        """
        Lee un checkpoint de disco.

        Raises:
            CheckpointError:
                Si el contenido es inválido.
            DatasetIOError:
                Si el archivo no se puede leer.
        """
        try:
            with open(path, "r", encoding="utf-8") as handle:
                document: Any = json.load(handle)
        except OSError as e:
            self.logger_service.log_error(f'Error leyendo el checkpoint {{1}}" "1={path}')
            raise DatasetIOError(f"No se pudo leer {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise CheckpointError(f"El checkpoint no es JSON válido: {e.msg}") from e
        checkpoint: Checkpoint = self.from_json(document)
        self.logger_service.log_info(
            f'Checkpoint cargado {{1}} {{2}}" "1={path}" "2={checkpoint.model.value}'
        )
        return checkpoint
