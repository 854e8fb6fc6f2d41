""" Módulo que define el contenido de un checkpoint de parámetros. """

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from src.models.dagnn_config import DagnnConfig
from src.models.metrics import Task

CHECKPOINT_FORMAT: str = "dagnn-checkpoint/1"


class ModelKind(str, Enum):
    """Modelo entrenado."""

    DAGNN = "dagnn"
    MPNN = "mpnn"
    MAJORITY = "majority"


@dataclass
class Checkpoint:
    """
    Modelo entrenado listo para evaluar.

    Attributes:
        model (ModelKind):
            Tipo de modelo.
        task (Task):
            Tarea para la que se entrenó.
        config (DagnnConfig):
            Configuración de la arquitectura.
        params (object):
            Parámetros (DagnnParams); vacío para el clasificador de mayoría.
        majority_label (Optional[int]):
            Clase constante del clasificador de mayoría.
    """

    model: ModelKind
    task: Task
    config: DagnnConfig
    params: object
    majority_label: Optional[int] = None
