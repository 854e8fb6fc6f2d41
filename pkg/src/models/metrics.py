""" Módulo que define las métricas de evaluación y el historial de entrenamiento. """

from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional


class Task(str, Enum):
    """Tarea de aprendizaje."""

    LP = "lp"
    SCORE = "score"


def format_value(value: Optional[float]) -> str:
    # Los valores indefinidos se escriben vacíos; repr mantiene la precisión completa
    return "" if value is None else repr(float(value))


@dataclass(frozen=True)
class Metrics:
    """
    Métricas de un conjunto de datos.

    Attributes:
        task (Task):
            Tarea evaluada.
        loss (float):
            Pérdida media (entropía cruzada o error cuadrático medio).
        accuracy (Optional[float]):
            Fracción de aciertos, solo para LP.
        rmse (Optional[float]):
            Raíz del error cuadrático medio, solo para regresión.
        pearson_r (Optional[float]):
            Correlación de Pearson, solo para regresión; None si no está definida.
    """

    task: Task
    loss: float
    accuracy: Optional[float] = None
    rmse: Optional[float] = None
    pearson_r: Optional[float] = None

    CSV_COLUMNS = ("task", "loss", "accuracy", "rmse", "pearson_r")

    @property
    def selection_value(self) -> float:
        """Valor usado para escoger el mejor modelo; mayor es mejor."""
        if self.task == Task.LP:
            return float(self.accuracy)
        return -float(self.rmse)

    def as_row(self) -> Dict[str, str]:
        """Fila CSV de las métricas."""
        return {
            "task": self.task.value,
            "loss": format_value(self.loss),
            "accuracy": format_value(self.accuracy),
            "rmse": format_value(self.rmse),
            "pearson_r": format_value(self.pearson_r),
        }


@dataclass(frozen=True)
class EpochRecord:
    """Registro de una época de entrenamiento."""

    epoch: int
    train_loss: float
    val_metrics: Metrics

    CSV_COLUMNS = ("epoch", "train_loss", "val_loss", "val_accuracy", "val_rmse", "val_pearson_r")

    def as_row(self) -> Dict[str, str]:
        """Fila CSV de la época."""
        row: Dict[str, str] = self.val_metrics.as_row()
        return {
            "epoch": str(self.epoch),
            "train_loss": format_value(self.train_loss),
            "val_loss": row["loss"],
            "val_accuracy": row["accuracy"],
            "val_rmse": row["rmse"],
            "val_pearson_r": row["pearson_r"],
        }


@dataclass
class TrainResult:
    """
    Resultado del entrenamiento.

    Attributes:
        params (object):
            Parámetros de la mejor época en validación.
        history (List[EpochRecord]):
            Registro de cada época ejecutada.
        best_epoch (int):
            Época con la mejor métrica de validación.
    """

    params: object
    history: List[EpochRecord]
    best_epoch: int
