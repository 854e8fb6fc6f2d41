"""
Modulo con el ciclo de entrenamiento, la evaluación y las métricas.

Cada paso de optimización toma un lote de grafos, los procesa como una unión disjunta
(los lotes topológicos del mismo índice se combinan), calcula la pérdida media del lote,
propaga el gradiente, lo recorta por norma global y aplica Adam.
"""

import csv
from collections import Counter
from typing import IO, List, Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from src.core.autodiff import (
    DenseArray,
    Value,
    constant,
    cross_entropy,
    mean_squared_error,
    reshape,
)
from src.core.dagnn_layers import model_forward_batch
from src.core.dagnn_params import DagnnParams
from src.core.error_handling import ConfigError, DegenerateError, EmptyInput, NonFiniteLoss
from src.core.mpnn_baseline import mpnn_forward_batch
from src.models.checkpoint import ModelKind
from src.models.dagnn_config import DagnnConfig
from src.models.metrics import EpochRecord, Metrics, Task, TrainResult
from src.models.sample import Sample
from src.models.train_config import TrainConfig
from src.services.logger_service import LoggerService

ADAM_BETA1: float = 0.9
ADAM_BETA2: float = 0.999
ADAM_EPSILON: float = 1e-8


class Adam:
    """
    Optimizador Adam con corrección de sesgo.

    Attributes:
        params (List[Value]):
            Parámetros a actualizar.
        learning_rate (float):
            Tasa de aprendizaje.
        steps (int):
            Número de actualizaciones aplicadas.
    """

    def __init__(
        self,
        params: Sequence[Value],
        learning_rate: float,
        beta1: float = ADAM_BETA1,
        beta2: float = ADAM_BETA2,
        epsilon: float = ADAM_EPSILON,
    ) -> None:
        self.params: List[Value] = list(params)
        self.learning_rate: float = learning_rate
        self.beta1: float = beta1
        self.beta2: float = beta2
        self.epsilon: float = epsilon
        self.steps: int = 0
        self._first: List[DenseArray] = [np.zeros_like(p.data) for p in self.params]
        self._second: List[DenseArray] = [np.zeros_like(p.data) for p in self.params]

    def step(self) -> None:
        """Aplica una actualización con los gradientes acumulados."""
        self.steps += 1
        correction1: float = 1.0 - self.beta1**self.steps
        correction2: float = 1.0 - self.beta2**self.steps
        for i, param in enumerate(self.params):
            grad: DenseArray = param.grad if param.grad is not None else np.zeros_like(param.data)
            self._first[i] = self.beta1 * self._first[i] + (1.0 - self.beta1) * grad
            self._second[i] = self.beta2 * self._second[i] + (1.0 - self.beta2) * grad * grad
            update: DenseArray = (self._first[i] / correction1) / (
                np.sqrt(self._second[i] / correction2) + self.epsilon
            )
            param.data = param.data - self.learning_rate * update


def clip_gradients(params: Sequence[Value], max_norm: float) -> float:
    """
    Escala los gradientes para que su norma global no supere max_norm.

    Args:
        params (Sequence[Value]):
            Parámetros con gradiente.
        max_norm (float):
            Norma máxima; 0 desactiva el recorte.

    Returns:
        float:
            Norma global antes del recorte.
    """
    grads: List[DenseArray] = [p.grad for p in params if p.grad is not None]
    norm: float = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads)))
    if max_norm > 0 and norm > max_norm:
        factor: float = max_norm / norm
        for param in params:
            if param.grad is not None:
                param.grad = param.grad * factor
    return norm


def forward_batch(
    model: ModelKind, dags: Sequence, params: DagnnParams, config: DagnnConfig
) -> Value:
    """Salidas (num_grafos, salida) del modelo indicado."""
    if model == ModelKind.MPNN:
        return mpnn_forward_batch(dags, params, config)
    if model == ModelKind.DAGNN:
        return model_forward_batch(dags, params, config)
    raise ConfigError(f"El modelo {model.value} no tiene pasada hacia adelante")


def batch_loss(outputs: Value, labels: Sequence, task: Task) -> Value:
    """Entropía cruzada media (LP) o error cuadrático medio (regresión)."""
    if task == Task.LP:
        return cross_entropy(outputs, labels)
    return mean_squared_error(reshape(outputs, (outputs.shape[0],)), labels)


def accuracy(logits: DenseArray, labels: Sequence[int]) -> float:
    """Fracción de muestras cuyo argmax coincide con la etiqueta."""
    expected: NDArray[np.int64] = np.asarray(labels, dtype=np.int64)
    return float(np.mean(np.argmax(logits, axis=1) == expected))


def rmse(predictions: DenseArray, labels: Sequence[float]) -> float:
    """Raíz del error cuadrático medio."""
    diff: DenseArray = np.asarray(predictions, dtype=np.float64) - np.asarray(labels, dtype=np.float64)
    return float(np.sqrt(np.mean(diff * diff)))


def pearson_r(predictions: DenseArray, labels: Sequence[float]) -> float:
    """
    Correlación de Pearson con estadísticas poblacionales.

    Raises:
        DegenerateError:
            Si las predicciones o las etiquetas son constantes.
    """
    x: DenseArray = np.asarray(predictions, dtype=np.float64)
    y: DenseArray = np.asarray(labels, dtype=np.float64)
    dx: DenseArray = x - x.mean()
    dy: DenseArray = y - y.mean()
    denominator: float = float(np.sqrt(np.mean(dx * dx)) * np.sqrt(np.mean(dy * dy)))
    if denominator == 0.0:
        raise DegenerateError("Pearson no está definido: predicciones o etiquetas constantes")
    return float(np.clip(np.mean(dx * dy) / denominator, -1.0, 1.0))


def metrics_from_outputs(outputs: DenseArray, labels: Sequence, task: Task) -> Metrics:
    """
    Calcula las métricas de la tarea a partir de las salidas del modelo.

    Args:
        outputs (DenseArray):
            Matriz (num_muestras, salida).
        labels (Sequence):
            Etiquetas de las muestras.
        task (Task):
            Tarea evaluada.

    Returns:
        Metrics:
            Pérdida y métricas; pearson_r es None si no está definido.
    """
    loss: float = batch_loss(constant(outputs), labels, task).item()
    if task == Task.LP:
        return Metrics(task=task, loss=loss, accuracy=accuracy(outputs, labels))
    predictions: DenseArray = outputs.reshape(-1)
    try:
        correlation: Optional[float] = pearson_r(predictions, labels)
    except DegenerateError:
        correlation = None
    return Metrics(task=task, loss=loss, rmse=rmse(predictions, labels), pearson_r=correlation)


def predict(
    params: DagnnParams,
    samples: Sequence[Sample],
    config: DagnnConfig,
    model: ModelKind = ModelKind.DAGNN,
    batch_size: int = 32,
) -> DenseArray:
    """Salidas del modelo para todas las muestras, procesadas por lotes."""
    if not samples:
        raise EmptyInput("No hay muestras para evaluar")
    outputs: List[DenseArray] = []
    for start in range(0, len(samples), batch_size):
        dags = [sample.dag for sample in samples[start : start + batch_size]]
        outputs.append(forward_batch(model, dags, params, config).data)
    return np.concatenate(outputs, axis=0)


def evaluate(
    params: DagnnParams,
    samples: Sequence[Sample],
    task: Task,
    config: DagnnConfig,
    model: ModelKind = ModelKind.DAGNN,
    batch_size: int = 32,
) -> Metrics:
    """
    Evalúa el modelo sobre un conjunto de datos.

    Args:
        params (DagnnParams):
            Parámetros entrenados.
        samples (Sequence[Sample]):
            Conjunto de evaluación, no vacío.
        task (Task):
            Tarea.
        config (DagnnConfig):
            Configuración del modelo.
        model (ModelKind):
            DAGNN o la línea base MPNN.
        batch_size (int):
            Grafos por pasada.

    Returns:
        Metrics:
            Métricas del conjunto.
    """
    outputs: DenseArray = predict(params, samples, config, model, batch_size)
    return metrics_from_outputs(outputs, [sample.label for sample in samples], task)


def majority_baseline(samples: Sequence[Sample]) -> int:
    """
    Clase más frecuente; en empate gana la menor.

    Raises:
        EmptyInput:
            Si no hay muestras.
    """
    if not samples:
        raise EmptyInput("majority_baseline requiere muestras")
    counts: Counter = Counter(int(sample.label) for sample in samples)
    return min(counts, key=lambda label: (-counts[label], label))


def evaluate_majority(label: int, samples: Sequence[Sample], num_classes: int) -> Metrics:
    """Métricas del clasificador constante, con logit 1 en la clase elegida y 0 en las demás."""
    if not samples:
        raise EmptyInput("No hay muestras para evaluar")
    outputs: DenseArray = np.zeros((len(samples), num_classes))
    outputs[:, label] = 1.0
    return metrics_from_outputs(outputs, [sample.label for sample in samples], Task.LP)


def train(
    config: DagnnConfig,
    params: DagnnParams,
    samples: Sequence[Sample],
    train_config: TrainConfig,
    task: Task,
    val_samples: Optional[Sequence[Sample]] = None,
    model: ModelKind = ModelKind.DAGNN,
    logger_service: Optional[LoggerService] = None,
) -> TrainResult:
    """
    Entrena el modelo con Adam y parada temprana sobre la métrica de validación.

    Args:
        config (DagnnConfig):
            Configuración del modelo.
        params (DagnnParams):
            Parámetros iniciales; se actualizan en su lugar.
        samples (Sequence[Sample]):
            Conjunto de entrenamiento, no vacío.
        train_config (TrainConfig):
            Hiperparámetros del ciclo.
        task (Task):
            Tarea.
        val_samples (Optional[Sequence[Sample]]):
            Conjunto de validación; por defecto el de entrenamiento.
        model (ModelKind):
            DAGNN o la línea base MPNN.
        logger_service (Optional[LoggerService]):
            Servicio de logging para el avance por época.

    Returns:
        TrainResult:
            Copia de los parámetros de la mejor época, historial y mejor época.

    Raises:
        EmptyInput:
            Si el conjunto de entrenamiento está vacío.
        NonFiniteLoss:
            Si la pérdida de un paso no es finita.
    """
    if not samples:
        raise EmptyInput("El conjunto de entrenamiento está vacío")
    validation: Sequence[Sample] = val_samples if val_samples else samples
    rng: np.random.Generator = np.random.default_rng(train_config.seed)
    optimizer: Adam = Adam(params.values(), train_config.learning_rate)
    batch_size: int = train_config.data_batch_size

    history: List[EpochRecord] = []
    best_value: float = -np.inf
    best_params: DagnnParams = params.copy()
    best_epoch: int = 0
    stale: int = 0

    for epoch in range(1, train_config.max_epochs + 1):
        order: NDArray[np.int64] = rng.permutation(len(samples))
        total: float = 0.0
        for step, start in enumerate(range(0, len(samples), batch_size), start=1):
            batch: List[Sample] = [samples[i] for i in order[start : start + batch_size]]
            params.zero_grad()
            outputs: Value = forward_batch(model, [s.dag for s in batch], params, config)
            loss: Value = batch_loss(outputs, [s.label for s in batch], task)
            value: float = loss.item()
            if not np.isfinite(value):
                raise NonFiniteLoss(epoch, step, value)
            loss.backward()
            clip_gradients(params.values(), train_config.grad_clip)
            optimizer.step()
            total += value * len(batch)

        val_metrics: Metrics = evaluate(params, validation, task, config, model, batch_size)
        history.append(EpochRecord(epoch=epoch, train_loss=total / len(samples), val_metrics=val_metrics))
        if logger_service is not None:
            logger_service.log_debug(
                f'Época {{1}} {{2}} {{3}}" "1={epoch}" "2=train_loss={total / len(samples)!r}" '
                f'"3=val={val_metrics.selection_value!r}'
            )

        # Solo una mejora estricta reinicia la paciencia
        if val_metrics.selection_value > best_value:
            best_value = val_metrics.selection_value
            best_params = params.copy()
            best_epoch = epoch
            stale = 0
        else:
            stale += 1
            if stale >= train_config.patience:
                if logger_service is not None:
                    logger_service.log_info(
                        f'Parada temprana {{1}} {{2}}" "1=época {epoch}" "2=mejor época {best_epoch}'
                    )
                break

    return TrainResult(params=best_params, history=history, best_epoch=best_epoch)


def write_history_csv(handle: IO[str], history: Sequence[EpochRecord]) -> None:
    """Escribe el historial de épocas como CSV, sin marcas de tiempo."""
    writer = csv.DictWriter(handle, fieldnames=EpochRecord.CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for record in history:
        writer.writerow(record.as_row())


def write_metrics_csv(handle: IO[str], rows: Sequence[Metrics], split_names: Sequence[str]) -> None:
    """Escribe una fila de métricas por conjunto evaluado."""
    writer = csv.DictWriter(
        handle, fieldnames=("split",) + Metrics.CSV_COLUMNS, lineterminator="\n"
    )
    writer.writeheader()
    for name, metrics in zip(split_names, rows):
        writer.writerow({"split": name, **metrics.as_row()})
