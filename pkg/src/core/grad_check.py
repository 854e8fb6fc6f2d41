""" Modulo para validar los gradientes analíticos contra diferencias finitas centradas. """

from typing import Callable, List, Sequence

import numpy as np

from src.core.autodiff import DenseArray, Value
from src.core.dagnn_params import DagnnParams, init_dagnn_params, init_mpnn_params
from src.core.error_handling import NonFiniteError, ShapeError
from src.core.train_eval import batch_loss, forward_batch
from src.models.checkpoint import ModelKind
from src.models.dag import Dag
from src.models.dagnn_config import DagnnConfig, OutputKind
from src.models.metrics import Task

# Piso del denominador del error relativo
RELATIVE_FLOOR: float = 1e-8


def relative_error(analytic: float, numeric: float) -> float:
    """Error relativo |a - b| / max(1e-8, |a| + |b|)."""
    return abs(analytic - numeric) / max(RELATIVE_FLOOR, abs(analytic) + abs(numeric))


def _evaluate(f: Callable[[], Value]) -> float:
    value: float = f().item()
    if not np.isfinite(value):
        raise NonFiniteError(f"La función evaluada no es finita ({value})")
    return value


def grad_check(f: Callable[[], Value], params: Sequence[Value], step: float = 1e-5) -> float:
    """
    Compara el gradiente en modo reverso con la diferencia finita centrada.

    Para cada coordenada de cada parámetro calcula (f(θ + h·e) − f(θ − h·e)) / (2h) y lo
    compara con el gradiente analítico. Los parámetros se restauran al terminar.

    Args:
        f (Callable[[], Value]):
            Cálculo determinista que devuelve un escalar; se reconstruye la cinta en cada
            llamada.
        params (Sequence[Value]):
            Parámetros a verificar.
        step (float):
            Paso h de la diferencia finita (> 0).

    Returns:
        float:
            Máximo error relativo sobre todas las coordenadas (0 si no hay coordenadas).

    Raises:
        NonFiniteError:
            Si alguna evaluación produce NaN o infinito.
        ShapeError:
            Si step no es positivo.
    """
    if step <= 0:
        raise ShapeError(f"El paso debe ser positivo, se recibió {step}")

    for param in params:
        param.zero_grad()
    output: Value = f()
    if not np.isfinite(output.item()):
        raise NonFiniteError(f"La función evaluada no es finita ({output.item()})")
    output.backward()
    analytic: List[DenseArray] = [param.grad.copy() for param in params]

    worst: float = 0.0
    for param, grad in zip(params, analytic):
        flat: DenseArray = param.data.reshape(-1)
        flat_grad: DenseArray = grad.reshape(-1)
        for i in range(flat.shape[0]):
            original: float = float(flat[i])
            flat[i] = original + step
            upper: float = _evaluate(f)
            flat[i] = original - step
            lower: float = _evaluate(f)
            flat[i] = original
            numeric: float = (upper - lower) / (2.0 * step)
            worst = max(worst, relative_error(float(flat_grad[i]), numeric))
    return worst


def model_grad_check(
    config: DagnnConfig,
    dag: Dag,
    label: float,
    seed: int = 0,
    model: ModelKind = ModelKind.DAGNN,
    step: float = 1e-5,
) -> float:
    """
    Verificación de gradiente de la pérdida completa del modelo sobre un grafo.

    Args:
        config (DagnnConfig):
            Configuración del modelo.
        dag (Dag):
            Grafo de entrada.
        label (float):
            Clase (clasificación) u objetivo real (regresión).
        seed (int):
            Semilla de los parámetros.
        model (ModelKind):
            DAGNN o la línea base MPNN.
        step (float):
            Paso de la diferencia finita.

    Returns:
        float:
            Máximo error relativo sobre todos los parámetros.
    """
    init = init_dagnn_params if model == ModelKind.DAGNN else init_mpnn_params
    params: DagnnParams = init(config, seed)
    task: Task = Task.LP if config.output == OutputKind.CLASSES else Task.SCORE
    target = [int(label) % config.num_classes] if task == Task.LP else [float(label)]

    def loss() -> Value:
        return batch_loss(forward_batch(model, [dag], params, config), target, task)

    return grad_check(loss, params.values(), step)
