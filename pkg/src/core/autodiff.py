"""
Modulo de diferenciación automática en modo reverso.

Cada operación crea un Value nuevo que recuerda a sus padres y la función que reparte el
gradiente entre ellos; el conjunto de esos enlaces es la cinta de la pasada. La cinta se
reconstruye en cada muestra porque la estructura del cálculo depende del DAG.

Todos los arreglos son numpy float64. Las difusiones admitidas son las de vector sobre
matriz: (filas, columnas) con (columnas,), (filas, columnas) con (filas, 1) y escalares.
"""

from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.core.error_handling import NonFiniteError, ShapeError

DenseArray = NDArray[np.float64]
BackwardFn = Callable[[DenseArray], Tuple[Optional[DenseArray], ...]]


class Value:
    """
    Arreglo que participa en la diferenciación en modo reverso.

    Attributes:
        data (DenseArray):
            Valor calculado en la pasada hacia adelante.
        grad (Optional[DenseArray]):
            Gradiente acumulado, con la misma forma que data.
        parents (Tuple[Value, ...]):
            Operandos que produjeron este valor.
        op (str):
            Nombre de la operación que lo produjo.
        requires_grad (bool):
            Si el gradiente debe propagarse hasta este valor.
    """

    __slots__ = ("data", "grad", "parents", "op", "requires_grad", "_backward")

    def __init__(
        self,
        data: ArrayLike,
        parents: Tuple["Value", ...] = (),
        op: str = "leaf",
        backward: Optional[BackwardFn] = None,
        requires_grad: bool = False,
    ) -> None:
        self.data: DenseArray = np.asarray(data, dtype=np.float64)
        self.grad: Optional[DenseArray] = None
        self.parents: Tuple[Value, ...] = parents
        self.op: str = op
        self._backward: Optional[BackwardFn] = backward
        self.requires_grad: bool = requires_grad

    @property
    def shape(self) -> Tuple[int, ...]:
        """Forma del arreglo."""
        return self.data.shape

    def item(self) -> float:
        """Valor escalar."""
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float("nan")

    def zero_grad(self) -> None:
        """Reinicia el gradiente acumulado a ceros."""
        self.grad = np.zeros_like(self.data)

    def backward(self) -> None:
        """
        Propaga el gradiente desde este valor escalar hacia todas las hojas.

        Un nodo alcanzado por varios caminos suma las contribuciones de todos ellos antes de
        repartir su gradiente.

        Raises:
            ShapeError:
                Si el valor no es escalar.
        """
        if self.data.size != 1:
            raise ShapeError(f"backward requiere un escalar, la forma es {self.shape}")

        order: List[Value] = []
        visited: set = set()
        stack: List[Tuple[Value, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node.parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))

        self.grad = np.ones_like(self.data) if self.grad is None else self.grad + 1.0
        for node in reversed(order):
            if node._backward is None or node.grad is None:
                continue
            for parent, grad in zip(node.parents, node._backward(node.grad)):
                if grad is None or not parent.requires_grad:
                    continue
                parent.grad = grad if parent.grad is None else parent.grad + grad

    # Operadores para escribir las fórmulas de forma natural
    def __add__(self, other: Union["Value", float]) -> "Value":
        return add(self, other)

    def __radd__(self, other: float) -> "Value":
        return add(self, other)

    def __sub__(self, other: Union["Value", float]) -> "Value":
        return add(self, neg(_lift(other)))

    def __rsub__(self, other: float) -> "Value":
        return add(neg(self), other)

    def __mul__(self, other: Union["Value", float]) -> "Value":
        return multiply(self, other)

    def __rmul__(self, other: float) -> "Value":
        return multiply(self, other)

    def __neg__(self) -> "Value":
        return neg(self)

    def __matmul__(self, other: "Value") -> "Value":
        return matmul(self, other)

    def __repr__(self) -> str:
        return f"Value(op={self.op}, shape={self.shape})"


def constant(data: ArrayLike) -> Value:
    """Valor sin gradiente."""
    return Value(data)


def parameter(data: ArrayLike) -> Value:
    """Hoja entrenable con el gradiente inicializado en ceros."""
    value: Value = Value(np.array(data, dtype=np.float64), requires_grad=True)
    value.zero_grad()
    return value


def _lift(value: Union[Value, ArrayLike]) -> Value:
    return value if isinstance(value, Value) else Value(value)


def _result(data: DenseArray, parents: Tuple[Value, ...], op: str, backward: BackwardFn) -> Value:
    if any(parent.requires_grad for parent in parents):
        return Value(data, parents, op, backward, requires_grad=True)
    return Value(data, op=op)


def _check_broadcast(op: str, left: Tuple[int, ...], right: Tuple[int, ...]) -> Tuple[int, ...]:
    try:
        shape: Tuple[int, ...] = np.broadcast_shapes(left, right)
    except ValueError as e:
        raise ShapeError(f"{op}: formas incompatibles {left} y {right}") from e
    # Solo uno de los operandos puede difundirse
    if shape not in (left, right) or len(shape) > 2:
        raise ShapeError(f"{op}: difusión no admitida entre {left} y {right}")
    return shape


def _unbroadcast(grad: DenseArray, shape: Tuple[int, ...]) -> DenseArray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def add(a: Union[Value, float], b: Union[Value, float]) -> Value:
    """Suma elemento a elemento."""
    a, b = _lift(a), _lift(b)
    _check_broadcast("add", a.shape, b.shape)

    def backward(g: DenseArray) -> Tuple[DenseArray, DenseArray]:
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _result(a.data + b.data, (a, b), "add", backward)


def neg(a: Value) -> Value:
    """Cambio de signo."""
    return _result(-a.data, (a,), "neg", lambda g: (-g,))


def multiply(a: Union[Value, float], b: Union[Value, float]) -> Value:
    """Producto elemento a elemento."""
    a, b = _lift(a), _lift(b)
    _check_broadcast("multiply", a.shape, b.shape)

    def backward(g: DenseArray) -> Tuple[DenseArray, DenseArray]:
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return _result(a.data * b.data, (a, b), "multiply", backward)


def scale(a: Value, factor: float) -> Value:
    """Producto por un escalar fijo."""
    return _result(a.data * factor, (a,), "scale", lambda g: (g * factor,))


def matmul(a: Value, b: Value) -> Value:
    """
    Producto matricial entre matrices y vectores (convención de numpy).

    Raises:
        ShapeError:
            Si las dimensiones internas no coinciden.
    """
    if a.data.ndim not in (1, 2) or b.data.ndim not in (1, 2) or a.shape[-1] != b.shape[0]:
        raise ShapeError(f"matmul: formas incompatibles {a.shape} y {b.shape}")

    def backward(g: DenseArray) -> Tuple[DenseArray, DenseArray]:
        if a.data.ndim == 1 and b.data.ndim == 1:
            return g * b.data, g * a.data
        if a.data.ndim == 1:
            return b.data @ g, np.outer(a.data, g)
        if b.data.ndim == 1:
            return np.outer(g, b.data), a.data.T @ g
        return g @ b.data.T, a.data.T @ g

    return _result(a.data @ b.data, (a, b), "matmul", backward)


def matvec(matrix: Value, vector: Value) -> Value:
    """Producto matriz por vector."""
    return matmul(matrix, vector)


def dot(a: Value, b: Value) -> Value:
    """Producto punto entre vectores."""
    if a.data.ndim != 1 or a.shape != b.shape:
        raise ShapeError(f"dot: formas incompatibles {a.shape} y {b.shape}")
    return matmul(a, b)


def concat(values: Sequence[Value], axis: int = -1) -> Value:
    """Concatena valores a lo largo de un eje."""
    if not values:
        raise ShapeError("concat: lista vacía")
    try:
        data: DenseArray = np.concatenate([v.data for v in values], axis=axis)
    except ValueError as e:
        raise ShapeError(f"concat: {e}") from e
    bounds: DenseArray = np.cumsum([v.shape[axis] for v in values])[:-1]

    def backward(g: DenseArray) -> Tuple[DenseArray, ...]:
        return tuple(np.split(g, bounds, axis=axis))

    return _result(data, tuple(values), "concat", backward)


def slice_(a: Value, index: Union[int, slice, Tuple]) -> Value:
    """Selección por índices básicos (enteros y rebanadas)."""
    data: DenseArray = a.data[index]

    def backward(g: DenseArray) -> Tuple[DenseArray]:
        grad: DenseArray = np.zeros_like(a.data)
        grad[index] = g
        return (grad,)

    return _result(np.array(data), (a,), "slice", backward)


def reshape(a: Value, shape: Tuple[int, ...]) -> Value:
    """Cambia la forma conservando los datos."""
    try:
        data: DenseArray = a.data.reshape(shape)
    except ValueError as e:
        raise ShapeError(f"reshape: {e}") from e
    return _result(data, (a,), "reshape", lambda g: (g.reshape(a.shape),))


def sum_(a: Value, axis: Optional[int] = None) -> Value:
    """Suma de todos los elementos o a lo largo de un eje."""

    def backward(g: DenseArray) -> Tuple[DenseArray]:
        expanded: DenseArray = g if axis is None else np.expand_dims(g, axis)
        return (np.broadcast_to(expanded, a.shape).copy(),)

    return _result(np.asarray(a.data.sum(axis=axis)), (a,), "sum", backward)


def sigmoid(a: Value) -> Value:
    """Función logística."""
    out: DenseArray = 1.0 / (1.0 + np.exp(-a.data))
    return _result(out, (a,), "sigmoid", lambda g: (g * out * (1.0 - out),))


def tanh(a: Value) -> Value:
    """Tangente hiperbólica."""
    out: DenseArray = np.tanh(a.data)
    return _result(out, (a,), "tanh", lambda g: (g * (1.0 - out * out),))


def softmax(logits: Value, shift: Optional[Value] = None) -> Value:
    """
    Softmax de un vector, con resta del máximo.

    Args:
        logits (Value):
            Vector de puntajes.
        shift (Optional[Value]):
            Escalar sumado a todos los puntajes. Se absorbe en la resta del máximo, así que
            el resultado no depende de él; su gradiente es la suma del gradiente de los
            puntajes.

    Returns:
        Value:
            Vector de probabilidades.
    """
    if logits.data.ndim != 1 or logits.shape[0] == 0:
        raise ShapeError(f"softmax: se esperaba un vector no vacío, forma {logits.shape}")
    segments: NDArray[np.int64] = np.zeros(logits.shape[0], dtype=np.int64)
    shifts: Optional[Value] = None if shift is None else reshape(shift, (1,))
    return segment_softmax(logits, segments, 1, shifts)


def _group(segments: NDArray[np.int64], num_segments: int) -> List[NDArray[np.int64]]:
    # Índices de cada segmento en orden ascendente
    order: NDArray[np.int64] = np.argsort(segments, kind="stable")
    counts: NDArray[np.int64] = np.bincount(segments, minlength=num_segments)
    return np.split(order, np.cumsum(counts)[:-1])


def _as_segments(segments: ArrayLike, length: int, num_segments: int) -> NDArray[np.int64]:
    ids: NDArray[np.int64] = np.asarray(segments, dtype=np.int64)
    if ids.shape != (length,):
        raise ShapeError(f"Se esperaban {length} identificadores de segmento, forma {ids.shape}")
    if length and (ids.min() < 0 or ids.max() >= num_segments):
        raise ShapeError(f"Identificador de segmento fuera de [0, {num_segments})")
    return ids


def segment_sum(a: Value, segments: ArrayLike, num_segments: int) -> Value:
    """
    Suma las filas que comparten segmento; los segmentos vacíos quedan en cero.

    Args:
        a (Value):
            Arreglo (E, ...) a sumar por filas.
        segments (ArrayLike):
            Segmento de cada fila.
        num_segments (int):
            Número de segmentos de la salida.

    Returns:
        Value:
            Arreglo (num_segments, ...).
    """
    ids: NDArray[np.int64] = _as_segments(segments, a.shape[0], num_segments)
    out: DenseArray = np.zeros((num_segments,) + a.shape[1:])
    np.add.at(out, ids, a.data)
    return _result(out, (a,), "segment_sum", lambda g: (g[ids],))


def segment_mean(a: Value, segments: ArrayLike, num_segments: int) -> Value:
    """Promedio de las filas de cada segmento; los segmentos vacíos quedan en cero."""
    ids: NDArray[np.int64] = _as_segments(segments, a.shape[0], num_segments)
    counts: DenseArray = np.bincount(ids, minlength=num_segments).astype(np.float64)
    inverse: DenseArray = np.divide(1.0, counts, out=np.zeros_like(counts), where=counts > 0)
    weights: DenseArray = inverse[ids].reshape((-1,) + (1,) * (a.data.ndim - 1))
    return segment_sum(multiply(a, constant(weights)), ids, num_segments)


def segment_softmax(
    logits: Value,
    segments: ArrayLike,
    num_segments: int,
    shift: Optional[Value] = None,
) -> Value:
    """
    Softmax independiente dentro de cada segmento de un vector de puntajes.

    El puntaje efectivo de la fila e es logits[e] + shift[segments[e]]. Como el
    desplazamiento es constante dentro del segmento, la resta del máximo lo elimina de forma
    exacta y la salida no depende de él.

    Args:
        logits (Value):
            Vector (E,) de puntajes.
        segments (ArrayLike):
            Segmento de cada puntaje.
        num_segments (int):
            Número de segmentos.
        shift (Optional[Value]):
            Vector (num_segments,) sumado a los puntajes de cada segmento.

    Returns:
        Value:
            Vector (E,) cuyas entradas suman 1 dentro de cada segmento no vacío.
    """
    if logits.data.ndim != 1:
        raise ShapeError(f"segment_softmax: se esperaba un vector, forma {logits.shape}")
    ids: NDArray[np.int64] = _as_segments(segments, logits.shape[0], num_segments)
    if shift is not None and shift.shape != (num_segments,):
        raise ShapeError(f"segment_softmax: desplazamiento con forma {shift.shape}")

    peak: DenseArray = np.full(num_segments, -np.inf)
    np.maximum.at(peak, ids, logits.data)
    exp: DenseArray = np.exp(logits.data - peak[ids])
    total: DenseArray = np.zeros(num_segments)
    np.add.at(total, ids, exp)
    out: DenseArray = exp / total[ids]

    def backward(g: DenseArray) -> Tuple[Optional[DenseArray], ...]:
        weighted: DenseArray = np.zeros(num_segments)
        np.add.at(weighted, ids, out * g)
        grad: DenseArray = out * (g - weighted[ids])
        if shift is None:
            return (grad,)
        grad_shift: DenseArray = np.zeros(num_segments)
        np.add.at(grad_shift, ids, grad)
        return grad, grad_shift

    parents: Tuple[Value, ...] = (logits,) if shift is None else (logits, shift)
    return _result(out, parents, "segment_softmax", backward)


def segment_max(a: Value, segments: ArrayLike, num_segments: int) -> Value:
    """
    Max-pooling por coordenada de las filas de cada segmento.

    En caso de empate el gradiente va a la fila de menor índice.

    Raises:
        ShapeError:
            Si la entrada no es una matriz o algún segmento está vacío.
    """
    if a.data.ndim != 2:
        raise ShapeError(f"segment_max: se esperaba una matriz, forma {a.shape}")
    ids: NDArray[np.int64] = _as_segments(segments, a.shape[0], num_segments)
    groups: List[NDArray[np.int64]] = _group(ids, num_segments)
    if any(len(rows) == 0 for rows in groups):
        raise ShapeError("segment_max: hay segmentos vacíos")

    columns: NDArray[np.int64] = np.arange(a.shape[1])
    winners: NDArray[np.int64] = np.stack(
        [rows[np.argmax(a.data[rows], axis=0)] for rows in groups]
    )
    out: DenseArray = a.data[winners, columns]

    def backward(g: DenseArray) -> Tuple[DenseArray]:
        grad: DenseArray = np.zeros_like(a.data)
        np.add.at(grad, (winners, np.broadcast_to(columns, winners.shape)), g)
        return (grad,)

    return _result(out, (a,), "segment_max", backward)


def max_pool(values: Union[Value, Sequence[Value]]) -> Value:
    """
    Máximo por coordenada de un conjunto de vectores.

    Args:
        values (Union[Value, Sequence[Value]]):
            Matriz con un vector por fila, o lista de vectores de la misma longitud.

    Returns:
        Value:
            Vector con el máximo de cada coordenada.
    """
    matrix: Value = (
        values if isinstance(values, Value) else concat([reshape(v, (1, -1)) for v in values], 0)
    )
    pooled: Value = segment_max(matrix, np.zeros(matrix.shape[0], dtype=np.int64), 1)
    return reshape(pooled, (matrix.shape[1],))


def gather_rows(
    sources: Union[Value, Sequence[Value]],
    rows: ArrayLike,
    source_ids: Optional[ArrayLike] = None,
) -> Value:
    """
    Reúne filas de uno o varios valores en una matriz nueva.

    Args:
        sources (Union[Value, Sequence[Value]]):
            Valor o lista de valores de origen con el mismo número de columnas.
        rows (ArrayLike):
            Fila a tomar para cada salida.
        source_ids (Optional[ArrayLike]):
            Origen de cada salida; por defecto el primero.

    Returns:
        Value:
            Matriz (len(rows), ...) con las filas seleccionadas.
    """
    parents: Tuple[Value, ...] = (sources,) if isinstance(sources, Value) else tuple(sources)
    row_ids: NDArray[np.int64] = np.asarray(rows, dtype=np.int64).reshape(-1)
    src_ids: NDArray[np.int64] = (
        np.zeros_like(row_ids)
        if source_ids is None
        else np.asarray(source_ids, dtype=np.int64).reshape(-1)
    )
    trailing: Tuple[int, ...] = parents[0].shape[1:]
    if any(p.shape[1:] != trailing for p in parents) or src_ids.shape != row_ids.shape:
        raise ShapeError("gather_rows: orígenes con formas distintas")

    out: DenseArray = np.empty((row_ids.shape[0],) + trailing)
    masks: List[NDArray[np.bool_]] = [src_ids == k for k in range(len(parents))]
    for parent, mask in zip(parents, masks):
        if mask.any():
            try:
                out[mask] = parent.data[row_ids[mask]]
            except IndexError as e:
                raise ShapeError(f"gather_rows: {e}") from e

    def backward(g: DenseArray) -> Tuple[Optional[DenseArray], ...]:
        grads: List[Optional[DenseArray]] = []
        for parent, mask in zip(parents, masks):
            if not parent.requires_grad or not mask.any():
                grads.append(None)
                continue
            grad: DenseArray = np.zeros_like(parent.data)
            np.add.at(grad, row_ids[mask], g[mask])
            grads.append(grad)
        return tuple(grads)

    return _result(out, parents, "gather_rows", backward)


def cross_entropy(logits: Value, labels: ArrayLike) -> Value:
    """
    Entropía cruzada media entre logits (G, k) y etiquetas enteras (G,).

    Raises:
        ShapeError:
            Si las formas no coinciden o una etiqueta está fuera de [0, k).
    """
    targets: NDArray[np.int64] = np.asarray(labels, dtype=np.int64).reshape(-1)
    if logits.data.ndim != 2 or targets.shape[0] != logits.shape[0]:
        raise ShapeError(f"cross_entropy: logits {logits.shape} y etiquetas {targets.shape}")
    if targets.size and (targets.min() < 0 or targets.max() >= logits.shape[1]):
        raise ShapeError(f"cross_entropy: etiqueta fuera de [0, {logits.shape[1]})")

    shifted: DenseArray = logits.data - logits.data.max(axis=1, keepdims=True)
    log_norm: DenseArray = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs: DenseArray = shifted - log_norm
    count: int = targets.shape[0]
    rows: NDArray[np.int64] = np.arange(count)
    loss: float = -log_probs[rows, targets].mean()

    def backward(g: DenseArray) -> Tuple[DenseArray]:
        grad: DenseArray = np.exp(log_probs)
        grad[rows, targets] -= 1.0
        return (grad * (g / count),)

    return _result(np.asarray(loss), (logits,), "cross_entropy", backward)


def mean_squared_error(predictions: Value, targets: ArrayLike) -> Value:
    """Error cuadrático medio entre un vector de predicciones y sus objetivos."""
    expected: DenseArray = np.asarray(targets, dtype=np.float64).reshape(-1)
    if predictions.shape != expected.shape:
        raise ShapeError(
            f"mean_squared_error: predicciones {predictions.shape} y objetivos {expected.shape}"
        )
    diff: DenseArray = predictions.data - expected
    count: int = diff.shape[0]

    def backward(g: DenseArray) -> Tuple[DenseArray]:
        return (2.0 * diff * (g / count),)

    return _result(np.asarray((diff * diff).mean()), (predictions,), "mse", backward)


def ensure_finite(value: Union[Value, ArrayLike], where: str) -> None:
    """
    Verifica que todas las entradas sean finitas.

    Raises:
        NonFiniteError:
            Si hay un NaN o un infinito.
    """
    data: DenseArray = value.data if isinstance(value, Value) else np.asarray(value)
    if not np.all(np.isfinite(data)):
        raise NonFiniteError(f"Valores no finitos en {where}")
