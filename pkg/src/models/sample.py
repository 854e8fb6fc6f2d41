""" Módulo que define una muestra etiquetada del conjunto de datos. """

from dataclasses import dataclass
from typing import Union

from src.models.dag import Dag


@dataclass(frozen=True)
class Sample:
    """
    DAG acompañado de su etiqueta.

    Attributes:
        dag (Dag):
            Grafo de la muestra.
        label (Union[int, float]):
            Índice de clase (tarea de camino más largo) o valor real (tarea de puntaje).
    """

    dag: Dag
    label: Union[int, float]
