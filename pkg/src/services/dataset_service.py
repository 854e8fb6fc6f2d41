""" Modulo para leer y escribir conjuntos de datos en formato JSON-lines. """

import json
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

# pylint: disable=import-error
from src.core.dag_operations import build_dag
from src.core.error_handling import DagnnError, DatasetIOError, ParseError
from src.models.sample import Sample
from src.services.logger_service import LoggerService
from src.utils.singleton import Singleton

# Campos de cada línea del archivo
FIELDS = ("n", "edges", "x", "y")


class DatasetService(metaclass=Singleton):
    """
    Clase para la persistencia de los conjuntos de datos.

    Cada línea del archivo es un grafo:
    {"n": int, "types": int, "edges": [[cola, cabeza, tipo], ...], "x": [[f, ...], ...], "y": número}

    El campo "types" es opcional al leer; si falta se usa el mayor tipo presente más uno.
    """

    # Bandera para asegurar que la inicialización de la instancia se realice solo una vez
    _initialized: bool = False

    def __init__(self, logger_service: LoggerService) -> None:
        """
        Inicializa una instancia de la clase DatasetService.

        Args:
            logger_service (LoggerService):
                Servicio de logging para registrar errores y eventos.
        """
        if not self._initialized:
            self._initialized = True
            self.logger_service: LoggerService = logger_service

    @staticmethod
    def encode(sample: Sample) -> str:
        """
        Serializa una muestra como una línea JSON.

        Args:
            sample (Sample):
                Muestra a serializar.

        Returns:
            str:
                Línea sin salto final.
        """
        dag = sample.dag
        record: Dict[str, Any] = {
            "n": dag.num_nodes,
            "types": dag.num_edge_types,
            "edges": [[e.tail, e.head, e.edge_type] for e in dag.edges],
            "x": dag.features.tolist(),
            "y": sample.label,
        }
        return json.dumps(record, separators=(",", ":"))

    @staticmethod
    def decode(line: str, line_number: int) -> Sample:
        """
        Interpreta una línea JSON como una muestra validada.

        Args:
            line (str):
                Contenido de la línea.
            line_number (int):
                Número de línea, desde 1, para el mensaje de error.

        Returns:
            Sample:
                Muestra con el DAG validado.

        Raises:
            ParseError:
                Si la línea no es JSON válido, le falta un campo o el grafo no es un DAG.
        """
        try:
            record: Dict[str, Any] = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(line_number, f"JSON inválido: {e.msg}") from e
        if not isinstance(record, dict):
            raise ParseError(line_number, "se esperaba un objeto JSON")
        missing: List[str] = [field for field in FIELDS if field not in record]
        if missing:
            raise ParseError(line_number, f"faltan los campos {missing}")

        label: Union[int, float] = record["y"]
        if isinstance(label, bool) or not isinstance(label, (int, float)):
            raise ParseError(line_number, f"etiqueta no numérica: {label!r}")
        types: Any = record.get("types")
        if types is not None and (isinstance(types, bool) or not isinstance(types, int)):
            raise ParseError(line_number, f"tipos de arista no enteros: {types!r}")
        try:
            dag = build_dag(int(record["n"]), record["edges"], record["x"], num_edge_types=types)
        except (DagnnError, TypeError, ValueError) as e:
            raise ParseError(line_number, f"{type(e).__name__}: {e}") from e
        return Sample(dag=dag, label=label)

    def load(self, path: Union[str, Path]) -> List[Sample]:
        """
        Lee un conjunto de datos; las líneas vacías se ignoran.

        Args:
            path (Union[str, Path]):
                Ruta del archivo JSON-lines.

        Returns:
            List[Sample]:
                Muestras en el orden del archivo.

        Raises:
            ParseError:
                Si una línea no se puede interpretar.
            DatasetIOError:
                Si el archivo no se puede leer.
        """
        try:
            with open(path, "r", encoding="utf-8") as handle:
                lines: List[str] = handle.readlines()
        except OSError as e:
            self.logger_service.log_error(f'Error leyendo el conjunto de datos {{1}}" "1={path}')
            raise DatasetIOError(f"No se pudo leer {path}: {e}") from e

        samples: List[Sample] = [
            self.decode(line, number)
            for number, line in enumerate(lines, start=1)
            if line.strip()
        ]
        self.logger_service.log_info(
            f'Conjunto de datos cargado {{1}} {{2}}" "1={path}" "2={len(samples)} muestras'
        )
        return samples

    def save(self, path: Union[str, Path], samples: Sequence[Sample]) -> None:
        """
        Escribe un conjunto de datos, una muestra por línea.

        Args:
            path (Union[str, Path]):
                Ruta de destino.
            samples (Sequence[Sample]):
                Muestras a escribir.

        Raises:
            DatasetIOError:
                Si el archivo no se puede escribir.
        """
        try:
            with open(path, "w", encoding="utf-8") as handle:
                for sample in samples:
                    handle.write(self.encode(sample) + "\n")
        except OSError as e:
            self.logger_service.log_error(f'Error escribiendo el conjunto de datos {{1}}" "1={path}')
            raise DatasetIOError(f"No se pudo escribir {path}: {e}") from e
        self.logger_service.log_info(
            f'Conjunto de datos guardado {{1}} {{2}}" "1={path}" "2={len(samples)} muestras'
        )
