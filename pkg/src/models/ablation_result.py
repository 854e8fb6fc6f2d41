""" Módulo que define una fila de resultados de la grilla de ablación. """

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from src.models.metrics import format_value

METRIC_NAMES = ("loss", "accuracy", "rmse", "pearson_r")

Stat = Tuple[Optional[float], Optional[float]]


def _parse(value: str) -> Optional[float]:
    return None if value == "" else float(value)


@dataclass(frozen=True)
class AblationResult:
    """
    Métricas de prueba de una configuración, resumidas sobre varias semillas.

    Attributes:
        name (str):
            Nombre de la variante.
        num_layers (int):
            Número de capas.
        aggregator (str):
            Agregador.
        combiner (str):
            Combinador.
        readout_scope (str):
            Nodos de la lectura.
        bidirectional (bool):
            Si se procesan ambos sentidos.
        num_seeds (int):
            Semillas promediadas.
        stats (Dict[str, Stat]):
            (media, desviación poblacional) por métrica; None si la métrica no aplica.
    """

    name: str
    num_layers: int
    aggregator: str
    combiner: str
    readout_scope: str
    bidirectional: bool
    num_seeds: int
    stats: Dict[str, Stat] = field(default_factory=dict)

    CSV_COLUMNS = (
        "config",
        "num_layers",
        "aggregator",
        "combiner",
        "readout_scope",
        "bidirectional",
        "seeds",
    ) + tuple(f"{metric}_{part}" for metric in METRIC_NAMES for part in ("mean", "std"))

    def as_row(self) -> Dict[str, str]:
        """Fila CSV del resultado."""
        row: Dict[str, str] = {
            "config": self.name,
            "num_layers": str(self.num_layers),
            "aggregator": self.aggregator,
            "combiner": self.combiner,
            "readout_scope": self.readout_scope,
            "bidirectional": "true" if self.bidirectional else "false",
            "seeds": str(self.num_seeds),
        }
        for metric in METRIC_NAMES:
            mean, std = self.stats.get(metric, (None, None))
            row[f"{metric}_mean"] = format_value(mean)
            row[f"{metric}_std"] = format_value(std)
        return row

    @classmethod
    def from_row(cls, row: Dict[str, str]) -> "AblationResult":
        """Reconstruye el resultado desde una fila CSV."""
        return cls(
            name=row["config"],
            num_layers=int(row["num_layers"]),
            aggregator=row["aggregator"],
            combiner=row["combiner"],
            readout_scope=row["readout_scope"],
            bidirectional=row["bidirectional"] == "true",
            num_seeds=int(row["seeds"]),
            stats={
                metric: (_parse(row[f"{metric}_mean"]), _parse(row[f"{metric}_std"]))
                for metric in METRIC_NAMES
            },
        )
