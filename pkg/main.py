"""
Este módulo es el punto de entrada de la línea de comandos de DAGNN.
"""

import argparse
import os
import sys
from typing import Any, Dict, List, Optional

from src.core.actions import Actions
from src.core.error_handling import ErrorHandling
from src.models.generator_config import FeatureMode
from src.services.checkpoint_service import CheckpointService
from src.services.dataset_service import DatasetService
from src.services.logger_service import LoggerService
from src.utils.environment import Environment


def initialize_services() -> Dict[str, Any]:
    """
    Inicializa los servicios necesarios y devuelve un diccionario con las instancias.

    Returns:
        Dict[str, Any]:
            Diccionario con las instancias de los servicios.
    """
    # Instancia el LoggerService para manejar logs
    logger_service: LoggerService = LoggerService(
        debug_mode=os.getenv("DEBUG_MODE", "false").lower() == "true",
        time_zone=os.getenv("LOG_TIMEZONE", "America/Bogota"),
    )

    # Instancia el Environment con las variables por defecto de la herramienta
    env: Environment = Environment(logger_service=logger_service)

    # Instancia los servicios de persistencia
    dataset_service: DatasetService = DatasetService(logger_service=logger_service)
    checkpoint_service: CheckpointService = CheckpointService(logger_service=logger_service)

    return {
        "logger_service": logger_service,
        "env": env,
        "dataset_service": dataset_service,
        "checkpoint_service": checkpoint_service,
    }


def _add_model_arguments(parser: argparse.ArgumentParser) -> None:
    # Argumentos de la arquitectura y del entrenamiento compartidos por train y ablate
    parser.add_argument("--task", choices=["lp", "score"], default="lp")
    parser.add_argument("--layers", type=int, default=2)
    parser.add_argument("--bidirectional", action="store_true")
    parser.add_argument("--aggregator", choices=["attention", "gated_sum"], default="attention")
    parser.add_argument("--no-edge-attr", action="store_true")
    parser.add_argument("--combiner", choices=["gru", "fc"], default="gru")
    parser.add_argument("--readout", choices=["targets", "all"], default="targets")
    parser.add_argument(
        "--n-max",
        type=int,
        default=15,
        help="Cota de nodos del generador; fija las clases de la tarea LP",
    )
    parser.add_argument(
        "--num-edge-types",
        type=int,
        help="Tamaño de la tabla de tipos; por defecto el guardado en los datos",
    )
    parser.add_argument("--data", required=True, help="Conjunto de entrenamiento (JSON-lines)")
    parser.add_argument("--val", help="Conjunto de validación; por defecto el de entrenamiento")
    parser.add_argument("--test", help="Conjunto de prueba")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--lr", type=float)
    parser.add_argument("--hidden-dim", type=int)
    parser.add_argument("--batch-size", type=int)
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--patience", type=int)
    parser.add_argument("--grad-clip", type=float)


def build_parser() -> argparse.ArgumentParser:
    """
    Construye el intérprete de argumentos con todos los subcomandos.

    Returns:
        argparse.ArgumentParser:
            Intérprete listo para usar.
    """
    parser = argparse.ArgumentParser(prog="dagnn", description="DAGNN sobre grafos dirigidos acíclicos")
    commands = parser.add_subparsers(dest="command", required=True)

    batch_info = commands.add_parser("batch-info", help="Lotes topológicos de cada grafo")
    batch_info.add_argument("data")

    generate = commands.add_parser("generate", help="Genera un conjunto de datos sintético")
    generate.add_argument("--task", choices=["lp", "score"], required=True)
    generate.add_argument("--count", type=int, default=2000)
    generate.add_argument("--seed", type=int, default=0)
    generate.add_argument("--out", required=True)
    generate.add_argument("--n-min", type=int, default=4)
    generate.add_argument("--n-max", type=int, default=15)
    generate.add_argument("--edge-prob", type=float, default=0.35)
    generate.add_argument("--edge-types", type=int, default=2)
    generate.add_argument(
        "--features",
        choices=[mode.value for mode in FeatureMode],
        default=FeatureMode.ONEHOT_INDEGREE.value,
    )
    generate.add_argument(
        "--splits",
        action="store_true",
        help="Escribe <out>_train, <out>_val y <out>_test con count, count/4 y count/4 muestras",
    )

    train = commands.add_parser("train", help="Entrena un modelo")
    _add_model_arguments(train)
    train.add_argument("--model", choices=["dagnn", "mpnn", "majority"], default="dagnn")
    train.add_argument("--out", required=True, help="Ruta del checkpoint")
    train.add_argument("--log", help="CSV con el historial por época")

    evaluate = commands.add_parser("eval", help="Evalúa un checkpoint")
    evaluate.add_argument("--ckpt", required=True)
    evaluate.add_argument("--data", required=True)

    ablate = commands.add_parser("ablate", help="Ejecuta la grilla de ablación")
    _add_model_arguments(ablate)
    ablate.add_argument("--out", required=True, help="CSV de resultados")

    gradcheck = commands.add_parser("gradcheck", help="Verifica los gradientes del modelo")
    gradcheck.add_argument("--seed", type=int, default=0)
    gradcheck.add_argument("--all-configs", action="store_true")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Función principal de la línea de comandos.

    Args:
        argv (Optional[List[str]]):
            Argumentos sin el nombre del programa; por defecto los del proceso.

    Returns:
        int:
            Código de salida del proceso.
    """
    args: argparse.Namespace = build_parser().parse_args(argv)

    # Inicializa los servicios
    services: Dict[str, Any] = initialize_services()
    error_handling: ErrorHandling = ErrorHandling(services=services, command=args.command)

    try:
        Actions(services=services).run(args)
    except Exception as e:  # pylint: disable=broad-except
        return error_handling.process_error(e)
    return ErrorHandling.EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
