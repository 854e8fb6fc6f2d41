""" Módulo que define la configuración del entrenamiento. """

from dataclasses import dataclass

from src.core.error_handling import ConfigError


@dataclass(frozen=True)
class TrainConfig:
    """
    Parámetros del ciclo de entrenamiento.

    Los valores por defecto siguen el protocolo de entrenamiento de referencia: recorte del
    gradiente en 0.25 y paciencia de 10 épocas.

    Attributes:
        learning_rate (float):
            Tasa de aprendizaje de Adam (>= 0).
        max_epochs (int):
            Número máximo de épocas.
        patience (int):
            Épocas sin mejora en validación antes de detener el entrenamiento.
        grad_clip (float):
            Norma máxima del gradiente global; 0 desactiva el recorte.
        data_batch_size (int):
            Número de grafos por paso de optimización.
        seed (int):
            Semilla de inicialización y de barajado.
    """

    learning_rate: float = 1e-3
    max_epochs: int = 100
    patience: int = 10
    grad_clip: float = 0.25
    data_batch_size: int = 32
    seed: int = 0

    def __post_init__(self) -> None:
        if self.learning_rate < 0:
            raise ConfigError(f"learning_rate debe ser >= 0, se recibió {self.learning_rate}")
        if self.patience < 1:
            raise ConfigError(f"patience debe ser >= 1, se recibió {self.patience}")
        if self.max_epochs < 1 or self.data_batch_size < 1:
            raise ConfigError("max_epochs y data_batch_size deben ser >= 1")
        if self.grad_clip < 0:
            raise ConfigError(f"grad_clip debe ser >= 0, se recibió {self.grad_clip}")
