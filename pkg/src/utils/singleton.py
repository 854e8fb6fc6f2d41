""" Modulo para la implementación del patrón Singleton. """

# Dependencias
from typing import Any, Dict, Type


class Singleton(type):
    """
    Metaclase para crear un singleton.

    Los servicios compartidos (logs y configuración) se crean una sola vez por proceso.
    """

    _instances: Dict[Type, Any] = {}

    def __call__(cls, *args: Any, **kwargs: Any) -> Any:
        """
        Controla la creación de instancias de la clase que utiliza esta Metaclase.

        Args:
            *args (Any):
                Argumentos posicionales para el constructor de la clase.
            **kwargs (Any):
                Argumentos de palabras clave para el constructor de la clase.

        Returns:
            Any:
                La única instancia de la clase 'cls'.
        """
        if cls not in cls._instances:
            cls._instances[cls] = super().__call__(*args, **kwargs)
        return cls._instances[cls]

    def clear_instance(cls) -> None:
        """
        Elimina la instancia registrada de la clase.

        Se usa en las pruebas para reconstruir un servicio con otra configuración.
        """
        cls._instances.pop(cls, None)
