"""
Jerarquía de errores de SigBoost LSS
Cada familia corresponde a un código de salida de la CLI
"""
from typing import Optional


class SigBoostError(Exception):
    """Error base para todas las operaciones de la librería"""
    codigo_salida: int = 3


# ============================================================================
# CONFIGURACIÓN (exit 1)
# ============================================================================

class ConfigError(SigBoostError):
    """Configuración inválida o inconsistente"""
    codigo_salida = 1


class UnknownFamilyError(ConfigError):
    """Nombre de familia no registrado"""
    pass


class UnknownLabelError(ConfigError):
    """Etiqueta de base-learner inexistente"""
    pass


class UnknownShapeError(ConfigError):
    """Forma de coeficiente de simulación desconocida"""
    pass


# ============================================================================
# DATOS (exit 2)
# ============================================================================

class DataError(SigBoostError):
    """Datos de entrada inválidos"""
    codigo_salida = 2


class InvalidGridError(DataError):
    """Grilla no estrictamente creciente o con valores no finitos"""
    pass


class DimensionError(DataError):
    """Dimensiones incompatibles entre matrices, grillas o bases"""
    pass


class IncompatibleGridError(DataError):
    """Covariable funcional observada en una grilla distinta a la de entrenamiento"""
    pass


class ZeroBasisError(DataError):
    """Covarianza degenerada: no hay variación para construir la base FPC"""
    pass


# ============================================================================
# NUMÉRICOS (exit 3)
# ============================================================================

class NumericalError(SigBoostError):
    """Fallo numérico durante el ajuste o la evaluación"""
    codigo_salida = 3


class RankDeficiencyError(NumericalError):
    """Sistema penalizado singular para un base-learner"""

    def __init__(self, label: str, mensaje: Optional[str] = None):
        self.label = label
        super().__init__(mensaje or f'Sistema singular en el base-learner {label!r}')


class InfeasibleDfError(NumericalError):
    """Grados de libertad objetivo fuera del rango alcanzable"""

    def __init__(self, target: float, df_min: float, df_max: float, label: str = ''):
        self.target = target
        self.rango = (df_min, df_max)
        super().__init__(
            f'df objetivo {target:g} fuera del rango alcanzable [{df_min:.6g}, {df_max:.6g}]'
            + (f' en {label!r}' if label else '')
        )


class EvaluationError(NumericalError):
    """Parámetros no finitos o fuera de dominio al evaluar la verosimilitud"""
    pass


class NonFiniteGradientError(NumericalError):
    """Gradiente no finito durante el boosting"""

    def __init__(self, parametro: str, indice: int, iteracion: int):
        self.parametro = parametro
        self.indice = indice
        self.iteracion = iteracion
        super().__init__(
            f'Gradiente no finito para {parametro!r} en la observación {indice} (iteración {iteracion})'
        )


class DegenerateResponseError(NumericalError):
    """Respuesta con varianza ponderada nula"""
    pass


class OverflowSeriesError(NumericalError):
    """Recursión ARCH explosiva"""

    def __init__(self, indice: int):
        self.indice = indice
        super().__init__(f'Recursión no finita en el índice {indice} (parámetros explosivos)')


class UndefinedAcfError(NumericalError):
    """Autocorrelación indefinida para series constantes"""
    pass


class AllFoldsSkippedError(NumericalError):
    """Todas las particiones de remuestreo quedaron sin observaciones fuera de muestra"""
    pass
