"""
Diagnósticos de ajuste: residuos de cuantil, desviación global, MSE de
coeficientes, cociente de verosimilitudes, ACF, PIT y validación rodante
"""
from typing import Optional

import numpy as np
import pandas as pd
from scipy import stats
from scipy.special import ndtri

from .config import settings
from .errors import DataError, DimensionError, EvaluationError, IncompatibleGridError, UndefinedAcfError
from .families import Family, cdf, loglik
from .logging_utils import get_logger
from .models import Grid, ModelData, ParamVector

logger = get_logger(__name__, level=settings.log_level, log_file=settings.log_file)

PROB_MINIMA = 1e-12


def quantile_residuals(family: Family, y: np.ndarray, params: ParamVector) -> np.ndarray:
    """
    r_i = Φ⁻¹(F(y_i | ϑ_i))

    Se trabaja con la probabilidad de la cola más cercana para no perder
    precisión cerca de 1; esa probabilidad se acota en 1e-12 y las
    activaciones se reportan.

    Raises:
        EvaluationError: Si la CDF no es finita
    """
    y = np.asarray(y, dtype=float).ravel()
    cola, signo = family.cdf_tail(y, params)
    if not np.all(np.isfinite(cola)):
        raise EvaluationError('Valor de CDF no finito')
    acotadas = cola < PROB_MINIMA
    if np.any(acotadas):
        logger.warning('Probabilidades acotadas en residuos de cuantil', {'activaciones': int(acotadas.sum())})
    cola = np.maximum(cola, PROB_MINIMA)
    return np.where(signo == 0, 0.0, -np.sign(signo) * ndtri(cola))


def global_deviance(family: Family, y: np.ndarray, params: ParamVector) -> float:
    """GD = -2 Σ l(ϑ_i, y_i)"""
    return -2.0 * loglik(family, y, params)


def deviance_per_observation(family: Family, y: np.ndarray, params: ParamVector) -> float:
    """GD / N, la escala en que se comparan conjuntos de prueba"""
    return global_deviance(family, y, params) / len(np.ravel(y))


def coef_mse(estimate: np.ndarray, truth: np.ndarray, grid: Grid) -> float:
    """
    ∫ (β(s) - β̂(s))² ds por cuadratura en la grilla

    Raises:
        IncompatibleGridError: Si las curvas no tienen un valor por punto de la grilla
    """
    estimate = np.asarray(estimate, dtype=float).ravel()
    truth = np.asarray(truth, dtype=float).ravel()
    if estimate.size != grid.R or truth.size != grid.R:
        raise IncompatibleGridError(f'Curvas de largo {estimate.size}/{truth.size} en una grilla de {grid.R}')
    return float(np.sum(grid.weights * (truth - estimate) ** 2))


def likelihood_quotient(family: Family, y_test: np.ndarray, params_hat: ParamVector,
                        params_true: ParamVector) -> float:
    """
    Σ l(ϑ̂_i, y_i) / Σ l(ϑ_i, y_i)

    Raises:
        EvaluationError: Si el denominador es cero
    """
    denominador = loglik(family, y_test, params_true)
    if denominador == 0.0:
        raise EvaluationError('Log-verosimilitud verdadera nula: cociente indefinido')
    return loglik(family, y_test, params_hat) / denominador


def acf(x: np.ndarray, max_lag: int) -> tuple[np.ndarray, float]:
    """
    Autocorrelaciones muestrales en los rezagos 1..max_lag y la banda ±1.96/√N

    Raises:
        DimensionError: Si max_lag >= len(x)
        UndefinedAcfError: Si la serie es constante
    """
    x = np.asarray(x, dtype=float).ravel()
    N = x.size
    if not 1 <= max_lag < N:
        raise DimensionError(f'max_lag debe estar en [1, {N - 1}]: {max_lag}')
    centrada = x - x.mean()
    c0 = float(np.dot(centrada, centrada))
    if c0 <= (1e-14 * max(1.0, float(np.abs(x).max()))) ** 2 * N:
        raise UndefinedAcfError('ACF indefinida para una serie constante')
    valores = np.array([np.dot(centrada[:-k], centrada[k:]) / c0 for k in range(1, max_lag + 1)])
    return valores, 1.96 / np.sqrt(N)


def acf_table(x: np.ndarray, max_lag: int) -> pd.DataFrame:
    valores, banda = acf(x, max_lag)
    return pd.DataFrame({'lag': np.arange(1, max_lag + 1), 'acf': valores, 'band': banda})


def pit_values(family: Family, y: np.ndarray, params: ParamVector) -> np.ndarray:
    """Transformada integral de probabilidad v_i = F(y_i | ϑ_i)"""
    return cdf(family, y, params)


def pit_uniformity_test(v: np.ndarray, bins: int = 10) -> tuple[float, float]:
    """
    Test chi-cuadrado de uniformidad de los PIT en `bins` intervalos iguales

    Returns:
        tuple: (estadístico, p-valor)
    """
    conteos, _ = np.histogram(np.asarray(v, dtype=float), bins=bins, range=(0.0, 1.0))
    resultado = stats.chisquare(conteos)
    return float(resultado.statistic), float(resultado.pvalue)


def ks_normal_test(residuals: np.ndarray) -> tuple[float, float]:
    """Kolmogorov-Smirnov contra N(0, 1): (estadístico, p-valor)"""
    resultado = stats.kstest(np.asarray(residuals, dtype=float), 'norm')
    return float(resultado.statistic), float(resultado.pvalue)


def qq_data(residuals: np.ndarray) -> pd.DataFrame:
    """Cuantiles teóricos normales (posiciones (i - 0.5)/N) contra cuantiles muestrales"""
    ordenados = np.sort(np.asarray(residuals, dtype=float))
    N = ordenados.size
    teoricos = ndtri((np.arange(1, N + 1) - 0.5) / N)
    return pd.DataFrame({'theoretical': teoricos, 'sample': ordenados})


def train_test_split_series(data: ModelData, fraction: float = 0.9) -> tuple[ModelData, ModelData]:
    """
    Primeras ⌊fraction·N⌋ observaciones para entrenamiento y el resto para prueba

    Raises:
        DataError: Si alguna de las dos partes queda vacía
    """
    corte = int(np.floor(fraction * data.N))
    if not 0 < corte < data.N:
        raise DataError(f'La fracción {fraction} deja un conjunto vacío con N={data.N}')
    return data.subset(np.arange(corte)), data.subset(np.arange(corte, data.N))


def one_step_ahead(data: ModelData, n_test: int, ajustar,
                   family: Family) -> tuple[ParamVector, float]:
    """
    Predicción a un paso con reajuste rodante

    Para cada una de las últimas n_test observaciones se ajusta el modelo con
    los datos hasta i-1 y se predice la observación i.

    Args:
        data: Serie completa (con covariables rezagadas ya construidas)
        n_test: Observaciones finales a predecir
        ajustar: Función datos_entrenamiento -> (predictor datos_nuevos -> ParamVector)
        family: Familia de la respuesta

    Returns:
        tuple: (parámetros predichos de las n_test observaciones, GD / n_test)
    """
    if not 0 < n_test < data.N:
        raise DataError(f'n_test debe estar en [1, {data.N - 1}]: {n_test}')
    h = []
    for i in range(data.N - n_test, data.N):
        predictor = ajustar(data.subset(np.arange(i)))
        h.append(predictor(data.subset(np.array([i]))).h[:, 0])
        logger.debug('Reajuste rodante', {'i': i})
    params = family.param_vector(np.column_stack(h))
    y_test = data.y[data.N - n_test:]
    return params, deviance_per_observation(family, y_test, params)


def summarize_residuals(residuals: np.ndarray) -> dict[str, Optional[float]]:
    """Momentos y test KS de los residuos de cuantil"""
    r = np.asarray(residuals, dtype=float)
    estadistico, p = ks_normal_test(r)
    return {'mean': float(r.mean()), 'variance': float(r.var(ddof=1)),
            'skewness': float(stats.skew(r)), 'kurtosis': float(stats.kurtosis(r, fisher=False)),
            'ks_statistic': estadistico, 'ks_pvalue': p}
