"""
Generadores de datos: covariables funcionales senoidales, formas de coeficientes,
respuesta Normal de localización-escala y series ARCH con rezagos

Todos los generadores usan np.random.Generator con PCG64 (np.random.default_rng)
sembrado explícitamente.
"""
from typing import Literal, Optional

import numpy as np

from .config import settings
from .errors import DataError, OverflowSeriesError, UnknownShapeError
from .fda_basis import bspline_basis, center_covariate, equispaced_grid, signal_design
from .families import NormalLS
from .learners import lag_column_name
from .logging_utils import get_logger
from .models import ArchSpec, FunctionalCovariate, Grid, ModelData, NumericModel, ParamVector, SimScenario

logger = get_logger(__name__, level=settings.log_level, log_file=settings.log_file)

COEFICIENTES_FORMA = {
    'coef1': (2.0, 1.5, -0.5, -0.5),
    'coef2': (0.5, -1.0, -1.0, 1.5),
    'coef3': (3.0, 0.0, 0.0, 0.0),
}


def regime_variances(regime: str, C: int = 5) -> np.ndarray:
    """
    Varianzas ζ_1..ζ_C de los scores según el régimen

    Examples:
        >>> regime_variances('lin', 3).tolist()
        [0.1, 0.2, 0.30000000000000004]
    """
    c = np.arange(1, C + 1, dtype=float)
    if regime == 'const':
        return np.ones(C)
    if regime == 'lin':
        return 0.1 * c
    if regime == 'exp':
        return (np.pi * (c - 0.5)) ** -2.0
    raise DataError(f'Régimen de varianza desconocido: {regime!r}')


def gen_functional_covariates(scenario: SimScenario, rng: Optional[np.random.Generator] = None,
                              n: Optional[int] = None) -> tuple[np.ndarray, Grid]:
    """
    Curvas x_i(s) = Σ_c a_ic √2 sin(π(c - 0.5)s) (+ a_i0 si rand_start), centradas
    por columna y divididas por la desviación estándar global

    Args:
        scenario: Escenario (N, R, C, régimen, rand_start)
        rng: Generador; por defecto uno nuevo con scenario.seed
        n: Número de curvas (por defecto scenario.N)

    Returns:
        tuple: (matriz n x R, grilla equiespaciada en [0, 1])
    """
    rng = np.random.default_rng(scenario.seed) if rng is None else rng
    n = scenario.N if n is None else n
    grid = equispaced_grid(scenario.R)
    zeta = regime_variances(scenario.variance_regime, scenario.C)

    c = np.arange(1, scenario.C + 1)
    senos = np.sqrt(2.0) * np.sin(np.pi * np.outer(c - 0.5, grid.points))
    scores = rng.normal(0.0, np.sqrt(zeta), size=(n, scenario.C))
    x = scores @ senos
    if scenario.rand_start:
        x += rng.normal(0.0, np.sqrt(zeta[0]), size=(n, 1))
    return center_covariate(x, standardize=True), grid


def coef_shape(name: str, grid: Grid) -> np.ndarray:
    """
    Forma de coeficiente: coef0 nula, coef1..coef3 combinaciones de 4 B-splines
    cúbicos con nodos de borde repetidos sobre el dominio de la grilla

    Raises:
        UnknownShapeError: Si el nombre no es coef0..coef3
    """
    if name == 'coef0':
        return np.zeros(grid.R)
    if name not in COEFICIENTES_FORMA:
        raise UnknownShapeError(f'Forma desconocida: {name!r}')
    lower, upper = grid.domain
    base = bspline_basis(grid.points, lower, upper, 4, 3, boundary='coincident')
    return base @ np.array(COEFICIENTES_FORMA[name])


def gen_response_normal_ls(covariates: list[FunctionalCovariate], shapes: dict[str, list[str]],
                           intercepts: dict[str, float], rng: np.random.Generator
                           ) -> tuple[np.ndarray, ParamVector]:
    """
    μ_i = α_0 + Σ_j ∫x_ij α_j, log σ_i = β_0 + Σ_j ∫x_ij β_j; y_i ~ N(μ_i, σ_i²)

    Returns:
        tuple: (y, parámetros verdaderos)
    """
    familia = NormalLS()
    N = covariates[0].x.shape[0]
    h = np.zeros((familia.Q, N))
    for q, nombre in enumerate(familia.parameter_names):
        h[q] = intercepts.get(nombre, 0.0)
        for covariable, forma in zip(covariates, shapes.get(nombre, [])):
            curva = coef_shape(forma, covariable.grid)
            h[q] += signal_design(covariable.x, covariable.grid, curva[:, None])[:, 0]
    params = familia.param_vector(h)
    y = rng.normal(params['mu'], params['sigma'])
    return y, params


class SimulatedData(NumericModel):
    """Conjunto de entrenamiento, de prueba, parámetros y curvas verdaderas"""
    train: ModelData
    test: Optional[ModelData]
    params_train: ParamVector
    params_test: Optional[ParamVector]
    grid: Grid
    truth: dict[str, list[np.ndarray]]


def simulate_scenario(scenario: SimScenario) -> SimulatedData:
    """
    Un conjunto de datos completo del escenario

    Las N + n_test curvas se generan, centran y estandarizan juntas; las últimas
    n_test filas forman el conjunto de prueba.
    """
    rng = np.random.default_rng(scenario.seed)
    total = scenario.N + scenario.n_test
    covariables = []
    grid = None
    for _ in range(scenario.n_covariates):
        x, grid = gen_functional_covariates(scenario, rng, total)
        covariables.append(FunctionalCovariate(x=x, grid=grid))
    y, params = gen_response_normal_ls(covariables, scenario.coef_shapes, scenario.intercepts, rng)

    datos = ModelData(y=y, funcionales={f'x{j + 1}': c for j, c in enumerate(covariables)})
    entrenamiento = np.arange(scenario.N)
    prueba = np.arange(scenario.N, total)
    verdad = {nombre: [coef_shape(forma, grid) for forma in formas]
              for nombre, formas in scenario.coef_shapes.items()}
    logger.debug('Escenario simulado', {'N': scenario.N, 'regimen': scenario.variance_regime,
                                        'semilla': scenario.seed})
    return SimulatedData(
        train=datos.subset(entrenamiento),
        test=datos.subset(prueba) if scenario.n_test else None,
        params_train=params.subset(entrenamiento),
        params_test=params.subset(prueba) if scenario.n_test else None,
        grid=grid, truth=verdad,
    )


def gen_arch_series(N: int, alpha: list[float], beta: list[float], burn_in: int = 100,
                    seed: int = 0, varianza: Literal['log_cuadrado', 'cuadrado'] = 'log_cuadrado') -> np.ndarray:
    """
    y_i ~ N(α_0 + Σ α_j y_{i-j}, exp(β_0 + Σ β_j v_{i-j}))

    v = log y² (los regresores del diseño rezagado de σ) o v = y². Los p valores
    previos se sortean iid de N(α_0, exp(β_0)). La estacionariedad no se
    verifica; las primeras burn_in observaciones se descartan.

    Raises:
        OverflowSeriesError: Si la recursión deja de ser finita
    """
    rng = np.random.default_rng(seed)
    a0, a = alpha[0], np.asarray(alpha[1:], dtype=float)
    b0, b = beta[0], np.asarray(beta[1:], dtype=float)
    p = max(a.size, b.size)
    total = N + burn_in
    y = np.empty(total + p)
    y[:p] = rng.normal(a0, np.exp(b0 / 2), size=p)
    ruido = rng.standard_normal(total)
    with np.errstate(over='ignore', invalid='ignore', divide='ignore'):
        for i in range(total):
            t = i + p
            previos = y[t - p:t][::-1]
            regresores = previos[:b.size] ** 2
            if varianza == 'log_cuadrado':
                regresores = np.log(regresores)
            media = a0 + np.dot(a, previos[:a.size])
            varianza_i = np.exp(b0 + np.dot(b, regresores))
            y[t] = media + np.sqrt(varianza_i) * ruido[i]
            if not np.isfinite(y[t]):
                raise OverflowSeriesError(i)
    return y[p + burn_in:]


def build_lagged_data(y: np.ndarray, p_mu: int, p_sigma: int, var: str = 'y',
                      funcionales: Optional[dict[str, FunctionalCovariate]] = None) -> ModelData:
    """
    Columnas y_lag{j} (j <= p_mu) y log_y2_lag{j} (j <= p_sigma); se descartan
    las primeras max(p_mu, p_sigma) filas

    Raises:
        DataError: Si la serie es más corta que los rezagos o algún y rezagado es cero
    """
    y = np.asarray(y, dtype=float).ravel()
    P = max(p_mu, p_sigma)
    if y.size <= P:
        raise DataError(f'La serie tiene {y.size} observaciones y se piden {P} rezagos')
    N = y.size - P
    escalares = {}
    for j in range(1, p_mu + 1):
        escalares[lag_column_name(var, j)] = y[P - j:P - j + N]
    for j in range(1, p_sigma + 1):
        rezago = y[P - j:P - j + N]
        if np.any(rezago == 0):
            raise DataError(f'log y² indefinido: hay ceros en el rezago {j}')
        escalares[lag_column_name(var, j, 'log_cuadrado')] = np.log(rezago ** 2)
    funcionales = {k: FunctionalCovariate(x=f.x[P:], grid=f.grid) for k, f in (funcionales or {}).items()}
    return ModelData(y=y[P:], escalares=escalares, funcionales=funcionales)


def simulate_arch(spec: ArchSpec, seed: int) -> ModelData:
    """Serie ARCH del escenario con su diseño rezagado"""
    y = gen_arch_series(spec.N, spec.alpha, spec.beta, spec.burn_in, seed, spec.varianza)
    return build_lagged_data(y, spec.p_mu, spec.p_sigma)
