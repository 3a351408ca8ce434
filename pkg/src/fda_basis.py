"""
Bases para covariables funcionales: grillas, B-splines, FPCA, diseños de señal
e interacciones con penalización de suma de Kronecker
"""
from typing import Literal

import numpy as np
from scipy.interpolate import BSpline

from .config import settings
from .errors import ConfigError, DimensionError, IncompatibleGridError, InvalidGridError, ZeroBasisError
from .logging_utils import get_logger
from .models import FpcBasis, Grid, SplineBasis
from .validators import validar_estrictamente_creciente, validar_proporcion

logger = get_logger(__name__, level=settings.log_level, log_file=settings.log_file)


# ============================================================================
# GRILLAS
# ============================================================================

def make_grid(points) -> Grid:
    """
    Construye una grilla con pesos trapezoidales

    Args:
        points: Puntos de evaluación estrictamente crecientes (al menos 2)

    Returns:
        Grid: Puntos y pesos Δ(s_r)

    Raises:
        InvalidGridError: Si los puntos no son finitos o no crecen estrictamente

    Examples:
        >>> make_grid([0, 0.5, 1]).weights.tolist()
        [0.25, 0.5, 0.25]
    """
    puntos = np.asarray(points, dtype=float).ravel()
    if not validar_estrictamente_creciente(puntos):
        raise InvalidGridError('La grilla requiere >= 2 puntos finitos estrictamente crecientes')

    pesos = np.empty_like(puntos)
    pesos[0] = (puntos[1] - puntos[0]) / 2
    pesos[-1] = (puntos[-1] - puntos[-2]) / 2
    pesos[1:-1] = (puntos[2:] - puntos[:-2]) / 2
    return Grid(points=puntos, weights=pesos)


def equispaced_grid(R: int = 100, lower: float = 0.0, upper: float = 1.0) -> Grid:
    """Grilla de R puntos equiespaciados en [lower, upper]"""
    return make_grid(np.linspace(lower, upper, R))


# ============================================================================
# B-SPLINES Y PENALIZACIONES
# ============================================================================

def make_spline_basis(lower: float, upper: float, K: int, degree: int = 3,
                      penalty_order: int = 1,
                      boundary: Literal['extended', 'coincident'] = 'extended') -> SplineBasis:
    """
    Nodos equiespaciados para K funciones B-spline sobre [lower, upper]

    'extended' prolonga los nodos fuera del dominio con el mismo espaciado (P-splines);
    'coincident' repite los nodos de borde grado+1 veces.
    """
    if K < degree + 1:
        raise DimensionError(f'K={K} debe ser >= grado+1={degree + 1}')
    if not upper > lower:
        raise DimensionError(f'Dominio vacío: [{lower}, {upper}]')

    if boundary == 'extended':
        nseg = K - degree
        dx = (upper - lower) / nseg
        knots = lower + dx * np.arange(-degree, nseg + degree + 1)
        # bordes exactos para evitar extrapolación por redondeo
        knots[degree] = lower
        knots[nseg + degree] = upper
    else:
        interiores = np.linspace(lower, upper, K - degree + 1)
        knots = np.concatenate([np.full(degree, lower), interiores, np.full(degree, upper)])

    return SplineBasis(knots=knots, degree=degree, K=K, penalty_order=penalty_order,
                       lower=lower, upper=upper, boundary=boundary)


def evaluate_spline_basis(basis: SplineBasis, points) -> np.ndarray:
    """Evalúa las K funciones base en puntos arbitrarios (matriz len(points) x K)"""
    puntos = np.asarray(points, dtype=float).ravel()
    matriz = BSpline.design_matrix(puntos, basis.knots, basis.degree, extrapolate=True)
    return matriz.toarray()


def bspline_basis(points, lower: float, upper: float, K: int, degree: int = 3,
                  boundary: Literal['extended', 'coincident'] = 'extended') -> np.ndarray:
    """
    Matriz de B-splines evaluada en puntos arbitrarios

    Args:
        points: Puntos de evaluación
        lower: Extremo inferior del dominio
        upper: Extremo superior del dominio
        K: Número de funciones base
        degree: Grado de los polinomios
        boundary: 'extended' o 'coincident'

    Returns:
        np.ndarray: len(points) x K, filas que suman 1
    """
    basis = make_spline_basis(lower, upper, K, degree, boundary=boundary)
    return evaluate_spline_basis(basis, points)


def bspline_design(grid: Grid, K: int, degree: int = 3,
                   boundary: Literal['extended', 'coincident'] = 'extended') -> np.ndarray:
    """
    Evaluaciones Φ_1(s_r)..Φ_K(s_r) de la base B-spline en la grilla

    Raises:
        DimensionError: Si K < grado+1
    """
    lower, upper = grid.domain
    return bspline_basis(grid.points, lower, upper, K, degree, boundary)


def difference_penalty(K: int, order: int = 1) -> np.ndarray:
    """
    Penalización DᵀD con D el operador de diferencias de orden `order`

    Examples:
        >>> difference_penalty(3, 1).tolist()
        [[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]]
    """
    if order not in (1, 2):
        raise DimensionError(f'Orden de diferencias no soportado: {order}')
    if K <= order:
        raise DimensionError(f'K={K} debe ser mayor que el orden de diferencias {order}')
    D = np.diff(np.eye(K), n=order, axis=0)
    return D.T @ D


# ============================================================================
# DISEÑOS
# ============================================================================

def signal_design(x: np.ndarray, grid: Grid, basis: np.ndarray) -> np.ndarray:
    """
    Diseño de regresión de señales: (i, k) = Σ_r Δ(s_r) x_i(s_r) Φ_k(s_r)

    Args:
        x: N x R covariable funcional
        grid: Grilla con pesos de cuadratura
        basis: R x K evaluaciones de la base

    Returns:
        np.ndarray: N x K
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    basis = np.atleast_2d(np.asarray(basis, dtype=float))
    if x.shape[1] != grid.R or basis.shape[0] != grid.R:
        raise DimensionError(
            f'x tiene {x.shape[1]} columnas, la grilla {grid.R} puntos y la base {basis.shape[0]} filas'
        )
    return (x * grid.weights) @ basis


def row_tensor(B1: np.ndarray, B2: np.ndarray) -> np.ndarray:
    """
    Producto tensorial por filas; columna (k1, k2) en la posición k1*K2 + k2

    Examples:
        >>> row_tensor(np.array([[1, 2]]), np.array([[3, 4, 5]])).tolist()
        [[3.0, 4.0, 5.0, 6.0, 8.0, 10.0]]
    """
    B1 = np.atleast_2d(np.asarray(B1, dtype=float))
    B2 = np.atleast_2d(np.asarray(B2, dtype=float))
    if B1.shape[0] != B2.shape[0]:
        raise DimensionError(f'Filas distintas: {B1.shape[0]} vs {B2.shape[0]}')
    N = B1.shape[0]
    return (B1[:, :, None] * B2[:, None, :]).reshape(N, B1.shape[1] * B2.shape[1])


def kronecker_sum_penalty(P1: np.ndarray, P2: np.ndarray, lam1: float, lam2: float) -> np.ndarray:
    """
    λ1 (P1 ⊗ I_K2) + λ2 (I_K1 ⊗ P2), con el orden de columnas de row_tensor

    Raises:
        ConfigError: Si algún λ es negativo
    """
    if lam1 < 0 or lam2 < 0:
        raise ConfigError(f'Los parámetros de suavizado deben ser no negativos: ({lam1}, {lam2})')
    P1 = np.atleast_2d(np.asarray(P1, dtype=float))
    P2 = np.atleast_2d(np.asarray(P2, dtype=float))
    K1, K2 = P1.shape[0], P2.shape[0]
    return lam1 * np.kron(P1, np.eye(K2)) + lam2 * np.kron(np.eye(K1), P2)


def center_covariate(x: np.ndarray, standardize: bool = False) -> np.ndarray:
    """
    Centra cada punto de evaluación (columna); opcionalmente divide por la
    desviación estándar global empírica de la matriz centrada

    Raises:
        DimensionError: Si hay menos de 2 observaciones
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[0] < 2:
        raise DimensionError('Centrar requiere al menos 2 observaciones')
    centrada = x - x.mean(axis=0)
    if standardize:
        sd = centrada.std(ddof=1)
        if sd > 0:
            centrada = centrada / sd
    return centrada


# ============================================================================
# FPCA
# ============================================================================

def fpca(x: np.ndarray, grid: Grid, pve: float = 0.99) -> FpcBasis:
    """
    Componentes principales funcionales por autodescomposición de la
    covarianza empírica ponderada con los pesos de cuadratura

    Args:
        x: N x R curvas observadas en la grilla
        grid: Grilla común
        pve: Proporción de varianza a retener, en (0, 1]

    Returns:
        FpcBasis: Media, autofunciones ortonormales en L2 de cuadratura,
        autovalores decrecientes y scores centrados

    Raises:
        ConfigError: Si pve está fuera de (0, 1]
        DimensionError: Si N < 3 o la grilla no coincide
        ZeroBasisError: Si todas las curvas son idénticas
    """
    if not validar_proporcion(pve):
        raise ConfigError(f'pve debe estar en (0, 1]: {pve}')
    x = np.atleast_2d(np.asarray(x, dtype=float))
    N, R = x.shape
    if N < 3:
        raise DimensionError('FPCA requiere al menos 3 curvas')
    if R != grid.R:
        raise DimensionError(f'x tiene {R} columnas y la grilla {grid.R} puntos')

    media = x.mean(axis=0)
    centrada = x - media
    covarianza = centrada.T @ centrada / (N - 1)

    raiz = np.sqrt(grid.weights)
    simetrica = raiz[:, None] * covarianza * raiz[None, :]
    autovalores, autovectores = np.linalg.eigh((simetrica + simetrica.T) / 2)
    orden = np.argsort(autovalores)[::-1]
    autovalores = np.clip(autovalores[orden], 0.0, None)
    autovectores = autovectores[:, orden]

    total = autovalores.sum()
    escala = max(1.0, float(np.abs(covarianza).max()))
    if total <= 1e-14 * escala:
        raise ZeroBasisError('Covarianza degenerada: todas las curvas son idénticas')

    acumulada = np.cumsum(autovalores) / total
    K = int(np.searchsorted(acumulada, pve - 1e-12) + 1)
    K = min(K, int(np.sum(autovalores > 0)))

    autofunciones = autovectores[:, :K] / raiz[:, None]
    # signo determinista: el elemento de mayor valor absoluto es positivo
    for k in range(K):
        pos = np.argmax(np.abs(autofunciones[:, k]))
        if autofunciones[pos, k] < 0:
            autofunciones[:, k] *= -1

    scores = centrada @ (grid.weights[:, None] * autofunciones)
    logger.debug('FPCA estimada', {'K': K, 'explicada': acumulada[K - 1], 'autovalores': autovalores[:K]})

    return FpcBasis(
        grid=grid, mean_curve=media, eigenfunctions=autofunciones,
        eigenvalues=autovalores[:K], scores=scores, pve=pve, explained=float(acumulada[K - 1]),
    )


def fpc_penalty(basis: FpcBasis, kind: Literal['identidad', 'autovalores'] = 'identidad') -> np.ndarray:
    """Penalización identidad (igual importancia) o diag(1/ζ_k)"""
    if kind == 'identidad':
        return np.eye(basis.K)
    return np.diag(1.0 / np.maximum(basis.eigenvalues, np.finfo(float).tiny))


def fpc_scores(basis: FpcBasis, x: np.ndarray, grid: Grid) -> np.ndarray:
    """
    Scores de curvas nuevas contra una base FPC ya estimada

    Raises:
        IncompatibleGridError: Si la grilla difiere de la de estimación
    """
    if not basis.grid.coincide(grid):
        raise IncompatibleGridError('Las curvas nuevas no están en la grilla de la FPCA')
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return (x - basis.mean_curve) @ (grid.weights[:, None] * basis.eigenfunctions)
