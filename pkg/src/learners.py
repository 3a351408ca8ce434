"""
Base-learners: mínimos cuadrados penalizados ponderados, grados de libertad
efectivos y calibración de λ; construcción de los bloques desde la fórmula
"""
from typing import Literal, Optional, Union

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, eigh

from .config import settings
from .errors import (
    ConfigError, DataError, IncompatibleGridError, InfeasibleDfError, RankDeficiencyError, UnknownLabelError
)
from .fda_basis import (
    difference_penalty, evaluate_spline_basis, fpc_penalty, fpc_scores, fpca,
    kronecker_sum_penalty, make_spline_basis, row_tensor, signal_design
)
from .logging_utils import get_logger
from .models import DesignBlock, FpcBasis, Grid, HatSpec, ModelData, NumericModel, SplineBasis, TermSpec

logger = get_logger(__name__, level=settings.log_level, log_file=settings.log_file)

LOG10_LAMBDA_RANGO = (-12.0, 12.0)


# ============================================================================
# MÍNIMOS CUADRADOS PENALIZADOS
# ============================================================================

def _factorizar(A: np.ndarray, label: str):
    """
    Cholesky de A; ante un fallo se agrega un jitter de ridge y se reintenta una vez

    Raises:
        RankDeficiencyError: Si el sistema sigue singular con jitter
    """
    try:
        return cho_factor(A, lower=True)
    except LinAlgError:
        K = A.shape[0]
        traza = float(np.trace(A))
        jitter = settings.ridge_jitter * (traza / K if traza > 0 else 1.0)
        logger.warning('Factorización fallida, se agrega jitter', {'label': label, 'jitter': jitter})
        try:
            return cho_factor(A + jitter * np.eye(K), lower=True)
        except LinAlgError:
            raise RankDeficiencyError(label)


def _sistema(spec: HatSpec) -> tuple[np.ndarray, np.ndarray]:
    """(BᵀWB, BᵀWB + λP)"""
    B, w = spec.design, spec.weights
    F = B.T @ (w[:, None] * B)
    return F, F + spec.lam * spec.penalty


def fit_base_learner(spec: HatSpec, u: np.ndarray) -> np.ndarray:
    """
    γ̂ = (BᵀWB + λP)⁻¹ BᵀW u

    Args:
        spec: Diseño, penalización, λ y pesos
        u: Respuesta de trabajo (gradiente negativo)

    Returns:
        np.ndarray: Coeficientes γ̂ de largo K

    Raises:
        RankDeficiencyError: Si el sistema es singular (nombra la etiqueta del bloque)
    """
    u = np.asarray(u, dtype=float).ravel()
    if u.shape[0] != spec.design.shape[0]:
        raise DataError(f'u tiene largo {u.shape[0]}, se esperaba {spec.design.shape[0]}')
    _, A = _sistema(spec)
    factor = _factorizar(A, spec.label)
    return cho_solve(factor, spec.design.T @ (spec.weights * u))


def effective_df(spec: HatSpec) -> float:
    """
    Traza de la matriz sombrero B(BᵀWB + λP)⁻¹BᵀW

    Raises:
        RankDeficiencyError: Si el sistema es singular
    """
    F, A = _sistema(spec)
    factor = _factorizar(A, spec.label)
    return float(np.trace(cho_solve(factor, F)))


def _demmler_reinsch(spec: HatSpec) -> tuple[np.ndarray, float]:
    """
    Autovalores generalizados κ de F v = κ (F̃ + P̃) v con F y P normalizados por su traza

    df(λ) = Σ κ / (κ + λ c (1 - κ)), c = tr(P) / tr(F); válido para todo λ >= 0
    aunque F sea singular.
    """
    F, _ = _sistema(spec)
    trF = float(np.trace(F))
    trP = float(np.trace(spec.penalty))
    if trF <= 0:
        raise RankDeficiencyError(spec.label, f'Diseño nulo en {spec.label!r}')
    if trP <= 0:
        return (np.linalg.eigvalsh(F / trF) > 1e-10).astype(float), 0.0
    Fn, Pn = F / trF, spec.penalty / trP
    try:
        kappa = eigh(Fn, Fn + Pn, eigvals_only=True)
    except LinAlgError:
        raise RankDeficiencyError(spec.label, f'Nulos comunes de diseño y penalización en {spec.label!r}')
    return np.clip(kappa, 0.0, 1.0), trP / trF


def _df_desde_kappa(kappa: np.ndarray, c: float, lam: float) -> float:
    activos = kappa > 1e-10
    k = kappa[activos]
    return float(np.sum(k / (k + lam * c * (1.0 - k))))


def df_to_lambda(spec: HatSpec, target_df: float, tol: Optional[float] = None) -> float:
    """
    λ tal que effective_df = target_df, por bisección en log10 λ ∈ [-12, 12]

    df(λ) es no creciente, por lo que la raíz es única.

    Args:
        spec: Problema sin λ (se ignora spec.lam)
        target_df: Grados de libertad objetivo
        tol: Tolerancia absoluta en df (por defecto settings.df_tolerance)

    Returns:
        float: λ >= 0 (0 si target_df es el rango del diseño)

    Raises:
        InfeasibleDfError: Si target_df está fuera de [nulidad de P, rango de B]
    """
    tol = settings.df_tolerance if tol is None else tol
    kappa, c = _demmler_reinsch(spec)
    df_max = float(np.sum(kappa > 1e-10))
    df_min = float(np.sum(kappa > 1.0 - 1e-10))

    if target_df > df_max + 1e-8 or target_df < df_min - 1e-8:
        raise InfeasibleDfError(target_df, df_min, df_max, spec.label)
    if abs(target_df - df_max) <= 1e-8 or c == 0.0:
        return 0.0

    lo, hi = LOG10_LAMBDA_RANGO
    if _df_desde_kappa(kappa, c, 10.0 ** hi) >= target_df - tol / 10:
        return 10.0 ** hi
    if _df_desde_kappa(kappa, c, 10.0 ** lo) <= target_df:
        return 10.0 ** lo

    medio = (lo + hi) / 2
    for _ in range(200):
        medio = (lo + hi) / 2
        diferencia = _df_desde_kappa(kappa, c, 10.0 ** medio) - target_df
        if abs(diferencia) < tol / 10:
            break
        if diferencia > 0:
            lo = medio
        else:
            hi = medio

    lam = 10.0 ** medio
    logger.debug('λ calibrado por df', {'label': spec.label, 'df': target_df, 'lambda': lam})
    return lam


# ============================================================================
# BASE-LEARNERS
# ============================================================================

LearnerKind = Literal['intercept', 'linear', 'smooth', 'signal_pspline', 'signal_fpc', 'interaction']


def lag_column_name(var: str, j: int, transformacion: str = 'identidad') -> str:
    """
    Nombre de la columna rezagada j de `var`

    Examples:
        >>> lag_column_name('y', 3)
        'y_lag3'
        >>> lag_column_name('y', 1, 'log_cuadrado')
        'log_y2_lag1'
    """
    if transformacion == 'log_cuadrado':
        return f'log_{var}2_lag{j}'
    return f'{var}_lag{j}'


class LearnerSolver:
    """
    Operador de ajuste de un base-learner para pesos fijos

    γ̂ = S u con S = (BᵀWB + P(λ))⁻¹BᵀW precalculada; ajuste = Bγ̂.
    """

    def __init__(self, design: np.ndarray, penalty: np.ndarray, weights: np.ndarray, label: str):
        self.design = design
        self.weights = weights
        self.label = label
        A = design.T @ (weights[:, None] * design) + penalty
        factor = _factorizar(A, label)
        self.operador = cho_solve(factor, design.T * weights[None, :])

    def fit(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
        """(γ̂, ajuste, RSS ponderado)"""
        gamma = self.operador @ u
        ajuste = self.design @ gamma
        rss = float(np.dot(self.weights, (u - ajuste) ** 2))
        return gamma, ajuste, rss


class BaseLearner(NumericModel):
    """Bloque de diseño con todo lo necesario para reconstruirlo en datos nuevos"""
    label: str
    kind: LearnerKind
    var: Optional[str] = None
    por: Optional[str] = None
    tipo_por: Literal['lineal', 'spline'] = 'spline'
    design: np.ndarray
    penalty: np.ndarray
    lam: Union[float, tuple[float, float]] = 0.0
    target_df: Union[float, Literal['unpenalized']] = 'unpenalized'
    spline: Optional[SplineBasis] = None
    phi: Optional[np.ndarray] = None
    grid: Optional[Grid] = None
    fpc: Optional[FpcBasis] = None
    por_spline: Optional[SplineBasis] = None

    @property
    def K(self) -> int:
        return int(self.design.shape[1])

    @property
    def es_funcional(self) -> bool:
        return self.kind in ('signal_pspline', 'signal_fpc')

    def block(self) -> DesignBlock:
        """Vista DesignBlock (diseño, penalización P(λ), λ, etiqueta, df)"""
        return DesignBlock(design=self.design, penalty=self.penalty, lam=self.lam,
                           label=self.label, target_df=self.target_df)

    def solver(self, weights: np.ndarray) -> LearnerSolver:
        return LearnerSolver(self.design, self.penalty, weights, self.label)

    def _parte_senal(self, data: ModelData) -> np.ndarray:
        if self.var not in data.funcionales:
            raise DataError(f'Falta la covariable funcional {self.var!r}')
        funcional = data.funcionales[self.var]
        if self.fpc is not None:
            return fpc_scores(self.fpc, funcional.x, funcional.grid)
        if not self.grid.coincide(funcional.grid):
            raise IncompatibleGridError(f'{self.var!r} no está en la grilla de entrenamiento')
        return signal_design(funcional.x, funcional.grid, self.phi)

    def _escalar(self, data: ModelData, nombre: str) -> np.ndarray:
        if nombre not in data.escalares:
            raise DataError(f'Falta la covariable escalar {nombre!r}')
        return data.escalares[nombre]

    def design_for(self, data: ModelData) -> np.ndarray:
        """
        Diseño del bloque evaluado en datos nuevos

        Raises:
            DataError: Si falta una covariable
            IncompatibleGridError: Si una covariable funcional está en otra grilla
        """
        if self.kind == 'intercept':
            return np.ones((data.N, 1))
        if self.kind == 'linear':
            return self._escalar(data, self.var)[:, None]
        if self.kind == 'smooth':
            return evaluate_spline_basis(self.spline, self._escalar(data, self.var))
        senal = self._parte_senal(data)
        if self.kind != 'interaction':
            return senal
        z = self._escalar(data, self.por)
        if self.tipo_por == 'lineal':
            return z[:, None] * senal
        return row_tensor(senal, evaluate_spline_basis(self.por_spline, z))

    def smooth_curve(self, theta: np.ndarray, z: np.ndarray) -> np.ndarray:
        """f̂(z) = Σ_k Φ_k(z) θ_k de un efecto suave escalar"""
        if self.kind != 'smooth':
            raise UnknownLabelError(f'{self.label!r} no es un efecto suave escalar')
        return evaluate_spline_basis(self.spline, z) @ np.asarray(theta, dtype=float)

    def coefficient_curve(self, theta: np.ndarray, grid: Optional[Grid] = None) -> tuple[np.ndarray, np.ndarray]:
        """
        β̂(s) = Σ_k Φ_k(s) θ_k (P-spline) o Σ_k ê_k(s) θ_k (FPC)

        Returns:
            tuple: (puntos s, valores β̂(s))

        Raises:
            UnknownLabelError: Si el bloque no es de señal
            IncompatibleGridError: Si se pide una base FPC fuera de su grilla
        """
        theta = np.asarray(theta, dtype=float)
        if self.kind == 'signal_pspline':
            if grid is None or grid.coincide(self.grid):
                return self.grid.points, self.phi @ theta
            return grid.points, evaluate_spline_basis(self.spline, grid.points) @ theta
        if self.kind == 'signal_fpc':
            if grid is not None and not grid.coincide(self.fpc.grid):
                raise IncompatibleGridError('Una base FPC solo se evalúa en su grilla de estimación')
            return self.fpc.grid.points, self.fpc.eigenfunctions @ theta
        raise UnknownLabelError(f'{self.label!r} no es un bloque de señal ni FPC')


# ============================================================================
# CONSTRUCCIÓN DESDE LA FÓRMULA
# ============================================================================

def _calibrar(design: np.ndarray, penalty: np.ndarray, term: TermSpec, weights: np.ndarray,
              label: str) -> tuple[float, Union[float, Literal['unpenalized']]]:
    """λ explícito, 0 para términos sin penalizar, o calibrado por df"""
    if isinstance(term.lam, list):
        raise ConfigError(f'{label}: lambda como par [λ1, λ2] solo aplica a interacciones spline')
    if term.lam is not None:
        return float(term.lam), term.df_objetivo
    objetivo = term.df_objetivo
    if objetivo == 'unpenalized':
        return 0.0, objetivo
    spec = HatSpec(design=design, penalty=penalty, weights=weights, label=label)
    return df_to_lambda(spec, float(objetivo)), objetivo


def _bloque_senal(term: TermSpec, data: ModelData) -> dict:
    if term.var not in data.funcionales:
        raise DataError(f'Falta la covariable funcional {term.var!r}')
    funcional = data.funcionales[term.var]
    if term.base == 'fpc':
        base = fpca(funcional.x, funcional.grid, term.pve)
        return {'kind': 'signal_fpc', 'design': base.scores, 'penalty': fpc_penalty(base, term.penalizacion_fpc),
                'fpc': base}
    lower, upper = funcional.grid.domain
    spline = make_spline_basis(lower, upper, term.K, term.grado, term.orden_penalizacion)
    phi = evaluate_spline_basis(spline, funcional.grid.points)
    return {'kind': 'signal_pspline', 'design': signal_design(funcional.x, funcional.grid, phi),
            'penalty': difference_penalty(term.K, term.orden_penalizacion),
            'spline': spline, 'phi': phi, 'grid': funcional.grid}


def build_term(term: TermSpec, data: ModelData, weights: np.ndarray) -> list[BaseLearner]:
    """
    Base-learners de un término (un término lag produce p bloques lineales)

    Raises:
        ConfigError: Si un término que no es interacción spline trae lambda como par
        DataError: Si falta una covariable
        InfeasibleDfError: Si el df pedido no es alcanzable
    """
    cero = np.zeros((1, 1))
    if term.tipo == 'intercept':
        return [BaseLearner(label='intercept', kind='intercept', design=np.ones((data.N, 1)), penalty=cero)]

    if term.tipo in ('linear', 'lag'):
        nombres = ([term.var] if term.tipo == 'linear'
                   else [lag_column_name(term.var, j, term.transformacion) for j in range(1, term.p + 1)])
        bloques = []
        for nombre in nombres:
            if nombre not in data.escalares:
                raise DataError(f'Falta la covariable escalar {nombre!r}')
            bloques.append(BaseLearner(label=f'linear({nombre})', kind='linear', var=nombre,
                                       design=data.escalares[nombre][:, None], penalty=cero))
        return bloques

    if term.tipo == 'smooth':
        if term.var not in data.escalares:
            raise DataError(f'Falta la covariable escalar {term.var!r}')
        z = data.escalares[term.var]
        spline = make_spline_basis(float(z.min()), float(z.max()), term.K, term.grado, term.orden_penalizacion)
        design = evaluate_spline_basis(spline, z)
        penalty = difference_penalty(term.K, term.orden_penalizacion)
        label = f'smooth({term.var})'
        lam, objetivo = _calibrar(design, penalty, term, weights, label)
        return [BaseLearner(label=label, kind='smooth', var=term.var, design=design, penalty=lam * penalty,
                            lam=lam, target_df=objetivo, spline=spline)]

    partes = _bloque_senal(term, data)
    if term.tipo == 'signal':
        label = f'signal({term.var},{term.base})'
        lam, objetivo = _calibrar(partes['design'], partes['penalty'], term, weights, label)
        partes['penalty'] = lam * partes['penalty']
        return [BaseLearner(label=label, var=term.var, lam=lam, target_df=objetivo, **partes)]

    label = f'interaction({term.var},{term.por})'
    if term.por not in data.escalares:
        raise DataError(f'Falta la covariable escalar {term.por!r}')
    z = data.escalares[term.por]
    P1 = partes.pop('penalty')
    B1 = partes.pop('design')
    partes['kind'] = 'interaction'
    if term.tipo_por == 'lineal':
        design = z[:, None] * B1
        lam, objetivo = _calibrar(design, P1, term, weights, label)
        return [BaseLearner(label=label, var=term.var, por=term.por, tipo_por='lineal', design=design,
                            penalty=lam * P1, lam=lam, target_df=objetivo, **partes)]

    por_spline = make_spline_basis(float(z.min()), float(z.max()), term.K_por, term.grado,
                                   term.orden_penalizacion)
    design = row_tensor(B1, evaluate_spline_basis(por_spline, z))
    P2 = difference_penalty(term.K_por, term.orden_penalizacion)
    if isinstance(term.lam, list):
        lam1, lam2 = float(term.lam[0]), float(term.lam[1])
        objetivo = term.df_objetivo
    else:
        lam, objetivo = _calibrar(design, kronecker_sum_penalty(P1, P2, 1.0, 1.0), term, weights, label)
        lam1 = lam2 = lam
    return [BaseLearner(label=label, var=term.var, por=term.por, tipo_por='spline', design=design,
                        penalty=kronecker_sum_penalty(P1, P2, lam1, lam2), lam=(lam1, lam2),
                        target_df=objetivo, por_spline=por_spline, **partes)]


def build_learners(formula: dict[str, list[TermSpec]], data: ModelData, parameter_names: tuple[str, ...],
                   weights: Optional[np.ndarray] = None) -> list[list[BaseLearner]]:
    """
    Base-learners por parámetro, en el orden de la familia

    λ se calibra una sola vez con los pesos completos de entrenamiento y queda
    fijo en todas las remuestras.
    """
    w = np.ones(data.N) if weights is None else np.asarray(weights, dtype=float)
    learners = []
    for nombre in parameter_names:
        bloques: list[BaseLearner] = []
        for term in formula.get(nombre, []):
            bloques.extend(build_term(term, data, w))
        etiquetas = [b.label for b in bloques]
        if len(set(etiquetas)) != len(etiquetas):
            raise DataError(f'Etiquetas repetidas en {nombre}: {etiquetas}')
        learners.append(bloques)
        logger.debug('Base-learners construidos', {'parametro': nombre, 'labels': etiquetas})
    return learners
