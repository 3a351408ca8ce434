"""
Máxima verosimilitud penalizada para la Normal de localización-escala con λ fijo
Backfitting por parámetro: mínimos cuadrados ponderados para μ, Newton amortiguado para log σ
"""
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy.linalg import LinAlgError, block_diag, cho_factor, cho_solve

from .config import settings
from .errors import DataError, RankDeficiencyError
from .learners import BaseLearner
from .logging_utils import get_logger
from .models import NumericModel

logger = get_logger(__name__, level=settings.log_level, log_file=settings.log_file)

LOG_2PI = float(np.log(2 * np.pi))
MAX_CICLOS = 500
MAX_MEDIAS = 30


class OracleFit(NumericModel):
    """Coeficientes por parámetro, bandera de convergencia y traza de l_p"""
    theta_mu: np.ndarray
    theta_sigma: np.ndarray
    converged: bool
    iterations: int
    score_norm: float
    penalized_loglik: float
    history: list[float]


def stack_blocks(learners: Sequence[BaseLearner]) -> tuple[np.ndarray, np.ndarray]:
    """
    Diseño apilado [B_1 ... B_J] y penalización diagonal por bloques con λ incluido

    Son las mismas matrices que usa el boosting para ese parámetro.
    """
    if not learners:
        raise DataError('Se requiere al menos un bloque')
    bloques = [learner.block() for learner in learners]
    design = np.hstack([b.design for b in bloques])
    penalty = block_diag(*[b.penalty for b in bloques])
    return design, penalty


def _resolver(A: np.ndarray, b: np.ndarray, label: str) -> np.ndarray:
    try:
        return cho_solve(cho_factor(A, lower=True), b)
    except LinAlgError:
        raise RankDeficiencyError(label)


class _Problema:
    """l_p(θ) = Σ w_i l_i - ½ θ_μᵀP_μθ_μ - ½ θ_σᵀP_σθ_σ"""

    def __init__(self, X_mu, P_mu, X_sigma, P_sigma, y, w, offsets):
        self.X_mu, self.P_mu = X_mu, P_mu
        self.X_sigma, self.P_sigma = X_sigma, P_sigma
        self.y, self.w = y, w
        self.off_mu, self.off_sigma = offsets

    def eta(self, theta_mu, theta_sigma):
        return self.off_mu + self.X_mu @ theta_mu, self.off_sigma + self.X_sigma @ theta_sigma

    def lp(self, theta_mu, theta_sigma) -> float:
        mu, eta = self.eta(theta_mu, theta_sigma)
        r2 = (self.y - mu) ** 2
        l = np.sum(self.w * (-0.5 * LOG_2PI - eta - 0.5 * r2 * np.exp(-2 * eta)))
        return float(l - 0.5 * theta_mu @ self.P_mu @ theta_mu - 0.5 * theta_sigma @ self.P_sigma @ theta_sigma)

    def score(self, theta_mu, theta_sigma) -> np.ndarray:
        mu, eta = self.eta(theta_mu, theta_sigma)
        r = self.y - mu
        s2 = np.exp(-2 * eta)
        g_mu = self.X_mu.T @ (self.w * r * s2) - self.P_mu @ theta_mu
        g_sigma = self.X_sigma.T @ (self.w * (-1.0 + r ** 2 * s2)) - self.P_sigma @ theta_sigma
        return np.concatenate([g_mu, g_sigma])

    def paso_mu(self, theta_sigma) -> np.ndarray:
        """Maximizador exacto en θ_μ dado η_σ (mínimos cuadrados con pesos 1/σ²)"""
        _, eta = self.eta(np.zeros(self.X_mu.shape[1]), theta_sigma)
        pesos = self.w * np.exp(-2 * eta)
        A = self.X_mu.T @ (pesos[:, None] * self.X_mu) + self.P_mu
        return _resolver(A, self.X_mu.T @ (pesos * (self.y - self.off_mu)), 'mu')

    def paso_sigma(self, theta_mu, theta_sigma) -> tuple[np.ndarray, bool]:
        """Un paso de Newton amortiguado en θ_σ; False si ninguna mitad mejora l_p"""
        mu, eta = self.eta(theta_mu, theta_sigma)
        r2s2 = (self.y - mu) ** 2 * np.exp(-2 * eta)
        g = self.X_sigma.T @ (self.w * (-1.0 + r2s2)) - self.P_sigma @ theta_sigma
        H = self.X_sigma.T @ ((2 * self.w * r2s2)[:, None] * self.X_sigma) + self.P_sigma
        delta = _resolver(H, g, 'sigma')

        actual = self.lp(theta_mu, theta_sigma)
        paso = 1.0
        for _ in range(MAX_MEDIAS):
            candidato = theta_sigma + paso * delta
            if self.lp(theta_mu, candidato) >= actual - 1e-12 * max(1.0, abs(actual)):
                return candidato, True
            paso /= 2
        return theta_sigma, False


def newton_fit_gaussian_ls(X_mu: np.ndarray, P_mu: np.ndarray, X_sigma: np.ndarray, P_sigma: np.ndarray,
                           y: np.ndarray, weights: Optional[np.ndarray] = None,
                           offsets: tuple[float, float] = (0.0, 0.0), tol: float = 1e-10,
                           score_tol: float = 1e-6, max_cycles: int = MAX_CICLOS) -> OracleFit:
    """
    Backfitting RS para la Normal (μ identidad, log σ)

    Cada ciclo resuelve μ exactamente dado σ y da un paso de Newton amortiguado
    (hasta 30 mitades) en log σ. Se detiene cuando el cambio de l_p es menor
    que tol y la norma máxima del score es menor que score_tol.

    Args:
        X_mu, P_mu: Diseño y penalización (λ incluido) de μ
        X_sigma, P_sigma: Diseño y penalización de log σ
        y: Respuesta
        weights: Pesos por observación (por defecto 1)
        offsets: Offsets fijos de (μ, log σ)

    Returns:
        OracleFit: La no convergencia se informa con converged=False, nunca con excepción

    Raises:
        RankDeficiencyError: Si un sistema penalizado es singular
    """
    y = np.asarray(y, dtype=float).ravel()
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float)
    X_mu, X_sigma = np.atleast_2d(X_mu), np.atleast_2d(X_sigma)
    if X_mu.shape[0] != y.size or X_sigma.shape[0] != y.size:
        raise DataError('Los diseños y la respuesta tienen largos distintos')
    problema = _Problema(X_mu, np.atleast_2d(P_mu), X_sigma, np.atleast_2d(P_sigma), y, w, offsets)

    # arranque: log σ constante en la sd de y
    objetivo = np.full(y.size, np.log(max(float(np.std(y)), 1e-8)) - offsets[1])
    theta_sigma = np.linalg.lstsq(X_sigma, objetivo, rcond=None)[0]
    theta_mu = problema.paso_mu(theta_sigma)
    historia = [problema.lp(theta_mu, theta_sigma)]

    convergido = False
    ciclo = 0
    for ciclo in range(1, max_cycles + 1):
        theta_sigma, mejoro = problema.paso_sigma(theta_mu, theta_sigma)
        theta_mu = problema.paso_mu(theta_sigma)
        historia.append(problema.lp(theta_mu, theta_sigma))
        norma = float(np.max(np.abs(problema.score(theta_mu, theta_sigma))))
        if abs(historia[-1] - historia[-2]) < tol and norma < score_tol:
            convergido = True
            break
        if not mejoro:
            logger.warning('Newton amortiguado sin mejora', {'ciclo': ciclo, 'score': norma})
            break

    norma = float(np.max(np.abs(problema.score(theta_mu, theta_sigma))))
    if not convergido:
        logger.warning('Oráculo sin convergencia', {'ciclos': ciclo, 'score': norma})
    return OracleFit(theta_mu=theta_mu, theta_sigma=theta_sigma, converged=convergido, iterations=ciclo,
                     score_norm=norma, penalized_loglik=historia[-1], history=historia)


def oracle_from_learners(learners: list[list[BaseLearner]], y: np.ndarray,
                         offsets: tuple[float, float] = (0.0, 0.0)) -> OracleFit:
    """Ajusta el oráculo con los diseños y penalizaciones de los base-learners de μ y σ"""
    if len(learners) != 2:
        raise DataError('El oráculo solo cubre la Normal de localización-escala (μ, σ)')
    X_mu, P_mu = stack_blocks(learners[0])
    X_sigma, P_sigma = stack_blocks(learners[1])
    return newton_fit_gaussian_ls(X_mu, P_mu, X_sigma, P_sigma, y, offsets=offsets)


def oracle_table(fit: OracleFit, learners: list[list[BaseLearner]],
                 offsets: tuple[float, float] = (0.0, 0.0)) -> pd.DataFrame:
    """Coeficientes en el mismo formato largo que la tabla del boosting"""
    filas = []
    for nombre, theta, bloques, offset in zip(('mu', 'sigma'), (fit.theta_mu, fit.theta_sigma), learners, offsets):
        filas.append((nombre, 'offset', 0, float(offset)))
        inicio = 0
        for learner in bloques:
            filas.extend((nombre, learner.label, k, float(v))
                         for k, v in enumerate(theta[inicio:inicio + learner.K]))
            inicio += learner.K
    return pd.DataFrame(filas, columns=['parameter', 'label', 'index', 'value'])
