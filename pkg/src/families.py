"""
Familias de distribuciones de respuesta: Normal y t de localización-escala
Log-verosimilitud, enlaces, gradientes negativos parciales y función de distribución
"""
from typing import Optional

import numpy as np
from scipy.special import betainc, digamma, gammaln, ndtr

from .config import settings
from .errors import EvaluationError, UnknownFamilyError
from .logging_utils import get_logger
from .models import ParamVector

logger = get_logger(__name__, level=settings.log_level, log_file=settings.log_file)

LOG_2PI = float(np.log(2 * np.pi))


class Link:
    """Función de enlace g y su inversa"""
    name = 'identity'

    def link(self, v: np.ndarray) -> np.ndarray:
        return v

    def inverse(self, h: np.ndarray) -> np.ndarray:
        return h


class LogLink(Link):
    name = 'log'

    def link(self, v: np.ndarray) -> np.ndarray:
        return np.log(v)

    def inverse(self, h: np.ndarray) -> np.ndarray:
        return np.exp(h)


class Family:
    """
    Contrato de una distribución de respuesta con Q parámetros

    Las subclases definen nombres, enlaces, offsets por defecto,
    log-verosimilitud por observación, gradientes y CDF.
    """
    name: str = ''
    parameter_names: tuple[str, ...] = ()
    links: tuple[Link, ...] = ()
    default_nu: tuple[float, ...] = ()

    @property
    def Q(self) -> int:
        return len(self.parameter_names)

    def param_vector(self, h: np.ndarray) -> ParamVector:
        """
        Pasa de predictores (escala de enlace) a parámetros (escala de respuesta)

        Los parámetros con enlace log se acotan inferiormente por settings.sigma_floor;
        las activaciones se cuentan y se reportan.
        """
        h = np.atleast_2d(np.asarray(h, dtype=float))
        if h.shape[0] != self.Q:
            raise EvaluationError(f'{self.name} espera {self.Q} predictores, recibió {h.shape[0]}')
        vartheta = np.empty_like(h)
        pisos = 0
        for q, enlace in enumerate(self.links):
            vartheta[q] = enlace.inverse(h[q])
            if isinstance(enlace, LogLink):
                bajo = vartheta[q] < settings.sigma_floor
                if np.any(bajo):
                    pisos += int(bajo.sum())
                    vartheta[q] = np.where(bajo, settings.sigma_floor, vartheta[q])
        if pisos:
            logger.warning('Piso de parámetros positivos activado', {'familia': self.name, 'activaciones': pisos})
        return ParamVector(names=self.parameter_names, h=h, vartheta=vartheta, floor_count=pisos)

    def _validar(self, y: np.ndarray, params: ParamVector) -> None:
        if params.names != self.parameter_names:
            raise EvaluationError(f'Parámetros {params.names} no corresponden a {self.name}')
        if not np.all(np.isfinite(params.vartheta)) or not np.all(np.isfinite(y)):
            raise EvaluationError('Parámetros o respuesta no finitos')
        for q, enlace in enumerate(self.links):
            if isinstance(enlace, LogLink) and np.any(params.vartheta[q] <= 0):
                raise EvaluationError(f'{self.parameter_names[q]} debe ser estrictamente positivo')
        if len(y) != params.N:
            raise EvaluationError(f'y tiene {len(y)} observaciones y los parámetros {params.N}')

    def loglik_obs(self, y: np.ndarray, params: ParamVector) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, y: np.ndarray, params: ParamVector, q: int) -> np.ndarray:
        raise NotImplementedError

    def cdf_tail(self, y: np.ndarray, params: ParamVector) -> tuple[np.ndarray, np.ndarray]:
        """(probabilidad de la cola más cercana, signo): F = p si signo<0, 1-p si signo>0"""
        raise NotImplementedError

    def initial_offsets(self, y: np.ndarray, w: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def _media_sd_ponderadas(y: np.ndarray, w: np.ndarray) -> tuple[float, float]:
    total = w.sum()
    media = float(np.sum(w * y) / total)
    varianza = float(np.sum(w * (y - media) ** 2) / total)
    return media, float(np.sqrt(varianza))


class NormalLS(Family):
    """Normal con enlace identidad para μ y log para σ"""
    name = 'normal-ls'
    parameter_names = ('mu', 'sigma')
    links = (Link(), LogLink())
    default_nu = (0.1, 0.01)

    def loglik_obs(self, y: np.ndarray, params: ParamVector) -> np.ndarray:
        self._validar(y, params)
        mu, sigma = params.vartheta
        return -0.5 * LOG_2PI - np.log(sigma) - (y - mu) ** 2 / (2 * sigma ** 2)

    def gradient(self, y: np.ndarray, params: ParamVector, q: int) -> np.ndarray:
        mu, sigma = params.vartheta
        if q == 0:
            return (y - mu) / sigma ** 2
        return -1.0 + (y - mu) ** 2 / sigma ** 2

    def cdf_tail(self, y: np.ndarray, params: ParamVector) -> tuple[np.ndarray, np.ndarray]:
        self._validar(y, params)
        z = (y - params.vartheta[0]) / params.vartheta[1]
        return ndtr(-np.abs(z)), np.sign(z)

    def initial_offsets(self, y: np.ndarray, w: np.ndarray) -> np.ndarray:
        media, sd = _media_sd_ponderadas(y, w)
        return np.array([media, np.log(sd)])


class StudentTLS(Family):
    """t de localización-escala con (μ, log σ, log df)"""
    name = 't-ls'
    parameter_names = ('mu', 'sigma', 'df')
    links = (Link(), LogLink(), LogLink())
    default_nu = (0.1, 0.01, 0.1)
    df_inicial = 10.0

    def loglik_obs(self, y: np.ndarray, params: ParamVector) -> np.ndarray:
        self._validar(y, params)
        mu, sigma, nu = params.vartheta
        z2 = ((y - mu) / sigma) ** 2
        return (gammaln((nu + 1) / 2) - gammaln(nu / 2) - 0.5 * np.log(nu * np.pi)
                - np.log(sigma) - (nu + 1) / 2 * np.log1p(z2 / nu))

    def gradient(self, y: np.ndarray, params: ParamVector, q: int) -> np.ndarray:
        mu, sigma, nu = params.vartheta
        z = (y - mu) / sigma
        z2 = z ** 2
        if q == 0:
            return (nu + 1) * z / (sigma * (nu + z2))
        if q == 1:
            return -1.0 + (nu + 1) * z2 / (nu + z2)
        # derivada respecto de log df = df * dl/ddf
        dl_dnu = 0.5 * (digamma((nu + 1) / 2) - digamma(nu / 2) - 1.0 / nu
                        - np.log1p(z2 / nu) + (nu + 1) * z2 / (nu * (nu + z2)))
        return nu * dl_dnu

    def cdf_tail(self, y: np.ndarray, params: ParamVector) -> tuple[np.ndarray, np.ndarray]:
        self._validar(y, params)
        mu, sigma, nu = params.vartheta
        t = (y - mu) / sigma
        # P(T <= -|t|) = I_{ν/(ν+t²)}(ν/2, 1/2) / 2
        cola = 0.5 * betainc(nu / 2, 0.5, nu / (nu + t ** 2))
        return cola, np.sign(t)

    def initial_offsets(self, y: np.ndarray, w: np.ndarray) -> np.ndarray:
        media, sd = _media_sd_ponderadas(y, w)
        return np.array([media, np.log(sd), np.log(self.df_inicial)])


FAMILIAS: dict[str, type[Family]] = {
    NormalLS.name: NormalLS,
    StudentTLS.name: StudentTLS,
}


def get_family(name: str) -> Family:
    """
    Familia registrada por nombre

    Raises:
        UnknownFamilyError: Si el nombre no está registrado
    """
    try:
        return FAMILIAS[name]()
    except KeyError:
        raise UnknownFamilyError(f'Familia desconocida: {name!r} (disponibles: {sorted(FAMILIAS)})')


# ============================================================================
# OPERACIONES
# ============================================================================

def loglik(family: Family, y: np.ndarray, params: ParamVector,
           weights: Optional[np.ndarray] = None) -> float:
    """
    Log-verosimilitud total Σ_i w_i l(ϑ_i, y_i)

    Raises:
        EvaluationError: Si algún parámetro no es finito o está fuera de dominio
    """
    y = np.asarray(y, dtype=float).ravel()
    por_obs = family.loglik_obs(y, params)
    if weights is not None:
        por_obs = weights * por_obs
    return float(np.sum(por_obs))


def negative_gradient(family: Family, y: np.ndarray, params: ParamVector, q: int) -> np.ndarray:
    """
    Gradiente negativo del riesgo respecto de h^(q) (= derivada de la log-verosimilitud)

    Raises:
        EvaluationError: Si q no es un índice de parámetro válido
    """
    if not 0 <= q < family.Q:
        raise EvaluationError(f'Parámetro {q} inválido para {family.name} (Q={family.Q})')
    y = np.asarray(y, dtype=float).ravel()
    return family.gradient(y, params, q)


def cdf(family: Family, y: np.ndarray, params: ParamVector) -> np.ndarray:
    """F(y_i | ϑ_i)"""
    cola, signo = family.cdf_tail(np.asarray(y, dtype=float).ravel(), params)
    return np.where(signo > 0, 1.0 - cola, cola)


def variance_coefficients(theta_sigma: np.ndarray) -> np.ndarray:
    """Coeficientes para log σ² a partir de los de log σ"""
    return 2.0 * np.asarray(theta_sigma, dtype=float)
