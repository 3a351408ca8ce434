"""
Boosting por componentes para GAMLSS con covariables funcionales y escalares
Ciclo por parámetro, selección del mejor base-learner y actualización con paso ν
"""
from typing import Optional

import numpy as np
import pandas as pd
from pydantic import ConfigDict

from .config import settings
from .errors import (
    ConfigError, DegenerateResponseError, EvaluationError, NonFiniteGradientError, UnknownLabelError
)
from .families import Family, get_family, loglik
from .learners import BaseLearner, LearnerSolver
from .logging_utils import get_logger
from .models import BoostConfig, Grid, ModelData, NumericModel, ParamVector, SelectionEntry

logger = get_logger(__name__, level=settings.log_level, log_file=settings.log_file)

FILAS_META = ('offset', 'mstop', 'nu')


class FitState(NumericModel):
    """
    Resultado inmutable de un ajuste

    h[q] = offset[q] + Σ_j B_j θ_j^(q) en los datos de entrenamiento.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    family: str
    parameter_names: tuple[str, ...]
    offsets: np.ndarray
    coefficients: list[list[np.ndarray]]
    h: np.ndarray
    m: int
    mstop: list[int]
    nu: list[float]
    selection: list[SelectionEntry]
    risk_trace: list[float]
    learners: list[list[BaseLearner]]

    def q_de(self, parameter: str) -> int:
        if parameter not in self.parameter_names:
            raise UnknownLabelError(f'Parámetro desconocido: {parameter!r}')
        return self.parameter_names.index(parameter)

    def theta(self, parameter: str, label: str) -> np.ndarray:
        q = self.q_de(parameter)
        for learner, coef in zip(self.learners[q], self.coefficients[q]):
            if learner.label == label:
                return coef
        raise UnknownLabelError(f'No existe el bloque {label!r} en {parameter}')


def initialize_offsets(family: Family, y: np.ndarray, weights: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Offsets del modelo constante: media ponderada y log de la sd ponderada (ML)

    Raises:
        DegenerateResponseError: Sin observaciones con peso o varianza ponderada nula
    """
    y = np.asarray(y, dtype=float).ravel()
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float)
    total = w.sum()
    if total <= 0:
        raise DegenerateResponseError('No hay observaciones con peso positivo')
    media = np.sum(w * y) / total
    sd = np.sqrt(np.sum(w * (y - media) ** 2) / total)
    if sd <= 1e-12 * max(1.0, abs(media)):
        raise DegenerateResponseError('La respuesta tiene varianza ponderada nula')
    return family.initial_offsets(y, w)


class Booster:
    """
    Estado mutable del algoritmo; avanza barrida a barrida

    Los solvers se precalculan una vez por conjunto de pesos y se comparten
    entre copias, de modo que una copia avanzada da exactamente lo mismo que
    un ajuste nuevo con los mismos pesos.
    """

    def __init__(self, family: Family, y: np.ndarray, learners: list[list[BaseLearner]],
                 weights: np.ndarray, nu: list[float], offsets: np.ndarray,
                 registrar_riesgo: bool = True, trace_every: int = 0):
        self.family = family
        self.y = y
        self.learners = learners
        self.weights = weights
        self.nu = nu
        self.offsets = offsets
        self.registrar_riesgo = registrar_riesgo
        self.trace_every = trace_every
        self.solvers: list[list[LearnerSolver]] = [
            [learner.solver(weights) for learner in bloque] for bloque in learners
        ]
        self.h = np.repeat(offsets[:, None], len(y), axis=1).astype(float)
        self.coefficients = [[np.zeros(learner.K) for learner in bloque] for bloque in learners]
        self.m = 0
        self.selection: list[SelectionEntry] = []
        self.risk_trace: list[float] = []

    def copy(self) -> 'Booster':
        otro = object.__new__(Booster)
        otro.__dict__.update(self.__dict__)
        otro.h = self.h.copy()
        otro.coefficients = [[c.copy() for c in bloque] for bloque in self.coefficients]
        otro.selection = list(self.selection)
        otro.risk_trace = list(self.risk_trace)
        return otro

    def riesgo(self) -> float:
        """Log-verosimilitud negativa ponderada en entrenamiento"""
        return -loglik(self.family, self.y, self.family.param_vector(self.h), self.weights)

    def step(self, q: int) -> None:
        """Un paso del parámetro q: gradiente en el h actual, ajuste de todos los bloques, actualización"""
        nombre = self.family.parameter_names[q]
        u = self.family.gradient(self.y, self.family.param_vector(self.h), q)
        malos = ~np.isfinite(u)
        if np.any(malos):
            raise NonFiniteGradientError(nombre, int(np.flatnonzero(malos)[0]), self.m)

        mejor_j, mejor = -1, None
        for j, solver in enumerate(self.solvers[q]):
            ajuste = solver.fit(u)
            # desigualdad estricta: ante empates gana el índice menor
            if mejor is None or ajuste[2] < mejor[2]:
                mejor_j, mejor = j, ajuste

        gamma, fitted, rss = mejor
        self.h[q] += self.nu[q] * fitted
        self.coefficients[q][mejor_j] += self.nu[q] * gamma
        self.selection.append(SelectionEntry(
            iteration=self.m, parameter=nombre, index=mejor_j,
            label=self.learners[q][mejor_j].label, rss=rss,
        ))

    def sweep(self, mstop: tuple[int, ...]) -> None:
        """Iteración m+1: recorre q = 1..Q salteando los parámetros con m > mstop[q]"""
        self.m += 1
        for q in range(self.family.Q):
            if self.m <= mstop[q]:
                self.step(q)
        if self.registrar_riesgo:
            self.risk_trace.append(self.riesgo())
        if self.trace_every and self.m % self.trace_every == 0:
            logger.debug('Progreso del boosting', {'m': self.m, 'riesgo': self.riesgo()})

    def advance_to(self, mstop: tuple[int, ...]) -> 'Booster':
        while self.m < max(mstop, default=0):
            self.sweep(mstop)
        return self

    def to_state(self, mstop: tuple[int, ...]) -> FitState:
        return FitState(
            family=self.family.name, parameter_names=self.family.parameter_names,
            offsets=self.offsets.copy(), coefficients=[[c.copy() for c in b] for b in self.coefficients],
            h=self.h.copy(), m=self.m, mstop=list(mstop), nu=list(self.nu),
            selection=list(self.selection), risk_trace=list(self.risk_trace), learners=self.learners,
        )


def _preparar(data: ModelData, family: Family, learners: list[list[BaseLearner]],
              config: BoostConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Valida la combinación familia/learners/config; devuelve (y, pesos, offsets)"""
    if data.y is None:
        raise ConfigError('Los datos no tienen respuesta')
    if len(learners) != family.Q:
        raise ConfigError(f'{family.name} tiene {family.Q} parámetros y se recibieron {len(learners)} listas de learners')
    for nombre, bloque in zip(family.parameter_names, learners):
        if not bloque:
            raise ConfigError(f'El parámetro {nombre} no tiene base-learners')
    if len(config.nu) != family.Q:
        raise ConfigError(f'nu y mstop deben tener {family.Q} valores')
    y = data.y
    w = np.ones_like(y) if config.weights is None else config.weights
    if w.shape != y.shape:
        raise ConfigError(f'Los pesos tienen largo {w.size} y la respuesta {y.size}')
    return y, w, initialize_offsets(family, y, w)


def boost_fit(data: ModelData, family: Family, learners: list[list[BaseLearner]],
              config: BoostConfig) -> FitState:
    """
    Ajusta el modelo por boosting por componentes hasta mstop por parámetro

    Args:
        data: Datos con respuesta
        family: Familia de la respuesta
        learners: Base-learners por parámetro, en el orden de la familia
        config: Largos de paso, mstop y pesos de remuestreo

    Returns:
        FitState: Coeficientes, predictores, registro de selección y traza de riesgo

    Raises:
        ConfigError: Si la familia y los learners no coinciden
        NonFiniteGradientError: Si el gradiente deja de ser finito (con índice de observación)
        DegenerateResponseError: Si la respuesta no tiene varianza
    """
    y, w, offsets = _preparar(data, family, learners, config)
    mstop = tuple(config.mstop)
    booster = Booster(family, y, learners, w, config.nu, offsets, trace_every=config.trace_every)
    booster.advance_to(mstop)
    logger.info('Boosting finalizado', {'familia': family.name, 'mstop': list(mstop),
                                        'riesgo': booster.riesgo()})
    return booster.to_state(mstop)


def predict(fit: FitState, newdata: Optional[ModelData] = None, family: Optional[Family] = None) -> ParamVector:
    """
    Predictores y parámetros para datos nuevos (o de entrenamiento si newdata es None)

    Raises:
        IncompatibleGridError: Si una covariable funcional no está en la grilla de entrenamiento
    """
    family = family or get_family(fit.family)
    N = fit.h.shape[1] if newdata is None else newdata.N
    h = np.repeat(fit.offsets[:, None], N, axis=1).astype(float)
    for q, (bloque, coefs) in enumerate(zip(fit.learners, fit.coefficients)):
        for learner, theta in zip(bloque, coefs):
            if not np.any(theta):
                continue
            design = learner.design if newdata is None else learner.design_for(newdata)
            h[q] += design @ theta
    return family.param_vector(h)


def extract_coefficient_function(fit: FitState, label: str, grid: Optional[Grid] = None,
                                 parameter: Optional[str] = None) -> tuple[np.ndarray, np.ndarray]:
    """
    Curva β̂(s) de un bloque de señal o FPC

    Sin `parameter` se usa el primer parámetro (en el orden de la familia) que
    contiene la etiqueta.

    Raises:
        UnknownLabelError: Si la etiqueta no existe o no es un bloque funcional
    """
    nombres = [parameter] if parameter is not None else list(fit.parameter_names)
    for nombre in nombres:
        q = fit.q_de(nombre)
        for learner, theta in zip(fit.learners[q], fit.coefficients[q]):
            if learner.label == label:
                return learner.coefficient_curve(theta, grid)
    raise UnknownLabelError(f'Bloque desconocido: {label!r}')


def selection_frequencies(fit: FitState, parameter: Optional[str] = None) -> pd.DataFrame:
    """Cantidad y proporción de actualizaciones por base-learner"""
    filas = []
    for q, nombre in enumerate(fit.parameter_names):
        if parameter is not None and nombre != parameter:
            continue
        conteo = np.zeros(len(fit.learners[q]), dtype=int)
        for entrada in fit.selection:
            if entrada.parameter == nombre:
                conteo[entrada.index] += 1
        total = max(int(conteo.sum()), 1)
        for learner, n in zip(fit.learners[q], conteo):
            filas.append({'parameter': nombre, 'label': learner.label, 'updates': int(n), 'share': n / total})
    return pd.DataFrame(filas, columns=['parameter', 'label', 'updates', 'share'])


def selection_table(fit: FitState) -> pd.DataFrame:
    """Registro de selección (iteración, parámetro, bloque, RSS)"""
    return pd.DataFrame([e.model_dump() for e in fit.selection],
                        columns=['iteration', 'parameter', 'index', 'label', 'rss'])


def coefficient_table(fit: FitState) -> pd.DataFrame:
    """
    Todos los θ, offsets, mstop y ν en formato largo (parameter, label, index, value)
    """
    filas = []
    for q, nombre in enumerate(fit.parameter_names):
        filas.append((nombre, 'offset', 0, float(fit.offsets[q])))
        filas.append((nombre, 'mstop', 0, float(fit.mstop[q])))
        filas.append((nombre, 'nu', 0, float(fit.nu[q])))
        for learner, theta in zip(fit.learners[q], fit.coefficients[q]):
            filas.extend((nombre, learner.label, k, float(v)) for k, v in enumerate(theta))
    return pd.DataFrame(filas, columns=['parameter', 'label', 'index', 'value'])


def load_fit(table: pd.DataFrame, family: Family, learners: list[list[BaseLearner]]) -> FitState:
    """
    Reconstruye un FitState desde coefficient_table y los base-learners de entrenamiento

    El registro de selección y la traza de riesgo no se guardan y quedan vacíos.

    Raises:
        UnknownLabelError: Si la tabla nombra un bloque que no está en los learners
        EvaluationError: Si faltan filas de un parámetro
    """
    if len(learners) != family.Q:
        raise ConfigError(f'{family.name} requiere {family.Q} listas de learners')
    offsets, mstop, nu = np.zeros(family.Q), [], []
    coefficients = []
    for q, nombre in enumerate(family.parameter_names):
        propias = table[table['parameter'] == nombre]
        if propias.empty:
            raise EvaluationError(f'La tabla no tiene filas para {nombre}')
        meta = {fila.label: fila.value for fila in propias.itertuples() if fila.label in FILAS_META}
        offsets[q] = meta['offset']
        mstop.append(int(round(meta['mstop'])))
        nu.append(float(meta['nu']))

        etiquetas = {learner.label for learner in learners[q]}
        desconocidas = set(propias['label']) - etiquetas - set(FILAS_META)
        if desconocidas:
            raise UnknownLabelError(f'Bloques desconocidos en {nombre}: {sorted(desconocidas)}')
        coefs = []
        for learner in learners[q]:
            filas = propias[propias['label'] == learner.label].sort_values('index')
            theta = np.zeros(learner.K)
            theta[filas['index'].to_numpy(dtype=int)] = filas['value'].to_numpy(dtype=float)
            coefs.append(theta)
        coefficients.append(coefs)

    N = learners[0][0].design.shape[0]
    h = np.repeat(offsets[:, None], N, axis=1)
    for q in range(family.Q):
        for learner, theta in zip(learners[q], coefficients[q]):
            h[q] += learner.design @ theta
    return FitState(
        family=family.name, parameter_names=family.parameter_names, offsets=offsets,
        coefficients=coefficients, h=h, m=max(mstop, default=0), mstop=mstop, nu=nu,
        selection=[], risk_trace=[], learners=learners,
    )
