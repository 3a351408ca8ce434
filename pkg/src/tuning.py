"""
Parada temprana multidimensional: grilla de mstop, pesos de remuestreo
(CV k-fold y bootstrap por bloques) y riesgo fuera de muestra
"""
import itertools
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Optional, Sequence

import numpy as np
import pandas as pd

from .boosting import Booster, boost_fit, extract_coefficient_function, initialize_offsets
from .config import settings
from .errors import AllFoldsSkippedError, ConfigError
from .families import Family, get_family
from .learners import BaseLearner
from .logging_utils import get_logger
from .models import BoostConfig, FoldWeights, Grid, ModelData, NumericModel, StopGrid

logger = get_logger(__name__, level=settings.log_level, log_file=settings.log_file)


# ============================================================================
# GRILLAS Y PESOS
# ============================================================================

def make_stop_grid(max_per_q: Sequence[int], length_out: int = 10,
                   fixed: Sequence[int] = ()) -> StopGrid:
    """
    Producto cartesiano de valores log-equiespaciados de 1 a max por parámetro

    Args:
        max_per_q: Máximo por parámetro
        length_out: Valores por dimensión antes de deduplicar
        fixed: Índices de parámetros que quedan fijos en su máximo

    Examples:
        >>> make_stop_grid([100], 3).points
        [(1,), (10,), (100,)]
        >>> make_stop_grid([500, 500], 1).points
        [(500, 500)]
    """
    if length_out < 1 or any(int(m) < 1 for m in max_per_q):
        raise ConfigError(f'Grilla inválida: max={list(max_per_q)}, length_out={length_out}')
    ejes = []
    for q, maximo in enumerate(max_per_q):
        if length_out == 1 or q in fixed:
            ejes.append([int(maximo)])
            continue
        valores = np.rint(np.logspace(0.0, np.log10(maximo), length_out)).astype(int)
        ejes.append(sorted(set(int(v) for v in np.clip(valores, 1, maximo))))
    return StopGrid(points=list(itertools.product(*ejes)))


def block_bootstrap_weights(N: int, B: int, L: int, seed: int, overlapping: bool = True) -> FoldWeights:
    """
    Pesos de bootstrap por bloques de largo L

    Cada remuestra concatena ⌈N/L⌉ bloques con inicio uniforme y se trunca a N
    extracciones. Con overlapping=False los bloques son los ⌊N/L⌋ segmentos
    disjuntos de la serie.

    Raises:
        ConfigError: Si L no está en [1, N]
    """
    if not 1 <= L <= N:
        raise ConfigError(f'El largo de bloque debe estar en [1, {N}]: {L}')
    rng = np.random.default_rng(seed)
    n_bloques = -(-N // L)
    if overlapping:
        inicios = rng.integers(0, N - L + 1, size=(B, n_bloques))
    else:
        inicios = L * rng.integers(0, N // L, size=(B, n_bloques))
    extracciones = (inicios[:, :, None] + np.arange(L)).reshape(B, n_bloques * L)[:, :N]
    pesos = np.stack([np.bincount(fila, minlength=N) for fila in extracciones])
    return FoldWeights(weights=pesos, kind='bootstrap')


def cv_fold_weights(N: int, k: int, seed: int) -> FoldWeights:
    """
    Pesos 0/1 de CV k-fold; cada observación queda fuera exactamente una vez

    Raises:
        ConfigError: Si k no está en [2, N]
    """
    if not 2 <= k <= N:
        raise ConfigError(f'folds debe estar en [2, {N}]: {k}')
    rng = np.random.default_rng(seed)
    fold = np.empty(N, dtype=int)
    fold[rng.permutation(N)] = np.arange(N) % k
    pesos = np.stack([(fold != b).astype(np.int64) for b in range(k)])
    return FoldWeights(weights=pesos, kind='cv')


# ============================================================================
# RIESGO FUERA DE MUESTRA
# ============================================================================

class RiskSurface(NumericModel):
    """Riesgo por punto de grilla y remuestra, su media y el mstop elegido"""
    grid: StopGrid
    parameter_names: tuple[str, ...]
    fold_risk: np.ndarray
    mean_risk: np.ndarray
    best: tuple[int, ...]
    skipped: list[int]

    def table(self) -> pd.DataFrame:
        """Columnas mstop_<parámetro>, mean_risk y fold_<b>"""
        tabla = pd.DataFrame(self.grid.points, columns=[f'mstop_{n}' for n in self.parameter_names])
        tabla['mean_risk'] = self.mean_risk
        for b in range(self.fold_risk.shape[1]):
            tabla[f'fold_{b + 1}'] = self.fold_risk[:, b]
        return tabla


def _riesgo_fuera(booster: Booster, fuera: np.ndarray) -> float:
    """Log-verosimilitud negativa media en las observaciones con peso cero"""
    familia = booster.family
    params = familia.param_vector(booster.h[:, fuera])
    return float(-np.mean(familia.loglik_obs(booster.y[fuera], params)))


def path_risks(booster: Booster, points: list[tuple[int, ...]],
               evaluar: Callable[[Booster], float]) -> dict[tuple[int, ...], float]:
    """
    Evalúa `evaluar` en el modelo de cada punto de grilla sobre un único camino

    Los puntos que comparten el conjunto de parámetros activos avanzan juntos
    hasta el próximo umbral; allí el estado se copia por rama. Cada rama es
    idéntica a un ajuste nuevo hasta ese mstop.
    """
    resultados: dict[tuple[int, ...], float] = {}
    pendientes = [(booster, sorted(set(points)))]
    while pendientes:
        actual, puntos = pendientes.pop()
        restantes = []
        for punto in puntos:
            if max(punto) <= actual.m:
                resultados[punto] = evaluar(actual)
            else:
                restantes.append(punto)
        if not restantes:
            continue

        grupos: dict[tuple[bool, ...], list[tuple[int, ...]]] = {}
        for punto in restantes:
            activos = tuple(actual.m + 1 <= m for m in punto)
            grupos.setdefault(activos, []).append(punto)

        ramas = list(grupos.values())
        for i, grupo in enumerate(ramas):
            rama = actual if i == len(ramas) - 1 else actual.copy()
            umbral = min(m for punto in grupo for m in punto if m > rama.m)
            representante = grupo[0]
            while rama.m < umbral:
                rama.sweep(representante)
            pendientes.append((rama, grupo))
    return resultados


def _riesgos_fold(tarea: tuple) -> Optional[np.ndarray]:
    """Riesgo fuera de muestra de una remuestra en todos los puntos (None si se omite)"""
    familia_nombre, y, learners, pesos, nu, puntos = tarea
    fuera = pesos == 0
    if not np.any(fuera):
        return None
    familia = get_family(familia_nombre)
    w = pesos.astype(float)
    booster = Booster(familia, y, learners, w, nu, initialize_offsets(familia, y, w), registrar_riesgo=False)
    riesgos = path_risks(booster, puntos, lambda b: _riesgo_fuera(b, fuera))
    return np.array([riesgos[p] for p in puntos])


def mapear_en_orden(funcion: Callable, tareas: list, jobs: int) -> list:
    """map en orden de tarea, en un pool de procesos si jobs > 1"""
    if jobs <= 1 or len(tareas) <= 1:
        return [funcion(t) for t in tareas]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(funcion, tareas))


def _argmin(points: list[tuple[int, ...]], riesgo: np.ndarray) -> tuple[int, ...]:
    """Menor riesgo; empates por menor total de iteraciones y luego orden lexicográfico"""
    orden = sorted(range(len(points)), key=lambda i: (riesgo[i], sum(points[i]), points[i]))
    return points[orden[0]]


def cv_risk(data: ModelData, family: Family, learners: list[list[BaseLearner]], config: BoostConfig,
            grid: StopGrid, folds: FoldWeights, jobs: Optional[int] = None) -> RiskSurface:
    """
    Riesgo fuera de muestra promedio sobre las remuestras para cada punto de la grilla

    Args:
        data: Datos con respuesta
        family: Familia de la respuesta
        learners: Base-learners por parámetro (λ ya calibrado)
        config: Largos de paso (mstop y pesos se ignoran)
        grid: Candidatos de mstop
        folds: Pesos de entrenamiento por remuestra
        jobs: Procesos en paralelo (por defecto settings.sigboost_jobs)

    Returns:
        RiskSurface: Riesgo por punto y remuestra, media y argmin

    Raises:
        AllFoldsSkippedError: Si ninguna remuestra tiene observaciones fuera de muestra
    """
    if grid.Q != family.Q:
        raise ConfigError(f'La grilla tiene {grid.Q} dimensiones y {family.name} {family.Q} parámetros')
    if folds.weights.shape[1] != data.N:
        raise ConfigError(f'Los pesos tienen {folds.weights.shape[1]} columnas y los datos {data.N} filas')
    jobs = settings.sigboost_jobs if jobs is None else jobs
    puntos = grid.points
    tareas = [(family.name, data.y, learners, folds.weights[b], list(config.nu), puntos)
              for b in range(folds.B)]
    resultados = mapear_en_orden(_riesgos_fold, tareas, jobs)

    riesgo = np.full((len(puntos), folds.B), np.nan)
    omitidos = []
    for b, r in enumerate(resultados):
        if r is None:
            omitidos.append(b)
            logger.warning('Remuestra sin observaciones fuera de muestra, se omite', {'fold': b + 1})
        else:
            riesgo[:, b] = r
    if len(omitidos) == folds.B:
        raise AllFoldsSkippedError('Todas las remuestras quedaron sin observaciones fuera de muestra')

    media = np.nanmean(riesgo, axis=1)
    mejor = _argmin(puntos, media)
    logger.info('Grilla de parada evaluada', {'puntos': len(puntos), 'remuestras': folds.B,
                                              'omitidas': len(omitidos), 'mstop': list(mejor)})
    return RiskSurface(grid=grid, parameter_names=family.parameter_names, fold_risk=riesgo,
                       mean_risk=media, best=mejor, skipped=omitidos)


# ============================================================================
# BANDAS BOOTSTRAP
# ============================================================================

def _curva_remuestra(tarea: tuple) -> np.ndarray:
    familia_nombre, data, learners, config, label, parameter, grid = tarea
    fit = boost_fit(data, get_family(familia_nombre), learners, config)
    return extract_coefficient_function(fit, label, grid, parameter)[1]


def coefficient_bands(data: ModelData, family: Family, learners: list[list[BaseLearner]],
                      config: BoostConfig, label: str, folds: FoldWeights, parameter: Optional[str] = None,
                      grid: Optional[Grid] = None, level: float = 0.95,
                      jobs: Optional[int] = None) -> tuple[np.ndarray, np.ndarray]:
    """
    Bandas puntuales por percentiles de la curva reajustada en cada remuestra

    Returns:
        tuple: (inferior, superior) en los puntos de la curva
    """
    jobs = settings.sigboost_jobs if jobs is None else jobs
    tareas = []
    for b in range(folds.B):
        cfg = BoostConfig(nu=config.nu, mstop=config.mstop, weights=folds.weights[b].astype(float))
        tareas.append((family.name, data, learners, cfg, label, parameter, grid))
    curvas = np.stack(mapear_en_orden(_curva_remuestra, tareas, jobs))
    alfa = (1.0 - level) / 2
    inferior, superior = np.quantile(curvas, [alfa, 1.0 - alfa], axis=0)
    return inferior, superior
