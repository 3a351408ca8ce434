"""
Estudio de simulación: réplicas con mstop elegido por CV y resúmenes por escenario
"""
from typing import Optional

import pandas as pd
from pydantic import BaseModel

from .boosting import boost_fit, extract_coefficient_function, predict, selection_frequencies
from .config import settings
from .diagnostics import coef_mse, likelihood_quotient
from .families import NormalLS
from .learners import build_learners
from .logging_utils import get_logger
from .models import BoostConfig, SimScenario, StudySpec, TermSpec
from .simgen import simulate_scenario
from .tuning import cv_fold_weights, cv_risk, make_stop_grid, mapear_en_orden

logger = get_logger(__name__, level=settings.log_level, log_file=settings.log_file)


class ReplicationResult(BaseModel):
    scenario: str
    seed: int
    mstop_mu: int
    mstop_sigma: int
    mse_alpha1: float
    mse_beta1: float
    likelihood_quotient: float
    functional_share_mu: float


def signal_formula(n_covariates: int, K: int = 20, df: float = 2.0) -> dict[str, list[TermSpec]]:
    """Intercepto más un término de señal P-spline por covariable, para μ y σ"""
    terminos = [TermSpec(tipo='intercept')]
    terminos += [TermSpec(tipo='signal', var=f'x{j + 1}', K=K, df=df) for j in range(n_covariates)]
    return {'mu': terminos, 'sigma': list(terminos)}


def run_replication(scenario: SimScenario, seed: int, study: Optional[StudySpec] = None,
                    name: str = '') -> ReplicationResult:
    """
    Simula, elige mstop por CV en la grilla reducida, reajusta y evalúa

    Métricas: MSE integrado de α̂_1 y β̂_1, cociente de verosimilitudes en el
    conjunto de prueba y proporción de actualizaciones de μ en bloques funcionales.
    """
    study = study or StudySpec()
    escenario = scenario.model_copy(update={'seed': seed})
    sim = simulate_scenario(escenario)
    familia = NormalLS()
    formula = signal_formula(escenario.n_covariates, study.K, study.df)
    learners = build_learners(formula, sim.train, familia.parameter_names)
    config = BoostConfig(nu=list(familia.default_nu), mstop=[study.max, study.max])

    superficie = cv_risk(sim.train, familia, learners, config,
                         make_stop_grid([study.max, study.max], study.length_out),
                         cv_fold_weights(sim.train.N, study.folds, seed), jobs=1)
    fit = boost_fit(sim.train, familia, learners,
                    BoostConfig(nu=config.nu, mstop=list(superficie.best)))

    etiqueta = 'signal(x1,pspline)'
    _, alfa1 = extract_coefficient_function(fit, etiqueta, parameter='mu')
    _, beta1 = extract_coefficient_function(fit, etiqueta, parameter='sigma')
    cociente = float('nan')
    if sim.test is not None:
        cociente = likelihood_quotient(familia, sim.test.y, predict(fit, sim.test, familia), sim.params_test)

    frecuencias = selection_frequencies(fit, 'mu')
    funcionales = frecuencias[frecuencias['label'].str.startswith('signal')]['updates'].sum()
    total = max(int(frecuencias['updates'].sum()), 1)

    return ReplicationResult(
        scenario=name, seed=seed, mstop_mu=superficie.best[0], mstop_sigma=superficie.best[1],
        mse_alpha1=coef_mse(alfa1, sim.truth['mu'][0], sim.grid),
        mse_beta1=coef_mse(beta1, sim.truth['sigma'][0], sim.grid),
        likelihood_quotient=cociente, functional_share_mu=float(funcionales / total),
    )


def _replica(tarea: tuple) -> dict:
    nombre, escenario, semilla, study = tarea
    return run_replication(escenario, semilla, study, nombre).model_dump()


def run_study(study: StudySpec, seed: int = 0, jobs: Optional[int] = None) -> tuple[pd.DataFrame, pd.DataFrame]:
    """
    Todas las réplicas de todos los escenarios y sus medianas por escenario

    La réplica r usa la semilla seed + r en cada escenario.

    Returns:
        tuple: (tabla de réplicas, medianas por escenario)
    """
    jobs = settings.sigboost_jobs if jobs is None else jobs
    tareas = [(nombre, escenario, seed + r, study)
              for nombre, escenario in study.escenarios.items() for r in range(study.replicas)]
    logger.info('Estudio de simulación', {'escenarios': len(study.escenarios), 'replicas': study.replicas})
    replicas = pd.DataFrame(mapear_en_orden(_replica, tareas, jobs))
    medianas = replicas.drop(columns=['seed']).groupby('scenario', sort=False).median().reset_index()
    return replicas, medianas
