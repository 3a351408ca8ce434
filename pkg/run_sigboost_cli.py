"""
CLI de SigBoost LSS: ajuste, tuning, simulación, diagnósticos, oráculo y estudio.
Cada corrida escribe sus archivos y manifest.json en el directorio de salida e
imprime una línea JSON con el resultado.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import pandas as pd
from pydantic import ValidationError

from src.boosting import (
    boost_fit, coefficient_table, initialize_offsets, predict, selection_table
)
from src.config import cargar_model_spec, settings
from src.diagnostics import (
    acf, deviance_per_observation, global_deviance, one_step_ahead, pit_values, qq_data,
    quantile_residuals, summarize_residuals, train_test_split_series
)
from src.errors import ConfigError, SigBoostError
from src.families import get_family
from src.io_utils import (
    load_model_data, nombre_archivo, write_coefficient_curve, write_csv, write_functional_csv, write_manifest
)
from src.learners import build_learners
from src.logging_utils import get_logger
from src.models import BoostConfig, FunctionalCovariate, ModelData, ModelSpec
from src.oracle import oracle_from_learners, oracle_table
from src.simgen import simulate_arch, simulate_scenario
from src.simstudy import run_study
from src.tuning import block_bootstrap_weights, coefficient_bands, cv_fold_weights, cv_risk, make_stop_grid

logger = get_logger('sigboost.cli', level=settings.log_level, log_file=settings.log_file)


def _emit_result(payload: dict, result_path: Path | None) -> None:
    output = json.dumps(payload, ensure_ascii=True)
    if result_path:
        try:
            result_path.write_text(output + "\n", encoding="utf-8")
        except OSError:
            pass
    sys.stdout.write(output)
    sys.stdout.write("\n")


# ============================================================================
# PREPARACIÓN
# ============================================================================

class Contexto:
    """Configuración, datos y base-learners de una corrida"""

    def __init__(self, spec: ModelSpec, config_path: Path):
        if spec.datos is None:
            raise ConfigError('La sección datos es obligatoria para este subcomando')
        self.spec = spec
        self.familia = get_family(spec.familia)
        datos = load_model_data(spec.datos, config_path.parent)
        self.prueba: Optional[ModelData] = None
        if spec.datos.fraccion_entrenamiento is not None:
            datos, self.prueba = train_test_split_series(datos, spec.datos.fraccion_entrenamiento)
        self.datos = datos
        self.nu = spec.boosting.nu or list(self.familia.default_nu)
        self.learners = build_learners(spec.formula, datos, self.familia.parameter_names)

    def config(self, mstop: list[int]) -> BoostConfig:
        return BoostConfig(nu=self.nu, mstop=mstop, trace_every=self.spec.boosting.trace_every)

    def ajustar(self, mstop: list[int]):
        return boost_fit(self.datos, self.familia, self.learners, self.config(mstop))


def _escribir_ajuste(ctx: Contexto, fit, out_dir: Path) -> list[Path]:
    """Coeficientes, registro de selección, traza de riesgo y curvas de los bloques funcionales"""
    archivos = [
        write_csv(coefficient_table(fit), out_dir / 'coeficientes.csv'),
        write_csv(selection_table(fit), out_dir / 'seleccion.csv'),
        write_csv(pd.DataFrame({'iteration': np.arange(1, len(fit.risk_trace) + 1), 'risk': fit.risk_trace}),
                  out_dir / 'riesgo.csv'),
    ]
    tuning = ctx.spec.tuning
    pesos = None
    if tuning is not None and tuning.bandas > 0:
        pesos = block_bootstrap_weights(ctx.datos.N, tuning.bandas, tuning.L, ctx.spec.semilla, tuning.solapado)
    for q, nombre in enumerate(fit.parameter_names):
        for learner, theta in zip(fit.learners[q], fit.coefficients[q]):
            if not learner.es_funcional:
                continue
            s, valor = learner.coefficient_curve(theta)
            inferior = superior = None
            if pesos is not None:
                inferior, superior = coefficient_bands(ctx.datos, ctx.familia, ctx.learners,
                                                       ctx.config(fit.mstop), learner.label, pesos, nombre)
            ruta = out_dir / f'curva_{nombre}_{nombre_archivo(learner.label)}.csv'
            archivos.append(write_coefficient_curve(ruta, s, valor, inferior, superior))
    return archivos


# ============================================================================
# SUBCOMANDOS
# ============================================================================

def cmd_fit(spec: ModelSpec, config_path: Path, out_dir: Path, args) -> tuple[dict, list[Path]]:
    ctx = Contexto(spec, config_path)
    fit = ctx.ajustar(spec.boosting.mstop)
    archivos = _escribir_ajuste(ctx, fit, out_dir)
    payload = {'mstop': fit.mstop, 'riesgo': fit.risk_trace[-1] if fit.risk_trace else None}
    if ctx.prueba is not None:
        params = predict(fit, ctx.prueba, ctx.familia)
        payload['gd_prueba_por_obs'] = deviance_per_observation(ctx.familia, ctx.prueba.y, params)
    return payload, archivos


def cmd_cv(spec: ModelSpec, config_path: Path, out_dir: Path, args) -> tuple[dict, list[Path]]:
    if spec.tuning is None:
        raise ConfigError('El subcomando cv requiere la sección tuning')
    ctx = Contexto(spec, config_path)
    tuning = spec.tuning
    fijos = [ctx.familia.parameter_names.index(n) for n in tuning.fijos]
    grilla = make_stop_grid(tuning.max, tuning.length_out, fijos)
    if tuning.metodo == 'cv':
        pesos = cv_fold_weights(ctx.datos.N, tuning.folds, spec.semilla)
    else:
        pesos = block_bootstrap_weights(ctx.datos.N, tuning.B, tuning.L, spec.semilla, tuning.solapado)

    superficie = cv_risk(ctx.datos, ctx.familia, ctx.learners, ctx.config(list(tuning.max)), grilla, pesos,
                         jobs=args.jobs)
    fit = ctx.ajustar(list(superficie.best))
    archivos = [write_csv(superficie.table(), out_dir / 'superficie_riesgo.csv')]
    archivos += _escribir_ajuste(ctx, fit, out_dir)
    payload = {'mstop': list(superficie.best), 'riesgo_cv': float(np.min(superficie.mean_risk)),
               'remuestras_omitidas': superficie.skipped}
    return payload, archivos


def cmd_simulate(spec: ModelSpec, config_path: Path, out_dir: Path, args) -> tuple[dict, list[Path]]:
    simulacion = spec.simulacion
    if simulacion is None:
        raise ConfigError('El subcomando simulate requiere la sección simulacion')

    if simulacion.arch is not None:
        datos = simulate_arch(simulacion.arch, spec.semilla)
        tabla = pd.DataFrame({'y': datos.y, **datos.escalares})
        return {'N': datos.N}, [write_csv(tabla, out_dir / 'serie.csv')]

    escenario = simulacion.escenario.model_copy(update={'seed': spec.semilla})
    sim = simulate_scenario(escenario)
    archivos = []
    conjuntos = [('', sim.train, sim.params_train)]
    if sim.test is not None:
        conjuntos.append(('prueba_', sim.test, sim.params_test))
    for prefijo, datos, params in conjuntos:
        archivos.append(write_csv(pd.DataFrame({'y': datos.y}), out_dir / f'{prefijo}respuesta.csv'))
        archivos.append(write_csv(pd.DataFrame({'mu': params['mu'], 'sigma': params['sigma']}),
                                  out_dir / f'{prefijo}parametros_verdaderos.csv'))
        for nombre, funcional in datos.funcionales.items():
            archivos.append(write_functional_csv(out_dir / f'{prefijo}{nombre}.csv', funcional.x, funcional.grid))

    curvas = {'s': sim.grid.points}
    for parametro, formas in sim.truth.items():
        for j, curva in enumerate(formas):
            curvas[f'{parametro}_x{j + 1}'] = curva
    archivos.append(write_csv(pd.DataFrame(curvas), out_dir / 'coeficientes_verdaderos.csv'))
    return {'N': sim.train.N, 'N_prueba': 0 if sim.test is None else sim.test.N}, archivos


def cmd_diagnose(spec: ModelSpec, config_path: Path, out_dir: Path, args) -> tuple[dict, list[Path]]:
    ctx = Contexto(spec, config_path)
    fit = ctx.ajustar(spec.boosting.mstop)
    params = predict(fit, None, ctx.familia)
    y = ctx.datos.y
    residuos = quantile_residuals(ctx.familia, y, params)
    max_lag = min(args.max_lag, len(residuos) - 1)
    autocorr, banda = acf(residuos, max_lag)
    autocorr2, _ = acf(residuos ** 2, max_lag)

    archivos = [
        write_csv(pd.DataFrame({'y': y, 'residual': residuos, 'pit': pit_values(ctx.familia, y, params)}),
                  out_dir / 'residuos.csv'),
        write_csv(qq_data(residuos), out_dir / 'qq.csv'),
        write_csv(pd.DataFrame({'lag': np.arange(1, max_lag + 1), 'acf': autocorr, 'acf_cuadrados': autocorr2,
                                'band': banda}), out_dir / 'acf.csv'),
    ]
    payload = {'gd': global_deviance(ctx.familia, y, params),
               'gd_por_obs': deviance_per_observation(ctx.familia, y, params),
               'residuos': summarize_residuals(residuos)}

    if ctx.prueba is not None:
        params_prueba = predict(fit, ctx.prueba, ctx.familia)
        payload['gd_prueba_por_obs'] = deviance_per_observation(ctx.familia, ctx.prueba.y, params_prueba)

    if args.rolling > 0:
        completos = ctx.datos if ctx.prueba is None else _concatenar(ctx.datos, ctx.prueba)

        def ajustar(datos: ModelData) -> Callable[[ModelData], object]:
            learners = build_learners(spec.formula, datos, ctx.familia.parameter_names)
            ajuste = boost_fit(datos, ctx.familia, learners, ctx.config(spec.boosting.mstop))
            return lambda nuevos: predict(ajuste, nuevos, ctx.familia)

        params_rod, gd_rod = one_step_ahead(completos, args.rolling, ajustar, ctx.familia)
        tabla = pd.DataFrame({n: params_rod.vartheta[q] for q, n in enumerate(params_rod.names)})
        archivos.append(write_csv(tabla, out_dir / 'un_paso.csv'))
        payload['gd_un_paso_por_obs'] = gd_rod
    return payload, archivos


def _concatenar(a: ModelData, b: ModelData) -> ModelData:
    return ModelData(
        y=np.concatenate([a.y, b.y]),
        escalares={k: np.concatenate([a.escalares[k], b.escalares[k]]) for k in a.escalares},
        funcionales={k: FunctionalCovariate(x=np.vstack([f.x, b.funcionales[k].x]), grid=f.grid)
                     for k, f in a.funcionales.items()},
    )


def cmd_oracle(spec: ModelSpec, config_path: Path, out_dir: Path, args) -> tuple[dict, list[Path]]:
    ctx = Contexto(spec, config_path)
    if ctx.familia.name != 'normal-ls':
        raise ConfigError('El oráculo solo está disponible para la familia normal-ls')
    offsets = tuple(float(o) for o in initialize_offsets(ctx.familia, ctx.datos.y))
    resultado = oracle_from_learners(ctx.learners, ctx.datos.y, offsets)
    archivos = [write_csv(oracle_table(resultado, ctx.learners, offsets), out_dir / 'coeficientes_oraculo.csv')]
    payload = {'convergio': resultado.converged, 'ciclos': resultado.iterations,
               'norma_score': resultado.score_norm, 'lp': resultado.penalized_loglik}
    return payload, archivos


def cmd_study(spec: ModelSpec, config_path: Path, out_dir: Path, args) -> tuple[dict, list[Path]]:
    if spec.simulacion is None or spec.simulacion.estudio is None:
        raise ConfigError('El subcomando study requiere simulacion.estudio')
    replicas, medianas = run_study(spec.simulacion.estudio, spec.semilla, jobs=args.jobs)
    archivos = [write_csv(replicas, out_dir / 'replicas.csv'), write_csv(medianas, out_dir / 'medianas.csv')]
    return {'medianas': medianas.to_dict(orient='records')}, archivos


SUBCOMANDOS: dict[str, Callable] = {
    'fit': cmd_fit,
    'cv': cmd_cv,
    'simulate': cmd_simulate,
    'diagnose': cmd_diagnose,
    'oracle': cmd_oracle,
    'study': cmd_study,
}


def main(argv: Optional[list[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = argparse.ArgumentParser(description="Boosting de GAMLSS con covariables funcionales.")
    parser.add_argument("subcommand", choices=sorted(SUBCOMANDOS), help="Operación a ejecutar.")
    parser.add_argument("--config", required=True, help="Archivo YAML del modelo.")
    parser.add_argument("--out", default=settings.sigboost_output_dir, help="Directorio de salida.")
    parser.add_argument("--jobs", type=int, default=settings.sigboost_jobs, help="Procesos para cv/study.")
    parser.add_argument("--max-lag", type=int, default=20, help="Rezagos de la ACF en diagnose.")
    parser.add_argument("--rolling", type=int, default=0, help="Observaciones de predicción a un paso.")
    parser.add_argument("--result", help="Ruta para escribir el JSON del resultado.")
    args = parser.parse_args(argv)

    config_path = Path(args.config)
    out_dir = Path(args.out)
    result_path = Path(args.result) if args.result else None

    logger.info('Inicio de subcomando', {'subcomando': args.subcommand, 'config': str(config_path)})
    try:
        spec = cargar_model_spec(config_path, requiere_formula=args.subcommand not in ('simulate', 'study'))
        payload, archivos = SUBCOMANDOS[args.subcommand](spec, config_path, out_dir, args)
        archivos.append(write_manifest(out_dir, ['run_sigboost_cli.py', *argv], config_path, spec.semilla,
                                       archivos))
    except SigBoostError as e:
        _emit_result({
            "success": False,
            "error": f"{type(e).__name__}: {e}",
            "codigo": e.codigo_salida,
        }, result_path)
        return e.codigo_salida
    except ValidationError as e:
        _emit_result({
            "success": False,
            "error": f"ConfigError: {e.errors()[0]['msg']}",
            "codigo": 1,
        }, result_path)
        return 1

    logger.info('Fin de subcomando', {'subcomando': args.subcommand, 'archivos': len(archivos)})
    _emit_result({
        "success": True,
        "subcommand": args.subcommand,
        "files": sorted(p.name for p in archivos),
        **payload,
    }, result_path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
