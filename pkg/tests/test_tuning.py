"""
Tests de la parada temprana: grillas, pesos de remuestreo y riesgo fuera de muestra
"""
import numpy as np
import pytest

from src.boosting import Booster, boost_fit, initialize_offsets
from src.errors import AllFoldsSkippedError, ConfigError
from src.families import NormalLS
from src.learners import build_learners
from src.models import BoostConfig, FoldWeights, SimScenario, StopGrid, TermSpec
from src.simgen import simulate_scenario
from src.tuning import (
    _argmin, _riesgo_fuera, block_bootstrap_weights, coefficient_bands, cv_fold_weights, cv_risk,
    make_stop_grid, path_risks
)


@pytest.fixture(scope='module')
def problema():
    sim = simulate_scenario(SimScenario(N=80, R=30, n_test=0, seed=9))
    formula = {q: [TermSpec(tipo='intercept'), TermSpec(tipo='signal', var='x1', K=8),
                   TermSpec(tipo='signal', var='x2', K=8)] for q in ('mu', 'sigma')}
    familia = NormalLS()
    learners = build_learners(formula, sim.train, familia.parameter_names)
    return sim.train, familia, learners


class TestGrillaDeParada:
    def test_log_equiespaciada(self):
        assert make_stop_grid([100], 3).points == [(1,), (10,), (100,)]

    def test_un_punto(self):
        assert make_stop_grid([500, 500], 1).points == [(500, 500)]

    def test_producto_cartesiano(self):
        grilla = make_stop_grid([100, 10], 3)
        assert len(grilla.points) == 9
        assert grilla.maximos == (100, 10)

    def test_deduplica(self):
        grilla = make_stop_grid([3], 10)
        assert grilla.points == [(1,), (2,), (3,)]

    def test_fijo(self):
        grilla = make_stop_grid([100, 50], 3, fixed=[1])
        assert {p[1] for p in grilla.points} == {50}

    def test_maximo_invalido(self):
        with pytest.raises(ConfigError):
            make_stop_grid([0, 10], 3)


class TestPesos:
    def test_cv_cada_observacion_fuera_una_vez(self):
        folds = cv_fold_weights(23, 5, seed=1)
        assert folds.B == 5
        assert np.all((folds.weights == 0).sum(axis=0) == 1)
        assert set(np.unique(folds.weights)) == {0, 1}

    def test_cv_balanceado(self):
        fuera = (cv_fold_weights(23, 5, seed=1).weights == 0).sum(axis=1)
        assert fuera.max() - fuera.min() <= 1

    def test_cv_reproducible(self):
        assert np.array_equal(cv_fold_weights(30, 4, 7).weights, cv_fold_weights(30, 4, 7).weights)

    def test_cv_k_invalido(self):
        with pytest.raises(ConfigError):
            cv_fold_weights(10, 1, seed=0)

    def test_bootstrap_suma_n(self):
        folds = block_bootstrap_weights(103, 6, 10, seed=2)
        assert folds.weights.shape == (6, 103)
        assert np.all(folds.weights.sum(axis=1) == 103)

    def test_bootstrap_bloques_contiguos(self):
        folds = block_bootstrap_weights(50, 1, 50, seed=3)
        assert np.all(folds.weights == 1)

    def test_bootstrap_disjuntos(self):
        folds = block_bootstrap_weights(40, 20, 10, seed=4, overlapping=False)
        pesos = folds.weights.reshape(20, 4, 10)
        # cada segmento se toma completo o no se toma
        assert np.all(pesos == pesos[:, :, :1])

    def test_bootstrap_iid_pesos_medios(self):
        folds = block_bootstrap_weights(10, 1000, 1, seed=6)
        assert np.all(np.abs(folds.weights.mean(axis=0) - 1.0) < 0.1)

    def test_bootstrap_largo_invalido(self):
        with pytest.raises(ConfigError):
            block_bootstrap_weights(10, 5, 11, seed=0)

    def test_bootstrap_reproducible(self):
        a = block_bootstrap_weights(60, 3, 7, seed=5).weights
        assert np.array_equal(a, block_bootstrap_weights(60, 3, 7, seed=5).weights)


class TestCamino:
    def test_equivale_a_ajustes_nuevos(self, problema):
        data, familia, learners = problema
        w = cv_fold_weights(data.N, 4, seed=0).weights[0].astype(float)
        fuera = w == 0
        puntos = [(1, 1), (5, 2), (5, 20), (12, 3), (20, 20), (30, 1)]
        booster = Booster(familia, data.y, learners, w, [0.1, 0.01], initialize_offsets(familia, data.y, w),
                          registrar_riesgo=False)
        riesgos = path_risks(booster, puntos, lambda b: _riesgo_fuera(b, fuera))
        for punto in puntos:
            fit = boost_fit(data, familia, learners, BoostConfig(nu=[0.1, 0.01], mstop=list(punto), weights=w))
            params = familia.param_vector(fit.h[:, fuera])
            esperado = -np.mean(familia.loglik_obs(data.y[fuera], params))
            assert riesgos[punto] == pytest.approx(esperado, abs=1e-10)

    def test_argmin_desempata(self):
        puntos = [(10, 1), (1, 10), (2, 2), (5, 5)]
        riesgo = np.array([1.0, 1.0, 1.0, 2.0])
        assert _argmin(puntos, riesgo) == (2, 2)
        assert _argmin([(3, 1), (1, 3)], np.array([0.5, 0.5])) == (1, 3)


class TestRiesgoCv:
    def test_superficie(self, problema):
        data, familia, learners = problema
        grilla = make_stop_grid([40, 40], 3)
        superficie = cv_risk(data, familia, learners, BoostConfig(nu=[0.1, 0.01], mstop=[1, 1]),
                             grilla, cv_fold_weights(data.N, 3, seed=1), jobs=1)
        assert superficie.fold_risk.shape == (len(grilla.points), 3)
        assert superficie.best in grilla.points
        assert superficie.mean_risk[grilla.points.index(superficie.best)] == pytest.approx(superficie.mean_risk.min())
        tabla = superficie.table()
        assert list(tabla.columns) == ['mstop_mu', 'mstop_sigma', 'mean_risk', 'fold_1', 'fold_2', 'fold_3']

    def test_un_punto(self, problema):
        data, familia, learners = problema
        grilla = make_stop_grid([15, 15], 1)
        superficie = cv_risk(data, familia, learners, BoostConfig(nu=[0.1, 0.01], mstop=[1, 1]),
                             grilla, cv_fold_weights(data.N, 3, seed=1), jobs=1)
        assert superficie.best == (15, 15)

    def test_remuestra_sin_fuera_se_omite(self, problema):
        data, familia, learners = problema
        pesos = cv_fold_weights(data.N, 3, seed=1).weights
        pesos = np.vstack([pesos, np.ones(data.N, dtype=int)])
        superficie = cv_risk(data, familia, learners, BoostConfig(nu=[0.1, 0.01], mstop=[1, 1]),
                             make_stop_grid([10, 10], 2), FoldWeights(weights=pesos, kind='cv'), jobs=1)
        assert superficie.skipped == [3]
        assert np.all(np.isnan(superficie.fold_risk[:, 3]))
        assert np.all(np.isfinite(superficie.mean_risk))

    def test_todas_omitidas(self, problema):
        data, familia, learners = problema
        pesos = FoldWeights(weights=np.ones((2, data.N), dtype=int), kind='bootstrap')
        with pytest.raises(AllFoldsSkippedError):
            cv_risk(data, familia, learners, BoostConfig(nu=[0.1, 0.01], mstop=[1, 1]),
                    make_stop_grid([10, 10], 2), pesos, jobs=1)

    def test_dimension_de_grilla(self, problema):
        data, familia, learners = problema
        with pytest.raises(ConfigError):
            cv_risk(data, familia, learners, BoostConfig(nu=[0.1, 0.01], mstop=[1, 1]),
                    StopGrid(points=[(5,)]), cv_fold_weights(data.N, 3, seed=1), jobs=1)

    def test_paralelo_igual_a_secuencial(self, problema):
        data, familia, learners = problema
        grilla = make_stop_grid([20, 20], 2)
        folds = cv_fold_weights(data.N, 3, seed=2)
        config = BoostConfig(nu=[0.1, 0.01], mstop=[1, 1])
        a = cv_risk(data, familia, learners, config, grilla, folds, jobs=1)
        b = cv_risk(data, familia, learners, config, grilla, folds, jobs=2)
        assert np.allclose(a.fold_risk, b.fold_risk, rtol=0.0, atol=1e-12)


class TestBandas:
    def test_bandas_ordenadas(self, problema):
        data, familia, learners = problema
        folds = block_bootstrap_weights(data.N, 8, 10, seed=3)
        inferior, superior = coefficient_bands(data, familia, learners, BoostConfig(nu=[0.1, 0.01], mstop=[30, 10]),
                                               'signal(x1,pspline)', folds, parameter='mu', jobs=1)
        assert inferior.shape == (30,)
        assert np.all(inferior <= superior)


@pytest.mark.slow
class TestRuidoPuro:
    def test_mstop_chico_sin_efecto(self):
        grilla = make_stop_grid([500, 500], 5)
        elegidos = []
        for seed in range(20):
            escenario = SimScenario(N=100, R=30, n_test=0, seed=seed,
                                    coef_shapes={'mu': ['coef0'], 'sigma': ['coef0']})
            datos = simulate_scenario(escenario).train
            formula = {q: [TermSpec(tipo='intercept'), TermSpec(tipo='signal', var='x1', K=8)]
                       for q in ('mu', 'sigma')}
            familia = NormalLS()
            learners = build_learners(formula, datos, familia.parameter_names)
            superficie = cv_risk(datos, familia, learners, BoostConfig(nu=[0.1, 0.1], mstop=[1, 1]),
                                 grilla, cv_fold_weights(datos.N, 5, seed=seed), jobs=1)
            elegidos.append(superficie.best)
        medianas = np.median(np.array(elegidos), axis=0)
        assert np.all(medianas <= 0.1 * 500)
