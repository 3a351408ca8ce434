"""
Tests de los generadores de simulación y del diseño rezagado
"""
import numpy as np
import pytest
from scipy import stats

from src.errors import DataError, OverflowSeriesError, UnknownShapeError
from src.fda_basis import equispaced_grid, fpca
from src.models import ArchSpec, FunctionalCovariate, SimScenario
from src.simgen import (
    build_lagged_data, coef_shape, gen_arch_series, gen_functional_covariates, gen_response_normal_ls,
    regime_variances, simulate_arch, simulate_scenario
)


class TestCovariables:
    def test_regimen_exponencial(self):
        zeta = regime_variances('exp', 5)
        assert zeta[0] == pytest.approx(0.405285, abs=1e-6)
        assert np.all(np.diff(zeta) < 0)

    def test_regimenes(self):
        assert regime_variances('const', 3).tolist() == [1.0, 1.0, 1.0]
        assert regime_variances('lin', 5)[-1] == pytest.approx(0.5)
        with pytest.raises(DataError):
            regime_variances('cuadratico', 3)

    def test_centradas_y_estandarizadas(self):
        x, grid = gen_functional_covariates(SimScenario(N=200, R=50, seed=1))
        assert x.shape == (200, 50)
        assert grid.R == 50
        assert np.allclose(x.mean(axis=0), 0.0, atol=1e-12)
        assert x.std(ddof=1) == pytest.approx(1.0)

    def test_reproducible(self):
        escenario = SimScenario(N=50, R=20, seed=7, rand_start=True)
        a, _ = gen_functional_covariates(escenario)
        b, _ = gen_functional_covariates(escenario)
        assert np.array_equal(a, b)

    def test_regimen_concentra_varianza(self):
        participacion = {}
        for regimen in ('const', 'exp'):
            x, grid = gen_functional_covariates(SimScenario(N=500, R=100, variance_regime=regimen, seed=2))
            base = fpca(x, grid, pve=1.0)
            participacion[regimen] = base.eigenvalues[0] / base.eigenvalues.sum()
        assert participacion['exp'] > participacion['const']


class TestFormas:
    def test_coef3_en_los_bordes(self):
        grid = equispaced_grid(101)
        forma = coef_shape('coef3', grid)
        assert forma[0] == pytest.approx(3.0)
        assert forma[-1] == pytest.approx(0.0, abs=1e-12)

    def test_coef1_en_los_bordes(self):
        forma = coef_shape('coef1', equispaced_grid(101))
        assert forma[0] == pytest.approx(2.0)
        assert forma[-1] == pytest.approx(-0.5)

    def test_coef0(self):
        assert np.all(coef_shape('coef0', equispaced_grid(11)) == 0.0)

    def test_desconocida(self):
        with pytest.raises(UnknownShapeError):
            coef_shape('coef9', equispaced_grid(11))


class TestRespuesta:
    def test_formas_nulas_dan_ruido_iid(self):
        x, grid = gen_functional_covariates(SimScenario(N=300, R=30, seed=3))
        covariable = FunctionalCovariate(x=x, grid=grid)
        y, params = gen_response_normal_ls([covariable], {'mu': ['coef0'], 'sigma': ['coef0']},
                                           {'mu': 1.5, 'sigma': np.log(2.0)}, np.random.default_rng(0))
        assert np.allclose(params['mu'], 1.5)
        assert np.allclose(params['sigma'], 2.0)
        assert y.size == 300

    def test_escenario(self):
        sim = simulate_scenario(SimScenario(N=100, R=40, n_test=60, seed=5))
        assert sim.train.N == 100
        assert sim.test.N == 60
        assert set(sim.train.funcionales) == {'x1', 'x2'}
        assert len(sim.truth['mu']) == 2
        assert sim.truth['sigma'][1].size == 40

    def test_media_de_mu_es_intercepto(self):
        sim = simulate_scenario(SimScenario(N=100, R=40, n_test=60, seed=5, intercepts={'mu': 0.7, 'sigma': 0.0}))
        mu = np.concatenate([sim.params_train['mu'], sim.params_test['mu']])
        assert mu.mean() == pytest.approx(0.7, abs=1e-10)

    def test_sin_prueba(self):
        sim = simulate_scenario(SimScenario(N=30, R=20, n_test=0))
        assert sim.test is None
        assert sim.params_test is None

    def test_reproducible(self):
        escenario = SimScenario(N=40, R=20, n_test=10, seed=11)
        assert np.array_equal(simulate_scenario(escenario).train.y, simulate_scenario(escenario).train.y)


class TestArch:
    def test_sin_dinamica_es_iid(self):
        y = gen_arch_series(5000, [0.3], [np.log(4.0)], burn_in=0, seed=1)
        assert y.mean() == pytest.approx(0.3, abs=0.1)
        assert y.std() == pytest.approx(2.0, rel=0.05)

    def test_colas_pesadas(self):
        y = gen_arch_series(10_000, [0.0], [0.0, 0.5], seed=2)
        assert stats.kurtosis(y, fisher=False) > 3.0

    def test_colas_pesadas_en_casi_todas_las_semillas(self):
        pesadas = sum(stats.kurtosis(gen_arch_series(10_000, [0.0], [0.0, 0.5], seed=seed)) > 0.0
                      for seed in range(20))
        assert pesadas >= 19

    def test_largo_y_semilla(self):
        a = gen_arch_series(300, [0.0, 0.1], [0.0, 0.2, 0.1], burn_in=50, seed=3)
        assert a.size == 300
        assert np.array_equal(a, gen_arch_series(300, [0.0, 0.1], [0.0, 0.2, 0.1], burn_in=50, seed=3))

    def test_cuadrados_explosivos(self):
        with pytest.raises(OverflowSeriesError):
            gen_arch_series(1000, [0.0], [0.0, 5.0], seed=4, varianza='cuadrado')

    def test_diez_rezagos(self):
        datos = simulate_arch(ArchSpec(), seed=5)
        assert datos.N == 517
        assert 'y_lag10' in datos.escalares
        assert 'log_y2_lag10' in datos.escalares


class TestDisenoRezagado:
    def test_columnas(self):
        y = np.arange(1.0, 16.0)
        datos = build_lagged_data(y, p_mu=2, p_sigma=3)
        assert datos.N == 12
        assert datos.y[0] == 4.0
        assert datos.escalares['y_lag1'][0] == 3.0
        assert datos.escalares['y_lag2'][0] == 2.0
        assert datos.escalares['log_y2_lag3'][0] == 0.0
        assert datos.escalares['log_y2_lag1'][-1] == pytest.approx(np.log(14.0 ** 2))

    def test_cero_en_rezago(self):
        with pytest.raises(DataError):
            build_lagged_data(np.array([1.0, 0.0, 2.0, 3.0]), p_mu=1, p_sigma=1)

    def test_serie_corta(self):
        with pytest.raises(DataError):
            build_lagged_data(np.ones(3), p_mu=3, p_sigma=1)

    def test_funcionales_recortadas(self):
        grid = equispaced_grid(5)
        x = np.arange(50.0).reshape(10, 5)
        datos = build_lagged_data(np.arange(1.0, 11.0), 2, 2, funcionales={'x': FunctionalCovariate(x=x, grid=grid)})
        assert np.array_equal(datos.funcionales['x'].x, x[2:])
