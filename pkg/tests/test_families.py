"""
Tests de familias: log-verosimilitud, gradientes, CDF y offsets
"""
import numpy as np
import pytest
from scipy import stats

from src.errors import EvaluationError, UnknownFamilyError
from src.families import (
    NormalLS, StudentTLS, cdf, get_family, loglik, negative_gradient, variance_coefficients
)


@pytest.fixture
def datos_normal():
    rng = np.random.default_rng(11)
    y = rng.normal(size=100)
    h = np.vstack([rng.normal(size=100), rng.normal(scale=0.3, size=100)])
    return y, h


@pytest.fixture
def datos_t():
    rng = np.random.default_rng(12)
    y = rng.standard_t(4, size=100)
    h = np.vstack([rng.normal(size=100), rng.normal(scale=0.3, size=100), np.log(rng.uniform(2, 20, 100))])
    return y, h


def _gradiente_numerico(familia, y, h, q, eps=1e-6):
    arriba, abajo = h.copy(), h.copy()
    arriba[q] += eps
    abajo[q] -= eps
    return (familia.loglik_obs(y, familia.param_vector(arriba))
            - familia.loglik_obs(y, familia.param_vector(abajo))) / (2 * eps)


class TestRegistro:
    def test_nombres(self):
        assert get_family('normal-ls').parameter_names == ('mu', 'sigma')
        assert get_family('t-ls').parameter_names == ('mu', 'sigma', 'df')

    def test_desconocida(self):
        with pytest.raises(UnknownFamilyError):
            get_family('gamma')

    def test_nu_por_defecto(self):
        assert NormalLS().default_nu == (0.1, 0.01)
        assert StudentTLS().default_nu == (0.1, 0.01, 0.1)


class TestNormal:
    def test_loglik_contra_scipy(self, datos_normal):
        y, h = datos_normal
        familia = NormalLS()
        params = familia.param_vector(h)
        esperado = stats.norm.logpdf(y, loc=h[0], scale=np.exp(h[1])).sum()
        assert loglik(familia, y, params) == pytest.approx(esperado, rel=1e-12)

    def test_loglik_ponderada(self, datos_normal):
        y, h = datos_normal
        familia = NormalLS()
        params = familia.param_vector(h)
        w = np.zeros(100)
        w[:5] = 2.0
        assert loglik(familia, y, params, w) == pytest.approx(2 * familia.loglik_obs(y, params)[:5].sum())

    @pytest.mark.parametrize('q', [0, 1])
    def test_gradiente_diferencias_finitas(self, datos_normal, q):
        y, h = datos_normal
        familia = NormalLS()
        analitico = negative_gradient(familia, y, familia.param_vector(h), q)
        assert np.allclose(analitico, _gradiente_numerico(familia, y, h, q), rtol=1e-6, atol=1e-8)

    def test_cdf_contra_scipy(self, datos_normal):
        y, h = datos_normal
        familia = NormalLS()
        esperado = stats.norm.cdf(y, loc=h[0], scale=np.exp(h[1]))
        assert np.allclose(cdf(familia, y, familia.param_vector(h)), esperado, atol=1e-14)

    def test_offsets(self):
        y = np.array([1.0, 2.0, 3.0, 6.0])
        offsets = NormalLS().initial_offsets(y, np.ones(4))
        assert offsets[0] == pytest.approx(3.0)
        assert offsets[1] == pytest.approx(np.log(np.sqrt(3.5)))

    def test_sigma_negativo(self, datos_normal):
        y, h = datos_normal
        familia = NormalLS()
        params = familia.param_vector(h)
        params.vartheta[1, 0] = -1.0
        with pytest.raises(EvaluationError):
            familia.loglik_obs(y, params)

    def test_parametro_invalido(self, datos_normal):
        y, h = datos_normal
        familia = NormalLS()
        with pytest.raises(EvaluationError):
            negative_gradient(familia, y, familia.param_vector(h), 2)


class TestStudentT:
    def test_loglik_contra_scipy(self, datos_t):
        y, h = datos_t
        familia = StudentTLS()
        params = familia.param_vector(h)
        esperado = stats.t.logpdf(y, df=np.exp(h[2]), loc=h[0], scale=np.exp(h[1])).sum()
        assert loglik(familia, y, params) == pytest.approx(esperado, rel=1e-10)

    @pytest.mark.parametrize('q', [0, 1, 2])
    def test_gradiente_diferencias_finitas(self, datos_t, q):
        y, h = datos_t
        familia = StudentTLS()
        analitico = negative_gradient(familia, y, familia.param_vector(h), q)
        assert np.allclose(analitico, _gradiente_numerico(familia, y, h, q), rtol=1e-6, atol=1e-8)

    def test_cdf_contra_scipy(self, datos_t):
        y, h = datos_t
        familia = StudentTLS()
        esperado = stats.t.cdf(y, df=np.exp(h[2]), loc=h[0], scale=np.exp(h[1]))
        assert np.allclose(cdf(familia, y, familia.param_vector(h)), esperado, atol=1e-12)

    def test_offsets_df_inicial(self):
        offsets = StudentTLS().initial_offsets(np.array([0.0, 1.0, 2.0]), np.ones(3))
        assert offsets[2] == pytest.approx(np.log(10.0))

    def test_converge_a_normal(self):
        y = np.linspace(-3, 3, 7)
        h = np.zeros((3, 7))
        h[2] = np.log(1e8)
        t = StudentTLS().loglik_obs(y, StudentTLS().param_vector(h))
        n = NormalLS().loglik_obs(y, NormalLS().param_vector(h[:2]))
        assert np.allclose(t, n, atol=1e-5)


class TestParametros:
    def test_piso_sigma(self):
        familia = NormalLS()
        params = familia.param_vector(np.array([[0.0, 0.0], [0.0, -1000.0]]))
        assert params.floor_count == 1
        assert params['sigma'][1] > 0

    def test_predictores_incorrectos(self):
        with pytest.raises(EvaluationError):
            NormalLS().param_vector(np.zeros((3, 4)))

    def test_coeficientes_de_varianza(self):
        assert variance_coefficients(np.array([0.5, -1.0])).tolist() == [1.0, -2.0]
