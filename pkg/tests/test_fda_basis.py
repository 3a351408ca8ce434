"""
Tests de grillas, B-splines, penalizaciones, diseños de señal y FPCA
"""
import numpy as np
import pytest

from src.errors import ConfigError, DimensionError, IncompatibleGridError, InvalidGridError, ZeroBasisError
from src.fda_basis import (
    bspline_basis, bspline_design, center_covariate, difference_penalty, equispaced_grid, fpc_penalty,
    fpc_scores, fpca, kronecker_sum_penalty, make_grid, make_spline_basis, row_tensor, signal_design
)


@pytest.fixture
def curvas():
    """Curvas de dos componentes (seno y coseno) con amplitudes aleatorias"""
    grid = equispaced_grid(51)
    rng = np.random.default_rng(3)
    a = rng.normal(0.0, 2.0, 40)
    b = rng.normal(0.0, 0.5, 40)
    s = grid.points
    x = 1.0 + a[:, None] * np.sin(2 * np.pi * s) + b[:, None] * np.cos(2 * np.pi * s)
    return x, grid


class TestGrilla:
    def test_pesos_trapezoidales(self):
        grid = make_grid([0.0, 0.5, 1.0])
        assert grid.weights.tolist() == [0.25, 0.5, 0.25]

    def test_pesos_no_equiespaciados(self):
        grid = make_grid([0.0, 0.1, 0.4, 1.0])
        assert grid.weights.sum() == pytest.approx(1.0)
        assert grid.weights[1] == pytest.approx(0.2)

    def test_repetido(self):
        with pytest.raises(InvalidGridError):
            make_grid([0.0, 0.5, 0.5, 1.0])

    def test_un_punto(self):
        with pytest.raises(InvalidGridError):
            make_grid([0.3])

    def test_equiespaciada(self):
        grid = equispaced_grid(11, 2.0, 3.0)
        assert grid.R == 11
        assert grid.domain == (2.0, 3.0)


class TestBSplines:
    @pytest.mark.parametrize('boundary', ['extended', 'coincident'])
    def test_particion_de_la_unidad(self, boundary):
        s = np.linspace(0.0, 1.0, 37)
        B = bspline_basis(s, 0.0, 1.0, K=8, boundary=boundary)
        assert B.shape == (37, 8)
        assert np.allclose(B.sum(axis=1), 1.0)
        assert np.all(B >= -1e-14)

    def test_k_menor_que_grado(self):
        with pytest.raises(DimensionError):
            make_spline_basis(0.0, 1.0, K=3, degree=3)

    def test_diseno_en_grilla(self):
        grid = equispaced_grid(20)
        assert bspline_design(grid, K=6).shape == (20, 6)

    def test_nodos_extendidos(self):
        basis = make_spline_basis(0.0, 1.0, K=7, degree=3)
        assert basis.knots.size == 7 + 3 + 1
        assert basis.knots[3] == 0.0
        assert basis.knots[-4] == 1.0


class TestPenalizacion:
    def test_primer_orden(self):
        assert difference_penalty(3, 1).tolist() == [[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]]

    def test_nulo_primer_orden(self):
        assert np.allclose(difference_penalty(10, 1) @ np.ones(10), 0.0)

    def test_nulo_segundo_orden(self):
        P = difference_penalty(10, 2)
        assert np.allclose(P @ np.arange(10.0), 0.0)
        assert np.linalg.matrix_rank(P) == 8

    def test_orden_invalido(self):
        with pytest.raises(DimensionError):
            difference_penalty(5, 3)


class TestDisenos:
    def test_cuadratura_de_constante(self):
        grid = make_grid([0.0, 0.2, 0.7, 1.0])
        x = np.ones((2, 4))
        Z = signal_design(x, grid, np.ones((4, 1)))
        assert np.allclose(Z, 1.0)

    def test_integral_de_seno(self):
        grid = equispaced_grid(201)
        x = np.sin(np.pi * grid.points)[None, :]
        Z = signal_design(x, grid, np.ones((201, 1)))
        assert Z[0, 0] == pytest.approx(2 / np.pi, abs=1e-4)

    def test_dimensiones_incompatibles(self):
        grid = equispaced_grid(10)
        with pytest.raises(DimensionError):
            signal_design(np.ones((3, 9)), grid, np.ones((10, 2)))

    def test_row_tensor(self):
        T = row_tensor(np.array([[1, 2]]), np.array([[3, 4, 5]]))
        assert T.tolist() == [[3.0, 4.0, 5.0, 6.0, 8.0, 10.0]]

    def test_row_tensor_filas_distintas(self):
        with pytest.raises(DimensionError):
            row_tensor(np.ones((3, 2)), np.ones((4, 2)))

    def test_suma_kronecker(self):
        P1 = difference_penalty(3, 1)
        P2 = difference_penalty(4, 1)
        P = kronecker_sum_penalty(P1, P2, 2.0, 0.5)
        assert P.shape == (12, 12)
        assert np.allclose(P, 2.0 * np.kron(P1, np.eye(4)) + 0.5 * np.kron(np.eye(3), P2))
        assert np.allclose(P @ np.ones(12), 0.0)

    def test_suma_kronecker_lambda_negativo(self):
        with pytest.raises(ConfigError):
            kronecker_sum_penalty(np.eye(2), np.eye(2), -1.0, 1.0)

    def test_centrar(self, curvas):
        x, _ = curvas
        centrada = center_covariate(x)
        assert np.allclose(centrada.mean(axis=0), 0.0)

    def test_estandarizar(self, curvas):
        x, _ = curvas
        assert center_covariate(x, standardize=True).std(ddof=1) == pytest.approx(1.0)

    def test_centrar_una_curva(self):
        with pytest.raises(DimensionError):
            center_covariate(np.ones((1, 5)))


class TestFpca:
    def test_dos_componentes(self, curvas):
        x, grid = curvas
        base = fpca(x, grid, pve=0.999)
        assert base.K == 2
        assert base.explained >= 0.999
        assert base.eigenvalues[0] >= base.eigenvalues[1]

    def test_ortonormal_en_cuadratura(self, curvas):
        x, grid = curvas
        base = fpca(x, grid, pve=0.999)
        E = base.eigenfunctions
        assert np.allclose(E.T @ (grid.weights[:, None] * E), np.eye(base.K), atol=1e-10)

    def test_reconstruccion(self, curvas):
        x, grid = curvas
        base = fpca(x, grid, pve=1.0)
        reconstruida = base.mean_curve + base.scores @ base.eigenfunctions.T
        assert np.allclose(reconstruida, x, atol=1e-8)

    def test_scores_centrados(self, curvas):
        x, grid = curvas
        assert np.allclose(fpca(x, grid).scores.mean(axis=0), 0.0, atol=1e-10)

    def test_signo_determinista(self, curvas):
        x, grid = curvas
        E = fpca(x, grid).eigenfunctions
        for k in range(E.shape[1]):
            assert E[np.argmax(np.abs(E[:, k])), k] > 0

    def test_scores_nuevos(self, curvas):
        x, grid = curvas
        base = fpca(x, grid)
        assert np.allclose(fpc_scores(base, x, grid), base.scores)

    def test_grilla_incompatible(self, curvas):
        x, grid = curvas
        base = fpca(x, grid)
        with pytest.raises(IncompatibleGridError):
            fpc_scores(base, x[:, :50], equispaced_grid(50))

    def test_curvas_identicas(self):
        grid = equispaced_grid(10)
        with pytest.raises(ZeroBasisError):
            fpca(np.ones((5, 10)), grid)

    def test_pve_invalido(self, curvas):
        x, grid = curvas
        with pytest.raises(ConfigError):
            fpca(x, grid, pve=0.0)

    def test_penalizacion_autovalores(self, curvas):
        x, grid = curvas
        base = fpca(x, grid)
        assert np.allclose(np.diag(fpc_penalty(base, 'autovalores')), 1.0 / base.eigenvalues)
        assert np.allclose(fpc_penalty(base), np.eye(base.K))


class TestInvariantes:
    def test_suma_kronecker_contra_bucle(self):
        P1, P2 = difference_penalty(3, 1), difference_penalty(3, 2) + np.eye(3)
        lam1, lam2 = 0.7, 2.5
        esperado = np.zeros((9, 9))
        for k1 in range(3):
            for k2 in range(3):
                for l1 in range(3):
                    for l2 in range(3):
                        esperado[k1 * 3 + k2, l1 * 3 + l2] = (lam1 * P1[k1, l1] * (k2 == l2)
                                                              + lam2 * (k1 == l1) * P2[k2, l2])
        P = kronecker_sum_penalty(P1, P2, lam1, lam2)
        assert np.allclose(P, esperado)

        gamma = np.random.default_rng(12).normal(size=9)
        G = gamma.reshape(3, 3)
        marginales = (lam1 * sum(G[:, k2] @ P1 @ G[:, k2] for k2 in range(3))
                      + lam2 * sum(G[k1, :] @ P2 @ G[k1, :] for k1 in range(3)))
        assert gamma @ P @ gamma == pytest.approx(marginales)

    def test_fpca_recupera_rango_uno(self):
        grid = equispaced_grid(100)
        rng = np.random.default_rng(40)
        e1 = np.sqrt(2) * np.sin(np.pi * grid.points / 2)
        x = rng.normal(size=(500, 1)) * e1 + 0.05 * rng.normal(size=(500, 100))
        base = fpca(x, grid, pve=0.9)
        estimada = base.eigenfunctions[:, 0]
        assert abs(np.sum(grid.weights * estimada * e1)) > 0.99

    def test_integral_igual_a_scores_por_theta(self, curvas):
        x, grid = curvas
        base = fpca(x, grid, pve=1.0)
        theta = np.random.default_rng(9).normal(size=base.K)
        beta = base.eigenfunctions @ theta
        integral = signal_design(x - base.mean_curve, grid, beta[:, None]).ravel()
        assert np.allclose(integral, base.scores @ theta, atol=1e-8)
