"""
Tests del estudio de simulación
"""
import numpy as np
import pytest

from src.models import SimScenario, StudySpec
from src.simstudy import run_replication, run_study, signal_formula


def _estudio(**extra) -> StudySpec:
    base = {'escenarios': {'coef1-const': SimScenario(N=60, R=20, n_test=40)},
            'replicas': 2, 'max': 50, 'length_out': 3, 'folds': 2, 'K': 6}
    base.update(extra)
    return StudySpec(**base)


class TestFormula:
    def test_terminos(self):
        formula = signal_formula(2, K=10, df=3.0)
        assert [t.tipo for t in formula['mu']] == ['intercept', 'signal', 'signal']
        assert [t.var for t in formula['sigma'][1:]] == ['x1', 'x2']
        assert formula['mu'][1].K == 10
        assert formula['sigma'][2].df == 3.0


@pytest.mark.slow
class TestReplicas:
    def test_replica(self):
        estudio = _estudio()
        resultado = run_replication(estudio.escenarios['coef1-const'], 5, estudio, 'coef1-const')
        assert resultado.scenario == 'coef1-const'
        assert 1 <= resultado.mstop_mu <= 50
        assert resultado.mse_alpha1 >= 0.0
        assert np.isfinite(resultado.likelihood_quotient)
        assert 0.0 <= resultado.functional_share_mu <= 1.0

    def test_replica_reproducible(self):
        estudio = _estudio()
        escenario = estudio.escenarios['coef1-const']
        assert run_replication(escenario, 3, estudio) == run_replication(escenario, 3, estudio)

    def test_estudio(self):
        replicas, medianas = run_study(_estudio(), seed=10, jobs=1)
        assert replicas['seed'].tolist() == [10, 11]
        assert medianas['scenario'].tolist() == ['coef1-const']
        assert medianas['mse_alpha1'].iloc[0] == pytest.approx(replicas['mse_alpha1'].median())

    def test_paralelo_igual_a_secuencial(self):
        secuencial, _ = run_study(_estudio(), seed=1, jobs=1)
        paralelo, _ = run_study(_estudio(), seed=1, jobs=2)
        assert secuencial.equals(paralelo)


@pytest.fixture(scope='module')
def replicacion():
    """Réplica reducida del estudio: 10 réplicas por escenario, N=500, grilla 1..2000"""
    nulas = {'mu': ['coef0', 'coef0'], 'sigma': ['coef0', 'coef0']}
    escenarios = {f'coef1-{regimen}': SimScenario(N=500, R=100, n_test=500, variance_regime=regimen)
                  for regimen in ('const', 'lin', 'exp')}
    escenarios['coef0-const'] = SimScenario(N=500, R=100, n_test=500, coef_shapes=nulas)
    estudio = StudySpec(escenarios=escenarios, replicas=10, max=2000, length_out=8, folds=5)
    _, medianas = run_study(estudio, seed=100, jobs=4)
    return medianas.set_index('scenario')


@pytest.mark.slow
class TestReplicacion:
    def test_mse_crece_con_la_concentracion_de_varianza(self, replicacion):
        mse = replicacion['mse_alpha1']
        assert mse['coef1-const'] <= mse['coef1-lin'] <= mse['coef1-exp']
        assert mse['coef1-const'] < mse['coef1-exp']

    def test_mu_mas_preciso_que_sigma(self, replicacion):
        fila = replicacion.loc['coef1-const']
        assert fila['mse_alpha1'] <= fila['mse_beta1']

    def test_cociente_de_verosimilitudes(self, replicacion):
        assert 0.9 <= replicacion.loc['coef1-const', 'likelihood_quotient'] <= 1.2

    def test_seleccion_de_variables(self, replicacion):
        assert replicacion.loc['coef0-const', 'functional_share_mu'] < 0.2
        assert replicacion.loc['coef1-const', 'functional_share_mu'] > 0.5
