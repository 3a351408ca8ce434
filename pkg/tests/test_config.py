"""
Tests unitarios para la configuración YAML del modelo
"""
from pathlib import Path

import pytest

from src.config import (
    cargar_config, cargar_model_spec, get_config, hash_config, reload_config, validar_configuracion
)
from src.errors import ConfigError
from src.models import ModelSpec

YAML_VALIDO = """
familia: normal-ls
datos:
  escalares: respuesta.csv
  funcionales:
    x1: x1.csv
formula:
  mu:
    - {tipo: intercept}
    - {tipo: signal, var: x1, K: 20, df: 2}
  sigma:
    - {tipo: intercept}
boosting:
  mstop: [100, 50]
tuning:
  metodo: bootstrap
  B: 10
  L: 20
  max: [500, 500]
semilla: 7
"""


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / 'modelo.yaml'
    path.write_text(YAML_VALIDO, encoding='utf-8')
    return path


def test_cargar_config(config_path):
    """Test que se carga correctamente el archivo YAML"""
    config = cargar_config(config_path)
    assert isinstance(config, dict)
    assert config['familia'] == 'normal-ls'


def test_get_config_nested(config_path):
    """Test obtener configuración anidada"""
    config = cargar_config(config_path)
    assert get_config(config, 'tuning.L') == 20
    assert get_config(config, 'datos.funcionales.x1') == 'x1.csv'


def test_get_config_default(config_path):
    """Test valor por defecto cuando no existe clave"""
    assert get_config(cargar_config(config_path), 'clave.inexistente', 'default') == 'default'


def test_cache_y_recarga(config_path):
    """Test que la recarga lee el archivo editado"""
    cargar_config(config_path)
    config_path.write_text(YAML_VALIDO.replace('semilla: 7', 'semilla: 8'), encoding='utf-8')
    assert cargar_config(config_path)['semilla'] == 7
    assert reload_config(config_path)['semilla'] == 8


def test_hash_estable(config_path):
    assert hash_config(config_path) == hash_config(config_path)
    assert len(hash_config(config_path)) == 64


def test_model_spec_valido(config_path):
    spec = cargar_model_spec(config_path)
    assert spec.semilla == 7
    assert spec.formula['mu'][1].K == 20
    assert spec.tuning.metodo == 'bootstrap'


class TestErroresDeConfiguracion:
    def test_archivo_inexistente(self, tmp_path):
        with pytest.raises(ConfigError):
            cargar_config(tmp_path / 'no_existe.yaml')

    def test_yaml_invalido(self, tmp_path):
        path = tmp_path / 'roto.yaml'
        path.write_text('familia: [normal-ls\n', encoding='utf-8')
        with pytest.raises(ConfigError):
            cargar_config(path)

    def test_no_es_mapa(self, tmp_path):
        path = tmp_path / 'lista.yaml'
        path.write_text('- 1\n- 2\n', encoding='utf-8')
        with pytest.raises(ConfigError):
            cargar_config(path)

    def test_campo_invalido(self, tmp_path):
        path = tmp_path / 'modelo.yaml'
        path.write_text(YAML_VALIDO.replace('metodo: bootstrap', 'metodo: jackknife'), encoding='utf-8')
        with pytest.raises(ConfigError, match='tuning'):
            cargar_model_spec(path)

    def test_familia_desconocida(self, tmp_path):
        path = tmp_path / 'modelo.yaml'
        path.write_text(YAML_VALIDO.replace('familia: normal-ls', 'familia: gamma'), encoding='utf-8')
        with pytest.raises(ConfigError):
            cargar_model_spec(path)


class TestValidarConfiguracion:
    def test_parametro_ajeno(self):
        spec = ModelSpec.model_validate({
            'familia': 'normal-ls',
            'formula': {'mu': [{'tipo': 'intercept'}], 'sigma': [{'tipo': 'intercept'}],
                        'df': [{'tipo': 'intercept'}]},
        })
        es_valido, errores = validar_configuracion(spec)
        assert es_valido is False
        assert any('df' in e for e in errores)

    def test_mstop_largo_incorrecto(self):
        spec = ModelSpec.model_validate({
            'familia': 't-ls',
            'formula': {q: [{'tipo': 'intercept'}] for q in ('mu', 'sigma', 'df')},
            'boosting': {'mstop': [10, 10]},
        })
        es_valido, errores = validar_configuracion(spec)
        assert es_valido is False
        assert any('mstop' in e for e in errores)

    def test_simulacion_sin_formula(self):
        spec = ModelSpec.model_validate({'familia': 'normal-ls', 'simulacion': {}})
        assert validar_configuracion(spec, requiere_formula=False) == (True, [])
        assert validar_configuracion(spec)[0] is False


@pytest.mark.parametrize('nombre', ['simulacion.yaml', 'ajuste.yaml', 'arch_t.yaml', 'estudio.yaml'])
def test_ejemplos_documentados(nombre):
    ruta = Path(__file__).resolve().parent.parent / 'docs' / 'modelo' / nombre
    spec = cargar_model_spec(ruta, requiere_formula=nombre in ('ajuste.yaml', 'arch_t.yaml'))
    assert isinstance(spec, ModelSpec)
