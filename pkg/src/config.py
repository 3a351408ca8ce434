"""
Configuración: variables de entorno y archivo YAML del modelo
"""
import hashlib
from pathlib import Path
from typing import Any, Optional

import yaml
from pydantic import ValidationError as PydanticValidationError
from pydantic_settings import BaseSettings

from .errors import ConfigError


class Settings(BaseSettings):
    """Configuración de la aplicación desde variables de entorno"""

    # Logging
    log_level: str = 'INFO'
    log_file: Optional[str] = None

    # Salidas de la CLI
    sigboost_output_dir: str = 'salidas'
    sigboost_jobs: int = 1
    sigboost_float_format: str = '%.17g'

    # Tolerancias numéricas
    df_tolerance: float = 1e-6
    ridge_jitter: float = 1e-10
    sigma_floor: float = 1e-10

    class Config:
        env_file = '.env'
        env_file_encoding = 'utf-8'
        case_sensitive = False


# Instancia global de configuración
settings = Settings()


# ============================================================================
# ARCHIVO YAML DEL MODELO
# ============================================================================

_config_cache: dict[str, dict] = {}


def cargar_config(path: str | Path) -> dict:
    """
    Carga configuración YAML con cache por ruta.

    Args:
        path: Ruta al archivo YAML

    Returns:
        dict: Configuración completa

    Raises:
        ConfigError: Si no existe el archivo o tiene sintaxis inválida
    """
    clave = str(Path(path).resolve())
    if clave in _config_cache:
        return _config_cache[clave]

    path = Path(path)
    if not path.exists():
        raise ConfigError(f'Archivo de configuración no encontrado: {path}')

    try:
        with open(path, 'r', encoding='utf-8') as f:
            contenido = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f'Error de sintaxis YAML: {e}')

    if not isinstance(contenido, dict):
        raise ConfigError(f'La configuración debe ser un mapa clave-valor: {path}')

    _config_cache[clave] = contenido
    return contenido


def reload_config(path: str | Path) -> dict:
    """
    Recarga configuración desde archivo (útil después de editar YAML).
    """
    _config_cache.pop(str(Path(path).resolve()), None)
    return cargar_config(path)


def get_config(config: dict, key: str, default: Any = None) -> Any:
    """
    Obtiene valor de configuración por clave con notación de punto.

    Args:
        config: Configuración cargada
        key: Clave en formato "seccion.subseccion.valor"
        default: Valor por defecto si no existe

    Returns:
        Any: Valor de configuración

    Examples:
        >>> get_config({'boosting': {'nu': [0.1, 0.01]}}, 'boosting.nu')
        [0.1, 0.01]
        >>> get_config({}, 'tuning.folds', 5)
        5
    """
    value: Any = config
    for k in key.split('.'):
        if isinstance(value, dict) and k in value:
            value = value[k]
        else:
            return default
    return value


def hash_config(path: str | Path) -> str:
    """SHA-256 del archivo de configuración tal como está en disco"""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def cargar_model_spec(path: str | Path, requiere_formula: bool = True):
    """
    Carga y valida la configuración del modelo.

    Args:
        path: Ruta al YAML
        requiere_formula: Si cada parámetro debe tener términos (False para `simulate`)

    Returns:
        ModelSpec: Especificación validada

    Raises:
        ConfigError: Si la configuración no pasa la validación
    """
    from .models import ModelSpec

    contenido = cargar_config(path)
    try:
        spec = ModelSpec.model_validate(contenido)
    except PydanticValidationError as e:
        primer = e.errors()[0]
        ubicacion = '.'.join(str(p) for p in primer['loc'])
        raise ConfigError(f'{ubicacion}: {primer["msg"]}')

    es_valido, errores = validar_configuracion(spec, requiere_formula)
    if not es_valido:
        raise ConfigError('; '.join(errores))
    return spec


def validar_configuracion(spec, requiere_formula: bool = True) -> tuple[bool, list[str]]:
    """
    Valida consistencia entre secciones de la configuración.

    Args:
        spec: ModelSpec ya validado campo a campo
        requiere_formula: Exigir términos para todos los parámetros

    Returns:
        tuple[bool, list[str]]: (es_valido, lista_de_errores)
    """
    from .families import get_family

    errores = []

    try:
        familia = get_family(spec.familia)
    except ConfigError as e:
        return False, [str(e)]

    parametros = familia.parameter_names
    for nombre in spec.formula:
        if nombre not in parametros:
            errores.append(f'Parámetro desconocido en formula: {nombre} (familia {familia.name})')
    if requiere_formula:
        for nombre in parametros:
            if not spec.formula.get(nombre):
                errores.append(f'Falta al menos un término para el parámetro {nombre}')

    if spec.boosting.nu is not None and len(spec.boosting.nu) != familia.Q:
        errores.append(f'boosting.nu debe tener {familia.Q} valores')
    if len(spec.boosting.mstop) != familia.Q:
        errores.append(f'boosting.mstop debe tener {familia.Q} valores')
    if spec.tuning is not None:
        if len(spec.tuning.max) != familia.Q:
            errores.append(f'tuning.max debe tener {familia.Q} valores')
        if any(q not in parametros for q in spec.tuning.fijos):
            errores.append(f'tuning.fijos contiene parámetros ajenos a {familia.name}')

    return (len(errores) == 0, errores)
