"""
Lectura y escritura de archivos: CSV funcionales y escalares, curvas de
coeficientes, tablas y manifiesto de cada corrida
"""
import json
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
import pandas as pd

from . import __version__
from .config import hash_config, settings
from .errors import DataError
from .fda_basis import make_grid
from .logging_utils import get_logger
from .models import DatosSpec, FunctionalCovariate, Grid, ModelData

logger = get_logger(__name__, level=settings.log_level, log_file=settings.log_file)


def _leer_csv(path: str | Path) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise DataError(f'Archivo de datos no encontrado: {path}')
    try:
        tabla = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataError(f'CSV ilegible {path}: {e}')
    if tabla.isna().any().any():
        raise DataError(f'Valores faltantes en {path}')
    return tabla


def write_csv(tabla: pd.DataFrame, path: str | Path) -> Path:
    """CSV sin índice con 17 dígitos significativos (ida y vuelta sin pérdida)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tabla.to_csv(path, index=False, float_format=settings.sigboost_float_format)
    return path


# ============================================================================
# COVARIABLES
# ============================================================================

def read_functional_csv(path: str | Path) -> FunctionalCovariate:
    """
    Covariable funcional: encabezado = puntos de la grilla, una curva por fila

    Raises:
        DataError: Si falta el archivo, hay faltantes o el encabezado no es numérico
    """
    tabla = _leer_csv(path)
    try:
        puntos = np.array([float(c) for c in tabla.columns])
    except ValueError:
        raise DataError(f'El encabezado de {path} debe contener los puntos de la grilla')
    grid = make_grid(puntos)
    try:
        return FunctionalCovariate(x=tabla.to_numpy(dtype=float), grid=grid)
    except ValueError as e:
        raise DataError(f'{path}: {e}')


def write_functional_csv(path: str | Path, x: np.ndarray, grid: Grid) -> Path:
    columnas = [settings.sigboost_float_format % s for s in grid.points]
    return write_csv(pd.DataFrame(np.atleast_2d(x), columns=columnas), path)


def read_scalar_csv(path: str | Path) -> pd.DataFrame:
    """Tabla de covariables escalares y respuesta con columnas nombradas"""
    return _leer_csv(path)


def load_model_data(datos: DatosSpec, base_dir: str | Path = '.') -> ModelData:
    """
    Construye ModelData desde la sección `datos` (rutas relativas a base_dir)

    Raises:
        DataError: Si falta un archivo, la respuesta o las filas no coinciden
    """
    base = Path(base_dir)
    tabla = read_scalar_csv(base / datos.escalares)
    if datos.respuesta not in tabla.columns:
        raise DataError(f'Falta la columna de respuesta {datos.respuesta!r} en {datos.escalares}')
    escalares = {c: tabla[c].to_numpy(dtype=float) for c in tabla.columns if c != datos.respuesta}
    funcionales = {nombre: read_functional_csv(base / ruta) for nombre, ruta in datos.funcionales.items()}
    try:
        data = ModelData(y=tabla[datos.respuesta].to_numpy(dtype=float), escalares=escalares,
                         funcionales=funcionales)
    except ValueError as e:
        raise DataError(str(e))
    logger.info('Datos cargados', {'N': data.N, 'escalares': sorted(escalares), 'funcionales': sorted(funcionales)})
    return data


# ============================================================================
# RESULTADOS
# ============================================================================

def write_coefficient_curve(path: str | Path, s: np.ndarray, value: np.ndarray,
                            lower: Optional[np.ndarray] = None, upper: Optional[np.ndarray] = None) -> Path:
    """Curva (s, value, lower, upper); las bandas quedan vacías sin bootstrap"""
    vacio = np.full(len(s), np.nan)
    tabla = pd.DataFrame({
        's': s, 'value': value,
        'lower': vacio if lower is None else lower,
        'upper': vacio if upper is None else upper,
    })
    return write_csv(tabla, path)


def nombre_archivo(label: str) -> str:
    """
    Etiqueta de bloque a nombre de archivo

    Examples:
        >>> nombre_archivo('signal(x1,pspline)')
        'signal_x1_pspline'
    """
    limpio = ''.join(c if c.isalnum() else '_' for c in label)
    return '_'.join(p for p in limpio.split('_') if p)


def write_manifest(out_dir: str | Path, argv: list[str], config_path: Optional[str | Path],
                   seed: int, files: Iterable[Path]) -> Path:
    """
    manifest.json con argv, texto y SHA-256 de la configuración, semilla,
    versión y archivos producidos; sin marcas de tiempo
    """
    out_dir = Path(out_dir)
    manifiesto = {
        'argv': list(argv),
        'config': None,
        'seed': seed,
        'version': __version__,
        'files': sorted(Path(f).name for f in files),
    }
    if config_path is not None:
        manifiesto['config'] = {
            'path': str(config_path),
            'sha256': hash_config(config_path),
            'text': Path(config_path).read_text(encoding='utf-8'),
        }
    path = out_dir / 'manifest.json'
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(manifiesto, f, indent=2, ensure_ascii=False, sort_keys=True)
    return path
