"""
Logging con resumen automático de cargas numéricas
Los arreglos grandes nunca llegan completos al log
"""
import logging
import sys
from typing import Any, Dict, Optional

import numpy as np


def resumir_arreglo(valor: np.ndarray) -> str:
    """
    Resume un arreglo numpy en forma, mínimo y máximo

    Args:
        valor: Arreglo a resumir

    Returns:
        str: Resumen compacto

    Examples:
        >>> resumir_arreglo(np.array([1.0, 2.0, 3.0]))
        'array(3,) min=1 max=3'
    """
    if valor.size == 0:
        return f'array{valor.shape} vacío'
    if not np.issubdtype(valor.dtype, np.number):
        return f'array{valor.shape}'
    finitos = valor[np.isfinite(valor)]
    if finitos.size == 0:
        return f'array{valor.shape} sin valores finitos'
    return f'array{valor.shape} min={finitos.min():.6g} max={finitos.max():.6g}'


def resumir_valor(valor: Any) -> Any:
    """
    Resume un valor individual para el log

    Examples:
        >>> resumir_valor(0.1234567891)
        '0.123457'
        >>> resumir_valor('normal-ls')
        'normal-ls'
    """
    if isinstance(valor, np.ndarray):
        return resumir_arreglo(valor)
    if isinstance(valor, (float, np.floating)):
        return f'{float(valor):.6g}'
    if isinstance(valor, (list, tuple)) and len(valor) > 8:
        return f'{type(valor).__name__}[{len(valor)}]'
    return valor


def resumir_datos(data: Dict[str, Any]) -> Dict[str, Any]:
    """
    Resume todas las cargas numéricas de un diccionario

    Args:
        data: Diccionario con valores potencialmente grandes

    Returns:
        Dict: Diccionario con valores resumidos
    """
    return {clave: resumir_valor(valor) for clave, valor in data.items()}


class NumericLogger:
    """
    Logger que resume automáticamente arreglos y flotantes
    """

    def __init__(self, name: str, level: str = 'INFO', log_file: Optional[str] = None):
        """
        Inicializa logger

        Args:
            name: Nombre del logger
            level: Nivel de logging (DEBUG, INFO, WARNING, ERROR, CRITICAL)
            log_file: Path opcional para guardar logs en archivo
        """
        self.logger = logging.getLogger(name)
        self.logger.setLevel(getattr(logging, level.upper()))

        # Evitar duplicados
        if self.logger.handlers:
            return

        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )

        # stderr: stdout queda reservado para la línea JSON de la CLI
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(formatter)
        self.logger.addHandler(console_handler)

        if log_file:
            file_handler = logging.FileHandler(log_file, encoding='utf-8')
            file_handler.setFormatter(formatter)
            self.logger.addHandler(file_handler)

    def _safe_log(self, level: str, msg: str, extra: Optional[Dict[str, Any]] = None):
        log_func = getattr(self.logger, level.lower())

        if extra:
            log_func(f'{msg} | {resumir_datos(extra)}')
        else:
            log_func(msg)

    def debug(self, msg: str, extra: Optional[Dict[str, Any]] = None):
        """Log nivel DEBUG"""
        self._safe_log('debug', msg, extra)

    def info(self, msg: str, extra: Optional[Dict[str, Any]] = None):
        """Log nivel INFO"""
        self._safe_log('info', msg, extra)

    def warning(self, msg: str, extra: Optional[Dict[str, Any]] = None):
        """Log nivel WARNING"""
        self._safe_log('warning', msg, extra)

    def error(self, msg: str, extra: Optional[Dict[str, Any]] = None):
        """Log nivel ERROR"""
        self._safe_log('error', msg, extra)


def get_logger(name: str, level: str = 'INFO', log_file: Optional[str] = None) -> NumericLogger:
    """
    Factory para crear logger

    Args:
        name: Nombre del logger
        level: Nivel de logging
        log_file: Path opcional para archivo de logs

    Returns:
        NumericLogger: Instancia de logger
    """
    return NumericLogger(name, level, log_file)
