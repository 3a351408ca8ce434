"""
Validadores numéricos: grillas, matrices de penalización, proporciones
Todos devuelven bool; los modelos Pydantic convierten el False en ValueError
"""
import numpy as np


def validar_finito(valores: np.ndarray) -> bool:
    """
    Valida que un arreglo no tenga NaN ni infinitos

    Args:
        valores: Arreglo numérico de cualquier forma

    Returns:
        bool: True si todos los valores son finitos

    Examples:
        >>> validar_finito(np.array([0.0, 1.5]))
        True
        >>> validar_finito(np.array([0.0, np.nan]))
        False
    """
    valores = np.asarray(valores, dtype=float)
    return bool(np.all(np.isfinite(valores)))


def validar_estrictamente_creciente(puntos: np.ndarray) -> bool:
    """
    Valida puntos de grilla: al menos 2, finitos y estrictamente crecientes

    Examples:
        >>> validar_estrictamente_creciente(np.array([0.0, 0.5, 1.0]))
        True
        >>> validar_estrictamente_creciente(np.array([0.0, 0.0, 1.0]))
        False
        >>> validar_estrictamente_creciente(np.array([1.0]))
        False
    """
    puntos = np.asarray(puntos, dtype=float)
    if puntos.ndim != 1 or puntos.size < 2:
        return False
    if not validar_finito(puntos):
        return False
    return bool(np.all(np.diff(puntos) > 0))


def validar_simetrica(matriz: np.ndarray, tol: float = 1e-10) -> bool:
    """
    Valida que una matriz cuadrada sea simétrica (tolerancia relativa)

    Examples:
        >>> validar_simetrica(np.array([[2.0, -1.0], [-1.0, 2.0]]))
        True
        >>> validar_simetrica(np.array([[1.0, 2.0], [0.0, 1.0]]))
        False
    """
    matriz = np.asarray(matriz, dtype=float)
    if matriz.ndim != 2 or matriz.shape[0] != matriz.shape[1]:
        return False
    escala = max(1.0, float(np.abs(matriz).max(initial=0.0)))
    return bool(np.allclose(matriz, matriz.T, rtol=0.0, atol=tol * escala))


def validar_semidefinida(matriz: np.ndarray, tol: float = 1e-10) -> bool:
    """
    Valida que una matriz simétrica sea semidefinida positiva:
    autovalores >= -tol * (mayor autovalor)

    Examples:
        >>> validar_semidefinida(np.array([[1.0, -1.0], [-1.0, 1.0]]))
        True
        >>> validar_semidefinida(np.array([[1.0, 0.0], [0.0, -1.0]]))
        False
    """
    if not validar_simetrica(matriz):
        return False
    autovalores = np.linalg.eigvalsh(np.asarray(matriz, dtype=float))
    if autovalores.size == 0:
        return True
    mayor = max(float(autovalores[-1]), 0.0)
    return bool(autovalores[0] >= -tol * mayor)


def validar_proporcion(pve: float) -> bool:
    """
    Valida proporción de varianza explicada en (0, 1]

    Examples:
        >>> validar_proporcion(0.99)
        True
        >>> validar_proporcion(0.0)
        False
    """
    return bool(0.0 < pve <= 1.0)


def validar_paso(nu: float) -> bool:
    """
    Valida largo de paso del boosting en (0, 1)

    Examples:
        >>> validar_paso(0.1)
        True
        >>> validar_paso(1.0)
        False
    """
    return bool(0.0 < nu < 1.0)
