"""
Modelos Pydantic: tipos numéricos del dominio y configuración YAML del modelo
"""
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .validators import (
    validar_finito, validar_estrictamente_creciente, validar_semidefinida,
    validar_proporcion, validar_paso
)


def _como_arreglo(v) -> np.ndarray:
    return np.asarray(v, dtype=float)


class NumericModel(BaseModel):
    """Base para modelos que transportan arreglos numpy"""
    model_config = ConfigDict(arbitrary_types_allowed=True)


# ============================================================================
# TIPOS DE BASES FUNCIONALES
# ============================================================================

class Grid(NumericModel):
    """Puntos de evaluación de un dominio funcional con pesos de cuadratura"""
    points: np.ndarray = Field(..., description='s_1 < ... < s_R')
    weights: np.ndarray = Field(..., description='Pesos Δ(s_r) de integración numérica')

    @field_validator('points', 'weights', mode='before')
    @classmethod
    def convertir(cls, v) -> np.ndarray:
        return _como_arreglo(v)

    @field_validator('points')
    @classmethod
    def validar_puntos(cls, v: np.ndarray) -> np.ndarray:
        if not validar_estrictamente_creciente(v):
            raise ValueError('Los puntos de la grilla deben ser >= 2, finitos y estrictamente crecientes')
        return v

    @model_validator(mode='after')
    def validar_pesos(self) -> 'Grid':
        if self.weights.shape != self.points.shape:
            raise ValueError('points y weights deben tener el mismo largo')
        if np.any(self.weights < 0):
            raise ValueError('Los pesos de cuadratura deben ser no negativos')
        largo = self.points[-1] - self.points[0]
        if abs(self.weights.sum() - largo) > 1e-12 * max(1.0, abs(largo)):
            raise ValueError('Los pesos deben sumar el largo del dominio')
        return self

    @property
    def R(self) -> int:
        return int(self.points.size)

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.points[0]), float(self.points[-1])

    def coincide(self, otra: 'Grid', tol: float = 1e-12) -> bool:
        """True si ambas grillas tienen los mismos puntos"""
        return otra.R == self.R and bool(np.allclose(otra.points, self.points, rtol=0.0, atol=tol))


class SplineBasis(NumericModel):
    """Base B-spline con nodos equiespaciados"""
    knots: np.ndarray
    degree: int = Field(..., ge=0)
    K: int = Field(..., ge=1)
    penalty_order: int = Field(1, ge=1, le=2)
    lower: float
    upper: float
    boundary: Literal['extended', 'coincident'] = 'extended'

    @field_validator('knots', mode='before')
    @classmethod
    def convertir(cls, v) -> np.ndarray:
        return _como_arreglo(v)

    @model_validator(mode='after')
    def validar_dimension(self) -> 'SplineBasis':
        if self.K < self.degree + 1:
            raise ValueError(f'K={self.K} debe ser >= grado+1={self.degree + 1}')
        return self


class FpcBasis(NumericModel):
    """Componentes principales funcionales estimadas sobre una grilla"""
    grid: Grid
    mean_curve: np.ndarray
    eigenfunctions: np.ndarray = Field(..., description='R x K_j, columnas e_k(s_r)')
    eigenvalues: np.ndarray = Field(..., description='ζ_1 >= ... >= ζ_K >= 0')
    scores: np.ndarray = Field(..., description='N x K_j, z_ik')
    pve: float
    explained: float = Field(..., description='Fracción de varianza efectivamente explicada')

    @field_validator('mean_curve', 'eigenfunctions', 'eigenvalues', 'scores', mode='before')
    @classmethod
    def convertir(cls, v) -> np.ndarray:
        return _como_arreglo(v)

    @property
    def K(self) -> int:
        return int(self.eigenvalues.size)


class DesignBlock(NumericModel):
    """Un base-learner: diseño, penalización, suavizado y etiqueta"""
    design: np.ndarray
    penalty: np.ndarray
    lam: Union[float, tuple[float, float]] = 0.0
    label: str
    target_df: Union[float, Literal['unpenalized']] = 'unpenalized'

    @field_validator('design', 'penalty', mode='before')
    @classmethod
    def convertir(cls, v) -> np.ndarray:
        return np.atleast_2d(_como_arreglo(v))

    @field_validator('design')
    @classmethod
    def validar_diseno(cls, v: np.ndarray) -> np.ndarray:
        if not validar_finito(v):
            raise ValueError('La matriz de diseño contiene valores no finitos')
        return v

    @field_validator('penalty')
    @classmethod
    def validar_penalizacion(cls, v: np.ndarray) -> np.ndarray:
        if not validar_semidefinida(v):
            raise ValueError('La penalización debe ser simétrica semidefinida positiva')
        return v

    @model_validator(mode='after')
    def validar_dimensiones(self) -> 'DesignBlock':
        K = self.design.shape[1]
        if self.penalty.shape != (K, K):
            raise ValueError(f'Penalización {self.penalty.shape} incompatible con diseño de {K} columnas')
        return self


# ============================================================================
# PARÁMETROS Y APRENDICES
# ============================================================================

class ParamVector(NumericModel):
    """Predictores (escala de enlace) y parámetros (escala de respuesta) por observación"""
    names: tuple[str, ...]
    h: np.ndarray = Field(..., description='Q x N, escala de enlace')
    vartheta: np.ndarray = Field(..., description='Q x N, escala de respuesta')
    floor_count: int = Field(0, description='Activaciones del piso de σ')

    @field_validator('h', 'vartheta', mode='before')
    @classmethod
    def convertir(cls, v) -> np.ndarray:
        return np.atleast_2d(_como_arreglo(v))

    def __getitem__(self, nombre: str) -> np.ndarray:
        return self.vartheta[self.names.index(nombre)]

    @property
    def N(self) -> int:
        return int(self.h.shape[1])

    def subset(self, indices: np.ndarray) -> 'ParamVector':
        return ParamVector(
            names=self.names, h=self.h[:, indices], vartheta=self.vartheta[:, indices],
            floor_count=self.floor_count,
        )


class HatSpec(NumericModel):
    """Problema de mínimos cuadrados penalizados ponderados de un base-learner"""
    design: np.ndarray
    penalty: np.ndarray
    lam: float = Field(0.0, ge=0.0)
    weights: Optional[np.ndarray] = None
    label: str = ''

    @field_validator('design', 'penalty', mode='before')
    @classmethod
    def convertir(cls, v) -> np.ndarray:
        return np.atleast_2d(_como_arreglo(v))

    @field_validator('weights', mode='before')
    @classmethod
    def convertir_pesos(cls, v):
        return None if v is None else _como_arreglo(v)

    @model_validator(mode='after')
    def validar_pesos(self) -> 'HatSpec':
        N = self.design.shape[0]
        if self.weights is None:
            self.weights = np.ones(N)
        if self.weights.shape != (N,):
            raise ValueError(f'weights debe tener largo {N}')
        if np.any(self.weights < 0):
            raise ValueError('Los pesos deben ser no negativos')
        return self

    def con_lambda(self, lam: float) -> 'HatSpec':
        return HatSpec(design=self.design, penalty=self.penalty, lam=lam,
                       weights=self.weights, label=self.label)


class BoostConfig(NumericModel):
    """Largos de paso, iteraciones de parada y pesos de remuestreo"""
    nu: list[float]
    mstop: list[int]
    weights: Optional[np.ndarray] = None
    trace_every: int = Field(0, ge=0, description='Cada cuántas iteraciones loguear (0 = nunca)')

    @field_validator('nu')
    @classmethod
    def validar_nu(cls, v: list[float]) -> list[float]:
        if not all(validar_paso(x) for x in v):
            raise ValueError('Cada largo de paso nu debe estar en (0, 1)')
        return v

    @field_validator('mstop')
    @classmethod
    def validar_mstop(cls, v: list[int]) -> list[int]:
        if any(m < 0 for m in v):
            raise ValueError('mstop debe ser entero no negativo')
        return v

    @field_validator('weights', mode='before')
    @classmethod
    def convertir_pesos(cls, v):
        return None if v is None else _como_arreglo(v)

    @model_validator(mode='after')
    def validar_largos(self) -> 'BoostConfig':
        if len(self.nu) != len(self.mstop):
            raise ValueError('nu y mstop deben tener un valor por parámetro')
        if self.weights is not None:
            if np.any(self.weights < 0) or not validar_finito(self.weights):
                raise ValueError('Los pesos deben ser finitos y no negativos')
            if not np.any(self.weights > 0):
                raise ValueError('Los pesos no pueden ser todos cero')
        return self


class SelectionEntry(BaseModel):
    """Una actualización del boosting"""
    iteration: int
    parameter: str
    index: int
    label: str
    rss: float


# ============================================================================
# REMUESTREO
# ============================================================================

class StopGrid(BaseModel):
    """Grilla Q-dimensional de candidatos de mstop"""
    points: list[tuple[int, ...]]

    @field_validator('points')
    @classmethod
    def validar_puntos(cls, v: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
        if not v:
            raise ValueError('La grilla de parada no puede estar vacía')
        Q = len(v[0])
        for punto in v:
            if len(punto) != Q or any(int(m) < 1 for m in punto):
                raise ValueError(f'Punto de grilla inválido: {punto}')
        return [tuple(int(m) for m in p) for p in v]

    @property
    def Q(self) -> int:
        return len(self.points[0])

    @property
    def maximos(self) -> tuple[int, ...]:
        return tuple(max(p[q] for p in self.points) for q in range(self.Q))


class FoldWeights(NumericModel):
    """Pesos de entrenamiento de cada remuestra (filas)"""
    weights: np.ndarray
    kind: Literal['cv', 'bootstrap'] = 'bootstrap'

    @field_validator('weights', mode='before')
    @classmethod
    def convertir(cls, v) -> np.ndarray:
        return np.atleast_2d(np.asarray(v, dtype=np.int64))

    @field_validator('weights')
    @classmethod
    def validar_no_negativos(cls, v: np.ndarray) -> np.ndarray:
        if np.any(v < 0):
            raise ValueError('Los pesos de remuestreo deben ser no negativos')
        return v

    @property
    def B(self) -> int:
        return int(self.weights.shape[0])


# ============================================================================
# DATOS
# ============================================================================

class FunctionalCovariate(NumericModel):
    """Curvas N x R observadas en una grilla común"""
    x: np.ndarray
    grid: Grid

    @field_validator('x', mode='before')
    @classmethod
    def convertir(cls, v) -> np.ndarray:
        return np.atleast_2d(_como_arreglo(v))

    @model_validator(mode='after')
    def validar_forma(self) -> 'FunctionalCovariate':
        if self.x.shape[1] != self.grid.R:
            raise ValueError(f'x tiene {self.x.shape[1]} columnas y la grilla {self.grid.R} puntos')
        if not validar_finito(self.x):
            raise ValueError('La covariable funcional contiene valores faltantes o no finitos')
        return self


class ModelData(NumericModel):
    """Respuesta, covariables escalares y funcionales de un conjunto de datos"""
    y: Optional[np.ndarray] = None
    escalares: dict[str, np.ndarray] = Field(default_factory=dict)
    funcionales: dict[str, FunctionalCovariate] = Field(default_factory=dict)

    @field_validator('y', mode='before')
    @classmethod
    def convertir_y(cls, v):
        return None if v is None else _como_arreglo(v).ravel()

    @field_validator('escalares', mode='before')
    @classmethod
    def convertir_escalares(cls, v):
        return {k: _como_arreglo(x).ravel() for k, x in (v or {}).items()}

    @model_validator(mode='after')
    def validar_largos(self) -> 'ModelData':
        largos = {len(x) for x in self.escalares.values()}
        largos |= {f.x.shape[0] for f in self.funcionales.values()}
        if self.y is not None:
            largos.add(len(self.y))
        if len(largos) > 1:
            raise ValueError(f'Largos de observación inconsistentes: {sorted(largos)}')
        return self

    @property
    def N(self) -> int:
        if self.y is not None:
            return int(len(self.y))
        for x in self.escalares.values():
            return int(len(x))
        for f in self.funcionales.values():
            return int(f.x.shape[0])
        return 0

    def subset(self, indices: np.ndarray) -> 'ModelData':
        """Subconjunto de filas (train/test o refits rodantes)"""
        return ModelData(
            y=None if self.y is None else self.y[indices],
            escalares={k: v[indices] for k, v in self.escalares.items()},
            funcionales={
                k: FunctionalCovariate(x=f.x[indices], grid=f.grid)
                for k, f in self.funcionales.items()
            },
        )


# ============================================================================
# SIMULACIÓN
# ============================================================================

CoefShapeName = Literal['coef0', 'coef1', 'coef2', 'coef3']


class SimScenario(BaseModel):
    """Configuración del generador del estudio de simulación"""
    N: int = Field(500, ge=3)
    R: int = Field(100, ge=2)
    C: int = Field(5, ge=1)
    variance_regime: Literal['const', 'lin', 'exp'] = 'const'
    rand_start: bool = False
    coef_shapes: dict[str, list[CoefShapeName]] = Field(
        default_factory=lambda: {'mu': ['coef1', 'coef2'], 'sigma': ['coef1', 'coef3']},
        description='Forma por (parámetro, covariable)'
    )
    intercepts: dict[str, float] = Field(default_factory=lambda: {'mu': 0.0, 'sigma': 0.0})
    n_test: int = Field(500, ge=0)
    seed: int = 0

    @model_validator(mode='after')
    def validar_formas(self) -> 'SimScenario':
        largos = {len(v) for v in self.coef_shapes.values()}
        if len(largos) != 1:
            raise ValueError('Cada parámetro debe declarar una forma por covariable funcional')
        return self

    @property
    def n_covariates(self) -> int:
        return len(next(iter(self.coef_shapes.values())))


# ============================================================================
# CONFIGURACIÓN YAML DEL MODELO
# ============================================================================

class TermSpec(BaseModel):
    """Un término de la fórmula de un parámetro"""
    model_config = ConfigDict(populate_by_name=True)

    tipo: Literal['intercept', 'linear', 'smooth', 'signal', 'lag', 'interaction']
    var: Optional[str] = None
    base: Literal['pspline', 'fpc'] = 'pspline'
    K: int = Field(20, ge=1)
    grado: int = Field(3, ge=0)
    orden_penalizacion: int = Field(1, ge=1, le=2)
    df: Optional[Union[float, Literal['unpenalized']]] = None
    lam: Optional[Union[float, list[float]]] = Field(None, alias='lambda')
    pve: float = 0.99
    penalizacion_fpc: Literal['identidad', 'autovalores'] = 'identidad'
    p: int = Field(1, ge=1)
    transformacion: Literal['identidad', 'log_cuadrado'] = 'identidad'
    por: Optional[str] = None
    tipo_por: Literal['lineal', 'spline'] = 'spline'
    K_por: int = Field(8, ge=2)

    @field_validator('pve')
    @classmethod
    def validar_pve(cls, v: float) -> float:
        if not validar_proporcion(v):
            raise ValueError('pve debe estar en (0, 1]')
        return v

    @field_validator('lam')
    @classmethod
    def validar_lambda(cls, v):
        valores = v if isinstance(v, list) else [v] if v is not None else []
        if any(x < 0 for x in valores):
            raise ValueError('lambda debe ser no negativo')
        if isinstance(v, list) and len(v) != 2:
            raise ValueError('lambda de una interacción debe ser un par [λ1, λ2]')
        return v

    @model_validator(mode='after')
    def validar_campos(self) -> 'TermSpec':
        if self.tipo != 'intercept' and not self.var:
            raise ValueError(f'El término {self.tipo} requiere var')
        if self.tipo == 'interaction' and not self.por:
            raise ValueError('interaction requiere la covariable escalar "por"')
        if isinstance(self.df, float) and self.df <= 0:
            raise ValueError('df debe ser positivo')
        return self

    @property
    def df_objetivo(self) -> Union[float, Literal['unpenalized']]:
        """df configurado o el valor por defecto del tipo de término"""
        if self.df is not None:
            return self.df
        if self.tipo in ('signal', 'interaction'):
            return 2.0
        if self.tipo == 'smooth':
            return 4.0
        return 'unpenalized'


class DatosSpec(BaseModel):
    """Archivos de datos; rutas relativas al YAML"""
    escalares: str
    respuesta: str = 'y'
    funcionales: dict[str, str] = Field(default_factory=dict)
    fraccion_entrenamiento: Optional[float] = Field(None, gt=0.0, lt=1.0)


class BoostSpec(BaseModel):
    nu: Optional[list[float]] = None
    mstop: list[int] = Field(default_factory=lambda: [100, 100])
    trace_every: int = 0


class TuningSpec(BaseModel):
    metodo: Literal['cv', 'bootstrap'] = 'cv'
    folds: int = Field(5, ge=2)
    B: int = Field(100, ge=1)
    L: int = Field(20, ge=1)
    solapado: bool = True
    max: list[int] = Field(default_factory=lambda: [500, 500])
    length_out: int = Field(10, ge=1)
    fijos: list[str] = Field(default_factory=list)
    bandas: int = Field(0, ge=0, description='Remuestras bootstrap para bandas (0 = sin bandas)')


class ArchSpec(BaseModel):
    """Serie ARCH con varianza log-lineal en los cuadrados rezagados"""
    N: int = Field(527, ge=2)
    alpha: list[float] = Field(default_factory=lambda: [0.0], description='α_0, α_1..α_p')
    beta: list[float] = Field(default_factory=lambda: [0.0, 0.5], description='β_0, β_1..β_p')
    burn_in: int = Field(100, ge=0)
    p_mu: int = Field(10, ge=0, description='Rezagos de y para μ en el diseño')
    p_sigma: int = Field(10, ge=0, description='Rezagos de log y² para σ en el diseño')
    varianza: Literal['log_cuadrado', 'cuadrado'] = 'log_cuadrado'

    @field_validator('alpha', 'beta')
    @classmethod
    def validar_no_vacio(cls, v: list[float]) -> list[float]:
        if not v:
            raise ValueError('Se requiere al menos el término constante')
        return v


class StudySpec(BaseModel):
    """Estudio de simulación: escenarios con nombre, réplicas y grilla reducida"""
    escenarios: dict[str, SimScenario] = Field(default_factory=lambda: {'coef1-const': SimScenario()})
    replicas: int = Field(20, ge=1)
    max: int = Field(2000, ge=1)
    length_out: int = Field(8, ge=1)
    folds: int = Field(5, ge=2)
    K: int = Field(20, ge=4)
    df: float = Field(2.0, gt=0.0)


class SimulationSpec(BaseModel):
    escenario: SimScenario = Field(default_factory=SimScenario)
    arch: Optional[ArchSpec] = None
    estudio: Optional[StudySpec] = None


class ModelSpec(BaseModel):
    """Configuración completa de un modelo"""
    familia: str = 'normal-ls'
    datos: Optional[DatosSpec] = None
    formula: dict[str, list[TermSpec]] = Field(default_factory=dict)
    boosting: BoostSpec = Field(default_factory=BoostSpec)
    tuning: Optional[TuningSpec] = None
    semilla: int = 0
    simulacion: Optional[SimulationSpec] = None
