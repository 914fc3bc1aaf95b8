"""
Modelo: acciones clásicas, amplitudes con corrientes y funcional de caminos cerrados

Las corrientes j(t) y k(t) se acoplan como p·k(t) − x·j(t). Las acciones se
arman con los términos de contorno, el término lineal en la trayectoria
clásica y las cuatro integrales dobles de las funciones de Green.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

from config import AppConfig
from models.errors import DomainError
from models.frequency import PhysicalParams
from models.fundamental import FundamentalPair
from models.greens import (
    ClassicalPath,
    GreensEvaluator,
    SourceTerm,
    classical_path_p,
    classical_path_x,
)
from utils.quadrature import integrate

logger = logging.getLogger(__name__)

Impulses = Tuple[Tuple[float, float], ...]


def _impulses(items) -> Impulses:
    return tuple((float(t0), float(w)) for t0, w in items if float(w) != 0.0)


@dataclass(frozen=True, eq=False)
class CurrentPair:
    """
    Corrientes j y k: muestras suaves en la malla del par fundamental
    (None equivale a cero) más impulsos peso·δ(t − t0).
    """

    smooth_j: Optional[np.ndarray] = None
    smooth_k: Optional[np.ndarray] = None
    impulses_j: Impulses = field(default_factory=tuple)
    impulses_k: Impulses = field(default_factory=tuple)

    @classmethod
    def zero(cls) -> "CurrentPair":
        return cls()

    @classmethod
    def from_tables(
        cls,
        pair: FundamentalPair,
        j_samples: Sequence = (),
        k_samples: Sequence = (),
        j_impulses: Sequence = (),
        k_impulses: Sequence = (),
    ) -> "CurrentPair":
        """Interpola tablas (t, valor) linealmente sobre la malla; cero fuera de la tabla"""

        def sample(table):
            if not len(table):
                return None
            table = np.asarray(table, dtype=float)
            if table.ndim != 2 or table.shape[1] != 2:
                raise DomainError("las tablas de corriente son listas de pares (t, valor)")
            return np.interp(pair.grid, table[:, 0], table[:, 1], left=0.0, right=0.0)

        return cls(sample(j_samples), sample(k_samples), _impulses(j_impulses), _impulses(k_impulses))

    @property
    def j(self) -> SourceTerm:
        return SourceTerm(self.smooth_j, self.impulses_j)

    @property
    def k(self) -> SourceTerm:
        return SourceTerm(self.smooth_k, self.impulses_k)

    def with_impulses(self, j: Sequence = (), k: Sequence = ()) -> "CurrentPair":
        return replace(
            self,
            impulses_j=self.impulses_j + _impulses(j),
            impulses_k=self.impulses_k + _impulses(k),
        )

    def scaled(self, factor: float) -> "CurrentPair":
        def scale(samples):
            return None if samples is None else factor * samples

        return CurrentPair(
            scale(self.smooth_j),
            scale(self.smooth_k),
            tuple((t0, factor * w) for t0, w in self.impulses_j),
            tuple((t0, factor * w) for t0, w in self.impulses_k),
        )

    def validate(self, pair: FundamentalPair):
        for samples in (self.smooth_j, self.smooth_k):
            if samples is not None and np.shape(samples) != pair.grid.shape:
                raise DomainError("las muestras de corriente deben tener un valor por nodo")
        for t0, _ in self.impulses_j + self.impulses_k:
            pair.profile.check_domain(t0)


@dataclass(frozen=True)
class AmplitudeValue:
    """value = prefactor·exp(i·action/ħ)"""

    action: complex
    prefactor: complex
    value: complex
    hbar: float = 1.0

    @classmethod
    def assemble(cls, action: float, prefactor: complex, params: PhysicalParams) -> "AmplitudeValue":
        value = prefactor * np.exp(1j * action / params.hbar)
        return cls(complex(action), complex(prefactor), complex(value), params.hbar)

    @property
    def log_value(self) -> complex:
        """ln(prefactor) + i·action/ħ sin plegar la fase"""
        return complex(np.log(self.prefactor) + 1j * self.action / self.hbar)

    def to_dict(self) -> Dict[str, float]:
        return {
            "action_re": self.action.real,
            "action_im": self.action.imag,
            "prefactor_re": self.prefactor.real,
            "prefactor_im": self.prefactor.imag,
            "value_re": self.value.real,
            "value_im": self.value.imag,
        }


def _linear_term(path: ClassicalPath, currents: CurrentPair) -> float:
    """∫(x_cl·j + p_cl·k) dt con evaluación puntual de los impulsos"""
    x_grid, p_grid = path.on_grid()
    grid = path.pair.grid
    total = 0.0
    if currents.smooth_j is not None:
        total += integrate(x_grid * currents.smooth_j, grid)
    if currents.smooth_k is not None:
        total += integrate(p_grid * currents.smooth_k, grid)
    for t0, weight in currents.impulses_j:
        total += weight * path(t0)[0]
    for t0, weight in currents.impulses_k:
        total += weight * path(t0)[1]
    return total


def _quadratic_term(e: GreensEvaluator, currents: CurrentPair, mass: float) -> float:
    """(1/M)·∫∫G_jj jj + 2∫∫G_jk jk + M·∫∫G_kk kk"""
    j, k = currents.j, currents.k
    total = 0.0
    if not j.is_zero:
        total += e.double_integral("jj", j, j) / mass
    if not j.is_zero and not k.is_zero:
        total += 2.0 * e.double_integral("jk", j, k)
    if not k.is_zero:
        total += mass * e.double_integral("kk", k, k)
    return total


def classical_action_x(
    pair: FundamentalPair,
    x_a: float,
    x_b: float,
    currents: CurrentPair = None,
    params: PhysicalParams = None,
) -> float:
    """Acción clásica con extremos en posición y corrientes j, k"""
    currents = currents or CurrentPair()
    params = params or PhysicalParams()
    currents.validate(pair)
    e = GreensEvaluator(pair, "dirichlet_x")
    path = classical_path_x(pair, x_a, x_b, params)
    boundary = (
        params.mass
        * (e.da_dot_tb * x_b**2 - e.db_dot_ta * x_a**2 - 2.0 * x_a * x_b)
        / (2.0 * e.da_tb)
    )
    return boundary + _linear_term(path, currents) - 0.5 * _quadratic_term(e, currents, params.mass)


def amplitude_x(
    pair: FundamentalPair,
    x_a: float,
    x_b: float,
    currents: CurrentPair = None,
    params: PhysicalParams = None,
) -> AmplitudeValue:
    """
    Amplitud (x_b t_b | x_a t_a)[j, k].

    El prefactor es sqrt((i/2πħ)·∂²A/∂x_b∂x_a) con ∂²A/∂x_b∂x_a = −M/D_a(t_b).
    """
    params = params or PhysicalParams()
    action = classical_action_x(pair, x_a, x_b, currents, params)
    prefactor = np.sqrt(complex(params.mass / (2j * math.pi * params.hbar * pair.da_tb)))
    return AmplitudeValue.assemble(action, prefactor, params)


def classical_action_p(
    pair: FundamentalPair,
    p_a: float,
    p_b: float,
    currents: CurrentPair = None,
    params: PhysicalParams = None,
) -> float:
    """Transformada de Legendre de la acción: extremos fijados en momento"""
    currents = currents or CurrentPair()
    params = params or PhysicalParams()
    currents.validate(pair)
    path = classical_path_p(pair, p_a, p_b, params)
    e = path.evaluator
    boundary = (
        e.da_tb
        * (e.da_dot_tb * p_a**2 - e.db_dot_ta * p_b**2 - 2.0 * p_a * p_b)
        / (2.0 * params.mass * e.m_denom)
    )
    return boundary + _linear_term(path, currents) - 0.5 * _quadratic_term(e, currents, params.mass)


def amplitude_p(
    pair: FundamentalPair,
    p_a: float,
    p_b: float,
    currents: CurrentPair = None,
    params: PhysicalParams = None,
) -> AmplitudeValue:
    """Amplitud (p_b t_b | p_a t_a)[j, k]; prefactor sqrt(2πiħ·∂²A/∂p_b∂p_a)"""
    params = params or PhysicalParams()
    action = classical_action_p(pair, p_a, p_b, currents, params)
    m_denom = 1.0 + pair.da_dot_tb * pair.db_dot_ta
    mixed = -pair.da_tb / (params.mass * m_denom)
    prefactor = np.sqrt(complex(2j * math.pi * params.hbar * mixed))
    return AmplitudeValue.assemble(action, prefactor, params)


def endpoint_shift_residual(
    pair: FundamentalPair,
    x_a: float,
    x_b: float,
    currents: CurrentPair = None,
    params: PhysicalParams = None,
) -> float:
    """
    |A(x_a, x_b)[j,k] − A(0, 0)[j, k + x_b·δ(t − t_b) − x_a·δ(t − t_a)]|

    Los extremos no nulos equivalen a impulsos de k en los bordes.
    """
    currents = currents or CurrentPair()
    direct = amplitude_x(pair, x_a, x_b, currents, params)
    shifted = currents.with_impulses(k=((pair.t_b, x_b), (pair.t_a, -x_a)))
    reduced = amplitude_x(pair, 0.0, 0.0, shifted, params)
    return abs(direct.value - reduced.value)


def momentum_shift_residual(
    pair: FundamentalPair,
    p_a: float,
    p_b: float,
    currents: CurrentPair = None,
    params: PhysicalParams = None,
) -> float:
    """Análogo en momento: impulsos de j con pesos p_a en t_a y −p_b en t_b"""
    currents = currents or CurrentPair()
    direct = amplitude_p(pair, p_a, p_b, currents, params)
    shifted = currents.with_impulses(j=((pair.t_a, p_a), (pair.t_b, -p_b)))
    reduced = amplitude_p(pair, 0.0, 0.0, shifted, params)
    return abs(direct.value - reduced.value)


def phase_identity_residual(
    pair: FundamentalPair,
    x_a: float,
    x_b: float,
    k_samples,
    j_samples=None,
    params: PhysicalParams = None,
) -> float:
    """
    La corriente de momento k equivale a la corriente de posición j − M·k̇
    más la fase (iM/ħ)[x_b k_b − x_a k_a + ½∫k²]. Devuelve el módulo de la
    diferencia; k̇ por diferencias centrales en la malla.
    """
    params = params or PhysicalParams()
    grid = pair.grid
    k_samples = np.asarray(k_samples, dtype=float)
    j_samples = np.zeros_like(grid) if j_samples is None else np.asarray(j_samples, dtype=float)
    k_dot = np.gradient(k_samples, grid, edge_order=2)

    direct = amplitude_x(pair, x_a, x_b, CurrentPair(j_samples, k_samples), params)
    effective = amplitude_x(pair, x_a, x_b, CurrentPair(j_samples - params.mass * k_dot), params)
    phase = (params.mass / params.hbar) * (
        x_b * k_samples[-1] - x_a * k_samples[0] + 0.5 * integrate(k_samples**2, grid)
    )
    return abs(direct.value - effective.value * np.exp(1j * phase))


def partition_functional(
    pair: FundamentalPair, currents: CurrentPair = None, params: PhysicalParams = None
) -> AmplitudeValue:
    """
    Funcional de caminos cerrados Z[j, k] = ∫dx (x t_b | x t_a)[j, k].

    Prefactor 1/sqrt(Ḋ_a(t_b) − Ḋ_b(t_a) − 2) en la rama principal y
    exponente con las funciones de Green periódicas.
    """
    currents = currents or CurrentPair()
    params = params or PhysicalParams()
    currents.validate(pair)
    e = GreensEvaluator(pair, "periodic")
    action = -0.5 * _quadratic_term(e, currents, params.mass)
    prefactor = 1.0 / np.sqrt(complex(e.a))
    return AmplitudeValue.assemble(action, prefactor, params)


def regulated_trace_integral(
    pair: FundamentalPair,
    currents: CurrentPair = None,
    params: PhysicalParams = None,
    epsilon: float = AppConfig.TRACE_EPSILON,
    half_width: float = AppConfig.TRACE_HALF_WIDTH,
    step: float = AppConfig.TRACE_STEP,
) -> complex:
    """
    ∫dx e^{−εx²}·(x t_b | x t_a)[j, k] por la regla del trapecio en [−L, L].

    La acción es exactamente cuadrática en x, así que tres evaluaciones la
    determinan y el integrando se muestrea sin recalcular las integrales dobles.
    """
    params = params or PhysicalParams()
    actions = [classical_action_x(pair, x, x, currents, params) for x in (-1.0, 0.0, 1.0)]
    gamma = actions[1]
    beta = 0.5 * (actions[2] - actions[0])
    alpha = 0.5 * (actions[2] + actions[0]) - gamma
    prefactor = np.sqrt(complex(params.mass / (2j * math.pi * params.hbar * pair.da_tb)))

    xs = np.arange(-half_width, half_width + 0.5 * step, step)
    phase = (alpha * xs**2 + beta * xs + gamma) / params.hbar
    integrand = prefactor * np.exp(1j * phase - epsilon * xs**2)
    logger.debug("traza regularizada: %d puntos, ε=%.1e", len(xs), epsilon)
    return complex(trapezoid(integrand, xs))
