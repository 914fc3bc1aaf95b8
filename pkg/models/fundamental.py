"""
Modelo: soluciones fundamentales D_a, D_b del oscilador

D_a y D_b resuelven D̈ = −Ω²(t)·D con D_a(t_a) = 0, Ḋ_a(t_a) = 1 y
D_b(t_b) = 0, Ḋ_b(t_b) = −1. Se integran con Runge-Kutta clásico de paso
fijo sobre una malla uniforme y se evalúan entre nodos con Hermite cúbico.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Tuple

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from config import AppConfig
from models.errors import CausticError, DomainError, IntegrationError
from models.frequency import FrequencyProfile, PhysicalParams
from utils.quadrature import integrate

logger = logging.getLogger(__name__)


def check_caustic(name: str, value: float, tolerance: float) -> float:
    """Lanza CausticError si |value| <= tolerance; avisa si está cerca"""
    if not abs(value) > tolerance:
        raise CausticError(name, value, tolerance)
    if abs(value) < AppConfig.NEAR_CAUSTIC_FACTOR * tolerance:
        logger.warning("%s = %.3e cerca de una cáustica", name, value)
    return value


@dataclass(frozen=True, eq=False)
class FundamentalPair:
    """Muestras de D_a, Ḋ_a, D_b, Ḋ_b en los N+1 nodos de la malla"""

    profile: FrequencyProfile
    grid: np.ndarray
    da: np.ndarray
    da_dot: np.ndarray
    db: np.ndarray
    db_dot: np.ndarray
    omega_squared: np.ndarray

    @property
    def n_steps(self) -> int:
        return len(self.grid) - 1

    @property
    def t_a(self) -> float:
        return self.profile.t_a

    @property
    def t_b(self) -> float:
        return self.profile.t_b

    @property
    def da_tb(self) -> float:
        return float(self.da[-1])

    @property
    def da_dot_tb(self) -> float:
        return float(self.da_dot[-1])

    @property
    def db_ta(self) -> float:
        return float(self.db[0])

    @property
    def db_dot_ta(self) -> float:
        return float(self.db_dot[0])

    @property
    def caustic_tol(self) -> float:
        return self.profile.caustic_tol

    @cached_property
    def wronskian_samples(self) -> np.ndarray:
        return self.da * self.db_dot - self.da_dot * self.db

    @property
    def wronskian(self) -> float:
        return float(self.wronskian_samples[0])

    @cached_property
    def _splines(self):
        d2a = -self.omega_squared * self.da
        d2b = -self.omega_squared * self.db
        return (
            CubicHermiteSpline(self.grid, self.da, self.da_dot),
            CubicHermiteSpline(self.grid, self.da_dot, d2a),
            CubicHermiteSpline(self.grid, self.db, self.db_dot),
            CubicHermiteSpline(self.grid, self.db_dot, d2b),
        )

    def evaluate(self, t) -> Tuple:
        """
        Evalúa (D_a, Ḋ_a, D_b, Ḋ_b) en t.

        Args:
            t: tiempo escalar o arreglo dentro de [t_a, t_b]

        Returns:
            tupla de cuatro valores (float o arreglo según t)
        """
        arr = self.profile.check_domain(t)
        values = tuple(spline(arr) for spline in self._splines)
        if np.ndim(t) == 0:
            return tuple(float(v) for v in values)
        return values

    def require_da_tb(self) -> float:
        return check_caustic("Da(t_b)", self.da_tb, self.caustic_tol)


@dataclass(frozen=True, eq=False)
class GFlowFamily:
    """Miembro g de la familia con Ω² → g·Ω²"""

    g: float
    pair: FundamentalPair


def _rk4_step(y, v, h, w0, wm, w1):
    k1y, k1v = v, -w0 * y
    k2y, k2v = v + 0.5 * h * k1v, -wm * (y + 0.5 * h * k1y)
    k3y, k3v = v + 0.5 * h * k2v, -wm * (y + 0.5 * h * k2y)
    k4y, k4v = v + h * k3v, -w1 * (y + h * k3y)
    return (
        y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
        v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    )


def _require_finite(values: np.ndarray, times: np.ndarray):
    bad = ~np.isfinite(values)
    if np.any(bad):
        raise IntegrationError(times[np.argmax(bad)])


def solve_fundamental(profile: FrequencyProfile, n_steps: int = AppConfig.DEFAULT_N_STEPS) -> FundamentalPair:
    """
    Integra D_a hacia delante y D_b hacia atrás.

    Las etapas extremas de cada paso usan el límite lateral de Ω² interior
    al paso, así que las discontinuidades situadas en nodos se respetan.

    Raises:
        DomainError: si n_steps < MIN_N_STEPS
        IntegrationError: si Ω² o la solución dejan de ser finitos
    """
    if int(n_steps) != n_steps or n_steps < AppConfig.MIN_N_STEPS:
        raise DomainError(f"n_steps debe ser un entero >= {AppConfig.MIN_N_STEPS}")
    n = int(n_steps)
    grid = np.linspace(profile.t_a, profile.t_b, n + 1)
    midpoints = 0.5 * (grid[:-1] + grid[1:])
    h = (profile.t_b - profile.t_a) / n

    w_right = np.asarray(profile.omega_squared(grid, side="right"))
    w_left = np.asarray(profile.omega_squared(grid, side="left"))
    w_mid = np.asarray(profile.omega_squared(midpoints))
    _require_finite(w_right, grid)
    _require_finite(w_left, grid)
    _require_finite(w_mid, midpoints)
    logger.debug("integrando soluciones fundamentales: n=%d, h=%.3e", n, h)

    da = np.empty(n + 1)
    da_dot = np.empty(n + 1)
    da[0], da_dot[0] = 0.0, 1.0
    for i in range(n):
        da[i + 1], da_dot[i + 1] = _rk4_step(da[i], da_dot[i], h, w_right[i], w_mid[i], w_left[i + 1])

    db = np.empty(n + 1)
    db_dot = np.empty(n + 1)
    db[n], db_dot[n] = 0.0, -1.0
    for i in range(n - 1, -1, -1):
        db[i], db_dot[i] = _rk4_step(db[i + 1], db_dot[i + 1], -h, w_left[i + 1], w_mid[i], w_right[i])

    for samples in (da, da_dot, db, db_dot):
        _require_finite(samples, grid)

    for samples in (grid, da, da_dot, db, db_dot, w_right):
        samples.setflags(write=False)
    return FundamentalPair(profile, grid, da, da_dot, db, db_dot, w_right)


def wronskian_residual(pair: FundamentalPair) -> float:
    """max_t |W(t) − W(t_a)|"""
    return float(np.max(np.abs(pair.wronskian_samples - pair.wronskian)))


def endpoint_symmetry_residual(pair: FundamentalPair) -> float:
    """|D_a(t_b) − D_b(t_a)|, consecuencia de la constancia de W"""
    return abs(pair.da_tb - pair.db_ta)


def derivative_sum_identity_residual(pair: FundamentalPair, profile: FrequencyProfile = None) -> float:
    """
    |Ḋ_b(t_a) + Ḋ_a(t_b) + 2∫ΩΩ̇ D_a D_b dt|.

    Los saltos de Ω² en perfiles constantes a trozos aportan el término
    ΔΩ²(s)·D_a(s)·D_b(s) en cada punto de ruptura.
    """
    profile = profile or pair.profile
    integrand = 2.0 * np.asarray(profile.half_d_omega_squared(pair.grid)) * pair.da * pair.db
    total = pair.db_dot_ta + pair.da_dot_tb + integrate(integrand, pair.grid)
    for s, jump in profile.jumps():
        da_s, _, db_s, _ = pair.evaluate(s)
        total += jump * da_s * db_s
    return abs(total)


def gelfand_yaglom_amplitude(pair: FundamentalPair, params: PhysicalParams) -> complex:
    """sqrt(M / (2πiħ D_a(t_b))) con la rama principal"""
    da_tb = pair.require_da_tb()
    return complex(np.sqrt(complex(params.mass / (2j * math.pi * params.hbar * da_tb))))


def gflow_family(profile: FrequencyProfile, g: float, n_steps: int = AppConfig.DEFAULT_N_STEPS) -> GFlowFamily:
    if not 0.0 <= g <= 1.0:
        raise DomainError(f"g debe estar en [0, 1], recibido {g!r}")
    return GFlowFamily(float(g), solve_fundamental(profile.scaled(g), n_steps))


def gflow_residual(profile: FrequencyProfile, g: float, n_steps: int = AppConfig.DEFAULT_N_STEPS) -> float:
    """
    |d/dg ln D_a^g(t_b) + ∫ Ω²(t) G^g_jj(t,t) dt|.

    La derivada en g es una diferencia central de paso GFLOW_DELTA.
    """
    from models.greens import GreensEvaluator

    delta = AppConfig.GFLOW_DELTA
    if not (0.0 < g <= 1.0) or g - delta < 0.0:
        raise DomainError(f"g debe estar en ({delta}, 1], recibido {g!r}")
    lower = solve_fundamental(profile.scaled(g - delta), n_steps)
    upper = solve_fundamental(profile.scaled(g + delta), n_steps)
    center = solve_fundamental(profile.scaled(g), n_steps)
    for member in (lower, center, upper):
        member.require_da_tb()
    if np.sign(lower.da_tb) != np.sign(upper.da_tb):
        raise CausticError("Da^g(t_b)", 0.0, profile.caustic_tol)

    log_derivative = (math.log(abs(upper.da_tb)) - math.log(abs(lower.da_tb))) / (2.0 * delta)
    evaluator = GreensEvaluator(center, "dirichlet_x")
    diagonal = evaluator.green("jj", center.grid, center.grid)
    trace = integrate(np.asarray(profile.omega_squared(center.grid)) * diagonal, center.grid)
    logger.debug("flujo en g=%.4f: d ln Da/dg=%.12g, traza=%.12g", g, log_derivative, trace)
    return abs(log_derivative + trace)


def fundamental_table(pair: FundamentalPair) -> np.ndarray:
    """Filas (t, Da, Da_dot, Db, Db_dot) para exportar en CSV"""
    return np.column_stack((pair.grid, pair.da, pair.da_dot, pair.db, pair.db_dot))
