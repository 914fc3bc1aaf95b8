"""
Modelo: funciones de Green y trayectorias clásicas

Todos los canales comparten la forma

    G_c1c2(t,t') = [Θ(t−t')·U_c1(t)·V_c2(t') + Θ(t'−t)·V_c1(t)·U_c2(t')] / den
                   + κ·g_c1(t)·g_c2(t')

donde el índice j toma la función y el índice k su derivada temporal.

    dirichlet_x:  U = D_b, V = D_a, den = D_a(t_b), κ = 0
    momentum_p:   U = D_b·Ḋ_a(t_b) + D_a, V = D_a·Ḋ_b(t_a) − D_b,
                  den = D_a(t_b)·(1 + Ḋ_a(t_b)·Ḋ_b(t_a)), κ = 0
    periodic:     como dirichlet_x más el término de rango uno con
                  g = D_a + D_b y κ = 1 / (a·D_a(t_b)), a = Ḋ_a(t_b) − Ḋ_b(t_a) − 2

Las funciones son reales; los factores i, ħ y M los aplican los consumidores.
En t = t' se usa Θ(0) = 1/2; en la representación periodic t_b se identifica con t_a.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, NamedTuple, Optional, Tuple

import numpy as np

from models.errors import DomainError
from models.frequency import PhysicalParams
from models.fundamental import FundamentalPair, check_caustic
from utils.quadrature import PartialIntegral, cumulative, integrate

logger = logging.getLogger(__name__)

REPRESENTATIONS = ("dirichlet_x", "momentum_p", "periodic")
CHANNELS = ("jj", "jk", "kj", "kk")


class SourceTerm(NamedTuple):
    """Fuente j(t) o k(t): parte suave en la malla más impulsos (t0, peso)"""

    smooth: Optional[np.ndarray] = None
    impulses: Tuple[Tuple[float, float], ...] = ()

    @property
    def is_zero(self) -> bool:
        return self.smooth is None and not self.impulses


def _theta(t, t2):
    return np.where(t > t2, 1.0, np.where(t < t2, 0.0, 0.5))


class GreensEvaluator:
    """Evaluador de los canales jj/jk/kj/kk en una representación"""

    def __init__(self, pair: FundamentalPair, representation: str = "dirichlet_x"):
        if representation not in REPRESENTATIONS:
            raise DomainError(f"representación desconocida: {representation!r}")
        self.pair = pair
        self.representation = representation
        self.da_tb = pair.require_da_tb()
        self.da_dot_tb = pair.da_dot_tb
        self.db_dot_ta = pair.db_dot_ta
        self.a = self.da_dot_tb - self.db_dot_ta - 2.0
        self.m_denom = 1.0 + self.da_dot_tb * self.db_dot_ta

        self.kappa = 0.0
        if representation == "momentum_p":
            check_caustic("1 + Ḋa(t_b)Ḋb(t_a)", self.m_denom, pair.caustic_tol)
            self.den = self.da_tb * self.m_denom
        else:
            self.den = self.da_tb
        if representation == "periodic":
            check_caustic("a(t_a, t_b)", self.a, pair.caustic_tol)
            self.kappa = 1.0 / (self.a * self.da_tb)
        logger.debug(
            "evaluador %s: Da(t_b)=%.12g, m=%.12g, a=%.12g",
            representation,
            self.da_tb,
            self.m_denom,
            self.a,
        )

    def factors(self, da, da_dot, db, db_dot) -> Dict[str, Dict[str, np.ndarray]]:
        """Factores U, V y g con su derivada, indexados por letra j/k"""
        if self.representation == "momentum_p":
            upper = (db * self.da_dot_tb + da, db_dot * self.da_dot_tb + da_dot)
            lower = (da * self.db_dot_ta - db, da_dot * self.db_dot_ta - db_dot)
        else:
            upper = (db, db_dot)
            lower = (da, da_dot)
        rank = (da + db, da_dot + db_dot)
        return {
            "upper": {"j": upper[0], "k": upper[1]},
            "lower": {"j": lower[0], "k": lower[1]},
            "rank": {"j": rank[0], "k": rank[1]},
        }

    def factors_at(self, t):
        return self.factors(*self.pair.evaluate(t))

    @cached_property
    def grid_factors(self):
        p = self.pair
        return self.factors(p.da, p.da_dot, p.db, p.db_dot)

    @staticmethod
    def _channel(ch: str) -> Tuple[str, str]:
        if ch not in CHANNELS:
            raise DomainError(f"canal desconocido: {ch!r}")
        return ch[0], ch[1]

    def green(self, ch: str, t, t2):
        """
        Valor G_ch(t, t2).

        Args:
            ch: canal jj, jk, kj o kk
            t, t2: tiempos escalares o arreglos compatibles en [t_a, t_b]

        Returns:
            float o arreglo con la forma de la difusión de t y t2
        """
        c1, c2 = self._channel(ch)
        tt, tt2 = np.broadcast_arrays(
            np.asarray(self.pair.profile.check_domain(t)), np.asarray(self.pair.profile.check_domain(t2))
        )
        if self.representation == "periodic":
            # en el círculo t_b y t_a son el mismo punto
            tt = np.where(tt >= self.pair.t_b, self.pair.t_a, tt)
            tt2 = np.where(tt2 >= self.pair.t_b, self.pair.t_a, tt2)
        f1 = self.factors_at(tt)
        f2 = self.factors_at(tt2)
        theta = _theta(tt, tt2)
        value = (
            theta * f1["upper"][c1] * f2["lower"][c2] + (1.0 - theta) * f1["lower"][c1] * f2["upper"][c2]
        ) / self.den
        if self.kappa:
            value = value + self.kappa * f1["rank"][c1] * f2["rank"][c2]
        if np.ndim(t) == 0 and np.ndim(t2) == 0:
            return float(value)
        return value

    def double_integral(self, ch: str, f: SourceTerm, g: SourceTerm) -> float:
        """
        ∫∫ f(t)·G_ch(t,t')·g(t') dt dt' para fuentes suaves e impulsivas.

        La parte suave usa la separación en Θ: la integral interior es una
        integral acumulada de Simpson y la exterior una regla de Simpson, de
        modo que el salto o el pico de G en la diagonal nunca cae dentro de
        una celda. Los impulsos se evalúan puntualmente; en t_a y t_b toman
        los límites laterales interiores.
        """
        c1, c2 = self._channel(ch)
        grid = self.pair.grid
        nodes = self.grid_factors
        total = 0.0

        if f.smooth is not None and g.smooth is not None:
            below = cumulative(nodes["lower"][c2] * g.smooth, grid)
            upper_cum = cumulative(nodes["upper"][c2] * g.smooth, grid)
            above = upper_cum[-1] - upper_cum
            integrand = f.smooth * (nodes["upper"][c1] * below + nodes["lower"][c1] * above)
            total += integrate(integrand, grid) / self.den
            if self.kappa:
                total += (
                    self.kappa
                    * integrate(f.smooth * nodes["rank"][c1], grid)
                    * integrate(g.smooth * nodes["rank"][c2], grid)
                )

        if f.smooth is not None and g.impulses:
            f_upper = PartialIntegral(f.smooth * nodes["upper"][c1], grid)
            f_lower = PartialIntegral(f.smooth * nodes["lower"][c1], grid)
            f_rank = integrate(f.smooth * nodes["rank"][c1], grid) if self.kappa else 0.0
            for t0, weight in g.impulses:
                at = self.factors_at(t0)
                value = (at["lower"][c2] * f_upper.above(t0) + at["upper"][c2] * f_lower.below(t0)) / self.den
                value += self.kappa * at["rank"][c2] * f_rank
                total += weight * float(value)

        if f.impulses and g.smooth is not None:
            g_lower = PartialIntegral(nodes["lower"][c2] * g.smooth, grid)
            g_upper = PartialIntegral(nodes["upper"][c2] * g.smooth, grid)
            g_rank = integrate(g.smooth * nodes["rank"][c2], grid) if self.kappa else 0.0
            for t0, weight in f.impulses:
                at = self.factors_at(t0)
                value = (at["upper"][c1] * g_lower.below(t0) + at["lower"][c1] * g_upper.above(t0)) / self.den
                value += self.kappa * at["rank"][c1] * g_rank
                total += weight * float(value)

        for t1, w1 in f.impulses:
            for t2, w2 in g.impulses:
                total += w1 * w2 * self.green(ch, t1, t2)
        return float(total)


def green(e: GreensEvaluator, ch: str, t, t2):
    return e.green(ch, t, t2)


def jump_residual(e: GreensEvaluator, t2: float) -> float:
    """
    |[∂_t G_jj(t2⁺, t2) − ∂_t G_jj(t2⁻, t2)] + 1|.

    Cada rama se deriva analíticamente y se evalúa en su límite lateral en
    t2, a partir de las muestras interpoladas de D y Ḋ.
    """
    if not (e.pair.t_a < t2 < e.pair.t_b):
        raise DomainError(f"t2 debe estar en el interior de [t_a, t_b], recibido {t2!r}")
    at = e.factors_at(t2)
    jump = (at["upper"]["k"] * at["lower"]["j"] - at["lower"]["k"] * at["upper"]["j"]) / e.den
    return abs(float(jump) + 1.0)


@dataclass(frozen=True, eq=False)
class ClassicalPath:
    """
    Trayectoria clásica con extremos fijados en posición (x_rep) o en
    momento (p_rep). ``path(t)`` devuelve (x_cl(t), p_cl(t)).
    """

    representation: str
    start: float
    end: float
    pair: FundamentalPair
    mass: float
    evaluator: Optional[GreensEvaluator] = None

    def _combine(self, da, da_dot, db, db_dot):
        if self.representation == "x_rep":
            phi_a, phi_a_dot = db / self.pair.db_ta, db_dot / self.pair.db_ta
            phi_b, phi_b_dot = da / self.pair.da_tb, da_dot / self.pair.da_tb
            x = self.start * phi_a + self.end * phi_b
            p = self.mass * (self.start * phi_a_dot + self.end * phi_b_dot)
            return x, p
        f = self.evaluator.factors(da, da_dot, db, db_dot)
        m = self.evaluator.m_denom
        x = (self.start * f["upper"]["j"] + self.end * f["lower"]["j"]) / (self.mass * m)
        p = (self.start * f["upper"]["k"] + self.end * f["lower"]["k"]) / m
        return x, p

    def __call__(self, t):
        x, p = self._combine(*self.pair.evaluate(t))
        if np.ndim(t) == 0:
            return float(x), float(p)
        return x, p

    def on_grid(self) -> Tuple[np.ndarray, np.ndarray]:
        """(x_cl, p_cl) en los nodos de la malla"""
        p = self.pair
        return self._combine(p.da, p.da_dot, p.db, p.db_dot)


def classical_path_x(pair: FundamentalPair, x_a: float, x_b: float, params: PhysicalParams = None) -> ClassicalPath:
    """x_cl(t) = x_a·D_b(t)/D_b(t_a) + x_b·D_a(t)/D_a(t_b); exacto en los extremos"""
    params = params or PhysicalParams()
    pair.require_da_tb()
    check_caustic("Db(t_a)", pair.db_ta, pair.caustic_tol)
    return ClassicalPath("x_rep", float(x_a), float(x_b), pair, params.mass)


def classical_path_p(pair: FundamentalPair, p_a: float, p_b: float, params: PhysicalParams = None) -> ClassicalPath:
    """x̄_cl(t) = [p_a·U(t) + p_b·V(t)] / (M·m), con p̄_cl(t_a) = p_a y p̄_cl(t_b) = p_b"""
    params = params or PhysicalParams()
    evaluator = GreensEvaluator(pair, "momentum_p")
    return ClassicalPath("p_rep", float(p_a), float(p_b), pair, params.mass, evaluator)


def inhomogeneous_shift(e: GreensEvaluator, j_samples, t, params: PhysicalParams = None):
    """Δx_cl(t) = −(1/M)∫G_jj(t,t')·j(t') dt', solución de K̂Δx = −j/M"""
    params = params or PhysicalParams()
    if e.representation != "dirichlet_x":
        raise DomainError("el desplazamiento inhomogéneo usa la representación dirichlet_x")
    grid = e.pair.grid
    nodes = e.grid_factors
    j_samples = np.asarray(j_samples, dtype=float)
    below = PartialIntegral(nodes["lower"]["j"] * j_samples, grid)
    above = PartialIntegral(nodes["upper"]["j"] * j_samples, grid)
    at = e.factors_at(t)
    shift = -(at["upper"]["j"] * below.below(t) + at["lower"]["j"] * above.above(t)) / (e.den * params.mass)
    return float(shift) if np.ndim(t) == 0 else shift
