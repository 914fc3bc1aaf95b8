"""
Modelo: fórmula de difuminado con la gaussiana por bloques

Con v = (√(ħ/MΩ)·ξ, √(MΩ/ħ)·κ) el exponente cuadrático es −(i/2)·vᵀGv con

    A_ij = Ω·G_jj(t_i, t_j),  C_ij = G_kk(t_i, t_j)/Ω,  B_ij = −G_jk(t_i, t_{N+j})

y los valores esperados se obtienen de la gaussiana
P(u) ∝ exp((i/2)·(u − w)ᵀG⁻¹(u − w)), u = (√(MΩ/ħ)·x, −p/√(ħMΩ)),
con w el mismo cambio de escala aplicado a la trayectoria clásica.

Modo fresnel: covarianza iG, solo momentos polinómicos (exactos).
Modo euclidean: covarianza G, que debe ser definida positiva; admite
funciones no polinómicas por cuadratura de Gauss-Hermite.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import linalg

from config import AppConfig
from models.errors import DomainError, ModeError, QuadratureSizeError, SingularBlocksError
from models.frequency import PhysicalParams
from models.greens import ClassicalPath, GreensEvaluator

logger = logging.getLogger(__name__)

MODES = ("fresnel", "euclidean")
FUNCTION_KINDS = ("polynomial", "gaussian", "tabulated")


@dataclass(frozen=True, eq=False)
class LocalFunction:
    """
    Función F de una posición o un momento.

        polynomial: coefficients ascendentes (grado ≤ 16)
        gaussian: exp(−a·y² + b·y) con coefficients = (a, b)
        tabulated: table_y, table_f con interpolación lineal
    """

    kind: str
    argument: str = "position"
    coefficients: Tuple[float, ...] = (1.0,)
    table_y: Tuple[float, ...] = ()
    table_f: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in FUNCTION_KINDS:
            raise DomainError(f"tipo de función desconocido: {self.kind!r}")
        if self.argument not in ("position", "momentum"):
            raise DomainError(f"argumento desconocido: {self.argument!r}")
        if self.kind == "polynomial" and not 1 <= len(self.coefficients) <= AppConfig.MAX_POLYNOMIAL_DEGREE + 1:
            raise DomainError(f"grado polinómico máximo {AppConfig.MAX_POLYNOMIAL_DEGREE}")
        if self.kind == "gaussian" and len(self.coefficients) != 2:
            raise DomainError("una gaussiana lleva coeficientes (a, b)")
        if self.kind == "tabulated":
            if len(self.table_y) < 2 or len(self.table_y) != len(self.table_f):
                raise DomainError("una tabla necesita al menos 2 pares (y, F)")
            if np.any(np.diff(self.table_y) <= 0):
                raise DomainError("las abscisas tabuladas deben ser crecientes")

    @classmethod
    def polynomial(cls, coefficients, argument="position") -> "LocalFunction":
        return cls("polynomial", argument, tuple(float(c) for c in coefficients))

    @classmethod
    def gaussian(cls, a, b=0.0, argument="position") -> "LocalFunction":
        return cls("gaussian", argument, (float(a), float(b)))

    @classmethod
    def tabulated(cls, ys, fs, argument="position") -> "LocalFunction":
        return cls("tabulated", argument, (), tuple(map(float, ys)), tuple(map(float, fs)))

    def __call__(self, y):
        if self.kind == "polynomial":
            return npoly.polyval(y, self.coefficients)
        if self.kind == "gaussian":
            a, b = self.coefficients
            return np.exp(-a * y**2 + b * y)
        return np.interp(y, self.table_y, self.table_f)


def _det(block: np.ndarray) -> float:
    return 1.0 if block.size == 0 else float(np.linalg.det(block))


def _inv(block: np.ndarray) -> np.ndarray:
    return block.copy() if block.size == 0 else np.linalg.inv(block)


def _regular(block: np.ndarray) -> bool:
    return block.size == 0 or np.linalg.cond(block) < AppConfig.BLOCK_CONDITION_LIMIT


@dataclass(frozen=True, eq=False)
class SmearingDistribution:
    """Gaussiana por bloques con N posiciones y M momentos"""

    n_positions: int
    n_momenta: int
    times: Tuple[float, ...]
    w: np.ndarray
    G: np.ndarray
    G_inv: np.ndarray
    detG: float
    mode: str
    omega_ref: float
    mean: np.ndarray
    scales: np.ndarray
    params: PhysicalParams
    det_crosscheck: Dict[str, Optional[float]] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.n_positions + self.n_momenta

    @property
    def w_covariance(self) -> np.ndarray:
        """Covarianza de w: iG (fresnel) o G (euclidean)"""
        return 1j * self.G if self.mode == "fresnel" else self.G.astype(complex)

    @property
    def covariance(self) -> np.ndarray:
        """Covarianza de las variables físicas (x_n, p_m)"""
        return self.w_covariance * np.outer(self.scales, self.scales)

    @property
    def normalization(self) -> complex:
        """1/sqrt(i^{N+M}·(2π)^{N−M}·det G), rama principal"""
        n, m = self.n_positions, self.n_momenta
        return complex(1.0 / np.sqrt(complex((1j ** (n + m)) * (2 * math.pi) ** (n - m) * self.detG)))

    def log_weight(self, values) -> complex:
        """Exponente de la densidad sin normalizar en y = (x_1..x_N, p_1..p_M)"""
        values = np.asarray(values, dtype=float)
        if values.shape != (self.size,):
            raise DomainError(f"se esperaban {self.size} valores")
        u = values / self.scales - self.w
        quadratic = float(u @ self.G_inv @ u)
        return 0.5j * quadratic if self.mode == "fresnel" else complex(-0.5 * quadratic)


def _block_inverse(A, B, C):
    """
    Inversa y determinante por complemento de Schur.

    Ruta C: X = A − B C⁻¹ Bᵀ, det G = det C · det X.
    Ruta A: X' = C − Bᵀ A⁻¹ B, det G = det A · det X'.
    """
    report: Dict[str, Optional[float]] = {"det_route_c": None, "det_route_a": None, "relative_difference": None}
    c_regular, a_regular = _regular(C), _regular(A)
    if not c_regular and not a_regular:
        raise SingularBlocksError("los bloques A y C son singulares a la vez")

    G_inv = None
    if c_regular:
        C_inv = _inv(C)
        X = A - B @ C_inv @ B.T
        X_inv = _inv(X)
        report["det_route_c"] = _det(C) * _det(X)
        G_inv = np.block(
            [
                [X_inv, -X_inv @ B @ C_inv],
                [-C_inv @ B.T @ X_inv, C_inv + C_inv @ B.T @ X_inv @ B @ C_inv],
            ]
        )
    if a_regular:
        A_inv = _inv(A)
        X_prime = C - B.T @ A_inv @ B
        report["det_route_a"] = _det(A) * _det(X_prime)
        if G_inv is None:
            X_prime_inv = _inv(X_prime)
            G_inv = np.block(
                [
                    [A_inv + A_inv @ B @ X_prime_inv @ B.T @ A_inv, -A_inv @ B @ X_prime_inv],
                    [-X_prime_inv @ B.T @ A_inv, X_prime_inv],
                ]
            )
    if report["det_route_c"] is not None and report["det_route_a"] is not None:
        reference = max(abs(report["det_route_c"]), abs(report["det_route_a"]), 1e-300)
        report["relative_difference"] = abs(report["det_route_c"] - report["det_route_a"]) / reference
        if report["relative_difference"] > AppConfig.DETERMINANT_CROSSCHECK_TOL:
            logger.warning("factorizaciones de det G discrepantes: %.3e", report["relative_difference"])
    else:
        logger.warning("solo una factorización de det G disponible")
    detG = report["det_route_c"] if report["det_route_c"] is not None else report["det_route_a"]
    return G_inv, detG, report


def build_distribution(
    times_x: Sequence[float],
    times_p: Sequence[float],
    evaluator: GreensEvaluator,
    path: Optional[ClassicalPath] = None,
    params: PhysicalParams = None,
    omega_ref: float = 1.0,
    mode: str = "fresnel",
) -> SmearingDistribution:
    """
    Construye la distribución para posiciones en times_x y momentos en times_p.

    Raises:
        ModeError: modo desconocido o covarianza euclídea no definida positiva
        SingularBlocksError: A y C singulares
    """
    params = params or PhysicalParams()
    if mode not in MODES:
        raise ModeError(f"modo desconocido: {mode!r}")
    if evaluator.representation not in ("dirichlet_x", "periodic"):
        raise DomainError("la fórmula de difuminado usa las representaciones dirichlet_x o periodic")
    if not (math.isfinite(omega_ref) and omega_ref > 0):
        raise DomainError("omega_ref debe ser positivo")
    tx = np.asarray(times_x, dtype=float)
    tp = np.asarray(times_p, dtype=float)
    n, m = len(tx), len(tp)
    if n + m == 0:
        raise DomainError("se necesita al menos un tiempo de inserción")

    A = omega_ref * np.asarray(evaluator.green("jj", tx[:, None], tx[None, :])).reshape(n, n)
    C = np.asarray(evaluator.green("kk", tp[:, None], tp[None, :])).reshape(m, m) / omega_ref
    B = -np.asarray(evaluator.green("jk", tx[:, None], tp[None, :])).reshape(n, m)
    G = np.block([[A, B], [B.T, C]])
    G_inv, detG, report = _block_inverse(A, B, C)

    if mode == "euclidean":
        try:
            linalg.cholesky(G, lower=True)
        except linalg.LinAlgError as e:
            raise ModeError("la covarianza euclídea no es definida positiva") from e

    mean = np.zeros(n + m)
    if path is not None:
        if n:
            mean[:n] = np.asarray(path(tx)[0])
        if m:
            mean[n:] = np.asarray(path(tp)[1])
    scale_x = math.sqrt(params.hbar / (params.mass * omega_ref))
    scale_p = -math.sqrt(params.hbar * params.mass * omega_ref)
    scales = np.concatenate([np.full(n, scale_x), np.full(m, scale_p)])
    # centro adimensional: (√(MΩ/ħ)·x_cl, −p_cl/√(ħMΩ))
    w = mean / scales
    logger.debug("distribución N=%d, M=%d, modo %s, det G=%.6e", n, m, mode, detG)
    return SmearingDistribution(
        n_positions=n,
        n_momenta=m,
        times=tuple(tx) + tuple(tp),
        w=w,
        G=G,
        G_inv=G_inv,
        detG=detG,
        mode=mode,
        omega_ref=float(omega_ref),
        mean=mean,
        scales=scales,
        params=params,
        det_crosscheck=report,
    )


def _moment_function(mean: np.ndarray, covariance: np.ndarray):
    """E[∏ y_i^{k_i}] de una gaussiana por la recursión de Isserlis con media"""

    @lru_cache(maxsize=None)
    def moment(counts: Tuple[int, ...]) -> complex:
        if not any(counts):
            return 1.0 + 0j
        a = next(i for i, k in enumerate(counts) if k)
        reduced = list(counts)
        reduced[a] -= 1
        total = mean[a] * moment(tuple(reduced)) if mean[a] != 0 else 0j
        for b, k in enumerate(reduced):
            if k:
                paired = list(reduced)
                paired[b] -= 1
                total += k * covariance[a, b] * moment(tuple(paired))
        return total

    return moment


def moments(dist: SmearingDistribution, multi_index: Sequence[int], central: bool = False) -> complex:
    """
    ⟨∏ y_i^{k_i}⟩ con y = (x_1..x_N, p_1..p_M).

    Con ``central`` los momentos son respecto de la trayectoria clásica y
    los de orden impar se anulan.
    """
    multi_index = tuple(int(k) for k in multi_index)
    if len(multi_index) != dist.size or any(k < 0 for k in multi_index):
        raise DomainError("el multiíndice necesita un orden no negativo por variable")
    if sum(multi_index) > AppConfig.MAX_MOMENT_ORDER:
        raise QuadratureSizeError(f"orden de momento máximo {AppConfig.MAX_MOMENT_ORDER}")
    mean = np.zeros(dist.size) if central else dist.mean
    return complex(_moment_function(mean, dist.covariance)(multi_index))


def _polynomial_expectation(dist: SmearingDistribution, functions: Sequence[LocalFunction]) -> complex:
    moment = _moment_function(dist.mean, dist.covariance)
    total = 0j
    for powers in itertools.product(*(range(len(f.coefficients)) for f in functions)):
        coeff = np.prod([f.coefficients[k] for f, k in zip(functions, powers)])
        if coeff != 0:
            total += coeff * moment(powers)
    return total


def _quadrature_expectation(dist: SmearingDistribution, functions: Sequence[LocalFunction]) -> complex:
    """Gauss-Hermite tensorial: y = μ + √2·L·z, pesos/π^{d/2}"""
    d = dist.size
    if d > AppConfig.MAX_QUADRATURE_AXES:
        raise QuadratureSizeError(f"la cuadratura admite como máximo {AppConfig.MAX_QUADRATURE_AXES} ejes")
    nodes, weights = np.polynomial.hermite.hermgauss(AppConfig.GAUSS_HERMITE_ORDER)
    covariance = dist.covariance.real
    factor = linalg.cholesky(covariance, lower=True)
    grids = np.meshgrid(*([nodes] * d), indexing="ij")
    z = np.stack([g.ravel() for g in grids])
    w = np.ones(z.shape[1])
    for wg in np.meshgrid(*([weights] * d), indexing="ij"):
        w = w * wg.ravel()
    y = dist.mean[:, None] + math.sqrt(2.0) * factor @ z
    integrand = np.ones(z.shape[1])
    for i, f in enumerate(functions):
        integrand = integrand * f(y[i])
    return complex(np.sum(w * integrand) / math.pi ** (d / 2))


def expectation(dist: SmearingDistribution, functions: Sequence[LocalFunction]) -> complex:
    """
    ⟨F_1(y_1)···F_{N+M}(y_{N+M})⟩; una función por variable, posiciones primero.

    Raises:
        ModeError: función no polinómica en modo fresnel
        QuadratureSizeError: más de MAX_QUADRATURE_AXES ejes de cuadratura
    """
    if len(functions) != dist.size:
        raise DomainError("se necesita una función por tiempo de inserción")
    for i, f in enumerate(functions):
        expected = "position" if i < dist.n_positions else "momentum"
        if f.argument != expected:
            raise DomainError(f"la función {i} debe tomar un argumento de tipo {expected}")
    if all(f.kind == "polynomial" for f in functions):
        return _polynomial_expectation(dist, functions)
    if dist.mode == "fresnel":
        raise ModeError("el modo fresnel solo admite funciones polinómicas")
    for f in functions:
        if f.kind == "gaussian" and f.coefficients[0] <= 0:
            raise DomainError("una gaussiana euclídea necesita a > 0")
    return _quadrature_expectation(dist, functions)
