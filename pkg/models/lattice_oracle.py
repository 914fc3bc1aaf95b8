"""
Modelo: oráculo discreto en red

K̂ = −∂²_t − Ω²(t) se discretiza en N nodos interiores con filas de
Dirichlet: matriz tridiagonal simétrica con diagonal 2/h² − Ω²(t_i) y
codiagonal −1/h². La función de Green de red es (K⁻¹)_ij / h.
"""
import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.linalg import solve_banded

from config import AppConfig
from models.errors import DomainError, LatticeError
from models.frequency import FrequencyProfile
from models.wick import OperatorWord, enumerate_pairings

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LatticeOperator:
    n_nodes: int
    h: float
    t_a: float
    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        if self.n_nodes < AppConfig.MIN_LATTICE_NODES:
            raise DomainError(f"la red necesita al menos {AppConfig.MIN_LATTICE_NODES} nodos")
        if self.diag.shape != (self.n_nodes,) or self.offdiag.shape != (self.n_nodes - 1,):
            raise DomainError("dimensiones de la matriz tridiagonal incoherentes")

    @property
    def times(self) -> np.ndarray:
        return self.t_a + self.h * np.arange(1, self.n_nodes + 1)

    @property
    def banded(self) -> np.ndarray:
        ab = np.zeros((3, self.n_nodes))
        ab[0, 1:] = self.offdiag
        ab[1, :] = self.diag
        ab[2, :-1] = self.offdiag
        return ab


def build_lattice(profile: FrequencyProfile, n_nodes: int) -> LatticeOperator:
    h = profile.duration / (n_nodes + 1)
    times = profile.t_a + h * np.arange(1, n_nodes + 1)
    diag = 2.0 / h**2 - np.asarray(profile.omega_squared(times))
    offdiag = np.full(n_nodes - 1, -1.0 / h**2)
    return LatticeOperator(int(n_nodes), h, profile.t_a, diag, offdiag)


def _pivots(opr: LatticeOperator) -> np.ndarray:
    """Pivotes de la eliminación sin intercambio: r_k = d_k − e²_{k−1}/r_{k−1}"""
    tolerance = AppConfig.LATTICE_PIVOT_TOL * np.max(np.abs(opr.diag))
    pivots = np.empty(opr.n_nodes)
    pivots[0] = opr.diag[0]
    for k in range(1, opr.n_nodes):
        if abs(pivots[k - 1]) <= tolerance:
            break
        pivots[k] = opr.diag[k] - opr.offdiag[k - 1] ** 2 / pivots[k - 1]
    else:
        if abs(pivots[-1]) > tolerance:
            return pivots
    raise LatticeError("operador de red singular (cáustica discreta)")


def lattice_log_det(opr: LatticeOperator) -> Tuple[float, float]:
    """(signo, ln|det K|) por la recurrencia tridiagonal"""
    pivots = _pivots(opr)
    sign = float(np.prod(np.sign(pivots)))
    return sign, float(np.sum(np.log(np.abs(pivots))))


def lattice_log_det_ratio(opr1: LatticeOperator, opr2: LatticeOperator) -> float:
    """ln det K1 − ln det K2 sobre la misma red"""
    if opr1.n_nodes != opr2.n_nodes or not math.isclose(opr1.h, opr2.h):
        raise DomainError("los operadores deben compartir la red")
    sign1, log1 = lattice_log_det(opr1)
    sign2, log2 = lattice_log_det(opr2)
    if sign1 != sign2:
        raise LatticeError("la razón de determinantes es negativa")
    return log1 - log2


def lattice_gelfand_yaglom(opr: LatticeOperator) -> float:
    """h·h^{2N}·det K, cuyo límite continuo es D_a(t_b)"""
    sign, log_abs = lattice_log_det(opr)
    return sign * math.exp(log_abs + (2 * opr.n_nodes + 1) * math.log(opr.h))


def _check_index(opr: LatticeOperator, i: int):
    if not 0 <= i < opr.n_nodes:
        raise DomainError(f"índice de nodo fuera de rango: {i}")


def _green_columns(opr: LatticeOperator, columns: Sequence[int]) -> np.ndarray:
    """Columnas de K⁻¹ por resolución tridiagonal"""
    for i in columns:
        _check_index(opr, i)
    _pivots(opr)
    rhs = np.zeros((opr.n_nodes, len(columns)))
    rhs[list(columns), np.arange(len(columns))] = 1.0
    return solve_banded((1, 1), opr.banded, rhs)


def lattice_green_matrix(opr: LatticeOperator, indices: Sequence[int]) -> np.ndarray:
    """Submatriz (K⁻¹)_{ij}/h para los nodos dados"""
    return _green_columns(opr, indices)[list(indices), :] / opr.h


def lattice_green(opr: LatticeOperator, i: int, j: int) -> float:
    _check_index(opr, i)
    return float(_green_columns(opr, [j])[i, 0] / opr.h)


def lattice_gaussian_moments(opr: LatticeOperator, indices: Sequence[int]) -> float:
    """
    Momento ⟨x_{i1}···x_{in}⟩ de la gaussiana de media nula con covarianza
    la función de Green de red, sumando sobre emparejamientos.
    """
    if np.any(_pivots(opr) <= 0):
        raise LatticeError("el operador de red no es definido positivo")
    distinct = sorted(set(indices))
    position = {node: k for k, node in enumerate(distinct)}
    covariance = lattice_green_matrix(opr, distinct)
    word = OperatorWord(tuple(("x", int(i)) for i in indices))
    total = 0.0
    for pairing in enumerate_pairings(word):
        product = 1.0
        for a, b in pairing:
            product *= covariance[position[indices[a]], position[indices[b]]]
        total += product
    logger.debug("momento de red de orden %d: %.12g", len(indices), total)
    return total
