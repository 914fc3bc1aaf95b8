"""
Modelo: perfiles de frecuencia Ω(t) y parámetros físicos (M, ħ)

Los perfiles guardan Ω(t) y calculan Ω²(t) bajo demanda. La variante
``omega_squared_table`` guarda directamente Ω² para representar regímenes
invertidos (Ω² < 0).
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly

from config import AppConfig
from models.errors import DomainError

logger = logging.getLogger(__name__)

PROFILE_KINDS = (
    "constant",
    "piecewise_constant",
    "polynomial",
    "tabulated",
    "omega_squared_table",
)


def _floats(values) -> Tuple[float, ...]:
    return tuple(float(v) for v in values)


def _all_finite(values) -> bool:
    return all(math.isfinite(v) for v in values)


@dataclass(frozen=True)
class PhysicalParams:
    """Masa M y constante de Planck reducida ħ"""

    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("mass", "hbar"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} debe ser positivo y finito, recibido {value!r}")


@dataclass(frozen=True)
class FrequencyProfile:
    """
    Perfil de frecuencia sobre [t_a, t_b].

    Campos según ``kind``:
        constant: coefficients = (ω,)
        piecewise_constant: breakpoints interiores y values (uno más que breakpoints),
            continuo por la derecha
        polynomial: coefficients en potencias ascendentes de t
        tabulated: breakpoints = tiempos, values = Ω en esos tiempos
        omega_squared_table: breakpoints = tiempos, values = Ω² en esos tiempos

    ``coupling`` es el factor g que multiplica a Ω² (familia del flujo en g).
    """

    kind: str
    t_a: float
    t_b: float
    coefficients: Tuple[float, ...] = ()
    breakpoints: Tuple[float, ...] = ()
    values: Tuple[float, ...] = ()
    coupling: float = 1.0

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise DomainError(f"tipo de perfil desconocido: {self.kind!r}")
        if not (math.isfinite(self.t_a) and math.isfinite(self.t_b)):
            raise DomainError("t_a y t_b deben ser finitos")
        if not self.t_a < self.t_b:
            raise DomainError(f"se requiere t_a < t_b, recibido [{self.t_a}, {self.t_b}]")
        if not (math.isfinite(self.coupling) and self.coupling >= 0):
            raise DomainError(f"acoplamiento g inválido: {self.coupling!r}")
        if not _all_finite(self.coefficients + self.breakpoints + self.values):
            raise DomainError("los parámetros del perfil deben ser finitos")
        self._validate_shape()

    def _validate_shape(self):
        if self.kind == "constant":
            if len(self.coefficients) != 1:
                raise DomainError("un perfil constante lleva exactamente un parámetro omega")
        elif self.kind == "polynomial":
            if not self.coefficients:
                raise DomainError("un perfil polinómico necesita al menos un coeficiente")
        elif self.kind == "piecewise_constant":
            if len(self.values) != len(self.breakpoints) + 1:
                raise DomainError("piecewise_constant necesita len(values) == len(breakpoints) + 1")
            if np.any(np.diff(self.breakpoints) <= 0):
                raise DomainError("los puntos de ruptura deben ser estrictamente crecientes")
            if any(not (self.t_a < s < self.t_b) for s in self.breakpoints):
                raise DomainError("los puntos de ruptura deben estar en (t_a, t_b)")
        else:
            if len(self.breakpoints) < 2 or len(self.breakpoints) != len(self.values):
                raise DomainError("una tabla necesita al menos 2 muestras (t, valor)")
            if np.any(np.diff(self.breakpoints) <= 0):
                raise DomainError("los tiempos tabulados deben ser estrictamente crecientes")

    # Constructores

    @classmethod
    def constant(cls, omega, t_a, t_b) -> "FrequencyProfile":
        return cls("constant", float(t_a), float(t_b), coefficients=(float(omega),))

    @classmethod
    def piecewise_constant(cls, breakpoints, values, t_a, t_b) -> "FrequencyProfile":
        return cls(
            "piecewise_constant",
            float(t_a),
            float(t_b),
            breakpoints=_floats(breakpoints),
            values=_floats(values),
        )

    @classmethod
    def polynomial(cls, coefficients, t_a, t_b) -> "FrequencyProfile":
        return cls("polynomial", float(t_a), float(t_b), coefficients=_floats(coefficients))

    @classmethod
    def tabulated(cls, times, omegas, t_a, t_b) -> "FrequencyProfile":
        return cls(
            "tabulated", float(t_a), float(t_b), breakpoints=_floats(times), values=_floats(omegas)
        )

    @classmethod
    def omega_squared_table(cls, times, omega_squared, t_a, t_b) -> "FrequencyProfile":
        return cls(
            "omega_squared_table",
            float(t_a),
            float(t_b),
            breakpoints=_floats(times),
            values=_floats(omega_squared),
        )

    @classmethod
    def from_config(cls, kind: str, params: Dict, t_a: float, t_b: float) -> "FrequencyProfile":
        """
        Construye un perfil a partir de la sección ``profile`` del documento.

        Raises:
            DomainError: si faltan claves o los valores violan los invariantes
        """
        expected = {
            "constant": ("omega",),
            "piecewise_constant": ("breakpoints", "values"),
            "polynomial": ("coefficients",),
            "tabulated": ("times", "omegas"),
            "omega_squared_table": ("times", "omega_squared"),
        }
        if kind not in expected:
            raise DomainError(f"tipo de perfil desconocido: {kind!r}")
        keys = set(params)
        if keys != set(expected[kind]):
            raise DomainError(
                f"parámetros de '{kind}' esperados {sorted(expected[kind])}, recibidos {sorted(keys)}"
            )
        try:
            if kind == "constant":
                return cls.constant(params["omega"], t_a, t_b)
            if kind == "piecewise_constant":
                return cls.piecewise_constant(params["breakpoints"], params["values"], t_a, t_b)
            if kind == "polynomial":
                return cls.polynomial(params["coefficients"], t_a, t_b)
            if kind == "tabulated":
                return cls.tabulated(params["times"], params["omegas"], t_a, t_b)
            return cls.omega_squared_table(params["times"], params["omega_squared"], t_a, t_b)
        except (TypeError, ValueError) as e:
            if isinstance(e, DomainError):
                raise
            raise DomainError(f"parámetros de perfil inválidos: {e}") from e

    def to_config(self) -> Dict:
        """Serializa el perfil (sin acoplamiento) en la forma que lee ``from_config``"""
        if self.coupling != 1.0:
            raise DomainError("solo se serializan perfiles con g = 1")
        if self.kind == "constant":
            params = {"omega": self.coefficients[0]}
        elif self.kind == "piecewise_constant":
            params = {"breakpoints": list(self.breakpoints), "values": list(self.values)}
        elif self.kind == "polynomial":
            params = {"coefficients": list(self.coefficients)}
        elif self.kind == "tabulated":
            params = {"times": list(self.breakpoints), "omegas": list(self.values)}
        else:
            params = {"times": list(self.breakpoints), "omega_squared": list(self.values)}
        return {"kind": self.kind, "params": params}

    def scaled(self, g: float) -> "FrequencyProfile":
        """Perfil con Ω² sustituido por g·Ω²"""
        return FrequencyProfile(
            self.kind,
            self.t_a,
            self.t_b,
            self.coefficients,
            self.breakpoints,
            self.values,
            self.coupling * float(g),
        )

    # Evaluación

    @property
    def duration(self) -> float:
        return self.t_b - self.t_a

    @property
    def caustic_tol(self) -> float:
        return AppConfig.CAUSTIC_TOL_FACTOR * self.duration

    def check_domain(self, t) -> np.ndarray:
        """Devuelve ``t`` como arreglo recortado a [t_a, t_b] o lanza DomainError"""
        arr = np.asarray(t, dtype=float)
        slack = AppConfig.DOMAIN_SLACK * self.duration
        if np.any(~np.isfinite(arr)) or np.any(arr < self.t_a - slack) or np.any(arr > self.t_b + slack):
            raise DomainError(f"tiempo fuera de [{self.t_a}, {self.t_b}]: {t!r}")
        return np.clip(arr, self.t_a, self.t_b)

    def _base_omega(self, t: np.ndarray, side: str) -> np.ndarray:
        if self.kind == "constant":
            return np.full_like(t, self.coefficients[0])
        if self.kind == "piecewise_constant":
            idx = np.searchsorted(self.breakpoints, t, side="right" if side == "right" else "left")
            return np.asarray(self.values)[idx]
        if self.kind == "polynomial":
            return npoly.polyval(t, self.coefficients)
        return np.interp(t, self.breakpoints, self.values)

    def _table_slope(self, t: np.ndarray) -> np.ndarray:
        times = np.asarray(self.breakpoints)
        slopes = np.diff(self.values) / np.diff(times)
        idx = np.clip(np.searchsorted(times, t, side="right") - 1, 0, len(times) - 2)
        inside = (t >= times[0]) & (t <= times[-1])
        return np.where(inside, slopes[idx], 0.0)

    def _base_omega_dot(self, t: np.ndarray) -> np.ndarray:
        if self.kind in ("constant", "piecewise_constant"):
            return np.zeros_like(t)
        if self.kind == "polynomial":
            return npoly.polyval(t, npoly.polyder(self.coefficients))
        return self._table_slope(t)

    def _require_amplitude(self):
        if self.kind == "omega_squared_table":
            raise DomainError("Ω no está definido para omega_squared_table; solo Ω²")

    def omega(self, t):
        self._require_amplitude()
        arr = self.check_domain(t)
        return _like(t, math.sqrt(self.coupling) * self._base_omega(arr, "right"))

    def omega_dot(self, t):
        """dΩ/dt; en los puntos de ruptura, derivada por la derecha"""
        self._require_amplitude()
        arr = self.check_domain(t)
        return _like(t, math.sqrt(self.coupling) * self._base_omega_dot(arr))

    def omega_squared(self, t, side: str = "right"):
        """Ω²(t); ``side`` elige el límite lateral en discontinuidades"""
        arr = self.check_domain(t)
        if self.kind == "omega_squared_table":
            return _like(t, self.coupling * np.interp(arr, self.breakpoints, self.values))
        base = self._base_omega(arr, side)
        return _like(t, self.coupling * base * base)

    def half_d_omega_squared(self, t):
        """Ω·Ω̇ = ½ d(Ω²)/dt, definido para todos los tipos"""
        arr = self.check_domain(t)
        if self.kind == "omega_squared_table":
            return _like(t, 0.5 * self.coupling * self._table_slope(arr))
        return _like(t, self.coupling * self._base_omega(arr, "right") * self._base_omega_dot(arr))

    def jumps(self) -> List[Tuple[float, float]]:
        """Saltos (s, ΔΩ²) de los perfiles constantes a trozos"""
        if self.kind != "piecewise_constant":
            return []
        v = self.values
        return [(s, self.coupling * (v[i + 1] ** 2 - v[i] ** 2)) for i, s in enumerate(self.breakpoints)]


def _like(t, result: np.ndarray):
    return float(result) if np.ndim(t) == 0 else result


def evaluate_omega(profile: FrequencyProfile, t):
    return profile.omega(t)


def evaluate_omega_squared(profile: FrequencyProfile, t):
    return profile.omega_squared(t)


def evaluate_omega_derivative(profile: FrequencyProfile, t):
    return profile.omega_dot(t)
