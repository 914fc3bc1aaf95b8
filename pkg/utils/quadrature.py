"""
Utilidades de cuadratura sobre la malla uniforme compartida
"""
import numpy as np
from scipy.integrate import cumulative_simpson, simpson
from scipy.interpolate import CubicHermiteSpline


def integrate(values, grid) -> float:
    """Regla de Simpson compuesta sobre la malla"""
    return float(simpson(np.asarray(values), x=grid))


def cumulative(values, grid) -> np.ndarray:
    """Integral acumulada ∫_{t_0}^{t_i} con Simpson, empezando en 0"""
    return cumulative_simpson(np.asarray(values), x=grid, initial=0.0)


class PartialIntegral:
    """
    Integral acumulada F(t) = ∫_{t_a}^{t} f(s) ds evaluable en cualquier t.

    Entre nodos se interpola con un polinomio de Hermite cúbico que usa
    F en los nodos y F' = f, de modo que los puntos fuera de la malla
    conservan el orden de la regla de Simpson.
    """

    def __init__(self, values, grid):
        values = np.asarray(values, dtype=float)
        self._cumulative = cumulative(values, grid)
        self._spline = CubicHermiteSpline(grid, self._cumulative, values)

    @property
    def total(self) -> float:
        return float(self._cumulative[-1])

    def below(self, t):
        """∫_{t_a}^{t}"""
        return self._spline(t)

    def above(self, t):
        """∫_{t}^{t_b}"""
        return self.total - self._spline(t)
