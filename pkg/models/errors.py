"""
Jerarquía de errores de cálculo.

Cada clase declara una ``category`` que la línea de comandos imprime en el
flujo de diagnóstico.
"""


class OscillatorError(Exception):
    """Error base de todos los cálculos del oscilador"""

    category = "computation"


class DomainError(OscillatorError, ValueError):
    """Tiempo fuera de [t_a, t_b] o parámetros inválidos"""

    category = "domain"


class IntegrationError(OscillatorError):
    """Valor no finito de Ω² durante la integración"""

    category = "integration"

    def __init__(self, t, message=None):
        self.t = float(t)
        super().__init__(message or f"Ω² no finito en t={self.t!r}")


class CausticError(OscillatorError):
    """Denominador nulo: D_a(t_b), 1 + Ḋ_a(t_b)Ḋ_b(t_a) o a(t_a, t_b)"""

    category = "caustic"

    def __init__(self, denominator, value, tolerance):
        self.denominator = denominator
        self.value = float(value)
        self.tolerance = float(tolerance)
        super().__init__(
            f"cáustica: |{denominator}| = {abs(self.value):.3e} <= {self.tolerance:.3e}"
        )


class ParityError(OscillatorError, ValueError):
    category = "parity"


class MissingDerivativeError(OscillatorError, KeyError):
    category = "missing_derivative"

    def __str__(self):
        return str(self.args[0]) if self.args else "derivada ausente"


class ModeError(OscillatorError):
    category = "mode"


class QuadratureSizeError(OscillatorError):
    category = "size"


class SingularBlocksError(OscillatorError, NotImplementedError):
    category = "singular_blocks"


class LatticeError(OscillatorError):
    category = "lattice"
