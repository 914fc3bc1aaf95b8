"""
Modelo: combinatoria de Wick para valores esperados armónicos

Las expresiones son sumas de términos con coeficiente racional exacto
(sympy), un multiconjunto de propagadores etiquetados por canal y pareja
de etiquetas temporales, y el orden de derivada de una función simbólica F.

Diccionario de contracciones:
    ⟨x̃(1) x̃(2)⟩ = (iħ/M)·G_jj(1,2)
    ⟨x̃(1) p̃(2)⟩ = iħ·G_jk(1,2)
    ⟨p̃(1) p̃(2)⟩ = iħM·G_kk(1,2)
"""
import logging
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterator, List, Mapping, Sequence, Tuple

import sympy

from models.errors import DomainError, MissingDerivativeError, ParityError
from models.frequency import PhysicalParams

logger = logging.getLogger(__name__)

Letter = Tuple[str, int]  # (tipo 'x' | 'p', etiqueta temporal)
Propagator = Tuple[str, Tuple[int, int]]
TermKey = Tuple[Tuple[Propagator, ...], Tuple[Tuple[int, int], ...]]

RULES = {
    # regla: (tipo del argumento de F, tipo de la potencia)
    "xx": ("x", "x"),
    "xp": ("x", "p"),
    "pp": ("p", "p"),
    "px": ("p", "x"),
}


@dataclass(frozen=True)
class OperatorWord:
    """Producto ordenado de letras x/p con etiqueta temporal"""

    letters: Tuple[Letter, ...] = ()

    def __post_init__(self):
        for kind, label in self.letters:
            if kind not in ("x", "p"):
                raise DomainError(f"letra desconocida: {kind!r}")
            if int(label) != label:
                raise DomainError(f"etiqueta temporal no entera: {label!r}")

    @classmethod
    def of(cls, *letters: Letter) -> "OperatorWord":
        return cls(tuple((kind, int(label)) for kind, label in letters))

    @classmethod
    def power(cls, kind: str, n: int, label: int) -> "OperatorWord":
        return cls(((kind, label),) * n)

    @classmethod
    def parse(cls, text: str, label: int = 1) -> "OperatorWord":
        """Lee monomios como ``x^4`` o ``x^2 p^2`` con una sola etiqueta"""
        letters: List[Letter] = []
        for token in text.replace("*", " ").split():
            kind, _, exponent = token.partition("^")
            if kind not in ("x", "p"):
                raise DomainError(f"monomio inválido: {text!r}")
            try:
                count = int(exponent) if exponent else 1
            except ValueError as e:
                raise DomainError(f"exponente inválido en {token!r}") from e
            if count < 0:
                raise DomainError(f"exponente negativo en {token!r}")
            letters.extend([(kind, label)] * count)
        return cls(tuple(letters))

    def __add__(self, other: "OperatorWord") -> "OperatorWord":
        return OperatorWord(self.letters + other.letters)

    def __len__(self):
        return len(self.letters)


def contraction(first: Letter, second: Letter) -> Propagator:
    """Propagador canónico de la contracción de dos letras (kj pasa a jk)"""
    (k1, l1), (k2, l2) = first, second
    if k1 == k2:
        channel = "jj" if k1 == "x" else "kk"
        return channel, tuple(sorted((l1, l2)))
    if k1 == "x":
        return "jk", (l1, l2)
    return "jk", (l2, l1)


def _key(propagators, f_derivatives) -> TermKey:
    return tuple(sorted(propagators)), tuple(sorted(f_derivatives))


@dataclass(frozen=True)
class WickExpression:
    """Suma canónica de términos; la igualdad es sintáctica"""

    terms: Tuple[Tuple[TermKey, sympy.Rational], ...] = ()

    @classmethod
    def from_counter(cls, accumulated: Mapping[TermKey, sympy.Rational]) -> "WickExpression":
        items = tuple(
            (key, sympy.Rational(coeff)) for key, coeff in sorted(accumulated.items()) if coeff != 0
        )
        return cls(items)

    @classmethod
    def term(cls, coeff, propagators=(), f_derivatives=()) -> "WickExpression":
        return cls.from_counter({_key(propagators, f_derivatives): sympy.Rational(coeff)})

    def as_dict(self) -> Dict[TermKey, sympy.Rational]:
        return dict(self.terms)

    def __add__(self, other: "WickExpression") -> "WickExpression":
        accumulated = Counter(self.as_dict())
        for key, coeff in other.terms:
            accumulated[key] = accumulated.get(key, 0) + coeff
        return WickExpression.from_counter(accumulated)

    def __len__(self):
        return len(self.terms)

    def __iter__(self) -> Iterator[Tuple[TermKey, sympy.Rational]]:
        return iter(self.terms)

    def coefficients(self) -> List[sympy.Rational]:
        return [coeff for _, coeff in self.terms]

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for (propagators, f_derivatives), coeff in self.terms:
            factors = [f"G_{ch}({a},{b})" for ch, (a, b) in propagators]
            factors += [f"F{'′' * order if order < 4 else f'^({order})'}[{label}]" for label, order in f_derivatives]
            parts.append(" ".join([str(coeff)] + factors))
        return " + ".join(parts)


def enumerate_pairings(word: OperatorWord) -> List[List[Tuple[int, int]]]:
    """
    Todos los emparejamientos perfectos de los índices de la palabra, en
    orden lexicográfico. Longitud impar → lista vacía.
    """
    n = len(word)
    if n % 2:
        return []

    def pairings(items):
        if not items:
            yield []
            return
        first = items[0]
        for i in range(1, len(items)):
            rest = items[1:i] + items[i + 1 :]
            for tail in pairings(rest):
                yield [(first, items[i])] + tail

    return list(pairings(list(range(n))))


def pairing_expression(word: OperatorWord, pairing) -> WickExpression:
    propagators = [contraction(word.letters[i], word.letters[j]) for i, j in pairing]
    return WickExpression.term(1, propagators)


def wick_expand(word: OperatorWord) -> WickExpression:
    """Suma sobre todos los emparejamientos de la palabra"""
    accumulated: Counter = Counter()
    for pairing in enumerate_pairings(word):
        propagators = [contraction(word.letters[i], word.letters[j]) for i, j in pairing]
        accumulated[_key(propagators, ())] += 1
    return WickExpression.from_counter(accumulated)


def _double_factorial(k: int) -> sympy.Integer:
    return sympy.Integer(1) if k <= 0 else sympy.factorial2(k)


def multiplicity_c(n: int, m: int, l: int) -> sympy.Rational:
    """
    Número de emparejamientos de xⁿ(1)·x^m(2) con exactamente l contracciones cruzadas:

        c_l = (n−l−1)!!·(m−l−1)!!·n!·m! / (l!·(n−l)!·(m−l)!)
    """
    if not (0 <= l <= min(n, m)) or (n + m) % 2 or (n - l) % 2:
        raise ParityError(f"paridad inválida para c_l: n={n}, m={m}, l={l}")
    numerator = (
        _double_factorial(n - l - 1)
        * _double_factorial(m - l - 1)
        * sympy.factorial(n)
        * sympy.factorial(m)
    )
    return sympy.Rational(numerator, sympy.factorial(l) * sympy.factorial(n - l) * sympy.factorial(m - l))


def mixed_two_point(n: int, m: int, ch_pair: Tuple[str, str]) -> WickExpression:
    """⟨a(1)ⁿ b(2)^m⟩ en forma cerrada con los factores c_l"""
    kind1, kind2 = ch_pair
    if (n + m) % 2:
        return WickExpression()
    first, second = (kind1, 1), (kind2, 2)
    self_first = contraction(first, first)
    self_second = contraction(second, second)
    cross = contraction(first, second)
    accumulated: Counter = Counter()
    for l in range(n % 2, min(n, m) + 1, 2):
        propagators = (
            [self_first] * ((n - l) // 2) + [cross] * l + [self_second] * ((m - l) // 2)
        )
        accumulated[_key(propagators, ())] += multiplicity_c(n, m, l)
    return WickExpression.from_counter(accumulated)


def _rule_propagators(f_label: int, power_label: int, rule: str):
    if rule not in RULES:
        raise DomainError(f"regla desconocida: {rule!r}")
    f_kind, power_kind = RULES[rule]
    power = (power_kind, power_label)
    return contraction(power, power), contraction((f_kind, f_label), power)


def derivative_rule(f_label: int, n: int, rule: str, power_label: int = None) -> WickExpression:
    """
    ⟨F(a(1))·bⁿ(2)⟩ = Σ_l n!/((n−l)!!·l!)·⟨bb⟩^((n−l)/2)·⟨ab⟩^l·⟨F^(l)⟩
    """
    if n < 0:
        raise DomainError("n debe ser no negativo")
    power_label = f_label + 1 if power_label is None else power_label
    self_prop, cross_prop = _rule_propagators(f_label, power_label, rule)
    accumulated: Counter = Counter()
    for l in range(n % 2, n + 1, 2):
        coeff = sympy.Rational(sympy.factorial(n), _double_factorial(n - l) * sympy.factorial(l))
        propagators = [self_prop] * ((n - l) // 2) + [cross_prop] * l
        accumulated[_key(propagators, ((f_label, l),))] += coeff
    return WickExpression.from_counter(accumulated)


def derivative_rule_from_generating_function(
    f_label: int, n: int, rule: str, power_label: int = None
) -> WickExpression:
    """
    Coeficiente n!·[jⁿ] de exp(⟨bb⟩·j²/2)·Σ_l (⟨ab⟩·j)^l·F^(l)/l!.
    """
    power_label = f_label + 1 if power_label is None else power_label
    self_prop, cross_prop = _rule_propagators(f_label, power_label, rule)
    j, s, c = sympy.symbols("j s c")
    derivatives = sympy.symbols(f"F0:{n + 1}")
    generating = sympy.exp(s * j**2 / 2) * sum(
        (c * j) ** l * derivatives[l] / sympy.factorial(l) for l in range(n + 1)
    )
    coefficient = sympy.expand(sympy.diff(generating, j, n).subs(j, 0))
    accumulated: Counter = Counter()
    if coefficient == 0:
        return WickExpression()
    poly = sympy.Poly(coefficient, s, c, *derivatives)
    for exponents, coeff in poly.terms():
        s_power, c_power, *f_powers = exponents
        order = f_powers.index(1)
        propagators = [self_prop] * s_power + [cross_prop] * c_power
        accumulated[_key(propagators, ((f_label, order),))] += coeff
    return WickExpression.from_counter(accumulated)


def generalized_wick_reduce(f_letter: Letter, word: OperatorWord) -> WickExpression:
    """
    Reduce ⟨F(f_letter)·word⟩ contrayendo la primera letra de la palabra con
    otra letra (las letras idénticas se agrupan con su multiplicidad) o con
    F, lo que sube en uno el orden de derivada, hasta agotar la palabra.
    """
    f_kind, f_label = f_letter

    @lru_cache(maxsize=None)
    def reduce(letters: Tuple[Letter, ...], order: int) -> Tuple[Tuple[TermKey, sympy.Rational], ...]:
        if not letters:
            return ((_key((), ((f_label, order),)), sympy.Integer(1)),)
        head, rest = letters[0], letters[1:]
        accumulated: Counter = Counter()
        for partner, count in Counter(rest).items():
            remaining = list(rest)
            remaining.remove(partner)
            for (props, fders), coeff in reduce(tuple(remaining), order):
                accumulated[_key(props + (contraction(head, partner),), fders)] += count * coeff
        for (props, fders), coeff in reduce(rest, order + 1):
            accumulated[_key(props + (contraction(f_letter, head),), fders)] += coeff
        return tuple(accumulated.items())

    if f_kind not in ("x", "p"):
        raise DomainError(f"letra desconocida: {f_kind!r}")
    return WickExpression.from_counter(dict(reduce(tuple(word.letters), 0)))


# Diagramas de segundo orden


@dataclass(frozen=True)
class DiagramSignature:
    """
    Grafo de dos vértices: aristas v1—v2 (jj, kk, jk = x en v1 y p en v2,
    kj = p en v1 y x en v2) y lazos en cada vértice, canónico bajo el
    intercambio de vértices.
    """

    edges: Tuple[str, ...]
    loops_v1: Tuple[str, ...]
    loops_v2: Tuple[str, ...]
    multiplicity: int = 0

    @property
    def key(self):
        return self.edges, self.loops_v1, self.loops_v2


_SWAP_EDGE = {"jj": "jj", "kk": "kk", "jk": "kj", "kj": "jk"}


def _loop_channel(first: str, second: str) -> str:
    kinds = "".join(sorted((first, second)))
    return {"xx": "jj", "pp": "kk", "px": "jk"}[kinds]


def _edge_channel(kind_v1: str, kind_v2: str) -> str:
    return {"x": "j", "p": "k"}[kind_v1] + {"x": "j", "p": "k"}[kind_v2]


def _canonical_signature(edges, loops_v1, loops_v2):
    direct = (tuple(sorted(edges)), tuple(sorted(loops_v1)), tuple(sorted(loops_v2)))
    swapped = (
        tuple(sorted(_SWAP_EDGE[e] for e in edges)),
        tuple(sorted(loops_v2)),
        tuple(sorted(loops_v1)),
    )
    return min(direct, swapped)


def connected_census(vertex_word: OperatorWord, order: int = 2) -> List[DiagramSignature]:
    """
    Emparejamientos conexos de la palabra duplicada agrupados por firma.

    Raises:
        DomainError: si order != 2
    """
    if order != 2:
        raise DomainError("solo se agrupan por firma los diagramas de segundo orden")
    kinds = [kind for kind, _ in vertex_word.letters]
    size = len(kinds)
    doubled = OperatorWord(tuple((k, 1) for k in kinds) + tuple((k, 2) for k in kinds))
    counts: Counter = Counter()
    for pairing in enumerate_pairings(doubled):
        edges, loops_v1, loops_v2 = [], [], []
        for i, j in pairing:
            in_v1, in_v2 = i < size, j < size
            if in_v1 and in_v2:
                loops_v1.append(_loop_channel(kinds[i], kinds[j]))
            elif not in_v1 and not in_v2:
                loops_v2.append(_loop_channel(kinds[i - size], kinds[j - size]))
            else:
                edges.append(_edge_channel(kinds[i], kinds[j - size]))
        if edges:
            counts[_canonical_signature(edges, loops_v1, loops_v2)] += 1
    logger.debug("censo de %s: %d firmas conexas", kinds, len(counts))
    return [
        DiagramSignature(edges, loops_v1, loops_v2, multiplicity)
        for (edges, loops_v1, loops_v2), multiplicity in sorted(counts.items())
    ]


def disconnected_count(vertex_word: OperatorWord) -> int:
    """Emparejamientos sin aristas entre vértices: ((L−1)!!)²"""
    size = len(vertex_word)
    if size % 2:
        return 0
    return int(_double_factorial(size - 1)) ** 2


def _grouped(channels: Sequence[str]) -> str:
    return ", ".join(
        f"{ch}×{count}" if count > 1 else ch for ch, count in sorted(Counter(channels).items())
    )


def render_signature(signature: DiagramSignature) -> str:
    parts = [f"v1—v2: {_grouped(signature.edges)}"]
    if signature.loops_v1:
        parts.append(f"v1-loop: {_grouped(signature.loops_v1)}")
    if signature.loops_v2:
        parts.append(f"v2-loop: {_grouped(signature.loops_v2)}")
    return f"{signature.multiplicity} × [{'; '.join(parts)}]"


# Evaluación numérica


def contraction_value(
    evaluator, propagator: Propagator, label_times: Mapping[int, float], params: PhysicalParams
) -> complex:
    channel, (l1, l2) = propagator
    value = evaluator.green(channel, label_times[l1], label_times[l2])
    if channel == "jj":
        return 1j * params.hbar / params.mass * value
    if channel == "kk":
        return 1j * params.hbar * params.mass * value
    return 1j * params.hbar * value


def evaluate_expression(
    expr: WickExpression,
    evaluator,
    label_times: Mapping[int, float],
    params: PhysicalParams = None,
    f_table: Mapping[int, complex] = None,
) -> complex:
    """
    Sustituye el diccionario de contracciones y los valores ⟨F^(l)⟩.

    Raises:
        MissingDerivativeError: si f_table no contiene un orden requerido
    """
    params = params or PhysicalParams()
    f_table = f_table or {}
    cache: Dict[Propagator, complex] = {}
    total = 0j
    for (propagators, f_derivatives), coeff in expr:
        product = complex(float(coeff))
        for propagator in propagators:
            if propagator not in cache:
                cache[propagator] = contraction_value(evaluator, propagator, label_times, params)
            product *= cache[propagator]
        for _, order in f_derivatives:
            if order not in f_table:
                raise MissingDerivativeError(f"falta ⟨F^({order})⟩ en la tabla de derivadas")
            product *= complex(f_table[order])
        total += product
    return total


def printed_coefficient_discrepancy() -> Dict[str, object]:
    """
    Compara el coeficiente l=0 impreso para ⟨F(x̃(1)) x̃⁴(2)⟩ (1) con el que
    da la enumeración de contracciones.
    """
    reduced = generalized_wick_reduce(("x", 1), OperatorWord.power("x", 4, 2))
    self_prop = contraction(("x", 2), ("x", 2))
    key = _key([self_prop, self_prop], ((1, 0),))
    enumerated = int(reduced.as_dict().get(key, 0))
    return {
        "name": "derivative_rule_x4_l0_coefficient",
        "printed": 1,
        "enumerated": enumerated,
        "formula": int(sympy.factorial(4) / (_double_factorial(4) * sympy.factorial(0))),
    }
