import math

import pytest
import sympy
from numpy.testing import assert_allclose

from models.errors import DomainError, MissingDerivativeError, ParityError
from models.frequency import PhysicalParams
from models.greens import GreensEvaluator
from models.wick import (
    OperatorWord,
    WickExpression,
    connected_census,
    derivative_rule,
    derivative_rule_from_generating_function,
    disconnected_count,
    enumerate_pairings,
    evaluate_expression,
    generalized_wick_reduce,
    mixed_two_point,
    multiplicity_c,
    printed_coefficient_discrepancy,
    render_signature,
    wick_expand,
)


def test_pairing_counts():
    assert len(enumerate_pairings(OperatorWord.power("x", 2, 1))) == 1
    assert len(enumerate_pairings(OperatorWord.power("x", 4, 1))) == 3
    assert len(enumerate_pairings(OperatorWord.power("p", 8, 1))) == 105
    assert enumerate_pairings(OperatorWord.power("x", 3, 1)) == []
    assert enumerate_pairings(OperatorWord()) == [[]]


def test_pairings_are_lexicographic():
    pairings = enumerate_pairings(OperatorWord.power("x", 4, 1))
    assert pairings == [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]]


@pytest.mark.parametrize(
    "n, m, l, expected",
    [(2, 2, 0, 1), (2, 2, 2, 2), (4, 4, 4, 24), (4, 4, 2, 72), (4, 4, 0, 9), (3, 1, 1, 3)],
)
def test_multiplicity_c(n, m, l, expected):
    assert multiplicity_c(n, m, l) == expected


@pytest.mark.parametrize("n, m, l", [(3, 2, 1), (2, 2, 1), (2, 2, 3)])
def test_multiplicity_c_rejects_bad_parity(n, m, l):
    with pytest.raises(ParityError):
        multiplicity_c(n, m, l)


def test_mixed_two_point_momentum_and_position():
    expected = WickExpression.term(3, [("kk", (1, 1)), ("jk", (2, 1))])
    assert mixed_two_point(3, 1, ("p", "x")) == expected


@pytest.mark.parametrize("kinds", [("x", "x"), ("x", "p"), ("p", "x"), ("p", "p")])
def test_mixed_two_point_matches_enumeration(kinds):
    for n in range(0, 5):
        for m in range(0, 5):
            word = OperatorWord.power(kinds[0], n, 1) + OperatorWord.power(kinds[1], m, 2)
            assert mixed_two_point(n, m, kinds) == wick_expand(word), (n, m)


def test_odd_total_order_vanishes():
    assert len(mixed_two_point(2, 1, ("x", "x"))) == 0
    assert str(wick_expand(OperatorWord.power("x", 3, 1))) == "0"


def test_derivative_rule_small_orders():
    assert derivative_rule(1, 1, "xx") == WickExpression.term(1, [("jj", (1, 2))], [(1, 1)])
    xp = derivative_rule(1, 2, "xp")
    assert xp.coefficients() == [1, 1]
    xx = derivative_rule(1, 4, "xx")
    assert sorted(xx.coefficients()) == [1, 3, 6]


@pytest.mark.parametrize("rule", ["xx", "xp", "pp", "px"])
def test_derivative_rule_matches_generalized_reduction(rule):
    f_kind, power_kind = {"xx": ("x", "x"), "xp": ("x", "p"), "pp": ("p", "p"), "px": ("p", "x")}[rule]
    for n in range(0, 7):
        reduced = generalized_wick_reduce((f_kind, 1), OperatorWord.power(power_kind, n, 2))
        assert derivative_rule(1, n, rule) == reduced, n


@pytest.mark.parametrize("rule", ["xx", "pp"])
def test_derivative_rule_matches_generating_function(rule):
    for n in range(0, 6):
        assert derivative_rule_from_generating_function(1, n, rule) == derivative_rule(1, n, rule), n


def test_generalized_reduction_with_mixed_word():
    word = OperatorWord.of(("x", 2), ("p", 3))
    reduced = generalized_wick_reduce(("x", 1), word)
    expected = WickExpression.term(1, [("jk", (2, 3))], [(1, 0)]) + WickExpression.term(
        1, [("jj", (1, 2)), ("jk", (1, 3))], [(1, 2)]
    )
    assert reduced == expected


def test_unknown_rule_is_rejected():
    with pytest.raises(DomainError):
        derivative_rule(1, 2, "xy")


def test_census_of_quadratic_vertex():
    census = connected_census(OperatorWord.parse("x^2"))
    assert [s.multiplicity for s in census] == [2]
    assert disconnected_count(OperatorWord.parse("x^2")) == 1


def test_census_of_quartic_vertex():
    word = OperatorWord.parse("x^4")
    census = connected_census(word)
    assert sorted(s.multiplicity for s in census) == [24, 72]
    assert sum(s.multiplicity for s in census) + disconnected_count(word) == 105
    rendered = {render_signature(s) for s in census}
    assert "72 × [v1—v2: jj×2; v1-loop: jj; v2-loop: jj]" in rendered
    assert "24 × [v1—v2: jj×4]" in rendered


def test_census_of_mixed_vertex():
    word = OperatorWord.parse("x^2 p^2")
    census = connected_census(word)
    assert sorted(s.multiplicity for s in census) == [2, 2, 4, 4, 4, 16, 16, 16, 16, 16]
    assert sum(s.multiplicity for s in census) == 96
    assert disconnected_count(word) == 9


def test_census_only_at_second_order():
    with pytest.raises(DomainError):
        connected_census(OperatorWord.parse("x^4"), order=3)


@pytest.mark.parametrize("text", ["y^2", "x^a", "x^-1"])
def test_parse_rejects_malformed_monomials(text):
    with pytest.raises(DomainError):
        OperatorWord.parse(text)


def test_parse_expands_exponents():
    assert OperatorWord.parse("x^2 p").letters == (("x", 1), ("x", 1), ("p", 1))
    assert OperatorWord.parse("x*p", label=3).letters == (("x", 3), ("p", 3))


def test_evaluate_two_point_function(quarter_pair):
    e = GreensEvaluator(quarter_pair)
    params = PhysicalParams(mass=2.0, hbar=0.5)
    expr = wick_expand(OperatorWord.of(("x", 1), ("x", 2)))
    value = evaluate_expression(expr, e, {1: 0.3, 2: 0.9}, params)
    assert_allclose(value, 1j * 0.5 / 2.0 * e.green("jj", 0.3, 0.9), rtol=1e-14)
    assert evaluate_expression(WickExpression(), e, {}) == 0


def test_evaluate_fourth_moment(quarter_pair):
    e = GreensEvaluator(quarter_pair)
    expr = wick_expand(OperatorWord.power("x", 4, 1))
    t = math.pi / 4
    assert_allclose(evaluate_expression(expr, e, {1: t}), 3 * (1j * 0.5) ** 2, rtol=1e-8)


def test_evaluate_requires_every_derivative(quarter_pair):
    e = GreensEvaluator(quarter_pair)
    expr = derivative_rule(1, 2, "xx")
    with pytest.raises(MissingDerivativeError):
        evaluate_expression(expr, e, {1: 0.2, 2: 0.5}, f_table={0: 1.0})
    value = evaluate_expression(expr, e, {1: 0.2, 2: 0.5}, f_table={0: 1.0, 2: 0.0})
    assert_allclose(value, 1j * e.green("jj", 0.5, 0.5), rtol=1e-14)


def test_printed_coefficient_discrepancy():
    report = printed_coefficient_discrepancy()
    assert report["printed"] == 1
    assert report["enumerated"] == 3
    assert report["formula"] == report["enumerated"]


def test_expression_coefficients_are_exact_rationals():
    expr = WickExpression.term(sympy.Rational(1, 3), [("jj", (1, 1))]) + WickExpression.term(
        sympy.Rational(2, 3), [("jj", (1, 1))]
    )
    assert expr.coefficients() == [1]
    assert isinstance(expr.coefficients()[0], sympy.Rational)
