import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from models.errors import DomainError, LatticeError
from models.frequency import FrequencyProfile
from models.fundamental import solve_fundamental
from models.greens import GreensEvaluator
from models.lattice_oracle import (
    LatticeOperator,
    build_lattice,
    lattice_gaussian_moments,
    lattice_gelfand_yaglom,
    lattice_green,
    lattice_green_matrix,
    lattice_log_det,
    lattice_log_det_ratio,
)

UNIT = FrequencyProfile.constant(1.0, 0.0, 1.0)
FREE = FrequencyProfile.constant(0.0, 0.0, 1.0)


def test_operator_layout():
    opr = build_lattice(UNIT, 9)
    assert opr.h == pytest.approx(0.1)
    assert_allclose(opr.times, np.linspace(0.1, 0.9, 9))
    assert_allclose(opr.diag, 200.0 - 1.0)
    assert_allclose(opr.offdiag, -100.0)


def test_free_lattice_green_at_midpoint():
    opr = build_lattice(FREE, 999)
    assert opr.times[499] == pytest.approx(0.5)
    assert abs(lattice_green(opr, 499, 499) - 0.25) < 1e-5


def test_lattice_green_approaches_continuum(unit_pair):
    opr = build_lattice(UNIT, 2000)
    e = GreensEvaluator(unit_pair)
    i, j = 999, 1500
    assert abs(lattice_green(opr, i, i) - e.green("jj", opr.times[i], opr.times[i])) < 5e-4
    assert abs(lattice_green(opr, i, j) - e.green("jj", opr.times[i], opr.times[j])) < 5e-4


def test_green_matrix_matches_dense_inverse():
    opr = build_lattice(FrequencyProfile.polynomial((1.0, 1.0), 0.0, 1.0), 12)
    dense = np.diag(opr.diag) + np.diag(opr.offdiag, 1) + np.diag(opr.offdiag, -1)
    indices = [0, 3, 11]
    expected = np.linalg.inv(dense)[np.ix_(indices, indices)] / opr.h
    assert_allclose(lattice_green_matrix(opr, indices), expected, rtol=1e-10)
    assert_allclose(lattice_green(opr, 3, 11), expected[1, 2], rtol=1e-10)


def test_log_det_ratio_of_identical_operators():
    opr = build_lattice(UNIT, 100)
    assert lattice_log_det_ratio(opr, opr) == 0.0


def test_log_det_ratio_tends_to_log_sine():
    ratio = lattice_log_det_ratio(build_lattice(UNIT, 4000), build_lattice(FREE, 4000))
    assert abs(ratio - math.log(math.sin(1.0))) < 2e-3


def test_log_det_ratio_converges_at_second_order():
    target = math.log(math.sin(1.0))
    errors = [
        abs(lattice_log_det_ratio(build_lattice(UNIT, n), build_lattice(FREE, n)) - target) for n in (500, 1000)
    ]
    assert 3.5 < errors[0] / errors[1] < 4.5


def test_gelfand_yaglom_limit():
    assert_allclose(lattice_gelfand_yaglom(build_lattice(FREE, 50)), 1.0, rtol=1e-12)
    assert_allclose(lattice_gelfand_yaglom(build_lattice(UNIT, 1000)), math.sin(1.0), rtol=1e-2)


def test_gaussian_moments_pair_the_green_function():
    opr = build_lattice(UNIT, 200)
    i, j = 40, 150
    g = lattice_green_matrix(opr, [i, j])
    assert_allclose(lattice_gaussian_moments(opr, [i, i]), g[0, 0], rtol=1e-12)
    assert_allclose(lattice_gaussian_moments(opr, [i, i, i, i]), 3 * g[0, 0] ** 2, rtol=1e-12)
    mixed = g[0, 0] * g[1, 1] + 2 * g[0, 1] ** 2
    assert_allclose(lattice_gaussian_moments(opr, [i, i, j, j]), mixed, rtol=1e-12)
    assert lattice_gaussian_moments(opr, [i, j, j]) == 0.0


def test_inverted_regime_is_not_positive_definite():
    strong = build_lattice(FrequencyProfile.constant(4.0, 0.0, 1.0), 200)
    with pytest.raises(LatticeError):
        lattice_gaussian_moments(strong, [10, 10])
    sign, _ = lattice_log_det(strong)
    assert sign == -1.0
    with pytest.raises(LatticeError):
        lattice_log_det_ratio(strong, build_lattice(FREE, 200))


def test_singular_operator_is_reported():
    opr = LatticeOperator(2, 1.0, 0.0, np.array([1.0, 1.0]), np.array([1.0]))
    with pytest.raises(LatticeError):
        lattice_log_det(opr)
    with pytest.raises(LatticeError):
        lattice_green(opr, 0, 1)


def test_invalid_lattices_and_indices():
    with pytest.raises(DomainError):
        build_lattice(UNIT, 1)
    with pytest.raises(DomainError):
        LatticeOperator(3, 0.1, 0.0, np.ones(3), np.ones(3))
    opr = build_lattice(UNIT, 10)
    with pytest.raises(DomainError):
        lattice_green(opr, 0, 10)
    with pytest.raises(DomainError):
        lattice_green(opr, -1, 0)
    with pytest.raises(DomainError):
        lattice_log_det_ratio(opr, build_lattice(UNIT, 20))


def test_log_det_ratio_matches_ratio_of_fundamental_solutions():
    ramp = FrequencyProfile.polynomial((1.0, 1.0), 0.0, 1.0)
    weak, strong = ramp.scaled(0.5), ramp.scaled(1.0)
    continuum = math.log(solve_fundamental(strong, 1024).da_tb / solve_fundamental(weak, 1024).da_tb)
    lattice = lattice_log_det_ratio(build_lattice(strong, 2000), build_lattice(weak, 2000))
    assert abs(lattice - continuum) < 1e-5


def test_second_order_convergence_for_random_profiles():
    rng = np.random.default_rng(31)
    coarse_nodes = np.array([20, 50, 100, 150, 180])
    for _ in range(10):
        T = rng.uniform(0.6, 1.2)
        profile = FrequencyProfile.polynomial((rng.uniform(0.6, 1.4), rng.uniform(-0.4, 0.4)), 0.0, T)
        pair = solve_fundamental(profile, 1024)
        e = GreensEvaluator(pair)
        green_errors, det_errors = [], []
        # 200 y 400 celdas: el nodo i de la red gruesa es el nodo 2i+1 de la fina
        for cells, nodes in ((200, coarse_nodes), (400, 2 * coarse_nodes + 1)):
            opr = build_lattice(profile, cells - 1)
            t = opr.times[nodes]
            continuum = e.green("jj", t[:, None], t[None, :])
            green_errors.append(np.max(np.abs(lattice_green_matrix(opr, nodes.tolist()) - continuum)))
            det_errors.append(abs(lattice_gelfand_yaglom(opr) - pair.da_tb))
        assert 3.5 < green_errors[0] / green_errors[1] < 4.5
        assert 3.5 < det_errors[0] / det_errors[1] < 4.5
