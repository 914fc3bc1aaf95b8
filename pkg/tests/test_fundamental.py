import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from models.errors import CausticError, DomainError, IntegrationError
from models.frequency import FrequencyProfile, PhysicalParams
from models.fundamental import (
    derivative_sum_identity_residual,
    endpoint_symmetry_residual,
    fundamental_table,
    gelfand_yaglom_amplitude,
    gflow_family,
    gflow_residual,
    solve_fundamental,
    wronskian_residual,
)


def test_constant_frequency_matches_sines():
    pair = solve_fundamental(FrequencyProfile.constant(1.0, 0.0, math.pi / 2), 512)
    t = pair.grid
    assert_allclose(pair.da, np.sin(t), atol=1e-9)
    assert_allclose(pair.db, np.sin(math.pi / 2 - t), atol=1e-9)
    assert_allclose(pair.da_dot, np.cos(t), atol=1e-9)
    assert_allclose(pair.db_dot, -np.cos(math.pi / 2 - t), atol=1e-9)


def test_interpolation_between_nodes(quarter_pair):
    t = np.array([0.0123, 0.4567, 1.2345])
    da, da_dot, db, db_dot = quarter_pair.evaluate(t)
    assert_allclose(da, np.sin(t), atol=1e-9)
    assert_allclose(da_dot, np.cos(t), atol=1e-9)
    assert_allclose(db, np.sin(math.pi / 2 - t), atol=1e-9)
    assert_allclose(db_dot, -np.cos(math.pi / 2 - t), atol=1e-9)


def test_free_particle_is_linear(free_pair):
    assert_allclose(free_pair.da_tb, 1.0, rtol=1e-12)
    assert_allclose(free_pair.da, free_pair.grid, atol=1e-12)
    assert_allclose(free_pair.db, 1.0 - free_pair.grid, atol=1e-12)


def test_wronskian_residuals(free_pair):
    constant = solve_fundamental(FrequencyProfile.constant(1.0, 0.0, math.pi / 2), 512)
    assert wronskian_residual(constant) < 1e-9
    assert wronskian_residual(free_pair) < 1e-12
    ramp = solve_fundamental(FrequencyProfile.polynomial((0.0, 1.0), 0.0, 2.0), 1024)
    assert wronskian_residual(ramp) < 1e-8
    assert endpoint_symmetry_residual(ramp) < 1e-8


def test_wronskian_value_is_minus_da_tb(ramp_pair):
    assert_allclose(ramp_pair.wronskian, -ramp_pair.da_tb, rtol=1e-10)


def test_derivative_sum_identity(quarter_pair, free_pair):
    assert derivative_sum_identity_residual(quarter_pair) < 1e-9
    assert derivative_sum_identity_residual(free_pair) < 1e-14
    pair = solve_fundamental(FrequencyProfile.polynomial((1.0, 0.5), 0.0, 1.0), 2048)
    assert derivative_sum_identity_residual(pair) < 1e-6


def test_derivative_sum_identity_with_jumps():
    profile = FrequencyProfile.piecewise_constant((0.25, 0.5), (1.0, 1.5, 0.8), 0.0, 1.0)
    pair = solve_fundamental(profile, 1024)
    assert derivative_sum_identity_residual(pair) < 1e-8


def test_piecewise_constant_solution_is_c1_across_breakpoint():
    profile = FrequencyProfile.piecewise_constant((0.5,), (1.0, 2.0), 0.0, 1.0)
    pair = solve_fundamental(profile, 1024)
    # Solución exacta de D_a a trozos
    t = pair.grid
    right = t >= 0.5
    amplitude, slope = math.sin(0.5), math.cos(0.5)
    exact = np.where(
        right,
        amplitude * np.cos(2.0 * (t - 0.5)) + slope / 2.0 * np.sin(2.0 * (t - 0.5)),
        np.sin(t),
    )
    assert_allclose(pair.da, exact, atol=1e-10)


def test_gelfand_yaglom_amplitude(free_pair, quarter_pair, params):
    expected = np.sqrt(1.0 / (2j * math.pi))
    assert_allclose(gelfand_yaglom_amplitude(free_pair, params), expected, rtol=1e-12)
    assert_allclose(gelfand_yaglom_amplitude(quarter_pair, params), expected, rtol=1e-9)


def test_gelfand_yaglom_amplitude_scales_with_mass_and_hbar(quarter_pair):
    value = gelfand_yaglom_amplitude(quarter_pair, PhysicalParams(mass=2.0, hbar=0.5))
    assert_allclose(value, np.sqrt(2.0 / (2j * math.pi * 0.5)), rtol=1e-9)


def test_caustic_at_half_period(params):
    pair = solve_fundamental(FrequencyProfile.constant(1.0, 0.0, math.pi), 1024)
    with pytest.raises(CausticError) as excinfo:
        gelfand_yaglom_amplitude(pair, params)
    assert excinfo.value.category == "caustic"
    assert abs(excinfo.value.value) <= excinfo.value.tolerance


def test_gflow_residuals():
    assert gflow_residual(FrequencyProfile.constant(1.0, 0.0, 1.0), 1.0, 1024) < 1e-5
    assert gflow_residual(FrequencyProfile.constant(0.0, 0.0, 1.0), 0.5, 1024) < 1e-12
    assert gflow_residual(FrequencyProfile.polynomial((1.0, 1.0), 0.0, 1.0), 0.5, 1024) < 1e-5


def test_gflow_family_rescales_omega_squared():
    profile = FrequencyProfile.constant(2.0, 0.0, 1.0)
    member = gflow_family(profile, 0.25, 512)
    assert member.g == 0.25
    assert_allclose(member.pair.da_tb, math.sin(1.0), rtol=1e-10)
    with pytest.raises(DomainError):
        gflow_family(profile, 1.5)


def test_invalid_step_count():
    with pytest.raises(DomainError):
        solve_fundamental(FrequencyProfile.constant(1.0, 0.0, 1.0), 4)


def test_non_finite_omega_squared_raises_integration_error():
    profile = FrequencyProfile.polynomial((1e200,), 0.0, 1.0)
    with np.errstate(over="ignore"):
        with pytest.raises(IntegrationError) as excinfo:
            solve_fundamental(profile, 16)
    assert excinfo.value.t == 0.0


def test_fundamental_table_columns(quarter_pair):
    table = fundamental_table(quarter_pair)
    assert table.shape == (quarter_pair.n_steps + 1, 5)
    assert_allclose(table[:, 0], quarter_pair.grid)
    assert_allclose(table[:, 3], quarter_pair.db)


def test_grid_refinement_is_fourth_order():
    profile = FrequencyProfile.polynomial((1.0, 1.0), 0.0, 1.0)
    reference = solve_fundamental(profile, 4096)
    coarse, fine = (solve_fundamental(profile, n) for n in (64, 128))
    for attribute in ("da_tb", "da_dot_tb", "db_dot_ta"):
        exact = getattr(reference, attribute)
        error_coarse = abs(getattr(coarse, attribute) - exact)
        error_fine = abs(getattr(fine, attribute) - exact)
        assert error_coarse >= 8.0 * error_fine
