import numpy as np
import pytest

from controllers.validation_controller import CheckResult, ValidationController, run_validation
from models.errors import CausticError


@pytest.fixture(scope="module")
def quick_results():
    return run_validation("quick", seed=20240611, threads=2)


def test_quick_preset_passes_every_check(quick_results):
    failed = [result.name for result in quick_results if not result.passed]
    assert failed == []


def test_quick_preset_covers_the_whole_battery(quick_results):
    names = {result.name for result in quick_results}
    assert {
        "greens_dirichlet_closed_form",
        "wronskian_constancy",
        "lattice_log_det_ratio",
        "lattice_convergence_order",
        "census_x4",
        "census_x2p2",
        "wick_closed_form",
        "derivative_rule_x4_l0_coefficient",
        "endpoint_shift_random",
        "smearing_vs_wick",
        "partition_vs_trace",
        "functional_derivative_duality",
        "functional_derivative_duality_p",
    } <= names


def test_printed_coefficient_row_reports_the_discrepancy(quick_results):
    row = next(r for r in quick_results if r.name == "derivative_rule_x4_l0_coefficient")
    assert row.value == 2.0
    assert row.tolerance is None


def test_check_result_serialization():
    row = CheckResult("wronskian_constancy", True, 1e-12, 1e-8, "detalle").to_dict()
    assert row == {
        "name": "wronskian_constancy",
        "passed": True,
        "value": 1e-12,
        "tolerance": 1e-8,
        "detail": "detalle",
    }


def test_computation_errors_become_failed_rows():
    def check_caustic_profile(rng):
        raise CausticError("Da(t_b)", 0.0, 1e-10)

    rows = ValidationController._guarded(check_caustic_profile, np.random.default_rng(0))
    assert len(rows) == 1
    assert rows[0].name == "check_caustic_profile"
    assert rows[0].passed is False
    assert rows[0].detail.startswith("caustic")


def test_unknown_preset():
    with pytest.raises(ValueError):
        ValidationController("exhaustive")
