"""Acceptance criteria, each at its stated tolerance.

Every test records a one-line verdict that is printed in the terminal
summary (``criterion N: PASS/FAIL ...``), then asserts it.
"""

import pytest

from qnmlab import verify

pytestmark = pytest.mark.acceptance


def _judge(record_criterion, number, checks):
    detail = "; ".join(
        f"{c.name}={c.measured:.3g} ({c.relation} {c.tolerance:g}){'' if c.passed else ' FAIL'}"
        for c in checks)
    passed = all(c.passed for c in checks)
    record_criterion(number, passed, detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
    failed = [c.name for c in checks if not c.passed]
    assert passed, f"criterion {number} failed checks: {failed}"


def _pick(checks, *names):
    by = {c.name: c for c in checks}
    return [by[n] for n in names]


def test_criterion_01_sector_angle_phi0(record_criterion):
    checks = verify.run_suite("angles")
    _judge(record_criterion, 1, _pick(checks, "phi0_over_pi_error", "phi0_printed_residual",
                                      "phi0_runtime_s"))


def test_criterion_01_supplement_solved_equation():
    (c,) = _pick(verify.run_suite("angles"), "phi0_solved_residual")
    assert c.passed, c


def test_criterion_02_sector_angle_phi1(record_criterion):
    _judge(record_criterion, 2, _pick(verify.run_suite("angles"), "phi1_over_pi_error"))


def test_criterion_03_closed_form_taylor(record_criterion):
    _judge(record_criterion, 3, verify.run_suite("taylor"))


def test_criterion_04_aretakis_hierarchy(record_criterion):
    checks = verify.run_suite("aretakis")
    _judge(record_criterion, 4, _pick(checks, "aretakis_max_rel_error", "aretakis_runtime_s"))


def test_criterion_04_supplement_scaled_error():
    checks = _pick(verify.run_suite("aretakis"), "aretakis_max_scaled_error",
                   "a2_at_1_error", "a4_at_half_error")
    assert all(c.passed for c in checks), checks


def test_criterion_05_recurrence(record_criterion):
    _judge(record_criterion, 5, verify.run_suite("recurrence"))


def test_criterion_06_cross_method(record_criterion):
    checks = [c for c in verify.run_suite("crossmethod") if c.name.startswith("w_2x_x2_")]
    _judge(record_criterion, 6, checks)


def test_criterion_06_supplement_other_potential():
    checks = [c for c in verify.run_suite("crossmethod") if c.name.startswith("w_30_x_")]
    assert checks and all(c.passed for c in checks), checks


def test_criterion_07_eigen_evolution(record_criterion):
    _judge(record_criterion, 7, verify.run_suite("eigenflow"))


def test_criterion_08_gevrey_threshold(record_criterion):
    _judge(record_criterion, 8, verify.run_suite("gevrey"))


def test_criterion_09_region_properties(record_criterion):
    _judge(record_criterion, 9, verify.run_suite("regions"))


def test_criterion_10_boundary_matrices(record_criterion):
    _judge(record_criterion, 10, verify.run_suite("boundary"))


def test_criterion_11_pole_detection(record_criterion):
    _judge(record_criterion, 11, verify.run_suite("poles"))


def test_ringdown_against_collocation():
    checks = verify.run_suite("ringdown")
    assert all(c.passed for c in checks), checks
