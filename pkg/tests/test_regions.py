import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qnmlab.errors import DomainError
from qnmlab.regions import (
    omega_grid,
    omega_member,
    phi0_residual,
    phi1_residual,
    sector_angle_phi0,
    sector_angle_phi1,
    sigma_interval,
)

coord = st.floats(-50, 50, allow_nan=False).filter(lambda v: abs(v) > 1e-6)
pos = st.floats(1e-3, 50, allow_nan=False)


def test_right_half_plane_point():
    assert omega_member(1.0, 0.5).in_omega


def test_negative_real_axis_rejected():
    for sig in (1e-3, 0.1, 0.5, 1.0, 10.0):
        v = omega_member(-1.0, sig)
        assert not v.in_omega1 and not v.in_omega


def test_imaginary_axis_point():
    v = omega_member(3j, 1.0)
    assert v.in_omega1 and v.in_omega2 and v.in_omega


def test_homogeneity_example():
    assert omega_member(2j, 0.5) == omega_member(4j, 1.0)


def test_verdict_combination():
    v = omega_member(-1 + 3j, 0.7)
    assert v.in_omega == (v.in_omega1 and (v.in_omega2 or v.in_omega3))
    assert set(v.as_dict()) == {"in_omega1", "in_omega2", "in_omega3", "in_omega"}


def test_boundary_is_not_member():
    # sigma = |Im s| sits on the first region's boundary
    assert not omega_member(-1 + 2j, 2.0).in_omega1


@pytest.mark.parametrize("s,sigma", [(0, 1.0), (1j, 0.0), (1j, -1.0), (1j, math.inf), (complex(math.nan, 1), 1.0)])
def test_invalid_inputs(s, sigma):
    with pytest.raises(DomainError):
        omega_member(s, sigma)


@settings(max_examples=300, deadline=None)
@given(coord, coord, pos, st.floats(0.01, 100))
def test_homogeneity_property(a, b, sig, lam):
    s = complex(a, b)
    assert omega_member(s, sig).in_omega == omega_member(lam * s, lam * sig).in_omega


@settings(max_examples=300, deadline=None)
@given(coord, coord, pos)
def test_conjugation_and_necessity(a, b, sig):
    s = complex(a, b)
    v = omega_member(s, sig)
    assert v == omega_member(s.conjugate(), sig)
    if v.in_omega:
        assert v.in_omega1


def test_phi0_value_and_bounds():
    phi0 = sector_angle_phi0()
    assert abs(phi0 / math.pi - 0.704) <= 0.001
    assert 2 * math.pi / 3 < phi0 < math.pi
    assert abs(phi0_residual(phi0)) < 1e-12


def test_phi1_residual_and_bounds():
    phi1 = sector_angle_phi1()
    assert abs(phi1_residual(phi1)) < 1e-12
    assert math.pi / 2 < phi1 < sector_angle_phi0()


def test_phi1_closed_form():
    # 4 cos^4(phi/2) + cos(phi) = (1 + c)^2 + c
    assert sector_angle_phi1() == pytest.approx(math.acos((math.sqrt(5) - 3) / 2), abs=1e-14)


def test_phi0_matches_region_scan():
    # rays just inside the sector have admissible sigma; rays just outside have none
    phi0 = sector_angle_phi0()
    assert sigma_interval(np.exp(1j * (phi0 - 2e-3)), 1e-4)
    assert not sigma_interval(np.exp(1j * (phi0 + 2e-3)), 1e-4)


def test_sigma_interval_examples():
    assert sigma_interval(-1.0, 1e-3) == []
    iv = sigma_interval(3j, 1e-3)
    assert iv and all(0 <= lo < hi <= 3 for lo, hi in iv)


def test_sigma_interval_doubling():
    s = -0.8 + 2.3j
    a = sigma_interval(s, 1e-4)
    b = sigma_interval(2 * s, 1e-4)
    assert len(a) == len(b)
    for (l1, h1), (l2, h2) in zip(a, b):
        assert abs(l2 - 2 * l1) <= 2e-4 and abs(h2 - 2 * h1) <= 2e-4


def test_sigma_interval_endpoints_accurate():
    s = -0.8 + 2.3j
    for lo, hi in sigma_interval(s, 1e-4):
        mid = 0.5 * (lo + hi)
        assert omega_member(s, mid).in_omega
        if lo > 1e-4:
            assert not omega_member(s, lo - 1e-4).in_omega
        assert not omega_member(s, hi + 1e-4).in_omega


def test_sigma_interval_rejects_bad_input():
    with pytest.raises(DomainError):
        sigma_interval(0, 1e-3)
    with pytest.raises(DomainError):
        sigma_interval(1j, 0.0)


def test_omega_grid():
    rows = omega_grid(-1, 1, -1, 1, 3, 0.5)
    assert len(rows) == 9
    origin = [r for r in rows if r[0] == 0 and r[1] == 0][0]
    assert origin[2:] == (False, False, False, False)
    for re, im, a, b, c, m in rows:
        if (re, im) != (0, 0):
            assert omega_member(complex(re, im), 0.5) == type(omega_member(1, 1))(a, b, c)
        assert m == (a and (b or c))
