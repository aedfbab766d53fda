import math

import mpmath
import numpy as np
import pytest

from qnmlab.errors import DomainError, GevreyOracleError
from qnmlab.gevrey import (
    DerivativeOracle,
    GevreySpec,
    boundary_seminorm,
    default_panels,
    classify_exp,
    exp_derivative_poly,
    exp_oracle,
    log_seminorm,
    poly_oracle,
    quadrature,
    seminorm,
    ws_oracle,
    x_norm,
)
from qnmlab.series import CoeffSeq


def _zeros(n=80):
    return CoeffSeq.from_values(np.zeros(n))


# seminorm --------------------------------------------------------------------

def test_seminorm_of_identity():
    assert seminorm(poly_oracle([0, 1]), GevreySpec(1.0, 0, 0, 0, 1)) == pytest.approx(
        math.sqrt(7 / 12), rel=1e-13)


def test_seminorm_weights_by_hand():
    # u = x^2, sigma = 2, k = 1, l = 1, n = 1..2
    # n=1: 2^2 * 1 / (1 * 4) * int (x/2) 4x^2 = 1 * 2 * 1/4 = 0.5
    # n=2: 2^4 * 2^2 / (4 * 36) * int (x/2) * 4 = 64/144 * 1 = 4/9
    spec = GevreySpec(2.0, 1, 1, 1, 2)
    assert seminorm(poly_oracle([0, 0, 1]), spec) == pytest.approx(math.sqrt(0.5 + 4 / 9), rel=1e-13)


def test_seminorm_zero_cases():
    assert seminorm(poly_oracle([0.0]), GevreySpec(1.0, 0, 0, 0, 5)) == 0.0
    assert log_seminorm(poly_oracle([1, 2, 3]), GevreySpec(1.0, 0, 0, 3, 8)) == -math.inf


def test_seminorm_triangle_inequality():
    rng = np.random.default_rng(3)
    spec = GevreySpec(1.5, 2, 1, 1, 9)
    for _ in range(10):
        a = rng.normal(size=8) + 1j * rng.normal(size=8)
        b = rng.normal(size=8)
        na = seminorm(poly_oracle(a), spec)
        nb = seminorm(poly_oracle(b), spec)
        assert seminorm(poly_oracle(a + b), spec) <= na + nb + 1e-12


def test_seminorm_monotone_in_range():
    u = exp_oracle(-1 + 2j)
    vals = [seminorm(u, GevreySpec(1.0, 0, 0, 0, M)) for M in (2, 5, 10, 20)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    vals = [seminorm(u, GevreySpec(1.0, 0, 0, N, 20)) for N in (0, 3, 7, 12)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_shifted_index_weights_equivalent():
    # for n >= 1, n^{k+l} <= (n+1)^{k+l} <= 2^{k+l} n^{k+l}
    u = exp_oracle(-0.7 + 1j)
    for k, l in [(1, 0), (2, 1), (0, 1)]:
        spec = GevreySpec(1.2, k, l, 1, 25)
        a = seminorm(u, spec)
        b = seminorm(u, spec, plus_one=True)
        assert a <= b <= 2 ** ((k + l) / 2) * a * (1 + 1e-12)


def test_quadrature_exact_and_refines():
    x, w = quadrature(16)
    assert np.all((x > 0) & (x < 1))
    assert np.dot(w, x**15) == pytest.approx(1 / 16, rel=1e-13)
    x, w = quadrature(9, x_min=0.25)
    assert np.sum(w) == pytest.approx(0.75, rel=1e-14)
    rng = np.random.default_rng(11)
    for _ in range(5):
        u = poly_oracle(rng.normal(size=12))
        for panels in (8, 16, 32):
            a = seminorm(u, GevreySpec(1.3, 2, 1, 0, 11, quad_panels=panels), x_min=0.1)
            b = seminorm(u, GevreySpec(1.3, 2, 1, 0, 11, quad_panels=2 * panels), x_min=0.1)
            assert abs(a - b) < 1e-10 * b


def test_default_panels_resolve_exp_data():
    u = exp_oracle(-1.0)
    for M in (30, 60):
        a = seminorm(u, GevreySpec(1.0, 1, 0, 0, M))
        b = seminorm(u, GevreySpec(1.0, 1, 0, 0, M, quad_panels=4 * default_panels(M)))
        assert abs(a - b) < 1e-8 * b


def test_spec_validation():
    for args in [(0.0, 0, 0, 0, 1), (1.0, 3, 0, 0, 1), (1.0, 0, 2, 0, 1),
                 (1.0, 0, 0, 3, 2), (math.inf, 0, 0, 0, 1)]:
        with pytest.raises(DomainError):
            GevreySpec(*args)
    with pytest.raises(DomainError):
        GevreySpec(1.0, 0, 0, 0, 1, quad_panels=4)


def test_nonfinite_oracle_raises():
    bad = DerivativeOracle(lambda n, x: np.where(x > 0.5, np.nan, 1.0))
    with pytest.raises(GevreyOracleError):
        seminorm(bad, GevreySpec(1.0, 0, 0, 0, 2))


# boundary piece and X-norm -------------------------------------------------------

def test_boundary_seminorm_by_hand():
    d = CoeffSeq.from_values(np.array([1.0, 2.0, 6.0]))
    # sigma=1: 1 + 4/4 + 36/(4*36)
    assert boundary_seminorm(d, 1.0, 0, 2) == pytest.approx(math.sqrt(2.25), rel=1e-14)
    assert boundary_seminorm(d, 1.0, 3, 7) == 0.0
    with pytest.raises(DomainError):
        boundary_seminorm(d, 0.0, 0, 2)
    with pytest.raises(DomainError):
        boundary_seminorm(d, 1.0, 2, 1)


def test_x_norm_linear():
    # u = x - 1: du = 1, u'(0) = 1
    r = x_norm(poly_oracle([-1, 1]), CoeffSeq.from_values(np.array([-1.0, 1.0])), 1.0, 3)
    # the n^k weight removes the n = 0 term from the k = 1, 2 pieces
    expect = 1.0 + 0.0 + 0.0 + 1.0
    assert r.value == pytest.approx(expect, rel=1e-13)
    assert r.tail == 0.0


def test_x_norm_quadratic():
    u = poly_oracle([1, -2, 1])
    r = x_norm(u, CoeffSeq.from_values(np.array([1.0, -2.0, 2.0, 0.0])), 1.0, 2)
    assert r.value == pytest.approx(5.04805025952791, rel=1e-13)
    assert len(r.pieces) == 4
    value, tail = r
    assert value == r.value and tail == r.tail


def test_x_norm_dirichlet_check():
    with pytest.raises(DomainError):
        x_norm(poly_oracle([1.0]), _zeros(), 1.0, 3)


def test_x_norm_grows_for_divergent_data():
    u = ws_oracle(-1.0)
    a = x_norm(u, _zeros(), 2.0, 20).value
    b = x_norm(u, _zeros(), 2.0, 60).value
    assert b > 10 * a
    c = x_norm(u, _zeros(), 0.25, 20).value
    d = x_norm(u, _zeros(), 0.25, 60).value
    assert abs(d - c) < 1e-8 * d


# exp(s/x) derivatives ----------------------------------------------------------

@pytest.mark.parametrize("s", [-1.0, -0.5 + 2j, 3 - 1j])
def test_exp_oracle_matches_closed_form(s):
    x = np.array([0.3, 0.55, 1.0])
    for n in (0, 1, 4, 11):
        q = exp_derivative_poly(s, n)
        ref = [complex(mpmath.polyval(q[::-1], 1 / mpmath.mpf(xi)) * mpmath.exp(mpmath.mpc(s) / xi)) for xi in x]
        assert np.allclose(exp_oracle(s).eval(n, x), ref, rtol=1e-11, atol=0)


def test_exp_oracle_against_mpmath_diff():
    s = -0.8 + 0.6j
    for n in (1, 3, 6):
        ref = complex(mpmath.diff(lambda t: mpmath.exp(s / t), 0.7, n))
        assert exp_oracle(s).eval(n, [0.7])[0] == pytest.approx(ref, rel=1e-10)


def test_exp_derivative_poly_low_orders():
    q = exp_derivative_poly(2.0, 2)
    # d^2/dx^2 exp(s/x) = (s^2 y^4 + 2 s y^3) exp(s/x), y = 1/x
    assert [complex(c) for c in q] == [0, 0, 0, 4.0, 4.0]


def test_ws_oracle_vanishes_at_one():
    assert abs(ws_oracle(-1 + 1j).eval(0, [1.0])[0]) < 1e-15


def test_exp_oracle_rejects_origin():
    with pytest.raises(DomainError):
        exp_oracle(-1.0).log_table(0, 2, [0.0, 0.5])


# classification ----------------------------------------------------------------

def test_classify_examples():
    a = classify_exp(-1.0, 2.0, 60)
    b = classify_exp(-1.0, 0.25, 60)
    assert a.verdict == "divergent" and a.slope > 0
    assert b.verdict == "bounded-trend" and b.slope <= 0
    assert len(a.n) == len(a.log_g) == 61


def test_classify_slope_monotone_in_sigma():
    slopes = [classify_exp(-1.0, sg, 60).slope for sg in (0.25, 0.5, 1.0, 2.0, 4.0)]
    assert all(b > a for a, b in zip(slopes, slopes[1:]))


def test_classify_validation():
    with pytest.raises(DomainError):
        classify_exp(0.5, 1.0, 60)
    with pytest.raises(DomainError):
        classify_exp(-1.0, 1.0, 20)
    with pytest.raises(DomainError):
        classify_exp(-1.0, 0.0, 60)
