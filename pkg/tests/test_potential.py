import json

import numpy as np
import pytest

from qnmlab.errors import DomainError
from qnmlab.potential import (
    PotentialSpec,
    conjugate_solution,
    conjugate_source,
    deconjugate_solution,
    load_potential,
    radial_operator,
    v_from_w,
    w_from_v,
)


def test_w_from_v_examples():
    assert w_from_v([1]).w_coeffs == (1.0,)
    w = w_from_v([1, 2])
    assert w.w_coeffs == (1.0, 2.0)
    assert w(0.5) == pytest.approx(2.0)
    assert v_from_w(w_from_v([1, 2, -3])) == [1.0, 2.0, -3.0]


def test_w_and_v_consistent():
    w = w_from_v([1.0, 2.0, 0.5])
    r = np.linspace(1.5, 20, 7)
    assert np.allclose(w.V(r), 1 / r**2 + 2 / r**3 + 0.5 / r**4)


def test_degree_and_trailing_zeros():
    assert PotentialSpec((1.0, 2.0, 0.0)).p == 1
    assert PotentialSpec((0.0, 0.0)).w_coeffs == (0.0,)


def test_nonfinite_rejected():
    with pytest.raises(DomainError):
        PotentialSpec((1.0, np.nan))


def test_taylor_and_reflection():
    w = PotentialSpec((2.0, 0.0, 1.0))  # 2 + x^2
    assert np.allclose(w.taylor_at(1.0), [3.0, 2.0, 1.0])
    assert np.allclose(w.derivatives_at(0.0), [2.0, 0.0, 2.0])
    y = 0.3
    wt = w.reflected_coeffs()
    assert np.polyval(wt[::-1], y) == pytest.approx(w(1 - y))


def test_load_potential(tmp_path):
    p = tmp_path / "w.json"
    p.write_text(json.dumps({"w_coeffs": [0, 2, 1]}))
    assert load_potential(p).w_coeffs == (0.0, 2.0, 1.0)
    p.write_text(json.dumps({"v_coeffs": [1]}))
    assert load_potential(p).w_coeffs == (1.0,)


@pytest.mark.parametrize(
    "text",
    ['{"w_coeffs": [1], "v_coeffs": [1]}', "{}", '{"w_coeffs": []}', '{"w_coeffs": ["a"]}', "[1, 2]", "{bad"],
)
def test_load_potential_errors(tmp_path, text):
    p = tmp_path / "bad.json"
    p.write_text(text)
    with pytest.raises(DomainError):
        load_potential(p)


def test_load_missing_file(tmp_path):
    with pytest.raises(DomainError):
        load_potential(tmp_path / "none.json")


def test_conjugation_examples():
    s = -0.4 + 1.1j
    x = np.linspace(0.1, 1, 9)
    u = conjugate_solution(lambda r: np.exp(-s * r / 2), s)
    assert np.allclose(u(x), 1.0)
    u = conjugate_solution(lambda r: np.exp(-s * r / 2) / r, s)
    assert np.allclose(u(x), x)
    f = conjugate_source(lambda r: np.exp(-s * r / 2), s)
    assert np.allclose(f(x), x**-2)
    f = conjugate_source(lambda r: np.exp(-s * r / 2) / r**2, s)
    assert np.allclose(f(x), 1.0)


def test_conjugation_round_trip():
    rng = np.random.default_rng(3)
    g = lambda r: np.sin(r) + 1j / r  # noqa: E731
    for _ in range(50):
        s = complex(*rng.uniform(-3, 3, 2))
        x = rng.uniform(0.05, 1.0)
        back = deconjugate_solution(conjugate_solution(g, s), s)
        assert abs(back(1 / x) - g(1 / x)) <= 1e-12 * abs(g(1 / x))


def test_conjugation_rejects_nonpositive_x():
    with pytest.raises(DomainError):
        conjugate_solution(lambda r: r, 1j)(np.array([0.0]))


def _intertwining_residual(h):
    w = PotentialSpec((2.0, 1.0, 0.5))
    s = -0.7 + 1.3j
    fn = lambda r: np.exp(-(((np.asarray(r) - 6) / 1.5) ** 2) + 0.3j * np.asarray(r))  # noqa: E731
    u = conjugate_solution(fn, s)
    x = 1 / np.linspace(2.5, 9.5, 60)
    hx = h * x**2  # matches the r-spacing under r = 1/x
    d1 = (u(x + hx) - u(x - hx)) / (2 * hx)
    d2 = (u(x + hx) - 2 * u(x) + u(x - hx)) / hx**2
    lhs = x**2 * d2 + 2 * x * d1 + s * d1 - w(x) * u(x)
    rhs = conjugate_source(lambda r: radial_operator(w, s, fn, r, h=h), s)(x)
    return np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs))


def test_intertwining():
    r1 = _intertwining_residual(1e-3)
    r2 = _intertwining_residual(5e-4)
    assert r1 < 1e-6
    assert r1 / r2 > 3.0  # second order
