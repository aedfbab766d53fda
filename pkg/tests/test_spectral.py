import numpy as np
import pytest
from numpy.polynomial import Polynomial

from conftest import W30X_ROOT
from qnmlab.errors import DomainError, NearSingularError, SingularBoundaryError
from qnmlab.potential import PotentialSpec
from qnmlab.series import oracle_ws
from qnmlab.spectral import (
    GridFunction,
    ShiftedProblemSpec,
    assemble_Ls,
    boundary_matrix_A,
    boundary_matrix_B,
    boundary_rhs,
    boundary_solve,
    collocation_pencil,
    condition_estimate,
    make_disc,
    pencil_eigs,
    qnf_collocation,
    resolvent_solve,
    shifted_apply_poly,
)

W0 = PotentialSpec((0.0,))


# discretization --------------------------------------------------------------

@pytest.mark.parametrize("n", [8, 16, 33, 64])
def test_disc_invariants(n):
    d = make_disc(n)
    x = d.nodes
    assert x[0] == 0.0 and x[-1] == 1.0 and np.all(np.diff(x) > 0)
    assert np.max(np.abs(d.diff_matrix @ np.ones(n))) <= 1e-12
    assert np.max(np.abs(d.diff_matrix @ x - 1)) <= 1e-10
    assert np.all(d.int_matrix[-1] == 0)
    assert np.max(np.abs(d.int_matrix @ np.ones(n) - (1 - x))) <= 1e-10
    assert d.right == n - 1


def test_disc_integrates_polynomials():
    d = make_disc(24)
    x = d.nodes
    assert np.allclose(d.int_matrix @ x**5, (1 - x**6) / 6, atol=1e-13)


def test_disc_immutable_and_minimum():
    d = make_disc(10)
    with pytest.raises(ValueError):
        d.diff_matrix[0, 0] = 1.0
    with pytest.raises(DomainError):
        make_disc(7)


def test_grid_function_invariants():
    d = make_disc(10)
    g = GridFunction.from_function(d, lambda x: np.cos(x))
    assert g.values[-1] == 0
    with pytest.raises(DomainError):
        GridFunction(np.ones(10), d)
    with pytest.raises(DomainError):
        GridFunction(np.zeros(9), d)
    with pytest.raises(DomainError):
        GridFunction.from_samples(d, np.r_[np.nan, np.zeros(9)])


# operator ----------------------------------------------------------------------

def test_assemble_linear_example():
    d = make_disc(20)
    s = 0.3 - 1.1j
    A = assemble_Ls(W0, s, d)
    got = A @ (d.nodes - 1)
    assert np.allclose(got[:-1], 2 * d.nodes[:-1] + s, atol=1e-8)
    row = np.zeros(20)
    row[-1] = 1
    assert np.array_equal(A[-1], row)


def test_assemble_residual_on_kernel_function():
    d = make_disc(96)
    s = -0.5
    # exp(s/x) -> 0 at the degenerate end for Re s < 0
    u = np.r_[-np.exp(s), oracle_ws(s, d.nodes[1:])]
    r = assemble_Ls(W0, s, d) @ u
    sel = d.nodes >= 0.15
    assert np.max(np.abs(r[sel])) < 1e-6


def test_condition_estimate():
    assert condition_estimate(np.eye(3)) == pytest.approx(1.0)
    assert condition_estimate(np.zeros((2, 2))) == np.inf
    A = np.array([[1.0, 0], [0, 1e-8]])
    assert condition_estimate(A) == pytest.approx(1e8, rel=1e-6)


# resolvent -------------------------------------------------------------------

def test_resolvent_round_trip_random_polynomials():
    rng = np.random.default_rng(0)
    d = make_disc(64)
    w = PotentialSpec((1.0, 0.5, -0.25))
    worst = 0.0
    for _ in range(50):
        c = rng.normal(size=6) + 1j * rng.normal(size=6)
        u = np.polyval(c, d.nodes) * (d.nodes - 1)
        s = complex(rng.uniform(0.2, 3), rng.uniform(-3, 3))
        f = assemble_Ls(w, s, d) @ u
        got = resolvent_solve(w, s, f, d).u.values
        worst = max(worst, np.linalg.norm(got - u) / np.linalg.norm(u))
    assert worst < 1e-8


def test_resolvent_right_half_plane():
    d = make_disc(16)
    r = resolvent_solve(PotentialSpec((1.0,)), 2.0, GridFunction.from_function(d, np.exp), d)
    assert r.condition < 1e6
    assert r.u.values[-1] == 0


def test_resolvent_near_singular_and_errors(w30x):
    d = make_disc(16)
    ev = pencil_eigs(w30x, 16)
    s = ev[np.argmin(np.abs(ev - W30X_ROOT))]
    f = np.ones(16)
    with pytest.raises(NearSingularError):
        resolvent_solve(w30x, s, f, d)
    with pytest.raises(DomainError):
        resolvent_solve(w30x, 1.0, np.ones(15), d)
    with pytest.raises(DomainError):
        resolvent_solve(w30x, 1.0, np.r_[np.inf, np.ones(15)], d)


# collocation eigenvalues -------------------------------------------------------

def test_pencil_conjugation(w30x):
    ev = pencil_eigs(w30x, 48)
    for z in ev:
        assert np.min(np.abs(ev - np.conj(z))) < 1e-8 * max(1.0, abs(z))


def test_pencil_dirichlet_row(w30x):
    A, B = collocation_pencil(w30x, make_disc(12))
    assert np.all(B[-1] == 0) and A[-1, -1] == 1 and np.all(A[-1, :-1] == 0)


def test_qnf_collocation_matches_leaver_root(w30x):
    ev = qnf_collocation(w30x, 16, resolutions=(16, 32))
    assert min(abs(z - W30X_ROOT) for z in ev) < 1e-4
    assert [abs(z) for z in ev] == sorted(abs(z) for z in ev)


def test_qnf_collocation_filter_subset(w30x):
    filtered = qnf_collocation(w30x, 24, resolutions=(24, 48))
    cands = pencil_eigs(w30x, 48)
    assert filtered
    for z in filtered:
        assert np.min(np.abs(cands - z)) < 1e-6


def test_qnf_collocation_minimum_nodes(w30x):
    with pytest.raises(DomainError):
        qnf_collocation(w30x, 24)


def test_pencil_vectors_satisfy_operator(w30x):
    ev, V, d = pencil_eigs(w30x, 32, vectors=True)
    i = np.argmin(np.abs(ev - W30X_ROOT))
    u = V[:, i]
    r = assemble_Ls(w30x, ev[i], d) @ u
    assert np.linalg.norm(r) < 1e-8 * np.linalg.norm(assemble_Ls(w30x, ev[i], d), 2) * np.linalg.norm(u)


# boundary subsystem ----------------------------------------------------------

def test_boundary_matrices_exact():
    assert np.array_equal(boundary_matrix_A(2), [[2, 1], [-4, 4]])
    assert np.array_equal(boundary_matrix_A(1), [[2]])
    assert np.array_equal(boundary_matrix_B(2), [[1, 1], [0, 2]])
    B3 = boundary_matrix_B(3)
    assert np.array_equal(np.diag(B3), [1, 2, 3]) and np.array_equal(np.diag(B3, 1), [1, 1])
    assert np.all(np.tril(B3, -1) == 0)
    A5 = boundary_matrix_A(5)
    assert np.all(np.diag(A5, 1) == 1)
    assert np.array_equal(np.diag(A5), [2, 4, 6, 8, 10])
    assert np.array_equal(np.diag(A5, -1), [n * (n + 1) - 30 for n in range(1, 5)])
    assert A5.dtype.kind == "i"
    with pytest.raises(DomainError):
        boundary_matrix_A(0)


def test_boundary_solve_zero_and_hand_inverse():
    spec = ShiftedProblemSpec(0.0, 2, 10.0)
    assert np.array_equal(boundary_solve(spec, 0.0, np.zeros(2)), np.zeros(2))
    v = np.array([1.0 + 2j, -3.0])
    M = np.array([[12, 1], [-4, 14]])
    inv = np.array([[14, -1], [4, 12]]) / (12 * 14 + 4)
    assert np.allclose(boundary_solve(spec, 0.0, v), inv @ v, rtol=1e-14)
    assert np.allclose(M @ boundary_solve(spec, 0.0, v), v)


@pytest.mark.parametrize("N", [1, 2, 3, 5])
def test_boundary_round_trip(N):
    rng = np.random.default_rng(N)
    spec = ShiftedProblemSpec(0.7, N, 10.0)
    s = 0.4 - 1.3j
    for _ in range(5):
        u = Polynomial(rng.normal(size=N + 4)) * Polynomial([-1.0, 1.0])
        f = shifted_apply_poly(u.coef, spec, s)
        b = [f.deriv(n)(1.0) for n in range(N)]
        a = [u.deriv(n)(1.0) for n in range(1, N + 2)]
        got = boundary_solve(spec, s, boundary_rhs(spec, b, a[N]))
        assert np.allclose(got, a[:N], rtol=1e-10, atol=1e-10 * max(1, np.max(np.abs(a))))


def test_boundary_singular_and_validation():
    spec = ShiftedProblemSpec(0.0, 1, 0.0)
    with pytest.raises(SingularBoundaryError) as e:
        boundary_solve(spec, -2.0, np.ones(1))
    assert e.value.s == -2.0 and e.value.lam == 0.0
    with pytest.raises(DomainError):
        boundary_solve(spec, 1.0, np.ones(2))
    with pytest.raises(DomainError):
        boundary_solve(spec, 1.0, np.ones(2), N=2)
    with pytest.raises(DomainError):
        boundary_rhs(ShiftedProblemSpec(0.0, 3, 1.0), [1.0], 0.0)
    for args in [(-1.0, 1, 0.0), (0.0, 0, 0.0), (0.0, 1, np.inf)]:
        with pytest.raises(DomainError):
            ShiftedProblemSpec(*args)
