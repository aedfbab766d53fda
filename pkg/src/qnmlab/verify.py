"""Quantitative check suites with machine-readable pass/fail reports."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .evolve import aretakis_exact, aretakis_hierarchy, eigenmode_check, evolve, gaussian_data, ringdown_fit
from .gevrey import classify_exp
from .leaver import (
    asym_coeffs,
    leaver_condition_check,
    leaver_tail_slope,
    polish_root_mp,
    qnf_scan,
)
from .potential import PotentialSpec
from .regions import omega_member, phi0_residual, sector_angle_phi0, sector_angle_phi1
from .series import leaver_coeffs, series_residual, taylor_at_zero
from .spectral import (
    GridFunction,
    ShiftedProblemSpec,
    assemble_Ls,
    boundary_matrix_A,
    boundary_matrix_B,
    boundary_rhs,
    boundary_solve,
    condition_estimate,
    make_disc,
    pencil_eigs,
    qnf_collocation,
    shifted_apply_poly,
)

__all__ = ["CheckResult", "SUITES", "run_suite", "crossmethod_report"]


@dataclass(frozen=True)
class CheckResult:
    """One measured quantity against its tolerance.

    ``relation`` is ``"<"``, ``"<="``, ``">"``, ``">="`` or ``"=="`` and
    reads ``measured relation tolerance``.
    """

    name: str
    measured: float
    tolerance: float
    relation: str
    passed: bool

    def as_dict(self):
        return {
            "name": self.name,
            "measured": self.measured,
            "tolerance": self.tolerance,
            "relation": self.relation,
            "passed": self.passed,
        }


_OPS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
}


def _check(name, measured, tolerance, relation):
    measured = float(measured)
    ok = bool(math.isfinite(measured) and _OPS[relation](measured, tolerance))
    return CheckResult(name, measured, float(tolerance), relation, ok)


# Suites ---------------------------------------------------------------------

def suite_angles():
    t0 = time.perf_counter()
    phi0 = sector_angle_phi0()
    el0 = time.perf_counter() - t0
    phi1 = sector_angle_phi1()
    return [
        _check("phi0_over_pi_error", abs(phi0 / math.pi - 0.704), 0.001, "<="),
        _check("phi0_printed_residual", abs(_printed_phi0_residual(phi0)), 1e-12, "<"),
        _check("phi0_runtime_s", el0, 1.0, "<"),
        _check("phi0_solved_residual", abs(phi0_residual(phi0)), 1e-12, "<"),
        _check("phi1_over_pi_error", abs(phi1 / math.pi - 0.688), 0.001, "<="),
    ]


def _printed_phi0_residual(phi):
    c = math.cos(phi)
    return math.sin(phi) ** 4 - c**2 * (2 + 2 * c * (2 + c))


def suite_taylor():
    s = complex(-1, 3)
    out = taylor_at_zero(PotentialSpec((0.0,)), s, [1.0], 15)
    err = 0.0
    for n in range(1, 16):
        exact = -((-1 / s) ** n) * math.factorial(n) * math.factorial(n - 1)
        err = max(err, abs(out[n] - exact) / abs(exact))
    return [_check("taylor_max_rel_error", err, 1e-12, "<")]


def suite_aretakis():
    t0 = time.perf_counter()
    states = aretakis_hierarchy(8, 2.0, 1e-3)
    err = max(float(np.max(st.rel_error)) for st in states)
    el = time.perf_counter() - t0
    # error relative to each component's largest exact value on the run
    A = np.array([st.a for st in states])
    E = np.array([aretakis_exact(8, st.t) for st in states])
    scaled = float(np.max(np.abs(A - E) / np.max(np.abs(E), axis=0)))
    a2 = [st.a[1] for st in states if abs(st.t - 1.0) < 1e-12][0]
    a4 = [st.a[3] for st in states if abs(st.t - 0.5) < 1e-12][0]
    return [
        _check("aretakis_max_rel_error", err, 1e-6, "<"),
        _check("aretakis_max_scaled_error", scaled, 1e-6, "<"),
        _check("aretakis_runtime_s", el, 5.0, "<"),
        _check("a2_at_1_error", abs(a2 + 2.0), 1e-9, "<"),
        _check("a4_at_half_error", abs(a4 + 3.0), 1e-9, "<"),
    ]


def suite_recurrence(n_cases=100, K=100, seed=20240611):
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(n_cases):
        p = int(rng.integers(0, 4))
        w = PotentialSpec(tuple(rng.uniform(-5, 5, p + 1)))
        s = complex(rng.uniform(-5, 5), rng.uniform(-5, 5))
        H = leaver_coeffs(w, s, K)
        worst = max(worst, series_residual(w, s, H, K))
    el = time.perf_counter() - t0
    return [
        _check("recurrence_max_residual", worst, 1e-10, "<"),
        _check("recurrence_runtime_s", el, 10.0, "<"),
    ]


def crossmethod_report(w, rect, resolutions, prefix, grid=(40, 40), anchor="leaver"):
    """Continued-fraction roots against two-resolution filtered collocation.

    With ``anchor="leaver"`` the lowest-modulus continued-fraction root is
    compared with the nearest collocation eigenvalue; with
    ``anchor="collocation"`` the lowest-modulus collocation eigenvalue is
    compared with the nearest continued-fraction root. Missing roots are
    reported as ``nan`` measurements (failed checks).
    """
    t0 = time.perf_counter()
    roots = qnf_scan(w, rect, grid=grid, depth=400)
    coll = qnf_collocation(w, resolutions[0], resolutions=resolutions)
    nan = float("nan")
    out = [
        _check(f"{prefix}_leaver_roots_found", len(roots), 1, ">="),
        _check(f"{prefix}_collocation_roots_found", len(coll), 1, ">="),
    ]
    if not roots or not coll:
        return out + [
            _check(f"{prefix}_leaver_vs_collocation", nan, 1e-4, "<"),
            _check(f"{prefix}_boundedness_slope", nan, 0.0, "<="),
            _check(f"{prefix}_amplitude_ratio", nan, 1e-4, "<"),
            _check(f"{prefix}_runtime_s", time.perf_counter() - t0, 60.0, "<"),
        ]
    if anchor == "leaver":
        s_l = roots[0].s
        s_c = min(coll, key=lambda z: abs(z - s_l))
    else:
        s_c = min(coll, key=abs)
        s_l = min((r.s for r in roots), key=lambda z: abs(z - s_c))
    # the tail test needs the root to far more digits than double precision:
    # at k=800 the dominant branch is amplified by up to exp(4 Re sqrt(s k))
    s_mp = polish_root_mp(w, s_l, dps=100, depth=1200)
    H = leaver_coeffs(w, s_mp, 800, dps=110)
    slope = leaver_tail_slope(H, complex(s_mp))
    fit = asym_coeffs(H, complex(s_mp), (200, 400), w=w, order=2)
    assert leaver_condition_check(H, complex(s_mp)) == (slope <= 0)
    return out + [
        _check(f"{prefix}_leaver_vs_collocation", abs(s_l - s_c), 1e-4, "<"),
        _check(f"{prefix}_boundedness_slope", slope, 0.0, "<="),
        _check(f"{prefix}_amplitude_ratio", fit.ratio, 1e-4, "<"),
        _check(f"{prefix}_runtime_s", time.perf_counter() - t0, 60.0, "<"),
    ]


def suite_crossmethod():
    primary = crossmethod_report(
        PotentialSpec((0.0, 2.0, 1.0)), (-10.0, -0.2, -12.0, 12.0), (64, 128), "w_2x_x2"
    )
    extra = crossmethod_report(
        PotentialSpec((30.0, 1.0)), (-8.0, -1.0, -10.0, 10.0), (16, 32), "w_30_x",
        anchor="collocation",
    )
    return primary + extra


def suite_gevrey():
    hi = classify_exp(-1.0, 2.0, 60)
    lo = classify_exp(-1.0, 0.25, 60)
    return [
        _check("slope_sigma_2", hi.slope, 0.0, ">"),
        _check("slope_sigma_0.25", lo.slope, 0.0, "<="),
    ]


def suite_regions(n=10_000, seed=7):
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    hom = conj = rej = 0
    for _ in range(n):
        s = complex(rng.uniform(-5, 5), rng.uniform(-5, 5))
        sig = rng.uniform(0.01, 5)
        lam = rng.uniform(0.1, 10)
        m = omega_member(s, sig).in_omega
        hom += m == omega_member(lam * s, lam * sig).in_omega
        conj += m == omega_member(s.conjugate(), sig).in_omega
        rej += not omega_member(-1.0, sig).in_omega
    el = time.perf_counter() - t0
    return [
        _check("homogeneity_failures", n - hom, 0, "=="),
        _check("conjugation_failures", n - conj, 0, "=="),
        _check("s_minus_one_accepted", n - rej, 0, "=="),
        _check("regions_runtime_s", el, 5.0, "<"),
    ]


def eigenflow_case(w=None, n_nodes=96, dt=1e-4, T=1.0):
    """Evolve the least-damped oscillatory pencil eigenvector; return (s, deviation)."""
    w = PotentialSpec((30.0, 1.0)) if w is None else w
    ev, V, disc = pencil_eigs(w, n_nodes, vectors=True)
    ok = np.isfinite(ev) & (np.abs(ev.imag) > 1e-6)
    idx = np.flatnonzero(ok)
    i = idx[np.argmax(ev[idx].real)]
    v = V[:, i] / V[np.argmax(np.abs(V[:, i])), i]
    u = GridFunction.from_samples(disc, v)
    return complex(ev[i]), eigenmode_check(w, ev[i], u, T, dt=dt).deviation


def suite_eigenflow():
    t0 = time.perf_counter()
    _, dev = eigenflow_case()
    el = time.perf_counter() - t0
    return [
        _check("eigen_evolution_deviation", dev, 1e-3, "<"),
        _check("eigenflow_runtime_s", el, 60.0, "<"),
    ]


def suite_boundary():
    A2 = boundary_matrix_A(2)
    B2 = boundary_matrix_B(2)
    exact = float(np.array_equal(A2, [[2, 1], [-4, 4]]) and np.array_equal(B2, [[1, 1], [0, 2]]))
    rng = np.random.default_rng(11)
    worst = 0.0
    for N in (1, 2, 3, 5):
        spec = ShiftedProblemSpec(kappa=float(rng.uniform(0, 2)), N_shift=N, lam=10.0)
        s = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        roots = [1.0] + list(rng.uniform(-1, 1, N + 2))
        u = np.polynomial.Polynomial.fromroots(roots)
        f = shifted_apply_poly(u.coef, spec, s)
        b = [f.deriv(n)(1.0) for n in range(N)]
        a = np.array([u.deriv(n)(1.0) for n in range(1, N + 2)])
        w_sol = boundary_solve(spec, s, boundary_rhs(spec, b, a[N]))
        worst = max(worst, float(np.max(np.abs(w_sol - a[:N]) / np.maximum(1, np.abs(a[:N])))))
    return [
        _check("matrices_exact", exact, 1.0, "=="),
        _check("boundary_round_trip", worst, 1e-10, "<"),
    ]


def suite_poles(n_nodes=16):
    w = PotentialSpec((30.0, 1.0))
    roots = qnf_scan(w, (-8.0, -1.0, 0.5, 10.0), grid=(24, 24))
    least_damped = max(roots, key=lambda r: r.s.real)
    s = complex(polish_root_mp(w, least_damped.s))
    disc = make_disc(n_nodes)
    c0 = condition_estimate(assemble_Ls(w, s, disc))
    c1 = condition_estimate(assemble_Ls(w, s + 0.1, disc))
    return [_check("condition_ratio_root_vs_shift", c0 / c1, 1e6, ">")]


def suite_ringdown():
    w = PotentialSpec((30.0, 1.0))
    q = max((z for z in qnf_collocation(w, 24, resolutions=(24, 48)) if z.imag > 0),
            key=lambda z: z.real)
    disc = make_disc(32)
    traj = evolve(w, gaussian_data(disc, 0.5, 0.2), 5.0, dt=1e-3, snapshot_every=10)
    j = int(np.argmin(np.abs(disc.nodes - 0.5)))
    sig = [(t, g.values[j]) for t, g in traj if t >= 1.0 - 1e-9]
    d = ringdown_fit(sig, 10).dominant(min_imag=0.5)
    d = d if d.imag > 0 else d.conjugate()
    return [_check("ringdown_vs_collocation", abs(d - q), 5e-3, "<")]


SUITES = {
    "angles": suite_angles,
    "taylor": suite_taylor,
    "aretakis": suite_aretakis,
    "recurrence": suite_recurrence,
    "crossmethod": suite_crossmethod,
    "gevrey": suite_gevrey,
    "regions": suite_regions,
    "eigenflow": suite_eigenflow,
    "boundary": suite_boundary,
    "poles": suite_poles,
    "ringdown": suite_ringdown,
}


def run_suite(name: str):
    """Run one named suite; returns a list of :class:`CheckResult`."""
    from .errors import DomainError

    if name not in SUITES:
        raise DomainError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return SUITES[name]()
