"""Command-line entry point ``qnm``.

Every subcommand writes rows of flat records to stdout (or ``--out``) as
CSV or JSON lines with sorted keys and 17-significant-digit floats.
Exit status: 0 success, 2 domain/usage errors, 3 numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import gevrey, leaver, regions, series, spectral, verify
from ._numerics import fmt17
from .errors import DomainError, NumericalError
from .evolve import evolve as run_evolution
from .evolve import gaussian_data
from .potential import load_potential

__all__ = ["main", "build_parser", "format_rows"]


class UsageError(DomainError):
    pass


class _Parser(argparse.ArgumentParser):
    """Raise instead of exiting so errors map onto the documented exit codes."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# Serialisation -----------------------------------------------------------------

def _scalar(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def _json_value(v):
    v = _scalar(v)
    if isinstance(v, float):
        return fmt17(v) if math.isfinite(v) else "null"
    return json.dumps(v)


def _csv_value(v):
    v = _scalar(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return fmt17(v)
    return str(v)


def format_rows(rows, fmt: str) -> str:
    """Serialise a list of flat dicts deterministically."""
    if fmt == "jsonl":
        lines = []
        for r in rows:
            body = ", ".join(f"{json.dumps(k)}: {_json_value(r[k])}" for k in sorted(r))
            lines.append("{" + body + "}")
        return "".join(line + "\n" for line in lines)
    if not rows:
        return ""
    keys = sorted({k for r in rows for k in r})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(keys)
    for r in rows:
        w.writerow([_csv_value(r[k]) if k in r else "" for k in keys])
    return buf.getvalue()


def _cplx(prefix, z):
    z = complex(z)
    return {f"{prefix}_re": z.real, f"{prefix}_im": z.imag}


# Argument helpers ----------------------------------------------------------------

def _s(args):
    return complex(args.s_re, args.s_im)


def _rect(text):
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"--rect expects re0,re1,im0,im1; got {text!r}") from exc
    if len(parts) != 4:
        raise UsageError(f"--rect expects four numbers; got {text!r}")
    return tuple(parts)


def _grid(text):
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError as exc:
        raise UsageError(f"--grid expects NxM; got {text!r}") from exc


def _potential(args):
    if not args.potential:
        raise UsageError("--potential is required")
    return load_potential(args.potential)


# Commands ------------------------------------------------------------------------

def cmd_regions(args):
    if args.angles:
        return [{"name": "phi0", "value": regions.sector_angle_phi0(),
                 "over_pi": regions.sector_angle_phi0() / math.pi},
                {"name": "phi1", "value": regions.sector_angle_phi1(),
                 "over_pi": regions.sector_angle_phi1() / math.pi}]
    if args.grid:
        try:
            re0, re1, im0, im1, n = args.grid.split(",")
            box = (float(re0), float(re1), float(im0), float(im1), int(n))
        except ValueError as exc:
            raise UsageError(f"--grid expects re0,re1,im0,im1,n; got {args.grid!r}") from exc
        if args.sigma is None:
            raise UsageError("--sigma is required with --grid")
        keys = ("re", "im", "in_omega1", "in_omega2", "in_omega3", "in_omega")
        return [dict(zip(keys, row)) for row in regions.omega_grid(*box, args.sigma)]
    s = _s(args)
    if args.sigma_interval:
        return [{"lo": lo, "hi": hi, **_cplx("s", s)}
                for lo, hi in regions.sigma_interval(s, args.resolution)]
    if args.sigma is None:
        raise UsageError("--sigma is required unless --angles or --sigma-interval is given")
    v = regions.omega_member(s, args.sigma)
    return [{**_cplx("s", s), "sigma": args.sigma, **v.as_dict()}]


def cmd_series(args):
    w = _potential(args)
    s = _s(args)
    if args.end == "one":
        H = series.leaver_coeffs(w, s, args.K, dps=args.dps)
    else:
        H = series.taylor_at_zero(w, s, [1.0], args.K)
    # value of entry k is (re + i im) * exp(log_scale)
    return [{"k": int(k), "re": m.real, "im": m.imag, "log_scale": e}
            for k, m, e in zip(H.indices(), H.mantissas, H.log_scales)]


def cmd_qnf(args):
    w = _potential(args)
    if args.seed_re is not None or args.seed_im is not None:
        seed = complex(args.seed_re or 0.0, args.seed_im or 0.0)
        found = [leaver.qnf_find(w, seed, method=args.method, tol=args.tol, depth=args.depth)]
    else:
        found = leaver.qnf_scan(w, _rect(args.rect), grid=_grid(args.grid), method=args.method,
                                tol=args.tol, depth=args.depth, workers=args.threads)
    return [r.as_dict() for r in found]


def cmd_gevrey(args):
    if args.mode == "classify":
        c = gevrey.classify_exp(_s(args), args.sigma, args.nmax)
        return [{"n": int(n), "log_g_n": g} for n, g in zip(c.n, c.log_g)]
    w = _potential(args)
    s = _s(args)
    H = series.leaver_coeffs(w, s, args.K, dps=args.dps)
    u = gevrey.series_oracle(H, x_min=args.x_min)
    # derivatives at x = 0 are outside the series' reach; the boundary piece is omitted
    zeros = series.CoeffSeq.from_values(np.zeros(args.M + 2))
    out = []
    for M in range(1, args.M + 1):
        xn = gevrey.x_norm(u, zeros, args.sigma, M, x_min=args.x_min)
        out.append({"M": M, "value": xn.value, "tail": xn.tail})
    return out


def cmd_spectral(args):
    w = _potential(args)
    if args.mode == "eig":
        if args.resolutions:
            res = tuple(int(r) for r in args.resolutions.split(","))
            vals = spectral.qnf_collocation(w, res[0], resolutions=res)
        else:
            vals = spectral.qnf_collocation(w, args.nodes)
        vals = sorted(vals, key=lambda z: (abs(z), z.imag, z.real))
        if args.vector_out:
            _write_eigenvector(w, args.nodes, vals, args.vector_out)
        return [_cplx("s", z) for z in vals]
    disc = spectral.make_disc(args.nodes)
    x = disc.nodes
    f = spectral.GridFunction.from_samples(disc, np.where(np.arange(len(x)) == len(x) - 1, 0.0, 1.0))
    r = spectral.resolvent_solve(w, _s(args), f, disc)
    return [{"x": xi, **_cplx("u", ui), "condition": r.condition} for xi, ui in zip(x, r.u.values)]


def _write_eigenvector(w, n_nodes, vals, path):
    """Store the pencil eigenvector nearest the least-damped filtered value."""
    if not vals:
        raise NumericalError("no filtered eigenvalue to export")
    target = max(vals, key=lambda z: (z.real, z.imag))
    lam, V, _ = spectral.pencil_eigs(w, n_nodes, vectors=True)
    lam = np.where(np.isfinite(lam), lam, np.inf)
    i = int(np.argmin(np.abs(lam - target)))
    v = V[:, i] / V[np.argmax(np.abs(V[:, i])), i]
    Path(path).write_text(json.dumps({
        "s_re": float(lam[i].real), "s_im": float(lam[i].imag),
        "re": [float(a) for a in v.real], "im": [float(a) for a in v.imag],
    }, sort_keys=True))


def _initial_data(args, disc_nodes):
    kind, _, rest = args.ic.partition(":")
    if kind == "gaussian":
        try:
            c, wd = (float(p) for p in rest.split(","))
        except ValueError as exc:
            raise UsageError(f"--ic gaussian:center,width; got {args.ic!r}") from exc
        disc = spectral.make_disc(disc_nodes)
        return gaussian_data(disc, c, wd)
    if kind == "eigenmode":
        try:
            data = json.loads(Path(rest).read_text())
            v = np.array(data["re"], dtype=float) + 1j * np.array(data["im"], dtype=float)
        except FileNotFoundError as exc:
            raise DomainError(f"eigenmode file not found: {rest}") from exc
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise DomainError(f"cannot read eigenmode file {rest}: {exc}") from exc
        disc = spectral.make_disc(len(v))
        return spectral.GridFunction.from_samples(disc, v)
    raise UsageError(f"--ic must be gaussian:center,width or eigenmode:file; got {args.ic!r}")


def cmd_evolve(args):
    w = _potential(args)
    psi0 = _initial_data(args, args.nodes)
    x = psi0.disc.nodes
    j = int(np.argmin(np.abs(x - args.probe)))
    traj = run_evolution(w, psi0, args.T, dt=args.dt, snapshot_every=args.snapshot_every)
    rows = [{"t": t, "re": g.values[j].real, "im": g.values[j].imag} for t, g in traj]
    if args.snapshots:
        lines = [{"t": t, "x": xi, **_cplx("psi", v)} for t, g in traj for xi, v in zip(x, g.values)]
        Path(args.snapshots).write_text(format_rows(lines, args.format))
    return rows


def cmd_verify(args):
    names = list(verify.SUITES) if args.suite == "all" else [args.suite]
    rows = []
    for name in names:
        for c in verify.run_suite(name):
            rows.append({"suite": name, **c.as_dict()})
    return rows


COMMANDS = {
    "regions": cmd_regions,
    "series": cmd_series,
    "qnf": cmd_qnf,
    "gevrey": cmd_gevrey,
    "spectral": cmd_spectral,
    "evolve": cmd_evolve,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    def global_flags(parser, default):
        parser.add_argument("--threads", type=int, default=default(None),
                            help="worker processes for scans")
        parser.add_argument("--out", default=default(None), help="output file (default stdout)")
        parser.add_argument("--format", choices=("csv", "jsonl"), default=default("jsonl"))
        parser.add_argument("--config", default=default(None),
                            help="JSON file of option defaults; flags override")

    p = _Parser(prog="qnm", description="Quasinormal frequencies of degenerate radial operators.")
    global_flags(p, lambda v: v)
    # the same flags are accepted after the subcommand without clobbering earlier ones
    common = _Parser(add_help=False)
    global_flags(common, lambda v: argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    _add = sub.add_parser
    sub.add_parser = lambda *a, **k: _add(*a, parents=[common], **k)

    def freq(sp, required=True):
        sp.add_argument("--s-re", type=float, required=required, default=None if required else 0.0)
        sp.add_argument("--s-im", type=float, required=required, default=None if required else 0.0)

    r = sub.add_parser("regions", help="admissibility of (s, sigma) and sector angles")
    freq(r, required=False)
    r.add_argument("--sigma", type=float)
    r.add_argument("--angles", action="store_true")
    r.add_argument("--sigma-interval", action="store_true")
    r.add_argument("--grid", default=None, help="re0,re1,im0,im1,n membership table")
    r.add_argument("--resolution", type=float, default=1e-3)

    r = sub.add_parser("series", help="series coefficients at x=1 or x=0")
    r.add_argument("--potential")
    freq(r)
    r.add_argument("--K", type=int, default=100)
    r.add_argument("--end", choices=("one", "zero"), default="one")
    r.add_argument("--dps", type=int, default=None)

    r = sub.add_parser("qnf", help="locate quasinormal frequencies")
    r.add_argument("--potential")
    r.add_argument("--method", choices=("cf", "asym"), default="cf")
    r.add_argument("--rect", default="-8,-0.5,-10,10")
    r.add_argument("--grid", default="40x40")
    r.add_argument("--tol", type=float, default=1e-9)
    r.add_argument("--depth", type=int, default=400)
    r.add_argument("--seed-re", type=float, default=None)
    r.add_argument("--seed-im", type=float, default=None)

    r = sub.add_parser("gevrey", help="Gevrey classification and truncated norms")
    r.add_argument("--mode", choices=("classify", "norm"), default="classify")
    freq(r)
    r.add_argument("--sigma", type=float, required=True)
    r.add_argument("--nmax", type=int, default=60)
    r.add_argument("--potential")
    r.add_argument("--K", type=int, default=200)
    r.add_argument("--M", type=int, default=20)
    r.add_argument("--x-min", type=float, default=0.2)
    r.add_argument("--dps", type=int, default=None)

    r = sub.add_parser("spectral", help="collocation eigenvalues or resolvent solve")
    r.add_argument("--potential")
    r.add_argument("--nodes", type=int, default=96)
    r.add_argument("--mode", choices=("eig", "solve"), default="eig")
    freq(r, required=False)
    r.add_argument("--resolutions", default=None, help="comma-separated node counts for the filter")
    r.add_argument("--vector-out", default=None, help="JSON file for the least-damped eigenvector")

    r = sub.add_parser("evolve", help="time evolution with probe output")
    r.add_argument("--potential")
    r.add_argument("--ic", default="gaussian:0.5,0.2")
    r.add_argument("--nodes", type=int, default=32)
    r.add_argument("--T", type=float, default=1.0)
    r.add_argument("--dt", type=float, default=None)
    r.add_argument("--probe", type=float, default=0.5)
    r.add_argument("--snapshot-every", type=int, default=1)
    r.add_argument("--snapshots", default=None, help="file for full-field snapshots")

    r = sub.add_parser("verify", help="run check suites")
    r.add_argument("--suite", choices=("all", *verify.SUITES), default="all")
    r.add_argument("--strict", action="store_true", help="exit 1 when any check fails")
    return p


def _load_config(path):
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise DomainError(f"config file not found: {path}") from exc
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"malformed config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise DomainError(f"config {path}: expected a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


_NEGATIVE_LISTS = ("--rect", "--grid")


def _join_negative_lists(argv):
    """Let ``--rect -8,-1,-10,10`` through; argparse would read the value as a flag."""
    out = []
    it = iter(argv)
    for a in it:
        if a in _NEGATIVE_LISTS:
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def _parse(argv):
    argv = _join_negative_lists(list(argv))
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError("a command is required: " + ", ".join(COMMANDS))
    if args.config:
        cfg = _load_config(args.config)
        cfg.pop("command", None)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions} | {a.dest for a in parser._actions}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise DomainError(f"unknown config keys for {args.command}: {', '.join(unknown)}")
        sub.set_defaults(**{k: v for k, v in cfg.items() if k in {a.dest for a in sub._actions}})
        parser.set_defaults(**{k: v for k, v in cfg.items()
                               if k in {a.dest for a in parser._actions}})
        # required options may now come from the config
        for a in sub._actions:
            if a.dest in cfg:
                a.required = False
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = _parse(sys.argv[1:] if argv is None else argv)
        rows = COMMANDS[args.command](args)
        text = format_rows(rows, args.format)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    if args.command == "verify" and args.strict and not all(r["passed"] for r in rows):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
