"""Command-line front end.

Subcommands: filter, gamma, regimes, figure, oracle. Every table is written
as CSV (``#``-prefixed parameter echo, then a header row) or as JSON
``{"params", "columns", "rows"}``. Exit status: 0 success, 1 numerical or
threshold failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bathsim import compare_to_perturbative, discretize
from .core import (
    AccuracyError,
    CapacityError,
    DomainError,
    EvaluationError,
    SpectralDensity,
    StatePrep,
    SystemParams,
    Temperature,
)
from .decay import (
    FAMILIES,
    GENERAL,
    LARGE_SPIN,
    POPULATION_DECAY,
    PURE_DEPHASING,
    CurveError,
    ModelSpec,
    default_tau_grid,
    filter_for,
    gamma_curve,
)
from .quad import QuadConfig

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_ANGLE = re.compile(r"^\s*([+-]?\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*$")


def parse_angle(text):
    """Radians, as a float or a multiple of pi such as ``pi/2`` or ``3*pi/4``."""
    m = _ANGLE.match(text)
    if m:
        coef = m.group(1)
        num = float(coef) if coef not in ("", "+", "-") else (-1.0 if coef == "-" else 1.0)
        den = float(m.group(2)) if m.group(2) else 1.0
        return num * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle in radians: {text!r}") from None


@dataclass
class RunConfig:
    model: ModelSpec
    quad: QuadConfig
    fmt: str = "csv"
    out: str | None = None
    precision: int = 9

    def params(self):
        m = self.model
        p = {
            "family": m.family,
            "epsilon": m.sys.epsilon,
            "delta": m.sys.delta,
            "G": m.bath.coupling_g,
            "s": m.bath.ohmicity_s,
            "wc": m.bath.cutoff_wc,
            "beta": m.T.beta,
            "rel_tol": self.quad.rel_tol,
        }
        if m.prep.is_large_spin:
            p.update(init=m.prep.kind, n_spins=m.prep.n_spins)
        else:
            p.update(theta=m.prep.theta, phi=m.prep.phi)
        return p


def _fmt(x, precision):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, str):
        return x
    return f"{float(x):.{precision}g}"


def render(params, columns, rows, fmt="csv", precision=9, comment=None):
    """Serialize one table; identical inputs give byte-identical output."""
    if fmt == "json":
        payload = {
            "params": params,
            "columns": list(columns),
            "rows": [[r if isinstance(r, str) else (bool(r) if isinstance(r, (bool, np.bool_)) else float(f"{float(r):.{precision}g}")) for r in row] for row in rows],
        }
        return json.dumps(payload, indent=1, sort_keys=True, allow_nan=True) + "\n"
    lines = [f"# {k}: {json.dumps(v)}" for k, v in sorted(params.items())]
    if comment:
        lines.append(f"# {comment}")
    lines.append(",".join(columns))
    lines += [",".join(_fmt(x, precision) for x in row) for row in rows]
    return "\n".join(lines) + "\n"


def _cell(text):
    try:
        return float(text)
    except ValueError:
        return text


def parse_table(text):
    """Inverse of ``render``: returns ``(params, columns, rows, comment)``.

    Numbers come back as floats and CSV booleans as 0/1, so
    ``render(*parse_table(t))`` reproduces ``t`` for any rendered table
    (given the same format and precision).
    """
    if text.lstrip().startswith("{"):
        payload = json.loads(text)
        return payload["params"], payload["columns"], [tuple(r) for r in payload["rows"]], None
    params, comment, body = {}, None, []
    for line in text.splitlines():
        if line.startswith("# "):
            key, sep, val = line[2:].partition(": ")
            try:
                if not sep:
                    raise ValueError
                params[key] = json.loads(val)
            except ValueError:
                comment = line[2:]
        elif line:
            body.append(line)
    columns = tuple(body[0].split(","))
    rows = [tuple(_cell(c) for c in line.split(",")) for line in body[1:]]
    return params, columns, rows, comment


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def _add_model_args(p):
    g = p.add_argument_group("model")
    g.add_argument("--family", choices=FAMILIES, default=None)
    g.add_argument("--eps", type=float, default=2.0, help="level spacing epsilon")
    g.add_argument("--delta", type=float, default=2.0, help="tunneling amplitude Delta")
    g.add_argument("--theta", type=parse_angle, default=math.pi / 2, help="polar angle, radians or k*pi/m")
    g.add_argument("--phi", type=parse_angle, default=0.0, help="azimuth, radians or k*pi/m")
    g.add_argument("--nspins", type=int, default=1, help="particle count for --family large")
    g.add_argument("--init", choices=("jz", "jx"), default="jz", help="large-spin initial state")
    g.add_argument("--G", type=float, default=0.01, help="coupling strength")
    g.add_argument("--s", type=float, default=1.0, help="Ohmicity exponent")
    g.add_argument("--wc", type=float, default=10.0, help="cutoff frequency")
    t = g.add_mutually_exclusive_group()
    t.add_argument("--beta", type=float, default=None, help="inverse temperature")
    t.add_argument("--zero-temp", action="store_true", help="zero-temperature bath (default)")
    o = p.add_argument_group("output")
    o.add_argument("--format", choices=("csv", "json"), default="csv")
    o.add_argument("--out", default=None, help="output file (directory for `figure`)")
    o.add_argument("--precision", type=int, default=9, help="significant digits")
    o.add_argument("--rel-tol", type=float, default=1e-8)


def _add_tau_grid(p, lo=0.02, hi=3.0, n=150):
    p.add_argument("--tau-min", type=float, default=lo)
    p.add_argument("--tau-max", type=float, default=hi)
    p.add_argument("--tau-points", type=int, default=n)


def build_model(args, default_family=GENERAL):
    family = args.family or default_family
    sys_ = SystemParams(args.eps, args.delta)
    if family == LARGE_SPIN:
        prep = StatePrep(args.init, n_spins=args.nspins)
    elif family == POPULATION_DECAY:
        prep = StatePrep.qubit(0.0, 0.0)
    else:
        prep = StatePrep.qubit(args.theta, args.phi % (2 * math.pi))
    T = Temperature(args.beta)
    return ModelSpec(family, sys_, prep, SpectralDensity(args.G, args.s, args.wc), T)


def run_config(args, default_family=GENERAL):
    return RunConfig(build_model(args, default_family), QuadConfig(rel_tol=args.rel_tol),
                     args.format, args.out, args.precision)


def filter_table(model, tau, omegas):
    q = filter_for(model, tau)(np.asarray(omegas, dtype=float))
    return ("omega", "Q"), list(zip(omegas, np.atleast_1d(q)))


def gamma_table(model, taus, cfg):
    curve = gamma_curve(taus, model, cfg)
    rows = list(zip(curve.taus, curve.gammas, curve.labels()))
    return curve, ("tau", "gamma", "label"), rows


def regimes_table(curve):
    rows = [("extremum", t, t, kind) for t, kind in curve.extrema]
    rows += [("segment", lo, hi, lab) for lo, hi, lab in curve.segments]
    return ("record", "tau_start", "tau_end", "label"), rows


def cmd_filter(args):
    rc = run_config(args)
    omegas = np.linspace(args.omega_min, args.omega_max, args.omega_points)
    cols, rows = filter_table(rc.model, args.tau, omegas)
    params = rc.params() | {"tau": args.tau}
    _emit(render(params, cols, rows, rc.fmt, rc.precision, "omega and Q in units with hbar = 1"), rc.out)
    return EXIT_OK


def _tau_grid(args):
    if not (0 < args.tau_min < args.tau_max) or args.tau_points < 5:
        raise DomainError("need 0 < tau-min < tau-max and at least 5 tau points")
    return default_tau_grid(args.tau_min, args.tau_max, args.tau_points)


def cmd_gamma(args):
    rc = run_config(args)
    curve, cols, rows = gamma_table(rc.model, _tau_grid(args), rc.quad)
    params = rc.params() | {"status": curve.status}
    _emit(render(params, cols, rows, rc.fmt, rc.precision, "label: Zeno (rising) / AntiZeno (falling)"), rc.out)
    return EXIT_OK


def cmd_regimes(args):
    rc = run_config(args)
    curve = gamma_curve(_tau_grid(args), rc.model, rc.quad)
    cols, rows = regimes_table(curve)
    params = rc.params() | {"status": curve.status}
    _emit(render(params, cols, rows, rc.fmt, rc.precision), rc.out)
    return EXIT_OK


# (epsilon, delta) pairs shared by the figure datasets
_FILTER_CASES = [(0.0, 1.0), (1.0, 0.0), (2.0, 1.0)]
_GAMMA_CASES = [(0.0, 2.0), (2.0, 0.0), (2.0, 2.0)]

FIGURES = {
    "1": dict(kind="filter", tau=2.0, cases=_FILTER_CASES, theta=math.pi / 2),
    "2": dict(kind="filter", tau=1.0, cases=_FILTER_CASES, theta=math.pi / 2),
    "3": dict(kind="gamma", s=1.0, cases=_GAMMA_CASES, theta=math.pi / 2),
    "4": dict(kind="gamma", s=0.8, cases=_GAMMA_CASES, theta=math.pi / 2),
    "5": dict(kind="gamma", s=2.0, cases=_GAMMA_CASES, theta=math.pi / 2),
    "6": dict(kind="gamma", s=0.8, cases=_GAMMA_CASES, init="jz", n_spins=20),
    "7": dict(kind="gamma", s=1.5, cases=_GAMMA_CASES, init="jx", n_spins=20),
    "theta0": dict(kind="gamma", s=1.0, cases=_GAMMA_CASES, theta=0.0),
}


def figure_models(fig_id, G=0.01, wc=10.0):
    fig = FIGURES[fig_id]
    bath = SpectralDensity(G, fig.get("s", 1.0), wc)
    for eps, dlt in fig["cases"]:
        if "init" in fig:
            prep = StatePrep(fig["init"], n_spins=fig["n_spins"])
            family = LARGE_SPIN
        else:
            prep = StatePrep.qubit(fig["theta"], 0.0)
            family = GENERAL
        yield f"eps{eps:g}_delta{dlt:g}", ModelSpec(family, SystemParams(eps, dlt), prep, bath)


def cmd_figure(args):
    if args.figure_id not in FIGURES:
        print(f"unknown figure id {args.figure_id!r}; choose from {sorted(FIGURES)}", file=sys.stderr)
        return EXIT_USAGE
    fig = FIGURES[args.figure_id]
    out = Path(args.out or f"figure_{args.figure_id}")
    out.mkdir(parents=True, exist_ok=True)
    cfg = QuadConfig(rel_tol=args.rel_tol)
    ext = "json" if args.format == "json" else "csv"
    curves = []
    for name, model in figure_models(args.figure_id, args.G, args.wc):
        rc = RunConfig(model, cfg, args.format, None, args.precision)
        params = rc.params()
        if fig["kind"] == "filter":
            omegas = np.linspace(args.omega_min, args.omega_max, args.omega_points)
            cols, rows = filter_table(model, fig["tau"], omegas)
            params["tau"] = fig["tau"]
        else:
            curve, cols, rows = gamma_table(model, _tau_grid(args), cfg)
            params["status"] = curve.status
            params["extrema"] = [[t, k] for t, k in curve.extrema]
        fname = f"{name}.{ext}"
        (out / fname).write_text(render(params, cols, rows, args.format, args.precision))
        curves.append({"file": fname, "params": params, "columns": list(cols)})
    manifest = {"figure": args.figure_id, "kind": fig["kind"], "curves": curves}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    print(out)
    return EXIT_OK


def cmd_oracle(args):
    rc = run_config(args, default_family=PURE_DEPHASING)
    model = rc.model
    wmax = args.bath_omega_max if args.bath_omega_max else 4.0 * model.bath.cutoff_wc
    disc = discretize(model.bath, args.modes, wmax)
    taus = np.linspace(args.tau_min, args.tau_max, args.tau_points)
    report = compare_to_perturbative(model, disc, taus, args.nmax, args.max_gap,
                                     check_refinement=args.check_refinement)
    params = rc.params() | {"modes": args.modes, "nmax": args.nmax, "bath_omega_max": wmax,
                            "max_gap": args.max_gap, "max_observed_gap": report.max_gap,
                            "check_refinement": args.check_refinement}
    _emit(render(params, report.columns, report.rows(), rc.fmt, rc.precision,
                 "gap = |gamma_sim - gamma_pert| / gamma_pert"), rc.out)
    if np.any(report.under_resolved):
        print("note: Gamma_sim moves by more than the gap on some rows when the mode count "
              "is doubled", file=sys.stderr)
    if not report.ok:
        print(f"gap {report.max_gap:.3g} vs --max-gap {args.max_gap}; see flagged rows", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def make_parser():
    parser = argparse.ArgumentParser(prog="qzeno", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("filter", help="Q(omega, tau) on an omega grid")
    _add_model_args(p)
    p.add_argument("--tau", type=float, default=2.0)
    p.add_argument("--omega-min", type=float, default=0.0)
    p.add_argument("--omega-max", type=float, default=8.0)
    p.add_argument("--omega-points", type=int, default=400)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("gamma", help="Gamma(tau) with regime labels")
    _add_model_args(p)
    _add_tau_grid(p)
    p.set_defaults(func=cmd_gamma)

    p = sub.add_parser("regimes", help="extrema and Zeno/anti-Zeno segments of Gamma(tau)")
    _add_model_args(p)
    _add_tau_grid(p)
    p.set_defaults(func=cmd_regimes)

    p = sub.add_parser("figure", help="dataset for one figure: one file per curve plus manifest.json")
    p.add_argument("figure_id", help=f"one of {sorted(FIGURES)}")
    _add_model_args(p)
    _add_tau_grid(p)
    p.add_argument("--omega-min", type=float, default=0.0)
    p.add_argument("--omega-max", type=float, default=8.0)
    p.add_argument("--omega-points", type=int, default=400)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("oracle", help="exact discretized-bath simulation vs perturbative Gamma")
    _add_model_args(p)
    _add_tau_grid(p, 0.2, 2.0, 10)
    p.add_argument("--modes", type=int, default=40)
    p.add_argument("--nmax", type=int, default=2)
    p.add_argument("--bath-omega-max", type=float, default=None,
                   help="bath discretization cutoff (default 4*wc)")
    p.add_argument("--max-gap", type=float, default=0.05)
    p.add_argument("--check-refinement", action="store_true",
                   help="repeat with twice the modes and flag under-resolved rows")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        parser.error(str(exc))  # exits with EXIT_USAGE
    except (AccuracyError, EvaluationError, CapacityError, CurveError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
