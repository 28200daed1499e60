"""Command-line front end: ``abelint <command> [options]``.

Every command prints one JSON document (``--format csv`` for tabular
commands) and exits with 0 on success, 1 on bad input, 2 on numerical
failure and 3 when a proved zero bound is violated.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .asymptotics import F_limits, IndecisiveFitError, endpoint_fit, endpoint_samples, infinity_exponent_fit
from .bifurcation import (
    CURVES,
    AnnulusKind,
    center_family_annulus,
    classify,
    curve_samples,
)
from .chebyshev import (
    SCAN_HEADER,
    SCAN_REGIONS,
    BoundViolation,
    count_zeros,
    cyclicity_experiment,
    eval_F,
    max_zero_count,
    nocheb_experiment,
    region_scan,
    sigma_grid,
)
from .hamiltonian import (
    CenterFamilyModel,
    InvalidParameterError,
    ParameterPoint,
    RootFindingError,
    build_center_family,
    build_normal_form,
)
from .quadrature import (
    QuadratureError,
    abelian_integrals,
    continued_integral,
    cycle_integrals,
    cycle_pair,
    cycle_pairs,
    delta_at_critical,
    delta_curve,
    determination_walk,
    winding,
)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_BOUND = 0, 1, 2, 3
SAMPLE_HEADER = ["h_re", "h_im", "k", "val_re", "val_im", "err", "method"]


class InputError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


# -- input helpers -------------------------------------------------------


def _finite(x: float, name: str) -> float:
    if not math.isfinite(x):
        raise InputError(f"{name} must be finite")
    return x


def parameter_point(args) -> ParameterPoint:
    complex_mode = args.lambda_re is not None or args.lambda_im is not None
    if complex_mode:
        if args.lam is not None:
            raise InputError("use either --lambda or --lambda-re/--lambda-im")
        if args.mu is not None:
            raise InputError("mu is the conjugate of lambda in complex mode; do not pass --mu")
        re = _finite(args.lambda_re or 0.0, "--lambda-re")
        im = _finite(args.lambda_im or 0.0, "--lambda-im")
        return ParameterPoint.complex(complex(re, im))
    if args.lam is None or args.mu is None:
        raise InputError("give --lambda and --mu, or --lambda-re and --lambda-im")
    return ParameterPoint.real(_finite(args.lam, "--lambda"), _finite(args.mu, "--mu"))


def model_and_annulus(args):
    """Normal form (default) or center family (``--cf``) with its annulus."""
    if getattr(args, "cf", None):
        try:
            coeffs = tuple(float(c) for c in args.cf.split(","))
        except ValueError as exc:
            raise InputError(f"--cf expects comma separated numbers: {exc}") from exc
        cf = CenterFamilyModel(coeffs)
        m = build_center_family(cf)
        return m, center_family_annulus(m), None
    p = parameter_point(args)
    m = build_normal_form(p)
    report = classify(p)
    kind = args.annulus or "O1"
    try:
        a = report.annulus(AnnulusKind(kind))
    except (KeyError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    return m, a, p


def energy(token: str, a, offset: float) -> float:
    """``--h`` value: a number or one of ``hc+ hc- hs- hs+`` shifted by ``offset*|Sigma|``."""
    table = {"hc+": (a.h_c, 1), "hc-": (a.h_c, -1), "hs-": (a.h_s, -1), "hs+": (a.h_s, 1)}
    if token in table:
        base, sign = table[token]
        return base + sign * offset * a.width
    try:
        return _finite(float(token), "--h")
    except ValueError as exc:
        raise InputError(f"--h must be a number or one of {', '.join(table)}") from exc


# -- output helpers ------------------------------------------------------


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        x = complex(x)
        if x.imag == 0:
            return _jsonable(x.real)
        return {"re": _jsonable(x.real), "im": _jsonable(x.imag)}
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def render_json(command: str, config: dict, result) -> str:
    doc = {"command": command, "version": __version__, "config": config, "result": result}
    return json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n"


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else v for v in r])
    return buf.getvalue()


def load_schema(command: str) -> dict:
    """JSON schema of the ``command`` output shipped with the package."""
    from importlib import resources

    return json.loads(resources.files("abelint").joinpath("schemas", f"{command}.json").read_text())


def write_atomic(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".abelint-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _sample_rows(records):
    return [[r[c] for c in SAMPLE_HEADER] for r in records]


# -- commands ------------------------------------------------------------
# each returns (result, csv rows or None, plot callback or None)


def cmd_classify(args):
    p = parameter_point(args)
    rep = classify(p)
    rows = [[a.kind.value, a.sigma[0], a.sigma[1], a.center, a.terminator.value, a.exceptional]
            for a in rep.annuli]
    return rep.to_dict(), (["annulus", "h_c", "h_s", "center", "terminator", "exceptional"], rows), None


def cmd_curves(args):
    names = CURVES if args.curve == "all" else (args.curve,)
    samples = [s for name in names for s in curve_samples(name, args.n)]
    rows = [list(s.row().values()) for s in samples]
    result = {"samples": [s.row() for s in samples]}

    def plot(path):
        from .plotting import plot_curves

        plot_curves(samples, path)

    return result, (["curve", "re_lambda", "im_lambda", "mu"], rows), plot


def cmd_integrate(args):
    m, a, _ = model_and_annulus(args)
    ks = args.k or [0]
    if args.grid:
        hs = sigma_grid(a, args.grid)
    else:
        if args.h is None:
            raise InputError("give --h or --grid")
        hs = [energy(args.h, a, args.offset)]
    records = []
    for h in hs:
        if a.h_c < h < a.h_s:
            samples = abelian_integrals(m, a, float(h), ks, tol=args.tol)
        else:
            pair = cycle_pair(m, a, float(h)) if h < a.h_c else None
            if pair is None:
                raise InputError("--h must lie below h_s (use `delta` above the saddle level)")
            res = cycle_integrals(m, float(h), pair, ks, tol=args.tol)
            samples = [res.sample(float(h), k) for k in ks]
        records += [s.to_record() for s in samples]
    result = {"annulus": a.to_dict(), "samples": records}

    def plot(path):
        from .plotting import plot_samples

        plot_samples(records, path, title=a.kind.value)

    return result, (SAMPLE_HEADER, _sample_rows(records)), plot


def cmd_continue(args):
    m, a, _ = model_and_annulus(args)
    if args.h is not None:
        hs = [energy(args.h, a, args.offset)]
    else:
        hs = list(a.h_c - a.width * np.geomspace(args.depth_min, args.depth_max, args.n))
    if any(not h < a.h_c for h in hs):
        raise InputError("continuation needs h below h_c")
    records, agreement = [], []
    for h, pair in zip(hs, cycle_pairs(m, a, hs)):
        rc = continued_integral(m, a, float(h), tol=args.tol)
        cc = cycle_integrals(m, float(h), pair, (0,), tol=args.tol).sample(float(h), 0)
        records += [rc.to_record(), cc.to_record()]
        agreement.append(abs(rc.value - cc.value) / abs(rc.value))
    result = {"annulus": a.to_dict(), "samples": records, "max_rel_disagreement": max(agreement)}

    def plot(path):
        from .plotting import plot_samples

        plot_samples([r for r in records if r["method"] == "RCurve"], path, title="continued $I_0$")

    return result, (SAMPLE_HEADER, _sample_rows(records)), plot


def _check_bound(a, count, what):
    if a.exceptional and count > 1:
        raise BoundViolation(f"{what}: {count} zeros on an exceptional annulus")


def cmd_zeros(args):
    if args.a0 == 0 and args.a1 == 0:
        raise InputError("(a0, a1) must not both vanish")
    m, a, _ = model_and_annulus(args)
    grid = sigma_grid(a, args.grid_size)
    table = eval_F(m, a, grid, tol=args.tol)
    rep = count_zeros(m, a, args.a0, args.a1, table=table)
    result = {"annulus": a.to_dict(), **rep.to_dict()}
    _check_bound(a, rep.count, "zeros")
    rows = [[z, k] for z, k in rep.zeros]

    def plot(path):
        from .plotting import plot_F

        level = -args.a0 / args.a1 if args.a1 else None
        plot_F(table.h, table.F, path, [z for z, _ in rep.zeros], level)

    return result, (["h", "multiplicity"], rows), plot


def cmd_maxzeros(args):
    m, a, _ = model_and_annulus(args)
    table = eval_F(m, a, sigma_grid(a, args.grid_size), tol=args.tol)
    rep = max_zero_count(m, a, table=table, directions=args.directions)
    result = {"annulus": a.to_dict(), **rep.to_dict()}
    _check_bound(a, rep.max_zeros, "maxzeros")
    if rep.direction_max is not None:
        _check_bound(a, rep.direction_max, "direction scan")

    def plot(path):
        from .plotting import plot_F

        plot_F(table.h, table.F, path)

    return result, (["h", "F"], [[h, f] for h, f in rep.extrema]), plot


def cmd_asymptote(args):
    m, a, _ = model_and_annulus(args)
    if args.end == "inf":
        hs = np.geomspace(args.h_min, args.h_max, args.n)
        pts = determination_walk(m, a, hs, +1, tol=args.tol)
        out = {}
        for k in (0, 1):
            vals = [p.values[k] for p in pts]
            out[f"I{k}"] = infinity_exponent_fit(hs, vals).to_dict()
        out["expected"] = {"I0": -0.3, "I1": -0.1}
        rows = [[k, v["exponent"], v["uncertainty"], v["raw_slope"]] for k, v in
                ((0, out["I0"]), (1, out["I1"]))]
        return out, (["k", "exponent", "uncertainty", "raw_slope"], rows), None
    end = "s" if args.end == "hs" else "c"
    samples = endpoint_samples(m, a, end)
    h_end = a.h_s if end == "s" else a.h_c
    fit = endpoint_fit(samples[0], h_end)
    lim = F_limits(m, a)
    result = {"annulus": a.to_dict(), "fit_I0": fit.to_dict(), "F_limits": lim.to_dict()}
    rows = [[fit.model.value, fit.coefficient, fit.exponent, fit.residual, fit.ratio, lim.at_hc, lim.at_hs]]
    return result, (["model", "coefficient", "exponent", "residual", "ratio", "F_hc", "F_hs"], rows), None


def cmd_delta(args):
    m, a, _ = model_and_annulus(args)
    if args.critical:
        dc = delta_at_critical(m, a)
        d = dc.to_dict()
        return d, (list(d), [[d[k] if not isinstance(d[k], list) else str(d[k]) for k in d]]), None
    hs = a.h_s + a.width * np.geomspace(args.lo, args.hi, args.n)
    samples = delta_curve(m, a, hs, require_exceptional=not args.any_annulus, tol=args.tol)
    recs = [s.to_record() for s in samples]
    signs = {int(np.sign(s.im_F)) for s in samples}
    result = {
        "annulus": a.to_dict(),
        "samples": recs,
        "min_abs_delta": min(abs(s.delta) for s in samples),
        "im_F_constant_sign": len(signs) == 1 and 0 not in signs,
    }
    if a.exceptional and result["min_abs_delta"] == 0:
        raise BoundViolation("Delta vanishes on the grid")

    def plot(path):
        from .plotting import plot_delta

        plot_delta(samples, path)

    return result, (list(recs[0]), [list(r.values()) for r in recs]), plot


def cmd_winding(args):
    m, a, _ = model_and_annulus(args)
    res = winding(m, a, args.r, args.which, alpha0=args.alpha0)
    d = res.to_dict()
    if args.which == "I0":
        d["expected_big_circle"] = -3 * math.pi / 5
    if args.which == "I0" and a.exceptional and round(res.total / (2 * math.pi)) >= 1:
        raise BoundViolation(f"argument increase {res.total:.3f} counts a zero of I0")

    def plot(path):
        from .plotting import plot_winding

        plot_winding(res, path)

    return d, (["piece", "arg_increase"], [[k, v] for k, v in res.pieces.items()]), plot


def cmd_cyclicity(args):
    res = cyclicity_experiment(args.a2, args.a3, a1=args.a1, alpha0=args.alpha0)
    d = res.to_dict()
    rows = [[z, k] for z, k in res.report.zeros]
    return d, (["t", "multiplicity"], rows), None


def cmd_nocheb(args):
    res = nocheb_experiment(args.genus, ratio=args.ratio)
    d = res.to_dict()
    rows = [[z, k] for z, k in res.report.zeros]
    return d, (["t", "multiplicity"], rows), None


def cmd_scan(args):
    res = region_scan(args.region, args.samples, seed=args.seed, grid_size=args.grid_size)
    rows = [r.csv_row() for r in res.rows]
    result = {"summary": res.summary, "rows": [dict(zip(SCAN_HEADER, r)) for r in rows]}
    if res.summary["bound_violations"]:
        print("WARNING: exceptional annulus with more than one zero observed", file=sys.stderr)
    if res.summary["conjecture_exceeded"]:
        print("WARNING: observation exceeds the conjectured bound", file=sys.stderr)

    def plot(path):
        from .plotting import plot_scan

        plot_scan(res.rows, path)

    return result, (SCAN_HEADER, rows), plot


# -- parser --------------------------------------------------------------


def _add_point(p, annulus=True, cf=False):
    g = p.add_argument_group("parameters")
    g.add_argument("--lambda", dest="lam", type=float, help="real lambda")
    g.add_argument("--mu", type=float, help="real mu (0 <= mu <= lambda <= 1)")
    g.add_argument("--lambda-re", type=float, help="complex lambda, real part (mu = conj(lambda))")
    g.add_argument("--lambda-im", type=float, help="complex lambda, imaginary part")
    if annulus:
        g.add_argument("--annulus", choices=[k.value for k in AnnulusKind if k is not AnnulusKind.OC])
    if cf:
        g.add_argument("--cf", help="center family coefficients a1,a2,... (overrides lambda/mu)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="abelint", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", help="write to this file (atomically) instead of stdout")
    common.add_argument("--plot", help="also render a figure to this path (needs matplotlib)")
    common.add_argument("--tol", type=float, default=1e-10, help="relative quadrature tolerance")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("classify", parents=[common], help="region, annuli, Dynkin diagram")
    _add_point(p, annulus=False)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("curves", parents=[common], help="bifurcation curves")
    p.add_argument("--curve", choices=("all",) + CURVES, default="all")
    p.add_argument("--n", type=int, default=101)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("integrate", parents=[common], help="I_k(h) on an annulus")
    _add_point(p, cf=True)
    p.add_argument("--h", help="energy: number or hc+, hc-, hs-")
    p.add_argument("--offset", type=float, default=1e-6, help="relative offset for hc+/hs- tokens")
    p.add_argument("--k", type=int, action="append", help="monomial power (repeatable)")
    p.add_argument("--grid", type=int, help="sample this many points of Sigma instead of --h")
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("continue", parents=[common], help="I_0 below h_c by two methods")
    _add_point(p, cf=True)
    p.add_argument("--h")
    p.add_argument("--offset", type=float, default=0.1)
    p.add_argument("--depth-min", type=float, default=1e-3, help="smallest (h_c - h)/|Sigma|")
    p.add_argument("--depth-max", type=float, default=10.0)
    p.add_argument("--n", type=int, default=20)
    p.set_defaults(func=cmd_continue)

    p = sub.add_parser("zeros", parents=[common], help="zeros of a0*I_0 + a1*I_1")
    _add_point(p, cf=True)
    p.add_argument("--a0", type=float, required=True)
    p.add_argument("--a1", type=float, required=True)
    p.add_argument("--grid-size", type=int, default=2000)
    p.set_defaults(func=cmd_zeros)

    p = sub.add_parser("maxzeros", parents=[common], help="sharp zero bound over all (a0, a1)")
    _add_point(p, cf=True)
    p.add_argument("--grid-size", type=int, default=2000)
    p.add_argument("--directions", type=int, default=0, help="also scan this many directions")
    p.set_defaults(func=cmd_maxzeros)

    p = sub.add_parser("asymptote", parents=[common], help="endpoint and infinity fits")
    _add_point(p, cf=True)
    p.add_argument("--end", choices=("hs", "hc", "inf"), default="hs")
    p.add_argument("--h-min", type=float, default=1e2)
    p.add_argument("--h-max", type=float, default=1e5)
    p.add_argument("--n", type=int, default=31)
    p.set_defaults(func=cmd_asymptote)

    p = sub.add_parser("delta", parents=[common], help="Delta(h) above the saddle level")
    _add_point(p)
    p.add_argument("--lo", type=float, default=0.01, help="smallest (h - h_s)/|Sigma|")
    p.add_argument("--hi", type=float, default=100.0)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--critical", action="store_true", help="evaluate at the critical level above h_s")
    p.add_argument("--any-annulus", action="store_true", help="allow non-exceptional annuli")
    p.set_defaults(func=cmd_delta)

    p = sub.add_parser("winding", parents=[common], help="argument increase along the slit disc boundary")
    _add_point(p)
    p.add_argument("--r", type=float, default=1e-4)
    p.add_argument("--which", choices=("I0", "F"), default="I0")
    p.add_argument("--alpha0", type=float, default=0.0)
    p.set_defaults(func=cmd_winding)

    p = sub.add_parser("cyclicity", parents=[common], help="two small zeros on a quintic center family")
    p.add_argument("--a2", type=float, default=0.0)
    p.add_argument("--a3", type=float, default=-1.0)
    p.add_argument("--a1", type=float)
    p.add_argument("--alpha0", type=float)
    p.set_defaults(func=cmd_cyclicity)

    p = sub.add_parser("nocheb", parents=[common], help="[3g/2]-1 small zeros for genus g")
    p.add_argument("--genus", type=int, default=2)
    p.add_argument("--ratio", type=float, default=0.1)
    p.set_defaults(func=cmd_nocheb)

    p = sub.add_parser("scan", parents=[common], help="seeded region scan of zero bounds")
    p.add_argument("--region", choices=SCAN_REGIONS, required=True)
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--seed", type=int, default=20240601)
    p.add_argument("--grid-size", type=int, default=400)
    p.set_defaults(func=cmd_scan)
    return parser


def _config(args) -> dict:
    skip = {"func", "output", "plot", "format"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not (0 < args.tol <= 1e-2):
            raise InputError("--tol must lie in (0, 1e-2]")
    except InputError as exc:
        print(f"abelint: error: {exc}", file=stderr)
        return EXIT_INPUT
    try:
        result, table, plot = args.func(args)
    except BoundViolation as exc:
        print(f"abelint: bound violated: {exc}", file=stderr)
        return EXIT_BOUND
    except (InputError, InvalidParameterError, KeyError) as exc:
        print(f"abelint: error: {exc}", file=stderr)
        return EXIT_INPUT
    except (QuadratureError, RootFindingError, IndecisiveFitError, ArithmeticError, RuntimeError) as exc:
        print(f"abelint: numerical failure: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"abelint: error: {exc}", file=stderr)
        return EXIT_INPUT
    if args.format == "csv":
        text = render_csv(*table)
    else:
        text = render_json(args.command, _config(args), result)
    if args.output:
        write_atomic(args.output, text)
    else:
        stdout.write(text)
    if args.plot:
        if plot is None:
            print(f"abelint: no figure for {args.command}", file=stderr)
        else:
            plot(args.plot)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
