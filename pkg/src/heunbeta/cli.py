"""Command-line front end.

    heunbeta eval --a 2.5 --q 0.3 --alpha 0.4 --beta 1.1 --gamma 0.3 --delta 0.6 \\
        --method type1-beta0 --mu high --grid 0.05:0.5:10

Exit codes: 0 success, 2 parameter/domain error, 3 tolerance failure in
``compare``, 4 resonance or other structural degeneracy.
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys

import numpy as np

from .errors import DegeneracyError, HeunError, NotApplicable, ParameterError
from .expansions import (
    BRANCH_CONVENTIONS,
    comparison_grid,
    compare_with_oracle,
    eval_expansion,
    make_expansion,
    matching_oracle,
    make_transform,
    real_segment,
    _select_mu,
    _select_point,
)
from .heun import heun_frobenius_oracle, heun_ode, heun_residual, make_params
from .series import build_recurrence, indicial_exponents
from .termination import ExpansionDescriptor, check_termination, necessary_conditions, symmetric_closed_form

EXIT_OK, EXIT_PARAM, EXIT_TOL, EXIT_DEGENERATE = 0, 2, 3, 4

METHODS = {
    "type1-beta0": (1, "zero"),
    "type1-beta1": (1, "one"),
    "type1-appell-z0": (1, "z0"),
    "type2-beta0": (2, "zero"),
    "type2-beta1": (2, "one"),
    "type2-appell": (2, "z0"),
}
CLOSED_FORM = ("closed-form", "closed-form-24")
ALL_METHODS = ("oracle",) + tuple(METHODS) + CLOSED_FORM

COMPARE_TOL = 1e-7
TERMINATE_TOL = 1e-10
ROW_LABELS = {3: "SRQP", 4: "TSRQP", 5: "KTSRQP"}
PARAM_NAMES = ("a", "q", "alpha", "beta", "gamma", "delta", "epsilon")
DEFAULTS = {"method": "type1-beta0", "mu": "high", "terms": 200, "format": "csv",
            "tol": None, "nmax": 20, "grid": None, "epsilon": "auto"}

def parse_complex(text) -> complex:
    """Parse ``"1.5"``, ``"2-0.5i"``, ``"-i"`` or a JSON number."""
    if isinstance(text, (int, float, complex)):
        return complex(text)
    s = str(text).strip().replace(" ", "")
    if not s:
        raise ParameterError("empty complex literal")
    s = s.replace("i", "j")
    # bare imaginary unit with optional sign ("j", "-j", "1+j")
    s = re.sub(r"(^|[+-])j$", r"\g<1>1j", s)
    try:
        return complex(s)
    except ValueError as exc:
        raise ParameterError(f"cannot parse complex literal {text!r}") from exc


def format_complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.17g}{z.imag:+.17g}i"


def parse_grid(text: str) -> np.ndarray:
    try:
        start, stop, count = text.split(":")
        start, stop, count = float(start), float(stop), int(count)
    except ValueError as exc:
        raise ParameterError(f"grid must read start:stop:count, got {text!r}") from exc
    if count < 1:
        raise ParameterError("grid needs at least one point")
    if not (0 < start < 1 and 0 < stop < 1):
        raise ParameterError("grid must lie inside (0, 1)")
    return np.linspace(start, stop, count)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    for name in PARAM_NAMES:
        common.add_argument(f"--{name}", default=None,
                            help="complex literal, e.g. 0.3 or 0.3-0.1i" + ("; 'auto' applies the Fuchsian relation" if name == "epsilon" else ""))
    common.add_argument("--method", choices=ALL_METHODS, default=None)
    common.add_argument("--mu", choices=("low", "high"), default=None)
    common.add_argument("--terms", type=int, default=None)
    common.add_argument("--grid", default=None, help="start:stop:count, real, inside (0, 1)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--job", default=None, help="JSON file whose keys mirror the flags")

    parser = argparse.ArgumentParser(prog="heunbeta", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("eval", parents=[common], help="evaluate a solution on a grid")
    sub.add_parser("coeffs", parents=[common], help="dump expansion coefficients")
    sub.add_parser("recurrence", parents=[common], help="print the recurrence coefficient polynomials")
    sub.add_parser("compare", parents=[common], help="compare an expansion with the Frobenius oracle")
    t = sub.add_parser("terminate", parents=[common], help="search for finite-sum solutions")
    t.add_argument("--nmax", type=int, default=None)
    return parser


def _job(args) -> dict:
    job = {}
    if args.job:
        try:
            with open(args.job) as fh:
                job = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ParameterError(f"cannot read job file: {exc}") from exc
    merged = dict(DEFAULTS)
    merged.update({k: v for k, v in job.items()})
    for k, v in vars(args).items():
        if v is not None and k not in ("command", "job"):
            merged[k] = v
    missing = [n for n in PARAM_NAMES[:-1] if merged.get(n) is None]
    if missing:
        raise ParameterError("missing parameters: " + ", ".join(missing))
    if merged["method"] not in ALL_METHODS:
        raise ParameterError(f"unknown method {merged['method']!r}")
    return merged


def _params(job: dict):
    vals = {n: parse_complex(job[n]) for n in PARAM_NAMES[:-1]}
    eps = job.get("epsilon", "auto")
    vals["epsilon"] = None if eps in (None, "auto") else parse_complex(eps)
    return make_params(**vals)


def _grid(job: dict, domain) -> np.ndarray:
    lo, hi = domain
    if job.get("grid") is None:
        return np.linspace(lo, hi, 12)[1:-1]
    g = parse_grid(job["grid"]) if isinstance(job["grid"], str) else np.asarray(job["grid"], float)
    bad = g[(g < lo - 1e-12) | (g > hi + 1e-12)]
    if bad.size:
        raise ParameterError(f"grid point {bad[0]:.6g} outside the convergence domain [{lo:.6g}, {hi:.6g}]")
    return g


def _expansion(job: dict, params, strict_c0: bool = True):
    kind, point = METHODS[job["method"]]
    return make_expansion(params, kind, point, job["mu"], int(job["terms"]), strict_c0=strict_c0)


def _oracle(job: dict, params):
    ode = heun_ode(params)
    exps = indicial_exponents(ode, 0)
    mu = _select_mu(exps, job["mu"])
    return heun_frobenius_oracle(params, mu, max(int(job["terms"]), 1))


def _meta(job: dict, params, **extra) -> dict:
    meta = {"method": job["method"], "mu_selector": job["mu"], "terms": int(job["terms"])}
    meta.update({k: format_complex(v) for k, v in params.as_dict().items()})
    meta.update(extra)
    return meta


def _exp_meta(exp) -> dict:
    return {
        "kind": exp.transform.kind.value,
        "point": format_complex(exp.expansion_point),
        "mu": format_complex(exp.mu),
        "c0": format_complex(exp.c0),
        "family": exp.term_family.value,
        "radius": exp.radius,
        "c0_consistency": exp.certificate.rel_diff if exp.certificate else 0.0,
        "branches": BRANCH_CONVENTIONS,
    }


def cmd_eval(job: dict):
    params = _params(job)
    m = job["method"]
    rows = []
    if m == "oracle":
        o = _oracle(job, params)
        grid = _grid(job, real_segment(0, 0.8 * o.radius))
        for z in grid:
            u, du = o.jet(z, 1)
            rows.append([z, u.real, u.imag, du.real, du.imag, 0.0])
        meta = _meta(job, params, mu=format_complex(o.exponent), radius=o.radius)
    elif m in CLOSED_FORM:
        branches = symmetric_closed_form(params)
        b = branches[0 if job["mu"] == "low" else 1]
        grid = _grid(job, (0.0, 1.0))
        for z in grid:
            u, du, _ = b.jet(z)
            rows.append([z, u.real, u.imag, du.real, du.imag, 0.0])
        meta = _meta(job, params, branch_exponent=format_complex(b.s))
    else:
        exp = _expansion(job, params)
        grid = _grid(job, exp.domain())
        for z in grid:
            u, du, _, tb = eval_expansion(exp, z)
            rows.append([z, u.real, u.imag, du.real, du.imag, tb])
        meta = _meta(job, params, **_exp_meta(exp))
    cols = ["z", "re_u", "im_u", "re_du", "im_du", "tail_bound"]
    return meta, cols, rows, EXIT_OK


def _coeff_source(job: dict, params):
    m = job["method"]
    if m in CLOSED_FORM:
        raise NotApplicable("the closed form has no coefficient sequence")
    if m == "oracle":
        o = _oracle(job, params)
        return o.coeffs, _meta(job, params, mu=format_complex(o.exponent))
    exp = _expansion(job, params, strict_c0=False)
    return exp.coeffs, _meta(job, params, **_exp_meta(exp))


def cmd_coeffs(job: dict):
    params = _params(job)
    a, meta = _coeff_source(job, params)
    rows = []
    for n, c in enumerate(a):
        ratio = abs(c / a[n - 1]) if n and a[n - 1] != 0 else float("nan")
        rows.append([n, c.real, c.imag, ratio])
    return meta, ["n", "re_a", "im_a", "abs_ratio"], rows, EXIT_OK


def row_labels(order: int) -> list[str]:
    labels = ROW_LABELS.get(order)
    return list(labels) if labels else [f"C{j}" for j in range(order + 1)]


def cmd_recurrence(job: dict):
    params = _params(job)
    m = job["method"]
    if m in CLOSED_FORM:
        raise NotApplicable("the closed form has no recurrence")
    if m == "oracle":
        ode, point = heun_ode(params), 0j
    else:
        kind, sel = METHODS[m]
        td = make_transform(params, kind)
        ode, point = td.ode, _select_point(td, sel)
    mu = _select_mu(indicial_exponents(ode, point), job["mu"])
    rec = build_recurrence(ode, point, mu)
    rows = []
    for label, poly in zip(row_labels(rec.order), rec.coeff_polys):
        c = [poly[i] for i in range(3)]
        rows.append([label] + [x for ci in c for x in (ci.real, ci.imag)])
    cols = ["row", "re_n0", "im_n0", "re_n1", "im_n1", "re_n2", "im_n2"]
    meta = _meta(job, params, point=format_complex(point), mu=format_complex(mu),
                 terms_in_relation=rec.order + 1)
    return meta, cols, rows, EXIT_OK


def cmd_compare(job: dict):
    params = _params(job)
    if job["method"] == "oracle":
        raise ParameterError("compare needs a method other than oracle")
    if job["method"] in CLOSED_FORM:
        branches = symmetric_closed_form(params)
        idx = 0 if job["mu"] == "low" else 1
        b = branches[idx]
        o = heun_frobenius_oracle(params, b.s, 300, point=params.a)
        grid = _grid(job, real_segment(params.a, 0.8 * o.radius))
        vals = np.array([b(z) for z in grid])
        ref = np.array([o(z) for z in grid])
        fac = np.vdot(ref, vals) / np.vdot(ref, ref)
        dev = np.abs(vals - fac * ref) / np.abs(fac * ref)
        res = np.array([heun_residual(params, *b.jet(z), z) for z in grid])
        tails = np.zeros_like(grid)
        meta = _meta(job, params, branch_exponent=format_complex(b.s))
    else:
        exp = _expansion(job, params, strict_c0=False)
        oracle = matching_oracle(exp)
        grid = comparison_grid(exp, oracle) if job.get("grid") is None else \
            _grid(job, _intersect(exp.domain(), real_segment(oracle.point, 0.8 * oracle.radius)))
        c = compare_with_oracle(exp, grid, oracle)
        vals, ref, fac, dev, res, tails = c.values, c.reference, c.factor, c.deviations, c.residuals, c.tails
        meta = _meta(job, params, **_exp_meta(exp))
    rows = [[z, v.real, v.imag, (fac * r).real, (fac * r).imag, d, abs(e), t]
            for z, v, r, d, e, t in zip(grid, vals, ref, dev, res, tails)]
    max_dev, max_res = float(np.max(dev)), float(np.max(np.abs(res)))
    tol = float(job["tol"]) if job.get("tol") is not None else COMPARE_TOL
    meta.update(max_deviation=max_dev, max_residual=max_res, tol=tol, passed=max_dev <= tol)
    cols = ["z", "re_u", "im_u", "re_ref", "im_ref", "rel_dev", "abs_residual", "tail_bound"]
    code = EXIT_OK if max_dev <= tol else EXIT_TOL
    summary = f"max_deviation={max_dev:.3e} max_residual={max_res:.3e} tol={tol:.1e} " + \
              ("PASS" if code == EXIT_OK else "FAIL")
    return meta, cols, rows, code, summary


def _intersect(d1, d2):
    return max(d1[0], d2[0]), min(d1[1], d2[1])


def cmd_terminate(job: dict):
    params = _params(job)
    m = job["method"]
    if m not in METHODS:
        raise ParameterError("terminate needs an expansion method")
    kind, point = METHODS[m]
    desc = ExpansionDescriptor(kind, point, job["mu"])
    tol = float(job["tol"]) if job.get("tol") is not None else TERMINATE_TOL
    cands = necessary_conditions(params, desc, int(job["nmax"]))
    if make_transform(params, kind).trivial:
        cands = [(0, "q = αβ = 0")]
    rows = []
    for n, label in cands:
        rep = check_termination(params, desc, n, tol)
        worst = max((v for _, v in rep.vanishing_checked), default=0.0)
        rows.append([n, label, rep.satisfied_necessary, rep.terminated, rep.residual_of_finite_sum, worst])
    meta = _meta(job, params, candidates=len(cands))
    cols = ["N", "condition", "satisfied_necessary", "terminated", "residual", "max_checked_coeff"]
    return meta, cols, rows, EXIT_OK


COMMANDS = {"eval": cmd_eval, "coeffs": cmd_coeffs, "recurrence": cmd_recurrence,
            "compare": cmd_compare, "terminate": cmd_terminate}


def _cell(x) -> str:
    if isinstance(x, bool) or isinstance(x, np.bool_):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def _json_cell(x):
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if np.isfinite(x) else None
    return x


def write_output(meta, cols, rows, fmt: str, out=None):
    out = out or sys.stdout
    if fmt == "json":
        doc = {"meta": meta, "rows": [dict(zip(cols, map(_json_cell, r))) for r in rows]}
        json.dump(doc, out, indent=2, default=str)
        out.write("\n")
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(x) for x in r])


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        job = _job(args)
        result = COMMANDS[args.command](job)
    except ParameterError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except DegeneracyError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except HeunError as exc:  # pragma: no cover - every error has a family
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    meta, cols, rows, code = result[:4]
    write_output(meta, cols, rows, job["format"])
    if len(result) > 4:
        print(result[4], file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
