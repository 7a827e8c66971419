"""Command-line front end. Every command prints one JSON report on stdout.

Exit codes: 0 success, 1 mathematical rejection, 2 input error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import re
import sys
import time
from fractions import Fraction

import numpy as np

from . import corpus, frames, kernels
from .lie_core import SpecError, load_spec, verify_condition1, verify_structure
from .orbit import ConditionFailure, OrbitData, cross_section, orbit_data
from .poly import as_rational, frac_str
from .sampling import DEFAULT_SEED, SpectralBox, check_containment, check_tiling, delta_bound

REPORT_VERSION = 1
EXIT_OK, EXIT_REJECT, EXIT_INPUT = 0, 1, 2


class Rejected(Exception):
    """Mathematical rejection carrying a partial payload."""

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload or {}


# ---------------------------------------------------------------- output


def clean(x):
    """JSON-ready copy: rationals as 'num/den', floats to 15 significant digits."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, Fraction):
        return frac_str(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.15g}")
    if isinstance(x, complex):
        return [clean(x.real), clean(x.imag)]
    if isinstance(x, dict):
        return {str(k): clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return clean(x.tolist())
    return str(x)


def load_input(ref: str):
    """Corpus key or path to a JSON spec; returns (spec, input digest)."""
    if corpus.is_corpus_key(ref):
        spec = corpus.get(ref)
        return spec, "builtin:" + spec.digest()
    spec = load_spec(ref)
    with open(ref, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()
    return spec, "sha256:" + digest


def require_orbit(spec, full: bool) -> OrbitData:
    """full=True demands every Condition 1 check, including the lattice test."""
    try:
        od = orbit_data(spec)
    except ConditionFailure as exc:
        raise Rejected("Condition 1 fails: " + str(exc), {"condition": exc.report.to_json()}) from None
    if full:
        rep = verify_condition1(spec)
        if not rep.passed:
            raise Rejected("Condition 1 fails: " + "; ".join(rep.diagnostics), {"condition": rep.to_json()})
    return od


def parse_box(text: str | None, od: OrbitData, default_delta: bool = True) -> SpectralBox:
    if text is None:
        if not default_delta:
            raise SpecError("--box is required")
        d = delta_bound(od)
        if d.exact is None:
            raise SpecError("delta is not exact; pass --box explicitly")
        return SpectralBox.cube(d.exact, od.d)
    box = SpectralBox.parse(text)
    if box.dim != od.d:
        raise SpecError(f"box has {box.dim} axes but the cross-section has dimension n-2m = {od.d}")
    return box


_VEC = re.compile(r"(lambda|λ|l|sigma|σ|t)\s*=\s*\(([^)]*)\)")


def parse_at(text: str):
    found = {}
    for key, body in _VEC.findall(text):
        key = {"λ": "lambda", "l": "lambda", "σ": "sigma"}.get(key, key)
        vals = [x.strip() for x in body.split(",") if x.strip()]
        try:
            found[key] = [as_rational(Fraction(v)) for v in vals]
        except (ValueError, ZeroDivisionError):
            raise SpecError(f"cannot parse coordinates {body!r}") from None
    if "t" not in found or not ({"lambda", "sigma"} & set(found)):
        raise SpecError("--at needs 'λ=(...)' (or 'sigma=(...)') and 't=(...)'")
    return found


# ---------------------------------------------------------------- commands


def cmd_verify(args, spec):
    st = verify_structure(spec)
    out = {"structure": st.to_json()}
    if not st.passed:
        out["passed"] = False
        return out, EXIT_REJECT
    rep = verify_condition1(spec, args.trials, args.seed)
    out["condition"] = rep.to_json()
    out["passed"] = rep.passed
    out["structural_checks_passed"] = rep.structural_ok()
    return out, EXIT_OK if rep.passed else EXIT_REJECT


def cmd_delta(args, spec):
    od = require_orbit(spec, full=True)
    d = delta_bound(od, args.tol)
    out = d.to_json()
    out["tol"] = args.tol
    out["display"] = frac_str(d.exact) if d.exact is not None else f"[{d.delta_lower:.15g}, {d.delta_upper:.15g}]"
    return out, EXIT_OK


def _plancherel_payload(od: OrbitData, samples: int, seed: int):
    rep = od.plancherel_report(samples, seed)
    names = [f"l{k}" for k in od.free]
    dens = od.density
    out = {
        "density": "|" + dens.to_str(names) + "|",
        "density_polynomial": dens.to_str(names),
        "absolute_value": True,
        "ratio_constant": rep.constant,
        "samples": samples,
    }
    if rep.constant:
        # |det B|^(1/2) / |det J_beta(lambda, 0)|
        out["ratio_squared"] = rep.ratio_squared
        out["ratio"] = rep.ratio if rep.ratio is not None else f"sqrt({frac_str(rep.ratio_squared)})"
        out["ratio_float"] = rep.ratio_float
    if len(dens.terms) == 1:
        (e, c), = dens.terms.items()
        out["monomial"] = {"coefficient": c, "exponents": dict(zip(names, e)), "degree": sum(e)}
    return out


def cmd_orbit(args, spec):
    od = require_orbit(spec, full=False)
    sub = args.what
    if sub == "jump-set":
        return {"jump_set": list(od.e), "cardinality": len(od.e), "free": list(od.free),
                "free_count": od.d}, EXIT_OK
    if sub == "sigma":
        cs = cross_section(spec, od.e)
        return {"free": cs["free"], "constraints": cs["constraints"], "dimension": od.d,
                "embedding": " + ".join(f"sigma_{a + 1} Z{k}*" for a, k in enumerate(od.free)) or "0"}, EXIT_OK
    if sub == "plancherel":
        return _plancherel_payload(od, args.samples, args.seed), EXIT_OK
    if sub == "beta":
        if not args.at:
            raise SpecError("orbit beta needs --at")
        at = parse_at(args.at)
        t = at["t"]
        if len(t) != od.m:
            raise SpecError(f"t must have {od.m} coordinates")
        if "sigma" in at:
            sigma = at["sigma"]
            if len(sigma) != od.d:
                raise SpecError(f"sigma must have {od.d} coordinates")
        else:
            lam = at["lambda"]
            sigma = lam if len(lam) == od.d and len(lam) not in (od.p, spec.n) else od.sigma_from_functional(lam)
        beta = od.beta(sigma, t)
        return {"sigma": sigma, "t": t, "beta": beta, "jacobian_det": od.jacobian_det.eval(list(sigma) + list(t))}, EXIT_OK
    raise SpecError(f"unknown orbit subcommand {sub!r}")


def cmd_domain(args, spec):
    od = require_orbit(spec, full=True)
    box = parse_box(args.box, od, default_delta=False)
    if args.tiling:
        rep = check_tiling(od, box, args.samples, args.seed, args.mesh)
        out = rep.to_json()
        return out, EXIT_OK if rep.tiling else EXIT_REJECT
    rep = check_containment(od, box, args.samples, args.seed)
    out = rep.to_json()
    return out, EXIT_OK if rep.contained else EXIT_REJECT


def _frames_resolution(args, od):
    small = od.d == 1 and od.m == 1
    nl = args.lambda_nodes or (frames.REF_LAMBDA_NODES if small else 32)
    r = args.t_nodes or (frames.REF_T_NODES if small else (32 if od.m == 1 else 8))
    T = args.T or (frames.REF_T if small else 1)
    K = args.kmax if args.kmax is not None else (frames.REF_KMAX if od.p <= 2 else 8)
    return nl, r, T, K


BUDGETS = {"isometry": 3e-3, "isometry_tiling": 5e-3, "intertwine_A": 1e-6, "intertwine_Z": 1e-3,
           "parseval": 5e-3, "reconstruct": 5e-2}


def cmd_frames(args, spec):
    od = require_orbit(spec, full=True)
    box = parse_box(args.box, od)
    nl, r, T, K = _frames_resolution(args, od)
    try:
        pre = frames.establish_domain(od, box, args.force, args.samples, args.seed)
    except frames.ContainmentRefused as exc:
        raise Rejected(str(exc) + " (use --force to run as a negative control)",
                       {"containment": exc.check.to_json() if exc.check else None}) from None
    if args.function == "eta":
        F = frames.eta_hat(od, box, smoothed=True, T=T, n_lambda=nl, r=r)
    elif args.function == "plain":
        F = frames.plain_bump(od, box, T, nl, r)
    else:
        F = frames.reference_function(od, box, args.variant, T, nl, r)
    kw = {"eps": args.eps, "method": args.method}
    out = {"box": box.to_json(), "resolution": {"lambda_nodes": nl, "t_nodes_per_unit": r, "T": T, "k_max": K},
           "domain_route": pre.route, "negative_control": pre.negative_control, "backend": kernels.BACKEND,
           "function": args.function if args.function != "bump" else f"bump variant {args.variant}"}
    sub = args.what
    if sub == "isometry":
        rep = frames.isometry_test(F, k_max=K, precondition=pre, **kw)
        budget = BUDGETS["isometry_tiling" if pre.route == "tiling" else "isometry"]
        out.update(rep.to_json(), tolerance=budget, within_budget=abs(rep.norm_ratio - 1) <= budget)
        if args.csv:
            frames.j_transform(F, k_max=K, **kw).to_csv(args.csv)
    elif sub == "intertwine":
        rep = frames.intertwining_test(F, args.gamma, k_max=K, precondition=pre, **kw)
        budget = BUDGETS["intertwine_A" if args.gamma.startswith("A") else "intertwine_Z"]
        out.update(rep.to_json(), tolerance=budget, within_budget=rep.deviation < budget)
    elif sub == "parseval":
        rep = frames.parseval_check(F, k_max=K, precondition=pre, **kw)
        out.update(rep.to_json(), tolerance=BUDGETS["parseval"],
                   within_budget=abs(rep.frame_sum_ratio - 1) <= BUDGETS["parseval"])
    elif sub == "reconstruct":
        rep = frames.reconstruct(F, k_max=K, precondition=pre, keep=bool(args.csv), **kw)
        out.update(rep.to_json(), tolerance=BUDGETS["reconstruct"], within_budget=rep.rel_l2_error < BUDGETS["reconstruct"])
        if args.csv and rep.F_tilde is not None:
            rep.F_tilde.to_csv(args.csv)
    else:
        raise SpecError(f"unknown frames subcommand {sub!r}")
    if pre.negative_control:
        out["label"] = "negative-control"
    return out, EXIT_OK


# ---------------------------------------------------------------- examples


SMALL = ("heisenberg",)


def _run_example(key: str, with_frames: bool) -> dict:
    exp = corpus.EXPECTED.get(key, {})
    spec = corpus.get(key)
    checks = []

    def check(name, ok, value=None, expected=None):
        checks.append({"check": name, "ok": bool(ok), "value": value, "expected": expected})

    rep = verify_condition1(spec)
    check("verify", rep.passed == exp.get("passed", rep.passed), rep.passed, exp.get("passed"))
    if "jump_set" in exp:
        check("jump_set", tuple(rep.generic_jump_set) == exp["jump_set"], list(rep.generic_jump_set), list(exp["jump_set"]))
    if not rep.structural_ok():
        check("rejected_with_cardinality", rep.generic_jump_cardinality != 2 * spec.m_dim,
              rep.generic_jump_cardinality, f"!= {2 * spec.m_dim}")
        return {"key": key, "checks": checks, "ok": all(c["ok"] for c in checks)}
    od = orbit_data(spec)
    if exp.get("free") is not None:
        check("free_count", od.d == exp["free"], od.d, exp["free"])
    pl = od.plancherel_report(100)
    check("plancherel_ratio_constant", pl.constant, pl.ratio_squared, "constant")
    if rep.passed:
        d = delta_bound(od)
        want = exp.get("delta")
        if isinstance(want, Fraction):
            check("delta", d.exact == want, d.exact, want)
        else:
            check("delta_positive_finite", d.delta_lower > 0 and math.isfinite(d.delta_upper),
                  d.exact if d.exact is not None else d.delta_lower, "positive")
        if d.exact is not None:
            c = check_containment(od, SpectralBox.cube(d.exact, od.d), delta=d)
            check("contained_at_delta", c.contained and c.tier == "rigorous", c.tier, "rigorous")
        if with_frames and key in SMALL:
            box = SpectralBox.cube(d.exact, od.d)
            pre = frames.establish_domain(od, box)
            F = frames.reference_function(od, box, 0)
            iso = frames.isometry_test(F, precondition=pre)
            check("isometry", abs(iso.norm_ratio - 1) <= 3e-3, iso.norm_ratio, "1 +- 3e-3")
            JF = frames.j_transform(F)
            for g, tol in (("A1", 1e-6), ("Z1", 1e-3)):
                it = frames.intertwining_test(F, g, precondition=pre, JF=JF)
                check(f"intertwine_{g}", it.deviation < tol, it.deviation, f"< {tol}")
            tb = SpectralBox.parse("-1,1")
            til = check_tiling(od, tb)
            check("tiling_unit_box", bool(til.tiling), til.collision_rate, "tiling")
            pre1 = frames.establish_domain(od, tb)
            iso1 = frames.isometry_test(frames.reference_function(od, tb, 0), precondition=pre1)
            check("unitarity_unit_box", abs(iso1.norm_ratio - 1) <= 5e-3, iso1.norm_ratio, "1 +- 5e-3")
    return {"key": key, "checks": checks, "ok": all(c["ok"] for c in checks)}


def cmd_examples(args, spec=None):
    if args.what == "list":
        return {"corpus": [{"key": k, "dim": corpus.get(k).n, "p_dim": corpus.get(k).p_dim,
                            "expected": corpus.EXPECTED.get(k)} for k in corpus.corpus_keys()]}, EXIT_OK
    keys = corpus.corpus_keys() if args.all or not args.keys else args.keys
    for k in keys:
        if not corpus.is_corpus_key(k):
            raise SpecError(f"unknown corpus key {k!r}")
    results = [_run_example(k, not args.no_frames) for k in keys]
    ok = all(r["ok"] for r in results)
    return {"results": results, "all_ok": ok, "count": len(results)}, EXIT_OK if ok else EXIT_REJECT


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nilsampler", description="Sampling spaces on nilpotent Lie groups.")
    ap.add_argument("--indent", type=int, default=2, help="JSON indentation (0 for compact)")
    sub = ap.add_subparsers(dest="command", required=True)

    def spec_arg(p):
        p.add_argument("spec", help="JSON spec file or built-in corpus key")
        p.add_argument("--seed", type=lambda s: int(s, 0), default=DEFAULT_SEED)

    p = sub.add_parser("verify", help="structure checks and Condition 1")
    spec_arg(p)
    p.add_argument("--trials", type=int, default=25)

    p = sub.add_parser("delta", help="bandwidth bound delta")
    spec_arg(p)
    p.add_argument("--tol", type=float, default=1e-9)

    p = sub.add_parser("orbit", help="coadjoint orbit data")
    p.add_argument("what", choices=["jump-set", "sigma", "plancherel", "beta"])
    spec_arg(p)
    p.add_argument("--at", help="e.g. 'λ=(1,0,0) t=(0,0)'")
    p.add_argument("--samples", type=int, default=100)

    p = sub.add_parser("domain", help="fundamental-domain containment / tiling")
    spec_arg(p)
    p.add_argument("--box", required=True, help="per-axis intervals 'lo,hi;lo,hi'")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--tiling", action="store_true")
    p.add_argument("--mesh", type=int, default=64)

    p = sub.add_parser("frames", help="isometry / intertwining / Parseval / reconstruction checks")
    p.add_argument("what", choices=["isometry", "intertwine", "parseval", "reconstruct"])
    spec_arg(p)
    p.add_argument("--box", help="defaults to (-delta, delta)^(n-2m)")
    p.add_argument("--lambda-nodes", type=int)
    p.add_argument("--t-nodes", type=int, help="t-nodes per unit length")
    p.add_argument("--T", type=int, help="t-support half-width")
    p.add_argument("--kmax", type=int)
    p.add_argument("--gamma", default="A1", help="generator for intertwine: A<i>, Z<i> or id")
    p.add_argument("--function", choices=["bump", "plain", "eta"], default="bump")
    p.add_argument("--variant", type=int, default=0)
    p.add_argument("--eps", type=float, default=1e-12, help="NUFFT accuracy")
    p.add_argument("--method", choices=["nufft", "direct"], default="nufft")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--force", action="store_true", help="run without containment (negative control)")
    p.add_argument("--csv", help="write the sample sequence / reconstruction as CSV")

    p = sub.add_parser("examples", help="built-in corpus")
    p.add_argument("what", choices=["list", "run"])
    p.add_argument("keys", nargs="*")
    p.add_argument("--all", action="store_true")
    p.add_argument("--no-frames", action="store_true", help="skip the frame checks")
    return ap


COMMANDS = {"verify": cmd_verify, "delta": cmd_delta, "orbit": cmd_orbit, "domain": cmd_domain,
            "frames": cmd_frames}


def _params(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("command", "indent")}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    start = time.perf_counter()
    report = {"report_version": REPORT_VERSION, "command": args.command, "parameters": _params(args)}
    code = EXIT_OK
    try:
        if args.command == "examples":
            report["input_digest"] = None
            results, code = cmd_examples(args)
        else:
            spec, digest = load_input(args.spec)
            report["input_digest"] = digest
            report["spec"] = spec.name
            results, code = COMMANDS[args.command](args, spec)
        report["results"] = results
    except SpecError as exc:
        code = EXIT_INPUT
        report["error"] = {"kind": "input", "message": str(exc)}
        print(f"error: {exc}", file=sys.stderr)
    except Rejected as exc:
        code = EXIT_REJECT
        report["error"] = {"kind": "rejected", "message": str(exc)}
        report["results"] = exc.payload
        print(f"rejected: {exc}", file=sys.stderr)
    report["exit_code"] = code
    report["timing"] = {"wall_seconds": time.perf_counter() - start}
    print(json.dumps(clean(report), indent=args.indent or None, ensure_ascii=False))
    return code
