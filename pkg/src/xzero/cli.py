"""Command-line front end. Every command emits one JSON report.

Exit codes: 0 all assertions passed, 1 an assertion failed, 2 usage or
validation error. Reports are byte-identical for identical inputs unless
--timing adds wall time.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from . import __version__
from .coding import CodingError, SigmaRegistry, build_special_sequence, chain_factory, validate_special_sequence
from .core import FamilyTag, Vector, evaluate, from_json, to_json, validate
from .dyadic import frac_str, parse_frac
from .params import ParameterError, load_parameters, paper_parameters

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# Input parsing -----------------------------------------------------------------

def parse_vector(s: str) -> Vector:
    """'1:1,2:1/2', a JSON object/list, or @file holding either."""
    s = _maybe_file(s).strip()
    if s.startswith("{") or s.startswith("["):
        doc = json.loads(s)
        if isinstance(doc, dict) and "coords" in doc:
            return Vector.from_json(doc)
        if isinstance(doc, dict):
            return Vector.from_dict({int(k): parse_frac(v) for k, v in doc.items()})
        return Vector.from_dict({int(n): parse_frac(v) for n, v in doc})
    d = {}
    for part in filter(None, (t.strip() for t in s.split(","))):
        n, _, v = part.partition(":")
        d[int(n)] = parse_frac(v or "1")
    return Vector.from_dict(d)


def parse_vectors(s: str) -> list[Vector]:
    """';'-separated vectors, or a JSON list of vectors (inline or @file)."""
    s = _maybe_file(s).strip()
    if s.startswith("["):
        doc = json.loads(s)
        return [parse_vector(json.dumps(v)) for v in doc]
    return [parse_vector(t) for t in s.split(";") if t.strip()]


def _maybe_file(s: str) -> str:
    if s.startswith("@"):
        with open(s[1:]) as fh:
            return fh.read()
    return s


def _json_arg(s: str):
    return json.loads(_maybe_file(s))


def _frac(s) -> Fraction:
    try:
        return parse_frac(s)
    except (ValueError, ZeroDivisionError) as e:
        raise argparse.ArgumentTypeError(f"not a rational number: {s!r}") from e


# Commands ----------------------------------------------------------------------

def cmd_params(a, p, reg):
    js = a.j or [1, 2, 3]
    if a.mode == "paper":
        rows = []
        for j in js:
            v = paper_parameters(j)
            rows.append({"j": j, "m": f"2^{v.m_log2}", "n": f"2^{v.n_log2}", "s": v.s})
        return {"mode": "paper", "values": rows}, True
    rows = [{"j": j, "m": p.m(j), "n": p.n(j)} for j in js]
    return {"mode": p.mode, "parameters": p.to_json(), "values": rows}, True


def cmd_norm(a, p, reg):
    from .norm import norm_G0, norm_G0_oracle, norm_W0
    x = parse_vector(a.x)
    fam = a.family.upper()
    if fam == "G0":
        c = norm_G0(x, p, a.tol)
    elif fam == "W0":
        c = norm_W0(x, p, reg, a.tol)
    else:
        raise UsageError("--family must be G0 or W0")
    out = {"x": x.to_json(), "family": fam, "certificate": c.to_json(witness=not a.no_witness)}
    ok = True
    if a.oracle:
        o = norm_G0_oracle(x, p, depth=a.depth)
        out["oracle"] = o.to_json()
        ok = o.value <= c.hi
    return out, ok


def cmd_eval(a, p, reg):
    f = from_json(_json_arg(a.f), p, reg)
    x = parse_vector(a.x)
    v = evaluate(f, x)
    return {"value": frac_str(v), "float": float(v)}, True


def cmd_validate(a, p, reg):
    f = from_json(_json_arg(a.f), p, reg)
    v = validate(f, FamilyTag.parse(a.family), p, reg)
    return {"family": a.family, "verdict": v.to_json()}, v.ok


def cmd_sigma(a, p, reg):
    doc = _json_arg(a.prefix)
    prefix = [from_json(d, p, reg) for d in doc]
    v = reg.assign(prefix)
    return {"value": v, "m_value": str(p.m(v)), "audit": reg.audit().to_json()}, reg.audit().ok


def cmd_special(a, p, reg):
    seq = build_special_sequence(a.j, chain_factory(p), reg, p)
    v = validate_special_sequence(seq, reg, p)
    return {"seq_id": seq.seq_id, "j": seq.j, "length": len(seq.components),
            "weights": [f.j for f in seq.components], "verdict": v.to_json()}, v.ok


def _source(a, name="source"):
    from .sequences import BlockSource
    return BlockSource(getattr(a, name), a.seed)


def cmd_l1avg(a, p, reg):
    from .sequences import build_l1_average, is_l1_average
    avg = build_l1_average(_source(a), a.k, p, reg)
    v = is_l1_average(avg.y, 1, a.k, avg.parts, p, reg)
    return {"average": avg.to_json(), "verdict": v.to_json()}, v.ok


def cmd_ris_check(a, p, reg):
    from .sequences import check_RIS
    xs = parse_vectors(a.x)
    cert = check_RIS(xs, a.C, a.eps, a.js, p, reg)
    return cert.to_json(), cert.ok


def cmd_exact_pair(a, p, reg):
    from .sequences import NOMINAL_C, build_exact_pair, check_exact_pair
    pair = build_exact_pair(_source(a), a.j, p, reg, a.delta_theta, a.k, a.blocks)
    chk = check_exact_pair(pair, p, reg, a.C)
    return {"pair": pair.to_json(), "check": chk.to_json(),
            "nominal": {"measured": frac_str(chk.C_measured), "paper_bound": NOMINAL_C, "asserted": False}}, chk.ok


def cmd_dependent(a, p, reg):
    from .sequences import (alternating_average_report, build_dependent_sequence, check_dependent_sequence,
                            dependent_average_identity)
    from .sequences import BlockSource
    srcA = BlockSource(a.source, a.seed)
    srcB = BlockSource(a.source_b, a.seed + 1) if a.source_b else None
    dep = build_dependent_sequence(srcA, srcB, a.j0, a.mode, p, reg, a.delta_theta, a.k, a.blocks)
    v = check_dependent_sequence(dep, p, reg, pair_checks=True)
    lhs, rhs = dependent_average_identity(dep, p)
    m = p.m(2 * a.j0 + 1)
    ident = {"special_of_average": frac_str(lhs), "mean_theta_over_m": frac_str(rhs), "holds": lhs == rhs}
    ok = v.ok and lhs == rhs
    if a.mode == "half":
        ident["at_least_1_over_2m"] = lhs >= Fraction(1, 2 * m)
        ok = ok and ident["at_least_1_over_2m"]
    return {"dependent": dep.to_json(), "verdict": v.to_json(), "identity": ident,
            "alternating_average": alternating_average_report(dep, p, reg)}, ok


def cmd_gap_witness(a, p, reg):
    from .sequences import BlockSource, build_dependent_sequence, build_gap_witness
    dep = build_dependent_sequence(BlockSource(a.source, a.seed), None, a.j0, "half", p, reg, a.delta_theta)
    gw = build_gap_witness(dep, p, reg)
    return {"seq_id": dep.special.seq_id, "gap_witness": gw.to_json(p)}, True


def cmd_c0_witness(a, p, reg):
    from .sequences import (PreconditionError, check_c0_equivalence, extract_c0_witness,
                            normalized_gap_family)
    xs = parse_vectors(a.x) if a.x else normalized_gap_family(a.count, p, reg, a.seed)
    try:
        w = extract_c0_witness(xs, a.eps, p, reg)
    except PreconditionError as e:
        return {"family_size": len(xs), "precondition_failed": str(e)}, False
    out = {"family_size": len(xs), "witness": w.to_json()}
    ok = w.complete
    if w.complete and len(w.zs) >= 2:
        eq = check_c0_equivalence(w.zs, a.eps, a.trials, p, reg, a.seed)
        out["equivalence"] = eq
        ok = eq["ok"]
    return out, ok


def cmd_separate(a, p, reg):
    from .separation import Phi, check_average_bound, decompose, is_separated
    xs = parse_vectors(a.x)
    doc = _json_arg(a.phi)
    phi = Phi(int(doc["m"]), tuple(from_json(c, p, reg) for c in doc["components"]))
    sep = is_separated(xs, phi, a.delta)
    out = {"separation": sep.to_json()}
    ok = True
    if a.decompose and not sep.separated:
        d = decompose(xs, phi, a.delta)
        out["decomposition"] = d.to_json()
        ok = d.identity_holds
    if a.average_bound:
        r = check_average_bound(xs, phi, a.delta, p, reg)
        out["average_bound"] = r.to_json()
        ok = ok and r.holds is not False
    return out, ok


def cmd_aux_bounds(a, p, reg):
    from .auxiliary import measure_average_bounds
    t = measure_average_bounds(a.j0, p, a.depth, a.mode)
    ok = all(r["cap_l1_over_m_i"]["holds"] for r in t.rows)
    return t.to_json(), ok


def cmd_basic_ineq(a, p, reg):
    from .auxiliary import search_basic_inequality_witness
    f = from_json(_json_arg(a.f), p, reg)
    xs = parse_vectors(a.x)
    lams = [parse_frac(t) for t in a.lams.split(",")]
    I = [int(t) for t in a.I.split(",")] if a.I else list(range(1, len(xs) + 1))
    w = search_basic_inequality_witness(f, xs, lams, I, a.j0, a.C, a.eps, p)
    return w.to_json(), w.found


def cmd_verify(a, p, reg):
    from .verify import SUITES, verify_suite
    names = SUITES if a.suite == "all" else [a.suite]
    res = [verify_suite(s, p, a.seed) for s in names]
    return {"suites": [r.to_json(a.timing) for r in res]}, all(r.ok for r in res)


# Parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="xzero", description="Certified norms and witness constructions.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--params", default=None, help="tiny, wide, paper or a JSON parameter file (default tiny)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tol", type=_frac, default=Fraction(1, 10 ** 9))
    ap.add_argument("--out", default=None, help="write the report here as well")
    ap.add_argument("--json", action="store_true", help="print the full report (default prints a summary)")
    ap.add_argument("--registry", default=None, help="sigma journal file (created if missing)")
    ap.add_argument("--timing", action="store_true", help="add wall time (breaks byte-identity)")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("params", help="parameter values")
    s.add_argument("--mode", choices=["paper", "current"], default="current")
    s.add_argument("--j", type=int, nargs="*")
    s.set_defaults(func=cmd_params)

    s = sub.add_parser("norm", help="certified G0 / W0 norm")
    s.add_argument("--x", required=True)
    s.add_argument("--family", default="G0")
    s.add_argument("--oracle", action="store_true")
    s.add_argument("--depth", type=int, default=3)
    s.add_argument("--no-witness", action="store_true")
    s.set_defaults(func=cmd_norm)

    s = sub.add_parser("eval", help="evaluate a functional")
    s.add_argument("--f", required=True)
    s.add_argument("--x", required=True)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("validate", help="family membership")
    s.add_argument("--f", required=True)
    s.add_argument("--family", required=True, help="G0, W0, F:<j0> or F':<j0> (fprime:<j0>)")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("sigma", help="assign sigma to a prefix")
    s.add_argument("--prefix", required=True, help="JSON list of functionals")
    s.set_defaults(func=cmd_sigma)

    s = sub.add_parser("special", help="build and register a special sequence")
    s.add_argument("--j", type=int, required=True)
    s.set_defaults(func=cmd_special)

    def sources(s, b=False):
        s.add_argument("--source", choices=["basis", "signed", "pairs"], default="basis")
        if b:
            s.add_argument("--source-b", choices=["basis", "signed", "pairs"], default=None)
        s.add_argument("--k", type=int, default=2)
        s.add_argument("--delta-theta", type=_frac, default=Fraction(1, 16))
        s.add_argument("--blocks", type=int, default=2, help="l1 averages per pair")

    s = sub.add_parser("l1avg", help="build an l1 average")
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--source", choices=["basis", "signed", "pairs"], default="basis")
    s.set_defaults(func=cmd_l1avg)

    s = sub.add_parser("ris-check", help="check RIS conditions")
    s.add_argument("--x", required=True)
    s.add_argument("--C", type=_frac, default=Fraction(3))
    s.add_argument("--eps", type=_frac, required=True)
    s.add_argument("--js", type=int, nargs="*")
    s.set_defaults(func=cmd_ris_check)

    s = sub.add_parser("exact-pair", help="build and check an exact pair")
    s.add_argument("--j", type=int, required=True)
    s.add_argument("--C", type=_frac, default=None, help="default: measured")
    sources(s)
    s.set_defaults(func=cmd_exact_pair)

    s = sub.add_parser("dependent", help="build a dependent sequence")
    s.add_argument("--j0", type=int, default=1)
    s.add_argument("--mode", choices=["half", "zero"], default="half")
    sources(s, b=True)
    s.set_defaults(func=cmd_dependent)

    s = sub.add_parser("c0-witness", help="extract a c0 witness and test equivalence")
    s.add_argument("--x", default=None, help="family of vectors; default builds normalized gap witnesses")
    s.add_argument("--count", type=int, default=2)
    s.add_argument("--eps", type=_frac, default=Fraction(1, 4))
    s.add_argument("--trials", type=int, default=50)
    s.set_defaults(func=cmd_c0_witness)

    s = sub.add_parser("gap-witness", help="norm-gap witness")
    s.add_argument("--j0", type=int, default=1)
    s.add_argument("--source", choices=["basis", "signed", "pairs"], default="basis")
    s.add_argument("--delta-theta", type=_frac, default=Fraction(1, 16))
    s.set_defaults(func=cmd_gap_witness)

    s = sub.add_parser("separate", help="separation, decomposition and the averaging bound")
    s.add_argument("--x", required=True)
    s.add_argument("--phi", required=True, help='JSON {"m": .., "components": [..]}')
    s.add_argument("--delta", type=_frac, required=True)
    s.add_argument("--decompose", action="store_true")
    s.add_argument("--average-bound", action="store_true")
    s.set_defaults(func=cmd_separate)

    s = sub.add_parser("aux-bounds", help="averaging bounds for the auxiliary family")
    s.add_argument("--j0", type=int, default=2)
    s.add_argument("--depth", type=int, default=3)
    s.add_argument("--mode", choices=["F'", "odd"], default="F'")
    s.set_defaults(func=cmd_aux_bounds)

    s = sub.add_parser("basic-ineq", help="search a basic-inequality witness")
    s.add_argument("--f", required=True)
    s.add_argument("--x", required=True)
    s.add_argument("--lams", required=True)
    s.add_argument("--I", default=None)
    s.add_argument("--j0", type=int, default=2)
    s.add_argument("--C", type=_frac, default=Fraction(1))
    s.add_argument("--eps", type=_frac, default=Fraction(1, 8))
    s.set_defaults(func=cmd_basic_ineq)

    s = sub.add_parser("verify", help="run a verification suite")
    s.add_argument("--suite", default="all")
    s.set_defaults(func=cmd_verify)
    return ap


def run(a: argparse.Namespace) -> tuple[int, dict]:
    t = time.perf_counter()
    try:
        p = load_parameters(a.params)
        reg = SigmaRegistry.load(a.registry, p) if a.registry else SigmaRegistry(p)
        results, ok = a.func(a, p, reg)
        code = EXIT_OK if ok else EXIT_FAIL
    except (UsageError, ParameterError, CodingError, ValueError, KeyError, OSError) as e:
        return EXIT_USAGE, {"command": a.command, "error": f"{type(e).__name__}: {e}"}
    except AssertionError as e:
        return EXIT_FAIL, {"command": a.command, "error": f"assertion failed: {e}"}
    except RuntimeError as e:
        # construction failures and non-convergence
        return EXIT_FAIL, {"command": a.command, "error": f"{type(e).__name__}: {e}"}
    inputs = {k: _plain(v) for k, v in sorted(vars(a).items())
              if k not in ("func", "json", "out", "timing", "command")}
    report = {"command": a.command, "version": __version__, "seed": a.seed, "inputs": inputs,
              "params_digest": p.digest(), "registry_position": reg.position, "ok": ok, "results": results}
    if a.timing:
        report["wall_time"] = round(time.perf_counter() - t, 3)
    return code, report


def _plain(v):
    if isinstance(v, Fraction):
        return frac_str(v)
    if isinstance(v, (list, tuple)):
        return [_plain(t) for t in v]
    return v


def _summary(report: dict) -> str:
    if "error" in report:
        return f"{report['command']}: error: {report['error']}"
    return f"{report['command']}: {'PASS' if report['ok'] else 'FAIL'} (params {report['params_digest']})"


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    code, report = run(a)
    text = json.dumps(report, sort_keys=True, indent=2, default=str)
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(text + "\n")
    print(text if a.json else _summary(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
