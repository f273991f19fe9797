"""``mubcheck`` command line: JSON verification reports on stdout.

Exit codes: 0 every check passed, 1 some check failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import diagrams as dg
from . import families as fm
from . import meanking as mk
from . import qkd
from .gf import MUB_DIMENSIONS, UnsupportedDimension, function_family, mub_family
from .numerics import DEFAULT_TOL, unitarity_deviation

SCHEMA = "v1"
SIG_DIGITS = 12


class InputError(Exception):
    pass


# family files


def parse_family(text: str) -> fm.ControlledFamily:
    """``dim m count N`` then N*m rows of m ``re im`` pairs; each row is one basis vector."""
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise InputError("empty family file")
    head = lines[0]
    if len(head) != 4 or head[0] != "dim" or head[2] != "count":
        raise InputError(f"bad header {' '.join(head)!r}; expected 'dim m count N'")
    try:
        dim, count = int(head[1]), int(head[3])
    except ValueError as exc:
        raise InputError(f"bad header numbers: {exc}") from None
    if dim < 1 or count < 1:
        raise InputError("dim and count must be positive")
    rows = lines[1:]
    if len(rows) != dim * count:
        raise InputError(f"expected {dim * count} vector rows, found {len(rows)}")
    bases = []
    for b in range(count):
        mat = np.zeros((dim, dim), dtype=complex)
        for v in range(dim):
            row = rows[b * dim + v]
            if len(row) != 2 * dim:
                raise InputError(f"row {b * dim + v + 2} has {len(row)} numbers, expected {2 * dim}")
            try:
                nums = [float(x) for x in row]
            except ValueError as exc:
                raise InputError(f"row {b * dim + v + 2}: {exc}") from None
            mat[:, v] = np.array(nums[0::2]) + 1j * np.array(nums[1::2])
        bases.append(mat)
    try:
        return fm.make_family(dim, bases)
    except fm.FamilyError as exc:
        raise InputError(str(exc)) from None


def format_family(f: fm.ControlledFamily) -> str:
    out = [f"dim {f.dim} count {f.n_bases}"]
    for b in f.bases:
        for v in b.T:
            out.append(" ".join(f"{z.real:.17g} {z.imag:.17g}" for z in v))
    return "\n".join(out) + "\n"


def _load_family(args) -> fm.ControlledFamily:
    if args.file is not None:
        try:
            with open(args.file) as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {args.file}: {exc.strerror}") from None
        return parse_family(text)
    if args.dim is None:
        raise InputError("one of --dim or --file is required")
    return _mub(args.dim)


def _mub(n: int) -> fm.ControlledFamily:
    try:
        return mub_family(n)
    except UnsupportedDimension:
        raise InputError(f"unsupported dimension {n}; supported: {', '.join(map(str, MUB_DIMENSIONS))}") from None


# report assembly


def _num(x: float):
    x = float(x)
    if not math.isfinite(x):
        return str(x)
    return float(f"{x:.{SIG_DIGITS}g}")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_num(obj.real), _num(obj.imag)]
    return obj


def check(name: str, passed: bool, worst: float, witness=None) -> dict:
    return {"name": name, "passed": bool(passed), "worst_violation": float(worst), "witness": witness}


def report(command: str, inputs: dict, checks: list, tol: float, **extra) -> dict:
    out = {
        "schema": SCHEMA,
        "command": command,
        "inputs": inputs,
        "passed": all(c["passed"] for c in checks),
        "checks": checks,
        "tolerance": tol,
    }
    out.update(extra)
    return out


def phase_json(cell: dg.PhaseCell) -> dict:
    vals = cell.values.reshape(-1)
    return {
        "index_order": list(cell.names),
        "shape": list(cell.values.shape),
        "values": [[v.real, v.imag] for v in vals],
    }


# commands


def cmd_mub(args, tol: float) -> dict:
    f = _mub(args.dim)
    checks = []
    for a, B in enumerate(f.bases):
        dev = unitarity_deviation(B)
        checks.append(check(f"unitary[{a}]", dev <= tol, dev, {"basis": a}))
    for a in range(f.n_bases):
        for b in range(a + 1, f.n_bases):
            dev = float(np.max(np.abs(fm.overlap_squared(f.bases[a], f.bases[b]) - 1 / f.dim)))
            checks.append(check(f"unbiased[{a},{b}]", dev <= tol, dev, {"a": a, "b": b}))
    return report("check-mub", {"dim": args.dim}, checks, tol, bases=f.n_bases)


def _family_inputs(args) -> dict:
    return {"dim": args.dim, "file": args.file}


def cmd_complementary(args, tol: float) -> dict:
    f = _load_family(args)
    methods = fm.METHODS if args.method == "all" else (args.method,)
    results = fm.run_checks(f, methods, tol)
    checks = [check(m, r.passed, r.worst_violation, r.witness) for m, r in results.items()]
    verdicts = {m: r.passed for m, r in results.items()}
    inputs = dict(_family_inputs(args), method=args.method)
    return report(
        "check-complementary",
        inputs,
        checks,
        tol,
        verdicts=verdicts,
        verdicts_agree=len(set(verdicts.values())) == 1,
    )


def cmd_qkd(args, tol: float) -> dict:
    f = _load_family(args)
    protocols = qkd.PROTOCOLS if args.protocol == "both" else (args.protocol,)
    checks, verdicts = [], {}
    reports = {}
    for p in protocols:
        r = qkd.check_protocol(p, f, tol)
        reports[p] = r
        verdicts[p] = r.passed
        checks.append(check(f"{p}.same_basis", r.ps_ok, r.ps_deviation))
        pd_ok = r.pd_proportional and r.psi_unit_modulus
        checks.append(check(f"{p}.different_basis", pd_ok, r.pd_deviation, None if pd_ok else r.witness))
    if len(protocols) == 2:
        eq = dg.tensors_equal(qkd.build_bb84_lhs(f), qkd.build_e91_lhs(f), tol)
        checks.append(check("bb84_equals_e91", eq.equal, eq.deviation, eq.witness))
    first = reports[protocols[0]]
    ident = qkd.check_alpha_identity(f, first.psi, tol)
    checks.append(check("alpha_identity", ident.passed, ident.worst_violation, ident.witness))
    inputs = dict(_family_inputs(args), protocol=args.protocol)
    return report(
        "check-qkd",
        inputs,
        checks,
        tol,
        verdicts=verdicts,
        complementary=fm.is_complementary_direct(f, tol).passed,
        psi=phase_json(first.psi),
    )


def cmd_meanking(args, tol: float) -> dict:
    if args.dim not in MUB_DIMENSIONS:
        raise InputError(f"unsupported dimension {args.dim}; supported: {', '.join(map(str, MUB_DIMENSIONS))}")
    scheme = mk.build_scheme(args.dim)
    if args.corrupt_lookup:
        scheme = mk.corrupt_lookup(scheme)
    inputs = {"dim": args.dim, "mode": args.mode, "corrupt_lookup": bool(args.corrupt_lookup)}
    gram = mk.check_orthonormal(scheme, tol)
    checks = [check("orthonormal", gram.passed, gram.deviation)]

    if args.mode == "construct":
        return report(
            "mean-king",
            inputs,
            checks,
            tol,
            bases=scheme.family.n_bases,
            states=len(scheme.mu_basis),
            lookup=scheme.lookup.tolist(),
        )

    if args.mode == "verify":
        col = mk.check_collision_lemma(scheme.family, function_family(args.dim), tol)
        checks.insert(0, check("collision_identity", col.passed, col.worst_violation, {"f": col.worst_pair[0], "g": col.worst_pair[1]}))
        sup = mk.verify_support(scheme, tol)
        checks.append(check("support", sup.passed, sup.worst_violation, sup.witness))
        eq = mk.check_mk_equation(scheme, tol)
        eq_wit = None if eq.equation_ok else eq.witness
        checks.append(check("mean_king_equation", eq.equation_ok, eq.worst_violation, eq_wit))
        worst_sim, sim_wit = 0.0, None
        for b in range(scheme.family.n_bases):
            for k in range(scheme.n):
                miss = max(0.0, 1 - mk.simulate(scheme, b, k).p_correct)
                if miss > worst_sim:
                    worst_sim, sim_wit = miss, {"basis": b, "outcome": k}
        checks.append(check("simulation", worst_sim <= tol, worst_sim, sim_wit if worst_sim > tol else None))
        return report("mean-king", inputs, checks, tol, success_probability=eq.success_probability)

    basis = 0 if args.basis is None else args.basis
    outcome = 0 if args.outcome is None else args.outcome
    try:
        sim = mk.simulate(scheme, basis, outcome)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    inputs.update(basis=basis, outcome=outcome)
    miss = max(0.0, 1 - sim.p_correct)
    checks.append(check("guess_correct", miss <= tol, miss, None if miss <= tol else {"basis": basis, "outcome": outcome}))
    table = [
        {"alice_outcome": i, "guess": int(g), "probability": float(p)}
        for i, (p, g) in enumerate(zip(sim.probabilities, sim.guesses))
    ]
    return report(
        "mean-king",
        inputs,
        checks,
        tol,
        distribution=table,
        guess_distribution=sim.guess_distribution(scheme.n).tolist(),
        king_outcome_marginal=mk.king_outcome_marginal(scheme, basis).tolist(),
    )


COMMANDS = {
    "check-mub": cmd_mub,
    "check-complementary": cmd_complementary,
    "check-qkd": cmd_qkd,
    "mean-king": cmd_meanking,
}


def _nonneg_float(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not x >= 0:
        raise argparse.ArgumentTypeError(f"tolerance must be non-negative, got {text}")
    return x


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_nonneg_float, default=None, help="tolerance (default: $VERIFIER_TOL or 1e-9)")
    common.add_argument("--quiet", action="store_true", help="no summary on stderr")
    common.add_argument("--timing", action="store_true", help="add wall_time_ms to the report")

    parser = argparse.ArgumentParser(prog="mubcheck", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-mub", parents=[common], help="unbiasedness of the built-in bases")
    p.add_argument("--dim", type=int, required=True)

    for name, help_ in (
        ("check-complementary", "complementarity characterizations"),
        ("check-qkd", "BB84 / E91 equations"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--dim", type=int)
        src.add_argument("--file")
        if name == "check-complementary":
            p.add_argument("--method", choices=fm.METHODS + ("all",), default="all")
        else:
            p.add_argument("--protocol", choices=qkd.PROTOCOLS + ("both",), default="both")

    p = sub.add_parser("mean-king", parents=[common], help="Mean King scheme")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--mode", choices=("construct", "verify", "simulate"), default="verify")
    p.add_argument("--basis", type=int)
    p.add_argument("--outcome", type=int)
    p.add_argument("--corrupt-lookup", action="store_true")
    return parser


def resolve_tol(flag, environ=None) -> float:
    environ = os.environ if environ is None else environ
    if flag is not None:
        return flag
    env = environ.get("VERIFIER_TOL")
    if env:
        try:
            return _nonneg_float(env)
        except argparse.ArgumentTypeError as exc:
            raise InputError(f"VERIFIER_TOL: {exc}") from None
    return DEFAULT_TOL


def summary(rep: dict) -> str:
    lines = [f"{rep['command']}: {'PASS' if rep['passed'] else 'FAIL'}"]
    for c in rep["checks"]:
        mark = "ok  " if c["passed"] else "FAIL"
        lines.append(f"  {mark} {c['name']}  worst={c['worst_violation']:.3g}")
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        tol = resolve_tol(args.tol)
        rep = COMMANDS[args.command](args, tol)
    except InputError as exc:
        print(f"mubcheck: error: {exc}", file=sys.stderr)
        return 2
    if args.timing:
        rep["wall_time_ms"] = int(round(1000 * (time.perf_counter() - start)))
    rep = _clean(rep)
    sys.stdout.write(json.dumps(rep, indent=2) + "\n")
    if not args.quiet:
        print(summary(rep), file=sys.stderr)
    return 0 if rep["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
