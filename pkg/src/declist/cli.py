"""Command-line surface: generate instances, inspect, compress, verify.

All numeric output is deterministic for a fixed seed and independent of the
worker count; estimates always carry their mode and CI columns so they can
never be mistaken for exact values.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from .analysis import (
    InequalityRecord,
    _map_chunks,
    bridging_check,
    dnf_useful_terms_check,
    expected_usenum,
    hit_distribution,
    hypercontractivity_check,
    sum_identities_check,
    usenum,
)
from .compress import min_size_for_error, size_bound_for_error, take_top
from .core import (
    DEFAULT_SEED,
    DecisionList,
    DecisionListError,
    ExactStars,
    RandomSource,
    UniformStars,
    parse_decision_list,
    serialize_decision_list,
    sweep_limit,
)
from .encoding import counting_bound, roundtrip_audit
from .generators import (
    gen_from_truth_table,
    gen_lv,
    gen_random_list,
    gen_threshold_dnf,
    gen_tribes,
)


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write_text(path, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _load_list(path: str) -> DecisionList:
    return parse_decision_list(_read_text(path))


def _rows_to_csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: row.get(c, "") for c in columns})
    return buf.getvalue()


def _emit_report(args, suite, params, columns, rows, passed) -> None:
    if args.format == "json":
        text = json.dumps(
            {"suite": suite, "params": params, "pass": passed, "rows": rows},
            sort_keys=True,
            indent=2,
        )
    else:
        text = _rows_to_csv(columns, rows)
    _write_text(args.output, text)


def _fmtnum(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    if args.family == "tribes":
        L = gen_tribes(args.terms, args.width)
    elif args.family == "threshold":
        L = gen_threshold_dnf(args.n, args.w)
    elif args.family == "lv":
        values = [int(c) for c in args.values]
        L = gen_lv(args.n, args.w, values)
    elif args.family == "truthtable":
        L = gen_from_truth_table(list(args.table))
    elif args.family == "random":
        L = gen_random_list(
            args.n, args.w, args.m, args.alphabet, RandomSource(args.seed)
        )
    else:
        raise DecisionListError(f"unknown family {args.family!r}")
    _write_text(args.output, serialize_decision_list(L))
    return 0


# ---------------------------------------------------------------------------
# stats
# ---------------------------------------------------------------------------


def cmd_stats(args) -> int:
    L = _load_list(args.input)
    exact_ok = L.n <= sweep_limit()
    if not exact_ok and not args.mc:
        raise DecisionListError(
            f"n={L.n} exceeds the exact sweep limit {sweep_limit()}; pass --mc"
        )
    mode = "mc" if args.mc else "exact"
    p = hit_distribution(
        L, mode, samples=args.samples, rng=RandomSource(args.seed), workers=args.workers
    )
    use_count = usenum(L)
    junta = len(L.variables())
    if args.json:
        out = {
            "n": L.n,
            "m": L.size,
            "w": L.width,
            "usenum": use_count,
            "junta_size": junta,
            "hit": p.to_json_dict(),
        }
        _write_text(args.output, json.dumps(out, sort_keys=True, indent=2))
        return 0
    lines = [
        f"n={L.n} m={L.size} w={L.width}",
        f"usenum={use_count}",
        f"junta_size={junta}",
        f"hit probabilities ({p.mode}):",
    ]
    for i, v in enumerate(p.values, 1):
        ci = f" +-{p.ci_half_widths[i - 1]:.3g}" if p.mode == "mc" else ""
        lines.append(f"  {i}: {_fmtnum(v)}{ci}")
    _write_text(args.output, "\n".join(lines))
    return 0


# ---------------------------------------------------------------------------
# compress
# ---------------------------------------------------------------------------


def cmd_compress(args) -> int:
    L = _load_list(args.input)
    if (args.epsilon is None) == (args.t is None):
        raise DecisionListError("pass exactly one of --epsilon or --t")
    rng = RandomSource(args.seed)
    if args.t is not None:
        result = take_top(L, args.t, mode=args.mode, samples=args.samples, rng=rng)
    else:
        result = min_size_for_error(
            L, args.epsilon, mode=args.mode, samples=args.samples, rng=rng
        )
    lines = [
        f"kept {len(result.kept)} of {L.size} rules (t={result.t}): {list(result.kept)}",
        f"dropped mass: {_fmtnum(result.dropped_mass)} ({result.mode})",
        f"distance:     {_fmtnum(result.distance)} ({result.mode})",
        f"junta size:   {result.junta_size}",
    ]
    if args.epsilon is not None and 0.0 < args.epsilon < 1.0:
        bound = size_bound_for_error(max(L.width, 1), args.epsilon)
        binding = "binding" if bound.t < L.size else "not binding at this size"
        lines.append(
            f"worst-case size bound (w={max(L.width, 1)}, eps={args.epsilon}): "
            f"t={bound.t} with beta={bound.beta:g} [{binding}]"
        )
    sys.stdout.write("\n".join(lines) + "\n")
    if args.output:
        _write_text(args.output, json.dumps(result.to_json_dict(), sort_keys=True))
    if args.list_out:
        _write_text(args.list_out, serialize_decision_list(result.sublist))
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _corpus(args) -> list[DecisionList]:
    rng = RandomSource(args.seed)
    return [
        gen_random_list(args.n, args.w, args.m, args.alphabet, rng.child(t))
        for t in range(args.lists)
    ]


def _fail(args, suite, obj) -> None:
    sys.stderr.write(f"{suite}: FAILED\n")
    sys.stderr.write(json.dumps(obj, sort_keys=True) + "\n")


def _verify_roundtrip_one(task):
    _, L, k, exhaustive, rng, budget = task
    audit = roundtrip_audit(L, k, exhaustive=exhaustive, rng=rng, sample_budget=budget)
    counting = counting_bound(L, k)
    return audit, counting


def cmd_verify_roundtrip(args) -> int:
    lists = _corpus(args)
    rng = RandomSource(args.seed, stream=1)
    tasks = [
        (t, L, k, args.exhaustive, rng.child(t * 100 + k), args.budget)
        for t, L in enumerate(lists)
        for k in range(L.n + 1)
    ]
    results = _map_chunks(_verify_roundtrip_one, tasks, args.workers)
    rows, passed = [], True
    for (t, L, k, _, _, _), (audit, counting) in zip(tasks, results):
        ok = audit.passed and counting.passed
        if args.exhaustive and audit.U_size != counting.U_size:
            ok = False  # enumeration and transform disagree on |U|
        passed &= ok
        rows.append(
            {
                "list": t,
                "n": audit.n,
                "k": audit.k,
                "w": audit.w,
                "U_size": audit.U_size,
                "V_size": counting.V_size,
                "checked": audit.checked,
                "failures": len(audit.failures),
                "pass": str(ok).lower(),
            }
        )
        if not ok:
            _fail(args, "roundtrip", {"list": L.to_dict(), "k": k})
    _emit_report(
        args,
        "roundtrip",
        {"lists": args.lists, "n": args.n, "w": args.w, "seed": args.seed},
        ["list", "n", "k", "w", "U_size", "V_size", "checked", "failures", "pass"],
        rows,
        passed,
    )
    return 0 if passed else 1


def _usenum_instances(args):
    if args.family == "tribes":
        return [("tribes", gen_tribes(args.terms, args.width))]
    if args.family == "threshold":
        return [("threshold", gen_threshold_dnf(args.n, args.w))]
    if args.family == "random":
        return [(f"random{t}", L) for t, L in enumerate(_corpus(args))]
    raise DecisionListError(f"unknown family {args.family!r}")


def cmd_verify_usenum(args) -> int:
    rows, passed = [], True
    for name, L in _usenum_instances(args):
        w = max(L.width, 1)
        k = round(args.alpha * L.n)
        alpha_eff = Fraction(k, L.n)
        e_fixed = expected_usenum(L, ExactStars(k))
        bound_fixed = (
            None if k == L.n else Fraction(4, 1) ** w / (1 - alpha_eff) ** w
        )
        ok = bound_fixed is None or e_fixed <= bound_fixed
        passed &= ok
        rows.append(
            {
                "instance": name,
                "model": f"fixed-stars k={k}",
                "n": L.n,
                "w": L.width,
                "alpha": _fmtnum(float(alpha_eff)),
                "expected_usenum": _fmtnum(e_fixed),
                "bound": "" if bound_fixed is None else _fmtnum(bound_fixed),
                "pass": str(ok).lower(),
                "within_bound": "",
            }
        )
        if not ok:
            _fail(args, "usenum", {"list": L.to_dict(), "k": k})
        e_u = expected_usenum(L, UniformStars(args.alpha))
        bound_u = (4.0 / (1.0 - args.alpha)) ** w
        rows.append(
            {
                "instance": name,
                "model": "independent-stars",
                "n": L.n,
                "w": L.width,
                "alpha": _fmtnum(args.alpha),
                "expected_usenum": _fmtnum(e_u),
                "bound": _fmtnum(bound_u),
                "pass": "",  # reported, not asserted, for this model
                "within_bound": str(e_u <= bound_u + 1e-9).lower(),
            }
        )
    _emit_report(
        args,
        "usenum",
        {"family": args.family, "alpha": args.alpha, "seed": args.seed},
        [
            "instance", "model", "n", "w", "alpha",
            "expected_usenum", "bound", "pass", "within_bound",
        ],
        rows,
        passed,
    )
    return 0 if passed else 1


def _verify_bridging_one(task):
    L, beta, mode, samples, rng = task
    return bridging_check(L, beta, mode=mode, samples=samples, rng=rng)


def cmd_verify_bridging(args) -> int:
    lists = _corpus(args)
    rng = RandomSource(args.seed, stream=2)
    tasks = [
        (L, args.beta, args.mode, args.samples, rng.child(t))
        for t, L in enumerate(lists)
    ]
    reports = _map_chunks(_verify_bridging_one, tasks, args.workers)
    rows, passed = [], True
    for t, report in enumerate(reports):
        passed &= report.passed
        for rec in report.records:
            row = {"list": t, **rec.as_row()}
            rows.append(row)
        if not report.passed:
            _fail(args, "bridging", {"list": lists[t].to_dict(), "beta": args.beta})
    _emit_report(
        args,
        "bridging",
        {"beta": args.beta, "lists": args.lists, "mode": args.mode, "seed": args.seed},
        ["list", *InequalityRecord.CSV_COLUMNS],
        rows,
        passed,
    )
    return 0 if passed else 1


def cmd_verify_hyper(args) -> int:
    lists = _corpus(args)
    rows, passed = [], True
    for t, L in enumerate(lists):
        for i in range(1, L.size + 1):
            report = hypercontractivity_check(L, i, args.beta)
            passed &= report.passed
            rows.append({"list": t, **report.records[0].as_row()})
            if not report.passed:
                _fail(args, "hyper", {"list": L.to_dict(), "index": i})
    _emit_report(
        args,
        "hyper",
        {"beta": args.beta, "lists": args.lists, "seed": args.seed},
        ["list", *InequalityRecord.CSV_COLUMNS],
        rows,
        passed,
    )
    return 0 if passed else 1


def cmd_verify_dnf_useful(args) -> int:
    if args.family == "tribes":
        instances = [("tribes", gen_tribes(args.terms, args.width))]
    elif args.family == "threshold":
        instances = [("threshold", gen_threshold_dnf(args.n, args.w))]
    else:
        raise DecisionListError("dnf-useful needs --family tribes or threshold")
    rows, passed = [], True
    for name, L in instances:
        report = dnf_useful_terms_check(L, args.beta_fix)
        passed &= report.passed
        rows.append({"instance": name, **report.records[0].as_row()})
        if not report.passed:
            _fail(args, "dnf-useful", {"list": L.to_dict(), "beta_fix": args.beta_fix})
    _emit_report(
        args,
        "dnf-useful",
        {"family": args.family, "beta_fix": args.beta_fix},
        ["instance", *InequalityRecord.CSV_COLUMNS],
        rows,
        passed,
    )
    return 0 if passed else 1


def _verify_claims_one(task):
    (L,) = task
    return sum_identities_check(L)


def cmd_verify_claims(args) -> int:
    lists = _corpus(args)
    reports = _map_chunks(_verify_claims_one, [(L,) for L in lists], args.workers)
    rows, passed = [], True
    for t, report in enumerate(reports):
        passed &= report.passed
        for rec in report.records:
            rows.append({"list": t, **rec.as_row()})
        if not report.passed:
            _fail(args, "claims", {"list": lists[t].to_dict()})
    _emit_report(
        args,
        "claims",
        {"lists": args.lists, "seed": args.seed},
        ["list", *InequalityRecord.CSV_COLUMNS],
        rows,
        passed,
    )
    return 0 if passed else 1


VERIFY_COMMANDS = {
    "roundtrip": cmd_verify_roundtrip,
    "usenum": cmd_verify_usenum,
    "bridging": cmd_verify_bridging,
    "hyper": cmd_verify_hyper,
    "dnf-useful": cmd_verify_dnf_useful,
    "claims": cmd_verify_claims,
}


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_corpus_flags(p, lists=20, n=6, w=3, m=8):
    p.add_argument("--lists", type=int, default=lists, help="corpus size")
    p.add_argument("--n", type=int, default=n)
    p.add_argument("--w", type=int, default=w)
    p.add_argument("--m", type=int, default=m)
    p.add_argument("--alphabet", type=int, default=2)


def _add_common_verify_flags(p):
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output", default=None, help="report file (default stdout)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="declist",
        description="decision-list generation, analysis, compression, verification",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate an instance in the JSON schema")
    gen_sub = gen.add_subparsers(dest="family", required=True)
    g = gen_sub.add_parser("tribes")
    g.add_argument("--terms", type=int, required=True)
    g.add_argument("--width", type=int, required=True)
    g = gen_sub.add_parser("threshold")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--w", type=int, required=True)
    g = gen_sub.add_parser("lv")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--w", type=int, required=True)
    g.add_argument("--values", required=True, help="0/1 string, one per term")
    g = gen_sub.add_parser("truthtable")
    g.add_argument("--table", required=True, help="output string, length a power of 2")
    g = gen_sub.add_parser("random")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--w", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--alphabet", type=int, default=2)
    g.add_argument("--seed", type=int, default=DEFAULT_SEED)
    for g in gen_sub.choices.values():
        g.add_argument("-o", "--output", default=None)

    st = sub.add_parser("stats", help="summary of a list: sizes, usenum, hit table")
    st.add_argument("input", nargs="?", default="-", help="list file or - for stdin")
    st.add_argument("--mc", action="store_true", help="estimate instead of sweeping")
    st.add_argument("--samples", type=int, default=100_000)
    st.add_argument("--seed", type=int, default=DEFAULT_SEED)
    st.add_argument("--workers", type=int, default=1)
    st.add_argument("--json", action="store_true")
    st.add_argument("-o", "--output", default=None)

    cp = sub.add_parser("compress", help="keep the most-hit rules")
    cp.add_argument("input", nargs="?", default="-")
    cp.add_argument("--epsilon", type=float, default=None, help="target dropped mass")
    cp.add_argument("--t", type=int, default=None, help="keep exactly t top rules")
    cp.add_argument("--mode", choices=["exact", "mc"], default="exact")
    cp.add_argument("--samples", type=int, default=100_000)
    cp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    cp.add_argument("-o", "--output", default=None, help="result JSON file")
    cp.add_argument("--list-out", default=None, help="write the kept sublist here")

    vf = sub.add_parser("verify", help="run an invariant suite; exit 0 iff all pass")
    vf_sub = vf.add_subparsers(dest="suite", required=True)

    v = vf_sub.add_parser("roundtrip")
    _add_corpus_flags(v, lists=50)
    v.add_argument("--exhaustive", action="store_true", default=True)
    v.add_argument("--sampled", dest="exhaustive", action="store_false")
    v.add_argument("--budget", type=int, default=500, help="samples per (list,k)")
    _add_common_verify_flags(v)

    v = vf_sub.add_parser("usenum")
    v.add_argument("--alpha", type=float, default=0.5)
    v.add_argument("--family", choices=["tribes", "threshold", "random"],
                   required=True)
    v.add_argument("--terms", type=int, default=2)
    v.add_argument("--width", type=int, default=2)
    _add_corpus_flags(v)
    _add_common_verify_flags(v)

    v = vf_sub.add_parser("bridging")
    v.add_argument("--beta", type=float, default=0.5)
    v.add_argument("--mode", choices=["exact", "mc"], default="exact")
    v.add_argument("--samples", type=int, default=100_000)
    _add_corpus_flags(v)
    _add_common_verify_flags(v)

    v = vf_sub.add_parser("hyper")
    v.add_argument("--beta", type=float, default=0.5)
    _add_corpus_flags(v)
    _add_common_verify_flags(v)

    v = vf_sub.add_parser("dnf-useful")
    v.add_argument("--beta-fix", type=float, default=0.5, dest="beta_fix")
    v.add_argument("--family", choices=["tribes", "threshold"], required=True)
    v.add_argument("--terms", type=int, default=2)
    v.add_argument("--width", type=int, default=2)
    v.add_argument("--n", type=int, default=4)
    v.add_argument("--w", type=int, default=2)
    _add_common_verify_flags(v)

    v = vf_sub.add_parser("claims")
    _add_corpus_flags(v)
    _add_common_verify_flags(v)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "stats":
            return cmd_stats(args)
        if args.command == "compress":
            return cmd_compress(args)
        if args.command == "verify":
            return VERIFY_COMMANDS[args.suite](args)
    except DecisionListError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
