"""Command-line front end: ``norm``, ``verify`` and ``gen``.

Exit codes: 0 success, 1 a law check failed, 2 invalid input, 3 inadmissible
exponents.
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction
from importlib import metadata

from . import corpus
from .estimate import Budget
from .instances import REPORT_VERSION, Instance, InstanceError, instance_document, load_instance, params_from_dict, write_json
from .laws import Verdict
from .seqnorms import mixed_norm_dual, mixed_norm_primal, strong_norm, weak_norm
from .serialize import to_jsonable
from .spaces import INF, reciprocal
from .summing import InadmissibleExponents, SummingKind, SummingParams, estimate_norm
from .tensors import MultilinearMap, op_norm
from .verify import LAW_IDS, VerifyOptions, bh_probe, run, tally

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_INADMISSIBLE = 0, 1, 2, 3
NORM_KINDS = ("strong", "weak", "mixed", "mixed-dual", "op", "summing")
GEN_KINDS = corpus.TENSOR_KINDS + corpus.FAMILY_KINDS


class UsageError(Exception):
    pass


def exponent(text: str):
    """Parse '2', '4/3', '1.5' or 'inf'."""
    t = text.strip().lower()
    if t in ("inf", "infinity"):
        return INF
    try:
        value = float(Fraction(t))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not an exponent: {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError(f"exponent must be positive: {text!r}")
    return value


def exponent_list(text: str):
    return tuple(exponent(part) for part in text.split(","))


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0"


def _budget(args) -> Budget:
    return Budget(restarts=args.budget_restarts, iters=args.budget_iters, seed=args.seed, m_max=args.m_max)


def _report(args, argv, items, wall, summary=None, budget: Budget | None = None) -> dict:
    doc = {
        "version": REPORT_VERSION,
        "tool": "summingnorms",
        "tool_version": tool_version(),
        "command": list(argv),
        "seed": args.seed,
    }
    if budget is not None:
        doc["budget"] = to_jsonable(budget)
    if summary is not None:
        doc["summary"] = summary
    doc["wall_time"] = round(wall, 6)
    doc["items"] = items
    return doc


def _emit(doc: dict, out: str | None) -> None:
    text = write_json(doc, out)
    if out is None or out == "-":
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# norm


def _estimate_item(target: str, norm: str, est) -> dict:
    return {"target": target, "norm": norm, "value": to_jsonable(est.value), "kind": est.kind.value,
            "certified": est.certified, "witness": _witness_json(est.witness), "info": to_jsonable(est.info)}


def _witness_json(w):
    if w is None:
        return None
    if hasattr(w, "coords"):
        return to_jsonable(w.coords)
    if isinstance(w, list):
        return [_witness_json(v) for v in w]
    if hasattr(w, "x_families"):
        return {"x_families": [to_jsonable(f.coords) for f in w.x_families],
                "phis": None if w.phis is None else to_jsonable(w.phis.coords),
                "lhs": w.lhs, "rhs": w.rhs, "ratio": w.ratio}
    if hasattr(w, "taus"):
        return {"taus": to_jsonable(w.taus), "ys": to_jsonable(w.ys.coords)}
    if hasattr(w, "weights"):
        return {"atoms": to_jsonable(w.atom_coords), "weights": to_jsonable(w.weights)}
    return to_jsonable(w)


def _summing_params(args, inst: Instance, T: MultilinearMap) -> SummingParams:
    if args.summing_kind is None and inst.params is not None:
        return params_from_dict(inst.params)
    kind = SummingKind(args.summing_kind or "multiple")
    if args.p is None or args.q is None:
        raise UsageError("summing norms need --p and --q")
    qs = args.q
    r = args.r if args.r is not None else INF
    if kind is SummingKind.AS_LINEAR:
        return SummingParams.as_linear(args.p, qs[0])
    if kind is SummingKind.AS_LINEAR_PQR:
        return SummingParams.as_linear_pqr(args.p, qs[0], r)
    if kind is SummingKind.AS_MULTI:
        return SummingParams.as_multi(args.p, qs)
    if kind is SummingKind.AS_MULTI_R:
        return SummingParams.as_multi_r(args.p, qs, r)
    if kind is SummingKind.MULTIPLE:
        return SummingParams.multiple(args.p, qs)
    if kind is SummingKind.MULTIPLE_R:
        return SummingParams.multiple_r(args.p, qs, r)
    if args.s is None:
        raise UsageError("mixing needs --s")
    return SummingParams.mixing(args.s, args.p, qs)


def _single(values, flag: str):
    if values is None:
        raise UsageError(f"this norm needs {flag}")
    if len(values) != 1:
        raise UsageError(f"{flag} takes a single exponent here")
    return values[0]


def _mixed_pair(args):
    s = args.s
    q = _single(args.q, "--q")
    if s is None:
        raise UsageError("mixed norms need --s")
    if reciprocal(q) < reciprocal(s):
        raise InadmissibleExponents("q > s")
    if q is not INF and q < 1:
        raise InadmissibleExponents("q < 1")
    return s, q


def cmd_norm(args, argv) -> int:
    start = time.perf_counter()
    inst = load_instance(args.instance)
    budget = _budget(args)
    items = []
    kind = args.kind
    if kind in ("strong", "weak", "mixed", "mixed-dual"):
        targets = inst.families
        if not targets:
            raise UsageError("the instance has no families")
    else:
        targets = inst.tensors
        if not targets:
            raise UsageError("the instance has no tensors")
    if args.target is not None:
        if args.target not in targets:
            raise UsageError(f"no target named {args.target!r}")
        targets = {args.target: targets[args.target]}
    for name, obj in targets.items():
        if kind == "strong":
            est = strong_norm(obj, _single(args.q, "--q"))
        elif kind == "weak":
            q = _single(args.q, "--q")
            if q is not INF and q < 1:
                raise InadmissibleExponents("p < 1")
            est = weak_norm(obj, q, budget)
        elif kind == "mixed":
            est = mixed_norm_primal(obj, *_mixed_pair(args), budget)
        elif kind == "mixed-dual":
            s, q = _mixed_pair(args)
            if s is INF or s == q:
                raise InadmissibleExponents("s = inf" if s is INF else "q = s")
            est = mixed_norm_dual(obj, s, q, budget)
        elif kind == "op":
            est = op_norm(obj, budget.replace(restarts=max(budget.restarts, 32)))
        else:
            est = estimate_norm(obj, _summing_params(args, inst, obj), budget)
        items.append(_estimate_item(name, kind, est))
    _emit(_report(args, argv, items, time.perf_counter() - start, budget=budget), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args, argv) -> int:
    start = time.perf_counter()
    budget = _budget(args)
    opts = VerifyOptions(count=args.count, seed=args.seed, N=args.N, n=args.n, m=args.m, p=args.p,
                         q=None if args.q is None else _single(args.q, "--q"), r=args.r, s=args.s,
                         exhaustive=not args.ascent, budget=budget)
    reports = run(args.law, opts)
    counts = tally(reports)
    summary = {"law_id": args.law, "count": len(reports), **counts,
               "only_inconclusive": counts["fail"] == 0 and counts["inconclusive"] > 0}
    if args.law == "bh":
        summary["exponent_probe"] = to_jsonable(bh_probe(opts))
    if args.law == "triviality":
        summary["divergence_exponents"] = [r.details["measured_exponent"] for r in reports]
    items = [r.as_dict() for r in reports]
    _emit(_report(args, argv, items, time.perf_counter() - start, summary, budget), args.out)
    print(f"{args.law}: {counts['pass']} pass, {counts['fail']} fail, {counts['inconclusive']} inconclusive",
          file=sys.stderr)
    if counts[Verdict.FAIL.value]:
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------
# gen


def cmd_gen(args, argv) -> int:
    if args.n < 1 or args.N < 1 or (args.m is not None and args.m < 1):
        raise UsageError("dimensions must be positive integers")
    if args.N > 64 or args.n > 6 or args.N ** args.n > 1 << 22:
        raise UsageError("dimensions are too large for a dense instance")
    obj = corpus.generate(args.kind, args.n, args.N, args.seed, m=args.m, exponent=args.exponent)
    name = "T" if args.kind.endswith("tensor") else "X"
    if isinstance(obj, MultilinearMap):
        doc = instance_document({name: obj}, seed=args.seed, comment=f"{args.kind} n={args.n} N={args.N}")
    else:
        doc = instance_document(families={name: obj}, seed=args.seed, comment=f"{args.kind} N={args.N}")
    _emit(doc, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget-restarts", type=int, default=Budget.restarts)
    p.add_argument("--budget-iters", type=int, default=Budget.iters)
    p.add_argument("--m-max", type=int, default=Budget.m_max)
    p.add_argument("--out", default=None, help="output path, '-' or omitted for stdout")


def _add_exponents(p: argparse.ArgumentParser) -> None:
    p.add_argument("--p", type=exponent)
    p.add_argument("--q", type=exponent_list, help="exponent or comma list, one per slot")
    p.add_argument("--r", type=exponent)
    p.add_argument("--s", type=exponent)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="summingnorms", description="Summing-type norms of families and multilinear maps.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {tool_version()}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pn = sub.add_parser("norm", help="compute norms of the families or tensors in an instance file")
    pn.add_argument("instance")
    pn.add_argument("--kind", required=True, choices=NORM_KINDS)
    pn.add_argument("--target", help="only this family or tensor")
    pn.add_argument("--summing-kind", choices=[k.value for k in SummingKind])
    _add_exponents(pn)
    _add_common(pn)

    pv = sub.add_parser("verify", help="run a law over a seeded corpus")
    pv.add_argument("law", choices=LAW_IDS)
    pv.add_argument("--count", type=int, default=20)
    pv.add_argument("--N", type=int)
    pv.add_argument("--n", type=int)
    pv.add_argument("--m", type=int)
    pv.add_argument("--ascent", action="store_true", help="use ascent instead of enumeration where it matters")
    _add_exponents(pv)
    _add_common(pv)

    pg = sub.add_parser("gen", help="write a seeded instance file")
    pg.add_argument("kind", choices=GEN_KINDS)
    pg.add_argument("--n", type=int, default=2, help="tensor arity")
    pg.add_argument("--N", type=int, default=4, help="dimension")
    pg.add_argument("--m", type=int, help="family length")
    pg.add_argument("--exponent", type=exponent, default=INF, help="exponent of the generated spaces")
    _add_common(pg)
    return parser


COMMANDS = {"norm": cmd_norm, "verify": cmd_verify, "gen": cmd_gen}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify" and args.q is not None and len(args.q) != 1:
        parser.error("--q takes a single exponent for verify")
    try:
        return COMMANDS[args.command](args, argv)
    except InadmissibleExponents as exc:
        print(f"error: inadmissible exponents: {exc.constraint}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    except (InstanceError, UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    raise SystemExit(main())
