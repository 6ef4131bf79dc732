"""Command line front end.

Exit codes: 0 success, 1 a checked property failed (the report carries a
witness), 2 bad input.  ``--json`` output is deterministic for a given seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import groups as grp
from .criterion import BudgetExceeded, InstanceError, load_instance, orbit_eq_p_elementary, orbit_eq_upto_depth
from .flag import FinSupp, SpecError, StructureSpec, gap_witnesses, layer
from .oracle import CapExceeded, compare_with_orbit_test
from .orbits import (
    ParamSet,
    SpanCapExceeded,
    lascar_report,
    list_orbits,
    n_witness,
    nm_dep,
    nm_rank,
    same_orbit,
    validate_chain,
    witness_chain,
)
from .ordinal import OMEGA, ZERO, add, compare, format_ordinal, left_sub, nat_sum, ordinal

OK, VIOLATION, BAD_INPUT = 0, 1, 2


class InputError(ValueError):
    pass


# -- input helpers -----------------------------------------------------------

def _load(value: str | None, what: str):
    """JSON from a file path, or inline when the value starts with { or [."""
    if value is None:
        raise InputError(f"missing --{what}")
    text = value if value.lstrip()[:1] in "{[" else None
    if text is None:
        try:
            text = Path(value).read_text()
        except OSError as exc:
            raise InputError(f"--{what}: cannot read {value}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"--{what}: malformed JSON ({exc.msg} at line {exc.lineno})") from None


def _spec(args) -> StructureSpec:
    return StructureSpec.from_json(_load(args.spec, "spec"))


def _element(args, name: str, spec: StructureSpec) -> FinSupp:
    try:
        return FinSupp.from_json(_load(getattr(args, name), name), spec.p)
    except ValueError as exc:
        raise InputError(f"--{name}: {exc}") from None


def _params(args, name: str, spec: StructureSpec) -> ParamSet:
    value = getattr(args, name)
    if value is None:
        return ParamSet(spec.p, cap=args.cap)
    try:
        return ParamSet.from_json(_load(value, name), spec.p, cap=args.cap)
    except ValueError as exc:
        raise InputError(f"--{name}: {exc}") from None


def _ints(text: str, what: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"--{what} must be a comma-separated list of integers") from None


# -- output helpers ------------------------------------------------------------

def _table(rows: list[list], headers: list[str]) -> str:
    cells = [[str(h) for h in headers]] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[k]) for r in cells) for k in range(len(headers))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _support(x: FinSupp) -> str:
    return "{" + ", ".join(f"{n}:{v}" for n, v in x.key) + "}"


def _emit(args, payload: dict, human: str):
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(human)


# -- verbs ---------------------------------------------------------------------

def cmd_spec_validate(args) -> int:
    spec = _spec(args)
    count = 8
    checks = []
    for i in (ZERO, ordinal(1), OMEGA):
        if i < spec.alpha:
            coords = gap_witnesses(spec, i, spec.alpha, count)
            checks.append({"i": format_ordinal(i), "j": format_ordinal(spec.alpha), "witnesses": coords})
    layers = [[n, format_ordinal(layer(spec, n))] for n in range(12)]
    payload = {"spec": spec.to_json(), "gap_checks": checks, "layers": layers, "valid": True}
    human = (f"p = {spec.p}, alpha = {format_ordinal(spec.alpha)}, layering = {spec.layering.kind}\n"
             + _table(layers, ["coord", "layer"]) + "\n"
             + "\n".join(f"I_{c['i']} \\ I_{c['j']} contains {c['witnesses']} ..." for c in checks))
    _emit(args, payload, human)
    return OK


def cmd_orbit_eq(args) -> int:
    spec = _spec(args)
    A = _params(args, "A", spec)
    eta, tau = _element(args, "eta", spec), _element(args, "tau", spec)
    ne, nt = n_witness(spec, eta, A)[0], n_witness(spec, tau, A)[0]
    same = same_orbit(spec, eta, tau, A)
    payload = {"same_orbit": same, "n_eta": format_ordinal(ne), "n_tau": format_ordinal(nt)}
    human = f"{'same orbit' if same else 'different orbits'} (n_eta = {format_ordinal(ne)}, n_tau = {format_ordinal(nt)})"
    _emit(args, payload, human)
    return OK


def cmd_orbit_list(args) -> int:
    spec = _spec(args)
    A = _params(args, "A", spec)
    top = _ordinal_arg(args.level, "level") if args.level else spec.alpha
    coords = _ints(args.coords, "coords") if args.coords else ()
    orbits = list_orbits(spec, A, top, coords, depth=args.depth)
    payload = {"orbits": [o.to_json() for o in orbits], "total": len(orbits)}
    rows = [[format_ordinal(o.level), _support(o.witness), _support(o.representative), o.count_at_level]
            for o in orbits]
    human = _table(rows, ["level", "witness", "representative", "at level"]) + f"\n{len(orbits)} orbits"
    _emit(args, payload, human)
    return OK


def cmd_rank(args) -> int:
    spec = _spec(args)
    A = _params(args, "A", spec)
    eta = _element(args, "element", spec)
    r = nm_rank(spec, eta, A)
    payload = {"rank": format_ordinal(r)}
    human = format_ordinal(r)
    code = OK
    if args.certify:
        chain = witness_chain(spec, eta, A)
        problems = validate_chain(spec, eta, A, chain)
        payload["certificate"] = chain.to_json()
        payload["problems"] = problems
        human += "\n" + _chain_text(chain, problems)
        code = VIOLATION if problems else OK
    _emit(args, payload, human)
    return code


def cmd_depend(args) -> int:
    spec = _spec(args)
    A, B = _params(args, "A", spec), _params(args, "B", spec)
    eta = _element(args, "element", spec)
    if not B.extends(A):
        raise InputError("--B: does not extend --A")
    dep = nm_dep(spec, eta, A, B)
    payload = {"dependent": dep, "n_A": format_ordinal(nm_rank(spec, eta, A)),
               "n_B": format_ordinal(nm_rank(spec, eta, B))}
    human = f"{'dependent' if dep else 'independent'} (n over A = {payload['n_A']}, n over B = {payload['n_B']})"
    _emit(args, payload, human)
    return OK


def _chain_text(chain, problems) -> str:
    rows = [[k + 1, format_ordinal(s.level), _support(s.added), "yes" if s.tight else "no"]
            for k, s in enumerate(chain.steps)]
    text = f"start level {format_ordinal(chain.start)}\n" + _table(rows, ["step", "level", "adjoined", "tight"])
    for r, u in chain.substitutions:
        text += f"\nrequested {format_ordinal(r)}: " + ("skipped" if u is None else f"used {format_ordinal(u)}")
    if problems:
        text += "\nproblems:\n  " + "\n  ".join(problems)
    return text


def cmd_chain_witness(args) -> int:
    spec = _spec(args)
    A = _params(args, "A", spec)
    eta = _element(args, "element", spec)
    levels = None
    if args.levels:
        levels = [_ordinal_arg(x.strip(), "levels") for x in args.levels.split(",")]
    chain = witness_chain(spec, eta, A, levels)
    problems = validate_chain(spec, eta, A, chain)
    payload = chain.to_json() | {"problems": problems}
    _emit(args, payload, _chain_text(chain, problems))
    return VIOLATION if problems else OK


def _ordinal_arg(text: str, what: str):
    try:
        return ordinal(text)
    except ValueError as exc:
        raise InputError(f"--{what}: {exc}") from None


_ORDINAL_OPS = {
    "+": lambda a, b: format_ordinal(add(a, b)),
    "add": lambda a, b: format_ordinal(add(a, b)),
    "natsum": lambda a, b: format_ordinal(nat_sum(a, b)),
    "cmp": lambda a, b: str(compare(a, b)),
    "lsub": lambda a, b: format_ordinal(left_sub(a, b)),
}


def cmd_ordinal_calc(args) -> int:
    tokens = args.expression.split()
    if len(tokens) == 1:
        result = format_ordinal(_ordinal_arg(tokens[0], "expression"))
    elif len(tokens) == 3 and tokens[1] in _ORDINAL_OPS:
        a, b = (_ordinal_arg(t, "expression") for t in (tokens[0], tokens[2]))
        try:
            result = _ORDINAL_OPS[tokens[1]](a, b)
        except ValueError as exc:
            raise InputError(f"expression: {exc}") from None
    else:
        ops = ", ".join(sorted(_ORDINAL_OPS))
        raise InputError(f"expression: expected 'ORD' or 'ORD OP ORD' with OP one of {ops}")
    _emit(args, {"expression": args.expression, "result": result}, result)
    return OK


def cmd_criterion_eq(args) -> int:
    try:
        system, inst = load_instance(_load(args.instance, "instance"))
    except InstanceError as exc:
        raise InputError(f"--instance: {exc}") from None
    depth = inst.depth if args.depth is None else args.depth
    if not 0 <= depth <= system.depth:
        raise InputError(f"--depth must be in [0, {system.depth}]")
    decide = orbit_eq_p_elementary if args.elementary else orbit_eq_upto_depth
    verdict = decide(system, inst.eta, inst.tau, inst.A, depth)
    payload = verdict.to_json()
    if verdict.kind == "distinct":
        w = payload["witness"]
        human = f"distinct: m={w['m']} k={w['k']} a={w['a']} l={w['l']}"
    else:
        human = f"equal up to depth {verdict.depth}"
    _emit(args, payload, human)
    return OK


def cmd_oracle_compare(args) -> int:
    spec = _spec(args)
    A = _params(args, "A", spec)
    J = _ints(args.J, "J")
    if not J or len(set(J)) != len(J):
        raise InputError("--J must list distinct coordinates")
    if not A.coords <= set(J):
        raise InputError("--A: parameters are not supported within --J")
    same = None
    if args.inject_fault:
        same = lambda *a: False
    report = compare_with_orbit_test(spec, A, J, same=same, cap=args.cap_candidates)
    payload = report.to_json()
    # brute force may split a symbolic orbit on an unsaturated J; anything else is a defect
    defects = [d for d in report.disagreements if report.saturated or d["brute_force_same"]]
    payload["violations"] = defects
    human = (f"group order {report.group_order}, {report.agreements} agreeing pairs, "
             f"{len(report.disagreements)} disagreeing, saturated = {report.saturated}")
    for note in report.notes:
        human += f"\n  {note}"
    for d in defects[:5]:
        human += f"\nviolation: eta={d['eta']['support']} tau={d['tau']['support']} brute={d['brute_force_same']}"
    _emit(args, payload, human)
    return VIOLATION if defects else OK


def _group(args) -> grp.FiniteGroup:
    cat = {g.name: g for g in grp.small_groups(16)}
    if args.group in cat:
        return cat[args.group]
    try:
        return grp.FiniteGroup.from_json(_load(args.group, "group"))
    except InputError:
        names = ", ".join(sorted(cat, key=lambda n: (len(cat[n]), n)))
        raise InputError(f"--group: not a catalogue name ({names}) or readable JSON") from None
    except (grp.GroupError, KeyError, TypeError) as exc:
        raise InputError(f"--group: {exc}") from None


def _prime_power(n: int) -> int | None:
    for q in range(2, n + 1):
        if n % q == 0:
            while n % q == 0:
                n //= q
            return q if n == 1 else None
    return None


def cmd_centralizer_chain(args) -> int:
    g = _group(args)
    if args.auts:
        try:
            aut = grp.AutSet(g, _load(args.auts, "auts"), cap=args.cap)
        except (grp.GroupError, TypeError, ValueError) as exc:
            raise InputError(f"--auts: {exc}") from None
    else:
        aut = grp.automorphism_group(g, cap=args.cap)
    chain = grp.iterated_centralizers(g, aut)
    sizes = [len(c) for c in chain.terms]
    fixed_ok = len(chain.terms) < 2 or chain.terms[1] == aut.fixed_points()
    p_g, p_a = _prime_power(len(g)), _prime_power(aut.order)
    applies = len(g) == 1 or aut.order == 1 or (p_g is not None and p_g == p_a)
    payload = {"group": g.name, "order": len(g), "acting_order": aut.order, "sizes": sizes,
               "reaches_whole": chain.reaches_whole, "first_term_is_fixed_points": fixed_ok,
               "p_group_action": applies, "nilpotency_class": g.nilpotency_class()}
    human = (f"{g.name or 'group'} of order {len(g)} under {aut.order} automorphisms\n"
             f"chain sizes {sizes}, reaches whole group: {chain.reaches_whole}")
    violation = not fixed_ok or (applies and not chain.reaches_whole)
    if violation:
        payload["witness"] = {"sizes": sizes, "last_term": sorted(chain.terms[-1])}
    _emit(args, payload, human)
    return VIOLATION if violation else OK


def cmd_lascar_check(args) -> int:
    spec = _spec(args)
    if args.i:
        points = [_ordinal_arg(x.strip(), "i") for x in args.i.split(",")]
    else:
        points = sorted({p for p in (ZERO, ordinal(1), ordinal(2), OMEGA, spec.alpha) if p <= spec.alpha})
    for i in points:
        if i > spec.alpha:
            raise InputError(f"--i: {format_ordinal(i)} exceeds alpha = {format_ordinal(spec.alpha)}")
    reports = [lascar_report(spec, i, args.seed) for i in points]
    payload = {"reports": [r.to_json() for r in reports], "ok": all(r.ok for r in reports)}
    rows = [[format_ordinal(r.i), format_ordinal(r.nm_sub), format_ordinal(r.nm_quotient),
             format_ordinal(r.nm_total), format_ordinal(r.lower), format_ordinal(r.upper),
             "ok" if r.ok else "FAIL"] for r in reports]
    human = _table(rows, ["i", "NM(H_i)", "NM(H/H_i)", "NM(H)", "sum", "natural sum", "check"])
    _emit(args, payload, human)
    return OK if payload["ok"] else VIOLATION


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="structure spec JSON file")
    common.add_argument("--depth", type=int, default=None, help="stage depth / sample depth")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--cap", type=int, default=1 << 16, help="size cap for spans and groups")

    parser = argparse.ArgumentParser(prog="nmorbits", description=__doc__.splitlines()[0])
    verbs = parser.add_subparsers(dest="verb", required=True)

    def leaf(sub, name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        return p

    spec = verbs.add_parser("spec").add_subparsers(dest="action", required=True)
    leaf(spec, "validate", cmd_spec_validate, "check a structure spec and certify its layer gaps")

    orbit = verbs.add_parser("orbit").add_subparsers(dest="action", required=True)
    p = leaf(orbit, "eq", cmd_orbit_eq, "are two elements in one orbit over A?")
    p.add_argument("--A")
    p.add_argument("--eta")
    p.add_argument("--tau")
    p = leaf(orbit, "list", cmd_orbit_list, "list orbits over A up to a level")
    p.add_argument("--A")
    p.add_argument("--level")
    p.add_argument("--coords", help="extra coordinates whose levels to include")

    p = leaf(verbs, "rank", cmd_rank, "NM-rank of an element over A")
    p.add_argument("--A")
    p.add_argument("--element")
    p.add_argument("--certify", action="store_true", help="attach a validated witness chain")

    p = leaf(verbs, "depend", cmd_depend, "does the element depend on B over A?")
    p.add_argument("--A")
    p.add_argument("--B")
    p.add_argument("--element")

    chain = verbs.add_parser("chain").add_subparsers(dest="action", required=True)
    p = leaf(chain, "witness", cmd_chain_witness, "descending chain of parameter extensions")
    p.add_argument("--A")
    p.add_argument("--element")
    p.add_argument("--levels", help="comma-separated target levels, e.g. 'w,5,2,0'")

    ordn = verbs.add_parser("ordinal").add_subparsers(dest="action", required=True)
    p = leaf(ordn, "calc", cmd_ordinal_calc, "evaluate 'ORD', or 'ORD OP ORD' with OP in + add natsum cmp lsub")
    p.add_argument("expression")

    crit = verbs.add_parser("criterion").add_subparsers(dest="action", required=True)
    p = leaf(crit, "eq", cmd_criterion_eq, "divisibility criterion on a tuple instance")
    p.add_argument("--instance")
    p.add_argument("--elementary", action="store_true", help="use the Z_p vanishing form")

    orc = verbs.add_parser("oracle").add_subparsers(dest="action", required=True)
    p = leaf(orc, "compare", cmd_oracle_compare, "brute-force orbits at level J versus the orbit test")
    p.add_argument("--A")
    p.add_argument("--J", required=True)
    p.add_argument("--cap-candidates", type=int, default=50_000_000)
    p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)

    cen = verbs.add_parser("centralizer").add_subparsers(dest="action", required=True)
    p = leaf(cen, "chain", cmd_centralizer_chain, "iterated centralizers of an automorphism group")
    p.add_argument("--group", required=True, help="catalogue name (e.g. D8, Q8) or group JSON")
    p.add_argument("--auts", help="JSON list of automorphisms as permutations (default: all)")

    las = verbs.add_parser("lascar").add_subparsers(dest="action", required=True)
    p = leaf(las, "check", cmd_lascar_check, "check the Lascar inequalities for H_i")
    p.add_argument("--i", help="comma-separated indices (default 0,1,2,w,alpha)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return BAD_INPUT if exc.code else OK
    if args.depth is None and args.func is cmd_orbit_list:
        args.depth = 4
    try:
        return args.func(args)
    except (InputError, SpecError, InstanceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (CapExceeded, BudgetExceeded, SpanCapExceeded, grp.GroupError) as exc:
        print(f"error: --cap: {exc}", file=sys.stderr)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
    return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
