"""Command-line entry point.

Every module operation is reachable through a subcommand; output is
JSON lines (one record per line, keys sorted, no timestamps), so
identical invocations produce byte-identical output.  Sampling
subcommands require an explicit --seed.

Exit codes: 0 success / test passed, 1 statistical or property test
failed, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter

from . import acceptance
from .backforth import Failure, PartialIso, STUCK, automorphism_search, build_isomorphism, try_extend
from .catalog import CatalogId, age_member, initial_state, window_structure, witness_extension
from .core import (
    FinPermutation,
    InputError,
    act,
    induced,
    parse_structure,
    qf_type,
    render_structure,
)
from .dichotomy import classify, transposition_probe
from .ire import (
    RealExpansion,
    definetti_decompose,
    dissociation_test,
    fixed_point_monitor,
    invariance_test,
    parse_sampler,
)
from .irs import (
    FiniteGroup,
    SubgroupValuedLaw,
    aut_in_sym,
    conjugate_subgroup,
    label_action,
    mg_of_h,
    normalizer,
    realize_irs,
    stabilizer,
    symmetric_group,
)
from .orbits import acl_probe, gagb_check, separating_tuple, tuple_orbits

# spec operation -> subcommand that reaches it (coverage is tested)
OPERATION_COMMANDS = {
    "core.qf_type": "qftype",
    "core.act": "act",
    "core.induced": "induced",
    "catalog.age_member": "member",
    "catalog.extend_window": "window",
    "catalog.witness_extension": "witness",
    "backforth.try_extend": "backforth",
    "backforth.build_isomorphism": "backforth",
    "backforth.automorphism_search": "aut",
    "orbits.tuple_orbits": "orbits",
    "orbits.acl_probe": "acl",
    "orbits.gagb_check": "gagb",
    "orbits.separating_tuple": "separate",
    "ire.sample": "sample",
    "ire.invariance_test": "invariance",
    "ire.dissociation_test": "dissociation",
    "ire.definetti_decompose": "definetti",
    "ire.fixed_point_monitor": "fixmonitor",
    "irs.stabilizer": "irs-stab",
    "irs.mg_of_h": "irs-mgh",
    "irs.realize_irs": "irs-realize",
    "irs.normalizer": "irs-normalizer",
    "irs.conjugate": "irs-conjugate",
    "dichotomy.classify": "dichotomy",
    "dichotomy.transposition_probe": "transposition",
    "cli.run": "acceptance",
}


def _ints(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise InputError(f"expected comma-separated integers, got {text!r}") from exc


def _read_structure(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_structure(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _catalog(args) -> CatalogId:
    forbidden = tuple(_read_structure(p) for p in (getattr(args, "forbidden", None) or []))
    return CatalogId.parse(args.catalog, forbidden=forbidden)


def _group(token: str) -> FiniteGroup:
    token = token.strip().lower()
    if token.startswith("s") and token[1:].isdigit():
        return symmetric_group(int(token[1:]))
    raise InputError(f"unknown group token {token!r} (use S<n>)")


def _subgroup(G: FiniteGroup, text: str) -> FiniteGroup:
    return FiniteGroup.from_cycles(G.degree, text)


def _sampler(args):
    cat = None
    if getattr(args, "catalog", None):
        cat = _catalog(args)
    return parse_sampler(args.sampler, args.seed, cat)


# --------------------------------------------------------------------------
# handlers: each returns (records, passed) with passed None for pure queries


def _h_qftype(args):
    M = _read_structure(args.file)
    tp = qf_type(M, _ints(args.tuple))
    return [{"arity": tp.arity, "pattern": list(tp.pattern),
             "type": tp.to_bytes().hex()}], None


def _h_act(args):
    M = _read_structure(args.file)
    g = FinPermutation.parse_cycles(M.window, args.perm)
    return [{"structure": render_structure(act(g, M))}], None


def _h_induced(args):
    M = _read_structure(args.file)
    return [{"structure": render_structure(induced(M, _ints(args.subset)))}], None


def _h_member(args):
    cat = _catalog(args)
    M = _read_structure(args.file)
    return [{"catalog": cat.token(), "member": age_member(cat, M)}], None


def _h_window(args):
    cat = _catalog(args)
    mode = "randomized" if args.randomized else "generic"
    st = initial_state(cat, seed=args.seed, mode=mode, window=args.target)
    return [{"catalog": cat.token(), "window": args.target, "mode": mode,
             "structure": render_structure(st.current)}], None


def _h_witness(args):
    cat = _catalog(args)
    mode = "randomized" if args.randomized else "generic"
    st = initial_state(cat, seed=args.seed, mode=mode, window=args.window)
    like = _read_structure(args.like)
    desired = qf_type(like, _ints(args.like_tuple))
    z = witness_extension(st, _ints(args.A), desired)
    return [{"witness": z, "found": z is not None}], None


def _h_backforth(args):
    M = _read_structure(args.left)
    N = _read_structure(args.right)
    pairs = tuple(tuple(int(v) for v in p.split(":")) for p in args.pairs.split(",")) \
        if args.pairs else ()
    if args.extend:
        x_text, side = args.extend.split(":")
        res = try_extend(PartialIso(M, N, pairs), int(x_text), side)
        if res is STUCK:
            return [{"extended": None, "stuck": True}], None
        return [{"extended": [list(p) for p in res.pairs], "stuck": False}], None
    res = build_isomorphism(M, N, start=pairs, budget=args.budget)
    if isinstance(res, Failure):
        return [{"total": False, "best_pairs": [list(p) for p in res.best.pairs]}], None
    return [{"total": True, "pairs": [list(p) for p in res.pairs]}], None


def _h_aut(args):
    M = _read_structure(args.file)
    g = automorphism_search(M, require_moved=args.move)
    return [{"automorphism": g.cycle_string() if g else None,
             "rigid": g is None}], None


def _h_orbits(args):
    cat = _catalog(args)
    M = window_structure(cat, args.window, seed=args.seed,
                         mode="randomized" if args.randomized else "generic")
    part = tuple_orbits(cat, M, args.k, _ints(args.A))
    sizes = sorted((len(members) for _, members in part.blocks), reverse=True)
    return [{"catalog": cat.token(), "window": args.window, "k": args.k,
             "A": list(_ints(args.A)), "blocks": part.num_blocks,
             "block_sizes": sizes}], None


def _h_gagb(args):
    cat = _catalog(args)
    res = gagb_check(cat, _ints(args.A), _ints(args.B), args.k, args.window)
    rec = {"catalog": cat.token(), "A": list(_ints(args.A)), "B": list(_ints(args.B)),
           "k": args.k, "window": res.window,
           "result": "Holds" if res.holds else "FailsWithCertificate"}
    if res.certificate:
        rec["certificate"] = [list(t) for t in res.certificate]
    return [rec], res.holds


def _h_acl(args):
    cat = _catalog(args)
    out = acl_probe(cat, _ints(args.A), args.max_window)
    return [{"catalog": cat.token(), "A": list(_ints(args.A)),
             "max_window": args.max_window, "acl": list(out)}], None


def _h_separate(args):
    cat = _catalog(args)
    z = separating_tuple(cat, args.x, args.y, args.budget)
    return [{"catalog": cat.token(), "x": args.x, "y": args.y,
             "tuple": list(z) if z else None, "found": z is not None}], None


def _h_sample(args):
    sampler = _sampler(args)
    type_counts: Counter = Counter()
    records = []
    for t in range(args.trials):
        s = sampler.sample(args.window, t)
        if isinstance(s, RealExpansion):
            key = qf_type(s.structure, tuple(range(args.window))).to_bytes().hex()
        else:
            key = qf_type(s, tuple(range(args.window))).to_bytes().hex()
        type_counts[key] += 1
        if args.emit_trials:
            rec = {"trial": t}
            if isinstance(s, RealExpansion):
                rec["labels"] = list(s.labels)
                rec["structure"] = render_structure(s.structure)
            else:
                rec["structure"] = render_structure(s)
            records.append(rec)
    summary = {"sampler": sampler.token(), "seed": args.seed, "window": args.window,
               "trials": args.trials,
               "type_frequencies": {k: v / args.trials
                                    for k, v in sorted(type_counts.items())}}
    records.append(summary)
    return records, None


def _h_invariance(args):
    rep = invariance_test(_sampler(args), k=args.k, trials=args.trials,
                          significance=args.significance, window=args.window)
    return [rep], rep["pass"]


def _h_dissociation(args):
    rep = dissociation_test(_sampler(args), _ints(args.A), _ints(args.B),
                            trials=args.trials, window=args.window)
    return [rep], rep["pass"]


def _h_definetti(args):
    sampler = _sampler(args)
    samples = [sampler.sample(args.window, t) for t in range(args.samples)]
    rep = definetti_decompose(samples, seed=args.seed)
    rep["sampler"] = sampler.token()
    return [rep], None


def _h_fixmonitor(args):
    rep = fixed_point_monitor(_sampler(args), args.window, args.trials)
    return [rep], rep["pass"]


def _h_dichotomy(args):
    rep = classify(_sampler(args), args.window, args.trials)
    return [rep.to_dict()], None


def _h_transposition(args):
    rep = transposition_probe(_catalog(args), args.window, args.trials,
                              seed=args.seed, budget=args.budget)
    return [rep], None


def _h_irs_stab(args):
    G = _group(args.group)
    labels = tuple(args.labels.split(","))
    if len(labels) != G.degree:
        raise InputError("one label per point required")
    H = stabilizer(G, labels, label_action)
    return [{"group": args.group, "order": H.order, "subgroup": H.key()}], None


def _h_irs_mgh(args):
    G = _group(args.group)
    H = _subgroup(G, args.H)
    M = mg_of_h(G, H, args.L)
    auts = frozenset(aut_in_sym(M))
    N = normalizer(G, H)
    rec = {"group": args.group, "H": H.key(), "aut_order": len(auts),
           "normalizer_order": N.order, "aut_equals_normalizer": auts == N.elements}
    if args.struct_out:
        with open(args.struct_out, "w", encoding="utf-8") as fh:
            fh.write(render_structure(M))
        rec["struct_out"] = args.struct_out
    return [rec], None


def _h_irs_realize(args):
    G = _group(args.group)
    H = _subgroup(G, args.H)
    if args.law == "class":
        nu = SubgroupValuedLaw.uniform_conjugacy_class(G, H)
    else:
        nu = SubgroupValuedLaw.point_mass(G, H)
    rep = realize_irs(G, nu, args.seed, args.trials)
    ok = rep["exact_match"] and rep["empirical_within_3sigma"]
    return [rep], ok


def _h_irs_normalizer(args):
    G = _group(args.group)
    H = _subgroup(G, args.H)
    N = normalizer(G, H)
    return [{"group": args.group, "H": H.key(), "order": N.order,
             "normalizer": N.key()}], None


def _h_irs_conjugate(args):
    G = _group(args.group)
    H = _subgroup(G, args.H)
    g = FinPermutation.parse_cycles(G.degree, args.g)
    K = conjugate_subgroup(G, H, g)
    return [{"group": args.group, "H": H.key(), "g": g.cycle_string(),
             "conjugate": K.key()}], None


def _h_acceptance(args):
    only = set(_ints(args.only)) if args.only else None
    reports = acceptance.run_all(only)
    ok = all(r["passed"] for r in reports)
    return reports, ok


# --------------------------------------------------------------------------
# parser


def _add_seed(p, required=True):
    p.add_argument("--seed", type=int, required=required, default=None if required else 0,
                   help="base seed (sampling subcommands require one)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="homlab",
        description="desk-scale laboratory for countable homogeneous structures",
    )
    ap.add_argument("--out", help="write JSON lines here instead of stdout")
    ap.add_argument("--threads", type=int, default=1,
                    help="reserved; the driver is sequential and output order "
                         "is deterministic regardless")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("qftype", help="canonical quantifier-free type of a tuple")
    p.add_argument("--file", required=True)
    p.add_argument("--tuple", required=True)
    p.set_defaults(handler=_h_qftype)

    p = sub.add_parser("act", help="apply a window permutation to a structure")
    p.add_argument("--file", required=True)
    p.add_argument("--perm", required=True)
    p.set_defaults(handler=_h_act)

    p = sub.add_parser("induced", help="induced substructure on a subset")
    p.add_argument("--file", required=True)
    p.add_argument("--subset", required=True)
    p.set_defaults(handler=_h_induced)

    p = sub.add_parser("member", help="age membership of a structure")
    p.add_argument("--catalog", required=True)
    p.add_argument("--file", required=True)
    p.add_argument("--forbidden", action="append")
    p.set_defaults(handler=_h_member)

    p = sub.add_parser("window", help="generate a catalog window")
    p.add_argument("--catalog", required=True)
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--randomized", action="store_true")
    p.add_argument("--forbidden", action="append")
    _add_seed(p, required=False)
    p.set_defaults(handler=_h_window)

    p = sub.add_parser("witness", help="find a one-point extension witness")
    p.add_argument("--catalog", required=True)
    p.add_argument("--window", type=int, required=True)
    p.add_argument("--A", required=True)
    p.add_argument("--like", required=True, help="structure file defining the desired type")
    p.add_argument("--like-tuple", required=True, help="tuple in the --like structure")
    p.add_argument("--randomized", action="store_true")
    p.add_argument("--forbidden", action="append")
    _add_seed(p, required=False)
    p.set_defaults(handler=_h_witness)

    p = sub.add_parser("backforth", help="back-and-forth isomorphism search")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--pairs", help="starting pairs a:b,c:d")
    p.add_argument("--extend", help="single greedy step: x:forth or x:back")
    p.add_argument("--budget", type=int)
    p.set_defaults(handler=_h_backforth)

    p = sub.add_parser("aut", help="nontrivial automorphism search")
    p.add_argument("--file", required=True)
    p.add_argument("--move", type=int)
    p.set_defaults(handler=_h_aut)

    p = sub.add_parser("orbits", help="orbit partition of k-tuples over A")
    p.add_argument("--catalog", required=True)
    p.add_argument("--window", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--A", default="")
    p.add_argument("--randomized", action="store_true")
    p.add_argument("--forbidden", action="append")
    _add_seed(p, required=False)
    p.set_defaults(handler=_h_orbits)

    p = sub.add_parser("gagb", help="join test <G_A, G_B> vs G_{A cap B}")
    p.add_argument("--catalog", required=True)
    p.add_argument("--A", required=True)
    p.add_argument("--B", required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--window", type=int, default=16)
    p.add_argument("--forbidden", action="append")
    p.set_defaults(handler=_h_gagb)

    p = sub.add_parser("acl", help="algebraic-closure probe")
    p.add_argument("--catalog", required=True)
    p.add_argument("--A", required=True)
    p.add_argument("--max-window", type=int, default=32)
    p.add_argument("--forbidden", action="append")
    p.set_defaults(handler=_h_acl)

    p = sub.add_parser("separate", help="tuple separating two points")
    p.add_argument("--catalog", required=True)
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--y", type=int, required=True)
    p.add_argument("--budget", type=int, default=64)
    p.add_argument("--forbidden", action="append")
    p.set_defaults(handler=_h_separate)

    p = sub.add_parser("sample", help="draw samples; emits type frequencies")
    p.add_argument("--sampler", required=True)
    p.add_argument("--window", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--catalog")
    p.add_argument("--emit-trials", action="store_true")
    p.add_argument("--forbidden", action="append")
    _add_seed(p)
    p.set_defaults(handler=_h_sample)

    p = sub.add_parser("invariance", help="exchangeability test")
    p.add_argument("--sampler", required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--window", type=int, default=6)
    p.add_argument("--significance", type=float, default=0.01)
    p.add_argument("--catalog")
    p.add_argument("--forbidden", action="append")
    _add_seed(p)
    p.set_defaults(handler=_h_invariance)

    p = sub.add_parser("dissociation", help="independence over disjoint sets")
    p.add_argument("--sampler", required=True)
    p.add_argument("--A", required=True)
    p.add_argument("--B", required=True)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--window", type=int)
    p.add_argument("--catalog")
    p.add_argument("--forbidden", action="append")
    _add_seed(p)
    p.set_defaults(handler=_h_dissociation)

    p = sub.add_parser("definetti", help="estimate the mixing measure")
    p.add_argument("--sampler", required=True)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--window", type=int, default=200)
    p.add_argument("--catalog")
    p.add_argument("--forbidden", action="append")
    _add_seed(p)
    p.set_defaults(handler=_h_definetti)

    p = sub.add_parser("fixmonitor", help="persistent fixed-point monitor")
    p.add_argument("--sampler", required=True)
    p.add_argument("--window", type=int, default=6)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--catalog")
    p.add_argument("--forbidden", action="append")
    _add_seed(p)
    p.set_defaults(handler=_h_fixmonitor)

    p = sub.add_parser("dichotomy", help="freeness vs transitivity scores")
    p.add_argument("--sampler", required=True)
    p.add_argument("--window", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--catalog")
    p.add_argument("--forbidden", action="append")
    _add_seed(p)
    p.set_defaults(handler=_h_dichotomy)

    p = sub.add_parser("transposition", help="separating-tuple probe over sampled pairs")
    p.add_argument("--catalog", required=True)
    p.add_argument("--window", type=int, default=16)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--budget", type=int)
    p.add_argument("--forbidden", action="append")
    _add_seed(p)
    p.set_defaults(handler=_h_transposition)

    p = sub.add_parser("irs-stab", help="stabilizer of a point labeling")
    p.add_argument("--group", required=True)
    p.add_argument("--labels", required=True)
    p.set_defaults(handler=_h_irs_stab)

    p = sub.add_parser("irs-mgh", help="orbit-equivalence expansion of a subgroup")
    p.add_argument("--group", required=True)
    p.add_argument("--H", required=True)
    p.add_argument("--L", type=int)
    p.add_argument("--struct-out")
    p.set_defaults(handler=_h_irs_mgh)

    p = sub.add_parser("irs-realize", help="realize a subgroup law as stabilizers")
    p.add_argument("--group", required=True)
    p.add_argument("--H", required=True)
    p.add_argument("--law", choices=["class", "point"], default="class")
    p.add_argument("--trials", type=int, default=100)
    _add_seed(p)
    p.set_defaults(handler=_h_irs_realize)

    p = sub.add_parser("irs-normalizer", help="normalizer of a subgroup")
    p.add_argument("--group", required=True)
    p.add_argument("--H", required=True)
    p.set_defaults(handler=_h_irs_normalizer)

    p = sub.add_parser("irs-conjugate", help="conjugate of a subgroup")
    p.add_argument("--group", required=True)
    p.add_argument("--H", required=True)
    p.add_argument("--g", required=True)
    p.set_defaults(handler=_h_irs_conjugate)

    p = sub.add_parser("acceptance", help="run the acceptance suite")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.set_defaults(handler=_h_acceptance)

    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage already; normalize other codes
        return 2 if exc.code else 0
    try:
        records, passed = args.handler(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    text = "\n".join(json.dumps(r, sort_keys=True) for r in records) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if passed is None or passed:
        return 0
    return 1


def main():  # console entry point
    sys.exit(run())


if __name__ == "__main__":
    main()
