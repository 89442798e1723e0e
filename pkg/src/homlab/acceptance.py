"""Acceptance suite: ten gate checks, each a pure function returning a
report dict with a boolean ``passed``.  Seeds and tolerances are fixed
here; the CLI ``acceptance`` subcommand and the test suite both run
these functions.

 1  uniform-linear-order cylinder law (each order within 0.01 of 1/6)
 2  Erdos-Renyi edge density (within 0.005 of 0.3) + invariance test
 3  two-graph parity: every 4-subset carries an even hyperedge count
 4  join test holds on random instances for five catalogs; matched
    control shows algebraicity
 5  back-and-forth agrees with brute-force bijection enumeration
 6  de Finetti recovery of a two-atom mixture
 7  dichotomy: diffuse shift free, atomic shift transitive, mixture
    sampler neither
 8  coloring realization: stabilizer equals the sampled subgroup, law
    matches within 3 sigma
 9  Aut(M_G(H)) = N_G(H) and injectivity over S4; normalizer transitive
    on fixed points over S5
10  separating-tuple probe: rate 1.0 for rado and dlo, 0.0 for pure set
"""

from __future__ import annotations

import itertools
import math
import time
from collections import Counter

from . import rng
from .backforth import Failure, build_isomorphism
from .catalog import CatalogId, window_structure
from .core import FinPermutation, FinStructure, act, qf_type
from .dichotomy import classify, transposition_probe
from .ire import (
    BaseLaw,
    BernoulliShift,
    ErdosRenyi,
    MixedIid,
    SinftyMixture,
    TwoGraphGraphing,
    UniformLinearOrder,
    definetti_decompose,
    invariance_test,
)
from .irs import (
    FiniteGroup,
    SubgroupValuedLaw,
    all_subgroups,
    aut_in_sym,
    coloring_stabilizer_trials,
    fix_points,
    mg_of_h,
    normalizer,
    realize_irs,
    symmetric_group,
    transitive_on_fix,
)
from .orbits import acl_probe, gagb_check

SEED = 20250810


def criterion_1() -> dict:
    """Uniform order cylinder law at window 3: 6 frequencies within 0.01
    of 1/6 over 1e5 trials, in under 10 seconds."""
    trials = 100_000
    started = time.monotonic()
    sampler = UniformLinearOrder(seed=SEED + 1)
    counts: Counter = Counter()
    for t in range(trials):
        lt = sampler.sample(3, t).rel("lt")
        order = tuple(sorted(range(3), key=lambda v: sum((w, v) in lt for w in range(3))))
        counts[order] += 1
    elapsed = time.monotonic() - started
    freqs = {"".join(map(str, k)): v / trials for k, v in sorted(counts.items())}
    worst = max(abs(f - 1 / 6) for f in freqs.values())
    passed = len(freqs) == 6 and worst <= 0.01 and elapsed < 10.0
    return {"criterion": 1, "passed": bool(passed), "frequencies": freqs,
            "worst_deviation": worst, "elapsed_s": elapsed, "trials": trials}


def criterion_2() -> dict:
    """Erdos-Renyi p=0.3: edge density within 0.005 over 1e5 pairs, and
    the invariance test passes at significance 0.01."""
    sampler = ErdosRenyi(0.3, seed=SEED + 2)
    window = 10
    pairs_per = window * (window - 1) // 2
    trials = (100_000 + pairs_per - 1) // pairs_per
    edges = 0
    for t in range(trials):
        edges += len(sampler.sample(window, t).rel("edge")) // 2
    total_pairs = trials * pairs_per
    density = edges / total_pairs
    inv = invariance_test(sampler, k=2, trials=10_000, significance=0.01, window=6)
    passed = abs(density - 0.3) <= 0.005 and inv["pass"]
    return {"criterion": 2, "passed": bool(passed), "density": density,
            "pairs": total_pairs, "invariance_pass": inv["pass"],
            "invariance_min_pvalue": inv["min_pvalue"]}


def criterion_3() -> dict:
    """Two-graph parity: every 4-subset of 1000 window-8 samples carries
    an even number of hyperedges."""
    sampler = TwoGraphGraphing(seed=SEED + 3)
    violations = 0
    for t in range(1000):
        s = sampler.sample(8, t)
        hed = {tt for tt in s.rel("hedge") if tt[0] < tt[1] < tt[2]}
        for quad in itertools.combinations(range(8), 4):
            cnt = sum(1 for tri in itertools.combinations(quad, 3) if tri in hed)
            if cnt % 2:
                violations += 1
    return {"criterion": 3, "passed": violations == 0, "violations": violations,
            "samples": 1000, "window": 8}


def criterion_4() -> dict:
    """Join test: holds on 50 random (A, B, k) instances for each of
    dlo, rado, tournament, cyclic, poset at window 16 (one doubling
    retry allowed); the matched control shows algebraicity.  Under 60s."""
    started = time.monotonic()
    catalogs = ["dlo", "rado", "tournament", "cyclic", "poset"]
    failures = []
    for ci, token in enumerate(catalogs):
        cat = CatalogId.parse(token)
        for inst in range(50):
            key = (SEED + 4, "gagb", ci, inst)
            size_a = 1 + rng.choice_index(3, *key, "sa")
            size_b = 1 + rng.choice_index(3, *key, "sb")
            pool = list(range(10))
            A = []
            for i in range(size_a):
                A.append(pool.pop(rng.choice_index(len(pool), *key, "a", i)))
            pool = list(range(10))
            B = []
            for i in range(size_b):
                B.append(pool.pop(rng.choice_index(len(pool), *key, "b", i)))
            k = 1 + rng.choice_index(2, *key, "k")
            res = gagb_check(cat, tuple(sorted(A)), tuple(sorted(B)), k, 16)
            if not res.holds:
                failures.append({"catalog": token, "A": sorted(A), "B": sorted(B),
                                 "k": k, "certificate": res.certificate})
    control = acl_probe(CatalogId("matched"), (0,), 32)
    elapsed = time.monotonic() - started
    passed = not failures and set(control) != {0} and elapsed < 60.0
    return {"criterion": 4, "passed": bool(passed), "failures": failures,
            "matched_acl": list(control), "elapsed_s": elapsed,
            "instances": 50 * len(catalogs)}


def _random_structure(key, n: int) -> FinStructure:
    from .catalog import LANG_GRAPH
    edges = set()
    for i in range(n):
        for j in range(n):
            if i != j and rng.bernoulli(0.4, *key, "e", i, j):
                edges.add((i, j))
    return FinStructure.make(LANG_GRAPH, n, {"edge": edges})


def _brute_isomorphic(M: FinStructure, N: FinStructure) -> bool:
    if M.window != N.window:
        return False
    for images in itertools.permutations(range(M.window)):
        g = FinPermutation(images)
        if act(g, M) == N:
            return True
    return False


def criterion_5() -> dict:
    """Back-and-forth completeness versus brute force on a 200-instance
    corpus of structure pairs with windows <= 6."""
    disagreements = 0
    for inst in range(200):
        key = (SEED + 5, "corpus", inst)
        n = 3 + rng.choice_index(4, *key, "n")
        M = _random_structure((*key, "m"), n)
        style = rng.choice_index(3, *key, "style")
        if style == 0:
            g = FinPermutation(rng.uniform_permutation(n, *key, "perm"))
            N = act(g, M)
        elif style == 1:
            N = _random_structure((*key, "other"), n)
        else:
            m = 3 + rng.choice_index(4, *key, "n2")
            N = _random_structure((*key, "other"), m)
        expected = _brute_isomorphic(M, N)
        got = not isinstance(build_isomorphism(M, N), Failure)
        if expected != got:
            disagreements += 1
    return {"criterion": 5, "passed": disagreements == 0,
            "disagreements": disagreements, "instances": 200}


def criterion_6() -> dict:
    """De Finetti recovery of 0.5*Ber(0.2) + 0.5*Ber(0.8): two atoms
    within 0.03, weights within 0.07 of one half."""
    sampler = MixedIid(((0.5, "bern", 0.2), (0.5, "bern", 0.8)), "vertex", seed=SEED + 6)
    samples = [sampler.sample(400, t) for t in range(200)]
    rep = definetti_decompose(samples, seed=SEED + 6)
    atoms = sorted(rep["atoms"])
    weights = rep["weights"]
    passed = (
        rep["k"] == 2
        and abs(atoms[0] - 0.2) <= 0.03
        and abs(atoms[1] - 0.8) <= 0.03
        and all(abs(w - 0.5) <= 0.07 for w in weights)
    )
    return {"criterion": 6, "passed": bool(passed), "k": rep["k"],
            "atoms": atoms, "weights": weights}


def criterion_7() -> dict:
    """Dichotomy at window 200 with 200 trials: diffuse shift has
    freeness exactly 1.0 (FreeEvidence), the atomic shift is
    TransitiveEvidence with at least 95% of pairs above the coupling
    bound, and the mixture sampler lands on Neither."""
    diffuse = classify(BernoulliShift(BaseLaw("uniform"), seed=SEED + 71,
                                      base_catalog=CatalogId("rado")), 200, 200)
    atomic = classify(BernoulliShift(BaseLaw("atoms", (0.5, 0.5)), seed=SEED + 72), 200, 200)
    neither = classify(SinftyMixture(0.5, 0.5, seed=SEED + 73), 200, 200)
    passed = (
        diffuse.freeness_score == 1.0
        and diffuse.verdict == "FreeEvidence"
        and atomic.verdict == "TransitiveEvidence"
        and atomic.pair_pass_fraction >= 0.95
        and neither.verdict == "Neither"
    )
    return {"criterion": 7, "passed": bool(passed),
            "diffuse": {"verdict": diffuse.verdict, "freeness": diffuse.freeness_score},
            "atomic": {"verdict": atomic.verdict,
                       "pair_pass_fraction": atomic.pair_pass_fraction,
                       "threshold": atomic.pair_threshold},
            "neither": {"verdict": neither.verdict,
                        "freeness": neither.freeness_score,
                        "matching": neither.matching_score}}


def criterion_8() -> dict:
    """Coloring realization over S4: for each of the 30 subgroups the
    stabilizer of the colored point equals the subgroup in 100/100
    trials; the empirical stabilizer law of every uniform
    conjugacy-class law matches within multinomial 3 sigma."""
    G = symmetric_group(4)
    subs = all_subgroups(G)
    bad_claim = []
    for H in subs:
        rep = coloring_stabilizer_trials(G, H, SEED + 8, 100)
        if not rep["all_exact"]:
            bad_claim.append(H.key())
    classes: dict[frozenset, FiniteGroup] = {}
    for H in subs:
        cls = frozenset(
            frozenset(g.compose(h).compose(g.inverse()) for h in H.elements)
            for g in G.elements
        )
        classes.setdefault(cls, H)
    bad_law = []
    for H in classes.values():
        nu = SubgroupValuedLaw.uniform_conjugacy_class(G, H)
        rep = realize_irs(G, nu, SEED + 80, 400)
        if not (rep["exact_match"] and rep["empirical_within_3sigma"]):
            bad_law.append(H.key())
    passed = len(subs) == 30 and not bad_claim and not bad_law
    return {"criterion": 8, "passed": bool(passed), "subgroups": len(subs),
            "claim_failures": bad_claim, "law_failures": bad_law,
            "conjugacy_classes": len(classes)}


def criterion_9() -> dict:
    """M_G(H): automorphisms equal the normalizer and the map is
    injective for every H <= S4; the normalizer acts transitively on the
    fixed points of every H <= S5."""
    G4 = symmetric_group(4)
    subs4 = all_subgroups(G4)
    aut_failures = []
    images = []
    for H in subs4:
        M = mg_of_h(G4, H)
        images.append(M)
        if frozenset(aut_in_sym(M)) != normalizer(G4, H).elements:
            aut_failures.append(H.key())
    distinct = len(set(images)) == len(images)
    G5 = symmetric_group(5)
    subs5 = all_subgroups(G5)
    fix_failures = [H.key() for H in subs5 if not transitive_on_fix(G5, H)]
    passed = not aut_failures and distinct and not fix_failures
    return {"criterion": 9, "passed": bool(passed),
            "aut_failures": aut_failures, "injective": distinct,
            "s4_subgroups": len(subs4), "s5_subgroups": len(subs5),
            "fix_transitivity_failures": fix_failures}


def criterion_10() -> dict:
    """Separating-tuple probe: success rate 1.0 for rado and dlo over
    100 pairs, 0.0 for the pure set."""
    rado = transposition_probe(CatalogId("rado"), 16, 100, seed=SEED + 10)
    dlo = transposition_probe(CatalogId("dlo"), 16, 100, seed=SEED + 10)
    pure = transposition_probe(CatalogId("pureset"), 16, 100, seed=SEED + 10, budget=24)
    passed = (rado["success_rate"] == 1.0 and dlo["success_rate"] == 1.0
              and pure["success_rate"] == 0.0)
    return {"criterion": 10, "passed": bool(passed),
            "rado_rate": rado["success_rate"], "dlo_rate": dlo["success_rate"],
            "pureset_rate": pure["success_rate"]}


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
}


def run_all(only=None) -> list[dict]:
    selected = sorted(only) if only else sorted(CRITERIA)
    return [CRITERIA[i]() for i in selected]
