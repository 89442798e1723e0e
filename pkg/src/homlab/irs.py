"""Exact invariant-random-subgroup experiments on finite permutation
groups: stabilizers, normalizers, the orbit-equivalence expansion
M_G(H), and the per-orbit coloring construction that realizes a given
conjugation-invariant subgroup law as a stabilizer law.

Finite ambient groups stand in for closed permutation groups; every
statement here is verified by exhaustive enumeration.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import rng
from .core import FinPermutation, FinStructure, InputError, Language


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """Permutation group on {0, ..., degree-1}; elements enumerated
    eagerly from the generators.  Identity is by element set."""

    degree: int
    generators: tuple[FinPermutation, ...]
    elements: frozenset[FinPermutation]

    @classmethod
    def generated(cls, degree: int, generators) -> "FiniteGroup":
        gens = tuple(generators)
        for g in gens:
            if g.window != degree:
                raise InputError("generator degree mismatch")
        ident = FinPermutation.identity(degree)
        els = {ident}
        frontier = [ident]
        while frontier:
            new = []
            for h in frontier:
                for g in gens:
                    c = g.compose(h)
                    if c not in els:
                        els.add(c)
                        new.append(c)
            frontier = new
        return cls(degree, gens, frozenset(els))

    @classmethod
    def from_elements(cls, degree: int, elements) -> "FiniteGroup":
        els = frozenset(elements)
        return cls(degree, tuple(sorted(els, key=lambda p: p.images)), els)

    @classmethod
    def from_cycles(cls, degree: int, text: str) -> "FiniteGroup":
        """Group generated by comma-separated cycle words."""
        gens = [FinPermutation.parse_cycles(degree, part)
                for part in text.split(",") if part.strip()]
        return cls.generated(degree, gens)

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, g: FinPermutation) -> bool:
        return g in self.elements

    def is_subgroup_of(self, other: "FiniteGroup") -> bool:
        return self.degree == other.degree and self.elements <= other.elements

    def sorted_elements(self) -> list[FinPermutation]:
        return sorted(self.elements, key=lambda p: p.images)

    def key(self) -> str:
        words = sorted(p.cycle_string() for p in self.elements if not p.is_identity())
        return ";".join(words) if words else "e"

    def __eq__(self, other):
        return (isinstance(other, FiniteGroup)
                and self.degree == other.degree
                and self.elements == other.elements)

    def __hash__(self):
        return hash((self.degree, self.elements))


def symmetric_group(n: int) -> FiniteGroup:
    if n <= 1:
        return FiniteGroup.generated(n, ())
    gens = [FinPermutation.from_cycles(n, [[0, 1]]),
            FinPermutation.from_cycles(n, [list(range(n))])]
    return FiniteGroup.generated(n, gens)


def trivial_group(n: int) -> FiniteGroup:
    return FiniteGroup.generated(n, ())


def all_subgroups(G: FiniteGroup) -> list[FiniteGroup]:
    """Every subgroup, by closing one added generator at a time; one
    representative per right coset keeps the extension step small."""
    start = trivial_group(G.degree)
    seen: dict[frozenset, FiniteGroup] = {start.elements: start}
    frontier = [start]
    order = G.sorted_elements()
    while frontier:
        nxt = []
        for H in frontier:
            done = set()
            for g in order:
                if g in H.elements:
                    continue
                coset = frozenset(h.compose(g) for h in H.elements)
                if coset in done:
                    continue
                done.add(coset)
                K = FiniteGroup.generated(G.degree, H.generators + (g,))
                if K.elements not in seen:
                    seen[K.elements] = K
                    nxt.append(K)
        frontier = nxt
    return sorted(seen.values(), key=lambda S: (S.order, S.key()))


def conjugate_subgroup(G: FiniteGroup, H: FiniteGroup, g: FinPermutation) -> FiniteGroup:
    if g not in G:
        raise InputError("conjugator must lie in the ambient group")
    if not H.is_subgroup_of(G):
        raise InputError("H must be a subgroup of G")
    ginv = g.inverse()
    return FiniteGroup.from_elements(G.degree,
                                     (g.compose(h).compose(ginv) for h in H.elements))


def normalizer(G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
    """N_G(H), exactly, by filtering elements of G."""
    if not H.is_subgroup_of(G):
        raise InputError("H must be a subgroup of G")
    els = []
    hset = H.elements
    for g in G.sorted_elements():
        ginv = g.inverse()
        if all(g.compose(h).compose(ginv) in hset for h in H.generators) and \
           all(ginv.compose(h).compose(g) in hset for h in H.generators):
            els.append(g)
    return FiniteGroup.from_elements(G.degree, els)


def stabilizer(G: FiniteGroup, point, action) -> FiniteGroup:
    """Exact stabilizer of a labeled object under the supplied action
    evaluator action(g, point) -> moved point."""
    els = [g for g in G.sorted_elements() if action(g, point) == point]
    return FiniteGroup.from_elements(G.degree, els)


def label_action(g: FinPermutation, labels: tuple) -> tuple:
    """Logic action on per-point labels: position g(i) receives label i."""
    out = [None] * len(labels)
    for i, v in enumerate(labels):
        out[g.apply(i)] = v
    return tuple(out)


def fix_points(H: FiniteGroup) -> tuple[int, ...]:
    return tuple(x for x in range(H.degree)
                 if all(g.apply(x) == x for g in H.generators))


def transitive_on_fix(G: FiniteGroup, H: FiniteGroup) -> bool:
    """Whether N_G(H) acts transitively on Fix(H)."""
    fixed = fix_points(H)
    if len(fixed) <= 1:
        return True
    N = normalizer(G, H)
    orbit = {fixed[0]}
    frontier = [fixed[0]]
    while frontier:
        x = frontier.pop()
        for g in N.generators:
            y = g.apply(x)
            if y not in orbit:
                orbit.add(y)
                frontier.append(y)
    return set(fixed) <= orbit


# ---------------------------------------------------------------------------
# tuples of length <= degree, their orbits, and the expansion M_G(H)


def _all_tuples_up_to(degree: int, max_len: int) -> list[tuple[int, ...]]:
    out = []
    for n in range(1, max_len + 1):
        out.extend(itertools.product(range(degree), repeat=n))
    return out


def _orbit_reps(group_elements, tuples) -> dict[tuple, tuple]:
    """Map each tuple to the least member of its orbit."""
    reps: dict[tuple, tuple] = {}
    for t in tuples:
        if t in reps:
            continue
        orbit = {g.apply_tuple(t) for g in group_elements}
        rep = min(orbit)
        for u in orbit:
            reps[u] = rep
    return reps


def mg_of_h(G: FiniteGroup, H: FiniteGroup, max_tuple_len: int | None = None) -> FinStructure:
    """The expansion of the canonical structure of G encoding H-orbit
    equivalence: one 2n-ary relation per tuple length n relating tuples
    in the same H-orbit, on top of the canonical relations (one n-ary
    relation per G-orbit of n-tuples), truncated to n <= max_tuple_len.
    """
    if not H.is_subgroup_of(G):
        raise InputError("H must be a subgroup of G")
    L = max_tuple_len if max_tuple_len is not None else G.degree
    if L < G.degree:
        raise InputError("max_tuple_len must be at least the degree")
    d = G.degree
    canon_syms: list[tuple[str, int]] = []
    canon_rels: dict[str, set] = {}
    for n in range(1, L + 1):
        tuples = list(itertools.product(range(d), repeat=n))
        reps = _orbit_reps(G.elements, tuples)
        orbits: dict[tuple, set] = {}
        for t, r in reps.items():
            orbits.setdefault(r, set()).add(t)
        for idx, rep in enumerate(sorted(orbits)):
            name = f"orb{n}_{idx}"
            canon_syms.append((name, n))
            canon_rels[name] = orbits[rep]
    canonical = Language("canonical", tuple(canon_syms))
    dyn_syms = list(canon_syms)
    dyn_rels = dict(canon_rels)
    for n in range(1, L + 1):
        name = f"oe{n}"
        dyn_syms.append((name, 2 * n))
        held = set()
        tuples = list(itertools.product(range(d), repeat=n))
        reps = _orbit_reps(H.elements, tuples)
        orbits: dict[tuple, list] = {}
        for t, r in reps.items():
            orbits.setdefault(r, []).append(t)
        for members in orbits.values():
            for t1 in members:
                for t2 in members:
                    held.add(t1 + t2)
        dyn_rels[name] = held
    dyn = Language("dynamical", tuple(dyn_syms), base=canonical)
    return FinStructure.make(dyn, d, dyn_rels)


def aut_in_sym(M: FinStructure) -> list[FinPermutation]:
    """All permutations of the window fixing M under the logic action,
    by exhaustive enumeration (meant for windows <= 6)."""
    out = []
    for images in itertools.permutations(range(M.window)):
        g = FinPermutation(images)
        ok = True
        for rel in M.relations:
            for t in rel:
                if g.apply_tuple(t) not in rel:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(g)
    return out


# ---------------------------------------------------------------------------
# subgroup-valued laws and the coloring realization


@dataclass(frozen=True)
class SubgroupValuedLaw:
    """Finitely supported probability law on subgroups of the ambient
    group."""

    ambient: FiniteGroup
    entries: tuple[tuple[FiniteGroup, float], ...]

    def __post_init__(self):
        if not self.entries:
            raise InputError("empty law")
        total = 0.0
        seen = set()
        for H, p in self.entries:
            if not H.is_subgroup_of(self.ambient):
                raise InputError("support subgroup outside the ambient group")
            if p < 0:
                raise InputError("negative probability")
            if H.elements in seen:
                raise InputError("duplicate support subgroup")
            seen.add(H.elements)
            total += p
        if abs(total - 1.0) > 1e-9:
            raise InputError("probabilities must sum to 1")

    @classmethod
    def point_mass(cls, G: FiniteGroup, H: FiniteGroup) -> "SubgroupValuedLaw":
        return cls(G, ((H, 1.0),))

    @classmethod
    def uniform_conjugacy_class(cls, G: FiniteGroup, H: FiniteGroup) -> "SubgroupValuedLaw":
        cls_set = {conjugate_subgroup(G, H, g) for g in G.elements}
        members = sorted(cls_set, key=lambda S: S.key())
        p = 1.0 / len(members)
        return cls(G, tuple((S, p) for S in members))

    def prob_of(self, H: FiniteGroup) -> float:
        for S, p in self.entries:
            if S == H:
                return p
        return 0.0

    def invariance_witness(self):
        """None when conjugation-invariant; else a violating (g, H)."""
        for H, p in self.entries:
            for g in self.ambient.generators:
                K = conjugate_subgroup(self.ambient, H, g)
                if abs(self.prob_of(K) - p) > 1e-9:
                    return g, H
        return None

    def draw(self, *key) -> FiniteGroup:
        u = rng.uniform(*key)
        acc = 0.0
        for i, (H, p) in enumerate(self.entries):
            acc += p
            if u < acc or i == len(self.entries) - 1:
                return H
        raise AssertionError  # pragma: no cover


class _ColoringSetup:
    """Per-(G, H) precomputation for the coloring stabilizer: orbit
    representatives of all tuples of length <= L and, for each group
    element, the representative of the image tuple."""

    def __init__(self, G: FiniteGroup, H: FiniteGroup, max_tuple_len: int | None):
        if not H.is_subgroup_of(G):
            raise InputError("H must be a subgroup of G")
        L = max_tuple_len if max_tuple_len is not None else G.degree
        if L < G.degree:
            raise InputError("max_tuple_len must be at least the degree")
        tuples = _all_tuples_up_to(G.degree, L)
        reps = _orbit_reps(H.elements, tuples)
        rep_ids: dict[tuple, int] = {}
        for t in tuples:
            r = reps[t]
            if r not in rep_ids:
                rep_ids[r] = len(rep_ids)
        self.G = G
        self.H = H
        self.rep_list = [r for r, _ in sorted(rep_ids.items(), key=lambda kv: kv[1])]
        self.elements = G.sorted_elements()
        hset = H.elements
        self.normal_ok = []
        for g in self.elements:
            ginv = g.inverse()
            self.normal_ok.append(
                all(g.compose(h).compose(ginv) in hset for h in H.generators)
                and all(ginv.compose(h).compose(g) in hset for h in H.generators)
            )
        self.rep_of = np.array([rep_ids[reps[t]] for t in tuples], dtype=np.int32)
        self.gmap = np.array(
            [[rep_ids[reps[g.apply_tuple(t)]] for t in tuples] for g in self.elements],
            dtype=np.int32,
        )

    def stabilizer_elements(self, seed: int, trial) -> frozenset:
        colors = np.array(
            [rng.uniform(seed, "irscolor", trial, r) for r in self.rep_list]
        )
        base = colors[self.rep_of]
        out = []
        for gi, g in enumerate(self.elements):
            if self.normal_ok[gi] and np.array_equal(colors[self.gmap[gi]], base):
                out.append(g)
        return frozenset(out)


def coloring_stabilizer_trials(G: FiniteGroup, H: FiniteGroup, seed: int,
                               trials: int, max_tuple_len: int | None = None) -> dict:
    """Core of the realization: color each H-orbit of tuples of length up
    to the degree with an i.i.d. uniform real and compute the exact
    stabilizer in G of the pair (H, coloring).  The stabilizer should
    equal H in every trial."""
    setup = _ColoringSetup(G, H, max_tuple_len)
    exact = sum(
        1 for trial in range(trials)
        if setup.stabilizer_elements(seed, trial) == H.elements
    )
    return {
        "group_order": G.order,
        "subgroup": H.key(),
        "trials": trials,
        "exact_matches": exact,
        "all_exact": exact == trials,
    }


def realize_irs(G: FiniteGroup, nu: SubgroupValuedLaw, seed: int, trials: int,
                max_tuple_len: int | None = None) -> dict:
    """Draw H ~ nu, color its tuple orbits i.i.d., take the exact
    stabilizer of the colored point; report the empirical stabilizer law
    against nu (multinomial 3-sigma bands) and whether every trial gave
    back its sampled subgroup."""
    witness = nu.invariance_witness()
    if witness is not None:
        g, H = witness
        raise InputError(
            f"law is not conjugation-invariant: conjugating {H.key()} by "
            f"{g.cycle_string()} changes its probability"
        )
    setups: dict[frozenset, _ColoringSetup] = {}
    counts: dict[str, int] = {}
    exact_counts: dict[str, int] = {}
    all_exact = True
    for trial in range(trials):
        H = nu.draw(seed, "irspick", trial)
        if H.elements not in setups:
            setups[H.elements] = _ColoringSetup(G, H, max_tuple_len)
        stab = setups[H.elements].stabilizer_elements(seed, trial)
        counts[H.key()] = counts.get(H.key(), 0) + 1
        if stab == H.elements:
            exact_counts[H.key()] = exact_counts.get(H.key(), 0) + 1
        else:
            all_exact = False
    within = True
    bands = {}
    for H, p in nu.entries:
        c = counts.get(H.key(), 0)
        mean = trials * p
        sigma = (trials * p * (1 - p)) ** 0.5
        ok = abs(c - mean) <= 3 * sigma + 1e-9
        bands[H.key()] = {"count": c, "expected": mean, "sigma": sigma, "ok": ok}
        within = within and ok
    per_subgroup = {
        key: {"trials": counts.get(key, 0), "exact_matches": exact_counts.get(key, 0)}
        for key in counts
    }
    return {
        "test": "realize_irs",
        "trials": trials,
        "exact_match": all_exact,
        "empirical_within_3sigma": within,
        "per_subgroup": per_subgroup,
        "bands": bands,
    }
