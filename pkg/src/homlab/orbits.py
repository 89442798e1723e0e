"""Orbit partitions of pointwise stabilizers on tuples, algebraic-closure
probing, and the join test comparing <G_A, G_B> with G_{A cap B}.

For the ultrahomogeneous catalog structures, tuples lie in the same
G_A-orbit exactly when their qf-types over A agree, so the partition by
qf-type over A is the computational stand-in for the orbit partition.
Window truncation can split true orbits but never merges them; the join
test therefore retries at a doubled window before reporting a failure
certificate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .catalog import CatalogId, window_structure
from .core import FinStructure, InputError, qf_type


@dataclass(frozen=True)
class OrbitPartition:
    """Partition of window^k keyed by qf-type over the parameter tuple A."""

    window: int
    k: int
    A: tuple[int, ...]
    blocks: tuple[tuple[bytes, tuple[tuple[int, ...], ...]], ...]

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    def key_of(self, t: tuple[int, ...]) -> bytes:
        for key, members in self.blocks:
            if t in members:
                return key
        raise InputError(f"tuple {t} not in partition")

    def as_dict(self) -> dict[bytes, tuple]:
        return dict(self.blocks)


def tuple_orbits(cat: CatalogId, M: FinStructure, k: int, A: tuple[int, ...]) -> OrbitPartition:
    """Partition of all k-tuples over M's window by qf-type over A."""
    A = tuple(A)
    if M.language != cat.language:
        raise InputError("structure language does not match the catalog")
    for a in A:
        if not (0 <= a < M.window):
            raise InputError(f"parameter {a} outside window {M.window}")
    if k < 1:
        raise InputError("tuple arity must be >= 1")
    buckets: dict[bytes, list] = {}
    for t in itertools.product(range(M.window), repeat=k):
        key = qf_type(M, A + t).to_bytes()
        buckets.setdefault(key, []).append(t)
    blocks = tuple(sorted((key, tuple(sorted(ts))) for key, ts in buckets.items()))
    return OrbitPartition(M.window, k, A, blocks)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


@dataclass(frozen=True)
class GagbResult:
    holds: bool
    window: int
    certificate: tuple[tuple[int, ...], tuple[int, ...]] | None
    join_components: int
    intersection_blocks: int


def _join_vs_intersection(cat, M, k, A, B):
    part_a = tuple_orbits(cat, M, k, A)
    part_b = tuple_orbits(cat, M, k, B)
    common = tuple(sorted(set(A) & set(B)))
    part_ab = tuple_orbits(cat, M, k, common)
    tuples = sorted(itertools.product(range(M.window), repeat=k))
    index = {t: i for i, t in enumerate(tuples)}
    uf = _UnionFind(len(tuples))
    for part in (part_a, part_b):
        for _, members in part.blocks:
            first = index[members[0]]
            for t in members[1:]:
                uf.union(first, index[t])
    components = len({uf.find(i) for i in range(len(tuples))})
    certificate = None
    for _, members in part_ab.blocks:
        roots = {}
        for t in members:
            r = uf.find(index[t])
            if r not in roots:
                roots[r] = t
        if len(roots) > 1:
            pair = sorted(roots.values())[:2]
            certificate = (pair[0], pair[1])
            break
    return certificate, components, part_ab.num_blocks


def gagb_check(cat: CatalogId, A: tuple[int, ...], B: tuple[int, ...], k: int,
               window: int, mode: str = "generic", seed: int = 0,
               retries: int = 1) -> GagbResult:
    """Compare the join of the G_A- and G_B-orbit partitions (transitive
    closure of the union) with the G_{A cap B} partition on k-tuples.

    Holds when they coincide; otherwise returns a certificate pair of
    k-tuples lying in one G_{A cap B} block but different join
    components.  A failure at the given window retries once per
    ``retries`` at a doubled window, since small windows may simply lack
    the merging witnesses."""
    A, B = tuple(A), tuple(B)
    need = max([window] + [a + 1 for a in A + B])
    w = need
    for attempt in range(retries + 1):
        M = window_structure(cat, w, seed, mode)
        certificate, comps, target = _join_vs_intersection(cat, M, k, A, B)
        if certificate is None:
            return GagbResult(True, w, None, comps, target)
        if attempt < retries:
            w *= 2
    return GagbResult(False, w, certificate, comps, target)


def acl_probe(cat: CatalogId, A: tuple[int, ...], max_window: int,
              initial_window: int | None = None, seed: int = 0,
              mode: str = "generic") -> tuple[int, ...]:
    """Elements of the initial window whose qf-type-over-A block does not
    grow between the initial window and max_window: the finite proxy for
    membership in a finite orbit of the pointwise stabilizer.

    Returns A together with the bounded-block elements; equals A exactly
    for catalogs with no algebraicity."""
    A = tuple(A)
    w0 = initial_window if initial_window is not None else max(8, *(a + 2 for a in A)) if A else 8
    if max_window < w0:
        raise InputError("max_window below the initial window")
    M0 = window_structure(cat, w0, seed, mode)
    M1 = window_structure(cat, max_window, seed, mode)

    def block_sizes(M):
        sizes: dict[bytes, int] = {}
        for z in range(M.window):
            key = qf_type(M, A + (z,)).to_bytes()
            sizes[key] = sizes.get(key, 0) + 1
        return sizes

    s0 = block_sizes(M0)
    s1 = block_sizes(M1)
    bounded = set(A)
    for z in range(w0):
        key = qf_type(M0, A + (z,)).to_bytes()
        if s1.get(key, 0) <= s0[key]:
            bounded.add(z)
    return tuple(sorted(bounded))


def separating_tuple(cat: CatalogId, x: int, y: int, window_budget: int,
                     seed: int = 0, mode: str = "generic"):
    """A tuple z disjoint from {x, y} with qf_type(z, x) != qf_type(z, y),
    searched over growing windows up to window_budget; None when no
    separating tuple exists within the budget (as for the pure set, where
    all injective tuples are equivalent)."""
    if x == y:
        raise InputError("x and y must be distinct")
    w = max(x, y) + 2
    w = min(max(w, 4), max(window_budget, w))
    while True:
        M = window_structure(cat, w, seed, mode)
        others = [v for v in range(M.window) if v not in (x, y)]
        for length in (1, 2):
            for z in itertools.permutations(others, length):
                if qf_type(M, z + (x,)) != qf_type(M, z + (y,)):
                    return z
        if w >= window_budget:
            return None
        w = min(2 * w, window_budget)
