"""Back-and-forth machinery: one-point extensions of partial
isomorphisms, window isomorphism search, and automorphism search.

Greedy single steps pick the least valid partner.  Full searches
backtrack over partner choices with memoized dead states, since finite
windows lack the extension property and greedy alone is incomplete.
Results are deterministic: the solution found first under least-first
order is the canonical one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .core import FinPermutation, FinStructure, InputError, qf_type


class Stuck:
    """Returned by try_extend when no valid partner exists."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Stuck"


STUCK = Stuck()


@dataclass(frozen=True)
class PartialIso:
    """A finite relation-preserving partial injection between two
    structures over the same language."""

    source: FinStructure
    target: FinStructure
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.source.language != self.target.language:
            raise InputError("partial isomorphism needs a common language")
        xs = [a for a, _ in self.pairs]
        ys = [b for _, b in self.pairs]
        if len(set(xs)) != len(xs) or len(set(ys)) != len(ys):
            raise InputError("pairs must form an injection")
        for a, b in self.pairs:
            if not (0 <= a < self.source.window and 0 <= b < self.target.window):
                raise InputError("pair outside windows")

    @property
    def forward(self) -> dict[int, int]:
        return dict(self.pairs)

    @property
    def backward(self) -> dict[int, int]:
        return {b: a for a, b in self.pairs}

    def __len__(self):
        return len(self.pairs)

    def is_total(self) -> bool:
        return (len(self.pairs) == self.source.window
                and len(self.pairs) == self.target.window)

    def as_permutation(self) -> FinPermutation:
        if not self.is_total() or self.source.window != self.target.window:
            raise InputError("not a total bijection")
        images = [0] * self.source.window
        for a, b in self.pairs:
            images[a] = b
        return FinPermutation(tuple(images))


@dataclass(frozen=True)
class Failure:
    """Unsuccessful search outcome carrying the best partial map found."""

    best: PartialIso
    exhausted: bool = True


def verify_partial_iso(p: PartialIso) -> bool:
    """Independent soundness check: the matched tuples satisfy exactly the
    same atoms on both sides (the qf-types of the matched tuples agree)."""
    xs = tuple(a for a, _ in p.pairs)
    ys = tuple(b for _, b in p.pairs)
    return qf_type(p.source, xs) == qf_type(p.target, ys)


def _compatible(source, target, fwd, x, y):
    """Can x -> y be added?  Checks every atom on matched points plus the
    new pair, in both directions."""
    pts_s = list(fwd) + [x]
    mapped = dict(fwd)
    mapped[x] = y
    for (sym, arity), rel_s, rel_t in zip(source.language.symbols,
                                          source.relations, target.relations):
        for t in itertools.product(pts_s, repeat=arity):
            if x not in t:
                continue
            if (t in rel_s) != (tuple(mapped[v] for v in t) in rel_t):
                return False
    return True


def try_extend(p: PartialIso, x: int, side: str) -> "PartialIso | Stuck":
    """Extend by one pair using the least valid partner; greedy, no
    backtracking.  side='forth' matches source point x, side='back'
    matches target point x."""
    if side not in ("forth", "back"):
        raise InputError(f"side must be 'forth' or 'back', got {side!r}")
    fwd = p.forward
    bwd = p.backward
    if side == "forth":
        if not (0 <= x < p.source.window) or x in fwd:
            raise InputError(f"source point {x} unavailable")
        for y in range(p.target.window):
            if y in bwd:
                continue
            if _compatible(p.source, p.target, fwd, x, y):
                return PartialIso(p.source, p.target, p.pairs + ((x, y),))
        return STUCK
    if not (0 <= x < p.target.window) or x in bwd:
        raise InputError(f"target point {x} unavailable")
    for y in range(p.source.window):
        if y in fwd:
            continue
        if _compatible(p.target, p.source, bwd, x, y):
            return PartialIso(p.source, p.target, p.pairs + ((y, x),))
    return STUCK


def _least_missing(matched, limit):
    for v in range(limit):
        if v not in matched:
            return v
    return None


def build_isomorphism(M: FinStructure, N: FinStructure,
                      start: tuple[tuple[int, int], ...] = (),
                      budget: int | None = None,
                      max_nodes: int | None = None):
    """Alternating back-and-forth with backtracking: forth on the least
    unmatched source point, back on the least unmatched target point.

    Returns a total PartialIso when both windows are exhausted within the
    round budget, else a Failure carrying the maximal partial map reached.
    ``max_nodes`` caps the number of explored search states (None means
    exhaustive).
    """
    if M.language != N.language:
        raise InputError("structures must share a language")
    base = PartialIso(M, N, tuple(start))
    if not verify_partial_iso(base):
        raise InputError("starting pairs are not a partial isomorphism")
    max_steps = None if budget is None else 2 * budget
    dead: set[frozenset] = set()
    best: list[tuple[tuple[int, int], ...]] = [base.pairs]
    nodes = [0]

    def rec(pairs, fwd, bwd, step):
        if len(pairs) > len(best[0]):
            best[0] = pairs
        x = _least_missing(fwd, M.window)
        y = _least_missing(bwd, N.window)
        if x is None and y is None:
            return pairs
        if max_steps is not None and step >= max_steps:
            return None
        if max_nodes is not None and nodes[0] >= max_nodes:
            return None
        nodes[0] += 1
        key = frozenset(pairs)
        if key in dead:
            return None
        forth = (step % 2 == 0 and x is not None) or y is None
        if forth:
            for w in range(N.window):
                if w in bwd:
                    continue
                if _compatible(M, N, fwd, x, w):
                    res = rec(pairs + ((x, w),), {**fwd, x: w}, {**bwd, w: x}, step + 1)
                    if res is not None:
                        return res
        else:
            for w in range(M.window):
                if w in fwd:
                    continue
                if _compatible(N, M, bwd, y, w):
                    res = rec(pairs + ((w, y),), {**fwd, w: y}, {**bwd, y: w}, step + 1)
                    if res is not None:
                        return res
        dead.add(key)
        return None

    found = rec(base.pairs, base.forward, base.backward, 0)
    if found is not None:
        return PartialIso(M, N, found)
    return Failure(PartialIso(M, N, best[0]))


def extend_to_cover(M: FinStructure, start: tuple[tuple[int, int], ...],
                    cover, max_nodes: int | None = None):
    """Extend a partial isomorphism of M with itself until its domain and
    range both contain ``cover``, searching witnesses anywhere in the
    window.  The finite shadow of extending to an automorphism of the
    limit.  Returns the extension or None."""
    cover = sorted(set(cover))
    base = PartialIso(M, M, tuple(start))
    if not verify_partial_iso(base):
        raise InputError("starting pairs are not a partial isomorphism")
    dead: set[frozenset] = set()
    nodes = [0]

    def missing(matched):
        for v in cover:
            if v not in matched:
                return v
        return None

    def rec(pairs, fwd, bwd, step):
        x = missing(fwd)
        y = missing(bwd)
        if x is None and y is None:
            return pairs
        if max_nodes is not None and nodes[0] >= max_nodes:
            return None
        nodes[0] += 1
        key = frozenset(pairs)
        if key in dead:
            return None
        forth = (step % 2 == 0 and x is not None) or y is None
        if forth:
            for w in range(M.window):
                if w in bwd:
                    continue
                if _compatible(M, M, fwd, x, w):
                    res = rec(pairs + ((x, w),), {**fwd, x: w}, {**bwd, w: x}, step + 1)
                    if res is not None:
                        return res
        else:
            for w in range(M.window):
                if w in fwd:
                    continue
                if _compatible(M, M, bwd, y, w):
                    res = rec(pairs + ((w, y),), {**fwd, w: y}, {**bwd, y: w}, step + 1)
                    if res is not None:
                        return res
        dead.add(key)
        return None

    found = rec(base.pairs, base.forward, base.backward, 0)
    return PartialIso(M, M, found) if found is not None else None


# ---------------------------------------------------------------------------
# automorphism search


def refine_colors(M: FinStructure, point_colors=None) -> list[int]:
    """Iterated color refinement; the resulting coloring is invariant
    under every (color-preserving) automorphism, so equal colors are a
    sound candidate filter."""
    n = M.window
    init = []
    for v in range(n):
        extra = point_colors[v] if point_colors is not None else None
        init.append((extra, qf_type(M, (v,)).to_bytes()))
    ranks = {sig: i for i, sig in enumerate(sorted(set(init)))}
    colors = [ranks[sig] for sig in init]
    incident: list[list[tuple[int, int, tuple[int, ...]]]] = [[] for _ in range(n)]
    for si, rel in enumerate(M.relations):
        for t in rel:
            for i, w in enumerate(t):
                incident[w].append((si, i, t))
    for _ in range(n):
        sigs = []
        for v in range(n):
            local = [(si, i, tuple(colors[u] for u in t)) for si, i, t in incident[v]]
            local.sort()
            sigs.append((colors[v], tuple(local)))
        ranks = {sig: i for i, sig in enumerate(sorted(set(sigs)))}
        new = [ranks[sig] for sig in sigs]
        if new == colors:
            break
        colors = new
    return colors


def _incidence(M: FinStructure):
    inc: dict[int, list] = {v: [] for v in range(M.window)}
    for si, rel in enumerate(M.relations):
        for t in rel:
            for v in set(t):
                inc[v].append((si, t))
    return inc


def automorphism_search(M: FinStructure, require_moved: int | None = None,
                        point_colors=None) -> FinPermutation | None:
    """A nontrivial automorphism of M (moving ``require_moved`` when
    given), or None once exhaustive backtracking proves rigidity.

    ``point_colors`` adds per-point labels every automorphism must
    preserve (used for labeled expansions)."""
    n = M.window
    if n <= 1:
        return None
    if require_moved is not None and not (0 <= require_moved < n):
        raise InputError("require_moved outside window")
    colors = refine_colors(M, point_colors)
    cand = [[w for w in range(n) if colors[w] == colors[v]] for v in range(n)]
    inc = _incidence(M)
    rels = M.relations

    def consistent(assign, v, w):
        for si, t in inc[v]:
            if all(u in assign or u == v for u in t):
                img = tuple(w if u == v else assign[u] for u in t)
                if img not in rels[si]:
                    return False
        back = {b: a for a, b in assign.items()}
        back[w] = v
        for si, t in inc[w]:
            if all(u in back for u in t):
                pre = tuple(back[u] for u in t)
                if pre not in rels[si]:
                    return False
        return True

    def dfs(assign, used):
        v = next((u for u in range(n) if u not in assign), None)
        if v is None:
            return assign
        for w in cand[v]:
            if w in used or not consistent(assign, v, w):
                continue
            assign[v] = w
            used.add(w)
            res = dfs(assign, used)
            if res is not None:
                return res
            del assign[v]
            used.discard(w)
        return None

    def complete(v0, w0):
        assign = {v0: w0}
        if not consistent({}, v0, w0):
            return None
        return dfs(assign, {w0})

    if require_moved is not None:
        v0 = require_moved
        for w0 in cand[v0]:
            if w0 == v0:
                continue
            res = complete(v0, w0)
            if res is not None:
                return FinPermutation(tuple(res[v] for v in range(n)))
        return None

    # least moved point first: pin the identity on a prefix
    for m in range(n):
        for w0 in cand[m]:
            if w0 <= m:
                continue
            assign = {v: v for v in range(m)}
            if not consistent(assign, m, w0):
                continue
            assign[m] = w0
            used = set(range(m)) | {w0}
            res = dfs(assign, used)
            if res is not None:
                return FinPermutation(tuple(res[v] for v in range(n)))
    return None
