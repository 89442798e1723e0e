"""Catalog of homogeneous-structure ages and lazy window generators.

Each catalog entry names a class of finite structures closed under
substructure (an age) together with a scheme for generating finite
windows of its generic limit:

  pureset     finite sets (empty language)
  dlo         finite linear orders, windows via a dyadic enumeration
  cyclic      finite cyclic orders, windows via dyadic circle positions
  poset       finite strict partial orders
  rado        finite simple graphs, windows via the BIT predicate
  kfree:n     K_n-free graphs (n >= 3)
  hyper:k     k-uniform hypergraphs (k >= 2)
  tournament  finite tournaments
  metric:d    metric spaces with distances in {1, ..., d}
  matched     partial matchings; the window is a perfect matching.
              Negative control: its limit has algebraicity (partners).
  henson      oriented graphs omitting a finite list of tournaments

Catalogs without a closed-form window (poset, tournament, kfree, hyper,
metric, henson) grow by greedy one-point extension: an infinite fair
schedule enumerates triples (parameter set A with |A| <= c, one-point
age-consistent type over A, copy index) and each new point realizes the
first unrealized task, so every type over every small set is eventually
realized by arbitrarily many points.  Windows are projectively
consistent: relations of existing points never change.

Randomized mode draws each local choice through the keyed hash of
(seed, point ids), which keeps restriction exact as well.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from fractions import Fraction

from . import rng
from .core import (
    EMPTY_LANGUAGE,
    FinStructure,
    InputError,
    Language,
    QfType,
    induced,
    qf_type,
)

LANG_GRAPH = Language("graph", (("edge", 2),))
LANG_ORDER = Language("order", (("lt", 2),))
LANG_POSET = Language("poset", (("lt", 2),))
LANG_CYCLIC = Language("cyclic", (("cyc", 3),))
LANG_TOURNAMENT = Language("tournament", (("arc", 2),))
LANG_DIGRAPH = Language("digraph", (("arc", 2),))
LANG_MATCHING = Language("matching", (("partner", 2),))

SCHEDULE_MAX_PARAMS = 3  # the c of the one-point-extension schedule

_PLAIN_KINDS = ("pureset", "dlo", "cyclic", "poset", "rado", "tournament", "matched")
_SCHEDULED_KINDS = ("poset", "tournament", "kfree", "hyper", "metric", "henson")


@dataclass(frozen=True)
class CatalogId:
    kind: str
    param: int | None = None
    forbidden: tuple[FinStructure, ...] = ()

    def __post_init__(self):
        k = self.kind
        if k in _PLAIN_KINDS:
            if self.param is not None:
                raise InputError(f"catalog {k} takes no parameter")
        elif k == "kfree":
            if self.param is None or self.param < 3:
                raise InputError("kfree needs param >= 3")
        elif k == "hyper":
            if self.param is None or self.param < 2:
                raise InputError("hyper needs param >= 2")
        elif k == "metric":
            if self.param is None or self.param < 1:
                raise InputError("metric needs param >= 1")
        elif k == "henson":
            if not self.forbidden:
                raise InputError("henson needs at least one forbidden tournament")
            for T in self.forbidden:
                if T.language != LANG_TOURNAMENT:
                    raise InputError("forbidden structures must be tournaments")
                if not _tournament_ok(T) or T.window < 2:
                    raise InputError("forbidden structure is not a valid tournament")
        else:
            raise InputError(f"unknown catalog kind {k!r}")
        if k == "henson" and self.param is not None:
            raise InputError("henson takes no numeric parameter")

    @property
    def language(self) -> Language:
        k = self.kind
        if k == "pureset":
            return EMPTY_LANGUAGE
        if k == "dlo":
            return LANG_ORDER
        if k == "cyclic":
            return LANG_CYCLIC
        if k == "poset":
            return LANG_POSET
        if k in ("rado", "kfree"):
            return LANG_GRAPH
        if k == "hyper":
            return Language(f"hyper{self.param}", (("hedge", self.param),))
        if k == "tournament":
            return LANG_TOURNAMENT
        if k == "metric":
            return Language(
                f"metric{self.param}",
                tuple((f"dist{i}", 2) for i in range(1, self.param + 1)),
            )
        if k == "matched":
            return LANG_MATCHING
        return LANG_DIGRAPH

    @property
    def has_algebraicity(self) -> bool:
        """Negative-control flag: matched points are algebraic over each
        other."""
        return self.kind == "matched"

    def token(self) -> str:
        if self.param is not None:
            return f"{self.kind}:{self.param}"
        return self.kind

    @classmethod
    def parse(cls, token: str, forbidden: tuple[FinStructure, ...] = ()) -> "CatalogId":
        token = token.strip().lower()
        if ":" in token:
            kind, arg = token.split(":", 1)
            try:
                return cls(kind, int(arg))
            except ValueError as exc:
                raise InputError(f"bad catalog parameter in {token!r}") from exc
        if token == "henson":
            return cls("henson", forbidden=forbidden)
        return cls(token)


# ---------------------------------------------------------------------------
# age membership


def _graph_ok(M: FinStructure) -> bool:
    E = M.rel("edge")
    return all(a != b and (b, a) in E for (a, b) in E)


def _has_clique(M: FinStructure, size: int) -> bool:
    E = M.rel("edge")
    for combo in itertools.combinations(range(M.window), size):
        if all((a, b) in E for a, b in itertools.combinations(combo, 2)):
            return True
    return False


def _tournament_ok(M: FinStructure) -> bool:
    A = M.rel("arc")
    for (a, b) in A:
        if a == b or (b, a) in A:
            return False
    for a, b in itertools.combinations(range(M.window), 2):
        if (a, b) not in A and (b, a) not in A:
            return False
    return True


def _strict_order_ok(M: FinStructure, total: bool) -> bool:
    L = M.rel("lt")
    below: dict[int, set[int]] = {}
    for (a, b) in L:
        if a == b or (b, a) in L:
            return False
        below.setdefault(b, set()).add(a)
    for (a, b) in L:
        for c in below.get(a, ()):
            if (c, b) not in L:
                return False
    if total:
        for a, b in itertools.combinations(range(M.window), 2):
            if (a, b) not in L and (b, a) not in L:
                return False
    return True


def _cyclic_ok(M: FinStructure) -> bool:
    C = M.rel("cyc")
    for t in C:
        if len(set(t)) != 3:
            return False
        a, b, c = t
        if (b, c, a) not in C or (c, b, a) in C:
            return False
    for a, b, c in itertools.combinations(range(M.window), 3):
        if ((a, b, c) in C) == ((a, c, b) in C):
            return False
    for (a, b, c) in C:
        for d in range(M.window):
            if d in (a, b, c):
                continue
            if (a, c, d) in C and (a, b, d) not in C:
                return False
    return True


def _metric_ok(M: FinStructure, dmax: int) -> bool:
    dist: dict[tuple[int, int], int] = {}
    for v in range(1, dmax + 1):
        for (a, b) in M.rel(f"dist{v}"):
            if a == b or (a, b) in dist:
                return False
            dist[(a, b)] = v
    n = M.window
    for a in range(n):
        for b in range(n):
            if a != b and (a, b) not in dist:
                return False
            if a != b and dist[(a, b)] != dist[(b, a)]:
                return False
    for a, b, c in itertools.permutations(range(n), 3):
        if dist[(a, c)] > dist[(a, b)] + dist[(b, c)]:
            return False
    return True


def _matching_ok(M: FinStructure) -> bool:
    P = M.rel("partner")
    deg: dict[int, int] = {}
    for (a, b) in P:
        if a == b or (b, a) not in P:
            return False
        deg[a] = deg.get(a, 0) + 1
    return all(v <= 1 for v in deg.values())


def _hyper_ok(M: FinStructure, k: int) -> bool:
    H = M.rel("hedge")
    for t in H:
        if len(set(t)) != k:
            return False
        for p in itertools.permutations(t):
            if p not in H:
                return False
    return True


def _digraph_ok(M: FinStructure) -> bool:
    A = M.rel("arc")
    return all(a != b and (b, a) not in A for (a, b) in A)


def _embeds_tournament(M: FinStructure, T: FinStructure) -> bool:
    A = M.rel("arc")
    TA = T.rel("arc")
    t = T.window
    if M.window < t:
        return False
    for combo in itertools.combinations(range(M.window), t):
        if not all((a, b) in A or (b, a) in A for a, b in itertools.combinations(combo, 2)):
            continue
        for perm in itertools.permutations(combo):
            if all(((perm[i], perm[j]) in A) == ((i, j) in TA)
                   for i in range(t) for j in range(t) if i != j):
                return True
    return False


def age_member(cat: CatalogId, M: FinStructure) -> bool:
    """True iff M belongs to the catalog's age."""
    if M.language != cat.language:
        raise InputError(
            f"language mismatch: structure has {M.language.name!r}, "
            f"catalog {cat.token()!r} expects {cat.language.name!r}"
        )
    k = cat.kind
    if k == "pureset":
        return True
    if k == "rado":
        return _graph_ok(M)
    if k == "kfree":
        return _graph_ok(M) and not _has_clique(M, cat.param)
    if k == "dlo":
        return _strict_order_ok(M, total=True)
    if k == "poset":
        return _strict_order_ok(M, total=False)
    if k == "cyclic":
        return _cyclic_ok(M)
    if k == "tournament":
        return _tournament_ok(M)
    if k == "hyper":
        return _hyper_ok(M, cat.param)
    if k == "metric":
        return _metric_ok(M, cat.param)
    if k == "matched":
        return _matching_ok(M)
    return _digraph_ok(M) and not any(_embeds_tournament(M, T) for T in cat.forbidden)


# ---------------------------------------------------------------------------
# one-point extension candidates


def _subsets(items):
    for r in range(len(items) + 1):
        yield from itertools.combinations(items, r)


def _base_pattern(cat: CatalogId, M: FinStructure, A: tuple[int, ...]) -> FinStructure:
    """Structure on k+1 points: positions 0..k-1 mirror A (in order),
    position k is the fresh point, initially unrelated."""
    if len(set(A)) != len(A):
        raise InputError("parameter tuple must have distinct entries")
    idx = {a: i for i, a in enumerate(A)}
    keep = set(A)
    rels = {}
    for (sym, _), rel in zip(M.language.symbols, M.relations):
        rels[sym] = {tuple(idx[x] for x in t) for t in rel if all(x in keep for x in t)}
    return FinStructure.make(cat.language, len(A) + 1, rels)


def _z_extras(cat: CatalogId, P0: FinStructure, k: int):
    """Yield candidate new-tuple sets (dict symbol -> tuples) for the
    fresh point at position k."""
    z = k
    kind = cat.kind
    if kind == "pureset":
        yield {}
    elif kind in ("rado", "kfree"):
        for S in _subsets(range(k)):
            yield {"edge": {(i, z) for i in S} | {(z, i) for i in S}}
    elif kind == "hyper":
        r = cat.param
        combos = list(itertools.combinations(range(k), r - 1))
        for chosen in _subsets(combos):
            tuples = set()
            for cmb in chosen:
                tuples.update(itertools.permutations(cmb + (z,)))
            yield {"hedge": tuples}
    elif kind == "tournament":
        for orient in itertools.product((0, 1), repeat=k):
            yield {"arc": {(i, z) if o else (z, i) for i, o in zip(range(k), orient)}}
    elif kind == "henson":
        for orient in itertools.product((0, 1, 2), repeat=k):
            arcs = set()
            for i, o in enumerate(orient):
                if o == 1:
                    arcs.add((z, i))
                elif o == 2:
                    arcs.add((i, z))
            yield {"arc": arcs}
    elif kind in ("dlo", "poset"):
        opts = ("lt", "gt") if kind == "dlo" else ("lt", "gt", "inc")
        for assign in itertools.product(opts, repeat=k):
            rel = set()
            for i, o in enumerate(assign):
                if o == "lt":
                    rel.add((z, i))
                elif o == "gt":
                    rel.add((i, z))
            yield {"lt": rel}
    elif kind == "cyclic":
        # all circular arrangements of k+1 points whose restriction to the
        # first k agrees with P0
        old = P0.rel("cyc")
        for perm in itertools.permutations(range(1, k + 1)):
            order = (0,) + perm
            pos = {p: i for i, p in enumerate(order)}
            full = set()
            for a, b, c in itertools.permutations(range(k + 1), 3):
                pa, pb, pc = pos[a], pos[b], pos[c]
                if pa < pb < pc or pb < pc < pa or pc < pa < pb:
                    full.add((a, b, c))
            if {t for t in full if z not in t} != set(old):
                continue
            yield {"cyc": {t for t in full if z in t}}
    elif kind == "metric":
        d = cat.param
        for assign in itertools.product(range(1, d + 1), repeat=k):
            rels: dict[str, set] = {}
            for i, v in enumerate(assign):
                rels.setdefault(f"dist{v}", set()).update({(i, z), (z, i)})
            yield rels
    elif kind == "matched":
        yield {"partner": set()}
        for i in range(k):
            yield {"partner": {(i, z), (z, i)}}
    else:  # pragma: no cover
        raise InputError(f"unknown catalog kind {kind!r}")


def one_point_extensions(cat: CatalogId, M: FinStructure, A: tuple[int, ...]):
    """Age-consistent structures on A + fresh point (fresh point last)."""
    k = len(A)
    P0 = _base_pattern(cat, M, A)
    out = []
    for extras in _z_extras(cat, P0, k):
        rels = {sym: set(P0.rel(sym)) for sym, _ in cat.language.symbols}
        for sym, tuples in extras.items():
            rels[sym].update(tuples)
        P = FinStructure.make(cat.language, k + 1, rels)
        if age_member(cat, P):
            out.append(P)
    return out


def one_point_types(cat: CatalogId, M: FinStructure, A: tuple[int, ...]) -> list[QfType]:
    """All age-consistent one-point-extension types over A, in canonical
    byte order, for a fresh point."""
    seen = {}
    for P in one_point_extensions(cat, M, A):
        tp = qf_type(P, tuple(range(len(A) + 1)))
        seen[tp.to_bytes()] = tp
    return [seen[b] for b in sorted(seen)]


# ---------------------------------------------------------------------------
# deterministic closed-form windows


def _dyadic(n: int) -> Fraction:
    level = (n + 1).bit_length()
    pos = (n + 1) - (1 << (level - 1))
    return Fraction(2 * pos + 1, 1 << level)


def _build_pureset(n: int) -> FinStructure:
    return FinStructure.make(EMPTY_LANGUAGE, n)


def _build_rado_bit(n: int) -> FinStructure:
    edges = set()
    for i in range(n):
        for j in range(i + 1, n):
            if (j >> i) & 1:
                edges.add((i, j))
                edges.add((j, i))
    return FinStructure.make(LANG_GRAPH, n, {"edge": edges})


def _build_dlo_dyadic(n: int) -> FinStructure:
    vals = [_dyadic(i) for i in range(n)]
    lt = {(i, j) for i in range(n) for j in range(n) if vals[i] < vals[j]}
    return FinStructure.make(LANG_ORDER, n, {"lt": lt})


def _circle_positions(n: int) -> list[Fraction]:
    return [Fraction(0)] + [_dyadic(i) for i in range(n - 1)] if n else []


def _cyc_from_positions(vals) -> set:
    n = len(vals)
    out = set()
    for a, b, c in itertools.permutations(range(n), 3):
        va, vb, vc = vals[a], vals[b], vals[c]
        if va < vb < vc or vb < vc < va or vc < va < vb:
            out.add((a, b, c))
    return out


def _build_cyclic_dyadic(n: int) -> FinStructure:
    return FinStructure.make(LANG_CYCLIC, n, {"cyc": _cyc_from_positions(_circle_positions(n))})


def _build_matched(n: int) -> FinStructure:
    pairs = set()
    for i in range(0, n - 1, 2):
        pairs.add((i, i + 1))
        pairs.add((i + 1, i))
    return FinStructure.make(LANG_MATCHING, n, {"partner": pairs})


# ---------------------------------------------------------------------------
# randomized closed-form windows (per-point / per-pair hashing)


def _rand_reals(seed: int, tag: str, n: int) -> list[float]:
    return [rng.uniform(seed, tag, i) for i in range(n)]


def _build_rado_random(seed: int, n: int) -> FinStructure:
    edges = set()
    for i in range(n):
        for j in range(i + 1, n):
            if rng.bernoulli(0.5, seed, "rado", i, j):
                edges.add((i, j))
                edges.add((j, i))
    return FinStructure.make(LANG_GRAPH, n, {"edge": edges})


def _build_dlo_random(seed: int, n: int) -> FinStructure:
    u = _rand_reals(seed, "dlo", n)
    # ties broken by index; collision probability ~ 2^-53 per pair
    lt = {(i, j) for i in range(n) for j in range(n)
          if i != j and (u[i], i) < (u[j], j)}
    return FinStructure.make(LANG_ORDER, n, {"lt": lt})


def _build_cyclic_random(seed: int, n: int) -> FinStructure:
    u = _rand_reals(seed, "cyclic", n)
    return FinStructure.make(LANG_CYCLIC, n, {"cyc": _cyc_from_positions(u)})


# ---------------------------------------------------------------------------
# greedy one-point-extension scheduler


def _task_params(level: int, c: int):
    """Parameter sets and copy indices scheduled at the given level."""
    for j in range(1, level + 1):
        m = level + 1 - j
        last = j - 1
        for size in range(1, c + 1):
            if size - 1 > last:
                continue
            for rest in itertools.combinations(range(last), size - 1):
                yield rest + (last,), m


class _GreedyBuilder:
    """Grows a window one point at a time, realizing scheduled tasks."""

    def __init__(self, cat: CatalogId, seed: int, mode: str, M: FinStructure):
        self.cat = cat
        self.seed = seed
        self.mode = mode
        self.M = M
        self._types: dict[tuple, list] = {}
        self._counts: dict[tuple, int] = {}

    def _types_over(self, A):
        if A not in self._types:
            pats = one_point_extensions(self.cat, self.M, A)
            keyed = sorted(
                ((qf_type(P, tuple(range(len(A) + 1))).to_bytes(), P) for P in pats),
                key=lambda kv: kv[0],
            )
            self._types[A] = keyed
        return self._types[A]

    def _realized(self, A, tb) -> int:
        key = (A, tb)
        if key not in self._counts:
            excl = set(A)
            self._counts[key] = sum(
                1
                for x in range(self.M.window)
                if x not in excl and qf_type(self.M, A + (x,)).to_bytes() == tb
            )
        return self._counts[key]

    def _note_new_point(self, p: int):
        for A in {a for (a, _) in self._counts}:
            tb = qf_type(self.M, A + (p,)).to_bytes()
            key = (A, tb)
            if key in self._counts:
                self._counts[key] += 1

    def _pick_task(self):
        n = self.M.window
        cap = 2 * n + SCHEDULE_MAX_PARAMS + 8
        for level in range(1, cap + 1):
            for A, m in _task_params(level, SCHEDULE_MAX_PARAMS):
                if A[-1] >= n:
                    continue
                for tb, P in self._types_over(A):
                    if self._realized(A, tb) < m:
                        return A, P
        return None

    def add_point(self):
        n = self.M.window
        z = n
        rels = {sym: set(rel) for (sym, _), rel in zip(self.M.language.symbols, self.M.relations)}
        if self.mode == "generic":
            task = self._pick_task()
            A, P = task if task is not None else ((), None)
            assigned = self._apply_pattern(rels, A, P, z)
            self._fill_defaults(rels, z, n, assigned)
        else:
            self._fill_random(rels, z, n)
        self.M = FinStructure.make(self.cat.language, n + 1, rels)
        self._note_new_point(z)

    def _apply_pattern(self, rels, A, P, z):
        """Copy the fresh-point tuples of the pattern onto z; returns the
        per-point assignment used by the default fill."""
        assigned: dict[int, object] = {}
        if P is None:
            return assigned
        k = len(A)
        mapping = A + (z,)
        for sym, _ in self.cat.language.symbols:
            for t in P.rel(sym):
                if k in t:
                    rels[sym].add(tuple(mapping[i] for i in t))
        kind = self.cat.kind
        for i, a in enumerate(A):
            if kind in ("rado", "kfree"):
                assigned[a] = (i, z) in P.rel("edge")
            elif kind in ("tournament", "henson"):
                if (k, i) in P.rel("arc"):
                    assigned[a] = "out"
                elif (i, k) in P.rel("arc"):
                    assigned[a] = "in"
                else:
                    assigned[a] = "none"
            elif kind == "poset":
                if (k, i) in P.rel("lt"):
                    assigned[a] = "gt"  # z < a
                elif (i, k) in P.rel("lt"):
                    assigned[a] = "lt"  # a < z
                else:
                    assigned[a] = "inc"
            elif kind == "metric":
                for v in range(1, self.cat.param + 1):
                    if (i, k) in P.rel(f"dist{v}"):
                        assigned[a] = v
            else:
                assigned[a] = True
        return assigned

    def _fill_defaults(self, rels, z, n, assigned):
        kind = self.cat.kind
        if kind in ("rado", "kfree", "hyper", "henson"):
            return  # default: unrelated
        if kind == "tournament":
            for y in range(n):
                if y not in assigned:
                    rels["arc"].add((y, z))
            return
        if kind == "poset":
            lows = {a for a, o in assigned.items() if o == "lt"}
            highs = {a for a, o in assigned.items() if o == "gt"}
            lt = rels["lt"]
            below = set(lows)
            above = set(highs)
            for y in range(n):
                if any(y == a or (y, a) in lt for a in lows):
                    below.add(y)
                if any(y == a or (a, y) in lt for a in highs):
                    above.add(y)
            if below & above:
                raise AssertionError("inconsistent poset closure")
            for y in below:
                lt.add((y, z))
            for y in above:
                lt.add((z, y))
            return
        if kind == "metric":
            d = self.cat.param
            dist = dict(assigned)

            def dist_m(a, b):
                for v in range(1, d + 1):
                    if (a, b) in rels[f"dist{v}"]:
                        return v
                raise AssertionError("missing distance")

            for y in range(n):
                if y in dist:
                    continue
                lo, hi = 1, d
                for u, vzu in dist.items():
                    duy = dist_m(u, y)
                    lo = max(lo, abs(vzu - duy))
                    hi = min(hi, vzu + duy)
                if lo > hi:
                    raise AssertionError("empty metric interval")
                dist[y] = lo
            for y, v in dist.items():
                rels[f"dist{v}"].update({(y, z), (z, y)})
            return

    def _fill_random(self, rels, z, n):
        kind = self.cat.kind
        seed = self.seed
        if kind == "kfree":
            p = self.cat.param
            edges = rels["edge"]
            for y in range(n):
                if rng.bernoulli(0.5, seed, "kfree", y, z):
                    nbrs = [x for x in range(n) if (x, y) in edges and (x, z) in edges]
                    safe = not any(
                        all((a, b) in edges for a, b in itertools.combinations(c, 2))
                        for c in itertools.combinations(nbrs, p - 2)
                    )
                    if safe:
                        edges.update({(y, z), (z, y)})
            return
        if kind == "hyper":
            r = self.cat.param
            for cmb in itertools.combinations(range(n), r - 1):
                if rng.bernoulli(0.5, seed, "hyper", cmb, z):
                    rels["hedge"].update(itertools.permutations(cmb + (z,)))
            return
        if kind == "tournament":
            for y in range(n):
                if rng.bernoulli(0.5, seed, "tourn", y, z):
                    rels["arc"].add((y, z))
                else:
                    rels["arc"].add((z, y))
            return
        if kind == "henson":
            arcs = rels["arc"]
            for y in range(n):
                opts = ["none", "out", "in"]
                pick = opts[rng.choice_index(3, seed, "henson", y, z)]
                if pick == "none":
                    continue
                arc = (z, y) if pick == "out" else (y, z)
                arcs.add(arc)
                trial = FinStructure.make(self.cat.language, z + 1, {"arc": arcs})
                if any(_embeds_tournament(trial, T) for T in self.cat.forbidden):
                    arcs.discard(arc)
            return
        if kind == "poset":
            lt = rels["lt"]
            for y in range(n):
                # y < z is valid iff y lies below everything already above z;
                # z < y symmetric.  Applying with closure keeps transitivity.
                opts = ["inc"]
                if all((y, w) in lt for w in range(n) if (z, w) in lt):
                    opts.append("lt")
                if all((w, y) in lt for w in range(n) if (w, z) in lt):
                    opts.append("gt")
                pick = opts[rng.choice_index(len(opts), seed, "poset", y, z)]
                if pick == "lt":
                    lt.add((y, z))
                    lt.update((w, z) for w in range(n) if (w, y) in lt)
                elif pick == "gt":
                    lt.add((z, y))
                    lt.update((z, w) for w in range(n) if (y, w) in lt)
            return
        if kind == "metric":
            d = self.cat.param
            dist: dict[int, int] = {}

            def dist_m(a, b):
                for v in range(1, d + 1):
                    if (a, b) in rels[f"dist{v}"]:
                        return v
                raise AssertionError("missing distance")

            for y in range(n):
                lo, hi = 1, d
                for u, vzu in dist.items():
                    duy = dist_m(u, y)
                    lo = max(lo, abs(vzu - duy))
                    hi = min(hi, vzu + duy)
                dist[y] = lo + rng.choice_index(hi - lo + 1, seed, "metric", y, z)
            for y, v in dist.items():
                rels[f"dist{v}"].update({(y, z), (z, y)})
            return
        raise InputError(f"randomized mode unsupported for {kind}")  # pragma: no cover


# ---------------------------------------------------------------------------
# window construction with caching

_CACHE: dict[tuple, FinStructure] = {}


def _build_closed_form(cat: CatalogId, n: int, seed: int, mode: str) -> FinStructure | None:
    kind = cat.kind
    if kind == "pureset":
        return _build_pureset(n)
    if kind == "matched":
        return _build_matched(n)
    if kind == "rado":
        return _build_rado_bit(n) if mode == "generic" else _build_rado_random(seed, n)
    if kind == "dlo":
        return _build_dlo_dyadic(n) if mode == "generic" else _build_dlo_random(seed, n)
    if kind == "cyclic":
        return _build_cyclic_dyadic(n) if mode == "generic" else _build_cyclic_random(seed, n)
    return None


def window_structure(cat: CatalogId, n: int, seed: int = 0, mode: str = "generic") -> FinStructure:
    """The catalog window of size n.  Deterministic given (catalog, mode,
    seed); in generic mode the seed is ignored.  Windows are cached and
    shared (structures are immutable)."""
    if n < 0:
        raise InputError("window must be >= 0")
    if mode not in ("generic", "randomized"):
        raise InputError(f"unknown mode {mode!r}")
    if mode == "generic":
        seed = 0
    key = (cat, seed, mode)
    cached = _CACHE.get(key)
    if cached is not None:
        if cached.window == n:
            return cached
        if cached.window > n:
            return induced(cached, range(n))
    built = _build_closed_form(cat, n, seed, mode)
    if built is None:
        builder = _GreedyBuilder(cat, seed, mode, cached if cached is not None
                                 else FinStructure.make(cat.language, 0))
        while builder.M.window < n:
            builder.add_point()
        built = builder.M
    _CACHE[key] = built
    return built


@dataclass(frozen=True)
class GeneratorState:
    """A lazily grown window of the catalog's generic limit."""

    catalog: CatalogId
    seed: int
    mode: str
    current: FinStructure

    @property
    def window(self) -> int:
        return self.current.window


def initial_state(cat: CatalogId, seed: int = 0, mode: str = "generic",
                  window: int = 0) -> GeneratorState:
    return GeneratorState(cat, seed, mode, window_structure(cat, window, seed, mode))


def extend_window(state: GeneratorState, target: int) -> GeneratorState:
    """Grow the window to the target size; existing points keep all their
    relations."""
    if target < state.window:
        raise InputError(f"target {target} below current window {state.window}")
    if target == state.window:
        return state
    M = window_structure(state.catalog, target, state.seed, state.mode)
    return replace(state, current=M)


def witness_extension(state: GeneratorState, A: tuple[int, ...], desired: QfType):
    """An element z of the current window with qf_type(A + (z,)) equal to
    the desired type, or None when the window holds no witness.  The
    window is never grown here; callers extend and retry.
    """
    M = state.current
    A = tuple(A)
    for a in A:
        if not (0 <= a < M.window):
            raise InputError(f"parameter {a} outside window {M.window}")
    if desired.language != cat_lang(state.catalog):
        raise InputError("desired type is over the wrong language")
    if desired.arity != len(A) + 1:
        raise InputError("desired type must extend A by exactly one point")
    # age consistency of the desired configuration
    P = structure_of_type(desired)
    if not age_member(state.catalog, P):
        raise InputError("desired type is not age-consistent")
    if desired.restrict(len(A)) != qf_type(M, A):
        raise InputError("desired type disagrees with the window on A")
    k = len(A)
    pat = desired.pattern
    if pat[k] in pat[:k]:
        a = A[pat[:k].index(pat[k])]
        return a if qf_type(M, A + (a,)) == desired else None
    excl = set(A)
    for z in range(M.window):
        if z in excl:
            continue
        if qf_type(M, A + (z,)) == desired:
            return z
    return None


def cat_lang(cat: CatalogId) -> Language:
    return cat.language


def structure_of_type(tp: QfType) -> FinStructure:
    """The structure on the equality classes of a type (one point per
    class)."""
    m = tp.num_classes
    rels: dict[str, set] = {sym: set() for sym, _ in tp.language.symbols}
    for sym, arity in tp.language.symbols:
        for ct in itertools.product(range(m), repeat=arity):
            if tp.atom(sym, ct):
                rels[sym].add(ct)
    return FinStructure.make(tp.language, m, rels)


def extension_type(cat: CatalogId, M: FinStructure, A: tuple[int, ...], z: int) -> QfType:
    """Convenience: the one-point extension type realized by z over A."""
    return qf_type(M, tuple(A) + (z,))
