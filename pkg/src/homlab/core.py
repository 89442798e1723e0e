"""Relational languages, finite structures on a window, the logic action
by finite permutations, and canonical quantifier-free types.

A structure lives on the window {0, ..., n-1}.  Relations are stored as
explicit sets of tuples; windows stay small enough (a few hundred) that
density tricks are not worth their complexity.  All values here are
immutable; operations return new values.

Plain-text structure format (bit-exact round-trip):

    lang <name> <symbol:arity> ...
    window <n>
    <symbol> i1 i2 ... ir        (one line per held tuple)

Rendering is canonical: tuple lines sorted by (symbol order, tuple).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class InputError(ValueError):
    """Raised on malformed or out-of-contract inputs."""


@dataclass(frozen=True)
class Language:
    """An ordered list of relation symbols with arities.

    ``base`` marks this language as an expansion of another one; the base
    symbols must form a prefix.  ``base`` is advisory metadata (used for
    reducts) and does not take part in equality, since the text format
    cannot carry it.
    """

    name: str
    symbols: tuple[tuple[str, int], ...]
    base: "Language | None" = field(default=None, compare=False)

    def __post_init__(self):
        seen = set()
        for sym, arity in self.symbols:
            if not _IDENT.match(sym):
                raise InputError(f"bad symbol name {sym!r}")
            if arity < 1:
                raise InputError(f"symbol {sym} has arity {arity} < 1")
            if sym in seen:
                raise InputError(f"duplicate symbol {sym}")
            seen.add(sym)
        if self.base is not None:
            k = len(self.base.symbols)
            if self.symbols[:k] != self.base.symbols:
                raise InputError("base symbols must form a prefix")

    def arity(self, sym: str) -> int:
        for s, a in self.symbols:
            if s == sym:
                return a
        raise InputError(f"unknown symbol {sym}")

    def index(self, sym: str) -> int:
        for i, (s, _) in enumerate(self.symbols):
            if s == sym:
                return i
        raise InputError(f"unknown symbol {sym}")

    def is_expansion_of(self, other: "Language") -> bool:
        return self.symbols[: len(other.symbols)] == other.symbols


EMPTY_LANGUAGE = Language("pureset", ())


@dataclass(frozen=True)
class FinStructure:
    """A finite relational structure on the window {0, ..., window-1}.

    ``relations`` is parallel to ``language.symbols``.
    """

    language: Language
    window: int
    relations: tuple[frozenset[tuple[int, ...]], ...]

    def __post_init__(self):
        if self.window < 0:
            raise InputError("window must be >= 0")
        if len(self.relations) != len(self.language.symbols):
            raise InputError("relations do not match language symbols")
        for (sym, arity), rel in zip(self.language.symbols, self.relations):
            for t in rel:
                if len(t) != arity:
                    raise InputError(f"tuple {t} has wrong arity for {sym}")
                if any(not (0 <= x < self.window) for x in t):
                    raise InputError(f"tuple {t} outside window {self.window}")

    @classmethod
    def make(cls, language: Language, window: int, rels: dict | None = None) -> "FinStructure":
        rels = rels or {}
        unknown = set(rels) - {s for s, _ in language.symbols}
        if unknown:
            raise InputError(f"unknown symbols {sorted(unknown)}")
        table = tuple(
            frozenset(tuple(t) for t in rels.get(sym, ()))
            for sym, _ in language.symbols
        )
        return cls(language, window, table)

    def rel(self, sym: str) -> frozenset[tuple[int, ...]]:
        return self.relations[self.language.index(sym)]

    def holds(self, sym: str, t: tuple[int, ...]) -> bool:
        return t in self.rel(sym)

    def with_relation(self, sym: str, tuples) -> "FinStructure":
        i = self.language.index(sym)
        table = list(self.relations)
        table[i] = frozenset(tuple(t) for t in tuples)
        return FinStructure(self.language, self.window, tuple(table))

    def reduct(self, base: Language) -> "FinStructure":
        if not self.language.is_expansion_of(base):
            raise InputError("not an expansion of the given language")
        return FinStructure(base, self.window, self.relations[: len(base.symbols)])


@dataclass(frozen=True)
class FinPermutation:
    """A permutation of {0, ..., n-1} given by its image tuple."""

    images: tuple[int, ...]

    def __post_init__(self):
        n = len(self.images)
        if sorted(self.images) != list(range(n)):
            raise InputError(f"not a bijection on range({n}): {self.images}")

    @property
    def window(self) -> int:
        return len(self.images)

    @classmethod
    def identity(cls, n: int) -> "FinPermutation":
        return cls(tuple(range(n)))

    @classmethod
    def from_cycles(cls, n: int, cycles) -> "FinPermutation":
        images = list(range(n))
        for cyc in cycles:
            if len(set(cyc)) != len(cyc):
                raise InputError(f"repeated point in cycle {cyc}")
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                if not (0 <= a < n):
                    raise InputError(f"cycle point {a} outside window {n}")
                images[a] = b
        return cls(tuple(images))

    @classmethod
    def parse_cycles(cls, n: int, text: str) -> "FinPermutation":
        """Parse cycle notation like ``(0 1)(2 3)`` or ``(01)(23)``."""
        text = text.strip()
        if text in ("", "()", "id", "e"):
            return cls.identity(n)
        if not re.fullmatch(r"(\([^()]*\))+", text):
            raise InputError(f"bad cycle notation: {text!r}")
        cycles = []
        for body in re.findall(r"\(([^()]*)\)", text):
            body = body.strip()
            if re.search(r"[ ,]", body):
                pts = [int(x) for x in re.split(r"[ ,]+", body) if x]
            else:
                pts = [int(ch) for ch in body]
            if pts:
                cycles.append(pts)
        return cls.from_cycles(n, cycles)

    def apply(self, x: int) -> int:
        return self.images[x]

    def apply_tuple(self, t: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(self.images[x] for x in t)

    def compose(self, other: "FinPermutation") -> "FinPermutation":
        """self after other: (self*other)(x) = self(other(x))."""
        if self.window != other.window:
            raise InputError("window mismatch in composition")
        return FinPermutation(tuple(self.images[other.images[x]] for x in range(self.window)))

    def inverse(self) -> "FinPermutation":
        inv = [0] * self.window
        for x, y in enumerate(self.images):
            inv[y] = x
        return FinPermutation(tuple(inv))

    def is_identity(self) -> bool:
        return all(self.images[x] == x for x in range(self.window))

    def cycle_string(self) -> str:
        seen = set()
        parts = []
        for x in range(self.window):
            if x in seen or self.images[x] == x:
                continue
            cyc = [x]
            seen.add(x)
            y = self.images[x]
            while y != x:
                cyc.append(y)
                seen.add(y)
                y = self.images[y]
            parts.append("(" + " ".join(map(str, cyc)) + ")")
        return "".join(parts) if parts else "()"


@dataclass(frozen=True)
class QfType:
    """Canonical quantifier-free type of a tuple.

    ``pattern`` is the equality pattern as a restricted growth string
    (position i carries the index of its equality class, classes numbered
    by first occurrence).  ``atoms`` has one row per language symbol, the
    truth values of the symbol on all class-index tuples in lexicographic
    order.  Two types are equal iff their canonical byte strings are.
    """

    language: Language
    arity: int
    pattern: tuple[int, ...]
    atoms: tuple[tuple[bool, ...], ...]

    @property
    def num_classes(self) -> int:
        return max(self.pattern) + 1 if self.pattern else 0

    def atom(self, sym: str, class_tuple: tuple[int, ...]) -> bool:
        i = self.language.index(sym)
        arity = self.language.symbols[i][1]
        m = self.num_classes
        idx = 0
        for c in class_tuple:
            idx = idx * m + c
        row = self.atoms[i]
        if len(class_tuple) != arity or not (0 <= idx < len(row)):
            raise InputError("bad class tuple")
        return row[idx]

    def to_bytes(self) -> bytes:
        head = self.language.name.encode() + b"!"
        head += ";".join(f"{s}:{a}" for s, a in self.language.symbols).encode()
        body = bytes([self.arity]) + bytes(self.pattern)
        for row in self.atoms:
            body += b"|" + bytes(1 if b else 0 for b in row)
        return head + b"#" + body

    def restrict(self, k: int) -> "QfType":
        """The type of the first k positions."""
        if not (0 <= k <= self.arity):
            raise InputError("bad restriction length")
        return _type_from_pattern(self.language, self.pattern[:k],
                                  lambda sym, ct: self.atom(sym, ct))


def _type_from_pattern(language, sub_pattern, atom_of):
    # renumber surviving classes by first occurrence, re-read atoms
    remap: dict[int, int] = {}
    new_pattern = []
    old_of_new = []
    for c in sub_pattern:
        if c not in remap:
            remap[c] = len(remap)
            old_of_new.append(c)
        new_pattern.append(remap[c])
    m = len(remap)
    rows = []
    for sym, arity in language.symbols:
        row = []
        for ct in itertools.product(range(m), repeat=arity):
            row.append(atom_of(sym, tuple(old_of_new[c] for c in ct)))
        rows.append(tuple(row))
    return QfType(language, len(new_pattern), tuple(new_pattern), tuple(rows))


def qf_type(M: FinStructure, t: tuple[int, ...]) -> QfType:
    """Canonical quantifier-free type of the tuple t in M.

    Tuples related by any automorphism of M get equal types; the type
    records the equality pattern and every atomic fact on the entries.
    """
    t = tuple(t)
    for x in t:
        if not (0 <= x < M.window):
            raise InputError(f"tuple entry {x} outside window {M.window}")
    pattern = []
    reps: list[int] = []
    index_of: dict[int, int] = {}
    for x in t:
        if x not in index_of:
            index_of[x] = len(reps)
            reps.append(x)
        pattern.append(index_of[x])
    m = len(reps)
    rows = []
    for (sym, arity), rel in zip(M.language.symbols, M.relations):
        row = []
        for ct in itertools.product(range(m), repeat=arity):
            row.append(tuple(reps[c] for c in ct) in rel)
        rows.append(tuple(row))
    return QfType(M.language, len(t), tuple(pattern), tuple(rows))


def act(g: FinPermutation, M: FinStructure) -> FinStructure:
    """The logic action: R holds on x-bar in g.M iff it holds on
    g^{-1}(x-bar) in M.  Equivalently every held tuple is pushed forward
    through g."""
    if g.window != M.window:
        raise InputError(f"window mismatch: perm {g.window} vs structure {M.window}")
    table = tuple(
        frozenset(g.apply_tuple(t) for t in rel) for rel in M.relations
    )
    return FinStructure(M.language, M.window, table)


def induced(M: FinStructure, S) -> FinStructure:
    """Induced substructure on S, relabeled order-preservingly to
    {0, ..., |S|-1}."""
    S = sorted(set(S))
    for x in S:
        if not (0 <= x < M.window):
            raise InputError(f"subset entry {x} outside window {M.window}")
    pos = {x: i for i, x in enumerate(S)}
    keep = set(S)
    table = tuple(
        frozenset(tuple(pos[x] for x in t) for t in rel if all(x in keep for x in t))
        for rel in M.relations
    )
    return FinStructure(M.language, len(S), table)


def all_tuples(n: int, k: int):
    return itertools.product(range(n), repeat=k)


def injective_tuples(n: int, k: int):
    return itertools.permutations(range(n), k)


def render_structure(M: FinStructure) -> str:
    """Canonical plain-text form (see module docstring)."""
    parts = ["lang " + " ".join([M.language.name] + [f"{s}:{a}" for s, a in M.language.symbols])]
    parts.append(f"window {M.window}")
    for (sym, _), rel in zip(M.language.symbols, M.relations):
        for t in sorted(rel):
            parts.append(sym + " " + " ".join(map(str, t)))
    return "\n".join(parts) + "\n"


def parse_structure(text: str) -> FinStructure:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2 or not lines[0].startswith("lang ") or not lines[1].startswith("window "):
        raise InputError("structure text must start with 'lang' and 'window' lines")
    head = lines[0].split()
    name = head[1] if len(head) > 1 else ""
    symbols = []
    for tok in head[2:]:
        if ":" not in tok:
            raise InputError(f"bad symbol token {tok!r}")
        sym, arity = tok.rsplit(":", 1)
        symbols.append((sym, int(arity)))
    language = Language(name, tuple(symbols))
    try:
        window = int(lines[1].split()[1])
    except (IndexError, ValueError) as exc:
        raise InputError("bad window line") from exc
    rels: dict[str, set] = {s: set() for s, _ in symbols}
    for ln in lines[2:]:
        toks = ln.split()
        sym = toks[0]
        if sym not in rels:
            raise InputError(f"unknown symbol {sym!r} in tuple line")
        try:
            t = tuple(int(x) for x in toks[1:])
        except ValueError as exc:
            raise InputError(f"bad tuple line {ln!r}") from exc
        if len(t) != language.arity(sym):
            raise InputError(f"arity mismatch in line {ln!r}")
        rels[sym].add(t)
    return FinStructure.make(language, window, rels)
