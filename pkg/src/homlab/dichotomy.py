"""The headline experiment: score sampled expansions for essential
freeness versus essential transitivity at window scale.

freeness_score counts samples whose window admits no nontrivial
label/relation-preserving automorphism; window rigidity is evidence, not
proof, so reports always carry the window size.

matching_score follows the coupling in the atomic-base transitivity
proof: two independent samples can be matched along the group action
exactly where their label multisets overlap, so for real-labeled
expansions the matched fraction is the color-count overlap
sum_v min(count_L(v), count_R(v)) / n, a quantity the limit's
ultrahomogeneity turns into an actual partial isomorphism.  For purely
relational samples a back-and-forth search is run instead.  The
matched-fraction criterion for a transitive verdict is a construction
from that proof, not a statistic the source results dictate; reports
label it via the threshold fields.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import asdict, dataclass

from .backforth import Failure, automorphism_search, build_isomorphism, refine_colors
from .catalog import CatalogId
from .core import FinStructure
from .ire import RealExpansion, Sampler
from .orbits import separating_tuple
from . import rng


@dataclass(frozen=True)
class Thresholds:
    """Verdict thresholds; the coupling bound is 1 - c*sqrt(n ln n)/n."""

    free_min: float = 0.99
    match_max: float = 0.05
    transitive_pair_fraction: float = 0.95
    coupling_c: float = 3.0
    neither_free_max: float = 0.95
    neither_pair_fraction_max: float = 0.90


DEFAULT_THRESHOLDS = Thresholds()


def pair_threshold(n: int, c: float = 3.0) -> float:
    """Matched fraction an atomic-base pair must reach: 1 - c*sqrt(n ln n)/n."""
    if n <= 1:
        return 0.0
    return 1.0 - c * math.sqrt(n * math.log(n)) / n


def matched_fraction_labels(left: RealExpansion, right: RealExpansion) -> float:
    """Color-count coupling: the maximal fraction of points matchable by
    exact label equality."""
    n = left.window
    cl = Counter(left.labels)
    cr = Counter(right.labels)
    matched = sum(min(c, cr[v]) for v, c in cl.items())
    return matched / n


@dataclass(frozen=True)
class DichotomyReport:
    sampler: str
    window: int
    trials: int
    freeness_score: float
    matching_score: float
    pair_pass_fraction: float
    pair_threshold: float
    verdict: str
    thresholds: Thresholds

    def to_dict(self) -> dict:
        d = asdict(self)
        d["thresholds"] = asdict(self.thresholds)
        return d


def _is_rigid(sample, structure_rigid_cache: dict | None = None) -> bool:
    if isinstance(sample, RealExpansion):
        if len(set(sample.labels)) == sample.window:
            # distinct labels force triviality outright
            return True
        M = sample.structure
        if structure_rigid_cache is not None:
            # discrete refinement of the bare structure already forces
            # triviality whatever the labels are
            if M not in structure_rigid_cache:
                cols = refine_colors(M)
                structure_rigid_cache[M] = len(set(cols)) == M.window
            if structure_rigid_cache[M]:
                return True
        return automorphism_search(M, point_colors=sample.labels) is None
    return automorphism_search(sample) is None


def _pair_matched_fraction(left, right, max_nodes: int = 20000) -> float:
    if isinstance(left, RealExpansion):
        return matched_fraction_labels(left, right)
    res = build_isomorphism(left, right, max_nodes=max_nodes)
    if isinstance(res, Failure):
        return len(res.best) / max(1, left.window)
    return 1.0


def classify(sampler: Sampler, window: int, trials: int,
             thresholds: Thresholds = DEFAULT_THRESHOLDS) -> DichotomyReport:
    """Freeness from single-sample automorphism searches, matching from
    independent sample pairs; verdict by the documented thresholds.

    The verdict is a deterministic function of (sampler, seed, window,
    trials, thresholds)."""
    if trials < 100:
        raise ValueError("classify needs trials >= 100")
    rigid = 0
    structure_rigid: dict = {}
    for t in range(trials):
        if _is_rigid(sampler.sample(window, trial=2 * t), structure_rigid):
            rigid += 1
    freeness = rigid / trials
    thr = pair_threshold(window, thresholds.coupling_c)
    fractions = []
    passes = 0
    for t in range(trials):
        left = sampler.sample(window, trial=2 * t)
        right = sampler.sample(window, trial=2 * t + 1)
        frac = _pair_matched_fraction(left, right)
        fractions.append(frac)
        if frac >= thr:
            passes += 1
    matching = sum(fractions) / trials
    pair_pass = passes / trials
    if pair_pass >= thresholds.transitive_pair_fraction:
        verdict = "TransitiveEvidence"
    elif freeness >= thresholds.free_min and matching <= thresholds.match_max:
        verdict = "FreeEvidence"
    elif (freeness <= thresholds.neither_free_max
          and pair_pass <= thresholds.neither_pair_fraction_max):
        verdict = "Neither"
    else:
        verdict = "Inconclusive"
    return DichotomyReport(
        sampler=sampler.token(),
        window=window,
        trials=trials,
        freeness_score=freeness,
        matching_score=matching,
        pair_pass_fraction=pair_pass,
        pair_threshold=thr,
        verdict=verdict,
        thresholds=thresholds,
    )


def transposition_probe(cat: CatalogId, window: int, trials: int, seed: int,
                        budget: int | None = None) -> dict:
    """For sampled pairs of distinct points, search for a tuple whose
    type separates them.  Proper catalogs separate every pair; the pure
    set separates none."""
    if window < 2:
        raise ValueError("window must be >= 2")
    budget = budget if budget is not None else 4 * window
    hits = 0
    for t in range(trials):
        x = rng.choice_index(window, seed, "tp", t, 0)
        y = rng.choice_index(window - 1, seed, "tp", t, 1)
        if y >= x:
            y += 1
        if separating_tuple(cat, x, y, budget) is not None:
            hits += 1
    return {
        "test": "transposition_probe",
        "catalog": cat.token(),
        "window": window,
        "trials": trials,
        "budget": budget,
        "success_rate": hits / trials,
    }
