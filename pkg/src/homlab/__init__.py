"""homlab: a desk-scale laboratory for countable homogeneous structures.

Finite windows of generic limits, back-and-forth isomorphism search,
orbit partitions, invariant random expansions with statistical tests,
and exact invariant-random-subgroup experiments on finite permutation
groups.
"""

from .core import (
    FinPermutation,
    FinStructure,
    InputError,
    Language,
    QfType,
    act,
    induced,
    parse_structure,
    qf_type,
    render_structure,
)
from .catalog import (
    CatalogId,
    GeneratorState,
    age_member,
    extend_window,
    initial_state,
    one_point_types,
    window_structure,
    witness_extension,
)
from .backforth import (
    STUCK,
    Failure,
    PartialIso,
    Stuck,
    automorphism_search,
    build_isomorphism,
    extend_to_cover,
    try_extend,
    verify_partial_iso,
)
from .orbits import (
    GagbResult,
    OrbitPartition,
    acl_probe,
    gagb_check,
    separating_tuple,
    tuple_orbits,
)
from .ire import (
    BaseLaw,
    BernoulliShift,
    ErdosRenyi,
    Kaleidoscope,
    MixedIid,
    RealExpansion,
    Sampler,
    SinftyMixture,
    TwoGraphGraphing,
    UniformLinearOrder,
    definetti_decompose,
    dissociation_test,
    fixed_point_monitor,
    invariance_test,
    parse_sampler,
)
from .irs import (
    FiniteGroup,
    SubgroupValuedLaw,
    all_subgroups,
    aut_in_sym,
    coloring_stabilizer_trials,
    conjugate_subgroup,
    fix_points,
    label_action,
    mg_of_h,
    normalizer,
    realize_irs,
    stabilizer,
    symmetric_group,
    transitive_on_fix,
    trivial_group,
)
from .dichotomy import (
    DEFAULT_THRESHOLDS,
    DichotomyReport,
    Thresholds,
    classify,
    matched_fraction_labels,
    pair_threshold,
    transposition_probe,
)

__version__ = "0.1.0"
