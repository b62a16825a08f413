"""conjgen: generate and verify conjectured inequalities f < g.

Pipeline: build an integer dataset (prime-counting grids or simple-group
Cayley features), span a small basis of symmetric feature functions, descend
the sign-agreement loss to find coefficient vectors whose two sides order
consistently, snap the coefficients to small rationals, and hunt for
counterexamples over the full domain.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .function_space import (
    BasisFunction,
    CandidateConjecture,
    Dataset,
    FeatureBasis,
    canonical_difference,
    canonical_key,
    eval_candidate,
    parse_candidate,
    render,
    snap_candidate,
    snap_rational,
    symmetric_features,
)
from .group_algebra import (
    ConjugatedParams,
    DilationParam,
    FunctionPair,
    GroupElement,
    HParams,
    abc_from_mat,
    act,
    decompose_TH,
    fixed_point_witness,
    is_in_G,
    is_in_H,
    is_in_J1,
    is_in_J2,
    is_in_T,
    mat_from_abc,
    pair_norm,
    smooth_p_grid,
)
from .number_theory import (
    PrimePiTable,
    build_pi_table,
    grid_dataset,
    pi_grid,
    rosser_schoenfeld_check,
)
from .oracle import OracleConfig, OracleRun, run_oracle, run_search
from .simple_groups import (
    GroupRecord,
    Permutation,
    build_catalog,
    cayley_diameter,
    compose,
    element_order,
    group_closure,
    groups_dataset,
    trace,
)
from .verifier import DomainSpec, VerificationReport, margin_profile, verify

__all__ = [
    "BACKEND",
    "BasisFunction",
    "CandidateConjecture",
    "ConjugatedParams",
    "Dataset",
    "DilationParam",
    "DomainSpec",
    "FeatureBasis",
    "FunctionPair",
    "GroupElement",
    "GroupRecord",
    "HParams",
    "OracleConfig",
    "OracleRun",
    "Permutation",
    "PrimePiTable",
    "VerificationReport",
    "abc_from_mat",
    "act",
    "build_catalog",
    "build_pi_table",
    "canonical_difference",
    "canonical_key",
    "cayley_diameter",
    "compose",
    "decompose_TH",
    "element_order",
    "eval_candidate",
    "fixed_point_witness",
    "grid_dataset",
    "group_closure",
    "groups_dataset",
    "is_in_G",
    "is_in_H",
    "is_in_J1",
    "is_in_J2",
    "is_in_T",
    "margin_profile",
    "mat_from_abc",
    "pair_norm",
    "parse_candidate",
    "pi_grid",
    "render",
    "rosser_schoenfeld_check",
    "run_oracle",
    "run_search",
    "smooth_p_grid",
    "snap_candidate",
    "snap_rational",
    "symmetric_features",
    "trace",
    "verify",
]
