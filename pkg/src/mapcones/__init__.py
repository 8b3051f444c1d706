"""Cones of positive linear maps between matrix algebras.

Choi-matrix representations of linear maps, cone duality with exact and
sampled membership/witness procedures, the trace-minus-conjugation family
of maps, and an executable verification suite for the structural identities
the package relies on.
"""

from .cones import (
    MEMBER,
    NOT_MEMBER,
    UNKNOWN,
    ConeGrammarError,
    MemberConfig,
    Verdict,
    dual_expr,
    format_cone,
    member,
    normalize,
    pair,
    parse_cone,
    recheck,
    witness_search,
)
from .family import (
    PhiLambdaSpec,
    brute_force_k_positivity,
    build,
    cp_threshold,
    k_positivity_threshold,
)
from .linalg import DimensionError, hs_inner, matrix_from_json, matrix_to_json
from .superop import (
    SuperOperator,
    ad_map,
    from_choi,
    from_kraus,
    identity_map,
    map_inner,
    superop_from_json,
    superop_to_json,
    trace_map,
    transpose_map,
    unvec,
    vec,
)
from .verifier import CheckReport, run_all

__version__ = "0.1.0"

__all__ = [
    "MEMBER",
    "NOT_MEMBER",
    "UNKNOWN",
    "ConeGrammarError",
    "MemberConfig",
    "Verdict",
    "DimensionError",
    "SuperOperator",
    "PhiLambdaSpec",
    "CheckReport",
    "ad_map",
    "brute_force_k_positivity",
    "build",
    "cp_threshold",
    "dual_expr",
    "format_cone",
    "from_choi",
    "from_kraus",
    "hs_inner",
    "identity_map",
    "k_positivity_threshold",
    "map_inner",
    "matrix_from_json",
    "matrix_to_json",
    "member",
    "normalize",
    "pair",
    "parse_cone",
    "recheck",
    "run_all",
    "superop_from_json",
    "superop_to_json",
    "trace_map",
    "transpose_map",
    "unvec",
    "vec",
    "witness_search",
]
