"""Dyadic matrix-weight laboratory.

Thin re-export of the compiled core. Weights and families are opaque
handles; matrices cross as numpy arrays, serialized artifacts as JSON
text byte-compatible with the `mwlab` CLI.
"""

from ._core import (
    InvariantViolationError,
    MatrixWeight,
    NotSpdError,
    SparseFamily,
    a2,
    apply_sparse,
    bound_ratio,
    check,
    embedding_report,
    family_from_json,
    family_to_json,
    gen_weight,
    generate_sparse,
    instances,
    inverse_weight,
    maximal_lower_bound,
    mix_seed,
    packing_constant,
    proof_chain,
    sparse_norm,
    sweep,
    weight_from_json,
    weight_to_json,
)

__all__ = [
    "InvariantViolationError",
    "MatrixWeight",
    "NotSpdError",
    "SparseFamily",
    "a2",
    "apply_sparse",
    "bound_ratio",
    "check",
    "embedding_report",
    "family_from_json",
    "family_to_json",
    "gen_weight",
    "generate_sparse",
    "instances",
    "inverse_weight",
    "maximal_lower_bound",
    "mix_seed",
    "packing_constant",
    "proof_chain",
    "sparse_norm",
    "sweep",
    "weight_from_json",
    "weight_to_json",
]

__version__ = "0.1.0"
