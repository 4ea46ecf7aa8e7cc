"""Well-formedness, subtyping and term typing, in variance or split mode."""
from .context import EMPTY, Context, TermBind, TypeBind, wf_context, wf_type
from .encode import encode_to_split, encode_variance
from .subtype import DEFAULT_FUEL, MODES, SPLIT, VARIANCE, SubtypeResult, is_subtype, subtype
from .typing import MUTATIONS, TypeErr, TypeFuelExhausted, check, prepare, typable, typeof

__all__ = [
    "DEFAULT_FUEL",
    "EMPTY",
    "MODES",
    "MUTATIONS",
    "SPLIT",
    "VARIANCE",
    "Context",
    "SubtypeResult",
    "TermBind",
    "TypeBind",
    "TypeErr",
    "TypeFuelExhausted",
    "check",
    "encode_to_split",
    "encode_variance",
    "is_subtype",
    "prepare",
    "subtype",
    "typable",
    "typeof",
    "wf_context",
    "wf_type",
]
