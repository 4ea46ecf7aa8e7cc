"""Abstract syntax, concrete grammar and binding machinery."""
from .ast import *  # noqa: F401,F403
from .ast import VARIANCES, is_value, loc_name
from .binding import (
    alpha_eq,
    canon_term,
    canon_type,
    desugar_self,
    desugar_self_in_term,
    erase_annotations,
    free_vars,
    fresh,
    has_self,
    map_term_types,
    subst,
    subst_term,
    subst_type,
    subst_type_in_term,
    subst_types,
    term_types,
)
from .jsondump import to_json
from .parser import ParseError, parse_term, parse_type
from .pretty import print_term, print_type

__all__ = [
    "VARIANCES",
    "ParseError",
    "alpha_eq",
    "canon_term",
    "canon_type",
    "desugar_self",
    "desugar_self_in_term",
    "erase_annotations",
    "free_vars",
    "fresh",
    "has_self",
    "is_value",
    "loc_name",
    "map_term_types",
    "parse_term",
    "parse_type",
    "print_term",
    "print_type",
    "subst",
    "subst_term",
    "subst_type",
    "subst_type_in_term",
    "subst_types",
    "term_types",
    "to_json",
]
