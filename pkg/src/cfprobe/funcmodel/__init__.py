from .candidates import (
    BUILTIN_CATALOG,
    EVAL_TOL,
    IS_CF,
    NOT_CF,
    Builtin,
    CandidateFunction,
    CatalogEntry,
    Expression,
    SampleRangeError,
    Sampled,
    builtin,
    catalog_entry,
    evaluate,
    from_expression,
    from_samples,
    load_samples,
    validate,
)
from .expr import ExprError, Node, NotDifferentiable, derivatives, differentiate, parse_expression, to_text
from .measures import ProbabilityMeasure, measure_abs_laplace, measure_cf, point_mass, symmetric_pair

__all__ = [
    "BUILTIN_CATALOG", "EVAL_TOL", "IS_CF", "NOT_CF", "Builtin", "CandidateFunction",
    "CatalogEntry", "Expression", "SampleRangeError", "Sampled", "builtin", "catalog_entry",
    "evaluate", "from_expression", "from_samples", "load_samples", "validate",
    "ExprError", "Node", "NotDifferentiable", "derivatives", "differentiate",
    "parse_expression", "to_text",
    "ProbabilityMeasure", "measure_abs_laplace", "measure_cf", "point_mass", "symmetric_pair",
]
