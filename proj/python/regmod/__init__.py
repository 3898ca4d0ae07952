from ._core import (
    AspError,
    ParseError,
    Problem,
    emit_counterexample_search,
    emit_model_search,
    find_solver,
    gen_member_rev,
    parse,
    solve,
)

__all__ = [
    "AspError",
    "ParseError",
    "Problem",
    "emit_counterexample_search",
    "emit_model_search",
    "find_solver",
    "gen_member_rev",
    "parse",
    "solve",
]
