"""Python access to the goalc compiler, oracle and BSN simulator."""

from ._goalc import (
    DomainError,
    Error,
    Formula,
    GoalModel,
    IoError,
    ParseError,
    __version__,
    compare,
    compile,
    emit_prism,
    formulas,
    load_model,
    oracle_cost,
    oracle_reliability,
    parse_model,
    simulate,
)

__all__ = [
    "DomainError",
    "Error",
    "Formula",
    "GoalModel",
    "IoError",
    "ParseError",
    "compare",
    "compile",
    "emit_prism",
    "formulas",
    "load_model",
    "oracle_cost",
    "oracle_reliability",
    "parse_model",
    "simulate",
]
