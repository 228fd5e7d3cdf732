"""Approximate monotone local search: running-time bases, discrete costs and planted-instance runs."""

from .core import (
    BoundResult,
    CaseTag,
    ConvergenceError,
    DomainError,
    GStarEval,
    amlsbound,
    brute_bound,
    entropy,
    esaamlsbound,
    g_star,
    g_value,
    kl_div,
    xi,
)
from .specs import OracleSpec, SpecError, SpecList, load_spec_file, parse_spec_text

__all__ = [
    "BoundResult",
    "CaseTag",
    "ConvergenceError",
    "DomainError",
    "GStarEval",
    "OracleSpec",
    "SpecError",
    "SpecList",
    "amlsbound",
    "brute_bound",
    "entropy",
    "esaamlsbound",
    "g_star",
    "g_value",
    "kl_div",
    "load_spec_file",
    "parse_spec_text",
    "xi",
]
