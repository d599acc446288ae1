"""Exact symbolic calculus of replica overlap polynomials, with a numeric oracle for the SK model."""

from .algebra import Polynomial, coefficient_sum, combine, equals, from_wire, to_wire
from .errors import CapacityError, DomainError, GraphParseError, ParityError, ReplicalcError
from .graph import EMPTY, VERTEX_CAP, GeneralizedGraph, canonicalize, inspect, parse, render
from .identities import (
    Catalog,
    IdentityRecord,
    adjudicate_tables,
    enumerate_monomials,
    generate_identities,
    verify_catalog,
)
from .operators import (
    DiagonalMode,
    apply_word,
    big_delta,
    big_delta_power,
    closed_form_delta,
    delta,
    delta_minus,
    delta_plus,
    fourth_order_check,
    higher_order_explore,
    wick,
    wick_delta_power,
)
from .report import Report

__version__ = "0.1.0"

__all__ = [
    "EMPTY",
    "VERTEX_CAP",
    "CapacityError",
    "Catalog",
    "DiagonalMode",
    "DomainError",
    "GeneralizedGraph",
    "GraphParseError",
    "IdentityRecord",
    "ParityError",
    "Polynomial",
    "Report",
    "ReplicalcError",
    "adjudicate_tables",
    "apply_word",
    "big_delta",
    "big_delta_power",
    "canonicalize",
    "closed_form_delta",
    "coefficient_sum",
    "combine",
    "delta",
    "delta_minus",
    "delta_plus",
    "enumerate_monomials",
    "equals",
    "fourth_order_check",
    "from_wire",
    "generate_identities",
    "higher_order_explore",
    "inspect",
    "parse",
    "render",
    "to_wire",
    "verify_catalog",
    "wick",
    "wick_delta_power",
]
