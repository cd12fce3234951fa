"""Exact BV cohomology for spinning-particle models."""

from ._kernels import BACKEND
from .superpoly import (FieldDecl, FieldSymbol, Polynomial, Roster, VarRef,
                        canonical_form, grading, partial_derivative, serialize,
                        total_derivative)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "FieldDecl", "FieldSymbol", "Polynomial", "Roster", "VarRef",
    "canonical_form", "grading", "partial_derivative", "serialize",
    "total_derivative",
]
