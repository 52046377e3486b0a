"""Polynomials, systems, text form, batched evaluation and univariate roots."""

from ugen.algebra.compiled import CompiledSystem
from ugen.algebra.poly import MPoly, PolySystem, Ring
from ugen.algebra.text import ParseError, format_poly, parse_poly
from ugen.algebra.univariate import RootFindingError, univariate_roots

__all__ = [
    "CompiledSystem",
    "MPoly",
    "ParseError",
    "PolySystem",
    "Ring",
    "RootFindingError",
    "format_poly",
    "parse_poly",
    "univariate_roots",
]
