"""Sparse multivariate polynomials with complex coefficients and variable groups."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
RESERVED = frozenset({"i"})


@dataclass(frozen=True)
class Ring:
    """Ordered variables partitioned into groups, one projective factor per group.

    ``homogenizing[g]`` is the index of the designated homogenizing variable of
    group ``g`` (or ``None``).
    """

    variables: tuple[str, ...]
    groups: tuple[tuple[int, ...], ...] = None
    homogenizing: tuple[int | None, ...] = None

    def __post_init__(self):
        variables = tuple(self.variables)
        object.__setattr__(self, "variables", variables)
        for name in variables:
            if not _IDENT.match(name) or name in RESERVED:
                raise ValueError(f"invalid variable name {name!r}")
        if len(set(variables)) != len(variables):
            raise ValueError("duplicate variable names")
        groups = self.groups
        if groups is None:
            groups = (tuple(range(len(variables))),)
        groups = tuple(tuple(int(i) for i in g) for g in groups)
        flat = sorted(i for g in groups for i in g)
        if flat != list(range(len(variables))):
            raise ValueError("groups must partition the variable indices")
        if any(len(g) == 0 for g in groups):
            raise ValueError("empty variable group")
        object.__setattr__(self, "groups", groups)
        hom = self.homogenizing
        if hom is None:
            hom = (None,) * len(groups)
        hom = tuple(None if h is None else int(h) for h in hom)
        if len(hom) != len(groups):
            raise ValueError("one homogenizing entry per group is required")
        for g, h in zip(groups, hom):
            if h is not None and h not in g:
                raise ValueError("homogenizing variable must belong to its own group")
        object.__setattr__(self, "homogenizing", hom)

    @classmethod
    def from_names(cls, groups: Sequence[Sequence[str]], homogenizing: Sequence[str | None] | None = None) -> "Ring":
        variables = [name for g in groups for name in g]
        idx = {name: k for k, name in enumerate(variables)}
        gidx = tuple(tuple(idx[name] for name in g) for g in groups)
        hom = None
        if homogenizing is not None:
            hom = tuple(None if h is None else idx[h] for h in homogenizing)
        return cls(tuple(variables), gidx, hom)

    @property
    def nvars(self) -> int:
        return len(self.variables)

    @property
    def ngroups(self) -> int:
        return len(self.groups)

    def index(self, name: str | int) -> int:
        if isinstance(name, (int, np.integer)):
            if not 0 <= name < self.nvars:
                raise IndexError(name)
            return int(name)
        try:
            return self.variables.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    def group_of(self, var: str | int) -> int:
        i = self.index(var)
        for g, members in enumerate(self.groups):
            if i in members:
                return g
        raise AssertionError("unreachable")

    def group_names(self, g: int) -> tuple[str, ...]:
        return tuple(self.variables[i] for i in self.groups[g])

    def var(self, name: str | int) -> "MPoly":
        return MPoly.variable(self, name)

    def gens(self) -> tuple["MPoly", ...]:
        return tuple(MPoly.variable(self, i) for i in range(self.nvars))

    def fresh_name(self, stem: str) -> str:
        if stem not in self.variables:
            return stem
        k = 0
        while f"{stem}{k}" in self.variables:
            k += 1
        return f"{stem}{k}"


def _clean(c: complex) -> complex:
    # canonical coefficients: no signed zeros
    c = complex(c)
    return complex(c.real + 0.0, c.imag + 0.0)


def _grlex_key(e: tuple[int, ...]):
    return (sum(e), e)


class MPoly:
    """Immutable sparse polynomial: a map from exponent tuples to complex coefficients."""

    def __init__(self, ring: Ring, terms: Mapping[tuple[int, ...], complex] | Iterable = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        n = ring.nvars
        store: dict[tuple[int, ...], complex] = {}
        for e, c in items:
            e = tuple(int(k) for k in e)
            if len(e) != n:
                raise ValueError(f"exponent {e} has length {len(e)}, ring has {n} variables")
            if any(k < 0 for k in e):
                raise ValueError(f"negative exponent in {e}")
            c = complex(c)
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise ValueError("non-finite coefficient")
            store[e] = store.get(e, 0j) + c
        self.ring = ring
        self._terms = {e: _clean(c) for e, c in sorted(store.items(), key=lambda kv: _grlex_key(kv[0]), reverse=True) if c != 0}

    # construction helpers

    @classmethod
    def constant(cls, ring: Ring, c: complex) -> "MPoly":
        return cls(ring, {(0,) * ring.nvars: c})

    @classmethod
    def variable(cls, ring: Ring, name: str | int) -> "MPoly":
        e = [0] * ring.nvars
        e[ring.index(name)] = 1
        return cls(ring, {tuple(e): 1.0})

    @classmethod
    def linear(cls, ring: Ring, coeffs: Sequence[complex], variables: Sequence[str | int] | None = None,
               constant: complex = 0) -> "MPoly":
        """``sum coeffs[k] * variables[k] + constant``; ``variables`` defaults to all."""
        if variables is None:
            variables = range(ring.nvars)
        variables = [ring.index(v) for v in variables]
        if len(variables) != len(coeffs):
            raise ValueError("coefficient count does not match variable count")
        terms = []
        for v, c in zip(variables, coeffs):
            e = [0] * ring.nvars
            e[v] = 1
            terms.append((tuple(e), c))
        if constant:
            terms.append(((0,) * ring.nvars, constant))
        return cls(ring, terms)

    # basic queries

    @property
    def terms(self) -> Mapping[tuple[int, ...], complex]:
        return MappingProxyType(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __eq__(self, other) -> bool:
        if isinstance(other, MPoly):
            return self.ring == other.ring and self._terms == other._terms
        if isinstance(other, (int, float, complex)):
            return self == MPoly.constant(self.ring, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.ring, tuple(self._terms.items())))

    @property
    def degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def multidegree(self) -> tuple[int, ...]:
        """Per-group maximum of the summed exponents."""
        if not self._terms:
            raise ValueError("multidegree of the zero polynomial is undefined")
        return tuple(max(sum(e[i] for i in g) for e in self._terms) for g in self.ring.groups)

    def is_homogeneous(self) -> bool:
        """Homogeneous separately in every variable group."""
        if not self._terms:
            return True
        md = self.multidegree()
        return all(sum(e[i] for i in g) == d for e in self._terms for g, d in zip(self.ring.groups, md))

    def support(self) -> set[int]:
        return {i for e in self._terms for i, k in enumerate(e) if k}

    def coefficient_scale(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    # arithmetic

    def _coerce(self, other) -> "MPoly":
        if isinstance(other, MPoly):
            if other.ring != self.ring:
                raise ValueError("polynomials live in different rings")
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return MPoly.constant(self.ring, complex(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self._terms)
        for e, c in other._terms.items():
            terms[e] = terms.get(e, 0j) + c
        return MPoly(self.ring, terms)

    __radd__ = __add__

    def __neg__(self):
        return MPoly(self.ring, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return MPoly(self.ring, {e: c * other for e, c in self._terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms: dict[tuple[int, ...], complex] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, 0j) + c1 * c2
        return MPoly(self.ring, terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self * (1 / other)
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = MPoly.constant(self.ring, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # evaluation and calculus

    def evaluate(self, x: Sequence[complex]) -> complex:
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.ring.nvars,):
            raise ValueError(f"point has shape {x.shape}, expected ({self.ring.nvars},)")
        total = 0j
        for e, c in self._terms.items():
            m = c
            for xi, k in zip(x, e):
                if k:
                    m *= xi ** k
            total += m
        return complex(total)

    __call__ = evaluate

    def diff(self, var: str | int) -> "MPoly":
        j = self.ring.index(var)
        terms = {}
        for e, c in self._terms.items():
            k = e[j]
            if k:
                d = list(e)
                d[j] = k - 1
                terms[tuple(d)] = c * k
        return MPoly(self.ring, terms)

    def specialize(self, assignments: Mapping[str | int, complex]) -> "MPoly":
        """Substitute values for some variables; the result stays in the same ring."""
        assign = {self.ring.index(k): complex(v) for k, v in assignments.items()}
        terms: dict[tuple[int, ...], complex] = {}
        for e, c in self._terms.items():
            d = list(e)
            for j, v in assign.items():
                if d[j]:
                    c = c * v ** d[j]
                    d[j] = 0
            key = tuple(d)
            terms[key] = terms.get(key, 0j) + c
        return MPoly(self.ring, terms)

    def substitute(self, images: Mapping[str | int, "MPoly"]) -> "MPoly":
        """Replace variables by polynomials of the same ring."""
        images = {self.ring.index(k): v for k, v in images.items()}
        one = MPoly.constant(self.ring, 1)
        result = MPoly(self.ring)
        for e, c in self._terms.items():
            rest = list(e)
            term = one
            for j, img in images.items():
                if rest[j]:
                    term = term * img ** rest[j]
                    rest[j] = 0
            result = result + term * MPoly(self.ring, {tuple(rest): c})
        return result

    def univariate_coefficients(self, var: str | int) -> list[complex]:
        """Ascending coefficients in ``var``; every other variable must be absent."""
        j = self.ring.index(var)
        deg = 0
        for e in self._terms:
            if any(k for i, k in enumerate(e) if i != j):
                raise ValueError("polynomial involves variables other than the requested one")
            deg = max(deg, e[j])
        coeffs = [0j] * (deg + 1)
        for e, c in self._terms.items():
            coeffs[e[j]] += c
        return coeffs

    def recast(self, ring: Ring, mapping: Mapping[str, str] | None = None) -> "MPoly":
        """Move into ``ring`` matching variables by name (optionally renamed)."""
        mapping = mapping or {}
        target = []
        for name in self.ring.variables:
            target.append(ring.index(mapping.get(name, name)) if mapping.get(name, name) in ring.variables else None)
        terms = {}
        for e, c in self._terms.items():
            d = [0] * ring.nvars
            for k, t in zip(e, target):
                if k:
                    if t is None:
                        raise ValueError("variable absent from the target ring")
                    d[t] += k
            terms[tuple(d)] = c
        return MPoly(ring, terms)

    def homogenize(self, target_ring: Ring) -> "MPoly":
        """Homogenize group by group with each group's homogenizing variable.

        ``target_ring`` must contain this ring's variables (by name) plus one
        homogenizing variable per group.
        """
        p = self.recast(target_ring)
        if p.is_zero():
            return p
        hom = target_ring.homogenizing
        if any(h is None for h in hom):
            raise ValueError("every group of the target ring needs a homogenizing variable")
        groups = target_ring.groups
        degs = [max(sum(e[i] for i in g if i != h) for e in p._terms) for g, h in zip(groups, hom)]
        terms = {}
        for e, c in p._terms.items():
            d = list(e)
            for g, h, D in zip(groups, hom, degs):
                if d[h]:
                    raise ValueError("polynomial already involves the homogenizing variable")
                d[h] = D - sum(e[i] for i in g)
            terms[tuple(d)] = c
        return MPoly(target_ring, terms)

    def dehomogenize(self, ring: Ring) -> "MPoly":
        """Set every homogenizing variable to 1 and move into ``ring``."""
        hom = {h: 1.0 for h in self.ring.homogenizing if h is not None}
        return self.specialize(hom).recast(ring)

    # text

    def __str__(self) -> str:
        from ugen.algebra.text import format_poly

        return format_poly(self)

    def __repr__(self) -> str:
        return f"MPoly({str(self)!r})"


@dataclass(frozen=True)
class PolySystem:
    """An ordered tuple of polynomials over one ring."""

    ring: Ring
    polys: tuple[MPoly, ...] = field(default_factory=tuple)

    def __post_init__(self):
        polys = tuple(self.polys)
        object.__setattr__(self, "polys", polys)
        for p in polys:
            if p.ring != self.ring:
                raise ValueError("all polynomials of a system must share its ring")

    def __len__(self):
        return len(self.polys)

    def __iter__(self):
        return iter(self.polys)

    def __getitem__(self, k):
        return self.polys[k]

    def __add__(self, other: "PolySystem | Sequence[MPoly]") -> "PolySystem":
        extra = other.polys if isinstance(other, PolySystem) else tuple(other)
        return PolySystem(self.ring, self.polys + tuple(extra))

    def drop(self, k: int) -> "PolySystem":
        return PolySystem(self.ring, self.polys[:k] + self.polys[k + 1:])

    def multidegrees(self) -> list[tuple[int, ...]]:
        return [p.multidegree() for p in self.polys]

    def degrees(self) -> list[int]:
        return [p.degree for p in self.polys]

    def recast(self, ring: Ring) -> "PolySystem":
        return PolySystem(ring, tuple(p.recast(ring) for p in self.polys))

    def homogenize(self, ring: Ring) -> "PolySystem":
        return PolySystem(ring, tuple(p.homogenize(ring) for p in self.polys))

    @cached_property
    def _partials(self) -> list[list[MPoly]]:
        return [[p.diff(j) for j in range(self.ring.nvars)] for p in self.polys]

    def evaluate(self, x: Sequence[complex]) -> np.ndarray:
        return np.array([p.evaluate(x) for p in self.polys], dtype=complex)

    def jacobian(self, x: Sequence[complex]) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.ring.nvars,):
            raise ValueError(f"point has shape {x.shape}, expected ({self.ring.nvars},)")
        return np.array([[d.evaluate(x) for d in row] for row in self._partials], dtype=complex).reshape(
            len(self.polys), self.ring.nvars)
