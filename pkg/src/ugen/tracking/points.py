"""Points in products of projective spaces, their canonical form, and endpoint sorting."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

_TIE = 1e-12
_UNIT = 1e-14


def _normalize_factor(z: np.ndarray) -> np.ndarray:
    mags = np.abs(z)
    top = mags.max()
    if top == 0 or not np.isfinite(top):
        raise ValueError("cannot normalize a zero or non-finite factor")
    # first coordinate within a relative tie band of the maximum; keeps the
    # choice stable when the map is applied twice
    k = int(np.argmax(mags >= top * (1 - _TIE)))
    c = z[k]
    # complex division is not exact even for real c, so leave positive pivots alone
    w = np.array(z) if (c.imag == 0 and c.real > 0) else z * (np.conj(c) / abs(c))
    norm = np.sqrt(np.sum(np.abs(w) ** 2))
    if abs(norm - 1.0) > _UNIT:
        w = w / norm
    w[k] = complex(w[k].real, 0.0)
    return w


@dataclass(frozen=True, eq=False)
class MultiProjPoint:
    """Homogeneous coordinates for one point of a product of projective spaces.

    ``coords`` follows the ring's variable order; ``groups`` lists the variable
    indices of each factor.
    """

    coords: np.ndarray
    groups: tuple[tuple[int, ...], ...]
    status: str | None = field(default=None, compare=False)

    def __post_init__(self):
        coords = np.array(self.coords, dtype=complex).reshape(-1)
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "groups", tuple(tuple(int(i) for i in g) for g in self.groups))
        if not np.all(np.isfinite(coords)):
            raise ValueError("point coordinates must be finite")
        if sorted(i for g in self.groups for i in g) != list(range(coords.size)):
            raise ValueError("groups must partition the coordinate indices")

    @classmethod
    def single(cls, coords: Sequence[complex]) -> "MultiProjPoint":
        coords = np.asarray(coords, dtype=complex)
        return cls(coords, (tuple(range(coords.size)),))

    @property
    def nfactors(self) -> int:
        return len(self.groups)

    def factor(self, g: int) -> np.ndarray:
        return self.coords[list(self.groups[g])]

    def normalize(self) -> "MultiProjPoint":
        out = np.array(self.coords)
        for g in self.groups:
            idx = list(g)
            out[idx] = _normalize_factor(out[idx])
        return MultiProjPoint(out, self.groups, self.status)

    def with_status(self, status: str | None) -> "MultiProjPoint":
        return MultiProjPoint(self.coords, self.groups, status)

    def drop(self, indices: Iterable[int]) -> "MultiProjPoint":
        """Delete coordinates (e.g. cone variables), renumbering the groups."""
        gone = set(indices)
        keep = [i for i in range(self.coords.size) if i not in gone]
        new_index = {old: new for new, old in enumerate(keep)}
        groups = tuple(tuple(new_index[i] for i in g if i in new_index) for g in self.groups)
        if any(len(g) == 0 for g in groups):
            raise ValueError("dropping would empty a factor")
        return MultiProjPoint(self.coords[keep], groups, self.status)

    def distance(self, other: "MultiProjPoint") -> float:
        """Largest per-factor chordal distance (invariant under rescaling each factor)."""
        return float(max(_chordal(self.factor(g), other.factor(g)) for g in range(self.nfactors)))

    def bitwise_equal(self, other: "MultiProjPoint") -> bool:
        return self.groups == other.groups and self.coords.tobytes() == other.coords.tobytes()

    def __repr__(self):
        parts = ["[" + ":".join(f"{c:.6g}" for c in self.factor(g)) + "]" for g in range(self.nfactors)]
        return "MultiProjPoint(" + " x ".join(parts) + ")"


ProjPoint = MultiProjPoint


def _chordal(a: np.ndarray, b: np.ndarray) -> float:
    """``min_theta |a - e^{i theta} b|`` for unit-scaled a, b, without the cancellation in ``2 - 2|<a,b>|``."""
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    ov = np.vdot(b, a)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.linalg.norm(a - phase * b))


@dataclass(frozen=True)
class FiniteRule:
    """``coords[coord]`` (normalized) decides finiteness of ``factor``.

    With ``finite_when_small`` the point is finite when the magnitude is below the
    threshold (the cone coordinate convention); otherwise it is finite when the
    magnitude is at least the threshold (a homogenizing coordinate).
    """

    factor: int
    coord: int
    finite_when_small: bool


@dataclass(frozen=True)
class Verdict:
    finite: bool
    infinite_factors: tuple[int, ...] = ()


def classify_endpoint(p: MultiProjPoint, rules: Sequence[FiniteRule], threshold: float = 1e-6) -> Verdict:
    bad = []
    for rule in rules:
        small = abs(p.coords[rule.coord]) < threshold
        if small != rule.finite_when_small:
            bad.append(rule.factor)
    bad = tuple(sorted(set(bad)))
    return Verdict(not bad, bad)


def _stack(points: Sequence[MultiProjPoint]) -> list[np.ndarray]:
    groups = points[0].groups
    out = []
    for g in groups:
        block = np.stack([p.coords[list(g)] for p in points])
        block /= np.linalg.norm(block, axis=1, keepdims=True)
        out.append(block)
    return out


def pairwise_close(points: Sequence[MultiProjPoint], others: Sequence[MultiProjPoint], tol: float) -> np.ndarray:
    """Boolean matrix, entry (i, j) true when points i and j agree within ``tol``."""
    if not points or not others:
        return np.zeros((len(points), len(others)), dtype=bool)
    A, B = _stack(points), _stack(others)
    close = np.ones((len(points), len(others)), dtype=bool)
    for a, b in zip(A, B):
        overlap = np.abs(a.conj() @ b.T)
        dist = np.sqrt(np.clip(2.0 - 2.0 * np.minimum(overlap, 1.0), 0.0, None))
        # the cheap formula has an absolute error near 1e-8; settle borderline pairs exactly
        close &= dist <= tol + 1e-7
    for i, j in zip(*np.nonzero(close)):
        if max(_chordal(a[i], b[j]) for a, b in zip(A, B)) > tol:
            close[i, j] = False
    return close


def dedup_endpoints(points: Sequence[MultiProjPoint], tol: float = 1e-6) -> tuple[list[MultiProjPoint], list[int]]:
    """Greedy clustering; returns one representative per cluster and the cluster sizes."""
    points = list(points)
    if not points:
        return [], []
    close = pairwise_close(points, points, tol)
    assigned = np.zeros(len(points), dtype=bool)
    reps, sizes = [], []
    for i in range(len(points)):
        if assigned[i]:
            continue
        members = close[i] & ~assigned
        assigned |= members
        reps.append(points[i])
        sizes.append(int(members.sum()))
    return reps, sizes


def match_multisets(a: Sequence[MultiProjPoint], b: Sequence[MultiProjPoint], tol: float = 1e-6) -> bool:
    """True when ``a`` and ``b`` pair up one-to-one within ``tol``."""
    if len(a) != len(b):
        return False
    if not a:
        return True
    from scipy.optimize import linear_sum_assignment

    close = pairwise_close(list(a), list(b), tol)
    rows, cols = linear_sum_assignment(~close)
    return bool(close[rows, cols].all())
