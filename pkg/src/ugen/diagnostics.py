"""Path accounting shared by every intersection routine and the CLI report."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

from ugen.tracking.tracker import PathResult, PathStatus


@dataclass
class Diagnostics:
    label: str
    paths: int = 0
    successes: int = 0
    at_infinity: int = 0
    failures: int = 0
    start_failures: int = 0
    distinct: int = 0
    cluster_sizes: list[int] = field(default_factory=list)
    status_counts: dict[str, int] = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_results(cls, label: str, results: Sequence[PathResult], cluster_sizes: Sequence[int] = (),
                     **extra) -> "Diagnostics":
        counts: dict[str, int] = {}
        for r in results:
            counts[r.status.value] = counts.get(r.status.value, 0) + 1
        ok = counts.get(PathStatus.SUCCESS.value, 0)
        inf = counts.get(PathStatus.AT_INFINITY.value, 0)
        start = counts.get(PathStatus.START_FAILURE.value, 0)
        return cls(label, len(results), ok, inf, len(results) - ok - inf, start, len(cluster_sizes),
                   list(cluster_sizes), counts, dict(extra))

    @property
    def balanced(self) -> bool:
        return self.paths == self.successes + self.at_infinity + self.failures

    def to_dict(self) -> dict:
        return asdict(self)

    def merged(self, other: "Diagnostics", label: str | None = None) -> "Diagnostics":
        counts = dict(self.status_counts)
        for k, v in other.status_counts.items():
            counts[k] = counts.get(k, 0) + v
        return Diagnostics(label or self.label, self.paths + other.paths, self.successes + other.successes,
                           self.at_infinity + other.at_infinity, self.failures + other.failures,
                           self.start_failures + other.start_failures, self.distinct + other.distinct,
                           self.cluster_sizes + other.cluster_sizes, counts, {**self.extra, **other.extra})
