"""Homotopies, path tracking, and projective points."""

from ugen.tracking.homotopy import Homotopy, ReducedHomotopy, eliminate_by_row, make_straight_line
from ugen.tracking.points import (FiniteRule, MultiProjPoint, ProjPoint, Verdict, classify_endpoint,
                                  dedup_endpoints, match_multisets)
from ugen.tracking.tracker import PathResult, PathStatus, TrackerSettings, track_batch, track_path

__all__ = [
    "FiniteRule", "Homotopy", "MultiProjPoint", "PathResult", "PathStatus", "ProjPoint", "ReducedHomotopy",
    "TrackerSettings", "Verdict", "classify_endpoint", "dedup_endpoints", "eliminate_by_row",
    "make_straight_line", "match_multisets", "track_batch", "track_path",
]
