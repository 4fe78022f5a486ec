"""Convex-geometry queries on distributions and convex sets."""
from __future__ import annotations

from prg_verify.geometry.hull import (
    grid_combinations,
    hull_membership,
    hull_reduce,
    intersect,
    mix,
    point_distribution,
    relation_convex_closure,
    set_refines,
    weighted_sum,
)

__all__ = [
    "grid_combinations",
    "hull_membership",
    "hull_reduce",
    "intersect",
    "mix",
    "point_distribution",
    "relation_convex_closure",
    "set_refines",
    "weighted_sum",
]
