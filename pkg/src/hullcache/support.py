"""Support-point query backends.

Five interchangeable ways to answer "which hull vertex is farthest along
direction d": brute force over every vertex, warm-started hill climbing
on the true edge graph, and the three packed-layout traversals. All of
them return the same support value on a convex hull; they differ in how
much of the structure they touch, which the per-query stats record.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import fxtrig
from .hull import HullTopology
from .layouts import (
    FaceTraversingHull,
    InternallyConnectedHull,
    SphericalHull,
    WarmStartTable,
    build_face_traversing,
    build_internally_connected,
    build_spherical,
    compute_warm_starts,
)


@dataclass
class QueryStats:
    vertex_visits: int = 0
    face_visits: int = 0
    dot_products_evaluated: int = 0

    def accumulate(self, other: "QueryStats") -> None:
        self.vertex_visits += other.vertex_visits
        self.face_visits += other.face_visits
        self.dot_products_evaluated += other.dot_products_evaluated


@dataclass
class SupportQueryResult:
    vertex_index: int
    point: np.ndarray
    support_value: float
    stats: QueryStats


def check_direction(d) -> np.ndarray:
    d = np.asarray(d, dtype=np.float64).reshape(3)
    if not np.all(np.isfinite(d)):
        raise ValueError(f"direction has non-finite components: {d}")
    if float(np.linalg.norm(d)) <= 1e-300:
        raise ValueError("direction must be nonzero")
    return d


def _result(positions: np.ndarray, d: np.ndarray, idx: int, stats: QueryStats) -> SupportQueryResult:
    point = positions[idx]
    return SupportQueryResult(int(idx), point, float(d @ point), stats)


def support_naive(hull: HullTopology, d) -> SupportQueryResult:
    """Brute-force argmax of d.v over every vertex; the oracle backend."""
    d = check_direction(d)
    dots = hull.vertices @ d
    idx = int(np.argmax(dots))  # first max = lowest index on ties
    nv = hull.num_vertices
    return _result(hull.vertices, d, idx, QueryStats(nv, 0, nv))


def _climb_vertices(
    positions: np.ndarray,
    neighbors_of: Callable[[int], np.ndarray],
    start: int,
    d: np.ndarray,
    stats: QueryStats,
) -> int:
    """Greedy ascent on d.v: move to the best neighbor while it strictly improves."""
    cur = int(start)
    cur_val = float(positions[cur] @ d)
    stats.vertex_visits += 1
    stats.dot_products_evaluated += 1
    while True:
        nbrs = neighbors_of(cur)
        vals = positions[nbrs] @ d
        stats.dot_products_evaluated += len(nbrs)
        j = int(np.argmax(vals))
        if vals[j] > cur_val:
            cur = int(nbrs[j])
            cur_val = float(vals[j])
            stats.vertex_visits += 1
        else:
            return cur


def support_hill_climb(hull: HullTopology, d, start: int) -> SupportQueryResult:
    """Hill climb over the true polytope edges from an explicit start vertex."""
    d = check_direction(d)
    if not 0 <= start < hull.num_vertices:
        raise ValueError(f"start vertex {start} out of range")
    stats = QueryStats()
    idx = _climb_vertices(hull.vertices, lambda v: hull.adjacency[v], start, d, stats)
    return _result(hull.vertices, d, idx, stats)


def support_hill_climb_warm(hull: HullTopology, warm: WarmStartTable, d) -> SupportQueryResult:
    """Warm-started edge-graph hill climb (the Bullet-style baseline)."""
    d = check_direction(d)
    start = int(warm.start_vertices[warm.select(d)])
    stats = QueryStats()
    idx = _climb_vertices(hull.vertices, lambda v: hull.adjacency[v], start, d, stats)
    return _result(hull.vertices, d, idx, stats)


def support_internally_connected(ic: InternallyConnectedHull, d) -> SupportQueryResult:
    """Warm-started climb over the packed records' combined neighbor slots."""
    d = check_direction(d)
    start = int(ic.warm_starts.start_vertices[ic.warm_starts.select(d)])
    stats = QueryStats()
    idx = _climb_vertices(ic.positions, ic.neighbors, start, d, stats)
    return _result(ic.positions, d, idx, stats)


def _climb_faces(
    dot_of: Callable[[int], float],
    neighbors_list: list,
    start: int,
    stats: QueryStats,
) -> int:
    """Greedy ascent on normal.d over the face dual graph."""
    cur = int(start)
    cur_val = dot_of(cur)
    stats.face_visits += 1
    stats.dot_products_evaluated += 1
    while True:
        best = -1
        best_val = cur_val
        for g in neighbors_list[cur]:
            val = dot_of(g)
            if val > best_val:
                best, best_val = g, val
        stats.dot_products_evaluated += len(neighbors_list[cur])
        if best < 0:
            return cur
        cur = best
        cur_val = best_val
        stats.face_visits += 1


def support_face_traversing(ft: FaceTraversingHull, d) -> SupportQueryResult:
    """Face-normal ascent to the best-aligned face, then an exact vertex climb."""
    d = check_direction(d)
    dx, dy, dz = float(d[0]), float(d[1]), float(d[2])
    normals = ft.normals_list

    def dot_of(f: int) -> float:
        n = normals[f]
        return n[0] * dx + n[1] * dy + n[2] * dz

    warm = ft.warm_starts
    stats = QueryStats()
    face = _climb_faces(dot_of, ft.neighbors_list, int(warm.start_faces[warm.select(d)]), stats)
    anchor = int(ft.anchors[face])
    idx = _climb_vertices(ft.inner.positions, ft.inner.neighbors, anchor, d, stats)
    return _result(ft.inner.positions, d, idx, stats)


# scalar mirror of the fxtrig parabola, for the per-access decode below
_Q31_INV_SCALE = 2.0**-31
_QUARTER = fxtrig.QUARTER_TURN


def _sin_q31(raw: int) -> float:
    v = raw * _Q31_INV_SCALE
    s = 1.0 if v > 0.0 else (-1.0 if v < 0.0 else 0.0)
    return 4.0 * (v - s * v * v)


def _cos_q31(raw: int) -> float:
    return _sin_q31(((raw + _QUARTER + 0x80000000) & 0xFFFFFFFF) - 0x80000000)


def support_spherical(se: SphericalHull, d) -> SupportQueryResult:
    """Like the face traversal, but phase 1 decodes Q1.31 normals on access.

    The decoded normals carry approximation error, so phase 1 may stop on
    a slightly wrong face; the exact vertex climb still lands on the true
    support point.
    """
    d = check_direction(d)
    dx, dy, dz = float(d[0]), float(d[1]), float(d[2])
    azimuth, elevation = se.azimuth_list, se.elevation_list

    def dot_of(f: int) -> float:
        ce = _cos_q31(elevation[f])
        return (
            ce * _cos_q31(azimuth[f]) * dx
            + ce * _sin_q31(azimuth[f]) * dy
            + _sin_q31(elevation[f]) * dz
        )

    warm = se.warm_starts
    stats = QueryStats()
    face = _climb_faces(dot_of, se.neighbors_list, int(warm.start_faces[warm.select(d)]), stats)
    anchor = int(se.anchors[face])
    idx = _climb_vertices(se.inner.positions, se.inner.neighbors, anchor, d, stats)
    return _result(se.inner.positions, d, idx, stats)


# --- uniform backend interface for GJK and the benchmark harness ---------

METHOD_NAMES = ("naive", "bullet", "internally-connected", "face-traversing", "spherical")


@dataclass
class Backend:
    """A named support-query closure over one prepared hull."""

    name: str
    query: Callable[[np.ndarray], SupportQueryResult]
    centroid: np.ndarray
    hull: HullTopology = field(repr=False, default=None)


def build_backends(
    hull: HullTopology, methods=METHOD_NAMES, fill_radius_fraction: float = 0.2
) -> dict[str, Backend]:
    """Prepare the requested backends over a hull, sharing built structures."""
    unknown = set(methods) - set(METHOD_NAMES)
    if unknown:
        raise ValueError(f"unknown methods: {sorted(unknown)}")
    out: dict[str, Backend] = {}
    centroid = hull.centroid

    need_ic = {"internally-connected", "face-traversing", "spherical"} & set(methods)
    ic = build_internally_connected(hull, fill_radius_fraction) if need_ic else None

    if "naive" in methods:
        out["naive"] = Backend("naive", lambda d: support_naive(hull, d), centroid, hull)
    if "bullet" in methods:
        warm = compute_warm_starts(hull)
        out["bullet"] = Backend(
            "bullet", lambda d: support_hill_climb_warm(hull, warm, d), centroid, hull
        )
    if "internally-connected" in methods:
        out["internally-connected"] = Backend(
            "internally-connected", lambda d: support_internally_connected(ic, d), centroid, hull
        )
    if "face-traversing" in methods:
        ft = build_face_traversing(hull, inner=ic)
        out["face-traversing"] = Backend(
            "face-traversing", lambda d: support_face_traversing(ft, d), centroid, hull
        )
    if "spherical" in methods:
        se = build_spherical(hull, inner=ic)
        out["spherical"] = Backend(
            "spherical", lambda d: support_spherical(se, d), centroid, hull
        )
    return out
