"""GJK distance and intersection queries over two posed convex hulls.

The distance sub-problem (closest point to the origin on a 1- to 4-point
simplex) uses the signed-volumes formulation: barycentric weights come
from cofactor ratios of the simplex matrix, and when the origin falls
outside a region the violated sub-simplices are searched recursively for
the minimum-norm point. Degenerate simplices reduce dimensionality by a
squared-volume test instead of failing.

Any support backend from `support` can drive the query; visit counters
from every support call are accumulated on the result.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .support import Backend, QueryStats

# squared-volume degeneracy threshold, relative to simplex scale
_DEGENERACY_REL = 1e-20


@dataclass
class Pose:
    """Rigid placement: world point = rotation @ local + translation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        self.rotation = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        self.translation = np.asarray(self.translation, dtype=np.float64).reshape(3)
        err = np.max(np.abs(self.rotation.T @ self.rotation - np.eye(3)))
        if err > 1e-9:
            raise ValueError(f"rotation is not orthonormal (max |R'R - I| = {err:.3e})")

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def translate(cls, offset) -> "Pose":
        return cls(np.eye(3), offset)

    def apply(self, local: np.ndarray) -> np.ndarray:
        return self.rotation @ local + self.translation

    def rotate_into(self, world_dir: np.ndarray) -> np.ndarray:
        """World direction expressed in the local frame."""
        return self.rotation.T @ world_dir


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform random rotation matrix from a normalized quaternion."""
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


@dataclass
class SimplexPoint:
    """One Minkowski-difference point tagged with its originating vertices."""

    point: np.ndarray  # support_a - support_b, world frame
    index_a: int
    index_b: int
    support_a: np.ndarray
    support_b: np.ndarray


@dataclass
class Simplex:
    points: list[SimplexPoint] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.points)

    def coords(self) -> np.ndarray:
        return np.array([p.point for p in self.points])


class GjkStatus(Enum):
    INTERSECTING = "intersecting"
    SEPARATED = "separated"


@dataclass
class GjkResult:
    status: GjkStatus
    distance: float
    witness_a: np.ndarray
    witness_b: np.ndarray
    iterations: int
    converged: bool
    simplex: Simplex
    stats: QueryStats
    trace: list | None = None

    @property
    def intersecting(self) -> bool:
        return self.status is GjkStatus.INTERSECTING


# --- signed-volumes subdistance -------------------------------------------


def _same_sign(a: float, b: float) -> bool:
    return (a > 0.0 and b > 0.0) or (a < 0.0 and b < 0.0)


def _s1d(s1: np.ndarray, s2: np.ndarray, scale2: float) -> np.ndarray:
    """Closest-point weights on a segment; keeps the newer point when degenerate."""
    diff = s2 - s1
    dd = float(diff @ diff)
    if dd <= _DEGENERACY_REL * scale2:
        return np.array([0.0, 1.0])
    t = -float(s1 @ diff) / dd  # origin projected onto the line, s1 + t*diff
    # axis with the largest shadow carries the sign information
    axis = int(np.argmax(np.abs(diff)))
    mu = s1[axis] - s2[axis]
    p_o = s1[axis] + t * diff[axis]
    c1 = p_o - s2[axis]
    c2 = s1[axis] - p_o
    if _same_sign(mu, c1) and _same_sign(mu, c2):
        return np.array([c1 / mu, c2 / mu])
    # outside the segment: closer endpoint wins
    if float(s1 @ s1) < float(s2 @ s2):
        return np.array([1.0, 0.0])
    return np.array([0.0, 1.0])


def _edge_fallback(pts: np.ndarray, scale2: float) -> np.ndarray:
    """Min-norm point over all edges of a degenerate triangle."""
    best = None
    best_d = math.inf
    for i, j in ((1, 2), (0, 2), (0, 1)):
        sub = _s1d(pts[i], pts[j], scale2)
        x = sub[0] * pts[i] + sub[1] * pts[j]
        d = float(x @ x)
        if d < best_d:
            lam = np.zeros(3)
            lam[i], lam[j] = sub
            best, best_d = lam, d
    return best


def _s2d(s1: np.ndarray, s2: np.ndarray, s3: np.ndarray, scale2: float) -> np.ndarray:
    pts = np.array([s1, s2, s3])
    n = np.cross(s2 - s1, s3 - s1)
    nn = float(n @ n)
    if nn <= _DEGENERACY_REL * scale2 * scale2:
        return _edge_fallback(pts, scale2)
    p_o = (float(n @ s1) / nn) * n  # origin projected onto the triangle plane

    # drop the axis where the triangle's shadow is largest
    mu = np.array(
        [
            s2[1] * s3[2] - s2[2] * s3[1] - s1[1] * s3[2] + s1[2] * s3[1] + s1[1] * s2[2] - s1[2] * s2[1],
            s2[0] * s3[2] - s2[2] * s3[0] - s1[0] * s3[2] + s1[2] * s3[0] + s1[0] * s2[2] - s1[2] * s2[0],
            s2[0] * s3[1] - s2[1] * s3[0] - s1[0] * s3[1] + s1[1] * s3[0] + s1[0] * s2[1] - s1[1] * s2[0],
        ]
    )
    drop = int(np.argmax(np.abs(mu)))
    m_max = mu[drop]
    keep = [k for k in range(3) if k != drop]
    q1, q2, q3, q_o = s1[keep], s2[keep], s3[keep], p_o[keep]

    # signed areas of (q_o, q_j, q_k) sub-triangles
    c = np.array(
        [
            q_o[0] * q2[1] + q_o[1] * q3[0] + q2[0] * q3[1] - q_o[0] * q3[1] - q_o[1] * q2[0] - q3[0] * q2[1],
            q_o[0] * q3[1] + q_o[1] * q1[0] + q3[0] * q1[1] - q_o[0] * q1[1] - q_o[1] * q3[0] - q1[0] * q3[1],
            q_o[0] * q1[1] + q_o[1] * q2[0] + q1[0] * q2[1] - q_o[0] * q2[1] - q_o[1] * q1[0] - q2[0] * q1[1],
        ]
    )
    inside = [_same_sign(m_max, ci) for ci in c]
    if all(inside):
        return c / m_max

    best = None
    best_d = math.inf
    for k, (i, j) in zip(range(3), ((1, 2), (0, 2), (0, 1))):
        if inside[k]:
            continue
        sub = _s1d(pts[i], pts[j], scale2)
        x = sub[0] * pts[i] + sub[1] * pts[j]
        d = float(x @ x)
        if d < best_d:
            lam = np.zeros(3)
            lam[i], lam[j] = sub
            best, best_d = lam, d
    return best


def _s3d(pts: np.ndarray, scale2: float) -> np.ndarray:
    s1, s2, s3, s4 = pts

    def det3(a, b, c):
        return float(a @ np.cross(b, c))

    c41 = -det3(s2, s3, s4)
    c42 = det3(s1, s3, s4)
    c43 = -det3(s1, s2, s4)
    c44 = det3(s1, s2, s3)
    m_det = c41 + c42 + c43 + c44

    degenerate = m_det * m_det <= _DEGENERACY_REL * scale2**3
    inside = [False] * 4 if degenerate else [_same_sign(m_det, c) for c in (c41, c42, c43, c44)]
    if all(inside):
        return np.array([c41, c42, c43, c44]) / m_det

    best = None
    best_d = math.inf
    faces = ((1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2))
    for k in range(4):
        if inside[k]:
            continue
        i, j, l = faces[k]
        sub = _s2d(pts[i], pts[j], pts[l], scale2)
        x = sub[0] * pts[i] + sub[1] * pts[j] + sub[2] * pts[l]
        d = float(x @ x)
        if d < best_d:
            lam = np.zeros(4)
            lam[i], lam[j], lam[l] = sub
            best, best_d = lam, d
    return best


def subdistance(points: np.ndarray) -> np.ndarray:
    """Barycentric weights of the min-norm point on a 1-4 point simplex.

    Zero weights mark points that do not support the closest point; the
    positive weights sum to 1 over the supporting sub-simplex.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    n = len(points)
    if not 1 <= n <= 4:
        raise ValueError(f"simplex must have 1-4 points, got {n}")
    scale2 = float(np.max(points * points)) * 3.0 + 1e-300
    if n == 1:
        return np.array([1.0])
    if n == 2:
        return _s1d(points[0], points[1], scale2)
    if n == 3:
        return _s2d(points[0], points[1], points[2], scale2)
    return _s3d(points, scale2)


def signed_volumes_closest(simplex: Simplex) -> tuple[np.ndarray, np.ndarray, Simplex]:
    """Closest point to the origin on a simplex's convex hull.

    Returns (closest point, barycentric weights over the reduced simplex,
    reduced simplex). Degenerate input reduces dimensionality, never fails.
    """
    lam = subdistance(simplex.coords())
    keep = [i for i, w in enumerate(lam) if w != 0.0]
    reduced = Simplex([simplex.points[i] for i in keep])
    weights = lam[keep]
    closest = weights @ reduced.coords()
    return closest, weights, reduced


# --- GJK driver ------------------------------------------------------------


def minkowski_support(
    backend_a: Backend, pose_a: Pose, backend_b: Backend, pose_b: Pose, d
) -> tuple[SimplexPoint, QueryStats]:
    """Support point of the configuration-space obstacle A - B along d."""
    d = np.asarray(d, dtype=np.float64).reshape(3)
    res_a = backend_a.query(pose_a.rotate_into(d))
    res_b = backend_b.query(pose_b.rotate_into(-d))
    a_world = pose_a.apply(res_a.point)
    b_world = pose_b.apply(res_b.point)
    stats = QueryStats()
    stats.accumulate(res_a.stats)
    stats.accumulate(res_b.stats)
    return (
        SimplexPoint(a_world - b_world, res_a.vertex_index, res_b.vertex_index, a_world, b_world),
        stats,
    )


def gjk_query(
    backend_a: Backend,
    pose_a: Pose,
    backend_b: Backend,
    pose_b: Pose,
    rel_tol: float = 1e-10,
    max_iter: int = 128,
    collect_trace: bool = False,
) -> GjkResult:
    """Distance / intersection query between two posed hulls.

    Separated results carry the distance and a witness point on each hull;
    intersection is detected by origin enclosure. Hitting max_iter returns
    the best estimate so far with converged=False.
    """
    if rel_tol <= 0.0:
        raise ValueError(f"rel_tol must be positive, got {rel_tol}")
    stats = QueryStats()
    trace: list | None = [] if collect_trace else None

    d0 = pose_a.apply(backend_a.centroid) - pose_b.apply(backend_b.centroid)
    if float(np.linalg.norm(d0)) < 1e-12:
        d0 = np.array([1.0, 0.0, 0.0])

    w, st = minkowski_support(backend_a, pose_a, backend_b, pose_b, d0)
    stats.accumulate(st)
    simplex = Simplex([w])
    lambdas = np.array([1.0])
    x = w.point.copy()
    scale = max(1.0, float(np.max(np.abs(x))))

    converged = False
    enclosed = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        xx = float(x @ x)
        if xx <= (1e-12 * scale) ** 2:
            enclosed = True
            converged = True
            break

        w, st = minkowski_support(backend_a, pose_a, backend_b, pose_b, -x)
        stats.accumulate(st)
        scale = max(scale, float(np.max(np.abs(w.point))))

        gap = xx - float(x @ w.point)
        if trace is not None:
            trace.append((math.sqrt(xx), float(x @ w.point) / math.sqrt(xx)))
        if gap <= rel_tol * xx:
            converged = True
            break
        # a repeated support point cannot improve the simplex
        if any(float(np.linalg.norm(w.point - p.point)) <= 1e-14 * scale for p in simplex.points):
            converged = True
            break

        simplex.points.append(w)
        x, lambdas, simplex = signed_volumes_closest(simplex)
        if len(simplex) == 4:
            enclosed = True
            converged = True
            break

    witness_a = lambdas @ np.array([p.support_a for p in simplex.points])
    witness_b = lambdas @ np.array([p.support_b for p in simplex.points])
    if enclosed:
        return GjkResult(
            GjkStatus.INTERSECTING, 0.0, witness_a, witness_b, iterations, converged, simplex, stats, trace
        )
    return GjkResult(
        GjkStatus.SEPARATED,
        float(np.linalg.norm(x)),
        witness_a,
        witness_b,
        iterations,
        converged,
        simplex,
        stats,
        trace,
    )
