"""Convex hull topology: construction, derived geometry, and validation.

The canonical hull representation used by every other module. Hulls are
built with quickhull (via scipy's qhull bindings) and post-processed into
a triangulated, consistently oriented topology with per-vertex adjacency,
per-face adjacency, and a Ritter bounding sphere.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import CapacityExceededError, DegenerateGeometryError

# 16-bit indices with 0xFFFF reserved as an empty-slot sentinel.
MAX_VERTICES = 65535
MAX_FACES = 65535


@dataclass
class PointSet:
    """An ordered collection of 3D points with a provenance label."""

    points: np.ndarray
    source_label: str = ""

    def __post_init__(self):
        self.points = np.ascontiguousarray(self.points, dtype=np.float64)
        if self.points.ndim != 2 or self.points.shape[1] != 3:
            raise ValueError(f"expected (n, 3) points, got {self.points.shape}")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("point set contains non-finite coordinates")

    def __len__(self) -> int:
        return len(self.points)


def sample_sphere(n: int, seed: int) -> PointSet:
    """Sample n points uniformly on the unit sphere, deterministically.

    Gaussian sampling followed by normalization; every point has unit norm
    to within floating-point rounding. Fixed seed gives a bit-identical
    sequence.
    """
    if n < 4:
        raise ValueError(f"need at least 4 points, got {n}")
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, 3))
    norms = np.linalg.norm(pts, axis=1)
    # A zero-norm draw has probability ~0 but would poison the division.
    while np.any(norms < 1e-12):
        bad = norms < 1e-12
        pts[bad] = rng.normal(size=(int(bad.sum()), 3))
        norms = np.linalg.norm(pts, axis=1)
    pts /= norms[:, None]
    return PointSet(pts, source_label=f"sphere(n={n}, seed={seed})")


@dataclass
class HullTopology:
    """A validated triangulated convex hull.

    vertices       -- (V, 3) float64 coordinates
    adjacency      -- per-vertex sorted arrays of neighbor vertex indices
                      (true polytope edges only)
    faces          -- (F, 3) vertex index triples, CCW seen from outside
    face_normals   -- (F, 3) unit outward normals
    face_adjacency -- (F, 3) face indices sharing an edge; entry k is
                      opposite vertex k of the face
    bounding_sphere -- (center, radius) enclosing every vertex
    """

    vertices: np.ndarray
    adjacency: list[np.ndarray]
    faces: np.ndarray
    face_normals: np.ndarray
    face_adjacency: np.ndarray
    bounding_sphere: tuple[np.ndarray, float]

    # cached aggregate, filled lazily
    _centroid: np.ndarray | None = field(default=None, repr=False)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_faces(self) -> int:
        return len(self.faces)

    @property
    def num_edges(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    @property
    def centroid(self) -> np.ndarray:
        if self._centroid is None:
            self._centroid = self.vertices.mean(axis=0)
        return self._centroid

    @property
    def radius(self) -> float:
        return self.bounding_sphere[1]


def bounding_sphere(hull: "HullTopology") -> tuple[np.ndarray, float]:
    """The hull's enclosing sphere (Ritter approximation, set at build time)."""
    return hull.bounding_sphere


def ritter_sphere(points: np.ndarray) -> tuple[np.ndarray, float]:
    """Ritter's two-pass approximate bounding sphere.

    Guaranteed to contain all points; radius is within 1.5x of the exact
    minimal sphere in practice (far better on typical inputs).
    """
    pts = np.asarray(points, dtype=np.float64)
    x = pts[0]
    y = pts[np.argmax(np.linalg.norm(pts - x, axis=1))]
    z = pts[np.argmax(np.linalg.norm(pts - y, axis=1))]
    center = 0.5 * (y + z)
    radius = 0.5 * np.linalg.norm(z - y)
    # growth pass: expand minimally for any point still outside
    for _ in range(2):
        dists = np.linalg.norm(pts - center, axis=1)
        worst = int(np.argmax(dists))
        d = dists[worst]
        if d <= radius:
            break
        radius = 0.5 * (radius + d)
        center = center + (d - radius) / d * (pts[worst] - center)
    # absorb rounding so containment checks with tight tolerances pass
    final = float(np.max(np.linalg.norm(pts - center, axis=1)))
    radius = max(radius, final) * (1.0 + 1e-12)
    return center, float(radius)


def build_hull(points: PointSet | np.ndarray) -> HullTopology:
    """Construct the convex hull topology of a point set.

    Coplanar facets are triangulated; every input point ends up inside or
    on the hull. Raises DegenerateGeometryError for flat/collinear input
    and CapacityExceededError past 65,535 vertices or faces.
    """
    if isinstance(points, PointSet):
        pts = points.points
    else:
        pts = PointSet(points).points
    if len(pts) < 4:
        raise DegenerateGeometryError(f"need at least 4 points, got {len(pts)}")

    try:
        qh = ConvexHull(pts)
    except QhullError as exc:
        raise DegenerateGeometryError(f"degenerate input: {exc}") from exc

    hull_idx = np.sort(qh.vertices)
    if len(hull_idx) > MAX_VERTICES:
        raise CapacityExceededError(f"{len(hull_idx)} hull vertices exceed {MAX_VERTICES}")
    if len(qh.simplices) > MAX_FACES:
        raise CapacityExceededError(f"{len(qh.simplices)} hull faces exceed {MAX_FACES}")

    remap = np.full(len(pts), -1, dtype=np.int64)
    remap[hull_idx] = np.arange(len(hull_idx))
    vertices = np.ascontiguousarray(pts[hull_idx])
    faces = remap[qh.simplices].astype(np.int32)
    face_adj = qh.neighbors.astype(np.int32).copy()

    normals = qh.equations[:, :3].astype(np.float64).copy()
    normals /= np.linalg.norm(normals, axis=1)[:, None]

    # orient faces CCW against the outward facet normal; swap the paired
    # adjacency columns so neighbor k stays opposite vertex k
    v0 = vertices[faces[:, 0]]
    cross = np.cross(vertices[faces[:, 1]] - v0, vertices[faces[:, 2]] - v0)
    flip = np.einsum("ij,ij->i", cross, normals) < 0.0
    faces[flip, 1], faces[flip, 2] = faces[flip, 2], faces[flip, 1].copy()
    face_adj[flip, 1], face_adj[flip, 2] = face_adj[flip, 2], face_adj[flip, 1].copy()

    adjacency = _adjacency_from_faces(len(vertices), faces)

    num_edges = sum(len(a) for a in adjacency) // 2
    v, f = len(vertices), len(faces)
    if v - num_edges + f != 2 or 2 * num_edges != 3 * f:
        raise DegenerateGeometryError(
            f"hull is not a closed triangulated 2-sphere: V={v} E={num_edges} F={f}"
        )

    return HullTopology(
        vertices=vertices,
        adjacency=adjacency,
        faces=faces,
        face_normals=normals,
        face_adjacency=face_adj,
        bounding_sphere=ritter_sphere(vertices),
    )


def _adjacency_from_faces(num_vertices: int, faces: np.ndarray) -> list[np.ndarray]:
    neighbor_sets: list[set[int]] = [set() for _ in range(num_vertices)]
    for a, b, c in faces:
        neighbor_sets[a].update((int(b), int(c)))
        neighbor_sets[b].update((int(a), int(c)))
        neighbor_sets[c].update((int(a), int(b)))
    return [np.array(sorted(s), dtype=np.int32) for s in neighbor_sets]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary(self) -> str:
        lines = [f"[{'PASS' if c.passed else 'FAIL'}] {c.name}" + (f": {c.detail}" if c.detail else "") for c in self.checks]
        return "\n".join(lines)


def validate_topology(hull: HullTopology) -> ValidationReport:
    """Check every HullTopology invariant; read-only, never raises."""
    checks = []
    v, f, e = hull.num_vertices, hull.num_faces, hull.num_edges
    center, radius = hull.bounding_sphere

    checks.append(CheckResult("vertex_capacity", v <= MAX_VERTICES, f"V={v}"))
    checks.append(
        CheckResult("euler_formula", v - e + f == 2 and 2 * e == 3 * f, f"V={v} E={e} F={f}")
    )

    norms = np.linalg.norm(hull.face_normals, axis=1)
    checks.append(
        CheckResult("normals_unit", bool(np.all(np.abs(norms - 1.0) <= 1e-9)),
                     f"max deviation {np.max(np.abs(norms - 1.0)):.2e}")
    )

    # outward: no vertex lies measurably in front of any face plane;
    # chunked so the (V, F) product never materializes at once
    centroids = hull.vertices[hull.faces].mean(axis=1)
    offsets = np.einsum("fj,fj->f", hull.face_normals, centroids)
    worst = -np.inf
    for lo in range(0, f, 1024):
        hi = min(lo + 1024, f)
        front = hull.vertices @ hull.face_normals[lo:hi].T - offsets[None, lo:hi]
        worst = max(worst, float(np.max(front)))
    checks.append(CheckResult("normals_outward", worst <= 1e-7 * radius, f"max plane excess {worst:.2e}"))

    sym = all(
        all(i in hull.adjacency[int(j)] for j in nbrs)
        for i, nbrs in enumerate(hull.adjacency)
    )
    checks.append(CheckResult("adjacency_symmetric", sym))

    fa_ok = True
    detail = ""
    for fi, nbrs in enumerate(hull.face_adjacency):
        if len(set(int(n) for n in nbrs)) != 3 or fi in nbrs:
            fa_ok = False
            detail = f"face {fi} neighbors {nbrs}"
            break
        fset = set(int(x) for x in hull.faces[fi])
        for g in nbrs:
            shared = fset & set(int(x) for x in hull.faces[int(g)])
            if len(shared) != 2:
                fa_ok = False
                detail = f"faces {fi},{g} share {len(shared)} vertices"
                break
        if not fa_ok:
            break
    checks.append(CheckResult("face_adjacency", fa_ok, detail))

    v0 = hull.vertices[hull.faces[:, 0]]
    cross = np.cross(hull.vertices[hull.faces[:, 1]] - v0, hull.vertices[hull.faces[:, 2]] - v0)
    ccw = bool(np.all(np.einsum("ij,ij->i", cross, hull.face_normals) > 0.0))
    checks.append(CheckResult("faces_ccw", ccw))

    dists = np.linalg.norm(hull.vertices - center, axis=1)
    inside = bool(np.all(dists <= radius * (1.0 + 1e-9)))
    checks.append(CheckResult("bounding_sphere", inside, f"max dist {np.max(dists):.6g} radius {radius:.6g}"))

    return ValidationReport(checks)
