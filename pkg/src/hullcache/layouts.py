"""Packed, cache-line-sized hull representations.

Three layouts are built from a HullTopology:

* InternallyConnectedHull -- one 64-byte record per vertex holding its
  coordinates and up to 19 neighbor indices, with 32-byte extension
  records chained for high-degree vertices. Slots left over after the
  true polytope edges are padded with "artificial" edges chosen near a
  fixed-radius sphere around the vertex, letting climbs skip ahead.
* FaceTraversingHull -- one 32-byte record per face (normal, 3 face
  neighbors, anchor vertex) plus the embedded vertex pool for the exact
  final climb.
* SphericalHull -- the face layout with normals compressed to two Q1.31
  spherical angles, 16 bytes per record.

All pools are allocated 64-byte aligned. Index 0xFFFF is the universal
empty-slot / null-reference sentinel, which caps usable indices at 65,535.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from . import fxtrig
from .errors import CapacityExceededError
from .hull import MAX_FACES, MAX_VERTICES, HullTopology

SENTINEL = 0xFFFF
CACHE_LINE = 64

VERTEX_RECORD_DTYPE = np.dtype(
    [("x", "<f8"), ("y", "<f8"), ("z", "<f8"), ("neighbors", "<u2", (19,)), ("extension", "<u2")]
)
EXTENSION_RECORD_DTYPE = np.dtype([("slots", "<u2", (15,)), ("next", "<u2")])
FACE_RECORD_DTYPE = np.dtype(
    [("nx", "<f8"), ("ny", "<f8"), ("nz", "<f8"), ("neighbors", "<u2", (3,)), ("anchor", "<u2")]
)
SPHERICAL_RECORD_DTYPE = np.dtype(
    [("azimuth", "<i4"), ("elevation", "<i4"), ("neighbors", "<u2", (3,)), ("anchor", "<u2")]
)

BASE_SLOTS = 19
EXTENSION_SLOTS = 15

# The six warm-start probe directions, in table order.
AXIS_DIRECTIONS = np.array(
    [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], dtype=np.float64
)


def check_record_sizes() -> None:
    """Assert the byte-size contract of every packed record type."""
    expected = {
        "vertex": (VERTEX_RECORD_DTYPE, 64),
        "extension": (EXTENSION_RECORD_DTYPE, 32),
        "face": (FACE_RECORD_DTYPE, 32),
        "spherical": (SPHERICAL_RECORD_DTYPE, 16),
    }
    for name, (dtype, size) in expected.items():
        if dtype.itemsize != size:
            raise AssertionError(f"{name} record is {dtype.itemsize} bytes, expected {size}")
    offs = {name: off for name, (_, off) in VERTEX_RECORD_DTYPE.fields.items()}
    if (offs["x"], offs["y"], offs["z"], offs["neighbors"], offs["extension"]) != (0, 8, 16, 24, 62):
        raise AssertionError(f"vertex record field offsets are wrong: {offs}")


check_record_sizes()


def aligned_pool(count: int, dtype: np.dtype, align: int = CACHE_LINE) -> np.ndarray:
    """Allocate a zeroed record array whose base address is `align`-aligned."""
    nbytes = count * dtype.itemsize
    backing = np.zeros(nbytes + align, dtype=np.uint8)
    offset = (-backing.ctypes.data) % align
    pool = backing[offset : offset + nbytes].view(dtype)
    assert count == 0 or pool.ctypes.data % align == 0
    return pool


@dataclass
class WarmStartTable:
    """Per-axis extreme vertex and face indices for +-X, +-Y, +-Z."""

    start_vertices: np.ndarray  # (6,) int32
    start_faces: np.ndarray  # (6,) int32

    def select(self, direction: np.ndarray) -> int:
        """Index of the table axis most aligned with `direction`."""
        return int(np.argmax(AXIS_DIRECTIONS @ direction))


def compute_warm_starts(hull: HullTopology) -> WarmStartTable:
    """Precompute the argmax vertex and face for each signed axis."""
    vert_dots = hull.vertices @ AXIS_DIRECTIONS.T  # (V, 6)
    face_dots = hull.face_normals @ AXIS_DIRECTIONS.T  # (F, 6)
    return WarmStartTable(
        start_vertices=np.argmax(vert_dots, axis=0).astype(np.int32),
        start_faces=np.argmax(face_dots, axis=0).astype(np.int32),
    )


def select_artificial_neighbors(
    hull: HullTopology, vertex: int, count: int, radius: float
) -> np.ndarray:
    """Rank non-neighbor vertices by closeness to a sphere around `vertex`.

    Candidates exclude the vertex itself and its true neighbors; they are
    ordered by abs(distance - radius) ascending, ties by ascending index.
    Returns at most `count` indices (fewer when candidates run out).
    """
    if radius <= 0.0:
        raise ValueError(f"radius must be positive, got {radius}")
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    if count == 0:
        return np.empty(0, dtype=np.int32)
    mask = np.ones(hull.num_vertices, dtype=bool)
    mask[vertex] = False
    mask[hull.adjacency[vertex]] = False
    candidates = np.flatnonzero(mask)
    if len(candidates) == 0:
        return np.empty(0, dtype=np.int32)
    dist = np.linalg.norm(hull.vertices[candidates] - hull.vertices[vertex], axis=1)
    score = np.abs(dist - radius)
    if count < len(candidates):
        # narrow to the k best scores first; ties at the cutoff stay in
        rough = np.argpartition(score, count - 1)[:count]
        cutoff = float(np.max(score[rough]))
        eligible = np.flatnonzero(score <= cutoff)
        candidates, score = candidates[eligible], score[eligible]
    order = np.lexsort((candidates, score))
    return candidates[order[:count]].astype(np.int32)


@dataclass
class InternallyConnectedHull:
    """64-byte vertex records with artificial edges and extension chains."""

    vertex_pool: np.ndarray  # VERTEX_RECORD_DTYPE, 64-byte aligned
    extension_pool: np.ndarray  # EXTENSION_RECORD_DTYPE
    warm_starts: WarmStartTable
    fill_radius: float
    positions: np.ndarray = field(default=None, repr=False)  # (V, 3) view of pool coords
    _neighbor_cache: list = field(default=None, repr=False)

    def __post_init__(self):
        if self.positions is None:
            self.positions = np.column_stack(
                [self.vertex_pool["x"], self.vertex_pool["y"], self.vertex_pool["z"]]
            )
        if self._neighbor_cache is None:
            self._neighbor_cache = [
                combined_neighbors(self, v) for v in range(len(self.vertex_pool))
            ]

    @property
    def num_vertices(self) -> int:
        return len(self.vertex_pool)

    def neighbors(self, vertex: int) -> np.ndarray:
        """Combined (true + artificial) neighbor indices of a vertex."""
        return self._neighbor_cache[vertex]


def combined_neighbors(ic: InternallyConnectedHull, vertex: int) -> np.ndarray:
    """Walk a vertex record and its extension chain, collecting every slot."""
    record = ic.vertex_pool[vertex]
    slots = record["neighbors"]
    out = [slots[slots != SENTINEL]]
    ext = int(record["extension"])
    hops = 0
    while ext != SENTINEL:
        if hops > len(ic.extension_pool):
            raise AssertionError(f"extension chain of vertex {vertex} does not terminate")
        rec = ic.extension_pool[ext]
        slots = rec["slots"]
        out.append(slots[slots != SENTINEL])
        ext = int(rec["next"])
        hops += 1
    return np.concatenate(out).astype(np.int32)


def build_internally_connected(
    hull: HullTopology, fill_radius_fraction: float = 0.2
) -> InternallyConnectedHull:
    """Pack a hull into 64-byte vertex records with artificial-edge padding.

    True neighbors are stored first (base record, then extensions in
    order); artificial neighbors fill the remaining slots of the base
    record, or of the last extension when the vertex needed extensions.
    Extensions are never allocated for artificial edges alone.
    """
    if not 0.0 < fill_radius_fraction <= 1.0:
        raise ValueError(f"fill_radius_fraction must be in (0, 1], got {fill_radius_fraction}")
    nv = hull.num_vertices
    if nv > MAX_VERTICES:
        raise CapacityExceededError(f"{nv} vertices exceed {MAX_VERTICES}")

    radius = fill_radius_fraction * hull.radius
    pool = aligned_pool(nv, VERTEX_RECORD_DTYPE)
    pool["x"], pool["y"], pool["z"] = hull.vertices.T
    pool["neighbors"][:] = SENTINEL
    pool["extension"][:] = SENTINEL

    ext_chunks: list[np.ndarray] = []  # (slots, next) filled after allocation
    ext_links: list[int] = []

    for v in range(nv):
        true_nb = hull.adjacency[v]
        if len(true_nb) <= BASE_SLOTS:
            fill = select_artificial_neighbors(hull, v, BASE_SLOTS - len(true_nb), radius)
            slots = np.concatenate([true_nb, fill])
            pool[v]["neighbors"][: len(slots)] = slots
        else:
            pool[v]["neighbors"][:] = true_nb[:BASE_SLOTS]
            rest = true_nb[BASE_SLOTS:]
            n_ext = -(-len(rest) // EXTENSION_SLOTS)
            pad = n_ext * EXTENSION_SLOTS - len(rest)
            fill = select_artificial_neighbors(hull, v, pad, radius)
            tail = np.concatenate([rest, fill])
            first = len(ext_chunks)
            for k in range(n_ext):
                chunk = tail[k * EXTENSION_SLOTS : (k + 1) * EXTENSION_SLOTS]
                ext_chunks.append(chunk)
                ext_links.append(first + k + 1 if k + 1 < n_ext else SENTINEL)
            pool[v]["extension"] = first

    if len(ext_chunks) > SENTINEL - 1:
        raise CapacityExceededError(f"{len(ext_chunks)} extension records exceed {SENTINEL - 1}")
    ext_pool = aligned_pool(len(ext_chunks), EXTENSION_RECORD_DTYPE)
    ext_pool["slots"][:] = SENTINEL
    for i, (chunk, nxt) in enumerate(zip(ext_chunks, ext_links)):
        ext_pool[i]["slots"][: len(chunk)] = chunk
        ext_pool[i]["next"] = nxt

    return InternallyConnectedHull(
        vertex_pool=pool,
        extension_pool=ext_pool,
        warm_starts=compute_warm_starts(hull),
        fill_radius=radius,
    )


def _face_anchors(hull: HullTopology) -> np.ndarray:
    """Per face, the vertex most aligned with the face normal (min index on ties).

    Dots are evaluated per corner with the scalar product so the choice is
    reproducible by any caller re-evaluating v @ n.
    """
    anchors = np.empty(hull.num_faces, dtype=np.int32)
    for f in range(hull.num_faces):
        n = hull.face_normals[f]
        corners = hull.faces[f]
        dots = [float(hull.vertices[v] @ n) for v in corners]
        best = max(dots)
        anchors[f] = min(int(v) for v, val in zip(corners, dots) if val == best)
    return anchors


@dataclass
class FaceTraversingHull:
    """32-byte face records over the hull's dual graph, plus the vertex pool."""

    face_pool: np.ndarray  # FACE_RECORD_DTYPE, 64-byte aligned
    warm_starts: WarmStartTable
    inner: InternallyConnectedHull
    normals: np.ndarray = field(default=None, repr=False)  # (F, 3) from pool
    face_neighbors: np.ndarray = field(default=None, repr=False)  # (F, 3) int32
    anchors: np.ndarray = field(default=None, repr=False)  # (F,) int32
    # plain-python mirrors; element access in the climb loop is much
    # cheaper than per-element ndarray indexing
    normals_list: list = field(default=None, repr=False)
    neighbors_list: list = field(default=None, repr=False)

    def __post_init__(self):
        if self.normals is None:
            self.normals = np.column_stack(
                [self.face_pool["nx"], self.face_pool["ny"], self.face_pool["nz"]]
            )
        if self.face_neighbors is None:
            self.face_neighbors = self.face_pool["neighbors"].astype(np.int32)
        if self.anchors is None:
            self.anchors = self.face_pool["anchor"].astype(np.int32)
        if self.normals_list is None:
            self.normals_list = self.normals.tolist()
        if self.neighbors_list is None:
            self.neighbors_list = self.face_neighbors.tolist()

    @property
    def num_faces(self) -> int:
        return len(self.face_pool)


def build_face_traversing(
    hull: HullTopology,
    fill_radius_fraction: float = 0.2,
    inner: InternallyConnectedHull | None = None,
) -> FaceTraversingHull:
    """Pack face-normal records for dual-graph traversal."""
    nf = hull.num_faces
    if nf > MAX_FACES:
        raise CapacityExceededError(f"{nf} faces exceed {MAX_FACES}")
    pool = aligned_pool(nf, FACE_RECORD_DTYPE)
    pool["nx"], pool["ny"], pool["nz"] = hull.face_normals.T
    pool["neighbors"][:] = hull.face_adjacency
    pool["anchor"][:] = _face_anchors(hull)
    if inner is None:
        inner = build_internally_connected(hull, fill_radius_fraction)
    return FaceTraversingHull(
        face_pool=pool,
        warm_starts=compute_warm_starts(hull),
        inner=inner,
    )


@dataclass
class SphericalHull:
    """16-byte face records with Q1.31 spherical-encoded normals."""

    face_pool: np.ndarray  # SPHERICAL_RECORD_DTYPE, 64-byte aligned
    warm_starts: WarmStartTable
    inner: InternallyConnectedHull
    azimuth_raw: np.ndarray = field(default=None, repr=False)  # (F,) int32
    elevation_raw: np.ndarray = field(default=None, repr=False)
    face_neighbors: np.ndarray = field(default=None, repr=False)
    anchors: np.ndarray = field(default=None, repr=False)
    azimuth_list: list = field(default=None, repr=False)
    elevation_list: list = field(default=None, repr=False)
    neighbors_list: list = field(default=None, repr=False)

    def __post_init__(self):
        if self.azimuth_raw is None:
            self.azimuth_raw = self.face_pool["azimuth"].copy()
        if self.elevation_raw is None:
            self.elevation_raw = self.face_pool["elevation"].copy()
        if self.face_neighbors is None:
            self.face_neighbors = self.face_pool["neighbors"].astype(np.int32)
        if self.anchors is None:
            self.anchors = self.face_pool["anchor"].astype(np.int32)
        if self.azimuth_list is None:
            self.azimuth_list = self.azimuth_raw.tolist()
        if self.elevation_list is None:
            self.elevation_list = self.elevation_raw.tolist()
        if self.neighbors_list is None:
            self.neighbors_list = self.face_neighbors.tolist()

    @property
    def num_faces(self) -> int:
        return len(self.face_pool)

    def decoded_normal(self, face: int) -> np.ndarray:
        return fxtrig.decode_normal_raw(self.azimuth_raw[face], self.elevation_raw[face])


def build_spherical(
    hull: HullTopology,
    fill_radius_fraction: float = 0.2,
    inner: InternallyConnectedHull | None = None,
) -> SphericalHull:
    """Pack spherical-encoded face records; connectivity matches the face layout."""
    nf = hull.num_faces
    if nf > MAX_FACES:
        raise CapacityExceededError(f"{nf} faces exceed {MAX_FACES}")
    pool = aligned_pool(nf, SPHERICAL_RECORD_DTYPE)
    pool["azimuth"], pool["elevation"] = fxtrig.encode_normal_raw(hull.face_normals)
    pool["neighbors"][:] = hull.face_adjacency
    pool["anchor"][:] = _face_anchors(hull)
    if inner is None:
        inner = build_internally_connected(hull, fill_radius_fraction)
    return SphericalHull(
        face_pool=pool,
        warm_starts=compute_warm_starts(hull),
        inner=inner,
    )


# --- binary serialization ------------------------------------------------

MAGIC = b"HCL1"
_KIND_DTYPES = {
    1: VERTEX_RECORD_DTYPE,
    2: EXTENSION_RECORD_DTYPE,
    3: FACE_RECORD_DTYPE,
    4: SPHERICAL_RECORD_DTYPE,
}
KIND_VERTEX, KIND_EXTENSION, KIND_FACE, KIND_SPHERICAL, KIND_WARMSTART = 1, 2, 3, 4, 5
_HEADER = struct.Struct("<4sHHI")  # magic, kind, reserved, record count


def write_section(fh, kind: int, payload: bytes, count: int) -> None:
    fh.write(_HEADER.pack(MAGIC, kind, 0, count))
    fh.write(payload)


def write_pool(fh, kind: int, pool: np.ndarray) -> None:
    write_section(fh, kind, pool.tobytes(), len(pool))


def write_warm_starts(fh, table: WarmStartTable) -> None:
    payload = table.start_vertices.astype("<u2").tobytes() + table.start_faces.astype("<u2").tobytes()
    write_section(fh, KIND_WARMSTART, payload, 1)


def read_sections(fh) -> dict:
    """Read every section of a layout file; returns {kind: pool-or-table}."""
    out = {}
    while True:
        header = fh.read(_HEADER.size)
        if not header:
            break
        magic, kind, _, count = _HEADER.unpack(header)
        if magic != MAGIC:
            raise ValueError(f"bad section magic {magic!r}")
        if kind == KIND_WARMSTART:
            payload = fh.read(24)
            vals = np.frombuffer(payload, dtype="<u2")
            out[kind] = WarmStartTable(
                start_vertices=vals[:6].astype(np.int32),
                start_faces=vals[6:].astype(np.int32),
            )
            continue
        dtype = _KIND_DTYPES.get(kind)
        if dtype is None:
            raise ValueError(f"unknown section kind {kind}")
        payload = fh.read(count * dtype.itemsize)
        if len(payload) != count * dtype.itemsize:
            raise ValueError(f"truncated section kind {kind}")
        pool = aligned_pool(count, dtype)
        pool[:] = np.frombuffer(payload, dtype=dtype)
        out[kind] = pool
    return out


def save_internally_connected(path, ic: InternallyConnectedHull) -> None:
    with open(path, "wb") as fh:
        write_pool(fh, KIND_VERTEX, ic.vertex_pool)
        write_pool(fh, KIND_EXTENSION, ic.extension_pool)
        write_warm_starts(fh, ic.warm_starts)


def load_internally_connected(path) -> InternallyConnectedHull:
    with open(path, "rb") as fh:
        sections = read_sections(fh)
    return InternallyConnectedHull(
        vertex_pool=sections[KIND_VERTEX],
        extension_pool=sections[KIND_EXTENSION],
        warm_starts=sections[KIND_WARMSTART],
        fill_radius=float("nan"),
    )
