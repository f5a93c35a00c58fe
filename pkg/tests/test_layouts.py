import io

import numpy as np
import pytest

from hullcache.fxtrig import decode_normal_raw
from hullcache.hull import build_hull
from hullcache.layouts import (
    AXIS_DIRECTIONS,
    EXTENSION_RECORD_DTYPE,
    FACE_RECORD_DTYPE,
    KIND_EXTENSION,
    KIND_VERTEX,
    KIND_WARMSTART,
    SENTINEL,
    SPHERICAL_RECORD_DTYPE,
    VERTEX_RECORD_DTYPE,
    aligned_pool,
    build_face_traversing,
    build_internally_connected,
    build_spherical,
    check_record_sizes,
    combined_neighbors,
    compute_warm_starts,
    read_sections,
    select_artificial_neighbors,
    write_pool,
    write_warm_starts,
)



def test_record_sizes_and_offsets():
    check_record_sizes()
    assert VERTEX_RECORD_DTYPE.itemsize == 64
    assert EXTENSION_RECORD_DTYPE.itemsize == 32
    assert FACE_RECORD_DTYPE.itemsize == 32
    assert SPHERICAL_RECORD_DTYPE.itemsize == 16


def test_pool_alignment():
    for dtype in (VERTEX_RECORD_DTYPE, EXTENSION_RECORD_DTYPE, FACE_RECORD_DTYPE, SPHERICAL_RECORD_DTYPE):
        for count in (1, 3, 17, 1000):
            pool = aligned_pool(count, dtype)
            assert pool.ctypes.data % 64 == 0


# --- artificial neighbor selection ----------------------------------------


def test_select_artificial_tetrahedron_empty(tetra_hull):
    got = select_artificial_neighbors(tetra_hull, 0, count=5, radius=1.0)
    assert len(got) == 0


def test_select_artificial_ranks_by_sphere_distance():
    # vertex 0 at origin; non-neighbors at distances 0.5, 1.0, 2.0 from it
    # rank for radius 1: |1-1|=0 < |0.5-1|=0.5 < |2-1|=1
    pts = np.array(
        [
            [0.0, 0.0, 0.0],
            [0.5, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 2.0],
            [-3.0, -3.0, -3.0],
        ]
    )

    class FakeHull:
        num_vertices = 5
        vertices = pts
        adjacency = [np.array([4], dtype=np.int32)] + [np.array([0], dtype=np.int32)] * 4

    got = select_artificial_neighbors(FakeHull(), 0, count=2, radius=1.0)
    assert list(got) == [2, 1]


def test_select_artificial_matches_bruteforce(sphere_hull_512):
    hull = sphere_hull_512
    radius = 0.2 * hull.radius
    rng = np.random.default_rng(0)
    for v in rng.integers(0, hull.num_vertices, size=25):
        v = int(v)
        got = select_artificial_neighbors(hull, v, count=10, radius=radius)
        # brute-force oracle: full sort of every non-neighbor
        banned = set(int(j) for j in hull.adjacency[v]) | {v}
        cands = [u for u in range(hull.num_vertices) if u not in banned]
        key = lambda u: (abs(np.linalg.norm(hull.vertices[u] - hull.vertices[v]) - radius), u)
        want = sorted(cands, key=key)[:10]
        assert list(got) == want


def test_select_artificial_argument_checks(sphere_hull_512):
    with pytest.raises(ValueError):
        select_artificial_neighbors(sphere_hull_512, 0, count=1, radius=0.0)
    with pytest.raises(ValueError):
        select_artificial_neighbors(sphere_hull_512, 0, count=-1, radius=1.0)


# --- internally connected layout -------------------------------------------


def test_octahedron_records(octa_hull):
    ic = build_internally_connected(octa_hull)
    assert len(ic.extension_pool) == 0
    for v in range(6):
        rec = ic.vertex_pool[v]
        slots = rec["neighbors"]
        used = slots[slots != SENTINEL]
        # 4 true neighbors + the single non-neighbor (the antipode)
        assert len(used) == 5
        assert rec["extension"] == SENTINEL
        true_nb = set(int(j) for j in octa_hull.adjacency[v])
        assert set(int(s) for s in slots[:4]) == true_nb
        assert np.all(slots[5:] == SENTINEL)


def test_frustum_apex_extension_chain(frustum_hull):
    hull = frustum_hull
    apex = int(np.argmax(hull.vertices[:, 2]))
    assert len(hull.adjacency[apex]) == 40

    ic = build_internally_connected(hull)
    rec = ic.vertex_pool[apex]
    assert np.all(rec["neighbors"] != SENTINEL)

    ext1 = ic.extension_pool[int(rec["extension"])]
    assert np.all(ext1["slots"] != SENTINEL)
    ext2 = ic.extension_pool[int(ext1["next"])]
    assert int(ext2["next"]) == SENTINEL

    combined = combined_neighbors(ic, apex)
    true_nb = set(int(j) for j in hull.adjacency[apex])
    # base 19 + 15 + 6 true across the chain, then artificial padding
    assert set(int(i) for i in combined[:40]) == true_nb
    tail = ext2["slots"][6:]
    assert np.all(tail != SENTINEL)  # padded with artificial edges
    assert len(combined) == 19 + 15 + 15
    assert len(set(int(i) for i in combined)) == len(combined)
    assert apex not in set(int(i) for i in combined)


def test_true_neighbors_stored_first(sphere_hull_512):
    ic = build_internally_connected(sphere_hull_512)
    for v in range(sphere_hull_512.num_vertices):
        true_nb = sphere_hull_512.adjacency[v]
        rec = ic.vertex_pool[v]
        assert np.array_equal(rec["neighbors"][: len(true_nb)].astype(np.int32), true_nb)


def test_neighbor_superset_and_padding(sphere_hull_512):
    hull = sphere_hull_512
    ic = build_internally_connected(hull)
    for v in range(hull.num_vertices):
        combined = combined_neighbors(ic, v)
        cs = set(int(i) for i in combined)
        assert len(cs) == len(combined)
        assert v not in cs
        assert set(int(j) for j in hull.adjacency[v]) <= cs
        # plenty of candidates exist, so every base slot must be used
        if len(hull.adjacency[v]) <= 19:
            assert np.all(ic.vertex_pool[v]["neighbors"] != SENTINEL)
            assert ic.vertex_pool[v]["extension"] == SENTINEL


def test_rebuild_bit_identical(sphere_hull_512):
    a = build_internally_connected(sphere_hull_512)
    b = build_internally_connected(sphere_hull_512)
    assert a.vertex_pool.tobytes() == b.vertex_pool.tobytes()
    assert a.extension_pool.tobytes() == b.extension_pool.tobytes()


def test_fill_radius_fraction_validation(octa_hull):
    with pytest.raises(ValueError):
        build_internally_connected(octa_hull, fill_radius_fraction=0.0)
    with pytest.raises(ValueError):
        build_internally_connected(octa_hull, fill_radius_fraction=1.5)


# --- face traversing and spherical layouts ---------------------------------


def test_face_records_cube(cube_hull):
    ft = build_face_traversing(cube_hull)
    assert len(ft.face_pool) == 12
    # neighbor sets recovered from records match shared-edge computation
    for f in range(12):
        nbrs = set(int(g) for g in ft.face_pool[f]["neighbors"])
        fset = set(int(x) for x in cube_hull.faces[f])
        for g in nbrs:
            shared = fset & set(int(x) for x in cube_hull.faces[g])
            assert len(shared) == 2
        anchor = int(ft.face_pool[f]["anchor"])
        assert anchor in set(int(x) for x in cube_hull.faces[f])


def test_face_records_tetra_complete_adjacency(tetra_hull):
    ft = build_face_traversing(tetra_hull)
    for f in range(4):
        assert set(int(g) for g in ft.face_pool[f]["neighbors"]) == set(range(4)) - {f}


def test_face_neighbors_match_shared_vertices(sphere_hull_2048):
    hull = sphere_hull_2048
    ft = build_face_traversing(hull)
    face_sets = [set(int(x) for x in hull.faces[f]) for f in range(hull.num_faces)]
    # adjacency iff exactly two shared vertices, checked on a sample and
    # exhaustively for the sampled faces' rows
    rng = np.random.default_rng(1)
    for f in rng.integers(0, hull.num_faces, size=40):
        f = int(f)
        stored = set(int(g) for g in ft.face_neighbors[f])
        brute = {
            g
            for g in range(hull.num_faces)
            if g != f and len(face_sets[f] & face_sets[g]) == 2
        }
        assert stored == brute


def test_anchor_maximizes_normal_dot(sphere_hull_512):
    hull = sphere_hull_512
    ft = build_face_traversing(hull)
    for f in range(hull.num_faces):
        n = hull.face_normals[f]
        dots = {int(v): float(hull.vertices[v] @ n) for v in hull.faces[f]}
        best = max(dots.values())
        tied = sorted(v for v, val in dots.items() if val == best)
        assert int(ft.anchors[f]) == tied[0]


def test_spherical_pole_and_axis_encodings():
    # hand-build hulls whose faces include the reference normals
    hull = build_hull(np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]))
    se = build_spherical(hull)
    encodings = {(int(r["azimuth"]), int(r["elevation"])) for r in se.face_pool}
    # the face with normal (0,0,-1) encodes as azimuth 0, elevation -pi/2
    assert (0, -(2**30)) in encodings
    # the face with normal (-1,0,0) encodes azimuth pi -> wrapped to -pi
    assert (-(2**31), 0) in encodings


def test_spherical_connectivity_matches_face_layout(sphere_hull_512):
    ft = build_face_traversing(sphere_hull_512)
    se = build_spherical(sphere_hull_512)
    assert np.array_equal(ft.face_neighbors, se.face_neighbors)
    assert np.array_equal(ft.anchors, se.anchors)


def test_spherical_decoded_normals_close(sphere_hull_512):
    se = build_spherical(sphere_hull_512)
    decoded = decode_normal_raw(se.azimuth_raw, se.elevation_raw)
    decoded /= np.linalg.norm(decoded, axis=1, keepdims=True)
    cosang = np.einsum("ij,ij->i", decoded, sphere_hull_512.face_normals)
    worst = float(np.max(np.arccos(np.clip(cosang, -1, 1))))
    assert worst <= 0.15


# --- warm starts ------------------------------------------------------------


def test_warm_starts_cube(cube_hull):
    table = compute_warm_starts(cube_hull)
    v_plus_x = cube_hull.vertices[table.start_vertices[0]]
    assert v_plus_x[0] == 1.0


def test_warm_starts_octahedron(octa_hull):
    table = compute_warm_starts(octa_hull)
    for k, axis in enumerate(AXIS_DIRECTIONS):
        got = octa_hull.vertices[table.start_vertices[k]]
        assert np.array_equal(got, axis)


def test_warm_starts_match_bruteforce(sphere_hull_512):
    hull = sphere_hull_512
    table = compute_warm_starts(hull)
    for k, axis in enumerate(AXIS_DIRECTIONS):
        dots = hull.vertices @ axis
        assert dots[table.start_vertices[k]] == dots.max()
        fdots = hull.face_normals @ axis
        assert fdots[table.start_faces[k]] == fdots.max()


def test_warm_start_selection_rule(octa_hull):
    table = compute_warm_starts(octa_hull)
    assert table.select(np.array([3.0, -1.0, 2.0])) == 0  # +X dominates
    assert table.select(np.array([-3.0, 1.0, 2.0])) == 1  # -X
    assert table.select(np.array([0.1, 0.2, -5.0])) == 5  # -Z


# --- serialization -----------------------------------------------------------


def test_pool_serialization_roundtrip(sphere_hull_512):
    ic = build_internally_connected(sphere_hull_512)
    buf = io.BytesIO()
    write_pool(buf, KIND_VERTEX, ic.vertex_pool)
    write_pool(buf, KIND_EXTENSION, ic.extension_pool)
    write_warm_starts(buf, ic.warm_starts)
    buf.seek(0)
    sections = read_sections(buf)
    assert sections[KIND_VERTEX].tobytes() == ic.vertex_pool.tobytes()
    assert sections[KIND_EXTENSION].tobytes() == ic.extension_pool.tobytes()
    table = sections[KIND_WARMSTART]
    assert np.array_equal(table.start_vertices, ic.warm_starts.start_vertices)
    assert np.array_equal(table.start_faces, ic.warm_starts.start_faces)
    assert sections[KIND_VERTEX].ctypes.data % 64 == 0


def test_section_magic_checked():
    buf = io.BytesIO(b"NOPE" + b"\x00" * 8)
    with pytest.raises(ValueError):
        read_sections(buf)
