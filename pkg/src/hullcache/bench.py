"""Benchmark and verification harness.

Methods are always verified against the brute-force oracle before any
timing runs; benchmarking a wrong backend is meaningless, so a mismatch
aborts. Timing uses pre-generated query streams and batch samples on the
monotonic clock: one sample is the elapsed time of `batch_queries`
back-to-back queries divided by the batch size.

Every run also accumulates a checksum (the sum of support values or GJK
distances, in query order). Checksums are the end-to-end equality
witness across backends and double as dead-code insurance.
"""

import csv
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from . import fxtrig
from .errors import CapacityExceededError
from .gjk import Pose, gjk_query, random_rotation
from .hull import HullTopology, build_hull, sample_sphere, validate_topology, CheckResult
from .layouts import (
    build_internally_connected,
    combined_neighbors,
    compute_warm_starts,
)
from .meshio import load_mesh
from .support import METHOD_NAMES, build_backends, support_naive

GJK_SCENARIOS = ("gjk-colliding", "gjk-close", "gjk-distant")
SCENARIOS = ("support",) + GJK_SCENARIOS + ("verify",)
# center distance between unit-radius sphere hulls, per scenario
GJK_CENTER_DISTANCE = {"gjk-colliding": 1.0, "gjk-close": 2.01, "gjk-distant": 6.0}

CSV_HEADER = (
    "method,hull_size,scenario,median_ns,mean_ns,p99_ns,"
    "mean_vertex_visits,mean_face_visits,checksum"
)


class BenchVerificationError(RuntimeError):
    """A backend disagreed with the oracle during pre-timing verification."""


@dataclass
class BenchConfig:
    hull_sizes: list[int] = field(default_factory=lambda: [64, 512])
    mesh_paths: list[str] = field(default_factory=list)
    seed: int = 0
    directions_per_hull: int = 1000
    warmup_iters: int = 100
    measure_iters: int = 1000
    scenario: str = "support"
    output_path: str | None = None
    methods: tuple = METHOD_NAMES
    fill_radius_fraction: float = 0.2
    batch_queries: int = 32

    def __post_init__(self):
        for n in self.hull_sizes:
            if not 4 <= n <= 65535:
                raise ValueError(f"hull size {n} out of range [4, 65535]")
        for name, val in (
            ("directions_per_hull", self.directions_per_hull),
            ("warmup_iters", self.warmup_iters),
            ("measure_iters", self.measure_iters),
            ("batch_queries", self.batch_queries),
        ):
            if val <= 0:
                raise ValueError(f"{name} must be positive, got {val}")
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")


@dataclass
class BenchRecord:
    method: str
    hull_size: int
    scenario: str
    median_ns: float
    mean_ns: float
    p99_ns: float
    mean_vertex_visits: float
    mean_face_visits: float
    checksum: float

    def to_row(self) -> list:
        return [
            self.method,
            self.hull_size,
            self.scenario,
            repr(self.median_ns),
            repr(self.mean_ns),
            repr(self.p99_ns),
            repr(self.mean_vertex_visits),
            repr(self.mean_face_visits),
            repr(self.checksum),
        ]


def write_csv(path: str, records: list[BenchRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER.split(","))
        for rec in records:
            writer.writerow(rec.to_row())


def random_unit_directions(n: int, seed_key) -> np.ndarray:
    rng = np.random.default_rng(seed_key)
    d = rng.normal(size=(n, 3))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def _time_batches(run_one, stream, warmup_iters: int, measure_iters: int, batch: int):
    """Sample per-query times (ns); `stream` items are cycled in order."""
    n = len(stream)
    idx = 0
    for _ in range(warmup_iters * batch):
        run_one(stream[idx])
        idx = (idx + 1) % n
    samples = []
    for _ in range(measure_iters):
        t0 = time.perf_counter_ns()
        for _ in range(batch):
            run_one(stream[idx])
            idx = (idx + 1) % n
        t1 = time.perf_counter_ns()
        samples.append((t1 - t0) / batch)
    return samples


def _summary(samples) -> tuple[float, float, float]:
    return (
        float(statistics.median(samples)),
        float(statistics.fmean(samples)),
        float(np.percentile(samples, 99)),
    )


def _bench_hull_support(
    hull: HullTopology, label_size: int, scenario: str, config: BenchConfig, dirs: np.ndarray
) -> list[BenchRecord]:
    backends = build_backends(hull, config.methods, config.fill_radius_fraction)
    oracle = [support_naive(hull, d) for d in dirs]

    records = []
    for name in config.methods:
        backend = backends[name]
        checksum = 0.0
        vertex_visits = 0
        face_visits = 0
        for d, ref in zip(dirs, oracle):
            res = backend.query(d)
            err = abs(res.support_value - ref.support_value)
            if err > 1e-12 * max(1.0, abs(ref.support_value)):
                raise BenchVerificationError(
                    f"method {name!r} disagrees with oracle on hull size {label_size}: "
                    f"direction {d}, got {res.support_value!r}, expected {ref.support_value!r}"
                )
            checksum += res.support_value
            vertex_visits += res.stats.vertex_visits
            face_visits += res.stats.face_visits

        samples = _time_batches(
            backend.query, dirs, config.warmup_iters, config.measure_iters, config.batch_queries
        )
        median_ns, mean_ns, p99_ns = _summary(samples)
        records.append(
            BenchRecord(
                method=name,
                hull_size=label_size,
                scenario=scenario,
                median_ns=median_ns,
                mean_ns=mean_ns,
                p99_ns=p99_ns,
                mean_vertex_visits=vertex_visits / len(dirs),
                mean_face_visits=face_visits / len(dirs),
                checksum=checksum,
            )
        )
    return records


def run_support_bench(config: BenchConfig) -> list[BenchRecord]:
    """Support-query benchmark over sphere-sampled hulls of each size."""
    records = []
    for size in config.hull_sizes:
        hull = build_hull(sample_sphere(size, config.seed))
        dirs = random_unit_directions(config.directions_per_hull, [config.seed, size, 1])
        records.extend(_bench_hull_support(hull, size, "support", config, dirs))
    if config.output_path:
        write_csv(config.output_path, records)
    return records


def run_gjk_bench(config: BenchConfig) -> list[BenchRecord]:
    """GJK benchmark between two unit-radius sphere hulls per scenario."""
    if config.scenario not in GJK_SCENARIOS:
        raise ValueError(f"scenario must be one of {GJK_SCENARIOS}, got {config.scenario!r}")
    center_distance = GJK_CENTER_DISTANCE[config.scenario]
    records = []
    for size in config.hull_sizes:
        hull = build_hull(sample_sphere(size, config.seed))
        backends = build_backends(hull, config.methods, config.fill_radius_fraction)
        rng = np.random.default_rng([config.seed, size, 2])
        poses = [
            (
                Pose.identity(),
                Pose(random_rotation(rng), np.array([center_distance, 0.0, 0.0])),
            )
            for _ in range(config.directions_per_hull)
        ]

        reference: list[float] | None = None
        per_method = {}
        for name in config.methods:
            backend = backends[name]
            distances = []
            vertex_visits = 0
            face_visits = 0
            for pose_a, pose_b in poses:
                res = gjk_query(backend, pose_a, backend, pose_b)
                distances.append(res.distance)
                vertex_visits += res.stats.vertex_visits
                face_visits += res.stats.face_visits
            if reference is None:
                reference = distances
            else:
                for k, (got, want) in enumerate(zip(distances, reference)):
                    if abs(got - want) > 1e-9:
                        raise BenchVerificationError(
                            f"method {name!r} GJK distance {got!r} deviates from "
                            f"{config.methods[0]!r} ({want!r}) on instance {k}, size {size}"
                        )
            per_method[name] = (sum(distances), vertex_visits, face_visits)

        for name in config.methods:
            backend = backends[name]
            checksum, vertex_visits, face_visits = per_method[name]
            samples = _time_batches(
                lambda pp: gjk_query(backend, pp[0], backend, pp[1]),
                poses,
                config.warmup_iters,
                config.measure_iters,
                config.batch_queries,
            )
            median_ns, mean_ns, p99_ns = _summary(samples)
            records.append(
                BenchRecord(
                    method=name,
                    hull_size=size,
                    scenario=config.scenario,
                    median_ns=median_ns,
                    mean_ns=mean_ns,
                    p99_ns=p99_ns,
                    mean_vertex_visits=vertex_visits / len(poses),
                    mean_face_visits=face_visits / len(poses),
                    checksum=checksum,
                )
            )
    if config.output_path:
        write_csv(config.output_path, records)
    return records


def run_mesh_bench(config: BenchConfig) -> list[BenchRecord]:
    """Support benchmark over hulls built from user-supplied mesh files."""
    records = []
    for path in config.mesh_paths:
        points = load_mesh(path)  # propagate io/format errors before timing
        label = points.source_label
        try:
            hull = build_hull(points)
        except CapacityExceededError as exc:
            records.append(
                BenchRecord("skipped", len(points), f"mesh:{label}", 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
            )
            print(f"warning: {label}: {exc}; skipped")
            continue
        dirs = random_unit_directions(
            config.directions_per_hull, [config.seed, hull.num_vertices, 3]
        )
        records.extend(
            _bench_hull_support(hull, hull.num_vertices, f"mesh:{label}", config, dirs)
        )
    if config.output_path:
        write_csv(config.output_path, records)
    return records


# --- verification suite ----------------------------------------------------


def check_record_layout() -> CheckResult:
    from . import layouts

    try:
        layouts.check_record_sizes()
    except AssertionError as exc:
        return CheckResult("record_layout", False, str(exc))
    pool = layouts.aligned_pool(8, layouts.VERTEX_RECORD_DTYPE)
    ok = pool.ctypes.data % 64 == 0 and pool.dtype.itemsize == 64
    return CheckResult("record_layout", ok, "64/32/32/16 bytes, 64-byte aligned pools")


def check_neighbor_superset(hull: HullTopology, ic) -> CheckResult:
    """True adjacency must be contained in the packed neighbor slots."""
    for v in range(hull.num_vertices):
        stored = combined_neighbors(ic, v)
        stored_set = set(int(i) for i in stored)
        if len(stored_set) != len(stored):
            return CheckResult("neighbor_superset", False, f"vertex {v}: duplicate slots")
        if v in stored_set:
            return CheckResult("neighbor_superset", False, f"vertex {v}: self reference")
        missing = set(int(i) for i in hull.adjacency[v]) - stored_set
        if missing:
            return CheckResult(
                "neighbor_superset", False, f"vertex {v} missing true neighbors {sorted(missing)}"
            )
    return CheckResult("neighbor_superset", True, f"{hull.num_vertices} vertices")


def check_oracle_equivalence(hull: HullTopology, config: BenchConfig, n_dirs: int = 200) -> CheckResult:
    backends = build_backends(hull, config.methods, config.fill_radius_fraction)
    dirs = random_unit_directions(n_dirs, [config.seed, hull.num_vertices, 4])
    for d in dirs:
        ref = support_naive(hull, d).support_value
        for name, backend in backends.items():
            got = backend.query(d).support_value
            if abs(got - ref) > 1e-12 * max(1.0, abs(ref)):
                return CheckResult(
                    "oracle_equivalence", False, f"{name} got {got!r} want {ref!r} (V={hull.num_vertices})"
                )
    return CheckResult("oracle_equivalence", True, f"{len(dirs)} directions x {len(backends)} methods")


def check_warm_starts(hull: HullTopology) -> CheckResult:
    from .layouts import AXIS_DIRECTIONS

    table = compute_warm_starts(hull)
    for k, axis in enumerate(AXIS_DIRECTIONS):
        best_v = float(np.max(hull.vertices @ axis))
        got_v = float(hull.vertices[table.start_vertices[k]] @ axis)
        if got_v != best_v:
            return CheckResult("warm_starts", False, f"axis {k}: vertex {got_v} != {best_v}")
        best_f = float(np.max(hull.face_normals @ axis))
        got_f = float(hull.face_normals[table.start_faces[k]] @ axis)
        if got_f != best_f:
            return CheckResult("warm_starts", False, f"axis {k}: face {got_f} != {best_f}")
    return CheckResult("warm_starts", True)


def check_trig_bounds(samples: int = 1_000_000) -> CheckResult:
    rng = np.random.default_rng(1234)
    raw = rng.integers(-(2**31), 2**31, size=samples, dtype=np.int64).astype(np.int32)
    approx = fxtrig.approx_sin_raw(raw)
    exact = np.sin(raw.astype(np.float64) / 2**31 * np.pi)
    worst = float(np.max(np.abs(approx - exact)))
    if worst > 0.06:
        return CheckResult("trig_bounds", False, f"max sine error {worst:.4f} > 0.06")
    for v, raw_val in ((-1.0, -(2**31)), (-0.5, -(2**30)), (0.0, 0), (0.5, 2**30)):
        got = fxtrig.approx_sin(fxtrig.Q31Angle(raw_val))
        want = float(np.sin(v * np.pi))
        if abs(got - want) > 1e-12:
            return CheckResult("trig_bounds", False, f"not exact at v={v}: {got} vs {want}")
    shift = np.int32(fxtrig.QUARTER_TURN)
    cos_vals = fxtrig.approx_cos_raw(raw[:1000])
    sin_shifted = fxtrig.approx_sin_raw(raw[:1000] + shift)
    if not np.array_equal(cos_vals, sin_shifted):
        return CheckResult("trig_bounds", False, "cosine is not a bit-exact quarter-turn shift")
    return CheckResult("trig_bounds", True, f"max sine error {worst:.4f}")


def check_normal_roundtrip(samples: int = 100_000) -> CheckResult:
    rng = np.random.default_rng(99)
    n = rng.normal(size=(samples, 3))
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    az, el = fxtrig.encode_normal_raw(n)
    dec = fxtrig.decode_normal_raw(az, el)
    dec /= np.linalg.norm(dec, axis=1, keepdims=True)
    cosang = np.einsum("ij,ij->i", dec, n)
    worst = float(np.max(np.arccos(np.clip(cosang, -1.0, 1.0))))
    ok = worst <= 0.15
    return CheckResult("normal_roundtrip", ok, f"max angular error {worst:.4f} rad")


def check_gjk(config: BenchConfig) -> CheckResult:
    hull = build_hull(sample_sphere(512, config.seed))
    backends = build_backends(hull, config.methods, config.fill_radius_fraction)
    rng = np.random.default_rng([config.seed, 5])
    ref = None
    for name in config.methods:
        rot = random_rotation(np.random.default_rng([config.seed, 6]))
        res = gjk_query(
            backends[name], Pose.identity(), backends[name], Pose(rot, np.array([3.0, 0.0, 0.0]))
        )
        if res.status.value != "separated" or abs(res.distance - 1.0) > 0.05:
            return CheckResult("gjk", False, f"{name}: distance {res.distance} not ~1.0")
        if ref is None:
            ref = res.distance
        elif abs(res.distance - ref) > 1e-9:
            return CheckResult("gjk", False, f"{name}: distance {res.distance} != {ref}")
    # overlapping copies must intersect
    res = gjk_query(
        backends["naive"], Pose.identity(), backends["naive"],
        Pose(random_rotation(rng), np.array([0.5, 0.0, 0.0])),
    )
    if not res.intersecting:
        return CheckResult("gjk", False, "overlapping hulls reported separated")
    return CheckResult("gjk", True)


def run_verify(config: BenchConfig) -> list[CheckResult]:
    """Run every module's invariant suite; one CheckResult per area."""
    results = [check_record_layout(), check_trig_bounds(), check_normal_roundtrip()]
    for size in config.hull_sizes:
        hull = build_hull(sample_sphere(size, config.seed))
        report = validate_topology(hull)
        results.append(
            CheckResult(
                f"hull_topology[{size}]",
                report.passed,
                "" if report.passed else report.summary(),
            )
        )
        ic = build_internally_connected(hull, config.fill_radius_fraction)
        sup = check_neighbor_superset(hull, ic)
        results.append(CheckResult(f"neighbor_superset[{size}]", sup.passed, sup.detail))
        ora = check_oracle_equivalence(hull, config)
        results.append(CheckResult(f"oracle_equivalence[{size}]", ora.passed, ora.detail))
        warm = check_warm_starts(hull)
        results.append(CheckResult(f"warm_starts[{size}]", warm.passed, warm.detail))
    results.append(check_gjk(config))
    return results
