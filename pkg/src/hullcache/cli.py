"""Command-line interface for benchmarks, verification, and hull export."""

import sys

import click

from .bench import (
    GJK_SCENARIOS,
    BenchConfig,
    run_gjk_bench,
    run_mesh_bench,
    run_support_bench,
    run_verify,
)
from .hull import build_hull, sample_sphere
from .layouts import (
    build_internally_connected,
    build_face_traversing,
    build_spherical,
    write_pool,
    write_warm_starts,
    KIND_VERTEX,
    KIND_EXTENSION,
    KIND_FACE,
    KIND_SPHERICAL,
)
from .meshio import load_mesh
from .support import METHOD_NAMES


def _parse_sizes(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError as exc:
        raise click.BadParameter(f"--sizes expects integers, got {text!r}") from exc


def _print_records(records):
    from .bench import CSV_HEADER

    click.echo(CSV_HEADER)
    for rec in records:
        click.echo(",".join(str(x) for x in rec.to_row()))


size_option = click.option("--sizes", default="64,512", show_default=True, help="comma-separated hull vertex counts")
seed_option = click.option("--seed", default=0, show_default=True, type=int)
dirs_option = click.option("--dirs", default=1000, show_default=True, type=int, help="pre-generated queries per hull")
iters_option = click.option("--iters", default=1000, show_default=True, type=int, help="measured batches")
warmup_option = click.option("--warmup", default=100, show_default=True, type=int, help="warmup batches")
out_option = click.option("--out", default=None, type=click.Path(dir_okay=False), help="CSV output path")
methods_option = click.option(
    "--methods", default=",".join(METHOD_NAMES), show_default=True, help="comma-separated method subset"
)


@click.group()
def main():
    """Convex hull support-query layouts: benchmarks and verification."""


@main.command("support-bench")
@size_option
@seed_option
@dirs_option
@iters_option
@warmup_option
@out_option
@methods_option
def support_bench(sizes, seed, dirs, iters, warmup, out, methods):
    """Time support queries for every method across hull sizes."""
    config = BenchConfig(
        hull_sizes=_parse_sizes(sizes),
        seed=seed,
        directions_per_hull=dirs,
        measure_iters=iters,
        warmup_iters=warmup,
        output_path=out,
        methods=tuple(methods.split(",")),
    )
    _print_records(run_support_bench(config))


@main.command("gjk-bench")
@click.option("--scenario", type=click.Choice(GJK_SCENARIOS), default="gjk-close", show_default=True)
@size_option
@seed_option
@dirs_option
@iters_option
@warmup_option
@out_option
@methods_option
def gjk_bench(scenario, sizes, seed, dirs, iters, warmup, out, methods):
    """Time GJK queries between two sphere hulls for a placement scenario."""
    config = BenchConfig(
        hull_sizes=_parse_sizes(sizes),
        seed=seed,
        directions_per_hull=dirs,
        measure_iters=iters,
        warmup_iters=warmup,
        scenario=scenario,
        output_path=out,
        methods=tuple(methods.split(",")),
    )
    _print_records(run_gjk_bench(config))


@main.command("mesh-bench")
@click.option("--mesh", "meshes", multiple=True, required=True, type=click.Path(exists=False), help="OBJ/PLY path (repeatable)")
@seed_option
@dirs_option
@iters_option
@warmup_option
@out_option
@methods_option
def mesh_bench(meshes, seed, dirs, iters, warmup, out, methods):
    """Time support queries on hulls built from mesh files."""
    config = BenchConfig(
        mesh_paths=list(meshes),
        seed=seed,
        directions_per_hull=dirs,
        measure_iters=iters,
        warmup_iters=warmup,
        output_path=out,
        methods=tuple(methods.split(",")),
    )
    _print_records(run_mesh_bench(config))


@main.command("verify")
@size_option
@seed_option
def verify(sizes, seed):
    """Run every invariant suite and exit nonzero on any failure."""
    config = BenchConfig(hull_sizes=_parse_sizes(sizes), seed=seed)
    results = run_verify(config)
    failed = 0
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        detail = f"  ({res.detail})" if res.detail else ""
        click.echo(f"[{status}] {res.name}{detail}")
        failed += not res.passed
    click.echo(f"{len(results) - failed}/{len(results)} checks passed")
    if failed:
        sys.exit(1)


@main.command("gen-hull")
@click.option("--size", default=None, type=int, help="sphere-sample this many points")
@click.option("--mesh", default=None, type=click.Path(dir_okay=False), help="build from a mesh file instead")
@seed_option
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="layout pool output path")
def gen_hull(size, mesh, seed, out):
    """Build a hull and write its serialized layout pools."""
    if (size is None) == (mesh is None):
        raise click.UsageError("exactly one of --size or --mesh is required")
    points = load_mesh(mesh) if mesh else sample_sphere(size, seed)
    hull = build_hull(points)
    ic = build_internally_connected(hull)
    ft = build_face_traversing(hull, inner=ic)
    se = build_spherical(hull, inner=ic)
    with open(out, "wb") as fh:
        write_pool(fh, KIND_VERTEX, ic.vertex_pool)
        write_pool(fh, KIND_EXTENSION, ic.extension_pool)
        write_pool(fh, KIND_FACE, ft.face_pool)
        write_pool(fh, KIND_SPHERICAL, se.face_pool)
        write_warm_starts(fh, ic.warm_starts)
    click.echo(
        f"wrote {out}: {hull.num_vertices} vertices, {hull.num_faces} faces, "
        f"{len(ic.extension_pool)} extension records"
    )


if __name__ == "__main__":
    main()
