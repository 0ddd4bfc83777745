"""Command-line entry point: ``sdfshrink {ingest,shrink,mc,eval,texture}``.

Exit codes: 0 success, 2 bad parameters, 3 bad input data, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings

import numpy as np

from sdfshrink import fieldspec
from sdfshrink.export import checkerboard, save_textured_obj, write_ppm
from sdfshrink.ingest import MIN_RESOLUTION, MeshError, mesh_to_grid_sdf
from sdfshrink.mc import marching_cubes
from sdfshrink.mesh import ObjFormatError, load_obj, save_obj
from sdfshrink.metrics import anchor_grid_to_mesh, evaluate, uv_fold_check
from sdfshrink.sdf import GridSdf, load_grid, save_grid
from sdfshrink.sdf.mlp import MlpFormatError
from sdfshrink.shrink import DivergenceError, ShrinkConfig, ShrinkError, default_start, run_shrink

log = logging.getLogger("sdfshrink")

EXIT_OK, EXIT_PARAM, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3, 4


class ParamError(Exception):
    pass


def _positive_int(minimum: int):
    def parse(text: str) -> int:
        value = int(text)
        if value < minimum:
            raise argparse.ArgumentTypeError(f"must be at least {minimum}, got {value}")
        return value

    return parse


def _triple(text: str) -> tuple[float, float, float]:
    parts = [float(t) for t in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z, got {text!r}")
    return tuple(parts)


def cmd_ingest(args) -> int:
    mesh = load_obj(args.mesh)
    grid = mesh_to_grid_sdf(mesh, args.resolution, args.padding, normalize=args.normalize, threads=args.threads)
    save_grid(grid, args.out)
    lo, hi = grid.bounds()
    print(f"grid {'x'.join(map(str, grid.shape))} spacing {grid.spacing:.9g}")
    print(f"bounds [{', '.join(f'{v:.6g}' for v in lo)}] .. [{', '.join(f'{v:.6g}' for v in hi)}]")
    print(f"values min {grid.values.min():.6g} max {grid.values.max():.6g}")
    return EXIT_OK


def cmd_shrink(args) -> int:
    field = fieldspec.parse_field(args.field)
    center, radius = default_start(field)
    cfg = ShrinkConfig(
        step=args.step,
        max_iters=args.max_iters,
        residual_tol=args.tol,
        resample=args.resample,
        momentum=args.momentum,
        n_theta=args.ntheta,
        n_phi=args.nphi,
        initial_radius=args.radius if args.radius is not None else radius,
        initial_center=args.center if args.center is not None else center,
    )
    try:
        result = run_shrink(field, cfg, stream=sys.stdout if args.log else None)
    except DivergenceError as exc:
        tail = " ".join(f"{r:.6g}" for r in exc.history[-6:])
        print(f"error: {exc}\nresidual history tail: {tail}", file=sys.stderr)
        return EXIT_NUMERIC
    mesh = anchor_grid_to_mesh(result.grid)
    save_textured_obj(mesh, args.out, cells=args.cells)
    folds = uv_fold_check(result.grid)
    status = "converged" if result.converged else "max-iters"
    print(f"residual {result.final_residual:.9g} iterations {result.iterations} folds {folds} {status}")
    return EXIT_OK


def cmd_mc(args) -> int:
    grid = load_grid(args.grid)
    if args.resolution is not None:
        lo, hi = grid.bounds()
        grid = GridSdf.sample(grid, lo, hi, args.resolution)
    if args.resolution_note:
        print(f"marching cubes on a {'x'.join(map(str, grid.shape))} lattice; "
              "27^3 cubes pairs with 100x200 shrink anchors for comparable triangle counts")
    mesh = marching_cubes(grid, args.iso)
    if len(mesh.triangles) == 0:
        print("warning: no iso-crossing in grid, writing empty mesh", file=sys.stderr)
    save_obj(mesh, args.out)
    print(f"vertices {len(mesh.vertices)} triangles {len(mesh.triangles)}")
    return EXIT_OK


def cmd_eval(args) -> int:
    a, b = load_obj(args.mesh_a), load_obj(args.mesh_b)
    report = evaluate(a, b, args.samples, args.seed, workers=args.threads)
    print(report.to_json())
    print(report.table())
    return EXIT_OK


def cmd_texture(args) -> int:
    if args.cells % 2:
        raise ParamError(f"--cells must be even, got {args.cells}")
    write_ppm(checkerboard(args.cells), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdfshrink", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--threads", type=_positive_int(1), default=1,
                        help="cap on data-parallel workers; output does not depend on it")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="convert a watertight OBJ mesh into an SDFGRID1 file")
    p.add_argument("mesh")
    p.add_argument("out")
    p.add_argument("--resolution", type=_positive_int(MIN_RESOLUTION), default=32)
    p.add_argument("--padding", type=float, default=0.1, help="per-side padding as a fraction of the bbox diagonal")
    p.add_argument("--normalize", action="store_true", help="centre and scale the mesh to a bbox diagonal of 2")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("shrink", help="shrink a UV sphere onto a field and write a textured OBJ",
                       description=fieldspec.__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("field", help="analytic spec (e.g. sphere:1.0) or a grid / MLP file")
    p.add_argument("out")
    p.add_argument("--ntheta", type=_positive_int(3), default=200)
    p.add_argument("--nphi", type=_positive_int(2), default=100)
    p.add_argument("--step", type=float, default=0.2)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--max-iters", type=_positive_int(0), default=500)
    p.add_argument("--resample", choices=("alternate", "both", "off"), default="alternate")
    p.add_argument("--momentum", type=float, default=0.0)
    p.add_argument("--radius", type=float, default=None, help="initial sphere radius")
    p.add_argument("--center", type=_triple, default=None, help="initial sphere centre x,y,z")
    p.add_argument("--cells", type=_positive_int(2), default=16, help="checkerboard cells in the texture")
    p.add_argument("--log", action="store_true", help="print 'iteration residual max-displacement' per step")
    p.set_defaults(func=cmd_shrink)

    p = sub.add_parser("mc", help="Marching Cubes baseline on an SDFGRID1 file")
    p.add_argument("grid")
    p.add_argument("out")
    p.add_argument("--resolution", type=_positive_int(2), default=None,
                   help="resample the grid at this many nodes along its longest axis first (e.g. 27)")
    p.add_argument("--iso", type=float, default=0.0)
    p.add_argument("--resolution-note", action="store_true", help="print the lattice used and its anchor pairing")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("eval", help="Chamfer distance and normal consistency between two OBJ meshes")
    p.add_argument("mesh_a")
    p.add_argument("mesh_b")
    p.add_argument("--samples", type=_positive_int(1), default=10_000)
    p.add_argument("--seed", type=_positive_int(0), default=42)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("texture", help="write a 512x512 checkerboard PPM")
    p.add_argument("out")
    p.add_argument("--cells", type=_positive_int(2), default=16)
    p.set_defaults(func=cmd_texture)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    warnings.simplefilter("default")
    np.seterr(all="ignore")
    try:
        return args.func(args)
    except (ParamError, fieldspec.FieldSpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except (MeshError, ObjFormatError, MlpFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ShrinkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # remaining validation failures (zero-area meshes, bad config values)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT if args.command in ("eval", "mc", "ingest") else EXIT_PARAM


if __name__ == "__main__":
    sys.exit(main())
