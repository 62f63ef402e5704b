"""Command-line interface.

Subcommands: attractor, fastbasin, continuation, code, manifold, verify,
spec. Outputs are deterministic given flags and seeds; --threads is an
accepted hint and never changes output bytes.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import basin, io, manifold, systems
from .addresses import (
    Address,
    disjunctive_prefix,
    format_address,
    metric,
    negate,
    parse_address,
    shift,
    sigma,
    validate,
)
from .errors import FbeError
from .ifs import IfsSystem, attractor, chaos_game, coding_map
from .verify import run_verify


def _resolve_ifs(spec: str) -> IfsSystem:
    p = Path(spec)
    if p.exists():
        return io.load_spec(p)
    if spec in systems.SYSTEMS:
        return systems.by_name(spec)
    raise FbeError(f"--ifs {spec!r}: no such file or built-in system")


def _get_cloud(ifs: IfsSystem, cell: float, depth: int = 200):
    cache_path = io.cached_attractor_path(ifs, cell)
    if cache_path is not None and cache_path.exists():
        return io.load_cached(cache_path, ifs)
    cloud = attractor(ifs, systems.default_seed(ifs), depth=depth, cell=cell)
    if cache_path is not None:
        cache_path.parent.mkdir(parents=True, exist_ok=True)
        io.cache_attractor(ifs, cloud, cache_path)
    return cloud


def _parse_floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip() != ""]


def _parse_grid(text: str) -> tuple[int, int]:
    parts = [int(t) for t in text.split(",")]
    if len(parts) == 1:
        return parts[0], 1
    if len(parts) == 2:
        return parts[0], parts[1]
    raise FbeError("--grid takes NX or NX,NY")


def _parse_manifold_point(ifs, cloud, text: str):
    if ":" not in text:
        raise FbeError(f"manifold point {text!r} must be 'theta:coords'")
    theta_text, coords_text = text.split(":", 1)
    theta_addr = parse_address(theta_text)
    if theta_addr.is_infinite:
        raise FbeError("integer part must be a finite word")
    x = np.array(_parse_floats(coords_text))
    return manifold.manifold_point(ifs, cloud, theta_addr.pre, x)


def _cmd_attractor(args) -> int:
    ifs = _resolve_ifs(args.ifs)
    if args.chaos:
        cloud = chaos_game(ifs, args.chaos, args.burn_in, args.seed)
    else:
        cloud = _get_cloud(ifs, args.cell, args.depth)
    if args.out:
        io.cache_attractor(ifs, cloud, args.out)
    lo, hi = cloud.bounding_box()
    print(
        f"attractor: {cloud.points.shape[0]} points, epsilon={cloud.epsilon:.3g}, "
        f"bbox={np.round(lo, 6).tolist()}..{np.round(hi, 6).tolist()}"
    )
    return 0


def _cmd_fastbasin(args) -> int:
    ifs = _resolve_ifs(args.ifs)
    cloud = _get_cloud(ifs, args.cell)
    region = _parse_floats(args.region)
    nx, ny = _parse_grid(args.grid)
    builder = (
        basin.raster_from_continuations
        if args.via_continuations
        else basin.fast_basin_raster
    )
    ras = builder(ifs, cloud, region, nx, ny, depth=args.depth, tau=args.tol)
    if args.out:
        io.write_pgm(ras, args.out)
    if args.csv:
        io.write_csv(ras, args.csv)
    print(f"fastbasin: {ras.hit_count} hit cells of {ras.nx * ras.ny}")
    return 0


def _cmd_continuation(args) -> int:
    ifs = _resolve_ifs(args.ifs)
    cloud = _get_cloud(ifs, args.cell)
    theta = parse_address(args.theta)
    cont = basin.finite_continuation(ifs, cloud, theta, args.k)
    if args.out:
        from .ifs import AttractorCloud

        io.cache_attractor(
            ifs, AttractorCloud(cont.points, cloud.epsilon, dict(cloud.meta)), args.out
        )
    lo = cont.points.min(axis=0)
    hi = cont.points.max(axis=0)
    print(
        f"continuation theta={format_address(theta)} k={args.k}: "
        f"{cont.points.shape[0]} points, bbox={np.round(lo, 6).tolist()}.."
        f"{np.round(hi, 6).tolist()}"
    )
    return 0


def _cmd_code(args) -> int:
    if args.op == "sigma":
        print(format_address(sigma(int(args.n), parse_address(args.addr))))
    elif args.op == "shift":
        print(format_address(shift(parse_address(args.addr))))
    elif args.op == "negate":
        print(format_address(negate(parse_address(args.addr))))
    elif args.op == "classify":
        cls = validate(parse_address(args.addr), args.n_maps)
        print(json.dumps(dataclasses.asdict(cls)))
    elif args.op == "metric":
        d = metric(parse_address(args.addr), parse_address(args.addr2))
        print(f"{d} ({float(d):.17g})")
    elif args.op == "pi":
        ifs = _resolve_ifs(args.ifs)
        val = coding_map(ifs, parse_address(args.addr), tol=args.tol)
        print(" ".join(f"{v:.17g}" for v in np.atleast_1d(val)))
    elif args.op == "disjunctive":
        word = disjunctive_prefix(args.n_maps, args.length)
        print(format_address(Address.finite(word)))
    return 0


def _cmd_manifold(args) -> int:
    ifs = _resolve_ifs(args.ifs)
    cloud = _get_cloud(ifs, args.cell)
    if args.mop == "dist":
        a = _parse_manifold_point(ifs, cloud, args.a)
        b = _parse_manifold_point(ifs, cloud, args.b)
        d = manifold.distance(ifs, cloud, a, b)
        print(
            json.dumps(
                {
                    "d_L": d.d_L,
                    "d_X": d.d_X,
                    "common_prefix": format_address(Address.finite(d.common_prefix)),
                    "error_bound": d.error_bound,
                }
            )
        )
    elif args.mop == "leaves":
        rows = ["theta,count,proj_min,proj_max"] if ifs.dim == 1 else [
            "theta,count,min_x,min_y,max_x,max_y"
        ]
        for theta in manifold.enumerate_leaves(ifs.n_maps, args.depth):
            pts = manifold.leaf_projection(ifs, cloud, theta)
            label = format_address(Address.finite(theta)) or "()"
            lo = pts.min(axis=0)
            hi = pts.max(axis=0)
            if ifs.dim == 1:
                rows.append(f"{label},{pts.shape[0]},{lo[0]:.9g},{hi[0]:.9g}")
            else:
                rows.append(
                    f"{label},{pts.shape[0]},{lo[0]:.9g},{lo[1]:.9g},"
                    f"{hi[0]:.9g},{hi[1]:.9g}"
                )
        text = "\n".join(rows) + "\n"
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    elif args.mop == "branch":
        pts = manifold.branch_points(ifs, cloud, args.depth, args.tol)
        out = [
            {
                "projection": p.proj.tolist(),
                "integer_part": format_address(Address.finite(p.theta)) or "()",
                "incident_leaves": count,
            }
            for p, count in pts
        ]
        print(json.dumps(out))
    return 0


def _cmd_verify(args) -> int:
    ifs = _resolve_ifs(args.ifs)
    cloud = _get_cloud(ifs, args.cell)
    report = run_verify(ifs, cloud, cell=args.cell, system_name=args.ifs)
    for line in report.lines():
        print(line)
    if args.json:
        Path(args.json).write_text(
            json.dumps([dataclasses.asdict(c) for c in report.checks], indent=2)
        )
    return 0 if report.passed else 1


def _cmd_spec(args) -> int:
    ifs = systems.by_name(args.name)
    if args.out:
        io.save_spec(ifs, args.out)
    else:
        print(json.dumps(ifs.spec_dict(), indent=2))
    return 0


# Addresses like "-1.-1.(2)*" and points like "-2.-1:0.625" start with a
# dash; widen argparse's idea of a negative number so they stay positional.
_DASH_VALUE = re.compile(r"^-\d")


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._negative_number_matcher = _DASH_VALUE


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(
        prog="fbe",
        description=(
            "Attractors, fast basins, fractal continuations and branched "
            "fractal manifolds of iterated function systems."
        ),
    )
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def add_common(p, cell_default=1e-3):
        p.add_argument("--ifs", required=True, help="spec file or built-in name")
        p.add_argument("--cell", type=float, default=cell_default)
        p.add_argument("--threads", type=int, default=1, help="hint only")

    p = sub.add_parser("attractor", help="compute and cache an attractor cloud")
    add_common(p)
    p.add_argument("--depth", type=int, default=200)
    p.add_argument("--chaos", type=int, default=0, help="use a chaos-game orbit of N points")
    p.add_argument("--burn-in", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_attractor)

    p = sub.add_parser("fastbasin", help="raster the fast basin")
    add_common(p)
    p.add_argument("--region", required=True, help="x0,x1 or x0,y0,x1,y1")
    p.add_argument("--grid", required=True, help="NX or NX,NY")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--out", help="PGM output path")
    p.add_argument("--csv", help="CSV output path")
    p.add_argument(
        "--via-continuations",
        action="store_true",
        help="build the raster from finite continuations instead of the word tree",
    )
    p.set_defaults(fn=_cmd_fastbasin)

    p = sub.add_parser("continuation", help="finite continuation of the attractor")
    add_common(p)
    p.add_argument("--theta", required=True, help="positive word, e.g. '(1.2)*'")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_continuation)

    p = sub.add_parser("code", help="address-space operations")
    code_sub = p.add_subparsers(dest="op", required=True, parser_class=_Parser)
    q = code_sub.add_parser("sigma")
    q.add_argument("n")
    q.add_argument("addr")
    q = code_sub.add_parser("shift")
    q.add_argument("addr")
    q = code_sub.add_parser("negate")
    q.add_argument("addr")
    q = code_sub.add_parser("classify")
    q.add_argument("addr")
    q.add_argument("--n-maps", type=int, required=True)
    q = code_sub.add_parser("metric")
    q.add_argument("addr")
    q.add_argument("addr2")
    q = code_sub.add_parser("pi")
    q.add_argument("addr")
    q.add_argument("--ifs", required=True)
    q.add_argument("--tol", type=float, default=1e-10)
    q = code_sub.add_parser("disjunctive")
    q.add_argument("--n-maps", type=int, required=True)
    q.add_argument("--length", type=int, required=True)
    p.set_defaults(fn=_cmd_code)

    p = sub.add_parser("manifold", help="branched-manifold operations")
    man_sub = p.add_subparsers(dest="mop", required=True, parser_class=_Parser)
    q = man_sub.add_parser("dist")
    add_common(q)
    q.add_argument("--a", required=True, help="theta:coords, e.g. '-1:0.75'")
    q.add_argument("--b", required=True)
    q = man_sub.add_parser("leaves")
    add_common(q)
    q.add_argument("--depth", type=int, default=2)
    q.add_argument("--out")
    q = man_sub.add_parser("branch")
    add_common(q)
    q.add_argument("--depth", type=int, default=3)
    q.add_argument("--tol", type=float, default=None)
    p.set_defaults(fn=_cmd_manifold)

    p = sub.add_parser("verify", help="run the structural check suite")
    add_common(p)
    p.add_argument("--json", help="also write the report as JSON")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("spec", help="print or save a built-in system spec")
    p.add_argument("name", choices=sorted(systems.SYSTEMS))
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_spec)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except FbeError as e:
        print(f"fbe: error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"fbe: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
