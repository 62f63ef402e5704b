"""Spec files, attractor caches, and raster emission.

All formats are parser-trivial on purpose: JSON specs, a one-line-header
text format for clouds (17 significant digits, so round trips are exact
for float64), binary PGM (P5) for rasters.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .errors import NonInvertibleMapError, SpecFormatError, StaleCacheError
from .ifs import AttractorCloud, IfsSystem
from .maps import AffineMap, MoebiusMap

CACHE_ENV = "FBE_CACHE_DIR"


def _complex_from_pair(v, what: str) -> complex:
    if not (isinstance(v, (list, tuple)) and len(v) == 2):
        raise SpecFormatError(f"{what} must be a [re, im] pair")
    return complex(float(v[0]), float(v[1]))


def parse_spec(data: dict) -> IfsSystem:
    if not isinstance(data, dict):
        raise SpecFormatError("spec must be a JSON object")
    space = data.get("space")
    if space not in ("R1", "R2", "R4", "sphere"):
        raise SpecFormatError(f"space must be R1, R2, R4 or sphere, got {space!r}")
    raw_maps = data.get("maps")
    if not isinstance(raw_maps, list) or not raw_maps:
        raise SpecFormatError("maps must be a nonempty list")
    maps = []
    for idx, m in enumerate(raw_maps, start=1):
        kind = m.get("type")
        if kind == "affine":
            if space == "sphere":
                raise SpecFormatError(f"map {idx}: affine map in a sphere spec")
            matrix = np.asarray(m.get("matrix"), dtype=float)
            offset = np.asarray(m.get("offset"), dtype=float)
            try:
                amap = AffineMap(matrix, offset)
            except ValueError as e:
                raise SpecFormatError(f"map {idx}: {e}") from None
            if abs(np.linalg.det(amap.matrix)) < 1e-300:
                raise NonInvertibleMapError(
                    idx, f"map {idx}: affine matrix is singular"
                )
            maps.append(amap)
        elif kind == "moebius":
            if space != "sphere":
                raise SpecFormatError(f"map {idx}: moebius map needs sphere space")
            try:
                maps.append(
                    MoebiusMap(
                        _complex_from_pair(m.get("a"), f"map {idx} a"),
                        _complex_from_pair(m.get("b"), f"map {idx} b"),
                        _complex_from_pair(m.get("c"), f"map {idx} c"),
                        _complex_from_pair(m.get("d"), f"map {idx} d"),
                    )
                )
            except NonInvertibleMapError:
                raise NonInvertibleMapError(
                    idx, f"map {idx}: moebius map has ad - bc = 0"
                ) from None
        else:
            raise SpecFormatError(f"map {idx}: unknown type {kind!r}")
    lams = []
    for m in maps:
        if isinstance(m, AffineMap):
            lams.append(m.lipschitz())
    contractivity = max(lams) if lams and max(lams) < 1.0 else None
    return IfsSystem(space, tuple(maps), contractivity)


def load_spec(path) -> IfsSystem:
    """Load and validate an IFS spec file (JSON)."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecFormatError(
            f"{path}: parse error at line {e.lineno}, column {e.colno}: {e.msg}"
        ) from None
    return parse_spec(data)


def save_spec(ifs: IfsSystem, path) -> None:
    Path(path).write_text(json.dumps(ifs.spec_dict(), indent=2) + "\n")


# -- attractor caches ------------------------------------------------------------


def cloud_to_text(cloud: AttractorCloud, ifs_hash: str) -> str:
    lines = [
        f"FBE-CLOUD v1 {ifs_hash} {cloud.epsilon:.17g} {cloud.points.shape[0]}"
    ]
    for row in cloud.points:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def cache_attractor(ifs: IfsSystem, cloud: AttractorCloud, path) -> None:
    Path(path).write_text(cloud_to_text(cloud, ifs.ifs_hash()))


def load_cached(path, ifs: IfsSystem | None = None) -> AttractorCloud:
    """Read a cloud cache; with an IfsSystem given, the stored hash must match."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 5 or header[0] != "FBE-CLOUD" or header[1] != "v1":
            raise SpecFormatError(f"{path}: not an FBE-CLOUD v1 file")
        stored_hash, eps, count = header[2], float(header[3]), int(header[4])
        if ifs is not None and stored_hash != ifs.ifs_hash():
            raise StaleCacheError(
                f"{path}: cache hash {stored_hash} does not match the spec "
                f"hash {ifs.ifs_hash()}"
            )
        pts = np.loadtxt(fh, ndmin=2)
    if pts.shape[0] != count:
        raise SpecFormatError(f"{path}: expected {count} points, found {pts.shape[0]}")
    return AttractorCloud(
        pts, eps, {"ifs_hash": stored_hash, "method": "cache"}
    )


def cache_dir() -> Path | None:
    d = os.environ.get(CACHE_ENV)
    return Path(d) if d else None


def cached_attractor_path(ifs: IfsSystem, cell: float) -> Path | None:
    d = cache_dir()
    if d is None:
        return None
    return d / f"{ifs.ifs_hash()}-{cell:.8g}.cloud"


# -- raster files -----------------------------------------------------------------


def write_pgm(raster, path) -> None:
    Path(path).write_bytes(raster.to_pgm())


def write_csv(raster, path) -> None:
    Path(path).write_text(raster.to_csv())
