"""Fractal continuations, fast-basin rasters, membership search, and the
basin-inclusion criterion.

Membership is tolerance-relative in *source* space: a point reaches the
attractor via the word w when it lies within tol of f_w^{-1}(cloud).
For contractive systems this implies the image-space residual
d(f_w(x), cloud) <= tol as well, but the converse would be satisfied by
every point at large depth, so the pullback test is the decisive one.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from .addresses import Address
from .errors import DomainError, ResolutionError
from .ifs import AttractorCloud, IfsSystem, coding_map
from .maps import from_sphere

Word = tuple[int, ...]


class ResolutionWarning(UserWarning):
    """Raster cells finer than the cloud tolerance: hits are tolerance-dominated."""


def _theta_digits(theta, k: int) -> Word:
    """First k digits of a positive word given as Address or sequence."""
    if isinstance(theta, Address):
        if not theta.is_infinite and k > len(theta.pre):
            raise DomainError(
                f"continuation depth {k} exceeds the {len(theta.pre)} digits of theta"
            )
        digits = theta.prefix(k)
    else:
        theta = tuple(theta)
        if k > len(theta):
            raise DomainError(
                f"continuation depth {k} exceeds the {len(theta)} digits of theta"
            )
        digits = theta[:k]
    if any(d <= 0 for d in digits):
        raise DomainError("theta must be a positive word")
    return digits


@dataclass(eq=False)
class ContinuationCloud:
    """Image of the attractor cloud under the first k inverse maps of theta."""

    theta_prefix: Word
    k: int
    points: np.ndarray


def finite_continuation(
    ifs: IfsSystem, cloud: AttractorCloud, theta, k: int
) -> ContinuationCloud:
    """f_{theta_1}^{-1} o ... o f_{theta_k}^{-1} applied to the cloud."""
    digits = _theta_digits(theta, k)
    word = tuple(-d for d in digits)
    pts = ifs.apply_word(word, cloud.points)
    return ContinuationCloud(theta_prefix=digits, k=k, points=pts)


# -- rasters -------------------------------------------------------------------


@dataclass(eq=False)
class Raster:
    """Axis-aligned hit grid with minimal witness depth per cell.

    depth[iy, ix] is the shortest word length whose inverse image touched
    the cell, or -1 for a miss. Row iy=0 is the low-y edge; PGM emission
    flips so the top image row is the high-y edge.
    """

    lo: np.ndarray
    hi: np.ndarray
    nx: int
    ny: int
    depth: np.ndarray

    @property
    def hit(self) -> np.ndarray:
        return self.depth >= 0

    @property
    def hit_count(self) -> int:
        return int(self.hit.sum())

    def to_pgm(self) -> bytes:
        header = f"P5\n{self.nx} {self.ny}\n255\n".encode()
        d = self.depth[::-1, :].astype(np.int32)
        gray = np.where(d < 0, 0, 255 - np.minimum(d * 16, 254)).astype(np.uint8)
        return header + gray.tobytes()

    def to_csv(self) -> str:
        lines = ["ix,iy,depth"]
        ys, xs = np.nonzero(self.hit)
        order = np.lexsort((xs, ys))
        for j in order:
            lines.append(f"{xs[j]},{ys[j]},{self.depth[ys[j], xs[j]]}")
        return "\n".join(lines) + "\n"


def _normalize_region(region) -> tuple[np.ndarray, np.ndarray]:
    region = np.asarray(region, dtype=float)
    if region.shape == (2,):
        lo, hi = np.array([region[0]]), np.array([region[1]])
    elif region.shape == (2, 2):
        lo, hi = region[0].copy(), region[1].copy()
    elif region.shape == (4,):
        lo = np.array([region[0], region[1]])
        hi = np.array([region[2], region[3]])
    else:
        raise DomainError("region must be (x0,x1), (x0,y0,x1,y1) or ((x0,y0),(x1,y1))")
    if np.any(hi <= lo):
        raise DomainError("region must have positive extent")
    return lo, hi


def _raster_coords(ifs: IfsSystem, pts: np.ndarray) -> np.ndarray:
    """Project ambient points to raster coordinates.

    R1/R2 points pass through; the sphere projects to the complex plane
    (points at infinity are dropped); higher-dimensional affine spaces
    use their first two coordinates.
    """
    if ifs.space == "sphere":
        z = from_sphere(pts)
        finite = np.isfinite(z.real) & np.isfinite(z.imag)
        z = z[finite]
        return np.stack([z.real, z.imag], axis=1)
    if ifs.dim > 2:
        return pts[:, :2]
    return pts


class _RasterGrid:
    def __init__(self, lo, hi, nx, ny, tau):
        self.lo, self.hi = lo, hi
        self.nx, self.ny = nx, ny
        self.tau = tau
        self.rdim = lo.shape[0]
        self.widths = (hi - lo) / np.array([nx, ny][: self.rdim])
        self.depth = np.full((ny, nx), np.iinfo(np.int32).max, dtype=np.int32)

    def _axis_ranges(self, vals, axis, n):
        w = self.widths[axis]
        lo = np.floor((vals - self.tau - self.lo[axis]) / w).astype(np.int64)
        hi = np.floor((vals + self.tau - self.lo[axis]) / w).astype(np.int64)
        return np.clip(lo, 0, n - 1), np.clip(hi, 0, n - 1), lo <= n - 1, hi >= 0

    def mark(self, pts: np.ndarray, word_len: int):
        if pts.size == 0:
            return
        x = pts[:, 0]
        ix_lo, ix_hi, okx1, okx2 = self._axis_ranges(x, 0, self.nx)
        keep = okx1 & okx2
        if self.rdim == 2:
            y = pts[:, 1]
            iy_lo, iy_hi, oky1, oky2 = self._axis_ranges(y, 1, self.ny)
            keep &= oky1 & oky2
        if not keep.any():
            return
        ix_lo, ix_hi = ix_lo[keep], ix_hi[keep]
        if self.rdim == 2:
            iy_lo, iy_hi = iy_lo[keep], iy_hi[keep]
        else:
            iy_lo = np.zeros(ix_lo.shape, dtype=np.int64)
            iy_hi = iy_lo
        span_x = int((ix_hi - ix_lo).max())
        span_y = int((iy_hi - iy_lo).max())
        for dy in range(span_y + 1):
            iy = iy_lo + dy
            vy = iy <= iy_hi
            for dx in range(span_x + 1):
                ix = ix_lo + dx
                v = vy & (ix <= ix_hi)
                if not v.any():
                    continue
                flat = iy[v] * self.nx + ix[v]
                np.minimum.at(self.depth.ravel(), flat, word_len)

    def finalize(self) -> Raster:
        depth = self.depth.copy()
        depth[depth == np.iinfo(np.int32).max] = -1
        return Raster(lo=self.lo, hi=self.hi, nx=self.nx, ny=self.ny, depth=depth)


def _prune_radius(ifs, cloud, lo, hi, tau) -> float | None:
    """Sound prune bound for contractive affine systems.

    Inverse maps do not decrease distance to the attractor, so once every
    image point is farther from the cloud than any region point can be,
    no descendant word can mark a cell.
    """
    if ifs.is_sphere:
        return None
    rdim = lo.shape[0]
    if ifs.dim != rdim:
        return None  # region constrains a projection only; no sound bound
    lams = [ifs.map_lipschitz(i) for i in range(1, ifs.n_maps + 1)]
    if max(lams) >= 1.0:
        return None
    corners = np.array(
        [[lo[0] - tau], [hi[0] + tau]]
        if rdim == 1
        else [
            [lo[0] - tau, lo[1] - tau],
            [lo[0] - tau, hi[1] + tau],
            [hi[0] + tau, lo[1] - tau],
            [hi[0] + tau, hi[1] + tau],
        ]
    )
    corner_d = cloud.nearest_dist(corners).max()
    half_diag = 0.5 * float(np.linalg.norm(hi - lo + 2 * tau))
    return corner_d + half_diag + 10.0 * cloud.epsilon


def fast_basin_raster(
    ifs: IfsSystem,
    cloud: AttractorCloud,
    region,
    nx: int,
    ny: int = 1,
    depth: int = 3,
    tau: float | None = None,
) -> Raster:
    """Mark cells hit by f_w^{-1}(cloud) over all positive words |w| <= depth.

    A cell is hit when a transformed cloud point lies in the closed cell
    inflated by tau; the recorded value is the minimal word length.
    """
    if depth < 0:
        raise DomainError("depth must be >= 0")
    lo, hi = _normalize_region(region)
    tau = cloud.tau if tau is None else tau
    grid = _RasterGrid(lo, hi, nx, ny, tau)
    if grid.widths.min() < tau:
        warnings.warn(
            "raster cells are smaller than the membership tolerance",
            ResolutionWarning,
            stacklevel=2,
        )
    rmax = _prune_radius(ifs, cloud, lo, hi, tau)
    stack = [(0, cloud.points)]
    while stack:
        word_len, pts = stack.pop()
        grid.mark(_raster_coords(ifs, pts), word_len)
        if word_len >= depth:
            continue
        if rmax is not None and cloud.nearest_dist(pts).min() > rmax:
            continue
        for n in range(ifs.n_maps, 0, -1):
            stack.append((word_len + 1, ifs.transform(-n, pts)))
    return grid.finalize()


def raster_from_continuations(
    ifs: IfsSystem,
    cloud: AttractorCloud,
    region,
    nx: int,
    ny: int = 1,
    depth: int = 3,
    tau: float | None = None,
) -> Raster:
    """The same hit set as fast_basin_raster, computed the other way:
    as the union of finite continuations B_{theta|k} over positive words.
    """
    if depth < 0:
        raise DomainError("depth must be >= 0")
    lo, hi = _normalize_region(region)
    tau = cloud.tau if tau is None else tau
    grid = _RasterGrid(lo, hi, nx, ny, tau)
    grid.mark(_raster_coords(ifs, cloud.points), 0)
    for theta in itertools.product(range(1, ifs.n_maps + 1), repeat=depth):
        for k in range(1, depth + 1):
            # Only render theta|k once: skip prefixes shared with an
            # earlier theta in lexicographic order.
            if k < depth and any(d != 1 for d in theta[k:]):
                continue
            pts = finite_continuation(ifs, cloud, theta, k).points
            grid.mark(_raster_coords(ifs, pts), k)
    return grid.finalize()


# -- membership ------------------------------------------------------------------


@dataclass
class MembershipResult:
    status: str  # "yes" | "no_up_to_depth"
    witness: Word | None
    depth_searched: int
    tolerance: float
    distance: float | None = None

    @property
    def reached(self) -> bool:
        return self.status == "yes"


def membership(
    ifs: IfsSystem,
    cloud: AttractorCloud,
    x,
    depth: int = 8,
    tol: float | None = None,
) -> MembershipResult:
    """Breadth-first search for the earliest word w with x in f_w^{-1}(A).

    Words are explored shortest-first with lexicographic tie-break, so the
    witness is canonical. tol must be at least the cloud tolerance tau.
    The decisive test is in source space (distance from x to the pulled
    cloud f_w^{-1}(cloud)); the cheap image-space distance only prunes.
    """
    tol = cloud.tau if tol is None else tol
    if tol < cloud.tau:
        raise ResolutionError(
            f"tol={tol:.3g} is below the cloud tolerance tau={cloud.tau:.3g}"
        )
    x = np.asarray(x, dtype=float).reshape(-1)
    affine = not ifs.is_sphere
    ident = ifs.identity_composition() if affine else None
    # level entries: (word, forward composition | None, lip product)
    level = [((), ident, 1.0)]
    d0 = cloud.dist_point(x)
    if d0 <= tol:
        return MembershipResult("yes", (), 0, tol, d0)
    for k in range(1, depth + 1):
        new_level = []
        for n in range(1, ifs.n_maps + 1):
            f_n = ifs.map_for(n) if affine else None
            lip_n = ifs.map_lipschitz(n)
            for word, fwd, lip in level:
                new_level.append(
                    (
                        (n,) + word,
                        f_n.compose(fwd) if affine else None,
                        lip * lip_n,
                    )
                )
        for word, fwd, lip in new_level:
            if affine:
                y = fwd(x[None, :])[0]
            else:
                y = ifs.apply_word_point(word, x)
            img_d = cloud.dist_point(y)
            if img_d > tol * max(lip, 1e-300):
                continue  # no cloud point can pull back within tol
            pulled = ifs.apply_word(
                tuple(-d for d in reversed(word)), cloud.points
            )
            d = float(np.linalg.norm(pulled - x, axis=1).min())
            if d <= tol:
                return MembershipResult("yes", word, k, tol, d)
        level = new_level
    return MembershipResult("no_up_to_depth", None, depth, tol, None)


def continuation_pullbacks(
    ifs: IfsSystem, cloud: AttractorCloud, theta, depth: int
) -> list[np.ndarray]:
    """Points of B_{theta|k} for k = 0..depth (k=0 is the cloud itself)."""
    out = [cloud.points]
    for k in range(1, depth + 1):
        out.append(finite_continuation(ifs, cloud, theta, k).points)
    return out


def membership_along(
    ifs: IfsSystem,
    cloud: AttractorCloud,
    x,
    theta,
    depth: int,
    tol: float | None = None,
    pullbacks: list[np.ndarray] | None = None,
) -> MembershipResult:
    """Membership restricted to prefixes of theta: is x in B_{theta|k}, k <= depth?

    The witness words are the reversed prefixes of theta.
    """
    tol = cloud.tau if tol is None else tol
    x = np.asarray(x, dtype=float).reshape(-1)
    if pullbacks is None:
        pullbacks = continuation_pullbacks(ifs, cloud, theta, depth)
    for k, pts in enumerate(pullbacks):
        d = float(np.linalg.norm(pts - x, axis=1).min())
        if d <= tol:
            witness = tuple(reversed(_theta_digits(theta, k)))
            return MembershipResult("yes", witness, k, tol, d)
    return MembershipResult("no_up_to_depth", None, depth, tol, None)


# -- reversible periodic words -----------------------------------------------------


def is_reversible_periodic(
    ifs: IfsSystem,
    cloud: AttractorCloud,
    period: Word,
    margin: float,
) -> bool:
    """Sufficient-condition test for a periodic word: the coding-map image
    of the reversed periodic word must sit in the attractor's interior,
    witnessed by a covered ball of radius `margin`.
    """
    period = tuple(period)
    if not period:
        raise DomainError("period must be nonempty")
    if any(d <= 0 for d in period):
        raise DomainError("period must be a positive word")
    if margin < 3.0 * cloud.epsilon:
        raise ResolutionError(
            f"margin {margin:.3g} below 3*epsilon={3 * cloud.epsilon:.3g}"
        )
    if ifs.is_sphere:
        raise DomainError("interior test implemented for affine spaces only")
    p = coding_map(ifs, Address((), tuple(reversed(period))), tol=cloud.epsilon / 4)
    step = cloud.epsilon / 2
    n_side = max(2, int(np.ceil(2 * margin / step)) + 1)
    axes = [np.linspace(-margin, margin, n_side)] * ifs.dim
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, ifs.dim)
    ball = mesh[np.linalg.norm(mesh, axis=1) <= margin] + p
    return bool(cloud.nearest_dist(ball).max() <= cloud.tau)


# -- basin inclusion -----------------------------------------------------------------


@dataclass
class BasinInclusionReport:
    n_samples: int
    reached: int
    results: list
    depth: int
    tol: float
    theta: str | None = None
    failures: list = field(default_factory=list)

    @property
    def fraction(self) -> float:
        return self.reached / self.n_samples if self.n_samples else 0.0


def basin_inclusion_check(
    ifs: IfsSystem,
    cloud: AttractorCloud,
    samples: np.ndarray,
    depth: int,
    tol: float | None = None,
    theta=None,
) -> BasinInclusionReport:
    """Run membership on each sample and report the fraction reaching A.

    With theta supplied, the search is restricted to prefixes of theta
    (the continuation route); otherwise the full word tree is searched.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    tol = cloud.tau if tol is None else tol
    results = []
    failures = []
    reached = 0
    pullbacks = (
        continuation_pullbacks(ifs, cloud, theta, depth) if theta is not None else None
    )
    for x in samples:
        if theta is not None:
            res = membership_along(
                ifs, cloud, x, theta, depth, tol, pullbacks=pullbacks
            )
        else:
            res = membership(ifs, cloud, x, depth, tol)
        results.append(res)
        if res.reached:
            reached += 1
        else:
            failures.append(x.tolist())
    return BasinInclusionReport(
        n_samples=len(samples),
        reached=reached,
        results=results,
        depth=depth,
        tol=tol,
        theta=None if theta is None else str(theta),
        failures=failures,
    )
