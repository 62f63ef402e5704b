"""IFS systems, attractor clouds, the coding map and its extension.

Composition follows the convention f_{w} = f_{w_1} o f_{w_2} o ... o f_{w_k}
(the last digit acts first); negative digits denote inverse maps.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .addresses import Address, positive_tail_index, sigma, validate
from .errors import DomainError, NoConvergenceError
from .maps import AffineMap, MoebiusMap, fibonacci_sphere, from_sphere, to_sphere

SPACE_DIMS = {"R1": 1, "R2": 2, "R4": 4, "sphere": 3}

Word = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class IfsSystem:
    space: str
    maps: tuple
    contractivity: float | None = None

    def __post_init__(self):
        if self.space not in SPACE_DIMS:
            raise ValueError(f"unknown space {self.space!r}")
        maps = tuple(self.maps)
        if not maps:
            raise ValueError("an IFS needs at least one map")
        dim = SPACE_DIMS[self.space]
        for i, m in enumerate(maps):
            if self.space == "sphere" and not isinstance(m, MoebiusMap):
                raise ValueError(f"map {i + 1}: sphere systems take moebius maps")
            if self.space != "sphere" and not isinstance(m, AffineMap):
                raise ValueError(f"map {i + 1}: {self.space} systems take affine maps")
            if isinstance(m, AffineMap) and m.dim != dim:
                raise ValueError(f"map {i + 1} has dimension {m.dim}, expected {dim}")
        object.__setattr__(self, "maps", maps)
        object.__setattr__(self, "_inverses", tuple(m.inverse() for m in maps))

    @property
    def n_maps(self) -> int:
        return len(self.maps)

    @property
    def dim(self) -> int:
        return SPACE_DIMS[self.space]

    @property
    def is_sphere(self) -> bool:
        return self.space == "sphere"

    def map_for(self, digit: int):
        if digit > 0:
            return self.maps[digit - 1]
        return self._inverses[-digit - 1]

    def check_digit(self, digit: int):
        if digit == 0 or abs(digit) > self.n_maps:
            raise DomainError(f"digit {digit} outside alphabet for N={self.n_maps}")

    def transform(self, digit: int, pts: np.ndarray) -> np.ndarray:
        self.check_digit(digit)
        return self.map_for(digit)(pts)

    def apply_word(self, word: Word, pts: np.ndarray) -> np.ndarray:
        """f_{w_1} o ... o f_{w_k} applied to points (w_k acts first)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        for d in reversed(word):
            pts = self.transform(d, pts)
        return pts

    def apply_word_point(self, word: Word, x) -> np.ndarray:
        return self.apply_word(word, np.atleast_2d(x))[0]

    # -- Lipschitz estimates --------------------------------------------------

    def _sphere_samples(self, region: np.ndarray | None) -> np.ndarray:
        pts = fibonacci_sphere(2048) if region is None else np.atleast_2d(region)
        return from_sphere(pts)

    def map_lipschitz(self, digit: int, region: np.ndarray | None = None) -> float:
        """Upper Lipschitz bound for one (possibly inverse) map.

        Affine bounds are exact singular values; Moebius bounds are sampled
        maxima of the chordal derivative and should be read as estimates.
        """
        self.check_digit(digit)
        m = self.map_for(digit)
        if isinstance(m, AffineMap):
            return m.lipschitz()
        return m.lipschitz(self._sphere_samples(region))

    def word_lipschitz(self, word: Word, region: np.ndarray | None = None) -> float:
        out = 1.0
        for d in word:
            out *= self.map_lipschitz(d, region)
        return out

    def lam(self, region: np.ndarray | None = None) -> float:
        """Contraction factor: declared if present, else estimated."""
        if self.contractivity is not None:
            return self.contractivity
        return max(self.map_lipschitz(i, region) for i in range(1, self.n_maps + 1))

    # -- base points in the basin ----------------------------------------------

    def base_points(self) -> np.ndarray:
        """Two (usually distinct) points in the basin, as embedded points."""
        if self.is_sphere:
            z1 = self.maps[0].attracting_fixed_point()
            z2 = self.maps[-1].attracting_fixed_point()
            if abs(z1 - z2) < 1e-12:
                z2 = self.maps[-1].apply_complex(np.array([z1 + 0.25]))[0]
            return np.vstack([to_sphere(np.array([z1])), to_sphere(np.array([z2]))])
        p1 = self.maps[0].fixed_point()
        p2 = self.maps[-1].fixed_point()
        if np.linalg.norm(p1 - p2) < 1e-12:
            p2 = p1 + 0.25
        return np.vstack([p1, p2])

    def identity_composition(self):
        if self.is_sphere:
            return MoebiusMap(1.0, 0.0, 0.0, 1.0)
        return AffineMap(np.eye(self.dim), np.zeros(self.dim))

    def dual(self) -> "IfsSystem":
        """The system of inverse maps, same digit order."""
        return IfsSystem(self.space, tuple(m.inverse() for m in self.maps))

    def spec_dict(self) -> dict:
        return {
            "space": self.space,
            "maps": [m.coefficients() for m in self.maps],
        }

    def ifs_hash(self) -> str:
        blob = json.dumps(self.spec_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def dual(ifs: IfsSystem) -> IfsSystem:
    return ifs.dual()


@dataclass(frozen=True)
class LipschitzBound:
    value: float
    estimate: bool  # True when sampled (Moebius) rather than exact (affine)

    def __float__(self) -> float:
        return self.value


def lipschitz_bound(
    ifs: IfsSystem, map_index: int, region: np.ndarray | None = None
) -> LipschitzBound:
    """Lipschitz bound of one signed-digit map over a region.

    Affine bounds are exact singular values; Moebius bounds are sampled
    maxima of the chordal derivative, flagged as estimates. The chordal
    derivative of a Moebius map is globally bounded, so no region makes
    the bound blow up.
    """
    return LipschitzBound(
        value=ifs.map_lipschitz(map_index, region),
        estimate=ifs.is_sphere,
    )


# -- attractor clouds ----------------------------------------------------------


@dataclass(eq=False)
class AttractorCloud:
    """Finite approximation of an attractor with a stated resolution."""

    points: np.ndarray
    epsilon: float
    meta: dict = field(default_factory=dict)
    _tree: cKDTree | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.size == 0:
            raise DomainError("attractor cloud cannot be empty")
        self.points = pts

    @property
    def tau(self) -> float:
        """Membership tolerance: a point is 'in A' within tau of the cloud."""
        return 3.0 * self.epsilon

    @property
    def tree(self) -> cKDTree:
        if self._tree is None:
            self._tree = cKDTree(self.points)
        return self._tree

    def nearest_dist(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        d, _ = self.tree.query(pts)
        return np.atleast_1d(d)

    def dist_point(self, x) -> float:
        return float(self.nearest_dist(np.atleast_2d(x))[0])

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.points.min(axis=0), self.points.max(axis=0)


def grid_dedup(pts: np.ndarray, cell: float) -> np.ndarray:
    """Keep one representative per grid cell: the cell centre.

    Order-independent (np.unique sorts), so parallel or reordered
    evaluation produces identical clouds.
    """
    idx = np.floor(pts / cell).astype(np.int64)
    uniq = np.unique(idx, axis=0)
    return (uniq + 0.5) * cell


def hausdorff_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Exact Hausdorff distance between finite point sets.

    Nearest-neighbour queries use a KD-tree; identical to the O(|a||b|)
    brute force.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise DomainError("hausdorff distance needs nonempty sets")
    d_ab = cKDTree(b).query(a)[0].max()
    d_ba = cKDTree(a).query(b)[0].max()
    return float(max(d_ab, d_ba))


def _estimate_lam(ifs: IfsSystem, pts: np.ndarray) -> float:
    region = pts if ifs.is_sphere else None
    return ifs.lam(region)


def attractor(
    ifs: IfsSystem,
    seed: np.ndarray,
    depth: int = 80,
    cell: float = 1e-3,
) -> AttractorCloud:
    """Hutchinson iteration with grid dedup at `cell`.

    Stops once successive clouds are within `cell` in Hausdorff distance;
    raises NoConvergenceError (carrying the last residual) if `depth`
    iterations do not get there. The recorded resolution cell/(1-lam)
    covers the stationary error: the per-step snapping displacement is at
    most cell*sqrt(d)/2 <= cell for d <= 4.
    """
    pts = grid_dedup(np.atleast_2d(np.asarray(seed, dtype=float)), cell)
    residual = np.inf
    used = 0
    converged = False
    for it in range(depth):
        imgs = np.concatenate(
            [ifs.transform(i, pts) for i in range(1, ifs.n_maps + 1)]
        )
        new = grid_dedup(imgs, cell)
        residual = hausdorff_distance(new, pts)
        pts = new
        used = it + 1
        if residual <= cell:
            converged = True
            break
    if not converged:
        raise NoConvergenceError(
            f"no convergence after {used} iterations (residual {residual:.3g})",
            residual=residual,
        )
    lam = _estimate_lam(ifs, pts)
    contractive = lam < 1.0
    eps = cell / (1.0 - lam) if contractive else 4.0 * cell
    meta = {
        "ifs_hash": ifs.ifs_hash(),
        "method": "hutchinson",
        "depth": used,
        "cell": cell,
        "lam": lam,
        "contractive": contractive,
        "residual": residual,
    }
    return AttractorCloud(pts, eps, meta)


def chaos_game(
    ifs: IfsSystem,
    n: int,
    burn_in: int = 64,
    rng_seed: int = 0,
) -> AttractorCloud:
    """Random-orbit cloud; deterministic for a given seed (PCG64)."""
    if n <= burn_in:
        raise DomainError("n must exceed burn_in")
    rng = np.random.Generator(np.random.PCG64(rng_seed))
    digits = rng.integers(1, ifs.n_maps + 1, size=n)
    x = ifs.base_points()[0]
    out = np.empty((n - burn_in, ifs.dim))
    if ifs.is_sphere:
        z = from_sphere(x[None, :])
        for k, d in enumerate(digits):
            z = ifs.maps[d - 1].apply_complex(z)
            if k >= burn_in:
                out[k - burn_in] = to_sphere(z)[0]
    else:
        mats = [m.matrix for m in ifs.maps]
        offs = [m.offset for m in ifs.maps]
        for k, d in enumerate(digits):
            x = mats[d - 1] @ x + offs[d - 1]
            if k >= burn_in:
                out[k - burn_in] = x
    residual = hausdorff_distance(
        np.concatenate([ifs.transform(i, out) for i in range(1, ifs.n_maps + 1)]),
        out,
    )
    lam = _estimate_lam(ifs, out)
    contractive = lam < 1.0
    eps = residual / (1.0 - lam) if contractive else 4.0 * residual
    meta = {
        "ifs_hash": ifs.ifs_hash(),
        "method": "chaos",
        "n": n,
        "burn_in": burn_in,
        "rng": "PCG64",
        "rng_seed": rng_seed,
        "lam": lam,
        "contractive": contractive,
        "residual": residual,
    }
    return AttractorCloud(out, eps, meta)


# -- coding map -----------------------------------------------------------------


def _eval_prefix_at(ifs: IfsSystem, tail: Address, k: int, base_z, base_pts):
    """f_{tail|k}(b) for both base points, by one backward pass.

    Composed matrices degenerate numerically as the composition collapses
    to a constant map, so the evaluation walks the word from the inside
    out on points instead.
    """
    if ifs.is_sphere:
        z = base_z.copy()
        for i in range(k, 0, -1):
            z = ifs.maps[tail.digit(i) - 1].apply_complex(z)
        return to_sphere(z)
    pts = base_pts
    for i in range(k, 0, -1):
        m = ifs.maps[tail.digit(i) - 1]
        pts = pts @ m.matrix.T + m.offset
    return pts


def coding_map(ifs: IfsSystem, addr: Address, tol: float = 1e-10) -> np.ndarray:
    """Limit point of f_{addr|k}(b): the address's projection into X.

    Accepts any address whose tail is eventually all-positive; the finite
    (possibly inverse-containing) prefix is applied after the tail limit
    converges. The limit is cross-checked with two base points.
    """
    cls = validate(addr, ifs.n_maps)
    if not addr.is_infinite or not cls.in_Jplus:
        raise DomainError(f"address {addr} is not in the coding map's domain")
    K = positive_tail_index(addr)
    prefix = addr.prefix(K)
    tail = addr.shifted(K)

    pre_lip = ifs.word_lipschitz(prefix) if prefix else 1.0
    tail_tol = tol / max(1.0, pre_lip)
    lam = ifs.lam()
    if lam < 1.0:
        step_tol = tail_tol * min(1.0, (1.0 - lam) / max(lam, 1e-9))
    else:
        step_tol = tail_tol / 8.0

    base_z = from_sphere(ifs.base_points()) if ifs.is_sphere else None
    base_pts = None if ifs.is_sphere else ifs.base_points()
    k = 16
    cap = 1 << 22
    step = np.inf
    while k <= cap:
        cur = _eval_prefix_at(ifs, tail, k, base_z, base_pts)
        nxt = _eval_prefix_at(ifs, tail, k + 1, base_z, base_pts)
        step = float(np.linalg.norm(nxt - cur, axis=1).max())
        spread = float(np.linalg.norm(cur[0] - cur[1]))
        if step < step_tol and spread <= 2.0 * tail_tol:
            return ifs.apply_word(prefix, cur[:1])[0]
        k *= 2
    raise NoConvergenceError(
        f"coding map did not converge for {addr}", residual=step
    )


# -- semiconjugacy check ----------------------------------------------------------


@dataclass
class SemiconjugacyReport:
    n_samples: int
    n_checks: int
    max_residual: float
    tol: float
    failures: list

    @property
    def passed(self) -> bool:
        return not self.failures


def random_address(
    rng: np.random.Generator,
    n_maps: int,
    max_pre: int = 4,
    max_period: int = 3,
    tail: str = "positive",
) -> Address:
    """Random valid eventually-periodic address (no adjacent cancellations)."""
    if tail == "positive":
        tail_alphabet = list(range(1, n_maps + 1))
    elif tail == "negative":
        tail_alphabet = list(range(-n_maps, 0))
    else:
        tail_alphabet = [d for d in range(-n_maps, n_maps + 1) if d != 0]
    full = [d for d in range(-n_maps, n_maps + 1) if d != 0]

    while True:
        plen = int(rng.integers(1, max_period + 1))
        period: list[int] = []
        ok = True
        for i in range(plen):
            allowed = [d for d in tail_alphabet if not period or d != -period[-1]]
            if i == plen - 1:
                allowed = [d for d in allowed if d != -period[0]] if period else allowed
            if not allowed:
                ok = False
                break
            period.append(int(rng.choice(allowed)))
        if not ok:
            continue
        klen = int(rng.integers(0, max_pre + 1))
        pre: list[int] = []
        nxt = period[0]
        for _ in range(klen):
            allowed = [d for d in full if d != -nxt]
            pre.insert(0, int(rng.choice(allowed)))
            nxt = pre[0]
        return Address(tuple(pre), tuple(period))


def verify_semiconjugacy(
    ifs: IfsSystem,
    n_samples: int = 100,
    tol: float = 1e-9,
    rng_seed: int = 0,
) -> SemiconjugacyReport:
    """Check d(pi(sigma_n(addr)), f_n(pi(addr))) <= tol on random addresses.

    All n in the signed alphabet are exercised; residuals are measured in
    the system's metric (chordal on the sphere).
    """
    rng = np.random.Generator(np.random.PCG64(rng_seed))
    failures = []
    max_res = 0.0
    checks = 0
    pi_tol = min(tol / 8.0, 1e-10)
    for _ in range(n_samples):
        addr = random_address(rng, ifs.n_maps)
        pi_addr = coding_map(ifs, addr, tol=pi_tol)
        for n in [d for d in range(-ifs.n_maps, ifs.n_maps + 1) if d != 0]:
            lhs = coding_map(ifs, sigma(n, addr), tol=pi_tol)
            rhs = ifs.transform(n, pi_addr[None, :])[0]
            res = float(np.linalg.norm(lhs - rhs))
            checks += 1
            max_res = max(max_res, res)
            if res > tol:
                failures.append({"addr": str(addr), "n": n, "residual": res})
    return SemiconjugacyReport(
        n_samples=n_samples,
        n_checks=checks,
        max_residual=max_res,
        tol=tol,
        failures=failures,
    )
