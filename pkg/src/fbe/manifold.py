"""The branched fractal manifold: quotient points, the panicle-constrained
path metric, shift actions, leaves, and branch points.

A manifold point is the pair (theta, x): a finite all-negative integer
part and a fractional point of the attractor. The manifold itself is
never materialised; the pair decides the equivalence class.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .addresses import Address, validate
from .errors import (
    AmbiguousMembershipError,
    DomainError,
    EmptyLeafError,
)
from .ifs import AttractorCloud, IfsSystem, coding_map

Word = tuple[int, ...]


@dataclass(eq=False)
class ManifoldPoint:
    theta: Word
    x: np.ndarray
    proj: np.ndarray

    def same_point(self, other: "ManifoldPoint", tau: float) -> bool:
        """Quotient equality: equal integer parts, fractional parts within tau."""
        return self.theta == other.theta and (
            float(np.linalg.norm(self.x - other.x)) <= tau
        )

    def __repr__(self):
        theta = ".".join(str(d) for d in self.theta) or "()"
        return f"ManifoldPoint(theta={theta}, x={np.round(self.x, 6)})"


def manifold_point(
    ifs: IfsSystem, cloud: AttractorCloud, theta, x
) -> ManifoldPoint:
    """Validated constructor: x in A, and outside f_i(A) when theta ends in -i."""
    theta = tuple(int(d) for d in theta)
    if any(d >= 0 for d in theta):
        raise DomainError("integer part must be a word over the negative digits")
    x = np.asarray(x, dtype=float).reshape(-1)
    if cloud.dist_point(x) > cloud.tau:
        raise DomainError("fractional point is not on the attractor cloud")
    if theta:
        i = -theta[-1]
        fi = ifs.transform(i, cloud.points)
        if float(cKDTree(fi).query(x[None, :])[0][0]) <= cloud.tau:
            raise DomainError(
                "fractional point lies in f_i(A): not a leaf representative"
            )
    proj = ifs.apply_word_point(theta, x)
    return ManifoldPoint(theta=theta, x=x, proj=proj)


def canonicalize(
    ifs: IfsSystem,
    cloud: AttractorCloud,
    addr: Address,
    tol: float = 1e-10,
) -> ManifoldPoint:
    """Split an address into integer part and fractional projection.

    Scans for the least k with pi(S^k(addr)) on the cloud; distances in
    the (tau, 2*tau] annulus are refused as ambiguous rather than guessed,
    since the class genuinely changes across the attractor boundary.
    """
    cls = validate(addr, ifs.n_maps)
    if not addr.is_infinite or not cls.in_Ihat:
        raise DomainError(f"address {addr} is not a negatives-then-positives word")
    neg_count = 0
    while addr.digit(neg_count + 1) < 0:
        neg_count += 1
    tau = cloud.tau
    for k in range(neg_count + 1):
        val = coding_map(ifs, addr.shifted(k), tol=tol)
        d = cloud.dist_point(val)
        if d <= tau:
            theta = addr.prefix(k)
            return ManifoldPoint(
                theta=theta, x=val, proj=ifs.apply_word_point(theta, val)
            )
        if d <= 2 * tau:
            raise AmbiguousMembershipError(
                f"pi(S^{k}({addr})) at distance {d:.3g} from the cloud "
                f"(tau={tau:.3g}): membership is ambiguous at this resolution"
            )
    raise AmbiguousMembershipError(
        f"no suffix of {addr} landed on the cloud within tau"
    )


def common_prefix(a: ManifoldPoint | Word, b: ManifoldPoint | Word) -> Word:
    """Longest common prefix of the two integer parts."""
    ta = a.theta if isinstance(a, ManifoldPoint) else tuple(a)
    tb = b.theta if isinstance(b, ManifoldPoint) else tuple(b)
    out = []
    for da, db in zip(ta, tb):
        if da != db:
            break
        out.append(da)
    return tuple(out)


@dataclass
class ManifoldDistance:
    d_L: float
    d_X: float
    common_prefix: Word
    error_bound: float


def distance(
    ifs: IfsSystem,
    cloud: AttractorCloud,
    a: ManifoldPoint,
    b: ManifoldPoint,
) -> ManifoldDistance:
    """Panicle-constrained path metric between two manifold points.

    Minimises d(proj_a, x) + d(x, proj_b) over the transformed cloud
    f_{[a,b]}(A); the discretisation error is at most 2*Lip(f_{[a,b]})*eps
    and is reported alongside the value.
    """
    common = common_prefix(a, b)
    d_X = float(np.linalg.norm(a.proj - b.proj))
    lip = ifs.word_lipschitz(common) if common else 1.0
    bound = 2.0 * lip * cloud.epsilon
    if a.theta == b.theta and np.array_equal(a.x, b.x):
        return ManifoldDistance(0.0, d_X, common, bound)
    pts = ifs.apply_word(common, cloud.points)
    tot = np.linalg.norm(pts - a.proj, axis=1) + np.linalg.norm(
        pts - b.proj, axis=1
    )
    return ManifoldDistance(float(tot.min()), d_X, common, bound)


def sigma_tilde(
    ifs: IfsSystem,
    cloud: AttractorCloud,
    n: int,
    a: ManifoldPoint,
) -> ManifoldPoint:
    """Shift action on the manifold; satisfies proj(sigma_tilde_n(a)) = f_n(proj(a)).

    Negative n always acts (prepend, or fall back into the attractor);
    positive n acts when it cancels the leading integer digit or when the
    integer part is empty. Other positive shifts leave the manifold.
    """
    ifs.check_digit(n)
    tau = cloud.tau
    if n < 0:
        new_proj = ifs.transform(n, a.proj[None, :])[0]
        d = cloud.dist_point(new_proj)
        if d <= tau:
            return ManifoldPoint(theta=(), x=new_proj, proj=new_proj)
        if d <= 2 * tau:
            raise AmbiguousMembershipError(
                f"f_{n}(proj) at distance {d:.3g} from the cloud: ambiguous"
            )
        return ManifoldPoint(theta=(n,) + a.theta, x=a.x, proj=new_proj)
    if not a.theta:
        new_x = ifs.transform(n, a.x[None, :])[0]
        return ManifoldPoint(theta=(), x=new_x, proj=new_x)
    if a.theta[0] == -n:
        new_proj = ifs.transform(n, a.proj[None, :])[0]
        return ManifoldPoint(theta=a.theta[1:], x=a.x, proj=new_proj)
    raise DomainError(
        f"sigma_{n} maps this point outside the manifold "
        f"(integer part starts with {a.theta[0]})"
    )


def enumerate_leaves(n_maps: int, depth: int) -> list[Word]:
    """All integer parts up to the given length, length-then-lex order."""
    if depth < 0:
        raise DomainError("depth must be >= 0")
    digits = [-i for i in range(1, n_maps + 1)]
    out: list[Word] = [()]
    for length in range(1, depth + 1):
        out.extend(itertools.product(digits, repeat=length))
    return out


def leaf_projection(
    ifs: IfsSystem, cloud: AttractorCloud, theta
) -> np.ndarray:
    """Points of the leaf's projection: f_theta(A minus f_i(A)), i = -theta[-1]."""
    theta = tuple(int(d) for d in theta)
    if not theta:
        return cloud.points.copy()
    if any(d >= 0 for d in theta):
        raise DomainError("leaf labels are words over the negative digits")
    i = -theta[-1]
    fi = ifs.transform(i, cloud.points)
    dist = cKDTree(fi).query(cloud.points)[0]
    kept = cloud.points[dist > cloud.tau]
    if kept.size == 0:
        raise EmptyLeafError(f"leaf {theta} projects to nothing (A == f_{i}(A)?)")
    return ifs.apply_word(theta, kept)


# -- branch points ---------------------------------------------------------------


def _cluster_1d_or_nd(points: np.ndarray, radius: float) -> list[np.ndarray]:
    """Greedy clustering: centres of groups of points within `radius`."""
    remaining = points.copy()
    centres = []
    while remaining.shape[0]:
        seed = remaining[0]
        mask = np.linalg.norm(remaining - seed, axis=1) <= radius
        centres.append(remaining[mask].mean(axis=0))
        remaining = remaining[~mask]
    return centres


def _greedy_address(
    ifs: IfsSystem, cloud: AttractorCloud, z: np.ndarray, length: int = 48
) -> list[int]:
    """Extract a positive address of a point on A by repeated pullback.

    Every pullback is snapped to the nearest cloud point: the inverse maps
    expand, so an initial offset of cloud resolution would otherwise
    compound geometrically and corrupt the digit tail.
    """
    digits = []
    _, idx = cloud.tree.query(np.atleast_2d(z))
    z = cloud.points[int(np.atleast_1d(idx)[0])]
    for _ in range(length):
        best, best_d, best_z = None, np.inf, None
        for j in range(1, ifs.n_maps + 1):
            pulled = ifs.transform(-j, z[None, :])
            d, i = cloud.tree.query(pulled)
            d, i = float(np.atleast_1d(d)[0]), int(np.atleast_1d(i)[0])
            if d < best_d - 1e-15:
                best, best_d, best_z = j, d, cloud.points[i]
        digits.append(best)
        z = best_z
    return digits


def _eventually_periodic(digits: list[int]) -> Address | None:
    """Smallest (preperiod, period) consistent with the digit sample."""
    n = len(digits)
    for period in range(1, 7):
        for pre in range(0, 17):
            if pre + 2 * period > n:
                break
            if all(
                digits[t] == digits[pre + (t - pre) % period] for t in range(pre, n)
            ):
                return Address(tuple(digits[:pre]), tuple(digits[pre : pre + period]))
    return None


def _gluing_points(
    ifs: IfsSystem, cloud: AttractorCloud, i: int
) -> list[np.ndarray]:
    """Refined points of f_i(A) that are limits of A minus f_i(A).

    Detected from the cloud at tolerance tau, then sharpened to coding-map
    accuracy by extracting an eventually-periodic address.
    """
    tau = cloud.tau
    fi = ifs.transform(i, cloud.points)
    d_fi = cKDTree(fi).query(cloud.points)[0]
    far = cloud.points[d_fi > tau]
    if far.shape[0] == 0:
        return []
    inside = cloud.points[d_fi <= tau]
    if inside.shape[0] == 0:
        return []
    d_far = cKDTree(far).query(inside)[0]
    cand = inside[d_far <= 2 * tau]
    if cand.shape[0] == 0:
        return []
    out = []
    # The pullback walk doubles an epsilon-size offset every step, so only
    # about log2(margin / epsilon) digits are trustworthy; the detected
    # address is validated against the cluster before it replaces it.
    window = int(np.clip(np.log2(0.25 / max(cloud.epsilon, 1e-15)), 8, 40))
    for centre in _cluster_1d_or_nd(cand, 8 * tau):
        refined = centre
        digits = _greedy_address(ifs, cloud, centre, length=window)
        addr = _eventually_periodic(digits)
        if addr is not None:
            exact = coding_map(ifs, addr, tol=1e-12)
            if np.linalg.norm(exact - centre) <= 4 * tau:
                refined = exact
        out.append(refined)
    return out


def _chain_compatible(theta: Word, phi: Word) -> bool:
    k = min(len(theta), len(phi))
    return theta[:k] == phi[:k]


def branch_points(
    ifs: IfsSystem,
    cloud: AttractorCloud,
    depth: int,
    tol: float | None = None,
) -> list[tuple[ManifoldPoint, int]]:
    """Detect branch points from leaf-closure gluings up to `depth`.

    Candidates are the gluing points of consecutive leaf closures along
    each map's own inverse-iterate chain (the overline(-j) panicles);
    the incidence count is the number of chain-compatible leaf closures
    through the point. Points with fewer than two incident leaves are
    dropped. Systems whose first-level images are separated (empty
    gluing sets) have no branch points.
    """
    tol = 2 * cloud.tau if tol is None else tol
    if depth < 1:
        return []
    glue = {i: _gluing_points(ifs, cloud, i) for i in range(1, ifs.n_maps + 1)}
    if all(not g for g in glue.values()):
        return []

    leaves = enumerate_leaves(ifs.n_maps, depth)
    closure_clouds = {}
    for phi in leaves:
        if not phi:
            closure_clouds[phi] = cloud.points
            continue
        i = -phi[-1]
        fi = ifs.transform(i, cloud.points)
        dist = cKDTree(fi).query(cloud.points)[0]
        base = cloud.points[dist > cloud.tau]
        extras = glue[i]
        if extras:
            base = np.vstack([base] + [g[None, :] for g in extras])
        closure_clouds[phi] = ifs.apply_word(phi, base)
    closure_trees = {phi: cKDTree(pts) for phi, pts in closure_clouds.items()}

    found: list[tuple[np.ndarray, Word, np.ndarray, int]] = []
    for j in range(1, ifs.n_maps + 1):
        for g in glue[j]:
            for k in range(1, depth + 1):
                theta = ((-j),) * k
                b = ifs.apply_word_point(theta, g)
                # canonical class of the gluing point: trim theta while the
                # partial unwinding still sits on the cloud
                kk = 0
                while kk <= k:
                    y = ifs.apply_word_point(theta[kk:], g)
                    if cloud.dist_point(y) <= cloud.tau:
                        break
                    kk += 1
                cls_theta = theta[:kk]
                x = ifs.apply_word_point(theta[kk:], g)
                incidence = sum(
                    1
                    for phi in leaves
                    if _chain_compatible(cls_theta, phi)
                    and float(closure_trees[phi].query(b[None, :])[0][0]) <= tol
                )
                if incidence >= 2:
                    found.append((b, cls_theta, x, incidence))

    results: list[tuple[ManifoldPoint, int]] = []
    for b, cls_theta, x, inc in found:
        dup = any(np.linalg.norm(mp.proj - b) <= tol for mp, _ in results)
        if not dup:
            results.append(
                (ManifoldPoint(theta=cls_theta, x=x, proj=b), inc)
            )
    results.sort(key=lambda t: tuple(np.round(t[0].proj, 9)))
    return results
