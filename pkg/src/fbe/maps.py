"""Invertible map families: affine maps on R^d and Moebius maps on the
Riemann sphere.

Sphere points are stored as unit 3-vectors (stereographic embedding), so
the chordal metric is plain Euclidean distance on the embedding and all
point-cloud machinery is dimension-agnostic. Moebius maps act on complex
values; conversion happens at the map boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonInvertibleMapError

_INF = complex(np.inf, 0.0)


# -- Riemann sphere embedding -------------------------------------------------


def to_sphere(z: np.ndarray) -> np.ndarray:
    """Complex values -> unit-sphere 3-vectors; inf/nan map to the north pole."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    x, y = z.real, z.imag
    out = np.empty(z.shape + (3,), dtype=float)
    with np.errstate(all="ignore"):
        r2 = x * x + y * y
        denom = 1.0 + r2
        out[..., 0] = 2.0 * x / denom
        out[..., 1] = 2.0 * y / denom
        out[..., 2] = (r2 - 1.0) / denom
    bad = ~np.isfinite(z.real) | ~np.isfinite(z.imag) | ~np.isfinite(denom)
    out[bad] = (0.0, 0.0, 1.0)
    return out


def from_sphere(pts: np.ndarray) -> np.ndarray:
    """Unit-sphere 3-vectors -> complex values (north pole -> inf)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    # Re-normalise: grid snapping may leave points slightly off the sphere.
    norms = np.linalg.norm(pts, axis=-1, keepdims=True)
    pts = pts / np.where(norms == 0.0, 1.0, norms)
    denom = 1.0 - pts[..., 2]
    near_pole = denom < 1e-14
    with np.errstate(all="ignore"):
        z = (pts[..., 0] + 1j * pts[..., 1]) / denom
    z[near_pole] = _INF
    return z


def chordal_distance(z: complex, w: complex) -> float:
    return float(np.linalg.norm(to_sphere(np.array([z]))[0] - to_sphere(np.array([w]))[0]))


# -- affine maps ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AffineMap:
    """x -> matrix @ x + offset on R^d."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        t = np.asarray(self.offset, dtype=float).reshape(-1)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != t.shape[0]:
            raise ValueError("matrix must be d x d with a length-d offset")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "offset", t)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return pts @ self.matrix.T + self.offset

    def inverse(self) -> "AffineMap":
        inv = np.linalg.inv(self.matrix)
        return AffineMap(inv, -inv @ self.offset)

    def compose(self, other: "AffineMap") -> "AffineMap":
        """self after other: x -> self(other(x))."""
        return AffineMap(
            self.matrix @ other.matrix,
            self.matrix @ other.offset + self.offset,
        )

    def lipschitz(self) -> float:
        """Exact bound: the largest singular value."""
        return float(np.linalg.svd(self.matrix, compute_uv=False)[0])

    def min_singular(self) -> float:
        return float(np.linalg.svd(self.matrix, compute_uv=False)[-1])

    def fixed_point(self) -> np.ndarray:
        return np.linalg.solve(np.eye(self.dim) - self.matrix, self.offset)

    def coefficients(self):
        return {
            "type": "affine",
            "matrix": self.matrix.tolist(),
            "offset": self.offset.tolist(),
        }


# -- Moebius maps --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MoebiusMap:
    """z -> (a z + b) / (c z + d), normalised to ad - bc = 1."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        a, b, c, d = (complex(v) for v in (self.a, self.b, self.c, self.d))
        det = a * d - b * c
        if det == 0:
            raise NonInvertibleMapError(None, "moebius map has ad - bc = 0")
        s = np.sqrt(complex(det))
        object.__setattr__(self, "a", a / s)
        object.__setattr__(self, "b", b / s)
        object.__setattr__(self, "c", c / s)
        object.__setattr__(self, "d", d / s)

    @property
    def dim(self) -> int:
        return 3

    def apply_complex(self, z: np.ndarray) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.empty_like(z)
        at_inf = ~np.isfinite(z.real) | ~np.isfinite(z.imag)
        zf = np.where(at_inf, 0.0, z)
        num = self.a * zf + self.b
        den = self.c * zf + self.d
        pole = np.abs(den) == 0.0
        with np.errstate(all="ignore"):
            out = num / np.where(pole, 1.0, den)
        out[pole] = _INF
        if self.c == 0:
            out[at_inf] = _INF
        else:
            out[at_inf] = self.a / self.c
        return out

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        """Act on embedded sphere points."""
        return to_sphere(self.apply_complex(from_sphere(pts)))

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    def compose(self, other: "MoebiusMap") -> "MoebiusMap":
        return MoebiusMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    def chordal_derivative(self, z: np.ndarray) -> np.ndarray:
        """Derivative in the chordal metric, (1+|z|^2)/(|cz+d|^2 + |az+b|^2).

        Continuous across the pole; the value at infinity is the limit
        1/(|a|^2 + |c|^2).
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        at_inf = ~np.isfinite(z.real) | ~np.isfinite(z.imag)
        zf = np.where(at_inf, 0.0, z)
        num = 1.0 + np.abs(zf) ** 2
        den = np.abs(self.c * zf + self.d) ** 2 + np.abs(self.a * zf + self.b) ** 2
        out = num / den
        lim = 1.0 / (abs(self.a) ** 2 + abs(self.c) ** 2)
        out[at_inf] = lim
        return out

    def lipschitz(self, z_samples: np.ndarray) -> float:
        """Sampled upper estimate of the chordal derivative over a region."""
        return float(np.max(self.chordal_derivative(z_samples)))

    def fixed_points(self) -> list[complex]:
        """Solutions of c z^2 + (d - a) z - b = 0 (plus inf when c = 0)."""
        if self.c == 0:
            pts = [_INF]
            if self.a != self.d:
                pts.append(self.b / (self.d - self.a))
            return pts
        disc = np.sqrt(complex((self.d - self.a) ** 2 + 4 * self.b * self.c))
        return [
            ((self.a - self.d) + disc) / (2 * self.c),
            ((self.a - self.d) - disc) / (2 * self.c),
        ]

    def attracting_fixed_point(self) -> complex:
        """Fixed point with |f'| <= 1 (|cz + d| >= 1 in the det-1 form)."""

        def strength(z):
            if not np.isfinite(z.real) or not np.isfinite(z.imag):
                return abs(self.a)  # derivative at inf is |d/a|^... via a/d
            return abs(self.c * z + self.d)

        return max(self.fixed_points(), key=strength)

    def coefficients(self):
        return {
            "type": "moebius",
            "a": [self.a.real, self.a.imag],
            "b": [self.b.real, self.b.imag],
            "c": [self.c.real, self.c.imag],
            "d": [self.d.real, self.d.imag],
        }


def fibonacci_sphere(n: int = 2048) -> np.ndarray:
    """Deterministic quasi-uniform sample of the unit sphere."""
    i = np.arange(n, dtype=float)
    phi = np.pi * (3.0 - np.sqrt(5.0)) * i
    z = 1.0 - 2.0 * (i + 0.5) / n
    r = np.sqrt(1.0 - z * z)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
