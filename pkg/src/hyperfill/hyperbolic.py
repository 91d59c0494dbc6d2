"""Hyperboloid model of hyperbolic n-space.

Points live on the upper sheet of ``<v, v> = -1`` inside Minkowski space
R^{n,1}. The form is ``x_0 y_0 + ... + x_{n-1} y_{n-1} - x_n y_n``, i.e. the
timelike coordinate is the *last* one, which keeps the upper half space
coordinates aligned with the spatial ones.

Most functions accept either the small wrapper types defined here or raw
arrays whose last axis holds the n+1 coordinates; the array versions
broadcast, which the curve and surface code rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hyperfill.errors import DimensionError, InvalidPointError

#: default tolerance on |<v,v> + 1| for points and <dir, base> for tangents
POINT_TOL = 1e-9


def _coords(x):
    if isinstance(x, (HPoint, MinkowskiVector)):
        return x.coords
    if isinstance(x, HTangent):
        return x.dir
    arr = np.asarray(x)
    return arr if arr.dtype.kind == "f" else arr.astype(float)


def minkowski_inner(u, v):
    """Minkowski form with signature (n, 1), negative on the last coordinate.

    Broadcasts over leading axes.
    """
    u = _coords(u)
    v = _coords(v)
    if u.shape[-1] != v.shape[-1]:
        raise DimensionError(
            f"dimension mismatch: {u.shape[-1]} vs {v.shape[-1]}")
    return (np.sum(u[..., :-1] * v[..., :-1], axis=-1)
            - u[..., -1] * v[..., -1])


def minkowski_norm_sq(u):
    return minkowski_inner(u, u)


def normalize_point(v):
    """Project an array of timelike vectors onto the upper sheet."""
    v = np.asarray(v, dtype=float)
    q = -minkowski_norm_sq(v)
    if np.any(q <= 0):
        raise InvalidPointError("vector is not timelike")
    out = v / np.sqrt(q)[..., None]
    return np.where((out[..., -1] < 0)[..., None], -out, out)


@dataclass(frozen=True, eq=False)
class MinkowskiVector:
    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float)
        if c.ndim != 1 or c.shape[0] < 3:
            raise DimensionError("need a 1-d vector of length n+1 >= 3")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def n(self) -> int:
        return self.coords.shape[0] - 1


@dataclass(frozen=True, eq=False)
class HPoint:
    """A point of H^n.

    Near misses are renormalized onto the hyperboloid instead of being
    rejected; anything further than ``tol`` (or not timelike, or on the
    lower sheet) raises.
    """

    coords: np.ndarray
    tol: float = POINT_TOL

    def __post_init__(self):
        c = np.array(self.coords, dtype=float)
        if c.ndim != 1 or c.shape[0] < 3:
            raise DimensionError("need a 1-d vector of length n+1 >= 3")
        q = minkowski_norm_sq(c)
        if c[-1] <= 0:
            raise InvalidPointError("point is not on the upper sheet")
        if abs(q + 1.0) > self.tol * max(1.0, c[-1] ** 2):
            raise InvalidPointError(f"<v,v> = {q!r}, expected -1")
        c = normalize_point(c)
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def n(self) -> int:
        return self.coords.shape[0] - 1

    @classmethod
    def origin(cls, n: int) -> "HPoint":
        e = np.zeros(n + 1)
        e[-1] = 1.0
        return cls(e)


@dataclass(frozen=True, eq=False)
class HTangent:
    base: HPoint
    dir: np.ndarray

    def __post_init__(self):
        d = np.array(self.dir, dtype=float)
        if d.shape != self.base.coords.shape:
            raise DimensionError("tangent and base point dimensions differ")
        scale = max(1.0, float(np.abs(d).max()) * abs(self.base.coords[-1]))
        if abs(minkowski_inner(d, self.base.coords)) > self.base.tol * scale:
            raise InvalidPointError("direction is not tangent at base")
        d.setflags(write=False)
        object.__setattr__(self, "dir", d)

    def norm(self) -> float:
        return float(np.sqrt(max(minkowski_norm_sq(self.dir), 0.0)))


@dataclass(frozen=True, eq=False)
class GeodesicLine:
    """Unit speed geodesic ``t -> base cosh t + dir sinh t``."""

    base: HPoint
    dir: HTangent

    def __post_init__(self):
        if self.dir.base is not self.base and not np.allclose(
                self.dir.base.coords, self.base.coords):
            raise InvalidPointError("direction is not based at base point")
        nrm = self.dir.norm()
        if nrm == 0:
            raise InvalidPointError("zero direction")
        if abs(nrm - 1.0) > 1e-12:
            object.__setattr__(self, "dir", HTangent(self.base, self.dir.dir / nrm))

    @classmethod
    def through(cls, p, q) -> "GeodesicLine":
        """The geodesic with ``geodesic_point(g, 0) = p`` heading to ``q``."""
        p = p if isinstance(p, HPoint) else HPoint(p)
        q_c = _coords(q)
        w = project_to_tangent_array(p.coords, q_c)
        return cls(p, HTangent(p, w))


@dataclass(frozen=True, eq=False)
class DualHyperplane:
    """The hyperplane ``normal^perp`` intersected with H^n."""

    normal: np.ndarray

    def __post_init__(self):
        nv = np.array(_coords(self.normal), dtype=float)
        q = minkowski_norm_sq(nv)
        if q <= 0:
            raise InvalidPointError("hyperplane normal must be spacelike")
        nv = nv / np.sqrt(q)
        nv.setflags(write=False)
        object.__setattr__(self, "normal", nv)


@dataclass(frozen=True, eq=False)
class UHSPoint:
    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float)
        if c.ndim != 1 or c.shape[0] < 2:
            raise DimensionError("need at least 2 coordinates")
        if not c[-1] > 0:
            raise InvalidPointError("last coordinate must be positive")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)


@dataclass(frozen=True)
class Horoball:
    """The horoball ``x_n >= level`` in the upper half space.

    A general horoball is given by ``to_standard``, a callable on upper half
    space coordinates taking it to this one; ``horoball_contains`` applies
    it before comparing heights.
    """

    level: float = 1.0
    to_standard: object = None

    def __post_init__(self):
        if not self.level > 0:
            raise ValueError("horoball level must be positive")


def point_distance(p, q):
    """Hyperbolic distance between arrays of hyperboloid points.

    Uses ``2 asinh(|p - q| / 2)``, which stays accurate for nearby points
    where ``acosh(-<p,q>)`` loses half its digits.
    """
    p = _coords(p)
    q = _coords(q)
    diff = p - q
    chord_sq = minkowski_norm_sq(diff)
    return 2.0 * np.arcsinh(0.5 * np.sqrt(np.maximum(chord_sq, 0.0)))


def boost_to_origin(p) -> np.ndarray:
    """Lorentz matrix ``B`` with ``B p = (0, ..., 0, 1)``.

    For ``p = (x, t)``: ``B = [[I + x x^T / (1 + t), -x], [-x^T, t]]``.
    """
    p = np.asarray(p, dtype=float)
    x, t = p[:-1], p[-1]
    n = len(p)
    B = np.empty((n, n))
    B[:-1, :-1] = np.eye(n - 1) + np.outer(x, x) / (1.0 + t)
    B[:-1, -1] = -x
    B[-1, :-1] = -x
    B[-1, -1] = t
    return B


def h_distance(p, q, tol: float = POINT_TOL) -> float:
    pc = _coords(p)
    qc = _coords(q)
    c = -minkowski_inner(pc, qc)
    scale = max(1.0, abs(pc[-1] * qc[-1]))
    if c < 1.0 - tol * scale:
        raise InvalidPointError(f"-<p,q> = {c!r} < 1; not points of H^n")
    return float(point_distance(pc, qc))


def geodesic_point(g: GeodesicLine, t):
    """Point at signed arclength ``t`` along ``g``.

    A scalar ``t`` returns an :class:`HPoint`; an array returns the raw
    coordinate array of shape ``t.shape + (n+1,)``.
    """
    p = g.base.coords
    v = g.dir.dir
    if np.ndim(t) == 0:
        return HPoint(p * np.cosh(t) + v * np.sinh(t))
    t = np.asarray(t, dtype=float)[..., None]
    return p * np.cosh(t) + v * np.sinh(t)


def project_to_tangent_array(p, w):
    p = np.asarray(p, dtype=float)
    w = np.asarray(w, dtype=float)
    return w + minkowski_inner(w, p)[..., None] * p


def project_to_tangent(p, w) -> HTangent:
    """Tangential part ``w + <w,p> p`` of an ambient vector at ``p``."""
    p = p if isinstance(p, HPoint) else HPoint(p)
    return HTangent(p, project_to_tangent_array(p.coords, _coords(w)))


# --- model conversions -----------------------------------------------------

def uhs_to_hyperboloid_array(x):
    """Upper half space ``(x_1, ..., x_{n-1}, h)`` to the hyperboloid.

    This is the composite of the Cayley transform to the Poincare ball and
    the ball-to-hyperboloid map, written out directly. The UHS basepoint
    ``(0, ..., 0, 1)`` goes to ``(0, ..., 0, 1)``.
    """
    x = np.asarray(x, dtype=float)
    h = x[..., -1]
    if np.any(h <= 0):
        raise InvalidPointError("upper half space point needs x_n > 0")
    r2 = np.sum(x * x, axis=-1)
    out = np.empty(x.shape[:-1] + (x.shape[-1] + 1,))
    out[..., :-2] = x[..., :-1] / h[..., None]
    out[..., -2] = (r2 - 1.0) / (2.0 * h)
    out[..., -1] = (r2 + 1.0) / (2.0 * h)
    return out


def hyperboloid_to_uhs_array(v):
    v = np.asarray(v, dtype=float)
    denom = v[..., -1] - v[..., -2]
    h = 1.0 / denom
    out = np.empty(v.shape[:-1] + (v.shape[-1] - 1,))
    out[..., :-1] = v[..., :-2] * h[..., None]
    out[..., -1] = h
    return out


def uhs_to_hyperboloid(p) -> HPoint:
    c = p.coords if isinstance(p, UHSPoint) else UHSPoint(p).coords
    return HPoint(uhs_to_hyperboloid_array(c))


def hyperboloid_to_uhs(p) -> UHSPoint:
    return UHSPoint(hyperboloid_to_uhs_array(_coords(p)))


def hyperboloid_to_ball(v):
    v = np.asarray(_coords(v), dtype=float)
    return v[..., :-1] / (1.0 + v[..., -1:])


def ball_to_hyperboloid(y):
    y = np.asarray(y, dtype=float)
    r2 = np.sum(y * y, axis=-1, keepdims=True)
    if np.any(r2 >= 1):
        raise InvalidPointError("point outside the unit ball")
    return np.concatenate([2 * y, 1 + r2], axis=-1) / (1 - r2)


def uhs_distance(p, q) -> float:
    """Closed-form upper half space distance, independent of the hyperboloid."""
    p = np.asarray(p.coords if isinstance(p, UHSPoint) else p, dtype=float)
    q = np.asarray(q.coords if isinstance(q, UHSPoint) else q, dtype=float)
    d2 = float(np.sum((p - q) ** 2))
    return float(2.0 * np.arcsinh(np.sqrt(d2 / (4.0 * p[-1] * q[-1]))))


# --- hyperplanes and horoballs --------------------------------------------

INTERSECTING = "intersecting"


def span_signature(a, b):
    """Signature ``(positive, negative)`` of the form restricted to span{a, b}."""
    gram = np.array([[minkowski_inner(a, a), minkowski_inner(a, b)],
                     [minkowski_inner(b, a), minkowski_inner(b, b)]])
    ev = np.linalg.eigvalsh(gram)
    scale = max(1.0, float(np.abs(gram).max()))
    pos = int(np.sum(ev > 1e-12 * scale))
    neg = int(np.sum(ev < -1e-12 * scale))
    return pos, neg


def dual_plane_distance(P: DualHyperplane, Q: DualHyperplane):
    """Distance between two hyperplanes given by unit spacelike normals.

    Returns ``"intersecting"`` when ``|<n_P, n_Q>| < 1``. For
    ``<n_P, n_Q> >= 1`` the planes are disjoint (or equal/asymptotic) and
    the distance is ``acosh <n_P, n_Q>``. A value ``<= -1`` means the planes
    are disjoint with opposite co-orientations; the distance is then
    ``acosh |<n_P, n_Q>|``.
    """
    c = float(minkowski_inner(P.normal, Q.normal))
    if abs(c) < 1.0:
        return INTERSECTING
    return float(np.arccosh(abs(c)))


def orthogonal_plane(g: GeodesicLine, t: float) -> DualHyperplane:
    """Hyperplane through ``g(t)`` orthogonal to ``g``; its normal is ``g'(t)``."""
    p = g.base.coords
    v = g.dir.dir
    return DualHyperplane(p * np.sinh(t) + v * np.cosh(t))


def horoball_contains(h: Horoball, p) -> bool:
    c = np.asarray(p.coords if isinstance(p, UHSPoint) else p, dtype=float)
    if h.to_standard is not None:
        c = np.asarray(h.to_standard(c), dtype=float)
    return bool(c[-1] >= h.level)
