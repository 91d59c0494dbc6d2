"""Sampled unit speed curves in H^n and their geodesic curvature.

Everything is computed in ambient Minkowski coordinates: the acceleration
is a central second difference of the sample coordinates and the covariant
acceleration is its tangential projection ``a + <a, p> p``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid, solve_ivp
from scipy.interpolate import CubicSpline

from hyperfill.errors import (CurvatureTooLarge, InputError, InvalidPointError,
                              StencilError)
from hyperfill.hyperbolic import (boost_to_origin, minkowski_inner, minkowski_norm_sq,
                                  normalize_point, point_distance,
                                  uhs_to_hyperboloid_array, HTangent, HPoint)

#: second-difference stencils, keyed by order: (offsets, weights)
_STENCILS = {
    2: (np.array([-1, 0, 1]), np.array([1.0, -2.0, 1.0])),
    4: (np.array([-2, -1, 0, 1, 2]),
        np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0),
}


@dataclass(frozen=True, eq=False)
class SampledPath:
    """Uniformly sampled, approximately unit speed path.

    ``points`` has shape ``(N, n+1)``. Externally supplied paths are
    validated, never silently reparameterized; see
    :func:`resample_unit_speed` for that.
    """

    t: np.ndarray
    points: np.ndarray
    unit_speed_tol: float = 1e-3

    def __post_init__(self):
        t = np.asarray(self.t)
        pts = np.asarray(self.points)
        if t.ndim != 1 or pts.ndim != 2 or pts.shape[0] != t.shape[0]:
            raise InputError("t must be (N,) and points (N, n+1)")
        if t.shape[0] < 5:
            raise InputError("a path needs at least 5 samples")
        steps = np.diff(t)
        dt = (t[-1] - t[0]) / (t.shape[0] - 1)
        if dt <= 0 or np.max(np.abs(steps - dt)) > 1e-12 * max(1.0, abs(t).max()):
            raise InputError("samples must be strictly increasing and uniform")
        q = minkowski_norm_sq(pts)
        if np.any(np.abs(q + 1) > 1e-9 * np.maximum(1.0, pts[:, -1] ** 2)):
            raise InvalidPointError("samples are not on the hyperboloid")
        seg = point_distance(pts[1:], pts[:-1])
        if np.max(np.abs(seg - dt)) > self.unit_speed_tol * dt:
            raise InputError("path is not unit speed within unit_speed_tol")

    @property
    def dt(self) -> float:
        return float((self.t[-1] - self.t[0]) / (len(self.t) - 1))

    def __len__(self):
        return len(self.t)

    @property
    def length(self) -> float:
        return float(self.t[-1] - self.t[0])


@dataclass(frozen=True)
class CurvatureProfile:
    values: np.ndarray
    #: index into the path of ``values[0]``
    offset: int = 1
    max_kappa: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "max_kappa", float(np.max(self.values)))


@dataclass(frozen=True)
class QuasiGeodesicReport:
    k: float
    lower_violation: float
    upper_violation: float
    chord_hausdorff: float

    def passed(self, tol: float) -> bool:
        return self.lower_violation <= tol


def _half_width(order: int) -> int:
    if order not in _STENCILS:
        raise ValueError(f"unsupported stencil order {order}")
    return order // 2


def ambient_accel(path: SampledPath, order: int = 2) -> np.ndarray:
    """Second differences of the ambient coordinates at interior samples."""
    w = _half_width(order)
    offs, wts = _STENCILS[order]
    pts = np.asarray(path.points)
    n = len(pts)
    acc = sum(c * pts[w + o:n - w + o] for o, c in zip(offs, wts))
    return acc / np.asarray(path.dt, dtype=pts.dtype) ** 2


def _covariant(acc, pts):
    return acc + minkowski_inner(acc, pts)[:, None] * pts


def covariant_accel(path: SampledPath, i: int, order: int = 2) -> HTangent:
    w = _half_width(order)
    if not w <= i < len(path) - w:
        raise StencilError(f"index {i} outside stencil range [{w}, {len(path) - w})")
    offs, wts = _STENCILS[order]
    pts = np.asarray(path.points, dtype=float)
    acc = sum(c * pts[i + o] for o, c in zip(offs, wts)) / path.dt ** 2
    p = pts[i]
    return HTangent(HPoint(p), acc + minkowski_inner(acc, p) * p)


def geodesic_curvature(path: SampledPath, order: int = 2) -> CurvatureProfile:
    w = _half_width(order)
    pts = np.asarray(path.points)
    acc = ambient_accel(path, order)
    cov = _covariant(acc, pts[w:len(pts) - w])
    kappa = np.sqrt(np.maximum(minkowski_norm_sq(cov), 0.0))
    return CurvatureProfile(np.asarray(kappa, dtype=float), offset=w)


def accel_identity_residual(path: SampledPath, order: int = 2) -> float:
    """Max over interior samples of ``| <a,a> - (kappa^2 - 1) |``."""
    w = _half_width(order)
    pts = np.asarray(path.points)
    acc = ambient_accel(path, order)
    cov = _covariant(acc, pts[w:len(pts) - w])
    kappa_sq = np.maximum(minkowski_norm_sq(cov), 0.0)
    return float(np.max(np.abs(minkowski_norm_sq(acc) - (kappa_sq - 1.0))))


def quasi_constant(K: float) -> float:
    """Quasi-geodesic constant ``1/sqrt(1 - K^2)`` for curvature bound ``K``."""
    if K < 0:
        raise ValueError("curvature bound must be nonnegative")
    if K >= 1:
        raise CurvatureTooLarge(f"curvature bound {K} >= 1")
    return float(1.0 / np.sqrt(1.0 - K * K))


def _pairwise_reduce(a, b, fn, chunk=1024, center=None):
    """Apply ``fn(distance_block, i0)`` over row chunks of the a x b distance matrix.

    Distances come from the Gram matrix ``<a_i, b_j>`` via
    ``|p - q|^2 = -2 - 2 <p, q>``. Near the origin the absolute error is
    about 1e-8; pass ``center`` to move the data there first.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if center is not None:
        # an isometry to the origin keeps coordinates, hence rounding, small
        B = boost_to_origin(center)
        a, b = a @ B.T, b @ B.T
    bm = b.copy()
    bm[:, -1] *= -1.0
    out = []
    for i0 in range(0, len(a), chunk):
        gram = a[i0:i0 + chunk] @ bm.T
        sq = np.maximum(-2.0 - 2.0 * gram, 0.0)
        out.append(fn(2.0 * np.arcsinh(0.5 * np.sqrt(sq)), i0))
    return out


def verify_quasi_geodesic(path: SampledPath, k: float) -> QuasiGeodesicReport:
    """Brute-force check of ``|t - t'| / k <= d(p, p')`` over all sample pairs."""
    if k < 1:
        raise ValueError("k must be >= 1")
    t = np.asarray(path.t, dtype=float)

    def both(block, i0):
        dt = np.abs(t[i0:i0 + len(block), None] - t[None, :])
        # chords are never longer than arcs; only discretization can push past
        return float(np.max(dt / k - block)), float(np.max(block - dt))

    mid = path.points[len(path) // 2]
    res = _pairwise_reduce(path.points, path.points, both, center=mid)
    lo = max(0.0, max(r[0] for r in res))
    up = max(0.0, max(r[1] for r in res))
    return QuasiGeodesicReport(k=float(k), lower_violation=lo,
                               upper_violation=up,
                               chord_hausdorff=chord_hausdorff(path))


def _segment_samples(p, q, step):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    L = float(point_distance(p, q))
    if L == 0:
        raise InputError("endpoints coincide")
    # midpoint and unit direction; q + <q,p> p cancels badly for far endpoints
    mid = p + q
    mid = mid / np.sqrt(-minkowski_norm_sq(mid))
    w = q - p
    w = w / np.sqrt(minkowski_norm_sq(w))
    s = np.linspace(-L / 2, L / 2, max(2, int(np.ceil(L / step)) + 1))[:, None]
    return mid * np.cosh(s) + w * np.sinh(s)


def chord_hausdorff(path: SampledPath) -> float:
    """Hausdorff distance between the samples and the chord joining the endpoints.

    Both sides are point sets (the chord at step ``dt/2``), so even a
    geodesic gives about ``dt/2`` rather than 0.
    """
    pts = np.asarray(path.points, dtype=float)
    seg = _segment_samples(pts[0], pts[-1], path.dt / 2)
    mid = pts[len(pts) // 2]
    a_to_b = np.concatenate(_pairwise_reduce(pts, seg, lambda d, _: d.min(axis=1), center=mid))
    b_to_a = np.concatenate(_pairwise_reduce(seg, pts, lambda d, _: d.min(axis=1), center=mid))
    return float(max(a_to_b.max(), b_to_a.max()))


def displacement_integral(profile: CurvatureProfile, dt: float) -> np.ndarray:
    """Cumulative trapezoid integral of ``sqrt(1 - kappa^2)``."""
    kappa = np.asarray(profile.values, dtype=float)
    if np.any(kappa >= 1):
        raise CurvatureTooLarge("displacement needs kappa < 1 everywhere")
    return cumulative_trapezoid(np.sqrt(1.0 - kappa ** 2), dx=dt, initial=0.0)


# --- fixture generators ----------------------------------------------------

def _grid(length, dt, centered=True):
    if not length > 0 or not dt > 0:
        raise InputError("length and step must be positive")
    n = int(round(length / dt))
    if n < 4:
        raise InputError("fewer than 5 samples")
    t = np.arange(n + 1) * dt
    return t - (n * dt) / 2 if centered else t


def _embed(pts2, dim):
    """Embed points of H^2 (3 coords) into H^dim by padding spatial zeros."""
    if dim < 2:
        raise InputError("dimension must be >= 2")
    pad = np.zeros(pts2.shape[:-1] + (dim - 2,), dtype=pts2.dtype)
    return np.concatenate([pts2[..., :2], pad, pts2[..., 2:]], axis=-1)


def _path(t, pts, dim, tol=1e-3):
    return SampledPath(t, _embed(pts, dim), unit_speed_tol=tol)


def make_equidistant_curve(d: float, length: float, dt: float, dim: int = 2,
                           dtype=float) -> SampledPath:
    """Hypercycle at distance ``d`` from the geodesic ``(sinh s, 0, cosh s)``."""
    if d < 0:
        raise InputError("distance must be nonnegative")
    t = _grid(length, dt).astype(dtype)
    s = t / np.cosh(dtype(d))
    ch, sh = np.cosh(dtype(d)), np.sinh(dtype(d))
    pts = np.stack([ch * np.sinh(s), np.full_like(s, sh), ch * np.cosh(s)], axis=-1)
    return _path(np.asarray(t, dtype=float), pts, dim)


def make_geodesic(length: float, dt: float, dim: int = 2, dtype=float) -> SampledPath:
    return make_equidistant_curve(0.0, length, dt, dim=dim, dtype=dtype)


def make_circle(rho: float, length: float, dt: float, dim: int = 2,
                dtype=float) -> SampledPath:
    """Circle of hyperbolic radius ``rho`` about the origin, by arclength."""
    if not rho > 0:
        raise InputError("radius must be positive")
    t = _grid(length, dt).astype(dtype)
    th = t / np.sinh(dtype(rho))
    sh = np.sinh(dtype(rho))
    pts = np.stack([sh * np.cos(th), sh * np.sin(th),
                    np.full_like(th, np.cosh(dtype(rho)))], axis=-1)
    return _path(np.asarray(t, dtype=float), pts, dim)


def make_horocycle(length: float, dt: float, dim: int = 2, height: float = 1.0,
                   dtype=float) -> SampledPath:
    """Horizontal line ``x_n = height`` in upper half space, mapped over."""
    t = _grid(length, dt).astype(dtype)
    uhs = np.stack([t * height, np.full_like(t, height)], axis=-1)
    if dtype is float:
        pts = uhs_to_hyperboloid_array(uhs)
    else:
        x, h = uhs[:, 0], uhs[:, 1]
        r2 = x * x + h * h
        pts = np.stack([x / h, (r2 - 1) / (2 * h), (r2 + 1) / (2 * h)], axis=-1)
    return _path(np.asarray(t, dtype=float), pts, dim)


def _frenet_rhs(kappa):
    def rhs(s, y):
        g, T, N = y[0:3], y[3:6], y[6:9]
        k = kappa(s)
        return np.concatenate([T, g + k * N, -k * T])
    return rhs


def make_curvature_path(kappa, length: float, dt: float, dim: int = 2) -> SampledPath:
    """Unit speed path in H^2 with prescribed signed geodesic curvature.

    Integrates the frame equations ``g' = T, T' = g + kappa N, N' = -kappa T``
    from the origin heading along the first axis.
    """
    t = _grid(length, dt, centered=False)
    y0 = np.array([0, 0, 1, 1, 0, 0, 0, 1, 0], dtype=float)
    sol = solve_ivp(_frenet_rhs(kappa), (t[0], t[-1]), y0, t_eval=t,
                    method="DOP853", rtol=1e-12, atol=1e-13)
    if not sol.success:
        raise RuntimeError(sol.message)
    pts = normalize_point(sol.y[0:3].T)
    return _path(t - length / 2, pts, dim)


def random_perturbed_geodesic(rng: np.random.Generator, length: float,
                              dt: float, max_kappa: float = 0.85,
                              modes: int = 4, dim: int = 2) -> SampledPath:
    """Geodesic bent by a random smooth curvature profile bounded by ``max_kappa``."""
    amp = rng.uniform(-1, 1, modes)
    freq = rng.uniform(0.2, 3.0, modes)
    phase = rng.uniform(0, 2 * np.pi, modes)
    scale = rng.uniform(0.05, 1.0) * max_kappa / np.sum(np.abs(amp))

    def kappa(s):
        return scale * float(np.sum(amp * np.sin(freq * s + phase)))

    return make_curvature_path(kappa, length, dt, dim=dim)


def resample_unit_speed(points, dt: float, unit_speed_tol: float = 1e-3) -> SampledPath:
    """Resample an arbitrary dense polyline by cumulative chord length."""
    pts = np.asarray(points, dtype=float)
    seg = point_distance(pts[1:], pts[:-1])
    s = np.concatenate([[0.0], np.cumsum(seg)])
    spline = CubicSpline(s, pts, axis=0)
    n = int(np.floor(s[-1] / dt))
    t = np.arange(n + 1) * dt
    new = normalize_point(spline(t))
    return SampledPath(t, new, unit_speed_tol=unit_speed_tol)
