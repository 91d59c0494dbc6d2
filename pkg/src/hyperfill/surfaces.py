"""Extrinsic geometry of gridded surfaces in H^3 (hyperboloid model).

A surface is a rectangular grid of points on the hyperboloid in R^{3,1}.
Tangent vectors and second derivatives are central differences of the
ambient coordinates; the second fundamental form pairs those second
derivatives with a unit normal.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import RectBivariateSpline

from hyperfill.curves import SampledPath, geodesic_curvature, quasi_constant
from hyperfill.errors import DegenerateSurfaceError, InputError
from hyperfill.hyperbolic import (minkowski_inner, minkowski_norm_sq,
                                  normalize_point, uhs_to_hyperboloid_array)

_J = np.diag([1.0, 1.0, 1.0, -1.0])


@dataclass(frozen=True, eq=False)
class ParamSurface:
    """Points ``X(u_i, v_j)`` of H^3 on a uniform grid.

    ``points`` has shape ``(nu, nv, 4)``. ``chart`` optionally gives the
    exact map ``(u, v) -> X`` for off-grid evaluation; without it the grid
    is interpolated.
    """

    u: np.ndarray
    v: np.ndarray
    points: np.ndarray
    chart: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        v = np.asarray(self.v, dtype=float)
        pts = np.asarray(self.points, dtype=float)
        if pts.shape != (len(u), len(v), 4):
            raise InputError(f"points must have shape (nu, nv, 4), got {pts.shape}")
        if len(u) < 5 or len(v) < 5:
            raise InputError("grid must be at least 5x5")
        for a in (u, v):
            st = np.diff(a)
            if np.any(st <= 0) or np.ptp(st) > 1e-9 * st.mean():
                raise InputError("grid must be uniform and increasing")
        q = minkowski_norm_sq(pts)
        if np.any(np.abs(q + 1) > 1e-8 * np.maximum(1.0, pts[..., 3] ** 2)):
            raise InputError("grid points are not on the hyperboloid")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "points", pts)

    @property
    def du(self) -> float:
        return float(self.u[1] - self.u[0])

    @property
    def dv(self) -> float:
        return float(self.v[1] - self.v[0])

    @property
    def shape(self):
        return self.points.shape[:2]

    def evaluate(self, uu, vv):
        """Points at arbitrary parameters (exact chart or bicubic interpolant)."""
        if self.chart is not None:
            return self.chart(np.asarray(uu, dtype=float), np.asarray(vv, dtype=float))
        splines = self._splines()
        out = np.stack([s(uu, vv, grid=False) for s in splines], axis=-1)
        return normalize_point(out)

    def _splines(self):
        cache = self.__dict__.get("_spl")
        if cache is None:
            cache = [RectBivariateSpline(self.u, self.v, self.points[..., k],
                                         kx=3, ky=3) for k in range(4)]
            object.__setattr__(self, "_spl", cache)
        return cache


@dataclass(frozen=True, eq=False)
class FundamentalForms:
    """First and second fundamental forms on the interior nodes.

    ``I`` and ``II`` have shape ``(nu-2, nv-2, 2, 2)``; node ``[a, b]``
    corresponds to grid node ``[a+1, b+1]``. ``II_asym`` is the largest
    ``|II_uv - II_vu|`` seen before symmetrizing.
    """

    I: np.ndarray
    II: np.ndarray
    normal: np.ndarray
    du: float
    dv: float
    II_asym: float = 0.0

    def flipped(self) -> "FundamentalForms":
        return FundamentalForms(self.I, -self.II, -self.normal, self.du, self.dv,
                                self.II_asym)


@dataclass(frozen=True)
class PrincipalCurvatures:
    lam1: np.ndarray
    lam2: np.ndarray

    @property
    def max_abs(self) -> float:
        return float(max(np.abs(self.lam1).max(), np.abs(self.lam2).max()))


def _unit_normal(X, Xu, Xv):
    """Unit spacelike normal with ``det[X, Xu, Xv, eta] > 0``.

    The cofactor vector ``c`` satisfies ``c . w = det[X, Xu, Xv, w]``;
    ``eta = J c`` then has ``<eta, w> = c . w`` and is automatically
    positively oriented.
    """
    M = np.stack([X, Xu, Xv], axis=-2)  # (..., 3, 4)
    c = np.empty(X.shape)
    for k in range(4):
        cols = [j for j in range(4) if j != k]
        c[..., k] = (-1) ** (3 + k) * np.linalg.det(M[..., cols])
    eta = c @ _J
    nrm = minkowski_norm_sq(eta)
    if np.any(nrm <= 0):
        raise DegenerateSurfaceError("degenerate tangent plane")
    return eta / np.sqrt(nrm)[..., None]


def fundamental_forms(s: ParamSurface) -> FundamentalForms:
    X = s.points
    h, k = s.du, s.dv
    c = X[1:-1, 1:-1]
    Xu = (X[2:, 1:-1] - X[:-2, 1:-1]) / (2 * h)
    Xv = (X[1:-1, 2:] - X[1:-1, :-2]) / (2 * k)
    Xuu = (X[2:, 1:-1] - 2 * c + X[:-2, 1:-1]) / h ** 2
    Xvv = (X[1:-1, 2:] - 2 * c + X[1:-1, :-2]) / k ** 2
    # mixed derivative both ways round: d/dv of X_u and d/du of X_v
    Xuv = np.gradient(np.gradient(X, h, axis=0), k, axis=1)[1:-1, 1:-1]
    Xvu = np.gradient(np.gradient(X, k, axis=1), h, axis=0)[1:-1, 1:-1]
    E = minkowski_inner(Xu, Xu)
    F = minkowski_inner(Xu, Xv)
    G = minkowski_inner(Xv, Xv)
    I = np.stack([np.stack([E, F], -1), np.stack([F, G], -1)], -2)
    det = E * G - F * F
    if np.any(E <= 0) or np.any(det <= 0):
        raise DegenerateSurfaceError("first fundamental form is not positive definite")
    eta = _unit_normal(c, Xu, Xv)
    # tangential projection a + <a,X> X is orthogonal to X, so pairing with
    # eta (also orthogonal to X) only sees the ambient second derivative
    L = minkowski_inner(Xuu, eta)
    N = minkowski_inner(Xvv, eta)
    M_uv = minkowski_inner(Xuv, eta)
    M_vu = minkowski_inner(Xvu, eta)
    asym = float(np.max(np.abs(M_uv - M_vu)))
    M = 0.5 * (M_uv + M_vu)
    II = np.stack([np.stack([L, M], -1), np.stack([M, N], -1)], -2)
    return FundamentalForms(I, II, eta, h, k, asym)


def principal_curvatures(f: FundamentalForms) -> PrincipalCurvatures:
    """Eigenvalues of the shape operator ``I^{-1} II``, sorted ``lam1 >= lam2``."""
    I, II = f.I, f.II
    det = np.linalg.det(I)
    if np.any(det <= 0):
        raise DegenerateSurfaceError("singular first fundamental form")
    S = np.linalg.solve(I, II)
    tr = S[..., 0, 0] + S[..., 1, 1]
    dt = np.linalg.det(II) / det
    disc = np.sqrt(np.maximum(0.25 * tr * tr - dt, 0.0))
    return PrincipalCurvatures(0.5 * tr + disc, 0.5 * tr - disc)


def _d1(a, h, axis):
    return np.gradient(a, h, axis=axis, edge_order=2)


def intrinsic_curvature(f: FundamentalForms, du: float | None = None,
                        dv: float | None = None) -> np.ndarray:
    """Gaussian curvature of ``I`` alone, by the Brioschi formula.

    Needs only E, F, G and their derivatives, so it is independent of the
    normal and of II. Returned on the nodes of ``f`` minus one more ring.
    """
    h = f.du if du is None else du
    k = f.dv if dv is None else dv
    E, F, G = f.I[..., 0, 0], f.I[..., 0, 1], f.I[..., 1, 1]
    Eu, Ev = _d1(E, h, 0), _d1(E, k, 1)
    Fu, Fv = _d1(F, h, 0), _d1(F, k, 1)
    Gu, Gv = _d1(G, h, 0), _d1(G, k, 1)
    Evv = (E[:, 2:] - 2 * E[:, 1:-1] + E[:, :-2])[1:-1] / k ** 2
    Guu = (G[2:] - 2 * G[1:-1] + G[:-2])[:, 1:-1] / h ** 2
    Fuv = (F[2:, 2:] - F[2:, :-2] - F[:-2, 2:] + F[:-2, :-2]) / (4 * h * k)
    sl = (slice(1, -1), slice(1, -1))
    E, F, G = E[sl], F[sl], G[sl]
    Eu, Ev, Fu, Fv, Gu, Gv = (a[sl] for a in (Eu, Ev, Fu, Fv, Gu, Gv))
    A = np.zeros(E.shape + (3, 3))
    A[..., 0, 0] = -0.5 * Evv + Fuv - 0.5 * Guu
    A[..., 0, 1] = 0.5 * Eu
    A[..., 0, 2] = Fu - 0.5 * Ev
    A[..., 1, 0] = Fv - 0.5 * Gu
    A[..., 1, 1] = E
    A[..., 1, 2] = F
    A[..., 2, 0] = 0.5 * Gv
    A[..., 2, 1] = F
    A[..., 2, 2] = G
    B = np.zeros(E.shape + (3, 3))
    B[..., 0, 1] = 0.5 * Ev
    B[..., 0, 2] = 0.5 * Gu
    B[..., 1, 0] = 0.5 * Ev
    B[..., 1, 1] = E
    B[..., 1, 2] = F
    B[..., 2, 0] = 0.5 * Gu
    B[..., 2, 1] = F
    B[..., 2, 2] = G
    return (np.linalg.det(A) - np.linalg.det(B)) / (E * G - F * F) ** 2


def gauss_residual(s: ParamSurface) -> float:
    """Max over interior nodes of ``|K_intrinsic + 1 - lam1 lam2|``."""
    f = fundamental_forms(s)
    K = intrinsic_curvature(f)
    pc = principal_curvatures(f)
    prod = (pc.lam1 * pc.lam2)[1:-1, 1:-1]
    return float(np.max(np.abs(K + 1.0 - prod)))


# --- intrinsic geodesics --------------------------------------------------

def _metric_step(f: FundamentalForms) -> float:
    """Typical arclength of one grid step."""
    return float(min(f.du * np.sqrt(np.median(f.I[..., 0, 0])),
                     f.dv * np.sqrt(np.median(f.I[..., 1, 1]))))


class _InducedMetric:
    """Splines of E, F, G and their first derivatives over the grid interior."""

    def __init__(self, f: FundamentalForms, u, v):
        self.u, self.v = u, v
        comps = [f.I[..., 0, 0], f.I[..., 0, 1], f.I[..., 1, 1]]
        self._spl = [RectBivariateSpline(u, v, a, kx=3, ky=3) for a in comps]

    def inside(self, x):
        return (self.u[0] <= x[0] <= self.u[-1]) and (self.v[0] <= x[1] <= self.v[-1])

    def christoffel(self, x):
        (E, Eu, Ev), (F, Fu, Fv), (G, Gu, Gv) = (
            (float(s.ev(x[0], x[1])), float(s.ev(x[0], x[1], dx=1)), float(s.ev(x[0], x[1], dy=1)))
            for s in self._spl)
        ginv = np.linalg.inv(np.array([[E, F], [F, G]]))
        # first-kind symbols Gamma_{ij,k}
        d = {(0, 0): (Eu, Ev), (0, 1): (Fu, Fv), (1, 1): (Gu, Gv)}

        def dg(i, j, k):
            return d[(min(i, j), max(i, j))][k]

        gam = np.empty((2, 2, 2))
        for k in range(2):
            for i in range(2):
                for j in range(2):
                    gam[k, i, j] = sum(
                        ginv[k, m] * 0.5 * (dg(m, i, j) + dg(m, j, i) - dg(i, j, m))
                        for m in range(2))
        return gam, np.array([[E, F], [F, G]])


def trace_intrinsic_geodesic(s: ParamSurface, start, direction, length: float,
                             step: float | None = None,
                             forms: FundamentalForms | None = None) -> SampledPath:
    """Shoot a geodesic of the induced metric and return its ambient image.

    RK4 on ``x'' = -Gamma(x', x')`` in parameter space with step ``step``
    (default: the grid step), initial velocity scaled to unit length in
    ``I``. The images of the RK4 nodes form the returned path.
    """
    f = forms if forms is not None else fundamental_forms(s)
    metric = _InducedMetric(f, s.u[1:-1], s.v[1:-1])
    h = step if step is not None else _metric_step(f)
    x = np.asarray(start, dtype=float)
    _, g = metric.christoffel(x)
    w = np.asarray(direction, dtype=float)
    w = w / np.sqrt(w @ g @ w)
    y = np.concatenate([x, w])

    def rhs(y):
        gam, _ = metric.christoffel(y[:2])
        vel = y[2:]
        return np.concatenate([vel, -np.einsum("kij,i,j->k", gam, vel, vel)])

    n = int(round(length / h))
    traj = [y[:2].copy()]
    for _ in range(n):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not metric.inside(y[:2]):
            raise InputError("geodesic left the surface patch")
        traj.append(y[:2].copy())
    traj = np.array(traj)
    pts = s.evaluate(traj[:, 0], traj[:, 1])
    t = np.arange(len(traj)) * h
    return SampledPath(t, pts, unit_speed_tol=1e-2)


@dataclass(frozen=True)
class CurvatureCertificate:
    max_abs_principal: float
    quasi_constant: Optional[float]
    geodesic_max_kappa: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.quasi_constant is not None


def small_curvature_certificate(s: ParamSurface, n_geodesics: int = 0,
                                seed: int = 0, geodesic_length: float | None = None,
                                ) -> CurvatureCertificate:
    """Bound principal curvatures and, optionally, probe intrinsic geodesics.

    With ``n_geodesics > 0`` that many random intrinsic geodesics are traced
    from random interior points and the maximum ambient curvature of each is
    reported; each should not exceed ``max_abs_principal`` beyond
    discretization error.
    """
    f = fundamental_forms(s)
    K = principal_curvatures(f).max_abs
    qc = quasi_constant(K) if K < 1 else None
    kappas = []
    if n_geodesics:
        rng = np.random.default_rng(seed)
        u0, u1 = s.u[0], s.u[-1]
        v0, v1 = s.v[0], s.v[-1]
        span = min(u1 - u0, v1 - v0)
        L = (geodesic_length if geodesic_length is not None
             else 0.3 * span * _metric_step(f) / min(s.du, s.dv))
        for _ in range(n_geodesics):
            start = (rng.uniform(u0 + 0.35 * (u1 - u0), u1 - 0.35 * (u1 - u0)),
                     rng.uniform(v0 + 0.35 * (v1 - v0), v1 - 0.35 * (v1 - v0)))
            ang = rng.uniform(0, 2 * np.pi)
            path = trace_intrinsic_geodesic(s, start, (np.cos(ang), np.sin(ang)),
                                            L, forms=f)
            kappas.append(geodesic_curvature(path).max_kappa)
    return CurvatureCertificate(K, qc, kappas)


# --- fixtures ---------------------------------------------------------------

def _grid(h, half_width):
    n = int(round(half_width / h))
    return np.arange(-n, n + 1) * h


def _plane_chart(d):
    ch, sh = np.cosh(d), np.sinh(d)

    def chart(u, v):
        u, v = np.broadcast_arrays(u, v)
        # (v, u) order so the positive normal points along +x_2 for d > 0
        base = np.stack([np.sinh(u), np.cosh(u) * np.sinh(v),
                         np.zeros_like(u), np.cosh(u) * np.cosh(v)], axis=-1)
        return ch * base + sh * np.array([0.0, 0.0, 1.0, 0.0])
    return chart


def _horosphere_chart(height):
    def chart(u, v):
        u, v = np.broadcast_arrays(u, v)
        return uhs_to_hyperboloid_array(np.stack([u, v, np.full_like(u, height)], -1))
    return chart


def _from_chart(chart, h, half_width, flip=False):
    u = _grid(h, half_width)
    v = _grid(h, half_width)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    if flip:
        def swapped(a, b, _c=chart):
            return _c(b, a)
        chart = swapped
    return ParamSurface(u, v, chart(uu, vv), chart=chart)


def equidistant_surface(d: float, h: float = 1e-2, half_width: float = 0.5) -> ParamSurface:
    """Surface at distance ``d`` from a geodesic plane; ``d = 0`` is the plane."""
    return _from_chart(_plane_chart(d), h, half_width)


def geodesic_plane(h: float = 1e-2, half_width: float = 0.5) -> ParamSurface:
    return equidistant_surface(0.0, h, half_width)


def horosphere(h: float = 1e-2, half_width: float = 0.5, height: float = 1.0) -> ParamSurface:
    """Horizontal plane ``x_3 = height`` of upper half space."""
    return _from_chart(_horosphere_chart(height), h, half_width, flip=True)


SURFACE_FIXTURES = {
    "geodesic-plane": lambda h, d: geodesic_plane(h),
    "horosphere": lambda h, d: horosphere(h),
    "equidistant": lambda h, d: equidistant_surface(d, h),
}


def make_surface(name: str, h: float = 1e-2, d: float = 0.3) -> ParamSurface:
    try:
        return SURFACE_FIXTURES[name](h, d)
    except KeyError:
        raise InputError(f"unknown surface fixture {name!r}") from None


# --- CSV grid files ---------------------------------------------------------

CSV_COLUMNS = ["u_index", "v_index", "x0", "x1", "x2", "x3"]


def write_surface_csv(s: ParamSurface, path) -> None:
    """Write ``nu,nv`` header, their values, then one row per node.

    Parameter steps are not stored: every quantity computed here is
    invariant under rescaling the parameters, so a loaded grid uses unit
    index steps.
    """
    nu, nv = s.shape
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["nu", "nv"])
        w.writerow([nu, nv])
        w.writerow(CSV_COLUMNS)
        for i in range(nu):
            for j in range(nv):
                w.writerow([i, j] + [repr(float(x)) for x in s.points[i, j]])


def read_surface_csv(path) -> ParamSurface:
    try:
        with open(Path(path), newline="") as fh:
            rows = list(csv.reader(fh))
        if [c.strip() for c in rows[0]] != ["nu", "nv"]:
            raise InputError("first line must be 'nu,nv'")
        nu, nv = (int(x) for x in rows[1])
        if [c.strip() for c in rows[2]] != CSV_COLUMNS:
            raise InputError(f"third line must be {','.join(CSV_COLUMNS)}")
        pts = np.full((nu, nv, 4), np.nan)
        for r in rows[3:]:
            if not r:
                continue
            i, j = int(r[0]), int(r[1])
            pts[i, j] = [float(x) for x in r[2:6]]
    except OSError as exc:
        raise InputError(f"cannot read surface CSV: {exc}") from None
    except (IndexError, ValueError) as exc:
        raise InputError(f"malformed surface CSV: {exc}") from None
    if np.isnan(pts).any():
        raise InputError("surface CSV is missing nodes")
    return ParamSurface(np.arange(nu, dtype=float), np.arange(nv, dtype=float), pts)
