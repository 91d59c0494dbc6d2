"""Warped-product metric ``dr^2 + f(r)^2 dmu^2 + g(r)^2 dlambda^2`` on a solid torus.

For a meridian of length ``l >= e^3 pi`` the core sits at
``r0 = -log(l / pi)`` and

    f(r) = pi (e^{r - r0} - phi(r) e^{r0 - r})
    g(r) = e^r + phi(r) e^{2 r0 - r}

with ``phi`` a bump equal to 1 for ``r <= -2`` and 0 for ``r >= -1``. The
sectional curvatures are convex combinations of ``-f''/f``, ``-g''/g`` and
``-f'g'/(fg)``; all three equal -1 off the band ``(-2, -1)`` and lie within
``L / l^2`` of -1 inside it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from hyperfill.errors import DomainError, InputError, MeridianTooShort

#: smallest admissible meridian length
MIN_MERIDIAN = np.e ** 3 * np.pi


@dataclass(frozen=True)
class BumpFunction:
    """Vectorized ``phi, phi', phi''``; 1 left of -2, 0 right of -1."""

    name: str
    phi: Callable
    dphi: Callable
    d2phi: Callable


def _band(r):
    r = np.asarray(r, dtype=float)
    return r, np.clip(-1.0 - r, 0.0, 1.0)


def _smoothstep():
    # s = -1 - r runs 0 -> 1 across the band; phi = 6s^5 - 15s^4 + 10s^3
    def phi(r):
        _, s = _band(r)
        return s ** 3 * (10 - 15 * s + 6 * s * s)

    def dphi(r):
        _, s = _band(r)
        return -30 * s * s * (1 - s) ** 2

    def d2phi(r):
        _, s = _band(r)
        return 60 * s * (1 - s) * (1 - 2 * s)

    return BumpFunction("smoothstep", phi, dphi, d2phi)


def _exp_bump():
    # phi = a(s) / (a(s) + a(1 - s)), a(x) = exp(-1/x) for x > 0, s = -1 - r
    def parts(r):
        _, s = _band(r)
        # outside this window 1/(1+e^z) is 0 or 1 to double precision
        inside = (s > 1e-3) & (s < 1 - 1e-3)
        si = np.where(inside, s, 0.5)
        x, y = si, 1 - si
        # a(x)/(a(x)+a(y)) = 1/(1 + exp(1/x - 1/y))
        z = 1.0 / x - 1.0 / y
        dz = -1.0 / x ** 2 - 1.0 / y ** 2          # dz/ds
        d2z = 2.0 / x ** 3 - 2.0 / y ** 3          # d2z/ds2
        return s, inside, z, dz, d2z

    def sig(z):
        return 0.5 * (1.0 - np.tanh(0.5 * z))       # 1 / (1 + e^z)

    def phi(r):
        s, inside, z, _, _ = parts(r)
        return np.where(inside, sig(z), np.where(s > 0.5, 1.0, 0.0))

    def dphi(r):
        s, inside, z, dz, _ = parts(r)
        q = sig(z)
        dq_ds = -q * (1 - q) * dz
        return np.where(inside, -dq_ds, 0.0)        # ds/dr = -1

    def d2phi(r):
        s, inside, z, dz, d2z = parts(r)
        q = sig(z)
        w = q * (1 - q)
        d2q = -w * d2z - w * (1 - 2 * q) * (-dz) * dz
        return np.where(inside, d2q, 0.0)           # (ds/dr)^2 = 1

    return BumpFunction("exp", phi, dphi, d2phi)


BUMPS = {"smoothstep": _smoothstep, "exp": _exp_bump}


def get_bump(name: str) -> BumpFunction:
    try:
        return BUMPS[name]()
    except KeyError:
        raise InputError(f"unknown bump {name!r}; choose from {sorted(BUMPS)}") from None


@dataclass(frozen=True)
class CurvatureTriple:
    k_ff: float
    k_gg: float
    k_fg: float


@dataclass(frozen=True)
class TubeMetric:
    l: float
    r0: float
    bump: BumpFunction

    def _parts(self, r):
        r = np.asarray(r, dtype=float)
        x = r - self.r0
        psi = 1.0 - self.bump.phi(r)
        return r, x, psi, self.bump.dphi(r), self.bump.d2phi(r), np.exp(-x)

    # The forms below are the defining expressions rewritten around
    # e^x - phi e^{-x} = 2 sinh x + (1 - phi) e^{-x}, which avoids the
    # cancellation near the core and reproduces -1 exactly where phi = 1.

    def f(self, r):
        r, x, psi, _, _, em = self._parts(r)
        return np.pi * (2 * np.sinh(x) + psi * em)

    def df(self, r):
        r, x, psi, d1, _, em = self._parts(r)
        return np.pi * (2 * np.cosh(x) - (psi + d1) * em)

    def d2f(self, r):
        r, x, psi, d1, d2, em = self._parts(r)
        return np.pi * (2 * np.sinh(x) + (psi - d2 + 2 * d1) * em)

    def g(self, r):
        r, x, psi, _, _, em = self._parts(r)
        return np.exp(self.r0) * (2 * np.cosh(x) - psi * em)

    def dg(self, r):
        r, x, psi, d1, _, em = self._parts(r)
        return np.exp(self.r0) * (2 * np.sinh(x) + (psi + d1) * em)

    def d2g(self, r):
        r, x, psi, d1, d2, em = self._parts(r)
        return np.exp(self.r0) * (2 * np.cosh(x) + (d2 - 2 * d1 - psi) * em)

    def f_direct(self, r):
        """``f`` evaluated literally from its definition (reference only)."""
        r = np.asarray(r, dtype=float)
        return np.pi * (np.exp(r - self.r0) - self.bump.phi(r) * np.exp(self.r0 - r))

    def g_direct(self, r):
        r = np.asarray(r, dtype=float)
        return np.exp(r) + self.bump.phi(r) * np.exp(2 * self.r0 - r)

    def _check_domain(self, r, open_core=True):
        r = np.asarray(r, dtype=float)
        lo_bad = r <= self.r0 if open_core else r < self.r0
        if np.any(lo_bad) or np.any(r > 0):
            raise DomainError(f"r must lie in ({self.r0}, 0]" if open_core
                              else f"r must lie in [{self.r0}, 0]")
        return r

    def curvatures(self, r):
        """The three quotients ``(-f''/f, -g''/g, -f'g'/(fg))`` as arrays."""
        r = self._check_domain(r)
        f, g = self.f(r), self.g(r)
        return (-self.d2f(r) / f, -self.d2g(r) / g,
                -(self.df(r) / f) * (self.dg(r) / g))


def build_tube_metric(l: float, bump: BumpFunction | str = "smoothstep") -> TubeMetric:
    if isinstance(bump, str):
        bump = get_bump(bump)
    # exact equality at the threshold must pass despite rounding of e^3 pi
    if l < MIN_MERIDIAN * (1 - 1e-15):
        raise MeridianTooShort(f"meridian length {l} < e^3 pi = {MIN_MERIDIAN}")
    r0 = -np.log(l / np.pi)
    if abs(r0 + 3.0) < 1e-12:
        r0 = -3.0
    return TubeMetric(float(l), float(r0), bump)


def curvature_triple(m: TubeMetric, r: float) -> CurvatureTriple:
    kff, kgg, kfg = m.curvatures(np.array([r]))
    return CurvatureTriple(float(kff[0]), float(kgg[0]), float(kfg[0]))


def meridian_length(m: TubeMetric, r: float) -> float:
    m._check_domain(r, open_core=False)
    return float(m.f(r))


@dataclass(frozen=True)
class BoundaryFormReport:
    """Relative deviations from the closed forms on the two outer pieces."""

    f_cusp: float
    g_cusp: float
    f_core: float
    g_core: float
    f_at_0: float
    g_at_0: float
    f_at_r0: float
    df_at_r0: float
    g_at_r0: float

    @property
    def max_deviation(self) -> float:
        return max(self.f_cusp, self.g_cusp, self.f_core, self.g_core)


def _rel(a, b):
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))


def boundary_form_check(m: TubeMetric, samples: int = 2001) -> BoundaryFormReport:
    """Compare against ``l e^r, e^r`` on [-1, 0] and ``2 pi sinh, 2 e^r0 cosh`` on [r0, -2]."""
    cusp = np.linspace(-1.0, 0.0, samples)
    core = np.linspace(m.r0, -2.0, samples)
    x = core - m.r0
    return BoundaryFormReport(
        f_cusp=_rel(m.f(cusp), m.l * np.exp(cusp)),
        g_cusp=_rel(m.g(cusp), np.exp(cusp)),
        f_core=_rel(m.f(core), 2 * np.pi * np.sinh(x)),
        g_core=_rel(m.g(core), 2 * np.exp(m.r0) * np.cosh(x)),
        f_at_0=float(m.f(0.0)),
        g_at_0=float(m.g(0.0)),
        f_at_r0=float(m.f(m.r0)),
        df_at_r0=float(m.df(m.r0)),
        g_at_r0=float(m.g(m.r0)),
    )


def pinching_constant_formula(bump: BumpFunction, samples: int = 100_000) -> float:
    """The max over [-2, -1] of the two bump expressions bounding the deviation."""
    r = np.linspace(-2.0, -1.0, samples)
    p, d1, d2 = bump.phi(r), bump.dphi(r), bump.d2phi(r)
    a = np.pi ** 2 * np.e ** 4 * np.abs(d2 - 2 * d1) / (1 - np.e ** -2)
    b = np.pi ** 4 * np.e ** 8 * np.abs(2 * p * d1 - d1 ** 2) / (1 - np.e ** -4)
    return float(max(a.max(), b.max()))


@dataclass(frozen=True)
class PinchingReport:
    l: float
    r0: float
    bump: str
    L_emp: float
    L_formula: float
    max_dev_outside_band: float

    @property
    def holds(self) -> bool:
        return self.L_emp <= self.L_formula + 1e-9 * self.l ** 2


def sample_radii(m: TubeMetric, samples: int, lo: float | None = None,
                 hi: float = 0.0, core_offset: float = 1e-6) -> np.ndarray:
    lo = m.r0 + core_offset if lo is None else lo
    return np.linspace(lo, hi, samples)


def pinching_verify(m: TubeMetric, samples: int = 100_000,
                    domain: tuple[float, float] | None = None) -> PinchingReport:
    """Measure ``l^2 max |K + 1|`` and compare with the formula constant.

    ``domain`` restricts the sampled radii (default: ``(r0, 0]`` with the
    core itself excluded).
    """
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    if domain is None:
        r = sample_radii(m, samples)
    else:
        r = np.linspace(max(domain[0], m.r0 + 1e-6), min(domain[1], 0.0), samples)
    dev = np.max(np.abs(np.stack(m.curvatures(r)) + 1.0), axis=0)
    outside = (r <= -2.0) | (r >= -1.0)
    return PinchingReport(
        l=m.l, r0=m.r0, bump=m.bump.name,
        L_emp=float(m.l ** 2 * dev.max()),
        L_formula=pinching_constant_formula(m.bump, samples),
        max_dev_outside_band=float(dev[outside].max()) if outside.any() else 0.0,
    )
