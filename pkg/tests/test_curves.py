import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hyperfill import curves
from hyperfill.curves import (
    CurvatureProfile, SampledPath, accel_identity_residual, chord_hausdorff,
    covariant_accel, displacement_integral, geodesic_curvature,
    make_circle, make_curvature_path, make_equidistant_curve, make_geodesic,
    make_horocycle, quasi_constant, random_perturbed_geodesic,
    resample_unit_speed, verify_quasi_geodesic,
)
from hyperfill.errors import CurvatureTooLarge, InputError, StencilError
from hyperfill.hyperbolic import minkowski_inner, point_distance

DT = 1e-3


def test_path_validation():
    g = make_geodesic(1.0, 0.1)
    with pytest.raises(InputError):
        SampledPath(g.t[:4], g.points[:4])
    t = g.t.copy()
    t[3] += 1e-6
    with pytest.raises(InputError):
        SampledPath(t, g.points)
    with pytest.raises(InputError):
        SampledPath(g.t, g.points * [1, 1, 1.1])
    # half speed path
    with pytest.raises(InputError):
        SampledPath(g.t * 2, g.points)


@pytest.mark.parametrize("dim", [2, 3])
def test_geodesic_curvature_vanishes(dim):
    for dt in (1e-2, 5e-3):
        prof = geodesic_curvature(make_geodesic(4.0, dt, dim=dim))
        assert prof.max_kappa < 1e-6


def test_geodesic_covariant_accel_zero():
    p = make_geodesic(2.0, DT)
    v = covariant_accel(p, len(p) // 2)
    assert v.norm() < 1e-6
    with pytest.raises(StencilError):
        covariant_accel(p, 0)


@pytest.mark.parametrize("d", [0.0, 0.3, 0.5, 1.0])
def test_equidistant_curvature(d):
    prof = geodesic_curvature(make_equidistant_curve(d, 4.0, DT))
    assert np.max(np.abs(prof.values - np.tanh(d))) < 1e-4


def test_equidistant_d03_example():
    prof = geodesic_curvature(make_equidistant_curve(0.3, 2.0, DT))
    assert abs(prof.max_kappa - 0.291313) < 1e-5


@pytest.mark.parametrize("rho", [0.5, 1.0, 2.0])
def test_circle_curvature(rho):
    prof = geodesic_curvature(make_circle(rho, 2.0, DT))
    assert np.max(np.abs(prof.values - 1 / np.tanh(rho))) < 1e-4


@pytest.mark.parametrize("dim", [2, 3])
def test_horocycle_curvature(dim):
    prof = geodesic_curvature(make_horocycle(4.0, DT, dim=dim))
    assert np.max(np.abs(prof.values - 1)) < 1e-4


def test_order4_stencil_agrees():
    p = make_equidistant_curve(0.5, 2.0, 1e-2)
    k2 = geodesic_curvature(p, order=2)
    k4 = geodesic_curvature(p, order=4)
    assert k4.offset == 2
    assert np.max(np.abs(k4.values - np.tanh(0.5))) < np.max(np.abs(k2.values - np.tanh(0.5)))


def test_identity_residual_examples():
    assert accel_identity_residual(make_geodesic(2.0, DT)) < 1e-4
    assert accel_identity_residual(make_horocycle(2.0, DT)) < 1e-4
    r1 = accel_identity_residual(make_equidistant_curve(0.5, 2.0, DT, dtype=np.longdouble))
    r2 = accel_identity_residual(make_equidistant_curve(0.5, 2.0, DT / 2, dtype=np.longdouble))
    assert r1 < 1e-4
    assert 3.5 <= r1 / r2 <= 4.5


def test_quasi_constant_examples():
    assert quasi_constant(0.0) == 1.0
    assert abs(quasi_constant(np.tanh(0.7)) - np.cosh(0.7)) < 1e-12
    assert abs(quasi_constant(0.6) - 1.25) < 1e-15
    with pytest.raises(CurvatureTooLarge):
        quasi_constant(1.0)


def test_geodesic_is_one_quasi_geodesic():
    rep = verify_quasi_geodesic(make_geodesic(4.0, 1e-2), 1.0)
    assert rep.lower_violation < 1e-9
    # point-set Hausdorff against a chord sampled at dt/2 bottoms out at dt/2
    assert rep.chord_hausdorff <= 0.5e-2 + 1e-9


def test_hypercycle_quasi_geodesic_and_sharpness():
    d, dt = 0.5, 1e-2
    p = make_equidistant_curve(d, 20.0, dt)
    assert verify_quasi_geodesic(p, np.cosh(d)).lower_violation < 10 * dt
    assert verify_quasi_geodesic(p, np.cosh(d) - 0.05).lower_violation > 0.1


def test_chord_hausdorff_approaches_d_from_below():
    d = 0.5
    vals = [chord_hausdorff(make_equidistant_curve(d, L, 1e-2)) for L in (5, 10, 20)]
    assert vals == sorted(vals)
    assert all(v < d for v in vals)
    assert d - vals[-1] < 1e-3


def test_chord_hausdorff_monotone_in_curvature():
    vals = [chord_hausdorff(make_equidistant_curve(np.arctanh(K), 6.0, 1e-2))
            for K in (0.5, 0.3, 0.1, 0.0)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    assert vals[-1] <= 0.5e-2 + 1e-9


def test_displacement_examples():
    n, dt = 1001, 1e-3
    prof = CurvatureProfile(np.zeros(n))
    assert abs(displacement_integral(prof, dt)[-1] - 1.0) < 1e-12
    d = 0.4
    prof = CurvatureProfile(np.full(n, np.tanh(d)))
    assert abs(displacement_integral(prof, dt)[-1] - 1.0 / np.cosh(d)) < 1e-12
    with pytest.raises(CurvatureTooLarge):
        displacement_integral(CurvatureProfile(np.ones(n)), dt)


def _displacement_margin(path):
    prof = geodesic_curvature(path)
    inner = path.points[prof.offset:len(path) - prof.offset]
    delta = displacement_integral(prof, path.dt)
    return float(np.max(delta - point_distance(inner, inner[0])))


@pytest.mark.parametrize("make", [
    lambda: make_geodesic(6.0, DT),
    lambda: make_equidistant_curve(0.5, 6.0, DT),
    lambda: random_perturbed_geodesic(np.random.default_rng(7), 6.0, DT),
])
def test_displacement_bound(make):
    assert _displacement_margin(make()) <= 10 * DT


def test_frame_ode_reproduces_constant_curvature():
    K = np.tanh(0.5)
    p = make_curvature_path(lambda s: K, 4.0, 1e-2)
    prof = geodesic_curvature(p)
    assert np.max(np.abs(prof.values - K)) < 1e-4


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_small_curvature_paths_are_quasi_geodesics(seed):
    p = random_perturbed_geodesic(np.random.default_rng(seed), 6.0, 1e-2)
    K = geodesic_curvature(p).max_kappa
    assert K < 0.9
    assert verify_quasi_geodesic(p, quasi_constant(K)).lower_violation < 10 * p.dt


def test_resample_unit_speed():
    g = make_equidistant_curve(0.3, 2.0, 1e-3)
    # an unevenly sampled copy of the same curve
    s = np.linspace(0, 1, 800) ** 1.5
    idx = np.unique(np.round(s * (len(g) - 1)).astype(int))
    p = resample_unit_speed(g.points[idx], 1e-2)
    assert abs(p.length - g.length) <= 1e-2 + 1e-9
    assert np.max(np.abs(geodesic_curvature(p).values - np.tanh(0.3))) < 1e-3


def test_dimension_three_embedding():
    p = make_equidistant_curve(0.5, 2.0, DT, dim=3)
    assert p.points.shape[1] == 4
    assert np.allclose(p.points[:, 2], 0)
    assert np.allclose(minkowski_inner(p.points, p.points), -1)


def test_longdouble_samples_kept():
    p = make_equidistant_curve(0.5, 1.0, 1e-2, dtype=np.longdouble)
    assert p.points.dtype == np.longdouble
    assert curves.ambient_accel(p).dtype == np.longdouble
