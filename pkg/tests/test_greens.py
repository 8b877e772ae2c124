"""Theta functions, the torus Green's function, divisors, and densities."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortexlab import (
    Divisor,
    GridSpec,
    TorusGeometry,
    divisor_potential,
    green_gradient,
    sample_at,
    theta1,
    theta1_prime,
    torus_green,
    vanishing_density,
)
from vortexlab.errors import BadTau, MixedSignDivisor
from vortexlab.greens import NEGATIVE_SENTINEL

UNIT = TorusGeometry(1.0, 1.0)
GRID = GridSpec(256, 256)


def lap4(fn, X, Y, h=1e-5):
    """4th-order analytic finite-difference Laplacian of a closed form.

    The singular potentials defeat both grid-spectral and 2nd-order
    stencils near the points; differentiating the closed form with a
    sub-grid step keeps truncation and roundoff below 2e-4 at four grid
    cells from a logarithmic singularity.
    """
    acc = -60.0 * fn(X, Y)
    for s, c in ((1, 16.0), (-1, 16.0), (2, -1.0), (-2, -1.0)):
        acc = acc + c * fn(X + s * h, Y) + c * fn(X, Y + s * h)
    return acc / (12.0 * h * h)


# ---------------------------------------------------------------------------
# Theta function


def test_theta1_vanishes_at_origin():
    assert abs(theta1(0.0, 1j)) == 0.0


def test_theta1_is_odd():
    rng = np.random.default_rng(1)
    z = rng.uniform(-0.5, 0.5, 20) + 1j * rng.uniform(-0.4, 0.4, 20)
    assert np.abs(theta1(-z, 1j) + theta1(z, 1j)).max() <= 1e-14


def test_theta1_truncation_tail():
    a = theta1(0.3 + 0.1j, 1j, n_terms=8)
    b = theta1(0.3 + 0.1j, 1j, n_terms=64)
    assert abs(a - b) <= 1e-14


def test_theta1_prime_matches_finite_difference():
    z = 0.23 + 0.05j
    h = 1e-6
    num = (theta1(z + h, 1j) - theta1(z - h, 1j)) / (2 * h)
    assert abs(theta1_prime(z, 1j) - num) <= 1e-7


@pytest.mark.parametrize("tau", [0.0, -1j, 1.0, 0.05j])
def test_theta1_rejects_bad_tau(tau):
    with pytest.raises(BadTau):
        theta1(0.1, tau)


# ---------------------------------------------------------------------------
# Green's function


def test_green_is_even():
    rng = np.random.default_rng(2)
    for _ in range(10):
        p = rng.uniform(0.05, 0.45, 2)
        a = torus_green((p[0], p[1]), UNIT)
        b = torus_green((-p[0], -p[1]), UNIT)
        assert abs(a - b) <= 1e-12


def test_green_periodicity():
    geo = TorusGeometry(1.0, 1.5)
    rng = np.random.default_rng(3)
    for _ in range(50):
        x, y = rng.uniform(0.05, 0.9), rng.uniform(0.05, 1.4)
        g = torus_green((x, y), geo)
        assert abs(torus_green((x + 1.0, y), geo) - g) <= 1e-12
        assert abs(torus_green((x, y + 1.5), geo) - g) <= 1e-12


def test_green_lattice_sentinel():
    assert torus_green((0.0, 0.0), UNIT) == -np.inf
    assert np.exp(torus_green((0.0, 0.0), UNIT)) == 0.0


def test_green_flux_quadrature():
    # Line integral of dG/dn around a radius-0.1 circle at the origin:
    # the enclosed delta minus the uniform background, 1 - pi r^2 / Vol.
    n = 4096
    theta = (np.arange(n) + 0.5) * 2.0 * np.pi / n
    r = 0.1
    gx, gy = green_gradient((r * np.cos(theta), r * np.sin(theta)), UNIT)
    flux = float(np.sum(gx * np.cos(theta) + gy * np.sin(theta))) * (2 * np.pi * r / n)
    assert abs(flux - (1.0 - np.pi * r**2)) <= 1e-6


def test_green_gradient_matches_finite_difference():
    p = (0.31, 0.17)
    h = 1e-6
    gx, gy = green_gradient(p, UNIT)
    nx = (torus_green((p[0] + h, p[1]), UNIT) - torus_green((p[0] - h, p[1]), UNIT)) / (2 * h)
    ny = (torus_green((p[0], p[1] + h), UNIT) - torus_green((p[0], p[1] - h), UNIT)) / (2 * h)
    assert abs(gx - nx) <= 1e-6 and abs(gy - ny) <= 1e-6


def test_green_mean_laplacian_far_from_origin():
    x = np.arange(256) / 256.0
    X, Y = np.meshgrid(x, x, indexing="ij")
    dx = np.mod(X + 0.5, 1.0) - 0.5
    dy = np.mod(Y + 0.5, 1.0) - 0.5
    far = np.hypot(dx, dy) >= 0.2
    vals = lap4(lambda a, b: torus_green((a, b), UNIT), X[far], Y[far])
    assert abs(vals.mean() - (-1.0)) <= 1e-3


# ---------------------------------------------------------------------------
# Divisors


def test_divisor_validation():
    with pytest.raises(ValueError, match="multiplicity must be nonzero"):
        Divisor(((0.1, 0.1),), (0,))
    with pytest.raises(ValueError):
        Divisor(((0.1, 0.1), (0.2, 0.2)), (1,))
    d = Divisor.from_items([(0.1, 0.2, 1), (0.3, 0.4, -2)])
    assert d.degree == -1
    assert len(d) == 2


def test_divisor_sign_partition():
    d = Divisor(((0.1, 0.1), (0.2, 0.2), (0.3, 0.3)), (2, -1, 3))
    pos, neg = d.positive_part(), d.negative_part()
    assert pos.multiplicities == (2, 3) and neg.multiplicities == (-1,)
    assert pos.degree + neg.degree == d.degree


def test_divisor_separation_modulo_periods():
    d = Divisor(((0.1, 0.2), (1.1, 0.2)), (1, 1))
    with pytest.raises(ValueError, match="coincide"):
        d.check_separated(UNIT)
    Divisor(((0.1, 0.2), (0.6, 0.2)), (1, 1)).check_separated(UNIT)


def test_empty_divisor_potential_is_zero():
    pot = divisor_potential(Divisor((), ()), UNIT, GridSpec(16, 16))
    assert (pot.u.values == 0.0).all()
    dens = vanishing_density(pot, 1.0)
    assert (dens.values == 1.0).all()


# ---------------------------------------------------------------------------
# Divisor potentials


def u_closed_form(divisor, geometry):
    def fn(a, b):
        acc = np.zeros_like(np.asarray(a, dtype=float))
        for (px, py), m in divisor:
            acc = acc + 4.0 * np.pi * m * torus_green((a - px, b - py), geometry)
        return acc

    return fn


def test_potential_log_slope_single_point():
    div = Divisor(((0.5, 0.5),), (1,))
    fn = u_closed_form(div, UNIT)
    radii = np.exp(np.linspace(np.log(0.02), np.log(0.1), 12))
    ang = np.arange(64) * 2.0 * np.pi / 64
    means = [
        float(np.mean(fn(0.5 + r * np.cos(ang), 0.5 + r * np.sin(ang))))
        for r in radii
    ]
    slope = np.polyfit(np.log(radii), means, 1)[0]
    assert abs(slope - 2.0) <= 0.02


def test_potential_far_laplacian_constant():
    div = Divisor(((0.3, 0.42), (0.7, 0.1)), (1, 2))
    pot = divisor_potential(div, UNIT, GRID)
    fn = u_closed_form(div, UNIT)
    rng = np.random.default_rng(4)
    pts = rng.uniform(0.0, 1.0, (600, 2))
    h = 1.0 / 256
    dist = np.full(600, np.inf)
    for (px, py), _ in div:
        ddx = np.mod(pts[:, 0] - px + 0.5, 1.0) - 0.5
        ddy = np.mod(pts[:, 1] - py + 0.5, 1.0) - 0.5
        dist = np.minimum(dist, np.hypot(ddx, ddy))
    sel = dist > 4 * h
    vals = lap4(fn, pts[sel, 0], pts[sel, 1])
    target = -4.0 * np.pi * pot.degree
    assert np.abs(vals - target).max() <= 1e-3


def test_potential_zero_degree_has_zero_mean_laplacian():
    div = Divisor(((0.25, 0.25), (0.75, 0.75)), (1, -1))
    fn = u_closed_form(div, UNIT)
    rng = np.random.default_rng(5)
    pts = rng.uniform(0.0, 1.0, (600, 2))
    dist = np.full(600, np.inf)
    for (px, py), _ in div:
        ddx = np.mod(pts[:, 0] - px + 0.5, 1.0) - 0.5
        ddy = np.mod(pts[:, 1] - py + 0.5, 1.0) - 0.5
        dist = np.minimum(dist, np.hypot(ddx, ddy))
    sel = dist > 4.0 / 256
    vals = lap4(fn, pts[sel, 0], pts[sel, 1])
    assert abs(vals.mean()) <= 1e-3


def test_potential_linearity_disjoint_supports():
    d1 = Divisor(((0.2, 0.2),), (1,))
    d2 = Divisor(((0.7, 0.6),), (2,))
    combined = Divisor(d1.points + d2.points, d1.multiplicities + d2.multiplicities)
    grid = GridSpec(64, 64)
    u1 = divisor_potential(d1, UNIT, grid).u
    u2 = divisor_potential(d2, UNIT, grid).u
    u12 = divisor_potential(combined, UNIT, grid).u
    assert np.abs(u12.values - (u1.values + u2.values)).max() <= 1e-12


def test_potential_sentinel_at_exact_sample():
    # Point placed on a grid sample: the log blows up there; the sample
    # stores the finite sentinel and exp() of it is exactly zero.
    pot = divisor_potential(Divisor(((0.5, 0.5),), (1,)), UNIT, GridSpec(16, 16))
    assert pot.u.values[8, 8] == NEGATIVE_SENTINEL
    assert np.isfinite(pot.u.values).all()
    dens = vanishing_density(pot, 1.0)
    assert dens.values[8, 8] == 0.0
    assert (dens.values >= 0.0).all()


def test_potential_recenter_flag():
    pot = divisor_potential(Divisor(((0.3, 0.3),), (1,)), UNIT, GridSpec(32, 32), recenter=True)
    finite = pot.u.values > NEGATIVE_SENTINEL / 2
    assert abs(pot.u.values[finite].mean()) <= 1e-12


# ---------------------------------------------------------------------------
# Vanishing densities


@pytest.mark.parametrize("m,target,tol", [(1, 2.0, 0.02), (2, 4.0, 0.05)])
def test_density_log_slope(m, target, tol):
    pot = divisor_potential(Divisor(((0.5, 0.5),), (m,)), UNIT, GRID)
    dens = vanishing_density(pot, 1.0)
    radii = np.exp(np.linspace(np.log(0.02), np.log(0.1), 12))
    ang = np.arange(64) * 2.0 * np.pi / 64
    pts = np.concatenate(
        [
            np.stack([0.5 + r * np.cos(ang), 0.5 + r * np.sin(ang)], axis=1)
            for r in radii
        ]
    )
    means = sample_at(dens, pts).reshape(12, 64).mean(axis=1)
    slope = np.polyfit(np.log(radii), np.log(means), 1)[0]
    assert abs(slope - target) <= tol


def test_density_rejects_negative_multiplicities():
    pot = divisor_potential(Divisor(((0.2, 0.2),), (-1,)), UNIT, GridSpec(16, 16))
    with pytest.raises(MixedSignDivisor):
        vanishing_density(pot, 1.0)
    with pytest.raises(ValueError):
        vanishing_density(
            divisor_potential(Divisor(((0.2, 0.2),), (1,)), UNIT, GridSpec(16, 16)),
            0.0,
        )


def test_density_positive_away_from_points():
    div = Divisor(((0.25, 0.25), (0.7, 0.6)), (1, 2))
    grid = GridSpec(128, 128)
    dens = vanishing_density(divisor_potential(div, UNIT, grid), 3.0)
    assert (dens.values >= 0.0).all()
    X = np.arange(128) / 128.0
    XX, YY = np.meshgrid(X, X, indexing="ij")
    dist = np.full((128, 128), np.inf)
    for (px, py), _ in div:
        ddx = np.mod(XX - px + 0.5, 1.0) - 0.5
        ddy = np.mod(YY - py + 0.5, 1.0) - 0.5
        dist = np.minimum(dist, np.hypot(ddx, ddy))
    far = dist >= 4.0 / 128
    assert dens.values[far].min() > 0.0


@settings(max_examples=20, deadline=None)
@given(
    x=st.floats(0.05, 0.95),
    y=st.floats(0.05, 0.95),
    m=st.integers(1, 3),
)
def test_density_scale_is_linear(x, y, m):
    pot = divisor_potential(Divisor(((x, y),), (m,)), UNIT, GridSpec(16, 16))
    one = vanishing_density(pot, 1.0)
    five = vanishing_density(pot, 5.0)
    assert np.abs(five.values - 5.0 * one.values).max() <= 1e-12 * max(
        1.0, one.values.max()
    )
