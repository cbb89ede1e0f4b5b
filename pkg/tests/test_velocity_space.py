"""Velocity-space substrate: grid, Maxwellians, moments, entropy, projector.

Expected values tagged "oracle" are closed-form Gaussian moments; see the
inline derivations.
"""

import numpy as np
import pytest

from kinhydro.errors import ConfigError, DegenerateStateError, IllConditionedGridError, NegativeValueError
from kinhydro.velocity import (
    DistributionSlice,
    build_grid,
    infinitesimal_maxwellian,
    invariant_projector,
    maxwellian,
    moments,
    relative_entropy,
    sphere_rule,
)


def test_grid_basic_counts():
    g = build_grid(4, 6.0, 6)
    assert g.size == 64
    assert g.weight == pytest.approx((12.0 / 3.0) ** 3)  # h^3 = 4^3


@pytest.mark.parametrize("order", [6, 14, 26])
def test_sphere_weights_sum_to_4pi(order):
    _, w = sphere_rule(order)
    assert w.sum() == pytest.approx(4.0 * np.pi, rel=1e-13)


@pytest.mark.parametrize("order", [6, 14, 26])
def test_sphere_rule_symmetric(order):
    pts, w = sphere_rule(order)
    # omega -> -omega leaves the node set and weights invariant
    for p, wp in zip(pts, w):
        match = np.all(np.abs(pts + p) < 1e-14, axis=1)
        assert match.sum() == 1
        assert w[match][0] == pytest.approx(wp)


def test_grid_reflection_symmetry():
    g = build_grid(6, 5.0, 6)
    r = g.reflect_index()
    assert np.allclose(g.nodes[r], -g.nodes, atol=1e-13)


def test_build_grid_validation():
    with pytest.raises(ConfigError):
        build_grid(3, 6.0, 6)
    with pytest.raises(ConfigError):
        build_grid(8, -1.0, 6)
    with pytest.raises(ConfigError):
        build_grid(8, 6.0, 11)


def test_maxwellian_mass(grid16):
    m = maxwellian(1.0, (0, 0, 0), 1.0, grid16)
    mass = grid16.weight * m.values.sum()
    assert abs(mass - 1.0) < 1e-4  # midpoint rule vs exact Gaussian integral 1


def test_maxwellian_moments_roundtrip(grid16):
    mom = moments(maxwellian(1.0, (0, 0, 0), 1.0, grid16), grid16)
    assert abs(mom.rho - 1.0) < 1e-4
    assert np.abs(mom.u).max() < 1e-10
    assert abs(mom.theta - 1.0) < 1e-4


def test_maxwellian_density_scaling(grid16):
    m1 = maxwellian(1.0, (0, 0, 0), 1.0, grid16)
    m2 = maxwellian(2.0, (0, 0, 0), 1.0, grid16)
    assert np.allclose(m2.values, 2.0 * m1.values, rtol=1e-14)


def test_maxwellian_energy_flux_oracle(grid16):
    # oracle: int (|v|^2/2) v M_(rho,u,theta) dv = rho u (|u|^2/2 + 5 theta/2)
    u = np.array([0.1, 0.0, 0.0])
    mom = moments(maxwellian(1.0, u, 1.0, grid16), grid16)
    exact = u * (0.5 * (u @ u) + 2.5)
    assert np.abs(mom.energy_flux - exact).max() < 1e-4


def test_sound_speed_independent_of_velocity(grid16):
    for u in ((0, 0, 0), (0.1, 0, 0), (0, -0.2, 0.1)):
        mom = moments(maxwellian(1.0, u, 1.0, grid16), grid16)
        assert mom.sound_speed == pytest.approx(np.sqrt(5.0 * mom.theta / 3.0), rel=1e-14)
        assert mom.sound_speed == pytest.approx(np.sqrt(5.0 / 3.0), abs=2e-4)


def test_maxwellian_validation(grid8):
    with pytest.raises(ConfigError):
        maxwellian(-1.0, (0, 0, 0), 1.0, grid8)
    with pytest.raises(ConfigError):
        maxwellian(1.0, (0, 0, 0), 0.0, grid8)


def test_moments_degenerate(grid8):
    with pytest.raises(DegenerateStateError):
        moments(DistributionSlice(np.zeros(grid8.size)), grid8)


def test_moments_additive_in_density(grid16):
    a = maxwellian(1.0, (0.1, 0, 0), 1.2, grid16)
    b = maxwellian(0.5, (-0.2, 0, 0), 0.9, grid16)
    mom = moments(DistributionSlice(a.values + b.values), grid16)
    ma, mb = moments(a, grid16), moments(b, grid16)
    assert mom.rho == pytest.approx(ma.rho + mb.rho, rel=1e-14)


def test_infinitesimal_maxwellian_shapes(grid16):
    z = infinitesimal_maxwellian(0.0, (0, 0, 0), 0.0, grid16)
    assert np.all(z.values == 0.0)
    c = infinitesimal_maxwellian(1.0, (0, 0, 0), 0.0, grid16)
    assert np.all(c.values == 1.0)
    # oracle: <(|v|^2-3)/2 |v|^2> = 3 for the unit Gaussian
    t = infinitesimal_maxwellian(0.0, (0, 0, 0), 1.0, grid16)
    wm = grid16.weight * grid16.maxwellian_values
    assert abs((wm * t.values).sum()) < 1e-4
    assert abs((wm * t.values * grid16.vsq).sum() - 3.0) < 1e-3


def test_relative_entropy_identity(grid16):
    m = maxwellian(1.0, (0, 0, 0), 1.0, grid16)
    assert relative_entropy(m, m, grid16) == 0.0


def test_relative_entropy_quadratic_limit(grid16):
    # oracle: H(M(1+d g)|M)/d^2 -> <g^2>/2 from the Taylor expansion of
    # (1+z)ln(1+z)-z; for g = v1, <g^2>/2 = 1/2
    d = 1e-3
    g = grid16.nodes[:, 0]
    f = DistributionSlice(grid16.maxwellian_values * (1.0 + d * g))
    m = maxwellian(1.0, (0, 0, 0), 1.0, grid16)
    h = relative_entropy(f, m, grid16)
    assert abs(h / d**2 - 0.5) < 0.01 * 0.5


def test_relative_entropy_shifted_maxwellian(grid16):
    # oracle: H(M_(1,u,1) | M) = |u|^2/2 exactly in the continuum
    u = np.array([0.1, 0.0, 0.0])
    h = relative_entropy(maxwellian(1.0, u, 1.0, grid16), maxwellian(1.0, (0, 0, 0), 1.0, grid16), grid16)
    assert abs(h - 0.005) < 1e-3


def test_relative_entropy_negative_entries(grid8):
    f = grid8.maxwellian_values.copy()
    f[0] = -1e-3
    with pytest.raises(NegativeValueError) as exc:
        relative_entropy(DistributionSlice(f), maxwellian(1, (0, 0, 0), 1, grid8), grid8)
    assert 0 in exc.value.nodes


def test_relative_entropy_nonneg_vs_own_maxwellian(grid16, rng):
    f = DistributionSlice(np.abs(rng.normal(size=grid16.size)) * grid16.maxwellian_values)
    mom = moments(f, grid16)
    m = maxwellian(mom.rho, mom.u, mom.theta, grid16)
    assert relative_entropy(f, m, grid16) >= 0.0


def test_projector_properties(grid16, rng):
    p = invariant_projector(grid16)
    x = rng.normal(size=grid16.size)
    assert np.abs(p(np.ones(grid16.size)) - 1.0).max() < 1e-10
    assert np.abs(p(p(x)) - p(x)).max() < 1e-12
    # self-adjointness in the M-weighted inner product
    w = grid16.weight * grid16.maxwellian_values
    y = rng.normal(size=grid16.size)
    assert abs((w * p(x)) @ y - (w * x) @ p(y)) < 1e-12 * abs((w * x) @ y + 1)


def test_projector_preserves_invariant_moments(grid16):
    w = grid16.weight * grid16.maxwellian_values
    phi = grid16.nodes[:, 0] ** 3
    proj = invariant_projector(grid16)(phi)
    for inv in grid16.invariants:
        assert (w * inv) @ phi == pytest.approx((w * inv) @ proj, rel=1e-10)


def test_projector_illconditioned():
    g = build_grid(4, 1e-8, 6)
    with pytest.raises(IllConditionedGridError):
        invariant_projector(g)


def test_moment_error_refinement_ratio():
    # midpoint-rule refinement: error at n=16 over n=32 should shrink >= 3x
    errs = []
    for n in (16, 32):
        g = build_grid(n, 6.0, 6)
        mom = moments(maxwellian(1.0, (0.2, 0, 0), 1.1, g), g)
        errs.append(abs(mom.rho - 1.0) + np.abs(mom.u - (0.2, 0, 0)).max() + abs(mom.theta - 1.1))
    assert errs[0] / max(errs[1], 1e-300) >= 3.0
