import io

import numpy as np
import pytest

from fbmgreeks import (
    ConfigurationError,
    DivergenceError,
    DyadicGrid,
    HurstParameter,
    ModelSpec,
    RegimeError,
    SeedRecord,
    affine,
    constant,
    convergence_probe,
    euler_state,
    euler_tangent,
    euler_variation,
    identity,
    paper_sigma,
    paper_sigma_tilde,
    polynomial,
    sample_fbm_circulant,
    solve_bundle,
    square,
    write_trajectory_csv,
)

H06 = HurstParameter(0.6)
GRID = DyadicGrid(8)
PAPER_MODEL = ModelSpec(
    drift=constant(0.0),
    vol=paper_sigma(),
    payoff=square(),
    x0=1.0,
    vol_direction=paper_sigma_tilde(),
)


def _path(seed=0, grid=GRID, h=H06):
    return sample_fbm_circulant(grid, h, SeedRecord(314, seed))


def test_unit_volatility_reproduces_the_driver_bitwise():
    path = _path()
    model = ModelSpec(constant(0.0), constant(1.0), square(), 0.0)
    bundle = euler_state(model, path)
    assert np.array_equal(bundle.state, path.values)


def test_pure_drift_is_linear_in_time():
    path = _path()
    model = ModelSpec(constant(1.0), constant(0.0), square(), 0.0)
    bundle = euler_state(model, path)
    np.testing.assert_allclose(bundle.state, path.grid.nodes, rtol=0, atol=1e-14)


def test_affine_volatility_tangent_equals_state_ratio_exactly():
    # both recursions multiply by the same factor; x0 = 2 keeps the ratio exact
    path = _path(1)
    model = ModelSpec(constant(0.0), affine(0.8, 0.0), square(), 2.0)
    bundle = solve_bundle(model, path, want_tangent=True)
    assert np.array_equal(bundle.tangent, bundle.state / 2.0)


def test_tangent_is_one_when_coefficients_are_flat():
    path = _path(2)
    model = ModelSpec(constant(0.3), constant(1.5), square(), 1.0)
    bundle = solve_bundle(model, path, want_tangent=True)
    assert np.array_equal(bundle.tangent, np.ones_like(bundle.tangent))


def test_variation_zero_without_direction_mass():
    path = _path(3)
    model = ModelSpec(constant(0.0), paper_sigma(), square(), 1.0, vol_direction=constant(0.0))
    bundle = solve_bundle(model, path, want_variation=True)
    assert np.array_equal(bundle.variation, np.zeros_like(bundle.variation))


def test_variation_with_flat_coefficients_accumulates_the_driver():
    path = _path(4)
    model = ModelSpec(constant(0.0), constant(1.5), square(), 1.0, vol_direction=constant(0.5))
    bundle = solve_bundle(model, path, want_variation=True)
    assert np.array_equal(bundle.variation, 0.5 * path.values)
    model7 = ModelSpec(constant(0.0), constant(1.5), square(), 1.0, vol_direction=constant(0.7))
    bundle7 = solve_bundle(model7, path, want_variation=True)
    np.testing.assert_allclose(bundle7.variation, 0.7 * path.values, rtol=1e-13, atol=1e-15)


def test_single_path_ops_agree_with_bundle():
    path = _path(5)
    state = euler_state(PAPER_MODEL, path).state
    tangent = euler_tangent(PAPER_MODEL, path, state)
    variation = euler_variation(PAPER_MODEL, path, state)
    bundle = solve_bundle(PAPER_MODEL, path, want_tangent=True, want_variation=True)
    assert np.array_equal(state, bundle.state)
    assert np.array_equal(tangent, bundle.tangent)
    assert np.array_equal(variation, bundle.variation)


def test_tangent_matches_common_noise_finite_difference():
    eps = 1e-5
    grid = DyadicGrid(10)
    hits = 0
    for i in range(100):
        path = _path(i, grid)
        base = solve_bundle(PAPER_MODEL, path, want_tangent=True)
        up = euler_state(
            ModelSpec(constant(0.0), paper_sigma(), square(), 1.0 + eps), path
        ).state[-1]
        down = euler_state(
            ModelSpec(constant(0.0), paper_sigma(), square(), 1.0 - eps), path
        ).state[-1]
        fd = (up - down) / (2 * eps)
        if abs(base.tangent[-1] - fd) <= 1e-3 * abs(base.tangent[-1]):
            hits += 1
    assert hits >= 95


def test_variation_matches_common_noise_finite_difference():
    eps = 1e-5
    grid = DyadicGrid(10)
    hits = 0
    for i in range(100):
        path = _path(i, grid)
        base = solve_bundle(PAPER_MODEL, path, want_variation=True)

        def shifted(sign):
            # volatility bumped along the direction: (1 + e^-y^2) + eps*(1 + pi/2 + atan y)
            vol = _SigmaPlusDirection(sign * eps)
            return euler_state(ModelSpec(constant(0.0), vol, square(), 1.0), path).state[-1]

        fd = (shifted(+1) - shifted(-1)) / (2 * eps)
        if abs(base.variation[-1] - fd) <= 1e-3 * abs(base.variation[-1]):
            hits += 1
    assert hits >= 95


class _SigmaPlusDirection:
    """paper volatility shifted by eps times the vega direction (test helper)."""

    def __init__(self, eps):
        self.eps = eps
        self._vol = paper_sigma()
        self._dir = paper_sigma_tilde()

    def __call__(self, y):
        return self._vol(y) + self.eps * self._dir(y)

    def deriv(self, y):
        return self._vol.deriv(y) + self.eps * self._dir.deriv(y)


def test_state_rejects_brownian_regime():
    path = sample_fbm_circulant(GRID, HurstParameter(0.5), SeedRecord(0, 0))
    with pytest.raises(RegimeError):
        euler_state(PAPER_MODEL, path)


def test_divergence_guard_reports_step():
    path = _path(6)
    explosive = ModelSpec(square(), constant(0.0), square(), 10.0)
    with pytest.raises(DivergenceError) as err:
        euler_state(explosive, path)
    assert err.value.step is not None and err.value.step >= 1


def test_probe_needs_three_levels():
    with pytest.raises(ConfigurationError):
        convergence_probe(PAPER_MODEL, H06, [8, 9], 4, SeedRecord(1, 0))


def test_probe_is_exact_for_additive_constant_volatility():
    # scheme telescopes; only summation-order roundoff remains
    model = ModelSpec(constant(0.0), constant(1.0), square(), 0.0)
    table = convergence_probe(model, H06, [6, 7, 8, 9], 8, SeedRecord(4, 0))
    assert max(table.errors) < 1e-12


def test_probe_errors_decrease_on_the_smooth_model():
    table = convergence_probe(PAPER_MODEL, H06, [7, 8, 9, 10, 11], 12, SeedRecord(9, 0))
    diffs = np.diff(table.errors)
    assert np.all(diffs < 0)
    assert table.fitted_order > 0


def test_trajectory_csv_columns_track_contents():
    path = _path(7, DyadicGrid(2))
    bundle = solve_bundle(PAPER_MODEL, path, want_tangent=True)
    buf = io.StringIO()
    write_trajectory_csv(bundle, buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "k,t,X,Y"
    assert len(lines) == 6


def test_catalog_derivatives_match_finite_differences():
    funcs = [
        constant(2.0),
        affine(1.5, -0.3),
        polynomial(1.0, 0.0, 2.0),
        paper_sigma(),
        paper_sigma_tilde(),
        square(),
        identity(),
    ]
    ys = np.linspace(-2.0, 2.0, 9)
    eps = 1e-6
    for f in funcs:
        fd = (f(ys + eps) - f(ys - eps)) / (2 * eps)
        np.testing.assert_allclose(f.deriv(ys), fd, rtol=1e-6, atol=1e-6)
