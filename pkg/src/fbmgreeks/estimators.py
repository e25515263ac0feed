"""Monte Carlo sensitivity estimators.

pathwise_delta / pathwise_vega average the payoff derivative times the
terminal tangent / variation process. weight_delta avoids differentiating
the payoff: it multiplies the raw payoff by a divergence weight built from
the inverse Cameron-Martin isometry. finance_mu_sensitivity differentiates
the stochastic-volatility system in the direction of its vol-of-vol
coefficient.

Path i always draws from substream i (pairs: 2i and 2i+1) of the master
seed, so estimates are bit-reproducible regardless of chunk size.
"""

from __future__ import annotations

import numpy as np

from .coeffs import FinanceModelSpec, ModelSpec
from .errors import RegimeError, SingularityError
from .fbm import circulant_increment_batch
from .fracops import VolterraKernel, cm_transform_matrix, kernel_cell_weights
from .grids import DyadicGrid, HurstParameter, SeedRecord
from .reporting import summarize
from .sde import euler_bundle_batch

_CHUNK = 512
SIGMA_FLOOR = 1e-8


def _chunks(n):
    for lo in range(0, n, _CHUNK):
        yield lo, min(n, lo + _CHUNK)


def pathwise_delta(
    model: ModelSpec,
    grid: DyadicGrid,
    h: HurstParameter,
    n: int,
    alpha: float,
    seed: SeedRecord,
):
    """Mean of F'(X_T) Y_T over n independent paths, with CLT interval."""
    if not h.young_regime:
        raise RegimeError(f"pathwise delta needs H > 1/2, got H={h.value}")
    values = np.empty(n)
    for lo, hi in _chunks(n):
        incs = circulant_increment_batch(grid, h, seed.substream(lo), hi - lo)
        X, Y, _ = euler_bundle_batch(model, incs, grid.step, want_tangent=True)
        values[lo:hi] = model.payoff.deriv(X[:, -1]) * Y[:, -1]
    return summarize(values, grid.n2, alpha, seed, "pathwise_delta")


def pathwise_vega(
    model: ModelSpec,
    grid: DyadicGrid,
    h: HurstParameter,
    n: int,
    alpha: float,
    seed: SeedRecord,
):
    """Mean of F'(X_T) Z_T over n independent paths, with CLT interval."""
    if not h.young_regime:
        raise RegimeError(f"pathwise vega needs H > 1/2, got H={h.value}")
    model.require_vol_direction()
    values = np.empty(n)
    for lo, hi in _chunks(n):
        incs = circulant_increment_batch(grid, h, seed.substream(lo), hi - lo)
        X, _, Z = euler_bundle_batch(model, incs, grid.step, want_variation=True)
        values[lo:hi] = model.payoff.deriv(X[:, -1]) * Z[:, -1]
    return summarize(values, grid.n2, alpha, seed, "pathwise_vega")


def weight_delta(
    model: ModelSpec,
    grid: DyadicGrid,
    h: HurstParameter,
    n: int,
    alpha: float,
    seed: SeedRecord,
):
    """Mean of F(X_T) times the divergence weight of the initial-condition
    shift; valid for H >= 1/2 and any payoff in the catalog (no F' needed).

    The Brownian motion is primal here: each path draws Brownian increments,
    derives the fBm through the Volterra kernel (identity at H = 1/2), solves
    the state and tangent equations, forms hdot = (1/T) vol(X)^{-1} Y, pushes
    it through the weight transform and closes with the left-point Ito sum.
    """
    if h.value < 0.5:
        raise RegimeError(f"weight delta needs H >= 1/2, got H={h.value}")
    dt = grid.step
    horizon = grid.horizon
    n1 = grid.n1
    kern = VolterraKernel(h)
    cells = None if h.is_brownian else kernel_cell_weights(kern, grid)
    transform = None if h.is_brownian else cm_transform_matrix(grid, h)

    values = np.empty(n)
    sqrt_dt = np.sqrt(dt)
    for lo, hi in _chunks(n):
        m = hi - lo
        db = np.empty((m, n1))
        for i in range(m):
            db[i] = seed.substream(lo + i).generator().standard_normal(n1)
        db *= sqrt_dt
        if h.is_brownian:
            fbm_incs = db
        else:
            nodes = db @ cells.T
            fbm_incs = np.diff(np.concatenate([np.zeros((m, 1)), nodes], axis=1), axis=1)
        X, Y, _ = euler_bundle_batch(model, fbm_incs, dt, want_tangent=True)
        vol = model.vol(X)
        if np.any(np.abs(vol) < SIGMA_FLOOR):
            raise SingularityError(
                f"volatility dropped below the invertibility floor {SIGMA_FLOOR:g}"
            )
        hdot = Y / (vol * horizon)
        u = hdot if h.is_brownian else hdot @ transform.T
        weights = np.einsum("ij,ij->i", u[:, :n1], db)
        values[lo:hi] = model.payoff(X[:, -1]) * weights
    return summarize(values, grid.n2, alpha, seed, "weight_delta")


def _finance_terminals(fmodel, grid, seed, lo, hi, direction_scale=0.0):
    """Coupled Euler pass; returns terminal price-state and its variation.

    With direction_scale = eps the vol-of-vol coefficient is shifted to
    vol_drive + eps * direction, which the finite-difference oracle uses on
    common noise.
    """
    m = hi - lo
    incs1 = np.empty((m, grid.n1))
    incs2 = np.empty((m, grid.n1))
    for i in range(m):
        base = 2 * (lo + i)
        incs1[i] = circulant_increment_batch(grid, fmodel.h1, seed.substream(base), 1)[0]
        incs2[i] = circulant_increment_batch(grid, fmodel.h2, seed.substream(base + 1), 1)[0]
    dt = grid.step

    S = np.full(m, fmodel.s0, dtype=float)
    X = np.full(m, fmodel.x0, dtype=float)
    ZX = np.zeros(m)
    ZS = np.zeros(m)
    for k in range(grid.n1):
        db1 = incs1[:, k]
        db2 = incs2[:, k]
        drive = fmodel.vol_drive(X) + direction_scale * fmodel.vol_drive_direction(X)
        S_next = S + fmodel.drift(S) * dt + fmodel.vol_of_state(X) * db1
        ZS = ZS + fmodel.drift.deriv(S) * ZS * dt + fmodel.vol_of_state.deriv(X) * ZX * db1
        ZX = ZX + (
            (fmodel.vol_drive.deriv(X) + direction_scale * fmodel.vol_drive_direction.deriv(X)) * ZX
            + fmodel.vol_drive_direction(X)
        ) * db2
        X = X + drive * db2
        S = S_next
    return S, ZS


def finance_mu_sensitivity(
    fmodel: FinanceModelSpec,
    grid: DyadicGrid,
    n: int,
    alpha: float,
    seed: SeedRecord,
):
    """Sensitivity of E[F(price(S_T))] to the vol-of-vol coefficient, in the
    direction fmodel.vol_drive_direction, by pathwise differentiation of the
    coupled scheme. Drivers are independent fBms on substreams 2i and 2i+1.
    """
    if not (fmodel.h1.young_regime and fmodel.h2.young_regime):
        raise RegimeError("finance sensitivity needs both Hurst parameters > 1/2")
    values = np.empty(n)
    for lo, hi in _chunks(n):
        S, ZS = _finance_terminals(fmodel, grid, seed, lo, hi)
        price = fmodel.price_map(S)
        chain = fmodel.payoff.deriv(price) * fmodel.price_map.deriv(S)
        values[lo:hi] = chain * ZS
    return summarize(values, grid.n2, alpha, seed, "finance_mu")


def finance_payoff_mean(fmodel, grid, n, seed, direction_scale=0.0) -> float:
    """Common-noise mean payoff, used by the finite-difference oracle."""
    total = 0.0
    for lo, hi in _chunks(n):
        S, _ = _finance_terminals(fmodel, grid, seed, lo, hi, direction_scale)
        total += float(fmodel.payoff(fmodel.price_map(S)).sum())
    return total / n
