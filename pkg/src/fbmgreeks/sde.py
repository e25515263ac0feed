"""Euler schemes for the state, tangent and variation equations.

State:     X_k = X_{k-1} + b(X_{k-1}) dt + vol(X_{k-1}) dB_k,          X_0 = x0
Tangent:   Y_k = Y_{k-1} + b'(X_{k-1}) Y_{k-1} dt + vol'(X_{k-1}) Y_{k-1} dB_k,  Y_0 = 1
Variation: Z_k = Z_{k-1} + b'(X_{k-1}) Z_{k-1} dt
                 + [vol'(X_{k-1}) Z_{k-1} + vdir(X_{k-1})] dB_k,       Z_0 = 0

All solvers are vectorized across paths (rows) and valid for H > 1/2 only,
where the driving integrals are pathwise Young integrals.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .coeffs import ModelSpec
from .errors import ConfigurationError, DivergenceError, RegimeError
from .fbm import FbmPath, circulant_increment_batch
from .grids import DyadicGrid, HurstParameter, SeedRecord

DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True)
class TrajectoryBundle:
    grid: DyadicGrid
    state: np.ndarray
    tangent: Optional[np.ndarray] = None
    variation: Optional[np.ndarray] = None


def _check_finite(x, k):
    bad = ~(np.abs(x) < DIVERGENCE_LIMIT)
    if bad.any():
        path = int(np.argmax(bad))
        raise DivergenceError(
            f"state exceeded {DIVERGENCE_LIMIT:g} at step {k + 1} (path {path})",
            step=k + 1,
            path=path,
        )


def euler_bundle_batch(
    model: ModelSpec,
    increments: np.ndarray,
    dt: float,
    want_tangent: bool = False,
    want_variation: bool = False,
):
    """Run the coupled recursions over a batch of increment rows.

    Returns (X, Y, Z) as (npaths, n1+1) arrays; Y and Z are None when not
    requested. One pass shares the coefficient evaluations between the three
    recursions.
    """
    increments = np.atleast_2d(np.asarray(increments, dtype=float))
    npaths, n_steps = increments.shape
    vdir = model.require_vol_direction() if want_variation else None

    X = np.empty((npaths, n_steps + 1))
    X[:, 0] = model.x0
    Y = None
    Z = None
    if want_tangent:
        Y = np.empty_like(X)
        Y[:, 0] = 1.0
    if want_variation:
        Z = np.zeros_like(X)

    # literal recursion grouping: term-by-term sums match the scheme exactly
    for k in range(n_steps):
        x = X[:, k]
        db = increments[:, k]
        x_next = x + model.drift(x) * dt + model.vol(x) * db
        _check_finite(x_next, k)
        X[:, k + 1] = x_next
        if want_tangent or want_variation:
            dd = model.drift.deriv(x)
            vd = model.vol.deriv(x)
            if want_tangent:
                y = Y[:, k]
                Y[:, k + 1] = y + dd * y * dt + vd * y * db
            if want_variation:
                z = Z[:, k]
                Z[:, k + 1] = z + dd * z * dt + vd * z * db + vdir(x) * db
    return X, Y, Z


def _require_young(path: FbmPath):
    if not path.hurst.young_regime:
        raise RegimeError(
            f"Euler solvers need H > 1/2 (Young regime), got H={path.hurst.value}"
        )


def euler_state(model: ModelSpec, path: FbmPath) -> TrajectoryBundle:
    """Solve the state equation along one sampled path."""
    _require_young(path)
    X, _, _ = euler_bundle_batch(model, path.increments, path.grid.step)
    return TrajectoryBundle(path.grid, X[0])


def euler_tangent(model: ModelSpec, path: FbmPath, state: np.ndarray) -> np.ndarray:
    """Tangent process along a state trajectory produced by euler_state.

    Delegates to the batch kernel so the values agree bit for bit with
    bundles computed there; the state argument is only shape-checked since
    the recursion is deterministic in (model, path).
    """
    _require_young(path)
    if np.shape(state) != (path.grid.n1 + 1,):
        raise ConfigurationError("state sequence does not match the path grid")
    _, Y, _ = euler_bundle_batch(model, path.increments, path.grid.step, want_tangent=True)
    return Y[0]


def euler_variation(model: ModelSpec, path: FbmPath, state: np.ndarray) -> np.ndarray:
    """Variation process (volatility-direction derivative) along a trajectory."""
    _require_young(path)
    model.require_vol_direction()
    if np.shape(state) != (path.grid.n1 + 1,):
        raise ConfigurationError("state sequence does not match the path grid")
    _, _, Z = euler_bundle_batch(model, path.increments, path.grid.step, want_variation=True)
    return Z[0]


def solve_bundle(model: ModelSpec, path: FbmPath, want_tangent=True, want_variation=False) -> TrajectoryBundle:
    _require_young(path)
    X, Y, Z = euler_bundle_batch(
        model, path.increments, path.grid.step, want_tangent, want_variation
    )
    return TrajectoryBundle(
        path.grid, X[0], Y[0] if Y is not None else None, Z[0] if Z is not None else None
    )


@dataclass(frozen=True)
class ConvergenceTable:
    """Per-level mean sup-errors against the finest level, plus a fitted order."""

    levels: tuple
    errors: tuple
    fitted_order: float


def convergence_probe(
    model: ModelSpec,
    h: HurstParameter,
    n2_levels: Sequence[int],
    n_paths: int,
    seed: SeedRecord,
) -> ConvergenceTable:
    """Empirical self-convergence of the state scheme under mesh refinement.

    All levels share one noise realization: coarser increments are block sums
    of the finest level's, so the comparison is pathwise. The table reports
    mean sup-errors against the finest level; the order is fitted on
    consecutive-level differences instead, because errors measured against a
    nearby reference shrink faster than the scheme's own rate and would bias
    the fit upward.
    """
    levels = [int(l) for l in n2_levels]
    if len(levels) < 3:
        raise ConfigurationError("convergence probe needs at least 3 levels")
    if sorted(levels) != levels or len(set(levels)) != len(levels):
        raise ConfigurationError("levels must be strictly increasing")
    if not h.young_regime:
        raise RegimeError("convergence probe needs H > 1/2")

    finest = levels[-1]
    fine_grid = DyadicGrid(finest)
    fine_incs = circulant_increment_batch(fine_grid, h, seed, n_paths)

    solutions = {}
    for lev in levels:
        ratio = 1 << (finest - lev)
        incs = fine_incs.reshape(n_paths, -1, ratio).sum(axis=2)
        solutions[lev], _, _ = euler_bundle_batch(model, incs, DyadicGrid(lev).step)

    errors = []
    for lev in levels[:-1]:
        ratio = 1 << (finest - lev)
        sup = np.abs(solutions[lev] - solutions[finest][:, ::ratio]).max(axis=1)
        errors.append(float(sup.mean()))

    diffs = []
    for lo, hi in zip(levels[:-1], levels[1:]):
        ratio = 1 << (hi - lo)
        sup = np.abs(solutions[lo] - solutions[hi][:, ::ratio]).max(axis=1)
        diffs.append(max(float(sup.mean()), 1e-300))
    slope = np.polyfit(np.array(levels[:-1], dtype=float), np.log2(diffs), 1)[0]
    return ConvergenceTable(tuple(levels[:-1]), tuple(errors), float(-slope))


def write_trajectory_csv(bundle: TrajectoryBundle, target) -> None:
    """Dump a trajectory as CSV ``k,t,X[,Y][,Z]`` (absent columns omitted)."""
    cols = ["X"]
    series = [bundle.state]
    if bundle.tangent is not None:
        cols.append("Y")
        series.append(bundle.tangent)
    if bundle.variation is not None:
        cols.append("Z")
        series.append(bundle.variation)
    buf = target if hasattr(target, "write") else io.StringIO()
    buf.write("k,t," + ",".join(cols) + "\n")
    for k, t in enumerate(bundle.grid.nodes):
        row = ",".join(repr(float(s[k])) for s in series)
        buf.write(f"{k},{float(t)!r},{row}\n")
    if buf is not target:
        with open(target, "w") as fh:
            fh.write(buf.getvalue())
