"""Estimator reports, confidence intervals and convergence traces."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import ConfigurationError, DomainError
from .grids import SeedRecord

ESTIMATOR_KINDS = ("pathwise_delta", "pathwise_vega", "weight_delta", "finance_mu")


def normal_quantile(q: float) -> float:
    if not (0.0 < q < 1.0):
        raise DomainError(f"quantile argument must lie in (0, 1), got {q}")
    return float(ndtri(q))


def confidence_interval(theta: float, std: float, n: int, alpha: float):
    """Asymptotic CLT interval theta +- t_alpha std / sqrt(n).

    t_alpha is the standard normal quantile at 1 - alpha/2.
    """
    if n < 2:
        raise DomainError(f"confidence interval needs n >= 2, got {n}")
    if std < 0.0:
        raise DomainError("standard deviation must be non-negative")
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    t_alpha = normal_quantile(1.0 - alpha / 2.0)
    half = t_alpha * std / np.sqrt(n)
    return theta - half, theta + half, t_alpha


@dataclass(frozen=True)
class EstimateReport:
    theta: float
    std: float
    ci_low: float
    ci_high: float
    n: int
    n2: int
    alpha: float
    seed: SeedRecord
    estimator_kind: str

    def __post_init__(self):
        if self.estimator_kind not in ESTIMATOR_KINDS:
            raise ConfigurationError(f"unknown estimator kind '{self.estimator_kind}'")
        if not (self.ci_low <= self.theta <= self.ci_high):
            raise ConfigurationError("confidence interval must contain the estimate")

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "std": self.std,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "n": self.n,
            "n2": self.n2,
            "alpha": self.alpha,
            "seed": self.seed.to_dict(),
            "estimator_kind": self.estimator_kind,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass(frozen=True)
class ConvergenceTrace:
    """Running estimate and CI after each additional path.

    The i = 1 record has no empirical standard deviation; it is flagged
    degenerate and carries a zero-width interval.
    """

    index: np.ndarray
    theta: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray

    @property
    def degenerate(self) -> np.ndarray:
        return self.index < 2

    def to_csv(self, target) -> None:
        """6 significant digits; full-precision rows live in the JSON report."""
        buf = target if hasattr(target, "write") else io.StringIO()
        buf.write("i,theta,ci_low,ci_high\n")
        for i, th, lo, hi in zip(self.index, self.theta, self.ci_low, self.ci_high):
            buf.write(f"{int(i)},{th:.6g},{lo:.6g},{hi:.6g}\n")
        if buf is not target:
            with open(target, "w") as fh:
                fh.write(buf.getvalue())

    def rows(self):
        return list(zip(self.index.tolist(), self.theta.tolist(), self.ci_low.tolist(), self.ci_high.tolist()))


def build_trace(per_path_values: np.ndarray, alpha: float) -> ConvergenceTrace:
    """Running means and CLT intervals over the first i samples, i = 1..n."""
    v = np.asarray(per_path_values, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise ConfigurationError("trace needs at least 2 per-path values")
    n = v.size
    idx = np.arange(1, n + 1)
    sums = np.cumsum(v)
    means = sums / idx
    sq = np.cumsum(v * v)
    var = np.zeros(n)
    var[1:] = np.maximum(sq[1:] - sums[1:] ** 2 / idx[1:], 0.0) / (idx[1:] - 1)
    std = np.sqrt(var)
    t_alpha = normal_quantile(1.0 - alpha / 2.0)
    half = t_alpha * std / np.sqrt(idx)
    return ConvergenceTrace(idx, means, means - half, means + half)


def summarize(values: np.ndarray, n2: int, alpha: float, seed: SeedRecord, kind: str):
    """Report + trace for a vector of per-path estimator values in stream order.

    Reduction order is fixed (numpy pairwise over the stream-ordered vector),
    so the result does not depend on how paths were chunked.
    """
    v = np.asarray(values, dtype=float)
    theta = float(v.mean())
    std = float(v.std(ddof=1))
    lo, hi, _ = confidence_interval(theta, std, v.size, alpha)
    report = EstimateReport(theta, std, lo, hi, v.size, n2, alpha, seed, kind)
    return report, build_trace(v, alpha)
