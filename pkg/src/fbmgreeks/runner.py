"""Scenario execution: dispatch a validated config to the right estimator."""

from __future__ import annotations

from dataclasses import dataclass

from .config import ScenarioConfig
from .estimators import (
    finance_mu_sensitivity,
    pathwise_delta,
    pathwise_vega,
    weight_delta,
)
from .grids import HurstParameter
from .reporting import ConvergenceTrace, EstimateReport


@dataclass(frozen=True)
class RunResult:
    report: EstimateReport
    trace: ConvergenceTrace
    summary: str


def _fmt(x: float) -> str:
    return format(x, ".6g")


def render_summary(report: EstimateReport) -> str:
    """Statistics block: estimate, confidence interval and its length."""
    rows = [
        ("estimator", report.estimator_kind),
        ("theta", _fmt(report.theta)),
        (f"{_fmt(report.alpha)}-confidence interval",
         f"[{_fmt(report.ci_low)}; {_fmt(report.ci_high)}]"),
        ("CI length", _fmt(report.ci_high - report.ci_low)),
        ("paths n", str(report.n)),
        ("grid steps N1 = 2^N2", f"2^{report.n2} = {1 << report.n2}"),
    ]
    width = max(len(name) for name, _ in rows)
    lines = [f"{'Statistics':<{width}}  Values", "-" * (width + 20)]
    lines += [f"{name:<{width}}  {value}" for name, value in rows]
    return "\n".join(lines)


def run_scenario(config: ScenarioConfig) -> RunResult:
    grid = config.grid()
    seed = config.master_seed()
    h = HurstParameter(config.hurst)
    if config.estimator == "pathwise-delta":
        report, trace = pathwise_delta(
            config.model_spec(), grid, h, config.paths, config.alpha, seed
        )
    elif config.estimator == "pathwise-vega":
        report, trace = pathwise_vega(
            config.model_spec(), grid, h, config.paths, config.alpha, seed
        )
    elif config.estimator == "weight-delta":
        report, trace = weight_delta(
            config.model_spec(), grid, h, config.paths, config.alpha, seed
        )
    else:
        report, trace = finance_mu_sensitivity(
            config.finance_spec(), grid, config.paths, config.alpha, seed
        )
    return RunResult(report, trace, render_summary(report))
