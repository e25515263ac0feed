"""Closed catalog of coefficient functions with analytic first derivatives.

SDE coefficients, payoffs and perturbation directions all come from this
catalog so that derivative correctness is testable once, centrally, and so
that scenario files can name functions as ``tag(arg, ...)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigurationError
from .grids import HurstParameter

_PI_HALF = np.pi / 2.0


def _poly_eval(coeffs, y):
    return np.polynomial.polynomial.polyval(y, np.asarray(coeffs, dtype=float))


def _poly_deriv(coeffs, y):
    c = np.asarray(coeffs, dtype=float)
    return _poly_eval(np.polynomial.polynomial.polyder(c), y) if len(c) > 1 else np.zeros_like(np.asarray(y, dtype=float))


_CATALOG = {
    # tag: (arity or None for variadic, value, derivative)
    "constant": (1, lambda p, y: np.full_like(np.asarray(y, dtype=float), p[0]), lambda p, y: np.zeros_like(np.asarray(y, dtype=float))),
    "affine": (2, lambda p, y: p[0] * np.asarray(y, dtype=float) + p[1], lambda p, y: np.full_like(np.asarray(y, dtype=float), p[0])),
    "polynomial": (None, _poly_eval, _poly_deriv),
    "paper_sigma": (0, lambda p, y: 1.0 + np.exp(-np.square(y)), lambda p, y: -2.0 * y * np.exp(-np.square(y))),
    "paper_sigma_tilde": (0, lambda p, y: 1.0 + _PI_HALF + np.arctan(y), lambda p, y: 1.0 / (1.0 + np.square(y))),
    "square": (0, lambda p, y: np.square(y), lambda p, y: 2.0 * np.asarray(y, dtype=float)),
    "identity": (0, lambda p, y: np.asarray(y, dtype=float), lambda p, y: np.ones_like(np.asarray(y, dtype=float))),
}


@dataclass(frozen=True)
class ScalarFunction:
    """A catalog entry y -> f(y) together with its exact derivative."""

    tag: str
    params: tuple = ()

    def __post_init__(self):
        if self.tag not in _CATALOG:
            raise ConfigurationError(
                f"unknown function '{self.tag}'; catalog: {', '.join(sorted(_CATALOG))}"
            )
        arity = _CATALOG[self.tag][0]
        params = tuple(float(p) for p in self.params)
        if arity is not None and len(params) != arity:
            raise ConfigurationError(f"'{self.tag}' takes {arity} parameter(s), got {len(params)}")
        if self.tag == "polynomial" and not params:
            raise ConfigurationError("'polynomial' needs at least one coefficient")
        object.__setattr__(self, "params", params)

    def __call__(self, y):
        return _CATALOG[self.tag][1](self.params, y)

    def deriv(self, y):
        return _CATALOG[self.tag][2](self.params, y)

    def format(self) -> str:
        args = ",".join(format(p, "g") for p in self.params)
        return f"{self.tag}({args})"


def constant(c) -> ScalarFunction:
    return ScalarFunction("constant", (c,))


def affine(a, c) -> ScalarFunction:
    return ScalarFunction("affine", (a, c))


def polynomial(*coeffs) -> ScalarFunction:
    return ScalarFunction("polynomial", coeffs)


def paper_sigma() -> ScalarFunction:
    return ScalarFunction("paper_sigma")


def paper_sigma_tilde() -> ScalarFunction:
    return ScalarFunction("paper_sigma_tilde")


def square() -> ScalarFunction:
    return ScalarFunction("square")


def identity() -> ScalarFunction:
    return ScalarFunction("identity")


@dataclass(frozen=True)
class ModelSpec:
    """Scalar state equation dX = b(X)dt + vol(X)dB with payoff F(X_T).

    ``vol_direction`` is the direction in which the volatility function is
    perturbed; it is only needed by the variation process and the vega
    estimator.
    """

    drift: ScalarFunction
    vol: ScalarFunction
    payoff: ScalarFunction
    x0: float
    vol_direction: Optional[ScalarFunction] = None

    def require_vol_direction(self) -> ScalarFunction:
        if self.vol_direction is None:
            raise ConfigurationError("this operation needs a volatility direction (sigma_tilde)")
        return self.vol_direction


@dataclass(frozen=True)
class FinanceModelSpec:
    """One asset with a stochastic volatility factor on independent drivers.

    Asset:      dS = b(S)dt + vol_of_state(X)dB1,   price = price_map(S)
    Vol factor: dX = vol_drive(X)dB2
    The estimated sensitivity is in the direction ``vol_drive_direction``.
    h1 and h2 are the Hurst parameters of the two independent drivers.
    """

    drift: ScalarFunction
    vol_of_state: ScalarFunction
    vol_drive: ScalarFunction
    vol_drive_direction: ScalarFunction
    price_map: ScalarFunction
    payoff: ScalarFunction
    s0: float
    x0: float
    h1: HurstParameter
    h2: HurstParameter
