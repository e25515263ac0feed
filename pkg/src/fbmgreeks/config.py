"""Scenario documents: a line-oriented ``key = value`` grammar.

Top-level keys configure the estimator and Monte Carlo parameters, the
``[model]`` section names catalog functions as ``name(args...)``, and the
``[output]`` section sets file destinations. ``scenario = <preset>``
expands a named preset; explicit keys override preset values, and caller
overrides (CLI flags) override both. Unknown keys are hard errors.

Example::

    estimator = pathwise-delta
    scenario = paper-8.2
    n2 = 12
    seed = 42

    [model]
    b = constant(0)
    sigma = paper_sigma()
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Optional

from .coeffs import FinanceModelSpec, ModelSpec, ScalarFunction
from .errors import ConfigParseError, ConfigurationError, RegimeError
from .grids import DyadicGrid, HurstParameter, SeedRecord

ESTIMATORS = ("pathwise-delta", "pathwise-vega", "weight-delta", "finance-mu")

_TOP_KEYS = {
    "scenario", "estimator", "hurst", "hurst2", "n2", "paths",
    "alpha", "seed", "horizon",
}
_MODEL_KEYS = {"b", "sigma", "sigma_tilde", "payoff", "x0", "mu", "mu_tilde", "price", "s0"}
_OUTPUT_KEYS = {"report", "trace"}
_SECTIONS = {"": _TOP_KEYS, "model": _MODEL_KEYS, "output": _OUTPUT_KEYS}

_FUNC_KEYS = {"b", "sigma", "sigma_tilde", "payoff", "mu", "mu_tilde", "price"}

PRESETS = {
    "paper-8.2": {
        "hurst": "0.6",
        "n2": "15",
        "paths": "500",
        "alpha": "0.05",
        "model.b": "constant(0)",
        "model.sigma": "paper_sigma()",
        "model.sigma_tilde": "paper_sigma_tilde()",
        "model.payoff": "square()",
        "model.x0": "1",
    },
}

_FUNC_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z_0-9]*)\s*(?:\(([^)]*)\))?\s*$")


@dataclass(frozen=True)
class ScenarioConfig:
    estimator: str
    hurst: float
    n2: int
    paths: int
    alpha: float
    seed: int
    horizon: float = 1.0
    hurst2: Optional[float] = None
    functions: dict = field(default_factory=dict)
    x0: Optional[float] = None
    s0: Optional[float] = None
    report_path: Optional[str] = None
    trace_path: Optional[str] = None

    def grid(self) -> DyadicGrid:
        return DyadicGrid(self.n2, self.horizon)

    def master_seed(self) -> SeedRecord:
        return SeedRecord(self.seed, 0)

    def model_spec(self) -> ModelSpec:
        return ModelSpec(
            drift=self.functions.get("b", ScalarFunction("constant", (0.0,))),
            vol=self.functions["sigma"],
            payoff=self.functions["payoff"],
            x0=self.x0,
            vol_direction=self.functions.get("sigma_tilde"),
        )

    def finance_spec(self) -> FinanceModelSpec:
        return FinanceModelSpec(
            drift=self.functions.get("b", ScalarFunction("constant", (0.0,))),
            vol_of_state=self.functions["sigma"],
            vol_drive=self.functions["mu"],
            vol_drive_direction=self.functions["mu_tilde"],
            price_map=self.functions["price"],
            payoff=self.functions["payoff"],
            s0=self.s0,
            x0=self.x0,
            h1=HurstParameter(self.hurst),
            h2=HurstParameter(self.hurst2),
        )

    def to_text(self) -> str:
        """Normalized document; parsing it back yields an equal config."""
        lines = [f"estimator = {self.estimator}"]
        lines.append(f"hurst = {self.hurst!r}")
        if self.hurst2 is not None:
            lines.append(f"hurst2 = {self.hurst2!r}")
        lines.append(f"n2 = {self.n2}")
        lines.append(f"paths = {self.paths}")
        lines.append(f"alpha = {self.alpha!r}")
        lines.append(f"seed = {self.seed}")
        lines.append(f"horizon = {self.horizon!r}")
        lines.append("")
        lines.append("[model]")
        for key in sorted(self.functions):
            lines.append(f"{key} = {self.functions[key].format()}")
        if self.x0 is not None:
            lines.append(f"x0 = {self.x0!r}")
        if self.s0 is not None:
            lines.append(f"s0 = {self.s0!r}")
        if self.report_path or self.trace_path:
            lines.append("")
            lines.append("[output]")
            if self.report_path:
                lines.append(f"report = {self.report_path}")
            if self.trace_path:
                lines.append(f"trace = {self.trace_path}")
        return "\n".join(lines) + "\n"


def _parse_function(text: str, line=None) -> ScalarFunction:
    m = _FUNC_RE.match(text)
    if not m:
        raise ConfigParseError(f"cannot parse function value '{text}'", line)
    name, args = m.group(1), m.group(2)
    params = ()
    if args and args.strip():
        try:
            params = tuple(float(a) for a in args.split(","))
        except ValueError:
            raise ConfigParseError(f"non-numeric function argument in '{text}'", line) from None
    try:
        return ScalarFunction(name, params)
    except ConfigurationError as exc:
        raise ConfigParseError(str(exc), line) from None


def _collect(text: str) -> dict:
    """First pass: flat dict of dotted keys with the defining line numbers."""
    entries = {}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigParseError("unterminated section header", lineno)
            section = line[1:-1].strip()
            if section not in _SECTIONS or section == "":
                raise ConfigParseError(f"unknown section '[{section}]'", lineno)
            continue
        if "=" not in line:
            raise ConfigParseError(f"expected 'key = value', got '{line}'", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _SECTIONS[section]:
            where = f"[{section}]" if section else "top level"
            raise ConfigParseError(f"unknown key '{key}' in {where}", lineno)
        if not value:
            raise ConfigParseError(f"empty value for '{key}'", lineno)
        dotted = f"{section}.{key}" if section else key
        if dotted in entries:
            raise ConfigParseError(f"duplicate key '{key}'", lineno)
        entries[dotted] = (value, lineno)
    return entries


def _float_in(value, line, key, lo=None, hi=None, lo_open=True, hi_open=True):
    try:
        v = float(value)
    except ValueError:
        raise ConfigParseError(f"'{key}' must be a number, got '{value}'", line) from None
    if lo is not None and (v <= lo if lo_open else v < lo):
        raise ConfigParseError(f"'{key}' out of range: {value}", line)
    if hi is not None and (v >= hi if hi_open else v > hi):
        raise ConfigParseError(f"'{key}' out of range: {value}", line)
    return v


def _int_pos(value, line, key):
    try:
        v = int(value)
    except ValueError:
        raise ConfigParseError(f"'{key}' must be an integer, got '{value}'", line) from None
    if v < 1:
        raise ConfigParseError(f"'{key}' must be positive, got '{value}'", line)
    return v


def parse_config(text: str, overrides: Optional[dict] = None) -> ScenarioConfig:
    """Parse and fully validate a scenario document.

    ``overrides`` maps dotted keys (``hurst``, ``model.sigma``, ...) to raw
    string values; they take precedence over both the document and any
    preset it references.
    """
    entries = _collect(text)

    if overrides:
        for key, value in overrides.items():
            section = key.split(".", 1)[0] if "." in key else ""
            bare = key.split(".", 1)[1] if "." in key else key
            if section not in _SECTIONS or bare not in _SECTIONS[section]:
                raise ConfigParseError(f"unknown override key '{key}'")
            entries[key] = (str(value), None)

    scenario = entries.pop("scenario", None)
    if scenario is not None:
        name, line = scenario
        if name not in PRESETS:
            raise ConfigParseError(
                f"unknown scenario preset '{name}' (known: {', '.join(sorted(PRESETS))})", line
            )
        for key, value in PRESETS[name].items():
            entries.setdefault(key, (value, None))

    def take(key):
        return entries.pop(key, (None, None))

    estimator, est_line = take("estimator")
    missing = []
    if estimator is None:
        missing.append("estimator")
    elif estimator not in ESTIMATORS:
        raise ConfigParseError(
            f"unknown estimator '{estimator}' (choose from {', '.join(ESTIMATORS)})", est_line
        )

    raw = {}
    for key in ("hurst", "hurst2", "alpha", "horizon", "n2", "paths", "seed",
                "model.x0", "model.s0", "output.report", "output.trace"):
        raw[key] = take(key)

    functions = {}
    for key in sorted(_FUNC_KEYS):
        value, line = take(f"model.{key}")
        if value is not None:
            functions[key] = _parse_function(value, line)

    for key in ("hurst", "n2", "paths", "alpha", "seed"):
        if raw[key][0] is None:
            missing.append(key)

    needs_model = {
        "pathwise-delta": ("sigma", "payoff"),
        "pathwise-vega": ("sigma", "sigma_tilde", "payoff"),
        "weight-delta": ("sigma", "payoff"),
        "finance-mu": ("sigma", "mu", "mu_tilde", "price", "payoff"),
    }
    if estimator is not None:
        for fn in needs_model[estimator]:
            if fn not in functions:
                missing.append(f"model.{fn}")
        if raw["model.x0"][0] is None:
            missing.append("model.x0")
        if estimator == "finance-mu":
            if raw["hurst2"][0] is None:
                missing.append("hurst2")
            if raw["model.s0"][0] is None:
                missing.append("model.s0")
    if missing:
        raise ConfigParseError("missing required field(s): " + ", ".join(sorted(set(missing))))

    hurst = _float_in(*raw["hurst"], key="hurst", lo=0.0, hi=1.0)
    hurst2 = None
    if raw["hurst2"][0] is not None:
        hurst2 = _float_in(*raw["hurst2"], key="hurst2", lo=0.0, hi=1.0)
    alpha = _float_in(*raw["alpha"], key="alpha", lo=0.0, hi=1.0)
    horizon = 1.0
    if raw["horizon"][0] is not None:
        horizon = _float_in(*raw["horizon"], key="horizon", lo=0.0)
    n2 = _int_pos(*raw["n2"], key="n2")
    paths = _int_pos(*raw["paths"], key="paths")
    if paths < 2:
        raise ConfigParseError("'paths' must be at least 2", raw["paths"][1])
    seed_value, seed_line = raw["seed"]
    try:
        seed = int(seed_value)
    except ValueError:
        raise ConfigParseError(f"'seed' must be an integer, got '{seed_value}'", seed_line) from None
    if not (0 <= seed < (1 << 64)):
        raise ConfigParseError("'seed' must fit in 64 bits", seed_line)

    x0 = float(raw["model.x0"][0]) if raw["model.x0"][0] is not None else None
    s0 = float(raw["model.s0"][0]) if raw["model.s0"][0] is not None else None

    if entries:
        key, (_, line) = next(iter(entries.items()))
        raise ConfigParseError(f"key '{key}' is not valid here", line)

    # regime checks mirror the solver preconditions so bad configs fail early
    if estimator in ("pathwise-delta", "pathwise-vega") and hurst <= 0.5:
        raise RegimeError(f"estimator {estimator} needs hurst > 0.5, got {hurst}")
    if estimator == "weight-delta" and hurst < 0.5:
        raise RegimeError(f"estimator weight-delta needs hurst >= 0.5, got {hurst}")
    if estimator == "finance-mu" and (hurst <= 0.5 or hurst2 <= 0.5):
        raise RegimeError("estimator finance-mu needs both hurst and hurst2 > 0.5")

    return ScenarioConfig(
        estimator=estimator,
        hurst=hurst,
        hurst2=hurst2,
        n2=n2,
        paths=paths,
        alpha=alpha,
        seed=seed,
        horizon=horizon,
        functions=functions,
        x0=x0,
        s0=s0,
        report_path=raw["output.report"][0],
        trace_path=raw["output.trace"][0],
    )
