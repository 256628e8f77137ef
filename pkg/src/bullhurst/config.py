"""Pipeline configuration: flat `section.key = value` text files.

Lines hold one dotted key, an equals sign and a value; blank lines and
lines starting with '#' are ignored.  Unknown keys and bad values are
reported with their line number.  Every key can be overridden through the
environment as BULLHURST_<KEY> with dots replaced by underscores,
uppercased (e.g. BULLHURST_PIPELINE_SEED); environment values win over
the file, command-line flags win over both.

Relative data paths are resolved against the config file's directory.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import pandas as pd

from .allocate import AllocationConfig
from .errors import ConfigError
from .hurst import FdmaaConfig

ENV_PREFIX = "BULLHURST_"


def _to_bool(raw):
    lowered = raw.lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _to_month(raw):
    return pd.Period(raw, freq="M")


# key -> (converter, default); REQUIRED means no default
REQUIRED = object()
SCHEMA = {
    "data.daily": (str, REQUIRED),
    "data.macro": (str, REQUIRED),
    "data.recessions": (str, REQUIRED),
    "sample.start": (_to_month, None),
    "sample.end": (_to_month, None),
    "premium.dividends": (str, "total"),
    "hurst.window": (int, 215),
    "hurst.n_min": (int, 5),
    "hurst.n_max": (int, 43),
    "hurst.phi": (int, 30),
    "hurst.segment_rule": (str, "n_minus_1"),
    "hurst.h_threshold": (float, 0.5),
    "predictors.literal_ma": (_to_bool, False),
    "regime.mode": (str, "fixed"),
    "regime.threshold": (float, 1.0),
    "regime.quantile": (float, 0.025),
    "regime.before": (int, 3),
    "regime.after": (int, 3),
    "regime.oos_horizon": (int, 3),
    "oos.start": (_to_month, REQUIRED),
    "oos.min_train": (int, 60),
    "pca.k_max": (int, 3),
    "bootstrap.replications": (int, 2000),
    "allocate.kappa": (float, 5.0),
    "allocate.cost_bps": (float, 0.0),
    "allocate.holding_cost_bps": (float, 50.0),
    "allocate.mask": (str, "all"),
    "allocate.variance_window": (int, 60),
    "allocate.weight_min": (float, 0.0),
    "allocate.weight_max": (float, 1.5),
    "allocate.simple_returns": (_to_bool, False),
    "output.dir": (str, "out"),
    "pipeline.seed": (int, REQUIRED),
}


@dataclass(frozen=True)
class PipelineConfig:
    """Typed view of a parsed configuration."""

    daily_path: Path
    macro_path: Path
    recessions_path: Path
    oos_start: pd.Period
    seed: int
    sample_start: pd.Period | None = None
    sample_end: pd.Period | None = None
    dividends: str = "total"
    h_threshold: float = 0.5
    literal_ma: bool = False
    regime_mode: str = "fixed"
    regime_threshold: float = 1.0
    regime_quantile: float = 0.025
    regime_before: int = 3
    regime_after: int = 3
    oos_horizon: int = 3
    min_train: int = 60
    k_max: int = 3
    bootstrap_replications: int = 2000
    holding_cost_bps: float = 50.0
    allocation_mask: str = "all"
    output_dir: Path = Path("out")
    fdmaa: FdmaaConfig = field(default_factory=FdmaaConfig)
    allocation: AllocationConfig = field(default_factory=AllocationConfig)
    source_text: str = field(default="", repr=False)


def parse_config_text(text: str) -> dict:
    """Raw key/value mapping from config text, schema-checked."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}", line=lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", line=lineno)
        conv, _default = SCHEMA[key]
        try:
            values[key] = conv(raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for {key}: {exc}", line=lineno) from None
    return values


def _apply_environment(values: dict):
    for key, (conv, _default) in SCHEMA.items():
        env_name = ENV_PREFIX + key.replace(".", "_").upper()
        raw = os.environ.get(env_name)
        if raw is None:
            continue
        try:
            values[key] = conv(raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad environment value {env_name}: {exc}") from None


def load_config(path, overrides: dict | None = None) -> PipelineConfig:
    """Parse, apply environment and explicit overrides, and validate."""
    path = Path(path)
    text = path.read_text()
    values = parse_config_text(text)
    _apply_environment(values)
    if overrides:
        for key, val in overrides.items():
            if key not in SCHEMA:
                raise ConfigError(f"unknown override {key!r}")
            if val is not None:
                values[key] = val
    missing = [k for k, (_c, d) in SCHEMA.items() if d is REQUIRED and k not in values]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    for key, (_c, default) in SCHEMA.items():
        if key not in values and default is not REQUIRED:
            values[key] = default

    base = path.parent

    def respath(p):
        p = Path(p)
        return p if p.is_absolute() else base / p

    daily = respath(values["data.daily"])
    macro = respath(values["data.macro"])
    recessions = respath(values["data.recessions"])
    for name, p in (("data.daily", daily), ("data.macro", macro),
                    ("data.recessions", recessions)):
        if not p.exists():
            raise ConfigError(f"{name} does not exist: {p}")

    fdmaa = FdmaaConfig(
        window=values["hurst.window"],
        n_min=values["hurst.n_min"],
        n_max=values["hurst.n_max"],
        phi=values["hurst.phi"],
        segment_rule=values["hurst.segment_rule"],
    )
    allocation = AllocationConfig(
        kappa=values["allocate.kappa"],
        weight_min=values["allocate.weight_min"],
        weight_max=values["allocate.weight_max"],
        variance_window=values["allocate.variance_window"],
        cost_bps=values["allocate.cost_bps"],
        simple_returns=values["allocate.simple_returns"],
    )
    if values["premium.dividends"] not in ("total", "price"):
        raise ConfigError("premium.dividends must be 'total' or 'price'")
    if values["regime.mode"] not in ("fixed", "quantile"):
        raise ConfigError("regime.mode must be 'fixed' or 'quantile'")
    mask_choices = ("all", "entire", "exp", "rec", "stable_plus", "bu_plus",
                    "stable_minus", "bu_minus")
    if values["allocate.mask"] not in mask_choices:
        raise ConfigError(f"allocate.mask must be one of {', '.join(mask_choices)}")
    out_dir = values["output.dir"]
    out_path = Path(out_dir)
    if not out_path.is_absolute():
        out_path = base / out_path
    return PipelineConfig(
        daily_path=daily,
        macro_path=macro,
        recessions_path=recessions,
        oos_start=values["oos.start"],
        seed=values["pipeline.seed"],
        sample_start=values["sample.start"],
        sample_end=values["sample.end"],
        dividends=values["premium.dividends"],
        h_threshold=values["hurst.h_threshold"],
        literal_ma=values["predictors.literal_ma"],
        regime_mode=values["regime.mode"],
        regime_threshold=values["regime.threshold"],
        regime_quantile=values["regime.quantile"],
        regime_before=values["regime.before"],
        regime_after=values["regime.after"],
        oos_horizon=values["regime.oos_horizon"],
        min_train=values["oos.min_train"],
        k_max=values["pca.k_max"],
        bootstrap_replications=values["bootstrap.replications"],
        holding_cost_bps=values["allocate.holding_cost_bps"],
        allocation_mask=values["allocate.mask"],
        output_dir=out_path,
        fdmaa=fdmaa,
        allocation=allocation,
        source_text=text,
    )
