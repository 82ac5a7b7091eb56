"""Experiment configuration: TOML (or JSON) files resolved against defaults."""
from __future__ import annotations

import json
import math
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .errors import ConfigError
from .hvsignal import DEFAULT_CORRELATION_TIME, DEFAULT_OMEGA0, DEFAULT_SAMPLE_RATE, DETECTOR_GAIN

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXPERIMENTS = ("epr-correlation", "chsh", "interference", "subnoise", "gravity", "register-demo")
MODELS = ("quantum", "hidden-variable", "both")
SEED_ENV = "HVQSIM_SEED"

_PI_EXPR = re.compile(r"^\s*([-+]?\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d+)?))?\s*$")

_GRID13 = [f"{k}*pi/12" for k in range(13)]
DEFAULT_ANGLES = {
    "epr-correlation": _GRID13,
    "interference": _GRID13,
    "chsh": [0.0, "pi/2", "pi/4", "3*pi/4"],
}

BLOCK_DEFAULTS: dict[str, dict[str, Any]] = {
    "carrier": {
        "omega0": DEFAULT_OMEGA0,
        "sample_rate": DEFAULT_SAMPLE_RATE,
        "correlation_time": DEFAULT_CORRELATION_TIME,
        "cutoff": None,
        "gain": DETECTOR_GAIN,
    },
    "subnoise": {
        "alpha_star": 0.7,
        "amplitude": 0.1,
        "noise_std": 1.0,
        "trial_counts": [100, 1000, 10000],
        "repetitions": 16,
        "control": True,
    },
    "gravity": {
        "c": 1.0,
        "n_modes": 16,
        "r_scale": 1.0,
        "k_magnitude": 1.0,
        "amplitude": 1.0,
        "probe_mass": 1.0,
        "hbar": 1.0,
        "modes": None,
        "steps_per_period": 10000,
        "periods": 1.0,
        "t_end": 1.0,
        "grid_extent": 1.0,
        "grid_points": 5,
        "grid_time": 0.0,
    },
    "register": {
        "rotations": ["pi/4", "pi/4", "pi/4"],
        "phases": None,
        "prep_axes": None,
        "analysis_axes": None,
        "loss_coefficient": 1.0,
        "loss_count": 0,
    },
}


def parse_angle(value) -> float:
    """Radians from a number or an expression like ``"3*pi/4"``."""
    if isinstance(value, bool):
        raise ConfigError(f"not an angle: {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
        m = _PI_EXPR.match(value)
        if m:
            coef = m.group(1)
            coef = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
            div = float(m.group(2)) if m.group(2) else 1.0
            return coef * math.pi / div
    raise ConfigError(f"not an angle: {value!r}")


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int = 0
    trials: int = 100_000
    angles: list = field(default_factory=list)
    model: str = "both"
    output_dir: Path = Path("out")
    parallel: int = 1
    dump_waveforms: bool = False
    carrier: dict = field(default_factory=dict)
    subnoise: dict = field(default_factory=dict)
    gravity: dict = field(default_factory=dict)
    register: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        if self.model == "hv":
            self.model = "hidden-variable"
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}")
        if isinstance(self.trials, bool) or not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer, got {self.trials!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        if not isinstance(self.parallel, int) or self.parallel < 1:
            raise ConfigError("parallel must be a positive integer")
        if not self.angles:
            self.angles = list(DEFAULT_ANGLES.get(self.experiment, []))
        self.angles = [parse_angle(a) for a in self.angles]
        if self.experiment in DEFAULT_ANGLES and not self.angles:
            raise ConfigError(f"{self.experiment} needs a non-empty angle list")
        for name, defaults in BLOCK_DEFAULTS.items():
            given = getattr(self, name) or {}
            unknown = set(given) - set(defaults)
            if unknown:
                raise ConfigError(f"unknown keys in [{name}]: {', '.join(sorted(unknown))}")
            setattr(self, name, {**defaults, **given})
        self.output_dir = Path(self.output_dir)

    @property
    def wants_quantum(self) -> bool:
        return self.model in ("quantum", "both")

    @property
    def wants_hv(self) -> bool:
        return self.model in ("hidden-variable", "both")

    def canonical(self) -> dict:
        """Every setting that influences results; excludes output location and worker count."""
        return {
            "experiment": self.experiment,
            "seed": self.seed,
            "trials": self.trials,
            "angles": self.angles,
            "model": self.model,
            "dump_waveforms": self.dump_waveforms,
            "carrier": self.carrier,
            "subnoise": self.subnoise,
            "gravity": self.gravity,
            "register": self.register,
        }


def read_config_file(path: Path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        if path.suffix.lower() == ".json":
            return json.loads(text)
        return tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc


def build_config(
    experiment: str,
    path: Optional[Path] = None,
    **overrides,
) -> ExperimentConfig:
    """Merge file contents, CLI overrides and the ``HVQSIM_SEED`` fallback."""
    data = read_config_file(path) if path is not None else {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a table/object")
    file_exp = data.pop("experiment", experiment)
    if file_exp != experiment:
        raise ConfigError(f"config is for {file_exp!r}, command asked for {experiment!r}")
    for k, v in overrides.items():
        if v is not None:
            data[k] = v
    if "seed" not in data and os.environ.get(SEED_ENV):
        try:
            data["seed"] = int(os.environ[SEED_ENV])
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV} must be an integer") from exc
    known = set(ExperimentConfig.__dataclass_fields__) - {"experiment"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return ExperimentConfig(experiment=experiment, **data)
