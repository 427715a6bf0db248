"""Run configuration: JSON file, schema validation and defaults.

A config file is a JSON object whose sections mirror :data:`DEFAULTS`.
Missing keys take the default value, unknown keys are rejected.  Atomic
frequencies are given in MHz (multiplied by ``2 pi 10^6``) unless
``atomic.frequency_unit`` is ``"rad/s"``.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import jsonschema
import numpy as np

from .errors import ConfigError
from .medium import MHZ, AtomicSystemParams, MediumCoefficients
from .soliton import DarkSolitonParams

FREQUENCY_FIELDS = ("gamma13", "gamma23", "delta2", "delta3", "omega_c",
                    "dephasing21", "dephasing31", "dephasing32")

DEFAULTS: dict = {
    "atomic": {
        "frequency_unit": "MHz",
        "gamma13": 3.0,
        "gamma23": 3.0,
        "delta2": -1.6,
        "delta3": 64.0,
        "omega_c": 42.0,
        "dephasing21": 0.0,
        "dephasing31": 0.0,
        "dephasing32": 0.0,
        "coupling_density": 2.4e10,
        "atomic_density": 8.8e11,
        "pulse_duration": 5.5e-8,
        "mean_photon_number": None,
        "probe_wavelength": 780.24e-9,
        "quantization_volume": 1e-4,
        "target_g": 1.0,
        "dipole_source": "total_decay",
    },
    "soliton": {
        "derive_from_medium": True,
        "A": 1.0,
        "g": 1.0,
        "theta": 0.0,
        "theta0": 0.0,
        "tau0": 0.0,
    },
    "grids": {
        "region_delta3_mhz": {"start": -100.0, "stop": 100.0, "count": 200},
        "region_delta2_mhz": {"start": -4.0, "stop": 4.0, "count": 200},
        "profile_thetas": [0.0, math.pi / 6, math.pi / 3],
        "profile_points": 401,
        "profile_span": 6.0,
        "mode_k": 1.0,
        "mode_theta": math.pi / 6,
        "mode_sigma": {"start": -10.0, "stop": 10.0, "count": 401},
        "sigma_half_width": 40.0,
        "sigma_points": 2048,
        "s": {"start": 0.0, "stop": 1.0, "count": 101},
        "theta": {"start": 0.0, "stop": math.pi, "count": 181},
        "line_s": [0.3, 0.6, 0.9],
        "line_theta": [math.pi / 5, 2 * math.pi / 5, 3 * math.pi / 5, 4 * math.pi / 5],
        "rmin_thetas": [0.0, math.pi / 6, math.pi / 3, math.pi / 2],
        "rmin_gs": [0.0, 0.6, 1.0, 1.2],
        "spin_s": {"start": 0.0, "stop": 1.0, "count": 101},
    },
    "thresholds": {
        "nu_max": 0.1,
        "eta": 10.0,
        "k_floor": 1e-3,
        "monte_carlo_samples": 1000000,
        "monte_carlo_points": 5,
    },
    "spin": {"window": 1.0, "nodes": 64},
    "oracle": {
        "half_width": 40.0,
        "points": 1024,
        "ds": 1e-3,
        "s_final": 1.0,
        "theta": math.pi / 6,
    },
    "seed": 0,
    "workers": 1,
    "output": {"directory": "out", "format": "csv"},
}


def load_schema() -> dict:
    text = resources.files("darksqueeze").joinpath("schema/run_config.schema.json").read_text()
    return json.loads(text)


def _merge(base: dict, update: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def validate(data: dict) -> None:
    """Raise ConfigError naming the first offending field."""
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = ".".join(str(p) for p in err.absolute_path)
        if err.validator == "additionalProperties":
            extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
            path = ".".join(filter(None, [path, extra[0] if extra else ""]))
        raise ConfigError(f"config field '{path or '<root>'}': {err.message}", path or None)


def linspace_spec(spec: dict):
    return np.linspace(spec["start"], spec["stop"], spec["count"])


@dataclass
class RunConfig:
    """Validated configuration with every default filled in.

    ``data`` keeps the merged dictionary; it is written verbatim into output
    metadata.
    """

    data: dict

    @classmethod
    def from_dict(cls, user: Optional[dict] = None, overrides: Optional[dict] = None) -> "RunConfig":
        user = {} if user is None else user
        if not isinstance(user, dict):
            raise ConfigError("config root must be a JSON object", None)
        validate(user)
        merged = _merge(DEFAULTS, user)
        if overrides:
            merged = _merge(merged, overrides)
        validate(merged)
        cfg = cls(merged)
        cfg.atomic()  # surface physical validation errors early
        return cfg

    @classmethod
    def from_file(cls, path, overrides: Optional[dict] = None) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}", None) from exc
        try:
            user = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}", None) from exc
        return cls.from_dict(user, overrides)

    def __getitem__(self, key) -> Any:
        return self.data[key]

    @property
    def seed(self) -> int:
        return int(self.data["seed"])

    @property
    def workers(self) -> int:
        return int(self.data["workers"])

    def atomic(self) -> AtomicSystemParams:
        a = dict(self.data["atomic"])
        unit = a.pop("frequency_unit")
        scale = MHZ if unit == "MHz" else 1.0
        for name in FREQUENCY_FIELDS:
            a[name] = a[name] * scale
        return AtomicSystemParams(**a)

    def soliton(self, coeffs: Optional[MediumCoefficients] = None) -> DarkSolitonParams:
        """Soliton parameters; with ``derive_from_medium`` g is taken from the medium."""
        s = dict(self.data["soliton"])
        derive = s.pop("derive_from_medium")
        if derive:
            if coeffs is None:
                from .medium import medium_coefficients
                coeffs = medium_coefficients(self.atomic())
            s["g"] = coeffs.g
        return DarkSolitonParams(**s)
