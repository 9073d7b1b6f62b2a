"""Scenario configuration: YAML schema, defaults, validation.

All angles in config files are radians, all distances meters. Every key is
optional; missing keys fall back to the bundled default scenario (8x8 radar,
100 ranges x 12 azimuths, target at 60 m / pi/4). Unknown keys are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Union

import yaml

from .channel import ArraySpec, ReflectivityModel
from .errors import ConfigParseError, ConfigValidationError
from .geometry import GridSpec, Scene

DEFAULTS = {
    "array": {
        "n_tx": 8,
        "n_rx": 8,
        "n_irs_elements": 16,
        "tx_spacing": 0.5,
        "irs_spacing": 0.125,
        "wavelength": 1.0,
    },
    "grid": {
        "range_count": 100,
        "range_step": 1.0,
        "azimuth_count": 12,
        "azimuth_step": math.pi / 6,
    },
    "scene": {
        "target_range": 60.0,
        "target_azimuth": math.pi / 4,
        "noise_power": 1.0,
        "transmit_power": 1.0,
        "sample_count": 16,
    },
    "reflectivity": "unit",
    "phase_seed": 7,
    "budget": 5,
}

_INT_KEYS = {
    "n_tx",
    "n_rx",
    "n_irs_elements",
    "range_count",
    "azimuth_count",
    "sample_count",
    "phase_seed",
    "budget",
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated parameter bundle for one placement experiment."""

    array: ArraySpec
    grid: GridSpec
    scene: Scene
    reflectivity: ReflectivityModel
    phase_seed: int
    budget: int

    def __post_init__(self):
        if self.budget < 1:
            raise ConfigValidationError("budget must be >= 1")
        if self.budget > self.grid.size:
            raise ConfigValidationError(
                f"budget {self.budget} exceeds the {self.grid.size}-cell grid"
            )

    def to_mapping(self) -> dict:
        """Fully-resolved config dict; loading it back reproduces this config."""
        refl: Union[str, dict] = self.reflectivity.variant
        if self.reflectivity.variant == "fixed-list":
            refl = {
                "variant": "fixed-list",
                "values": {
                    int(k): [float(v.real), float(v.imag)]
                    for k, v in sorted(self.reflectivity.values.items())
                },
            }
        return {
            "array": {
                "n_tx": self.array.n_tx,
                "n_rx": self.array.n_rx,
                "n_irs_elements": self.array.n_irs_elements,
                "tx_spacing": self.array.tx_spacing,
                "irs_spacing": self.array.irs_spacing,
                "wavelength": self.array.wavelength,
            },
            "grid": {
                "range_count": self.grid.range_count,
                "range_step": self.grid.range_step,
                "azimuth_count": self.grid.azimuth_count,
                "azimuth_step": self.grid.azimuth_step,
            },
            "scene": {
                "target_range": self.scene.target_range,
                "target_azimuth": self.scene.target_azimuth,
                "noise_power": self.scene.noise_power,
                "transmit_power": self.scene.transmit_power,
                "sample_count": self.scene.sample_count,
            },
            "reflectivity": refl,
            "phase_seed": self.phase_seed,
            "budget": self.budget,
        }


def default_config_path() -> Path:
    """Path of the bundled default scenario file."""
    return Path(resources.files("irs_placer").joinpath("data/paper_scenario.yaml"))


def _as_int(value, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigValidationError(f"{key} must be an integer, got {value!r}")
    return value


def _as_float(value, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigValidationError(f"{key} must be a number, got {value!r}")
    return float(value)


def _merge_section(name: str, overrides) -> dict:
    merged = dict(DEFAULTS[name])
    if overrides is None:
        return merged
    if not isinstance(overrides, dict):
        raise ConfigValidationError(f"section {name!r} must be a mapping")
    unknown = set(overrides) - set(merged)
    if unknown:
        raise ConfigValidationError(f"unknown keys in {name!r}: {sorted(unknown)}")
    for key, value in overrides.items():
        merged[key] = _as_int(value, key) if key in _INT_KEYS else _as_float(value, key)
    return merged


def _parse_reflectivity(raw) -> ReflectivityModel:
    if isinstance(raw, str):
        if raw == "fixed-list":
            raise ConfigValidationError("fixed-list reflectivity needs a values mapping")
        try:
            return ReflectivityModel(raw)
        except ValueError as exc:
            raise ConfigValidationError(str(exc)) from exc
    if isinstance(raw, dict):
        unknown = set(raw) - {"variant", "values"}
        if unknown:
            raise ConfigValidationError(f"unknown keys in reflectivity: {sorted(unknown)}")
        if raw.get("variant") != "fixed-list":
            raise ConfigValidationError("mapping form is only for the fixed-list variant")
        values = raw.get("values")
        if not isinstance(values, dict) or not values:
            raise ConfigValidationError("fixed-list reflectivity needs a values mapping")
        parsed = {}
        for key, pair in values.items():
            idx = _as_int(key, "reflectivity index")
            if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
                raise ConfigValidationError("fixed-list values must be [re, im] pairs")
            parsed[idx] = complex(_as_float(pair[0], "re"), _as_float(pair[1], "im"))
        return ReflectivityModel.fixed(parsed)
    raise ConfigValidationError(f"reflectivity must be a variant name or mapping, got {raw!r}")


def config_from_mapping(raw: dict) -> ScenarioConfig:
    """Validate a nested mapping against the schema, filling defaults."""
    if not isinstance(raw, dict):
        raise ConfigValidationError("config root must be a mapping")
    unknown = set(raw) - set(DEFAULTS)
    if unknown:
        raise ConfigValidationError(f"unknown top-level keys: {sorted(unknown)}")

    array_kw = _merge_section("array", raw.get("array"))
    grid_kw = _merge_section("grid", raw.get("grid"))
    scene_kw = _merge_section("scene", raw.get("scene"))
    try:
        array = ArraySpec(**array_kw)
        grid = GridSpec(**grid_kw)
        scene = Scene(**scene_kw)
    except ValueError as exc:
        raise ConfigValidationError(str(exc)) from exc

    return ScenarioConfig(
        array=array,
        grid=grid,
        scene=scene,
        reflectivity=_parse_reflectivity(raw.get("reflectivity", DEFAULTS["reflectivity"])),
        phase_seed=_as_int(raw.get("phase_seed", DEFAULTS["phase_seed"]), "phase_seed"),
        budget=_as_int(raw.get("budget", DEFAULTS["budget"]), "budget"),
    )


def load_config(path: Optional[Union[str, Path]] = None) -> ScenarioConfig:
    """Load and validate a scenario file; ``None`` loads the bundled default."""
    cfg_path = default_config_path() if path is None else Path(path)
    try:
        text = cfg_path.read_text()
    except OSError as exc:
        raise ConfigParseError(f"cannot read config {cfg_path}: {exc}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigParseError(f"malformed config {cfg_path}: {exc}") from exc
    if raw is None:
        raw = {}
    return config_from_mapping(raw)
