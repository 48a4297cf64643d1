"""Run configuration: JSON schema, unit conversion, and typed access.

Configs are human-edited JSON.  Geometry distances are given in km and
frequencies in MHz; everything is converted to SI on load.  Every random
draw traces back to a seed written in the config, so no run ever depends on
wall-clock state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema

from .errors import ConfigError
from .geometry import TWO_PI, ImagingGeometry, SamplingGrid, make_grid
from .sensing import DEFAULT_MAX_ENTRIES
from .training import TrainConfig

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["geometry", "grid"],
    "properties": {
        "geometry": {
            "type": "object",
            "additionalProperties": False,
            "required": [
                "transmitter_position_km",
                "receiver_radius_km",
                "receiver_height_km",
                "center_frequency_mhz",
                "bandwidth_mhz",
            ],
            "properties": {
                "transmitter_position_km": {
                    "type": "array",
                    "items": {"type": "number"},
                    "minItems": 3,
                    "maxItems": 3,
                },
                "receiver_radius_km": {"type": "number", "exclusiveMinimum": 0},
                "receiver_height_km": {"type": "number"},
                "center_frequency_mhz": {"type": "number", "exclusiveMinimum": 0},
                "bandwidth_mhz": {"type": "number", "exclusiveMinimum": 0},
                "slow_time_interval_rad": {
                    "type": "array",
                    "items": {"type": "number"},
                    "minItems": 2,
                    "maxItems": 2,
                },
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["pixels_per_side", "slow_time_count", "frequency_count", "scene_extent_m"],
            "properties": {
                "pixels_per_side": {"type": "integer", "minimum": 1},
                "slow_time_count": {"type": "integer", "minimum": 1},
                "frequency_count": {"type": "integer", "minimum": 1},
                "scene_extent_m": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "network": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "layers": {"type": "integer", "minimum": 1},
                "step_size": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "regularization": {"type": "number", "exclusiveMinimum": 0},
                "max_matrix_entries": {"type": "integer", "minimum": 1},
            },
        },
        "train": {
            "type": "object",
            "additionalProperties": False,
            "required": ["seed"],
            "properties": {
                "epochs": {"type": "integer", "minimum": 1},
                "batch_size": {"type": "integer", "minimum": 0},
                "learning_rate_w": {"type": "number", "exclusiveMinimum": 0},
                "learning_rate_tau": {"type": "number", "exclusiveMinimum": 0},
                "seed": {"type": "integer"},
                "enforce_stationarity": {"type": "boolean"},
                "snapshot_every": {"type": "integer", "minimum": 0},
            },
        },
        "simulation": {
            "type": "object",
            "additionalProperties": False,
            "required": ["seed", "waveform_seed"],
            "properties": {
                "snr_db": {
                    "type": "array",
                    "items": {"type": ["number", "null"]},
                    "minItems": 1,
                },
                "sample_count": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer"},
                "waveform_seed": {"type": "integer"},
                "test_realizations": {"type": "integer", "minimum": 1},
            },
        },
        "output_dir": {"type": "string"},
    },
}


@dataclass
class NetworkConfig:
    layers: int = 4
    step_size: float | None = None  # None: choose just under 1/lambda_max
    regularization: float = 10.0
    max_matrix_entries: int = DEFAULT_MAX_ENTRIES


@dataclass
class SimulationConfig:
    seed: int
    waveform_seed: int
    snr_db: list  # entries are floats or None (noiseless)
    sample_count: int = 10
    test_realizations: int = 20


@dataclass
class RunConfig:
    geometry: ImagingGeometry
    pixels_per_side: int
    slow_time_count: int
    frequency_count: int
    scene_extent: float
    network: NetworkConfig
    train: TrainConfig | None
    simulation: SimulationConfig | None
    output_dir: str | None
    raw: dict  # the validated JSON document, echoed into manifests

    def make_grid(self) -> SamplingGrid:
        return make_grid(
            self.geometry,
            pixels_per_side=self.pixels_per_side,
            slow_time_count=self.slow_time_count,
            frequency_count=self.frequency_count,
            scene_extent=self.scene_extent,
        )

    def require_train(self) -> TrainConfig:
        if self.train is None:
            raise ConfigError("this command needs a 'train' block in the config")
        return self.train

    def require_simulation(self) -> SimulationConfig:
        if self.simulation is None:
            raise ConfigError("this command needs a 'simulation' block in the config")
        return self.simulation


def parse_config(doc: dict) -> RunConfig:
    """Validate a JSON document against the schema and build typed blocks."""
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as err:
        raise ConfigError(f"invalid config: {err.message}") from err

    g = doc["geometry"]
    interval = g.get("slow_time_interval_rad", [0.0, TWO_PI])
    try:
        geometry = ImagingGeometry(
            transmitter_position=[1000.0 * v for v in g["transmitter_position_km"]],
            receiver_radius=1000.0 * g["receiver_radius_km"],
            receiver_height=1000.0 * g["receiver_height_km"],
            slow_time_interval=(interval[0], interval[1]),
            center_frequency=1e6 * g["center_frequency_mhz"],
            bandwidth=1e6 * g["bandwidth_mhz"],
        )
    except ValueError as err:
        raise ConfigError(f"invalid geometry: {err}") from err

    grid = doc["grid"]
    network = NetworkConfig(**doc.get("network", {}))

    train_cfg = None
    if "train" in doc:
        try:
            train_cfg = TrainConfig(**doc["train"])
        except ValueError as err:
            raise ConfigError(f"invalid train block: {err}") from err

    sim_cfg = None
    if "simulation" in doc:
        sim = dict(doc["simulation"])
        sim.setdefault("snr_db", [0.0])
        sim_cfg = SimulationConfig(**sim)

    return RunConfig(
        geometry=geometry,
        pixels_per_side=grid["pixels_per_side"],
        slow_time_count=grid["slow_time_count"],
        frequency_count=grid["frequency_count"],
        scene_extent=grid["scene_extent_m"],
        network=network,
        train=train_cfg,
        simulation=sim_cfg,
        output_dir=doc.get("output_dir"),
        raw=doc,
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError as err:
        raise ConfigError(f"config file not found: {path}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}") from err
    return parse_config(doc)
