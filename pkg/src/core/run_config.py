#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Run configuration: one YAML file, one section per concern."""

from pathlib import Path
from typing import Any, Optional, Union

import yaml
from pydantic import Field, ValidationError, field_validator

from core.models import BaseConfigModel
from correspondence.pipeline import CorrespondenceConfig
from evaluation.config import CaseConfig
from network.graph import GraphConfig
from network.solver import SolverConfig
from simulator.scene import SceneSpec
from simulator.specs import FlightPlan, GnssSpec, ImuSpec, LidarSpec


class RunConfigInvalidError(Exception):
    """Configuration is invalid."""

    def __init__(self, msg: str, fields: list[str]):
        self.msg = msg
        self.fields = fields
        super().__init__(msg)


class RunSection(BaseConfigModel):
    """Seed, parallelism and output location."""

    seed: int = Field(default=0, ge=0)
    threads: int = Field(default=1, ge=1)
    out_dir: Path = Path("out")
    output_hz: Optional[float] = Field(default=None, gt=0.0)


class InputsSection(BaseConfigModel):
    """External files replacing simulated data."""

    imu: Optional[Path] = None
    gnss: Optional[Path] = None
    returns: Optional[Path] = None
    approx_trajectory: Optional[Path] = None
    truth: Optional[Path] = None

    @field_validator("imu", "gnss", "returns", "approx_trajectory", "truth")
    @classmethod
    def file_exists(cls, value: Optional[Path]) -> Optional[Path]:
        """Referenced files must exist."""
        if value is not None and not value.is_file():
            raise ValueError(f"File not found: {value}")
        return value

    @property
    def ingests(self) -> bool:
        """True when raw sensor data come from files."""
        return self.imu is not None or self.gnss is not None or self.returns is not None


class NetworkConfig(GraphConfig, SolverConfig):
    """Graph construction and solver options in one section."""

    def graph(self, imu: Optional[ImuSpec] = None) -> GraphConfig:
        """Graph options; the stochastic model follows the IMU spec unless set here."""
        values = {k: getattr(self, k) for k in GraphConfig.model_fields}
        if imu is None:
            return GraphConfig(**values)
        overrides = {k: v for k, v in values.items() if k in self.model_fields_set}
        return GraphConfig.for_imu(imu, **overrides)

    def solver(self) -> SolverConfig:
        """Solver options."""
        return SolverConfig(**{k: getattr(self, k) for k in SolverConfig.model_fields})


class RunConfig(BaseConfigModel):
    """Validated configuration of a run."""

    run: RunSection = Field(default_factory=RunSection)
    flight: FlightPlan = Field(default_factory=FlightPlan)
    imu: ImuSpec = Field(default_factory=ImuSpec)
    gnss: GnssSpec = Field(default_factory=GnssSpec)
    lidar: LidarSpec = Field(default_factory=LidarSpec)
    scene: SceneSpec = Field(default_factory=SceneSpec)
    correspondence: CorrespondenceConfig = Field(default_factory=CorrespondenceConfig)
    network: NetworkConfig = Field(default_factory=NetworkConfig)
    case: CaseConfig = Field(default_factory=CaseConfig)
    inputs: InputsSection = Field(default_factory=InputsSection)

    def graph_config(self) -> GraphConfig:
        """Graph options matched to the configured IMU."""
        return self.network.graph(self.imu)


def _key_lines(text: str) -> dict[tuple[str, ...], int]:
    """1-based line of every mapping key, indexed by its key path."""
    lines: dict[tuple[str, ...], int] = {}

    def walk(node, prefix: tuple[str, ...]):
        if isinstance(node, yaml.MappingNode):
            for key, value in node.value:
                path = prefix + (str(key.value),)
                lines[path] = key.start_mark.line + 1
                walk(value, path)

    try:
        walk(yaml.compose(text), ())
    except yaml.YAMLError:
        pass
    return lines


def _merge(base: dict, overrides: dict) -> dict:
    out = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def _field_path(loc: tuple, lines: dict[tuple[str, ...], int]) -> str:
    names = tuple(str(p) for p in loc if not isinstance(p, int))
    dashed = ".".join(name.replace("_", "-") for name in names)
    for size in range(len(names), 0, -1):
        line = lines.get(names[:size]) or lines.get(
            tuple(n.replace("_", "-") for n in names[:size])
        )
        if line is not None:
            return f"{dashed} (line {line})"
    return dashed


def _normalize(data: Any) -> Any:
    """Accept dashed keys as aliases of the underscored field names."""
    if isinstance(data, dict):
        return {str(k).replace("-", "_"): _normalize(v) for k, v in data.items()}
    if isinstance(data, list):
        return [_normalize(v) for v in data]
    return data


def build_config(data: Optional[dict], lines: Optional[dict] = None) -> RunConfig:
    """Validate a configuration mapping.

    Raises:
        RunConfigInvalidError: with one dashed field path per problem.
    """
    try:
        return RunConfig(**_normalize(data or {}))
    except ValidationError as ve:
        fields = [_field_path(err["loc"], lines or {}) for err in ve.errors()]
        details = "; ".join(
            f"{path}: {err['msg']}" for path, err in zip(fields, ve.errors())
        )
        raise RunConfigInvalidError(f"Invalid configuration: {details}", fields) from ve


def parse_config(
    path: Optional[Union[str, Path]] = None, overrides: Optional[dict] = None
) -> RunConfig:
    """Load, merge command-line overrides into, and validate a YAML configuration.

    An empty or missing path yields the defaults.

    Raises:
        RunConfigInvalidError: unreadable file, malformed YAML, unknown sections or keys,
            out-of-range values or missing input files.
    """
    text = ""
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise RunConfigInvalidError(f"Cannot read {path}: {e}", [str(path)]) from e
    try:
        data = yaml.safe_load(text) if text.strip() else {}
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f" (line {mark.line + 1})" if mark is not None else ""
        raise RunConfigInvalidError(f"Malformed YAML{where}: {e}", [str(path)]) from e
    if not isinstance(data, dict):
        raise RunConfigInvalidError("Configuration must be a mapping of sections", [str(path)])
    data = _merge(_normalize(data), _normalize(overrides or {}))
    return build_config(data, _key_lines(text))
