"""Run configuration: a flat key=value file with CLI override precedence."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

from .agglomerate import MergeRadius


@dataclass
class PipelineConfig:
    input: str = ""
    format: str = "scopus_csv"
    top_fraction: float = 0.01
    geocoder: str = "gazetteer"  # gazetteer | remote
    gazetteer: str = ""
    geo_cache: str = ""
    remote_endpoint: str = ""
    consistency_tol: float = 0.5
    merge: int = 2
    merge_radius: float = 0.0  # 0 means "use the merge option"
    radius_base: float = 4.0
    log_base: str = "10"  # 10 | e
    formats: str = "gps,geojson,kml,html,png"
    out_dir: str = "out"
    title: str = "top-cited city map"
    run_timestamp: str = ""
    run_label: str = ""
    max_slice_warn: int = 2000
    max_in_flight: int = 1
    no_verify: bool = False

    # -- construction ------------------------------------------------------

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        values: dict[str, str] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ValueError(f"config line {line_no}: expected key=value, got {line!r}")
                key, _, value = line.partition("=")
                values[key.strip()] = value.strip()
        config = cls()
        config.apply(values)
        return config

    def apply(self, overrides: dict[str, Any]) -> "PipelineConfig":
        """Set fields from a {name: value} map; values may be strings."""
        by_name = {f.name: f for f in fields(self)}
        for key, value in overrides.items():
            if value is None:
                continue
            name = key.replace("-", "_")
            if name not in by_name:
                raise ValueError(f"unknown config key: {key}")
            spec = by_name[name]
            if spec.type in ("float", float):
                value = float(value)
            elif spec.type in ("int", int):
                value = int(value)
            elif spec.type in ("bool", bool):
                if isinstance(value, str):
                    value = value.lower() in ("1", "true", "yes", "on")
                else:
                    value = bool(value)
            else:
                value = str(value)
            setattr(self, name, value)
        self.validate()
        return self

    def validate(self) -> None:
        if self.format not in ("scopus_csv", "wos_tagged"):
            raise ValueError(f"unknown input format: {self.format}")
        if self.geocoder not in ("gazetteer", "remote"):
            raise ValueError(f"unknown geocoder: {self.geocoder}")
        if not (0 < self.top_fraction <= 1):
            raise ValueError(f"top_fraction out of range (0, 1]: {self.top_fraction}")
        if self.log_base not in ("10", "e"):
            raise ValueError(f"log_base must be 10 or e: {self.log_base}")
        if self.merge not in (1, 2, 3):
            raise ValueError(f"merge option must be 1, 2 or 3: {self.merge}")

    # -- derived views -----------------------------------------------------

    def merge_radius_value(self) -> MergeRadius:
        if self.merge_radius > 0:
            return MergeRadius(degrees=self.merge_radius)
        return MergeRadius.from_option(self.merge)

    def log_base_value(self) -> float:
        return math.e if self.log_base == "e" else 10.0

    def format_list(self) -> list[str]:
        return [f.strip() for f in self.formats.split(",") if f.strip()]

    def parameter_echo(self) -> dict[str, Any]:
        radius = self.merge_radius_value()
        echo: dict[str, Any] = {
            "top_fraction": self.top_fraction,
            "merge_option": radius.option if radius.option is not None else "explicit",
            "merge_radius_deg": radius.degrees,
            "radius_base": self.radius_base,
            "log_base": self.log_base,
        }
        if self.run_label:
            echo["run_label"] = self.run_label
        return echo

    def to_lines(self) -> str:
        parts = []
        for spec in fields(self):
            value = getattr(self, spec.name)
            if isinstance(value, bool):
                value = "true" if value else "false"
            parts.append(f"{spec.name}={value}")
        return "\n".join(parts) + "\n"

    def copy(self) -> "PipelineConfig":
        return dataclasses.replace(self)
