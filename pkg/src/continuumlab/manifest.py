"""Experiment manifests: one JSON-serializable record fully determines a run.

A manifest pins the experiment name, master seed, replication count, tower
geometry (depth, step, query mode, probes), statistical thresholds, and any
experiment-specific knobs.  Outputs embed the manifest's SHA-256 hash so a
result file can always be traced to the exact configuration that made it.
Defaults live in experiments.DEFAULTS; a manifest file only needs to list
the fields it overrides.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict

from .intervals import Interval, is_suitable
from .paths import QueryMode

__all__ = ["ExperimentManifest"]

_MODES = ("grid", "bridge_exact")


@dataclass
class ExperimentManifest:
    experiment: str
    master_seed: int = 20260814
    replications: int = 100
    depth: int = 16
    step: float = 2.0 ** -10
    mode: str = "bridge_exact"
    base_step: float = 1.0
    probes: list = field(default_factory=lambda: [[0.0, 0.5], [-1.0, 1.0], [-0.1, 2.0]])
    thresholds: dict = field(default_factory=lambda: {"tol": 0.05, "alpha": 0.01, "window": 3})
    params: dict = field(default_factory=dict)
    out_dir: str = "results"

    def validate(self) -> list:
        """Collect human-readable field problems; empty list means valid."""
        errs = []
        if not self.experiment:
            errs.append("experiment: must be a non-empty name")
        if not isinstance(self.master_seed, int) or self.master_seed < 0:
            errs.append(f"master_seed: need a non-negative integer, got {self.master_seed!r}")
        if not isinstance(self.replications, int) or self.replications < 1:
            errs.append(f"replications: need a positive integer, got {self.replications!r}")
        if not isinstance(self.depth, int) or self.depth < 1:
            errs.append(f"depth: need a positive integer, got {self.depth!r}")
        if not (isinstance(self.step, (int, float)) and self.step > 0):
            errs.append(f"step: need a positive number, got {self.step!r}")
        if not (isinstance(self.base_step, (int, float)) and self.base_step > 0):
            errs.append(f"base_step: need a positive number, got {self.base_step!r}")
        if self.mode not in _MODES:
            errs.append(f"mode: need one of {_MODES}, got {self.mode!r}")
        if not isinstance(self.probes, list) or len(self.probes) < 2:
            errs.append("probes: need at least two [lo, hi] pairs")
        else:
            for p in self.probes:
                try:
                    iv = Interval(float(p[0]), float(p[1]))
                except (TypeError, ValueError, IndexError) as exc:
                    errs.append(f"probes: bad entry {p!r} ({exc})")
                    continue
                if not is_suitable(iv):
                    errs.append(f"probes: {p!r} must be nondegenerate and contain 0")
        th = self.thresholds
        if not isinstance(th, dict):
            errs.append("thresholds: need a mapping")
        else:
            if not th.get("tol", 0.05) > 0:
                errs.append(f"thresholds.tol: need > 0, got {th.get('tol')!r}")
            if not 0.0 < th.get("alpha", 0.01) < 1.0:
                errs.append(f"thresholds.alpha: need in (0, 1), got {th.get('alpha')!r}")
            if not th.get("window", 3) >= 2:
                errs.append(f"thresholds.window: need >= 2, got {th.get('window')!r}")
        return errs

    # -- derived views ------------------------------------------------------

    def query_mode(self) -> QueryMode:
        if self.mode == "grid":
            return QueryMode.grid(self.step)
        return QueryMode.bridge_exact(self.step)

    def probe_intervals(self) -> list:
        return [Interval(float(p[0]), float(p[1])) for p in self.probes]

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        return asdict(self)

    def config_dict(self) -> dict:
        """Fields that determine results; excludes the output destination."""
        d = asdict(self)
        d.pop("out_dir")
        return d

    def canonical_json(self) -> str:
        return json.dumps(self.config_dict(), sort_keys=True, separators=(",", ":"))

    def sha256(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()

    @classmethod
    def from_dict(cls, experiment: str, data: dict,
                  defaults: dict | None = None) -> "ExperimentManifest":
        """Build from defaults overlaid with `data`; unknown keys are errors."""
        merged = dict(defaults or {})
        for key, value in data.items():
            if key == "experiment":
                continue
            if key not in cls.__dataclass_fields__:
                raise ValueError(f"unknown manifest field {key!r}")
            if key in ("thresholds", "params") and key in merged:
                combined = dict(merged[key])
                combined.update(value)
                merged[key] = combined
            else:
                merged[key] = value
        return cls(experiment=experiment, **merged)

    @classmethod
    def from_file(cls, path: str, experiment: str,
                  defaults: dict | None = None) -> "ExperimentManifest":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if "experiment" in data and data["experiment"] != experiment:
            raise ValueError(
                f"manifest file is for {data['experiment']!r}, not {experiment!r}"
            )
        return cls.from_dict(experiment, data, defaults)
