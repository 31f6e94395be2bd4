"""Suite configuration: YAML in, validated ScenarioConfig out, and back."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from .controller import Policy, ThresholdConfig
from .engine import Mode, Scenario
from .topology import MetricValues, Topology, load_topology
from .traffic import TrafficConfig, derive_seed

OUTPUT_ENV = "MPLSAGG_OUTPUT_DIR"

# (cong, warn) grid of the threshold sweep
SWEEP_THRESHOLDS = tuple((c, w) for c in (0.8, 0.85, 0.9) for w in (0.4, 0.5, 0.6, 0.7))

_RNGS = ("PCG64",)


class ConfigError(ValueError):
    pass


def bundled(name: str) -> Path:
    """Path of a file shipped in the package data directory."""
    return Path(str(resources.files("mplsagg") / "data" / name))


@dataclass(frozen=True)
class ScenarioConfig:
    topology_path: str = "us_backbone39.topo"
    mode: Mode = Mode.MECHANISM
    thresholds: tuple[tuple[float, float], ...] = SWEEP_THRESHOLDS
    metrics: MetricValues = field(default_factory=MetricValues)
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    rng: str = "PCG64"
    replications: int = 20
    gc_timeout: float = 1.0
    dft_timeout: float = 1.0
    allocation_policy: Policy = Policy.ALWAYS
    output_dir: str = "results"
    base_dir: str = field(default=".", compare=False)  # relative topology paths resolve here

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise ConfigError("replications must be at least 1")
        if not self.thresholds:
            raise ConfigError("at least one (cong, warn) threshold pair is required")
        for cong, warn in self.thresholds:
            try:
                ThresholdConfig(warn, cong)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if self.rng not in _RNGS:
            raise ConfigError(f"unsupported rng {self.rng!r}; supported: {', '.join(_RNGS)}")
        if not (0 < self.gc_timeout < float("inf")) or not (0 < self.dft_timeout < float("inf")):
            raise ConfigError("timeouts must be positive and finite")

    # resolution -------------------------------------------------------------

    def resolve_topology(self) -> Path:
        """Relative paths resolve against the config file, then the bundled data."""
        p = Path(self.topology_path)
        if p.is_absolute():
            return p
        local = Path(self.base_dir) / p
        if not local.exists() and bundled(self.topology_path).exists():
            return bundled(self.topology_path)
        return local

    def resolve_output(self, override: str | None = None) -> Path:
        """Flag, then environment, then the config value; relative to the cwd."""
        return Path(override or os.environ.get(OUTPUT_ENV) or self.output_dir)

    def load_topology(self) -> Topology:
        return load_topology(self.resolve_topology())[0]

    def seeds(self) -> list[int]:
        return [derive_seed(self.traffic.seed, i) for i in range(self.replications)]

    def scenario(self, topology: Topology, cong: float, warn: float, seed: int) -> Scenario:
        return Scenario(
            topology=topology,
            traffic=dataclasses.replace(self.traffic, seed=seed),
            mode=self.mode,
            thresholds=ThresholdConfig(warn, cong),
            policy=self.allocation_policy,
            metric_values=self.metrics,
            gc_timeout=self.gc_timeout,
            dft_timeout=self.dft_timeout,
        )

    # serialization ----------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        t = self.traffic
        return {
            "topology": self.topology_path,
            "mode": self.mode.value,
            "thresholds": [[c, w] for c, w in self.thresholds],
            "metrics": {"norm": self.metrics.norm, "warn": self.metrics.warn,
                        "cong": self.metrics.cong},
            "traffic": {
                "pareto_shape": t.pareto_shape, "mean_size": t.mean_size,
                "mean_interarrival": t.mean_interarrival, "sim_time": t.sim_time,
                "warmup": t.warmup, "seed": t.seed, "dst_port": t.dst_port, "rng": self.rng,
            },
            "replications": self.replications,
            "gc_timeout": self.gc_timeout,
            "dft_timeout": self.dft_timeout,
            "allocation_policy": self.allocation_policy.value,
            "output_dir": self.output_dir,
        }

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @classmethod
    def from_dict(cls, data: dict[str, Any] | None, base_dir: str | Path = ".") -> "ScenarioConfig":
        data = dict(data or {})
        known = {"topology", "mode", "thresholds", "metrics", "traffic", "replications",
                 "gc_timeout", "dft_timeout", "allocation_policy", "output_dir"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        kw: dict[str, Any] = {"base_dir": str(base_dir)}
        try:
            if "topology" in data:
                kw["topology_path"] = str(data["topology"])
            if "mode" in data:
                kw["mode"] = Mode(str(data["mode"]).upper())
            if "thresholds" in data:
                kw["thresholds"] = tuple((float(c), float(w)) for c, w in data["thresholds"])
            if "metrics" in data:
                m = data["metrics"] or {}
                _check_keys("metrics", m, {"norm", "warn", "cong"})
                kw["metrics"] = MetricValues(**{k: int(v) for k, v in m.items()})
            if "traffic" in data:
                tr = dict(data["traffic"] or {})
                _check_keys("traffic", tr, {f.name for f in dataclasses.fields(TrafficConfig)} | {"rng"})
                if "rng" in tr:
                    kw["rng"] = str(tr.pop("rng"))
                types = {"seed": int, "dst_port": int}
                kw["traffic"] = TrafficConfig(**{k: types.get(k, float)(v) for k, v in tr.items()})
            if "replications" in data:
                kw["replications"] = int(data["replications"])
            for key in ("gc_timeout", "dft_timeout"):
                if key in data:
                    kw[key] = float(data[key])
            if "allocation_policy" in data:
                kw["allocation_policy"] = Policy(str(data["allocation_policy"]).upper())
            if "output_dir" in data:
                kw["output_dir"] = str(data["output_dir"])
            return cls(**kw)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None


def _check_keys(section: str, data: dict, allowed: set[str]) -> None:
    if not isinstance(data, dict):
        raise ConfigError(f"{section} must be a mapping")
    extra = set(data) - allowed
    if extra:
        raise ConfigError(f"unknown {section} keys: {', '.join(sorted(extra))}")


def parse_config(text: str, base_dir: str | Path = ".") -> ScenarioConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}") from None
    if data is not None and not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    return ScenarioConfig.from_dict(data, base_dir)


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text, path.parent)
