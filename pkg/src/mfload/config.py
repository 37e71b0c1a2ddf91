"""INI-style configuration for simulation runs and sweeps.

Sections: [traffic], [cluster], [weights], [policy], [sim], [demand],
[sweep]. Every key is optional; an empty file yields the documented
defaults (window 64, equal weights, LeastSIL policy, the mixed-size
reference cluster, composite traffic). Unknown sections or keys are
rejected with the offending key path so typos cannot silently change an
experiment.

See configs/example.ini for a fully annotated file.
"""

from __future__ import annotations

import configparser
import hashlib
import math
import os
from enum import Enum

from .errors import ConfigError
from .metrics import ServerSpec, WeightTriple, default_weights
from .simulation import (
    CalibrationTarget,
    DemandParams,
    Policy,
    PolicyKind,
    ScenarioConfig,
    ServiceClass,
    homogeneous_cluster,
    reference_cluster,
)
from .traffic import GeneratorKind, GeneratorMeta

__all__ = ["parse_config", "parse_sweep_grid", "config_digest", "canonical_config_text"]

_KNOWN_KEYS = {
    "traffic": {"kind", "hurst", "delta_h", "budget", "depth", "spread"},
    "cluster": {"servers", "cpu_count", "ram_capacity", "net_capacity"},
    "weights": {"a", "b", "c"},
    "policy": {"kind", "migration_threshold"},
    "sim": {"name", "horizon", "window", "arrival_scale", "seed"},
    "demand": {
        "cpu_mean",
        "cpu_sigma",
        "ram_mean",
        "ram_sigma",
        "net_mean",
        "net_sigma",
        "duration_mean",
        "cpu_max",
        "ram_max",
        "net_max",
        "classes",
    },
    "sweep": {"grid", "budget"},
}

_POLICY_NAMES = {k.value: k for k in PolicyKind}


def _load(path) -> configparser.ConfigParser:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    for section in parser.sections():
        known = _KNOWN_KEYS.get(section)
        if known is None:
            raise ConfigError(f"{section}: unknown section")
        for key in parser[section]:
            if key.startswith("server_"):
                if section != "cluster":
                    raise ConfigError(f"{section}.{key}: unknown key")
                continue
            if key not in known:
                raise ConfigError(f"{section}.{key}: unknown key")
    return parser


def _section(parser, name) -> dict:
    return dict(parser[name]) if parser.has_section(name) else {}


def _get_float(sec: dict, section: str, key: str, default: float) -> float:
    raw = sec.get(key)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}: expected a number, got {raw!r}") from exc


def _get_int(sec: dict, section: str, key: str, default: int) -> int:
    raw = sec.get(key)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}: expected an integer, got {raw!r}") from exc


def _parse_traffic(sec: dict, seed: int, horizon: int):
    kind = sec.get("kind", "composite").strip().lower()
    depth_default = max(5, math.ceil(math.log2(horizon)))
    if kind == "calibrate":
        if "hurst" not in sec or "delta_h" not in sec:
            raise ConfigError("traffic.kind=calibrate requires traffic.hurst and traffic.delta_h")
        return CalibrationTarget(
            hurst=_get_float(sec, "traffic", "hurst", 0.0),
            delta_h=_get_float(sec, "traffic", "delta_h", 0.0),
            budget=_get_int(sec, "traffic", "budget", 64),
        )
    if kind == "fgn":
        return GeneratorMeta(
            kind=GeneratorKind.FGN,
            seed=seed,
            target_hurst=_get_float(sec, "traffic", "hurst", 0.7),
        )
    if kind == "cascade":
        return GeneratorMeta(
            kind=GeneratorKind.CASCADE,
            seed=seed,
            depth=_get_int(sec, "traffic", "depth", depth_default),
            multiplier_spread=_get_float(sec, "traffic", "spread", 0.5),
        )
    if kind == "composite":
        return GeneratorMeta(
            kind=GeneratorKind.COMPOSITE,
            seed=seed,
            depth=_get_int(sec, "traffic", "depth", depth_default),
            target_hurst=_get_float(sec, "traffic", "hurst", 0.7),
            multiplier_spread=_get_float(sec, "traffic", "spread", 0.5),
        )
    raise ConfigError(
        f"traffic.kind: expected one of calibrate/fgn/cascade/composite, got {kind!r}"
    )


def _parse_cluster(sec: dict) -> tuple[ServerSpec, ...]:
    explicit = {k: v for k, v in sec.items() if k.startswith("server_")}
    shorthand = {k for k in ("servers",) if k in sec}
    if explicit and shorthand:
        raise ConfigError("cluster: give either per-server lines or the homogeneous shorthand")

    if explicit:
        specs = []
        for key in sorted(explicit, key=lambda k: int(k.split("_", 1)[1])):
            try:
                sid = int(key.split("_", 1)[1])
            except ValueError as exc:
                raise ConfigError(f"cluster.{key}: malformed server id") from exc
            parts = [p.strip() for p in explicit[key].split(",")]
            if len(parts) != 3:
                raise ConfigError(
                    f"cluster.{key}: expected 'cpu_count,ram_capacity,net_capacity'"
                )
            try:
                specs.append(
                    ServerSpec(
                        id=sid,
                        cpu_count=int(parts[0]),
                        ram_capacity=float(parts[1]),
                        net_capacity=float(parts[2]),
                    )
                )
            except ValueError as exc:
                raise ConfigError(f"cluster.{key}: {exc}") from exc
        ids = [s.id for s in specs]
        if len(set(ids)) != len(ids):
            raise ConfigError("cluster: duplicate server ids")
        return tuple(specs)

    if not sec:
        return reference_cluster()
    return homogeneous_cluster(
        n=_get_int(sec, "cluster", "servers", 8),
        cpu_count=_get_int(sec, "cluster", "cpu_count", 4),
        ram_capacity=_get_float(sec, "cluster", "ram_capacity", 32.0),
        net_capacity=_get_float(sec, "cluster", "net_capacity", 16.0),
    )


def _parse_weights(sec: dict) -> WeightTriple:
    if not sec:
        return default_weights()
    a = _get_float(sec, "weights", "a", 1.0 / 3.0)
    b = _get_float(sec, "weights", "b", 1.0 / 3.0)
    c = _get_float(sec, "weights", "c", 1.0 / 3.0)
    if abs(a + b + c - 1.0) > 1e-9:
        raise ConfigError(f"weights: invariant a + b + c = 1 violated (got {a + b + c})")
    return WeightTriple(a=a, b=b, c=c)


def _parse_policy(sec: dict, weights: WeightTriple) -> Policy:
    name = sec.get("kind", PolicyKind.LEAST_SIL.value).strip().lower()
    kind = _POLICY_NAMES.get(name)
    if kind is None:
        raise ConfigError(
            f"policy.kind: expected one of {sorted(_POLICY_NAMES)}, got {name!r}"
        )
    return Policy(
        kind=kind,
        weights=weights,
        migration_threshold=_get_float(sec, "policy", "migration_threshold", 0.0),
    )


def _parse_classes(raw: str) -> tuple[ServiceClass, ...]:
    """`prob:demand_scale:duration_scale` triples separated by whitespace."""
    classes = []
    for token in raw.split():
        parts = token.split(":")
        if len(parts) != 3:
            raise ConfigError(
                f"demand.classes: expected prob:demand_scale:duration_scale, got {token!r}"
            )
        try:
            classes.append(
                ServiceClass(
                    probability=float(parts[0]),
                    demand_scale=float(parts[1]),
                    duration_scale=float(parts[2]),
                )
            )
        except ValueError as exc:
            raise ConfigError(f"demand.classes: {exc}") from exc
    if not classes:
        raise ConfigError("demand.classes: no classes given")
    return tuple(classes)


def _parse_demand(sec: dict) -> DemandParams:
    base = DemandParams()
    kwargs = {}
    for name in (
        "cpu_mean",
        "cpu_sigma",
        "ram_mean",
        "ram_sigma",
        "net_mean",
        "net_sigma",
        "duration_mean",
        "cpu_max",
        "ram_max",
        "net_max",
    ):
        kwargs[name] = _get_float(sec, "demand", name, getattr(base, name))
    if "classes" in sec:
        kwargs["classes"] = _parse_classes(sec["classes"])
    return DemandParams(**kwargs)


def parse_config(path) -> ScenarioConfig:
    """Read and fully validate a scenario configuration file."""
    parser = _load(path)
    sim = _section(parser, "sim")
    seed = _get_int(sim, "sim", "seed", 1)
    horizon = _get_int(sim, "sim", "horizon", 16384)
    weights = _parse_weights(_section(parser, "weights"))
    return ScenarioConfig(
        traffic=_parse_traffic(_section(parser, "traffic"), seed, horizon),
        cluster=_parse_cluster(_section(parser, "cluster")),
        weights=weights,
        policy=_parse_policy(_section(parser, "policy"), weights),
        horizon=horizon,
        window=_get_int(sim, "sim", "window", 64),
        arrival_scale=_get_float(sim, "sim", "arrival_scale", 0.1),
        demand_params=_parse_demand(_section(parser, "demand")),
        seed=seed,
        name=sim.get("name", "scenario").strip(),
    )


def parse_sweep_grid(path) -> tuple[list[tuple[float, float]], int]:
    """Read the [sweep] section: (H, delta_h) cells plus a calibration budget.

    Grid format: whitespace- or comma-separated `H:delta_h` pairs, e.g.
    ``grid = 0.6:1.5 0.6:2.5 0.9:2.5``.
    """
    parser = _load(path)
    if not parser.has_section("sweep"):
        raise ConfigError("sweep: section missing (required by the sweep command)")
    sec = _section(parser, "sweep")
    raw = sec.get("grid")
    if not raw:
        raise ConfigError("sweep.grid: no cells given")
    cells = []
    for token in raw.replace(",", " ").split():
        parts = token.split(":")
        if len(parts) != 2:
            raise ConfigError(f"sweep.grid: expected H:delta_h, got {token!r}")
        try:
            cells.append((float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise ConfigError(f"sweep.grid: {exc}") from exc
    return cells, _get_int(sec, "sweep", "budget", 64)


def canonical_config_text(config: ScenarioConfig) -> str:
    """Stable, sorted key=value rendering of a resolved config."""
    lines = []

    def emit(prefix: str, value) -> None:
        if isinstance(value, (GeneratorMeta, CalibrationTarget, Policy, WeightTriple, DemandParams, ServiceClass, ServerSpec)):
            for fname in sorted(value.__dataclass_fields__):
                emit(f"{prefix}.{fname}", getattr(value, fname))
        elif isinstance(value, (tuple, list)):
            for j, item in enumerate(value):
                emit(f"{prefix}[{j}]", item)
        elif isinstance(value, Enum):
            lines.append(f"{prefix}={value.value}")
        elif isinstance(value, float):
            lines.append(f"{prefix}={value!r}")
        elif value is None:
            lines.append(f"{prefix}=none")
        else:
            lines.append(f"{prefix}={value}")

    for fname in sorted(config.__dataclass_fields__):
        emit(fname, getattr(config, fname))
    return "\n".join(sorted(lines)) + "\n"


def config_digest(config: ScenarioConfig) -> str:
    """SHA-256 hex digest of the canonical config text."""
    return hashlib.sha256(canonical_config_text(config).encode("utf-8")).hexdigest()
