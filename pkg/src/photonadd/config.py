"""Schema-versioned experiment configuration (JSON) and the shipped presets."""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .channels import NoiseModel
from .homodyne import PROTOCOLS
from .tomography import ReconstructionConfig

SCHEMA_VERSION = 1
PRESETS = ("fig2", "fig3-upper", "fig3-lower", "fig4")
SAMPLERS = ("auto", "direct", "displaced_frame")
# direct sampling works in the full Fock space; beyond this the core sampler is used
DIRECT_SAMPLER_MAX_ALPHA = 3.0

_TOP_LEVEL = {"schema_version", "name", "recipe", "noise", "protocol", "counts_per_phase", "seed",
              "sampler", "reconstruction", "sweep", "bench", "outputs"}


class ConfigError(ValueError):
    """Configuration does not satisfy the schema or a component invariant."""


@dataclass(frozen=True)
class CurveSpec:
    phi: float
    noise: NoiseModel
    phase_averaged: bool = False
    label: str = ""


@dataclass(frozen=True)
class SweepSpec:
    nbar_list: tuple
    curves: tuple
    method: str = "auto"
    cutoff: int | None = None

    @property
    def alpha_list(self) -> list[float]:
        return [math.sqrt(n) for n in self.nbar_list]


@dataclass(frozen=True)
class ExperimentConfig:
    alpha: complex = 1.0
    phi: float = math.pi
    noise: NoiseModel = field(default_factory=NoiseModel)
    protocol: str = "phase_averaged"
    counts_per_phase: int = 50_000
    seed: int = 0
    sampler: str = "auto"
    reconstruction: ReconstructionConfig = field(default_factory=ReconstructionConfig)
    sweep: SweepSpec | None = None
    bench: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    name: str = ""
    raw: dict = field(default_factory=dict, repr=False, compare=False)

    def resolved_sampler(self) -> str:
        if self.sampler != "auto":
            return self.sampler
        return "displaced_frame" if abs(self.alpha) > DIRECT_SAMPLER_MAX_ALPHA else "direct"

    def to_dict(self) -> dict:
        return copy.deepcopy(self.raw)

    def config_hash(self) -> str:
        return config_hash(self.raw)


def canonical_json(d: dict) -> str:
    return json.dumps(d, sort_keys=True, separators=(",", ":"))


def config_hash(d: dict) -> str:
    return hashlib.sha256(canonical_json(d).encode()).hexdigest()[:16]


def _alpha(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, dict) and set(v) <= {"re", "im"}:
        return complex(float(v.get("re", 0.0)), float(v.get("im", 0.0)))
    raise ConfigError(f"alpha must be a number, [re, im] or {{re, im}}, got {v!r}")


def _phi(v) -> float:
    if isinstance(v, str):
        table = {"pi": math.pi, "0": 0.0, "pi/2": math.pi / 2}
        if v not in table:
            raise ConfigError(f"phi must be a number or one of {sorted(table)}, got {v!r}")
        return table[v]
    return float(v)


def _noise(d) -> NoiseModel:
    if d is None:
        return NoiseModel()
    d = dict(d)
    for key in ("sigma_phi", "sigma_global"):
        if isinstance(d.get(key), str):
            d[key] = _sigma(d[key])
    return NoiseModel.from_dict(d)


def _sigma(v: str) -> float:
    # "pi/100" style
    if v.startswith("pi/"):
        return math.pi / float(v[3:])
    raise ConfigError(f"unrecognized phase width {v!r}")


def _sweep(d, phi, noise) -> SweepSpec:
    if "nbar_list" in d:
        nbar = [float(x) for x in d["nbar_list"]]
    elif "alpha_list" in d:
        nbar = [abs(_alpha(a)) ** 2 for a in d["alpha_list"]]
    elif "nbar_range" in d:
        lo, hi, n = d["nbar_range"]
        nbar = [lo + (hi - lo) * k / (n - 1) for k in range(int(n))] if n > 1 else [float(lo)]
    else:
        raise ConfigError("sweep needs nbar_list, alpha_list or nbar_range")
    if not nbar:
        raise ConfigError("sweep amplitude list is empty")
    if any(x < 0 for x in nbar):
        raise ConfigError("nbar values must be >= 0")
    curves = []
    for c in d.get("curves") or [{}]:
        curves.append(CurveSpec(_phi(c.get("phi", phi)), _noise(c["noise"]) if "noise" in c else noise,
                                bool(c.get("phase_averaged", False)), str(c.get("label", ""))))
    return SweepSpec(tuple(nbar), tuple(curves), d.get("method", "auto"), d.get("cutoff"))


def parse_config(d: dict) -> ExperimentConfig:
    """Validate a config mapping; every violation surfaces as ConfigError."""
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    version = d.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {version!r}")
    extra = set(d) - _TOP_LEVEL
    if extra:
        raise ConfigError(f"unknown config fields: {sorted(extra)}")
    try:
        recipe = d.get("recipe", {})
        alpha = _alpha(recipe.get("alpha", 1.0))
        phi = _phi(recipe.get("phi", math.pi))
        noise = _noise(d.get("noise"))
        protocol = d.get("protocol", "phase_averaged")
        if protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {PROTOCOLS}, got {protocol!r}")
        counts = int(d.get("counts_per_phase", 50_000))
        if counts < 1:
            raise ConfigError("counts_per_phase must be >= 1")
        seed = int(d.get("seed", 0))
        if seed < 0:
            raise ConfigError("seed must be >= 0")
        sampler = d.get("sampler", "auto")
        if sampler not in SAMPLERS:
            raise ConfigError(f"sampler must be one of {SAMPLERS}, got {sampler!r}")
        rec = ReconstructionConfig.from_dict(d.get("reconstruction", {}))
        sweep = _sweep(d["sweep"], phi, noise) if "sweep" in d else None
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError, AttributeError) as exc:
        raise ConfigError(str(exc)) from exc
    return ExperimentConfig(alpha, phi, noise, protocol, counts, seed, sampler, rec, sweep,
                            dict(d.get("bench", {})), dict(d.get("outputs", {})), str(d.get("name", "")),
                            copy.deepcopy(d))


def load_config(path) -> ExperimentConfig:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return parse_config(d)


def preset_dict(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    text = resources.files("photonadd").joinpath("presets", f"{name}.json").read_text()
    return json.loads(text)


def load_preset(name: str) -> ExperimentConfig:
    return parse_config(preset_dict(name))


def with_seed(d: dict, seed: int) -> dict:
    out = copy.deepcopy(d)
    out["seed"] = int(seed)
    return out
