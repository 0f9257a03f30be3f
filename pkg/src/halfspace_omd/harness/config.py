"""Experiment configuration: JSON schema, validation, and cell expansion."""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field

import jsonschema

from ..learner import ConstantsConfig
from ..oracle import NOISE_KINDS, NoiseModel, derive_seed
from ..sampling import KINDS

MODES = ("active", "passive", "baseline")
SWEEPABLE = ("eps", "delta", "d", "s", "nu", "marginal")
DIAG_SUITES = ("link_roundtrip", "band_mass", "noise_budget", "expansion", "regret_ledger")

_CONST_FIELDS = {
    "c_bar": {"type": "number", "exclusiveMinimum": 0},
    "c_b": {"type": "number", "exclusiveMinimum": 0},
    "c_alpha": {"type": "number", "exclusiveMinimum": 0},
    "c_T": {"type": "number", "exclusiveMinimum": 0},
    "c_m": {"type": "number", "exclusiveMinimum": 0},
    "zeta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
    "b_init": {"type": "number", "exclusiveMinimum": 0},
    "s_tilde_factor": {"type": "number", "exclusiveMinimum": 0},
    "paper_faithful": {"type": "boolean"},
    "averaging": {"enum": ["normalized", "raw"]},
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "halfspace-omd experiment config",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "eps": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "delta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "d": {"type": "integer", "minimum": 1},
        "s": {"type": "integer", "minimum": 1},
        "marginal": {"enum": list(KINDS)},
        "noise": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": list(NOISE_KINDS)},
                "nu": {"type": "number", "minimum": 0, "exclusiveMaximum": 0.5},
                "tau": {"type": "number", "minimum": 0},
                "region_lo": {"type": "number"},
                "region_hi": {"type": "number"},
            },
        },
        "constants": {"type": "object", "additionalProperties": False,
                      "properties": _CONST_FIELDS},
        "seeds": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 0}},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "modes": {"type": "array", "minItems": 1, "items": {"enum": list(MODES)}},
        "metric_n": {"type": "integer", "minimum": 1},
        "baseline_m": {"type": "integer", "minimum": 1},
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "minProperties": 1,
            "properties": {k: {"type": "array", "minItems": 1} for k in SWEEPABLE},
        },
        "diag": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "suites": {"type": "array", "items": {"enum": list(DIAG_SUITES)}},
                "c2": {"type": "number", "exclusiveMinimum": 0},
                "n": {"type": "integer", "minimum": 1},
                "triples": {"type": "integer", "minimum": 1},
                "refine_runs": {"type": "integer", "minimum": 1},
            },
        },
    },
}

RUN_REQUIRED = ("eps", "delta", "d", "s")


class ConfigError(ValueError):
    """Config rejected; the message names the offending field."""


def _field_name(err) -> str:
    path = list(err.absolute_path)
    if err.validator == "required":
        path.append(err.message.split("'")[1])
    return ".".join(map(str, path)) or "<root>"


def validate_schema(raw: dict):
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a JSON object")
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigError(f"config field '{_field_name(err)}': {err.message}")


@dataclass(frozen=True)
class CellSpec:
    """One (sweep point, replicate, mode) unit of work."""

    index: int
    point: int
    replicate: int
    seed: int
    mode: str
    eps: float
    delta: float
    d: int
    s: int
    marginal: str
    noise: dict
    constants: dict
    metric_n: int
    baseline_m: int | None


@dataclass
class RunConfig:
    raw: dict
    eps: float
    delta: float
    d: int
    s: int
    marginal: str = "gaussian"
    noise: dict = field(default_factory=lambda: {"kind": "realizable", "nu": 0.0})
    constants: dict = field(default_factory=dict)
    seeds: list = field(default_factory=lambda: [0])
    master_seed: int = 0
    modes: list = field(default_factory=lambda: ["active"])
    metric_n: int = 100_000
    baseline_m: int | None = None
    sweep: dict = field(default_factory=dict)

    def fingerprint(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        canon += f"|{self.master_seed}"
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    def points(self, use_sweep: bool) -> list[dict]:
        base = {"eps": self.eps, "delta": self.delta, "d": self.d, "s": self.s,
                "marginal": self.marginal, "nu": self.noise.get("nu", 0.0)}
        if not use_sweep or not self.sweep:
            return [base]
        keys = [k for k in SWEEPABLE if k in self.sweep]
        out = []
        for combo in itertools.product(*(self.sweep[k] for k in keys)):
            pt = dict(base)
            pt.update(zip(keys, combo))
            out.append(pt)
        return out

    def cells(self, use_sweep: bool = False, modes=None) -> list[CellSpec]:
        modes = list(modes or self.modes)
        cells = []
        for pi, pt in enumerate(self.points(use_sweep)):
            _check_point(pt, self.noise, self.constants)
            noise = dict(self.noise, nu=pt["nu"])
            for rep in self.seeds:
                # modes at the same point and replicate share one distribution
                seed = derive_seed(self.master_seed, pi, rep) & 0xFFFFFFFFFFFFFFFF
                for mode in modes:
                    cells.append(CellSpec(
                        index=len(cells), point=pi, replicate=rep, seed=seed, mode=mode,
                        eps=pt["eps"], delta=pt["delta"], d=pt["d"], s=pt["s"],
                        marginal=pt["marginal"], noise=noise, constants=dict(self.constants),
                        metric_n=self.metric_n, baseline_m=self.baseline_m))
        return cells


def _check_point(pt: dict, noise: dict, constants: dict):
    where = "at " + json.dumps(pt, sort_keys=True)
    for key in ("eps", "delta"):
        if not (isinstance(pt[key], (int, float)) and 0 < pt[key] < 1):
            raise ConfigError(f"config field '{key}': must lie in (0, 1) ({where})")
    for key in ("d", "s"):
        if not (isinstance(pt[key], int) and not isinstance(pt[key], bool) and pt[key] >= 1):
            raise ConfigError(f"config field '{key}': must be a positive integer ({where})")
    if pt["s"] > pt["d"]:
        raise ConfigError(f"config field 's': must not exceed d ({where})")
    if pt["marginal"] not in KINDS:
        raise ConfigError(f"config field 'marginal': unknown kind {pt['marginal']!r}")
    try:
        NoiseModel(**_noise_kwargs(dict(noise, nu=pt["nu"])))
    except ValueError as exc:
        raise ConfigError(f"config field 'noise': {exc}") from None
    try:
        ConstantsConfig(**constants)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"config field 'constants': {exc}") from None


def _noise_kwargs(noise: dict) -> dict:
    kw = {"kind": noise.get("kind", "realizable"), "nu": float(noise.get("nu", 0.0))}
    for key in ("tau", "region_lo", "region_hi"):
        if key in noise:
            kw[key] = float(noise[key])
    return kw


def build_noise(noise: dict) -> NoiseModel:
    return NoiseModel(**_noise_kwargs(noise))


def parse_config(raw: dict, *, require_run_fields: bool = True, master_seed: int | None = None) -> RunConfig:
    """Validate a decoded JSON config; raises ConfigError naming the bad field."""
    validate_schema(raw)
    if require_run_fields:
        for key in RUN_REQUIRED:
            if key not in raw:
                raise ConfigError(f"config field '{key}': required field is missing")
    noise = dict(raw.get("noise", {"kind": "realizable"}))
    noise.setdefault("nu", 0.0)
    cfg = RunConfig(
        raw=raw,
        eps=raw.get("eps", 0.1),
        delta=raw.get("delta", 0.05),
        d=raw.get("d", 20),
        s=raw.get("s", 5),
        marginal=raw.get("marginal", "gaussian"),
        noise=noise,
        constants=dict(raw.get("constants", {})),
        seeds=list(raw.get("seeds", [0])),
        master_seed=raw.get("seed", 0) if master_seed is None else master_seed,
        modes=list(raw.get("modes", ["active"])),
        metric_n=raw.get("metric_n", 100_000),
        baseline_m=raw.get("baseline_m"),
        sweep=dict(raw.get("sweep", {})),
    )
    if len(set(cfg.seeds)) != len(cfg.seeds):
        raise ConfigError("config field 'seeds': entries must be distinct")
    if require_run_fields:
        for pt in cfg.points(use_sweep=True):
            _check_point(pt, cfg.noise, cfg.constants)
    return cfg


def load_config(path, **kw) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return parse_config(raw, **kw)
