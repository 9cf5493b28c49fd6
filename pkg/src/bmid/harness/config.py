"""Experiment configuration: YAML file in, validated :class:`ExperimentConfig` out."""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

KINDS = ("reflected-limit", "bmid-convergence", "coupling-check", "lemma-suite")
SYMBOLS = ("X", "V", "L", "M", "U")

_FUNC_RE = re.compile(r"^\s*([A-Z])\s*\(\s*(T|T\s*/\s*\d+|[0-9]*\.?[0-9]+(?:[eE][-+]?\d+)?)\s*\)\s*$")


class ConfigError(ValueError):
    """Malformed experiment configuration; ``field`` names the offending key."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field '{field_name}': {message}")
        self.field = field_name


@dataclass(frozen=True)
class Functional:
    """A path functional such as ``X(T/2)``: a process symbol read at one time."""

    symbol: str
    time_expr: str

    @classmethod
    def parse(cls, text: str) -> "Functional":
        m = _FUNC_RE.match(str(text))
        if not m or m.group(1) not in SYMBOLS:
            raise ValueError(f"cannot parse functional {text!r}; expected e.g. 'X(T)', 'V(T/2)', 'M(0.5)'")
        return cls(m.group(1), re.sub(r"\s+", "", m.group(2)))

    def time(self, t_max: float) -> float:
        if self.time_expr == "T":
            return t_max
        if self.time_expr.startswith("T/"):
            return t_max / int(self.time_expr[2:])
        return float(self.time_expr)

    @property
    def label(self) -> str:
        return f"{self.symbol}({self.time_expr})"


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    K: float = 0.0
    v: float = 0.0
    t_max: float = 1.0
    exponents: tuple[int, ...] = (3, 5, 7)
    continuum_steps: int = 2**14
    replicas: int = 1000
    seed: int = 0
    functionals: tuple[Functional, ...] = field(default_factory=tuple)
    out_dir: str = "results"
    permutations: int = 999
    chunk_size: int = 500
    event_cap: int = 10**8

    def fingerprint(self) -> str:
        payload = self.to_dict()
        payload.pop("out_dir")
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["exponents"] = list(self.exponents)
        d["functionals"] = [f.label for f in self.functionals]
        return d

    def replace(self, **changes) -> "ExperimentConfig":
        d = self.to_dict()
        d.update(changes)
        return config_from_dict(_nest(d))


def _nest(flat: dict) -> dict:
    d = dict(flat)
    d["params"] = {"K": d.pop("K"), "v": d.pop("v"), "T": d.pop("t_max")}
    return d


def _num(d, key, name, cast=float, minimum=None, strict=False):
    try:
        val = cast(d[key])
    except (TypeError, ValueError):
        raise ConfigError(name, f"expected a number, got {d[key]!r}") from None
    if minimum is not None and (val <= minimum if strict else val < minimum):
        op = ">" if strict else ">="
        raise ConfigError(name, f"must be {op} {minimum}, got {val}")
    return val


def _int(d, key, name, minimum=None):
    raw = d[key]
    if isinstance(raw, bool) or (isinstance(raw, float) and not raw.is_integer()):
        raise ConfigError(name, f"expected an integer, got {raw!r}")
    return _num(d, key, name, cast=int, minimum=minimum)


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "expected a mapping")
    known = {"kind", "params", "exponents", "continuum_steps", "replicas", "seed",
             "functionals", "out_dir", "permutations", "chunk_size", "event_cap"}
    for key in raw:
        if key not in known:
            raise ConfigError(key, "unknown field")
    if "kind" not in raw:
        raise ConfigError("kind", "missing")
    kind = raw["kind"]
    if kind not in KINDS:
        raise ConfigError("kind", f"must be one of {', '.join(KINDS)}; got {kind!r}")

    params = raw.get("params", {}) or {}
    if not isinstance(params, dict):
        raise ConfigError("params", "expected a mapping with K, v, T")
    for key in params:
        if key not in ("K", "v", "T"):
            raise ConfigError(f"params.{key}", "unknown field")
    p = {"K": 0.0, "v": 0.0, "T": 1.0, **params}
    K = _num(p, "K", "params.K", minimum=0.0)
    v = _num(p, "v", "params.v")
    t_max = _num(p, "T", "params.T", minimum=0.0, strict=True)

    out = {}
    exps = raw.get("exponents", [3, 5, 7])
    if not isinstance(exps, (list, tuple)) or not exps:
        raise ConfigError("exponents", "must be a nonempty list of integers")
    checked = []
    for i, e in enumerate(exps):
        if isinstance(e, bool) or not isinstance(e, int) or not 0 <= e <= 16:
            raise ConfigError(f"exponents[{i}]", f"expected an integer in [0, 16], got {e!r}")
        checked.append(e)
    out["exponents"] = tuple(checked)

    defaults = {"continuum_steps": 2**14, "replicas": 1000, "seed": 0,
                "permutations": 999, "chunk_size": 500, "event_cap": 10**8}
    merged = {**defaults, **{k: raw[k] for k in defaults if k in raw}}
    out["continuum_steps"] = _int(merged, "continuum_steps", "continuum_steps", minimum=1)
    out["replicas"] = _int(merged, "replicas", "replicas", minimum=1)
    out["seed"] = _int(merged, "seed", "seed", minimum=0)
    if out["seed"] >= 2**64:
        raise ConfigError("seed", "must fit in 64 bits")
    out["permutations"] = _int(merged, "permutations", "permutations", minimum=0)
    out["chunk_size"] = _int(merged, "chunk_size", "chunk_size", minimum=1)
    out["event_cap"] = _int(merged, "event_cap", "event_cap", minimum=1)

    funcs = raw.get("functionals", [])
    if funcs is None:
        funcs = []
    if not isinstance(funcs, (list, tuple)):
        raise ConfigError("functionals", "must be a list such as ['X(T)', 'V(T)']")
    parsed = []
    for i, text in enumerate(funcs):
        try:
            f = Functional.parse(text)
        except ValueError as exc:
            raise ConfigError(f"functionals[{i}]", str(exc)) from None
        if not 0 <= f.time(t_max) <= t_max:
            raise ConfigError(f"functionals[{i}]", f"time outside [0, {t_max}]")
        parsed.append(f)
    out["functionals"] = tuple(parsed)

    if kind == "reflected-limit":
        if K != 0 or v != 0:
            raise ConfigError("params", "reflected-limit compares with the half-normal law and needs K = 0, v = 0")
        for i, f in enumerate(parsed):
            if f.symbol not in ("X", "L"):
                raise ConfigError(f"functionals[{i}]", "reflected-limit supports X and L only")

    out_dir = raw.get("out_dir", "results")
    if not isinstance(out_dir, str) or not out_dir:
        raise ConfigError("out_dir", "expected a path string")
    return ExperimentConfig(kind=kind, K=K, v=v, t_max=t_max, out_dir=out_dir, **out)


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"invalid YAML in {path}: {exc}") from None
    return config_from_dict(raw)
