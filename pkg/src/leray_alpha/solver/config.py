"""Run configuration: a single JSON document validated against the shipped schema."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from dataclasses import replace as _replace
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from ..grid import TorusGrid
from ..spectral import W_VARIANTS
from ..symbols import SymbolSpec, registered_g, symbol_from_dict


class ConfigError(ValueError):
    """Invalid configuration; ``path`` is the JSON path of the offending entry."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


@lru_cache(maxsize=1)
def config_schema() -> dict:
    text = resources.files("leray_alpha").joinpath("schema/run_config.schema.json").read_text()
    return json.loads(text)


def _index(v) -> float:
    return math.inf if v == "inf" else float(v)


def _index_json(v: float):
    return "inf" if math.isinf(v) else v


@dataclass(frozen=True)
class SolverConfig:
    """Full description of one run.

    ``a = (s2 - s1) / gamma1`` is the weight exponent of the contraction
    space.  ``refine_start`` splits the first step into that many geometric
    sub-steps so that small-t weights are resolved.
    """

    n: int
    N: int
    T: float
    dt: float
    L: float = 2 * math.pi
    alpha: float = 0.0
    nu: float = 1.0
    L1: SymbolSpec = field(default_factory=lambda: registered_g("constant_one", gamma=2.0))
    L2: SymbolSpec = field(default_factory=lambda: registered_g("constant_one", gamma=1.0))
    s1: float = 0.0
    s2: float = 0.5
    p: float = 2.0
    q: float = 2.0
    w_variant: str = "helmholtz"
    seed: int = 0
    output_every: int = 10
    refine_start: int = 0
    checkpoint_every: int = 0
    rate_checks: bool = False
    initial: dict = field(default_factory=lambda: {"kind": "random_divfree", "sigma": 2.0, "amplitude": 1.0})
    verify: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("$.dt", f"must be > 0, got {self.dt}")
        if not self.T > 0:
            raise ConfigError("$.T", f"must be > 0, got {self.T}")
        if round(self.T / self.dt) < 1:
            raise ConfigError("$.dt", f"step {self.dt} exceeds the horizon {self.T}")
        if not self.nu > 0:
            raise ConfigError("$.nu", f"must be > 0, got {self.nu}")
        if self.alpha < 0:
            raise ConfigError("$.alpha", f"must be >= 0, got {self.alpha}")
        if self.w_variant not in W_VARIANTS:
            raise ConfigError("$.w_variant", f"unknown variant {self.w_variant!r}")
        if self.rate_checks and not self.L1.gamma > 1:
            raise ConfigError("$.L1.gamma", "semigroup rate checks need gamma1 > 1")
        try:
            TorusGrid(self.n, self.N, self.L)
        except ValueError as exc:
            raise ConfigError("$.N", str(exc)) from exc

    @property
    def grid(self) -> TorusGrid:
        return TorusGrid(self.n, self.N, self.L)

    @property
    def a(self) -> float:
        return (self.s2 - self.s1) / self.L1.gamma

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))

    @classmethod
    def from_dict(cls, d: dict) -> SolverConfig:
        try:
            jsonschema.validate(d, config_schema())
        except jsonschema.ValidationError as exc:
            raise ConfigError(exc.json_path, exc.message) from exc
        besov = d.get("besov", {})
        kw = {k: d[k] for k in ("n", "N", "T", "dt", "L", "alpha", "nu", "w_variant", "seed") if k in d}
        kw |= {k: d[k] for k in ("output_every", "refine_start", "checkpoint_every", "rate_checks") if k in d}
        for name in ("L1", "L2"):
            if name in d:
                try:
                    kw[name] = symbol_from_dict(d[name])
                except ValueError as exc:
                    raise ConfigError(f"$.{name}.g", str(exc)) from exc
        for k in ("s1", "s2"):
            if k in besov:
                kw[k] = float(besov[k])
        for k in ("p", "q"):
            if k in besov:
                kw[k] = _index(besov[k])
        if "initial" in d:
            kw["initial"] = dict(d["initial"])
        if "verify" in d:
            kw["verify"] = dict(d["verify"])
        return cls(**kw)

    @classmethod
    def load(cls, path) -> SolverConfig:
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError("$", f"cannot read {path}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError("$", f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "N": self.N,
            "L": self.L,
            "T": self.T,
            "dt": self.dt,
            "alpha": self.alpha,
            "nu": self.nu,
            "L1": self.L1.to_dict(),
            "L2": self.L2.to_dict(),
            "besov": {"s1": self.s1, "s2": self.s2, "p": _index_json(self.p), "q": _index_json(self.q)},
            "w_variant": self.w_variant,
            "seed": self.seed,
            "output_every": self.output_every,
            "refine_start": self.refine_start,
            "checkpoint_every": self.checkpoint_every,
            "rate_checks": self.rate_checks,
            "initial": dict(self.initial),
            "verify": dict(self.verify),
        }

    def replace(self, **changes) -> SolverConfig:
        return _replace(self, **changes)
