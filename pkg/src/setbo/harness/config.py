"""Experiment configuration read from JSON."""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import asdict, dataclass, field
from typing import Any

from ..acquisition import CmaEsConfig, UcbSchedule
from ..boloop import STRATEGIES, BoConfig
from ..kernels import MATERN52, SQUARED_EXPONENTIAL
from ..objectives import OBJECTIVE_PARAMS

KERNEL_FAMILIES = (MATERN52, SQUARED_EXPONENTIAL)


class ConfigError(ValueError):
    """A config problem, with the 1-based line it was found on when known."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)
        self.line = line


_TOP_KEYS = {
    "objective",
    "strategies",
    "L",
    "seeds",
    "budget",
    "n_init",
    "ucb",
    "cma",
    "kernel_family",
    "ard",
    "hyper_restarts",
    "init_noise",
    "scheme_policy",
    "out",
}
_UCB_KEYS = {"form", "value"}
_CMA_KEYS = {"population", "sigma0", "max_iters", "n_init_candidates", "restarts"}


@dataclass
class ExperimentConfig:
    objective: dict[str, Any]
    strategies: list[str] = field(default_factory=lambda: ["set_kernel_bo"])
    L: list[int | None] = field(default_factory=lambda: [None])
    seeds: list[int] = field(default_factory=lambda: [0])
    budget: int = 50
    n_init: int = 5
    ucb: dict[str, Any] = field(default_factory=dict)
    cma: dict[str, Any] = field(default_factory=dict)
    kernel_family: str = "matern52"
    ard: bool = True
    hyper_restarts: int = 3
    init_noise: float = 1e-3
    scheme_policy: str = "per_fit"
    out: str | None = None

    def canonical_json(self) -> str:
        d = asdict(self)
        d.pop("out")  # where results go does not change them
        return json.dumps(d, sort_keys=True, separators=(",", ":"))

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()

    def bo_config(self, strategy: str, L: int | None, seed: int) -> BoConfig:
        return BoConfig(
            budget=self.budget,
            n_init=self.n_init,
            L=L,
            strategy=strategy,
            ucb=UcbSchedule(**self.ucb),
            cma=CmaEsConfig(**self.cma),
            seed=seed,
            kernel_family=self.kernel_family,
            ard=self.ard,
            hyper_restarts=self.hyper_restarts,
            init_noise=self.init_noise,
            scheme_policy=self.scheme_policy,
        )

    def cells(self) -> list[tuple[str, int | None, int]]:
        return [(s, L, seed) for s in self.strategies for L in self.L for seed in self.seeds]


def _key_line(text: str, key: str) -> int | None:
    match = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    if match is None:
        return None
    return text.count("\n", 0, match.start()) + 1


def _check_keys(obj, allowed, text, path, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be a JSON object", _key_line(text, where), path)
    for key in obj:
        if key not in allowed:
            raise ConfigError(
                f"unknown key {key!r} in {where}; allowed: {sorted(allowed)}", _key_line(text, key), path
            )


def parse_config(text: str, path: str | None = None) -> ExperimentConfig:
    """Parse and validate a JSON config; every error names its line."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (column {exc.colno})", exc.lineno, path) from None
    _check_keys(raw, _TOP_KEYS, text, path, "config")
    if "objective" not in raw:
        raise ConfigError("missing required key 'objective'", None, path)
    obj = raw["objective"]
    if not isinstance(obj, dict) or "name" not in obj:
        raise ConfigError("objective must be an object with a 'name'", _key_line(text, "objective"), path)
    if obj["name"] not in OBJECTIVE_PARAMS:
        raise ConfigError(
            f"unknown objective {obj['name']!r}; choose from {sorted(OBJECTIVE_PARAMS)}",
            _key_line(text, "name"),
            path,
        )
    _check_keys(obj, OBJECTIVE_PARAMS[obj["name"]] | {"name"}, text, path, "objective")
    _check_keys(raw.get("ucb", {}), _UCB_KEYS, text, path, "ucb")
    _check_keys(raw.get("cma", {}), _CMA_KEYS, text, path, "cma")

    for key in ("strategies", "L", "seeds"):
        if key in raw and (not isinstance(raw[key], list) or not raw[key]):
            raise ConfigError(f"{key!r} must be a nonempty list", _key_line(text, key), path)
    for s in raw.get("strategies", []):
        if s not in STRATEGIES:
            raise ConfigError(
                f"unknown strategy {s!r}; choose from {list(STRATEGIES)}", _key_line(text, "strategies"), path
            )
    for L in raw.get("L", []):
        if L is not None and (not isinstance(L, int) or isinstance(L, bool) or L < 1):
            raise ConfigError(f"L entries must be positive integers or null, got {L!r}", _key_line(text, "L"), path)
    for s in raw.get("seeds", []):
        if not isinstance(s, int) or isinstance(s, bool):
            raise ConfigError(f"seeds must be integers, got {s!r}", _key_line(text, "seeds"), path)

    if raw.get("kernel_family", "matern52") not in KERNEL_FAMILIES:
        raise ConfigError(
            f"kernel_family must be one of {list(KERNEL_FAMILIES)}", _key_line(text, "kernel_family"), path
        )
    cfg = ExperimentConfig(**raw)
    # surface BoConfig validation errors at config time
    try:
        for strategy, L, seed in cfg.cells():
            cfg.bo_config(strategy, L, seed)
    except (TypeError, ValueError) as exc:
        key = next((k for k in ("budget", "n_init", "L", "ucb", "cma", "scheme_policy") if k in raw), None)
        raise ConfigError(str(exc), _key_line(text, key) if key else None, path) from None
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, str(path))
