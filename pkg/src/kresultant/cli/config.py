"""Experiment configuration: a YAML mapping, validated field by field."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from ..errors import ConfigInvalid, KResultantError
from ..field import DEFAULT_MAX_Q, is_prime
from ..lattice import max_points
from ..numeric import DEFAULT_TOL

CHECKS = (
    "identities", "lemma_audit", "r41", "moments", "L3.2", "L3.3", "realaim",
    "holder", "extension_constant", "sharpness", "sign_sweep",
)

# placeholders available in set specs: {p} {n} {q} {d} {N}=q^d {seed}
DEFAULT_CORPUS = (
    "random_density(0.05, seed={seed})",
    "random_density(0.1, seed={seed})",
    "random_density(0.25, seed={seed})",
    "random_density(0.5, seed={seed})",
    "random({q}, seed={seed})",
    "subfield()",
    "sphere_cap(1, 5)",
    "sphere_cap(1)",
    "sphere_cap(0)",
    "affine([1])",
    "affine([{q}], shift=1)",
    "affine([1, {q}])",
    "explicit([0])",
    "explicit([1])",
    "full()",
)

ACCEPTANCE_GRID = (
    (3, 1, 2), (5, 1, 2), (7, 1, 2), (3, 2, 2),
    (3, 1, 4), (5, 1, 4), (7, 1, 4), (3, 2, 4),
    (3, 1, 6), (3, 1, 8),
)


@dataclass
class ExperimentConfig:
    grid: list[tuple[int, int, int]]
    k_values: list[int] = field(default_factory=lambda: [2, 3, 4])
    set_specs: list[str] = field(default_factory=lambda: list(DEFAULT_CORPUS))
    seeds: list[int] = field(default_factory=lambda: [0])
    checks: list[str] = field(default_factory=lambda: list(CHECKS))
    tolerance: float = DEFAULT_TOL
    csv_path: str = "report.csv"
    json_path: str = "report.json"
    workers: int = 1
    extension_trials: int = 50
    dual_sum_samples: int = 1000

    def __post_init__(self):
        self.grid = [tuple(g) for g in self.grid]

    def to_dict(self) -> dict:
        out = asdict(self)
        out["grid"] = [list(g) for g in self.grid]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigInvalid("config must be a mapping")
        unknown = sorted(set(data) - set(cls.__dataclass_fields__))
        if unknown:
            raise ConfigInvalid([f"unknown field {u!r}" for u in unknown])
        if "grid" not in data:
            raise ConfigInvalid("grid: required")
        try:
            cfg = cls(**data)
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(str(exc)) from None
        cfg.validate()
        return cfg

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @classmethod
    def loads(cls, text: str) -> "ExperimentConfig":
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigInvalid(f"not valid YAML: {exc}") from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        return cls.loads(Path(path).read_text())

    def validate(self) -> None:
        problems = []
        for i, g in enumerate(self.grid):
            if len(g) != 3 or not all(isinstance(v, int) for v in g):
                problems.append(f"grid[{i}]: expected [p, n, d] integers, got {list(g)}")
                continue
            p, n, d = g
            if p == 2:
                problems.append(f"grid[{i}]: CharTwo: characteristic 2 is not supported")
            elif not is_prime(p):
                problems.append(f"grid[{i}]: NotPrime: {p} is not prime")
            elif n < 1 or d < 2:
                problems.append(f"grid[{i}]: need n >= 1 and d >= 2")
            elif p**n > DEFAULT_MAX_Q:
                problems.append(f"grid[{i}]: TooLarge: q = {p**n} exceeds {DEFAULT_MAX_Q}")
            elif p ** (n * d) > max_points():
                problems.append(f"grid[{i}]: TooLarge: q^d = {p**(n*d)} exceeds {max_points()}")
        if not self.grid:
            problems.append("grid: empty")
        if not self.k_values or any(not isinstance(k, int) or k < 2 for k in self.k_values):
            problems.append(f"k_values: need integers >= 2, got {self.k_values}")
        if any(not isinstance(s, int) or s < 0 for s in self.seeds) or not self.seeds:
            problems.append(f"seeds: need non-negative integers, got {self.seeds}")
        bad = [c for c in self.checks if c not in CHECKS]
        if bad:
            problems.append(f"checks: unknown {bad}; expected a subset of {list(CHECKS)}")
        if not isinstance(self.set_specs, list) or not all(isinstance(s, str) for s in self.set_specs):
            problems.append("set_specs: need a list of generator strings")
        if not (isinstance(self.tolerance, (int, float)) and self.tolerance > 0):
            problems.append(f"tolerance: need a positive number, got {self.tolerance}")
        if not isinstance(self.workers, int) or self.workers < 1:
            problems.append(f"workers: need an integer >= 1, got {self.workers}")
        if not isinstance(self.extension_trials, int) or self.extension_trials < 1:
            problems.append("extension_trials: need an integer >= 1")
        if not isinstance(self.dual_sum_samples, int) or self.dual_sum_samples < 1:
            problems.append("dual_sum_samples: need an integer >= 1")
        if problems:
            raise ConfigInvalid(problems)


PRESETS = {
    "acceptance": lambda: ExperimentConfig(grid=list(ACCEPTANCE_GRID), seeds=[0, 1, 2, 3, 4]),
    "smoke": lambda: ExperimentConfig(grid=[(3, 1, 2), (3, 1, 4)], k_values=[2, 3]),
}


def preset(name: str) -> ExperimentConfig:
    try:
        cfg = PRESETS[name]()
    except KeyError:
        raise ConfigInvalid(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}") from None
    cfg.validate()
    return cfg


def expand_specs(cfg: ExperimentConfig, p: int, n: int, d: int) -> list[str]:
    """Concrete set specs for one grid point, in config order, deduplicated."""
    q = p**n
    out: list[str] = []
    for spec in cfg.set_specs:
        seeds = cfg.seeds if "{seed}" in spec else [cfg.seeds[0]]
        for seed in seeds:
            try:
                concrete = spec.format(p=p, n=n, q=q, d=d, N=q**d, seed=seed)
            except (KeyError, IndexError, ValueError) as exc:
                raise ConfigInvalid(f"set spec {spec!r}: bad placeholder {exc}") from None
            if concrete not in out:
                out.append(concrete)
    return out


__all__ = ["ExperimentConfig", "CHECKS", "DEFAULT_CORPUS", "ACCEPTANCE_GRID", "preset",
           "expand_specs", "KResultantError"]
