"""Experiment configuration: validation, key=value files, flag merging."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from ..errors import ConfigurationError
from ..solver import DEFAULT_MAX_ITERS

__all__ = ["ExperimentConfig", "TrackConfig", "read_config_file", "ESTIMATORS", "STOP_RULES"]

ESTIMATORS = ("RK", "RC", "MLE")
STOP_RULES = ("rel-change", "dw", "topk", "none")


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigurationError(msg)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce a synthetic experiment.

    ``k`` may list several per-edge comparison counts; each trial then runs
    every estimator once per ``k`` on the same graph.
    """

    n: int = 400
    p: float = 0.16
    graph_file: str | None = None
    k: tuple[int, ...] = (100,)
    epsilon: float = 0.0
    estimators: tuple[str, ...] = ("RK",)
    lam: float = 0.0
    stop: str = "rel-change"
    stop_window: int = 500
    stop_tol: float = 1e-7
    stop_k: int = 20
    stop_m: int = 50
    max_iters: int = DEFAULT_MAX_ITERS
    trials: int = 1
    seed: int = 0
    warm_start: bool = False
    workers: int = 1
    out: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "k", tuple(int(v) for v in _as_tuple(self.k)))
        object.__setattr__(self, "estimators", tuple(str(e).upper() for e in _as_tuple(self.estimators)))
        if self.graph_file is None:
            _require(self.n >= 2, f"n must be at least 2, got {self.n}")
            _require(0.0 < self.p <= 1.0, f"p must lie in (0, 1], got {self.p}")
        _require(len(self.k) > 0 and all(v >= 1 for v in self.k), f"k must be positive, got {self.k}")
        _require(math.isfinite(self.epsilon) and self.epsilon >= 0, f"epsilon must be >= 0, got {self.epsilon}")
        _require(len(self.estimators) > 0, "at least one estimator is required")
        for e in self.estimators:
            _require(e in ESTIMATORS, f"unknown estimator {e!r}; choose from {', '.join(ESTIMATORS)}")
        _require(self.lam >= 0, f"lambda must be >= 0, got {self.lam}")
        _require(self.stop in STOP_RULES, f"unknown stopping rule {self.stop!r}; choose from {', '.join(STOP_RULES)}")
        _require(self.stop_window >= 1, f"stop-window must be >= 1, got {self.stop_window}")
        _require(self.stop_tol >= 0, f"stop-tol must be >= 0, got {self.stop_tol}")
        _require(1 <= self.stop_k <= self.stop_m, f"need 1 <= stop-k <= stop-m, got {self.stop_k}, {self.stop_m}")
        _require(self.max_iters >= 1, f"max-iters must be >= 1, got {self.max_iters}")
        _require(self.trials >= 1, f"trials must be >= 1, got {self.trials}")
        _require(self.seed >= 0, f"seed must be >= 0, got {self.seed}")
        _require(self.workers >= 1, f"workers must be >= 1, got {self.workers}")

    def as_dict(self) -> dict[str, Any]:
        """Experiment parameters; ``workers`` and ``out`` are left out since they do not affect results."""
        d = dataclasses.asdict(self)
        del d["workers"], d["out"]
        d["k"] = list(self.k)
        d["estimators"] = list(self.estimators)
        return d


@dataclass(frozen=True)
class TrackConfig:
    """Drift scenario for the tracking variant.

    True log-weights start at ``log 10^{i/n}`` and every node takes an
    independent ``N(0, sigma²)`` step after each event.
    """

    n: int = 50
    p: float = 0.3
    events: int = 20_000
    sigma: float = 0.0
    c: float = 0.05
    endpoint: str = "min"
    epsilon: float = 0.5
    seed: int = 0
    out: str | None = None

    def __post_init__(self) -> None:
        _require(self.n >= 2, f"n must be at least 2, got {self.n}")
        _require(0.0 < self.p <= 1.0, f"p must lie in (0, 1], got {self.p}")
        _require(self.events >= 1, f"events must be >= 1, got {self.events}")
        _require(math.isfinite(self.sigma) and self.sigma >= 0, f"sigma must be >= 0, got {self.sigma}")
        _require(0.0 <= self.c <= 1.0, f"step size c must lie in [0, 1], got {self.c}")
        _require(self.endpoint in ("min", "max", "random"), f"unknown endpoint rule {self.endpoint!r}")
        _require(self.epsilon > 0, "tracking needs epsilon > 0: tallies start empty")
        _require(self.seed >= 0, f"seed must be >= 0, got {self.seed}")

    def as_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


def _as_tuple(v: Any) -> tuple:
    if isinstance(v, str):
        return tuple(s.strip() for s in v.split(",") if s.strip())
    if isinstance(v, (list, tuple)):
        return tuple(v)
    return (v,)


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment, dashes in keys become underscores."""
    out: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigurationError(f"{path}:{lineno}: empty key")
        out[key.lstrip("-").replace("-", "_")] = value
    return out
