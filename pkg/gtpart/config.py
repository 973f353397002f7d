from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any

from .errors import ValidationError

CONFIG_PATH = Path(
    os.getenv("GTPART_CONFIG") or Path(os.path.expanduser("~")) / ".gtpart" / "config.json"
)

CIS_METHODS = ("cvx", "greedy")

DEFAULTS: dict[str, Any] = {
    "cis_method": "cvx",
    "tol": 1e-7,
    "max_iter": 5000,
    "max_sweeps": 100,
    "epsilon": 1e-9,
    "iterate": False,
    "workers": 1,
    "reps": 25,
    "base_seed": 0,
    "log_level": "WARNING",
}

# переменная окружения -> (ключ, приведение типа)
ENV_KEYS: dict[str, tuple[str, Any]] = {
    "GTPART_CIS_METHOD": ("cis_method", str),
    "GTPART_WORKERS": ("workers", int),
    "GTPART_TOL": ("tol", float),
    "GTPART_MAX_ITER": ("max_iter", int),
    "GTPART_MAX_SWEEPS": ("max_sweeps", int),
    "GTPART_LOG_LEVEL": ("log_level", str),
}


def ensure_config_dir() -> None:
    CONFIG_PATH.parent.mkdir(parents=True, exist_ok=True)
    if not CONFIG_PATH.exists():
        CONFIG_PATH.write_text(json.dumps(DEFAULTS, ensure_ascii=False, indent=2), encoding="utf-8")


def load_config() -> dict[str, Any]:
    ensure_config_dir()
    try:
        data = json.loads(CONFIG_PATH.read_text(encoding="utf-8"))
    except Exception:
        data = {}
    merged = {**DEFAULTS, **data}
    # ENV overlay (приоритетнее файла)
    for env, (key, cast) in ENV_KEYS.items():
        raw = os.getenv(env)
        if raw:
            try:
                merged[key] = cast(raw)
            except ValueError:
                raise ValidationError(f"{env}={raw!r} is not a valid {cast.__name__}") from None
    return merged


def save_config(cfg: dict[str, Any]) -> None:
    ensure_config_dir()
    CONFIG_PATH.write_text(json.dumps(cfg, ensure_ascii=False, indent=2), encoding="utf-8")


@dataclass(frozen=True)
class SolverConfig:
    """Параметры решателей; один объект на запуск, не разделяется между потоками."""

    cis_method: str = "cvx"
    tol: float = 1e-7
    max_iter: int = 5000
    max_sweeps: int = 100
    epsilon: float = 1e-9
    iterate: bool = False
    workers: int = 1

    def __post_init__(self) -> None:
        if self.cis_method not in CIS_METHODS:
            raise ValidationError(
                f"cis_method must be one of {', '.join(CIS_METHODS)}, got {self.cis_method!r}"
            )
        if self.tol <= 0:
            raise ValidationError("tol must be > 0")
        if self.max_iter < 1 or self.max_sweeps < 1:
            raise ValidationError("max_iter and max_sweeps must be >= 1")
        if self.workers < 1:
            raise ValidationError("workers must be >= 1")

    @classmethod
    def from_settings(
        cls, settings: dict[str, Any] | None = None, **overrides: Any
    ) -> SolverConfig:
        src = {**DEFAULTS, **(settings or {})}
        known = {f.name for f in fields(cls)}
        kwargs = {k: v for k, v in src.items() if k in known}
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kwargs)

    def with_(self, **changes: Any) -> SolverConfig:
        return replace(self, **changes)

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)
