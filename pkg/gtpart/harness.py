"""
Файлы пула/целей (CSV), JSON-отчёты и прогон экспериментальных сеток:
sweep_value × алгоритм × повтор, с seed = base_seed + повтор.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from .config import SolverConfig
from .core import CandidatePool, SolveReport, TargetSet
from .datagen import SynthConfig, gen_synthetic, targets_mean, targets_sample, targets_sobol
from .errors import GtpError, ParseError, ValidationError
from .solvers.guided_split import parallel_map
from .solvers.registry import check_algorithm, solve

logger = logging.getLogger("gtpart.harness")

SCHEMA_VERSION = "1"
SWEEP_VARS = ("l", "k", "n")
TARGET_METHODS = ("planted", "mean", "sample", "sobol", "file")
FORMATS = ("csv", "jsonl", "parquet")
ROW_COLUMNS = ["sweep_value", "algorithm", "repetition", "cost", "wall_time_s", "seed", "error"]


# -------------------- CSV: pool / targets --------------------


def _read_text(path: Path) -> str:
    if not path.exists():
        raise ParseError("file not found", path=str(path))
    raw = path.read_bytes()
    try:
        # utf-8-sig снимает BOM, который оставляют выгрузки из Excel
        return raw.decode("utf-8-sig")
    except UnicodeDecodeError as e:
        line = raw[: e.start].count(b"\n") + 1
        raise ParseError("file is not valid UTF-8", path=str(path), line=line) from None


def _read_table(path: str | Path, id_column: str) -> tuple[list[str], np.ndarray]:
    path = Path(path)
    ids: list[str] = []
    rows: list[list[float]] = []
    seen: dict[str, int] = {}
    reader = csv.reader(io.StringIO(_read_text(path), newline=""), strict=True)
    try:
        header = next(reader, None)
        if not header:
            raise ParseError("missing header row", path=str(path), line=1)
        if header[0].strip() != id_column or len(header) < 2:
            raise ParseError(
                f"header must be '{id_column},f1,...,fd', got {','.join(header)!r}",
                path=str(path),
                line=1,
            )
        width = len(header)
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != width:
                raise ParseError(
                    f"expected {width} cells, got {len(row)}", path=str(path), line=line
                )
            cid = row[0].strip()
            if cid in seen:
                raise ParseError(
                    f"duplicate id {cid!r} (first seen at line {seen[cid]})",
                    path=str(path),
                    line=line,
                )
            seen[cid] = line
            try:
                values = [float(c) for c in row[1:]]
            except ValueError:
                raise ParseError("non-numeric cell", path=str(path), line=line) from None
            if not all(math.isfinite(v) for v in values):
                raise ParseError("non-finite cell", path=str(path), line=line)
            ids.append(cid)
            rows.append(values)
    except csv.Error as e:
        raise ParseError(f"malformed CSV: {e}", path=str(path), line=reader.line_num) from None
    if not rows:
        raise ParseError("no data rows", path=str(path))
    return ids, np.array(rows, dtype=np.float64)


def _write_table(path: str | Path, id_column: str, ids: list[str], X: np.ndarray) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow([id_column, *(f"f{j + 1}" for j in range(X.shape[1]))])
        for cid, row in zip(ids, X.tolist()):
            # repr(float) восстанавливает значение бит в бит
            w.writerow([cid, *(repr(v) for v in row)])


def load_pool(path: str | Path) -> CandidatePool:
    ids, X = _read_table(path, "id")
    return CandidatePool(tuple(ids), X)


def save_pool(pool: CandidatePool, path: str | Path) -> None:
    _write_table(path, "id", list(pool.ids), pool.X)


def load_targets(path: str | Path) -> TargetSet:
    _, T = _read_table(path, "t_id")
    return TargetSet(T)


def save_targets(targets: TargetSet, path: str | Path) -> None:
    ids = [f"t{i + 1}" for i in range(targets.k)]
    _write_table(path, "t_id", ids, targets.T)


# -------------------- JSON report --------------------


def report_document(report: SolveReport, config: dict[str, Any] | None = None) -> dict[str, Any]:
    return {"schema_version": SCHEMA_VERSION, **report.to_dict(), "config": config or {}}


def save_report(
    report: SolveReport, path: str | Path, config: dict[str, Any] | None = None
) -> dict[str, Any]:
    doc = report_document(report, config)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    return doc


def load_report(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ParseError(f"cannot read report: {e}", path=str(path)) from None
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ParseError(
            f"unsupported schema_version {doc.get('schema_version')!r}", path=str(path)
        )
    return doc


# -------------------- targets --------------------


def resolve_targets(
    method: str,
    pool: CandidatePool,
    k: int,
    seed: int,
    *,
    planted: TargetSet | None = None,
    path: str | Path | None = None,
) -> TargetSet:
    if method == "planted":
        if planted is None:
            raise ValidationError("target method 'planted' needs a synthetic instance")
        return planted
    if method == "mean":
        return targets_mean(pool, k)
    if method == "sample":
        return targets_sample(pool, k, seed)
    if method == "sobol":
        return targets_sobol(k, pool.d)
    if method == "file":
        if path is None:
            raise ValidationError("target method 'file' needs --targets")
        targets = load_targets(path)
        if targets.k != k:
            raise ValidationError(f"targets file has {targets.k} targets, expected k={k}")
        return targets
    raise ValidationError(f"unknown target method {method!r}; valid: {', '.join(TARGET_METHODS)}")


# -------------------- experiments --------------------


@dataclass(frozen=True)
class ExperimentConfig:
    algorithms: list[str]
    sweep_var: str = "l"
    sweep_values: list[int] = field(default_factory=lambda: [0])
    n: int = 200
    k: int = 4
    l: int = 20
    d: int = 10
    sigma: float = 0.2
    target_method: str = "planted"
    reps: int = 25
    base_seed: int = 0
    out: str | None = None
    pool_path: str | None = None
    targets_path: str | None = None
    cis_method: str = "cvx"
    workers: int = 1
    timing: bool = True

    def __post_init__(self) -> None:
        if not self.algorithms:
            raise ValidationError("at least one algorithm is required")
        for name in self.algorithms:
            check_algorithm(name)
        if self.sweep_var not in SWEEP_VARS:
            raise ValidationError(f"sweep variable must be one of {', '.join(SWEEP_VARS)}")
        if not self.sweep_values:
            raise ValidationError("sweep values must not be empty")
        if self.reps < 1:
            raise ValidationError("reps must be >= 1")
        if self.target_method not in TARGET_METHODS:
            raise ValidationError(
                f"unknown target method {self.target_method!r}; valid: {', '.join(TARGET_METHODS)}"
            )
        if self.pool_path is not None:
            if self.sweep_var == "n":
                raise ValidationError("cannot sweep n over a fixed pool file")
            if self.target_method == "planted":
                raise ValidationError("target method 'planted' needs a synthetic pool")
        if self.target_method == "file" and self.targets_path is None:
            raise ValidationError("target method 'file' needs a targets path")
        if self.d < 1 or self.sigma < 0:
            raise ValidationError("need d >= 1 and sigma >= 0")
        if self.workers < 1:
            raise ValidationError("workers must be >= 1")
        # для файла пула допустимость считается по его реальному размеру
        pool_n = load_pool(self.pool_path).n if self.pool_path is not None else None
        for v in self.sweep_values:
            n, k, l = self.params(v)
            n = pool_n if pool_n is not None else n
            low = 0 if self.sweep_var == "l" else 1
            if v < low:
                raise ValidationError(f"sweep value {v} for {self.sweep_var} must be >= {low}")
            if k < 1 or l < 0 or k > n - l:
                raise ValidationError(f"infeasible sweep value {v}: n={n}, k={k}, l={l}")

    def params(self, value: int) -> tuple[int, int, int]:
        """(n, k, l) для значения сетки."""
        n, k, l = self.n, self.k, self.l
        if self.sweep_var == "n":
            n = value
        elif self.sweep_var == "k":
            k = value
        else:
            l = value
        return n, k, l


@dataclass
class ExperimentResult:
    rows: pd.DataFrame
    summary: pd.DataFrame


def _instance(
    config: ExperimentConfig,
    value: int,
    seed: int,
    pool: CandidatePool | None,
) -> tuple[CandidatePool, TargetSet, int]:
    n, k, l = config.params(value)
    planted = None
    if pool is None:
        synth = gen_synthetic(
            SynthConfig(k=k, m=(n - l) // k, l=l, d=config.d, sigma=config.sigma, seed=seed)
        )
        pool, planted = synth.pool, synth.targets
    targets = resolve_targets(
        config.target_method, pool, k, seed, planted=planted, path=config.targets_path
    )
    return pool, targets, l


def _run_job(
    config: ExperimentConfig,
    solver_config: SolverConfig,
    pool: CandidatePool | None,
    job: tuple[int, int],
) -> list[dict[str, Any]]:
    value, rep = job
    seed = config.base_seed + rep
    rows = []
    failure = ""
    inst_pool = targets = None
    l = 0
    try:
        inst_pool, targets, l = _instance(config, value, seed, pool)
    except GtpError as e:
        logger.error("instance %s=%s rep %d: %s", config.sweep_var, value, rep, e)
        failure = str(e)
    for name in config.algorithms:
        row = {
            "sweep_value": value,
            "algorithm": name,
            "repetition": rep,
            "cost": float("nan"),
            "wall_time_s": 0.0,
            "seed": seed,
            "error": "",
        }
        if inst_pool is None:
            row["error"] = failure
        else:
            try:
                report = solve(name, inst_pool, targets, l, seed=seed, config=solver_config)
                row["cost"] = report.cost
                row["wall_time_s"] = report.wall_time if config.timing else 0.0
            except GtpError as e:
                logger.error("%s at %s=%s rep %d: %s", name, config.sweep_var, value, rep, e)
                row["error"] = str(e)
        rows.append(row)
    logger.info("cell %s=%s rep %d done", config.sweep_var, value, rep)
    return rows


def summarize(rows: pd.DataFrame) -> pd.DataFrame:
    """Среднее по повторам для каждой пары (sweep_value, algorithm); ошибки не усредняются."""
    return (
        rows.groupby(["sweep_value", "algorithm"], sort=True)
        .agg(
            cost_mean=("cost", "mean"),
            wall_time_mean=("wall_time_s", "mean"),
            reps_ok=("cost", "count"),
            errors=("error", lambda s: int((s != "").sum())),
        )
        .reset_index()
    )


def run_experiment(
    config: ExperimentConfig, solver_config: SolverConfig | None = None
) -> ExperimentResult:
    solver_config = solver_config or SolverConfig(cis_method=config.cis_method)
    # параллелим ячейки, а не матрицу выигрышей внутри решателя
    solver_config = solver_config.with_(cis_method=config.cis_method, workers=1)
    pool = load_pool(config.pool_path) if config.pool_path else None
    jobs = [(v, rep) for v in config.sweep_values for rep in range(config.reps)]
    logger.info("experiment: %d cells x %d algorithms", len(jobs), len(config.algorithms))
    chunks = parallel_map(
        lambda job: _run_job(config, solver_config, pool, job), jobs, config.workers
    )
    rows = pd.DataFrame([r for chunk in chunks for r in chunk], columns=ROW_COLUMNS)
    rows = rows.sort_values(
        ["sweep_value", "algorithm", "repetition"], kind="mergesort"
    ).reset_index(drop=True)
    return ExperimentResult(rows, summarize(rows))


def summary_path(out: str | Path) -> Path:
    out = Path(out)
    return out.with_name(f"{out.stem}_summary{out.suffix}")


def write_table(df: pd.DataFrame, path: str | Path, fmt: str = "csv") -> Path:
    fmt = fmt.lower()
    if fmt not in FORMATS:
        raise ValidationError(f"unknown format {fmt!r}; valid: {', '.join(FORMATS)}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "jsonl":
        records = [
            {key: None if isinstance(v, float) and math.isnan(v) else v for key, v in r.items()}
            for r in df.to_dict("records")
        ]
        path.write_text(
            "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records), encoding="utf-8"
        )
    elif fmt == "parquet":
        try:
            df.to_parquet(path, index=False)
        except ImportError:
            raise ValidationError(
                "Parquet export needs pyarrow: pip install 'gtpart[parquet]'"
            ) from None
    else:
        df.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path


def write_experiment(result: ExperimentResult, out: str | Path, fmt: str = "csv") -> list[Path]:
    return [
        write_table(result.rows, out, fmt),
        write_table(result.summary, summary_path(out), fmt),
    ]
