from __future__ import annotations

import csv
import json
import logging
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Annotated, Any

import typer

from .config import CIS_METHODS, SolverConfig, load_config, save_config
from .core import REMOVED, CandidatePool, TargetSet
from .datagen import NOISE, SynthConfig, gen_synthetic
from .errors import GtpError, ValidationError
from .harness import (
    FORMATS,
    SWEEP_VARS,
    ExperimentConfig,
    load_pool,
    load_targets,
    report_document,
    resolve_targets,
    run_experiment,
    save_pool,
    save_report,
    save_targets,
    write_experiment,
)
from .oracle import brute_cis, brute_cp, brute_gtp
from .solvers.registry import ALGORITHMS, solve
from .utils import format_cost, parse_values

# создаём Typer-приложение
app = typer.Typer(add_completion=False, help="Guided Team-Partitioning: решатели и бенчмарки.")


@contextmanager
def _errors() -> Iterator[None]:
    """GtpError -> JSON {"error": ...} в stderr и код выхода 2."""
    try:
        yield
    except GtpError as e:
        typer.echo(json.dumps({"error": e.to_dict()}, ensure_ascii=False), err=True)
        raise typer.Exit(2) from None


def _solver_config(**overrides: Any) -> SolverConfig:
    return SolverConfig.from_settings(load_config(), **overrides)


def _instance(
    pool: str, targets: str | None, target_method: str | None, k: int | None, seed: int
) -> tuple[CandidatePool, TargetSet]:
    pool_ = load_pool(pool)
    method = target_method or ("file" if targets else "mean")
    if method == "file":
        if targets is None:
            raise ValidationError("target method 'file' needs --targets")
        tgt = load_targets(targets)
        if k is not None and tgt.k != k:
            raise ValidationError(f"targets file has {tgt.k} targets, --k is {k}")
    else:
        if k is None:
            raise ValidationError(f"target method {method!r} needs --k")
        tgt = resolve_targets(method, pool_, k, seed)
    tgt.check_pool(pool_)
    return pool_, tgt


@app.callback()
def main(
    log_level: Annotated[
        str | None, typer.Option(help="DEBUG|INFO|WARNING|ERROR (по умолчанию из конфига)")
    ] = None,
):
    """Логи пишутся в stderr, в stdout идёт только машиночитаемый вывод."""
    level = (log_level or str(load_config().get("log_level", "WARNING"))).upper()
    if not isinstance(logging.getLevelName(level), int):
        typer.secho(f"Unknown log level: {level}", fg=typer.colors.RED, err=True)
        raise typer.Exit(2)
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )


# -------------------- Config --------------------


@app.command("config")
def configure(
    cis_method: Annotated[str | None, typer.Option(help="|".join(CIS_METHODS))] = None,
    workers: Annotated[int | None, typer.Option(help="Потоки для матрицы B / ячеек bench")] = None,
    tol: Annotated[float | None, typer.Option(help="Точность QP-релаксации")] = None,
    max_iter: Annotated[int | None, typer.Option(help="Макс. итераций QP")] = None,
    max_sweeps: Annotated[int | None, typer.Option(help="Макс. проходов MaxBenefit")] = None,
    reps: Annotated[int | None, typer.Option(help="Повторы по умолчанию для bench")] = None,
    log_level: Annotated[str | None, typer.Option(help="Уровень логов по умолчанию")] = None,
):
    """Сохранить параметры по умолчанию в конфиг"""
    with _errors():
        cfg = load_config()
        updates = {
            "cis_method": cis_method,
            "workers": workers,
            "tol": tol,
            "max_iter": max_iter,
            "max_sweeps": max_sweeps,
            "reps": reps,
            "log_level": log_level.upper() if log_level else None,
        }
        cfg.update({key: v for key, v in updates.items() if v is not None})
        # проверяем до записи
        SolverConfig.from_settings(cfg)
        save_config(cfg)
    typer.echo("Saved config.")


# -------------------- Solve --------------------


@app.command("solve")
def cmd_solve(
    pool: Annotated[str, typer.Option(help="CSV пула: id,f1,...,fd")],
    targets: Annotated[str | None, typer.Option(help="CSV целей: t_id,f1,...,fd")] = None,
    k: Annotated[int | None, typer.Option("--k", help="Число команд (без файла целей)")] = None,
    l: Annotated[int, typer.Option("--l", help="Сколько точек удалить")] = 0,
    algo: Annotated[str, typer.Option(help=f"{'|'.join(ALGORITHMS)}")] = "guided_split",
    target_method: Annotated[str | None, typer.Option(help="mean|sample|sobol|file")] = None,
    seed: Annotated[int, typer.Option(help="Seed для случайных алгоритмов/целей")] = 0,
    cis_method: Annotated[str | None, typer.Option(help="|".join(CIS_METHODS))] = None,
    iterate: Annotated[
        bool | None, typer.Option("--iterate/--no-iterate", help="Повторять удаление")
    ] = None,
    workers: Annotated[int | None, typer.Option(help="Потоки для матрицы B")] = None,
    timing: Annotated[bool, typer.Option("--timing/--no-timing", help="Писать время")] = True,
    out: Annotated[str | None, typer.Option(help="JSON-отчёт (иначе stdout)")] = None,
):
    """Решить один экземпляр одним алгоритмом"""
    with _errors():
        pool_, tgt = _instance(pool, targets, target_method, k, seed)
        cfg = _solver_config(cis_method=cis_method, iterate=iterate, workers=workers)
        report = solve(algo, pool_, tgt, l, seed=seed, config=cfg)
        if not timing:
            report.wall_time = 0.0
        echo = {
            "pool": pool,
            "targets": targets,
            "target_method": target_method or ("file" if targets else "mean"),
            "k": tgt.k,
            "l": l,
            "solver": cfg.as_dict(),
        }
        if out:
            save_report(report, out, echo)
            typer.secho(
                f"{algo}: cost {format_cost(report.cost)}, saved {out}", fg=typer.colors.GREEN
            )
        else:
            typer.echo(json.dumps(report_document(report, echo), ensure_ascii=False, indent=2))


# -------------------- Bench --------------------


@app.command("bench")
def cmd_bench(
    values: Annotated[str, typer.Option(help="Значения сетки через запятую, например 0,10,20")],
    sweep: Annotated[str, typer.Option(help=f"Переменная сетки: {'|'.join(SWEEP_VARS)}")] = "l",
    algo: Annotated[
        list[str] | None, typer.Option(help="Алгоритм (можно повторять опцию); по умолчанию все")
    ] = None,
    n: Annotated[int, typer.Option("--n", help="Размер пула")] = 200,
    k: Annotated[int, typer.Option("--k", help="Число команд")] = 4,
    l: Annotated[int, typer.Option("--l", help="Бюджет удалений")] = 20,
    d: Annotated[int, typer.Option("--d", help="Размерность")] = 10,
    sigma: Annotated[float, typer.Option(help="Разброс посаженных команд")] = 0.2,
    target_method: Annotated[
        str, typer.Option(help="planted|mean|sample|sobol|file")
    ] = "planted",
    reps: Annotated[int | None, typer.Option(help="Повторов на ячейку")] = None,
    seed: Annotated[int | None, typer.Option(help="Базовый seed")] = None,
    pool: Annotated[str | None, typer.Option(help="CSV пула вместо синтетики")] = None,
    targets: Annotated[str | None, typer.Option(help="CSV целей (method file)")] = None,
    cis_method: Annotated[str | None, typer.Option(help="|".join(CIS_METHODS))] = None,
    workers: Annotated[int | None, typer.Option(help="Потоки для ячеек")] = None,
    timing: Annotated[bool, typer.Option("--timing/--no-timing", help="Писать время")] = True,
    out: Annotated[str, typer.Option(help="Путь к таблице результатов")] = "results.csv",
    fmt: Annotated[str, typer.Option(help=f"Формат: {'|'.join(FORMATS)}")] = "csv",
):
    """Прогнать сетку экспериментов и выгрузить таблицу + сводку"""
    with _errors():
        settings = load_config()
        cfg = ExperimentConfig(
            algorithms=list(algo) if algo else list(ALGORITHMS),
            sweep_var=sweep,
            sweep_values=parse_values(values),
            n=n,
            k=k,
            l=l,
            d=d,
            sigma=sigma,
            target_method=target_method,
            reps=reps if reps is not None else int(settings["reps"]),
            base_seed=seed if seed is not None else int(settings["base_seed"]),
            out=out,
            pool_path=pool,
            targets_path=targets,
            cis_method=cis_method or str(settings["cis_method"]),
            workers=workers if workers is not None else int(settings["workers"]),
            timing=timing,
        )
        result = run_experiment(cfg, SolverConfig.from_settings(settings))
        paths = write_experiment(result, out, fmt)

    for row in result.summary.itertuples(index=False):
        typer.echo(
            f"{sweep}={row.sweep_value}\t{row.algorithm}\t{format_cost(row.cost_mean)}"
            f"\t{row.reps_ok}/{cfg.reps}"
        )
    typer.secho(
        f"Exported {len(result.rows)} rows to {', '.join(map(str, paths))}",
        fg=typer.colors.GREEN,
    )


# -------------------- Synth --------------------


@app.command("synth")
def cmd_synth(
    k: Annotated[int, typer.Option("--k", help="Число посаженных команд")] = 4,
    m: Annotated[int, typer.Option("--m", help="Точек в команде")] = 50,
    l: Annotated[int, typer.Option("--l", help="Точек шума")] = 20,
    d: Annotated[int, typer.Option("--d", help="Размерность")] = 8,
    sigma: Annotated[float, typer.Option(help="Стандартное отклонение")] = 0.05,
    seed: Annotated[int, typer.Option(help="Seed")] = 0,
    out: Annotated[str, typer.Option(help="Каталог для pool.csv / targets.csv / labels.csv")] = ".",
):
    """Сгенерировать синтетический экземпляр и записать его в файлы"""
    with _errors():
        inst = gen_synthetic(SynthConfig(k=k, m=m, l=l, d=d, sigma=sigma, seed=seed))
        root = Path(out)
        save_pool(inst.pool, root / "pool.csv")
        save_targets(inst.targets, root / "targets.csv")
        with (root / "labels.csv").open("w", encoding="utf-8", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["id", "team"])
            for cid, lab in zip(inst.pool.ids, inst.labels.tolist()):
                w.writerow([cid, "noise" if lab == NOISE else lab + 1])
    typer.secho(f"Wrote n={inst.pool.n} points to {root}", fg=typer.colors.GREEN)


# -------------------- Oracle --------------------


@app.command("oracle")
def cmd_oracle(
    pool: Annotated[str, typer.Option(help="CSV пула")],
    targets: Annotated[str | None, typer.Option(help="CSV целей")] = None,
    k: Annotated[int | None, typer.Option("--k", help="Число команд (без файла целей)")] = None,
    l: Annotated[int, typer.Option("--l", help="Сколько точек удалить")] = 0,
    problem: Annotated[str, typer.Option(help="gtp|cp|cis (cis берёт первую цель)")] = "gtp",
    target_method: Annotated[str | None, typer.Option(help="mean|sample|sobol|file")] = None,
    seed: Annotated[int, typer.Option(help="Seed для --target-method sample")] = 0,
):
    """Точный перебор (только маленькие экземпляры)"""
    with _errors():
        pool_, tgt = _instance(pool, targets, target_method, k, seed)
        doc: dict[str, Any] = {"problem": problem}
        if problem == "cis":
            res = brute_cis(pool_.X, tgt.T[0], l)
            doc.update(optimum=res.optimum, removed_ids=[pool_.ids[i] for i in res.witness])
        elif problem in ("cp", "gtp"):
            res = brute_cp(pool_, tgt) if problem == "cp" else brute_gtp(pool_, tgt, l)

            def named(labels: list[int] | None) -> dict[str, int | str] | None:
                if labels is None:
                    return None
                return {
                    cid: "removed" if lab == REMOVED else lab + 1
                    for cid, lab in zip(pool_.ids, labels)
                }

            doc.update(
                optimum=res.optimum,
                assignment=named(res.witness),
                optimum_nonempty=res.optimum_nonempty,
                assignment_nonempty=named(res.witness_nonempty),
            )
        else:
            raise ValidationError(f"unknown problem {problem!r}; valid: gtp, cp, cis")
        doc["enumerated"] = res.enumerated
    typer.echo(json.dumps(doc, ensure_ascii=False, indent=2))

