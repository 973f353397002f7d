from __future__ import annotations

import time
from collections.abc import Iterator
from contextlib import contextmanager

from .errors import ValidationError


def format_cost(cost: float | None) -> str:
    if cost is None or cost != cost:
        return "n/a"
    if cost == 0:
        return "0"
    if abs(cost) < 1e-4 or abs(cost) >= 1e6:
        return f"{cost:.6e}"
    return f"{cost:.6f}"


def team_sizes(total: int, k: int) -> list[int]:
    """
    Размеры k команд из `total` точек: floor(total/k),
    остаток раздаётся первым командам по одной точке.
    """
    if k < 1 or total < k:
        raise ValidationError(f"cannot form {k} non-empty teams from {total} points")
    base, extra = divmod(total, k)
    return [base + (1 if i < extra else 0) for i in range(k)]


def parse_values(raw: str) -> list[int]:
    """'2,4,8' -> [2, 4, 8]"""
    out: list[int] = []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            out.append(int(part))
        except ValueError:
            raise ValidationError(f"not an integer: {part!r}") from None
    if not out:
        raise ValidationError("empty value list")
    return out


@contextmanager
def stopwatch() -> Iterator[list[float]]:
    """`with stopwatch() as t: ...`; после выхода t[0] содержит секунды."""
    box = [0.0]
    start = time.perf_counter()
    try:
        yield box
    finally:
        box[0] = time.perf_counter() - start
