from __future__ import annotations

from typing import Any


class GtpError(Exception):
    """Базовая ошибка gtpart; `code` стабилен и попадает в JSON-ответ CLI."""

    code = "error"

    def to_dict(self) -> dict[str, Any]:
        return {"code": self.code, "message": str(self)}


class ValidationError(GtpError, ValueError):
    code = "validation"


class DimensionError(ValidationError):
    code = "dimension"


class BudgetError(ValidationError):
    code = "budget"


class InfeasibleError(GtpError):
    code = "infeasible"


class NumericError(GtpError, ArithmeticError):
    code = "numeric"


class SizeGuardError(GtpError):
    code = "size_guard"


class ParseError(ValidationError):
    code = "parse"

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{where}{message}")
        self.path = path
        self.line = line

    def to_dict(self) -> dict[str, Any]:
        d = super().to_dict()
        d["path"] = self.path
        d["line"] = self.line
        return d


class UnknownAlgorithmError(ValidationError):
    code = "unknown_algorithm"

    def __init__(self, name: str, valid: list[str]):
        super().__init__(f"unknown algorithm {name!r}; valid: {', '.join(valid)}")
        self.name = name
        self.valid = list(valid)

    def to_dict(self) -> dict[str, Any]:
        d = super().to_dict()
        d["valid"] = self.valid
        return d
