from __future__ import annotations

import json
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Any


def _jsonable(x: Any) -> Any:
    from .algebra import Polynomial, to_wire_obj

    if isinstance(x, Polynomial):
        return to_wire_obj(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return str(x)
    if hasattr(x, "item") and callable(x.item):  # numpy scalar
        return x.item()
    return x


@dataclass
class Report:
    """Outcome of a symbolic or numeric check.

    ``passed`` is ``None`` for exploratory probes that assert nothing.
    """

    check: str
    inputs: dict[str, Any] = field(default_factory=dict)
    lhs: Any = None
    rhs: Any = None
    ratio: float | None = None
    rel_error: float | None = None
    passed: bool | None = None
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        out = {
            "check": self.check,
            "inputs": _jsonable(self.inputs),
            "lhs": _jsonable(self.lhs),
            "rhs": _jsonable(self.rhs),
            "ratio": _jsonable(self.ratio),
            "rel_error": _jsonable(self.rel_error),
            "pass": self.passed,
        }
        if self.details:
            out["details"] = _jsonable(self.details)
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def summary(self) -> str:
        status = {True: "PASS", False: "FAIL", None: "INFO"}[self.passed]
        parts = [f"[{status}] {self.check}"]
        if self.inputs:
            parts.append(" ".join(f"{k}={v}" for k, v in self.inputs.items()))
        if self.rel_error is not None:
            parts.append(f"rel_error={self.rel_error:.3e}")
        if self.ratio is not None:
            parts.append(f"ratio={self.ratio:.6g}")
        return "  ".join(parts)
