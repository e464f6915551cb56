"""Residual reports shared by the verifiers and the command-line tools."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np


def _plain(value):
    """Convert numpy and complex values into JSON-friendly ones."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


@dataclass
class ResidualReport:
    """Named residuals checked against per-entry tolerances.

    Parameters
    ----------
    name : str
        What was verified (e.g. ``"space_fractional_cauchy"``).
    residuals : dict
        Entry name to maximum residual.
    tolerances : dict
        Entry name to tolerance; entries without a tolerance are informational.
    metadata : dict
        Parameters and grid information echoed into the JSON form.
    """

    name: str
    residuals: dict[str, float] = field(default_factory=dict)
    tolerances: dict[str, float] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)

    def add(self, key: str, value: float, tol: float | None = None) -> None:
        self.residuals[key] = float(value)
        if tol is not None:
            self.tolerances[key] = float(tol)

    def check(self, key: str) -> bool | None:
        if key not in self.tolerances:
            return None
        value = self.residuals[key]
        return bool(math.isfinite(value) and value <= self.tolerances[key])

    @property
    def passed(self) -> bool:
        return all(self.check(k) is not False for k in self.residuals)

    def to_dict(self) -> dict:
        rows = []
        for key, value in self.residuals.items():
            rows.append({"check": key, "residual": value, "tolerance": self.tolerances.get(key), "passed": self.check(key)})
        return _plain({"name": self.name, "passed": self.passed, "checks": rows, "metadata": self.metadata})

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def table(self) -> str:
        """Human-readable fixed-width table."""
        lines = [f"[{'PASS' if self.passed else 'FAIL'}] {self.name}"]
        for key, value in self.residuals.items():
            tol = self.tolerances.get(key)
            mark = {True: "ok", False: "FAIL", None: "--"}[self.check(key)]
            tol_s = f"{tol:.1e}" if tol is not None else "-"
            lines.append(f"    {key:<40s} {value:12.3e}  tol {tol_s:>8s}  {mark}")
        return "\n".join(lines)
