"""Report containers shared by the axiom, continuation and HSC checks."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

MAX_LISTED_VIOLATIONS = 25


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    return obj


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, fixed indentation)."""
    return json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n"


def config_hash(cfg) -> str:
    canon = json.dumps(jsonable(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


@dataclass
class AxiomReport:
    axiom: str
    n: int
    alpha: float
    points_checked: int = 0
    violations: list[dict[str, Any]] = field(default_factory=list)
    violation_count: int = 0
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violation_count == 0

    def add_violation(self, momenta, value, reason: str) -> None:
        self.violation_count += 1
        if len(self.violations) < MAX_LISTED_VIOLATIONS:
            self.violations.append({
                "momenta": np.asarray(momenta).tolist(),
                "value": float(value),
                "reason": reason,
            })

    def to_dict(self) -> dict[str, Any]:
        return {
            "axiom": self.axiom,
            "n": self.n,
            "alpha": self.alpha,
            "points_checked": self.points_checked,
            "violation_count": self.violation_count,
            "passed": self.passed,
            "violations": self.violations,
            "details": self.details,
        }
