"""Check records and deterministic report emission."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional


@dataclass
class CheckRecord:
    name: str
    reference: str
    value: float
    tolerance: Optional[float]
    passed: bool
    detail: str = ""


@dataclass
class SuiteResult:
    suite: str
    checks: list = field(default_factory=list)
    csv_files: dict = field(default_factory=dict)  # filename -> list of rows (first is header)

    def check(
        self,
        name: str,
        reference: str,
        value: float,
        tolerance: Optional[float] = None,
        passed: Optional[bool] = None,
        detail: str = "",
    ) -> CheckRecord:
        if passed is None:
            if tolerance is None:
                raise ValueError("either a tolerance or an explicit verdict is required")
            passed = bool(value <= tolerance)
        rec = CheckRecord(
            name=name,
            reference=reference,
            value=float(value),
            tolerance=None if tolerance is None else float(tolerance),
            passed=bool(passed),
            detail=detail,
        )
        self.checks.append(rec)
        return rec

    def extend(self, other: "SuiteResult") -> None:
        self.checks.extend(other.checks)
        self.csv_files.update(other.csv_files)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def first_failure(self) -> Optional[CheckRecord]:
        for c in self.checks:
            if not c.passed:
                return c
        return None


def summary_dict(result: SuiteResult, config_echo: dict) -> dict:
    return {
        "suite": result.suite,
        "config": config_echo,
        "counts": {
            "total": len(result.checks),
            "passed": sum(1 for c in result.checks if c.passed),
            "failed": sum(1 for c in result.checks if not c.passed),
        },
        "all_passed": result.all_passed,
        "checks": [
            {
                "name": c.name,
                "reference": c.reference,
                "value": c.value,
                "tolerance": c.tolerance,
                "passed": c.passed,
                "detail": c.detail,
            }
            for c in result.checks
        ],
    }


def emit(result: SuiteResult, config_echo: dict, out_dir: str) -> str:
    """Write summary.json plus any CSV series; byte-stable for a fixed
    configuration and seed (no timestamps, sorted keys, repr floats)."""
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "summary.json")
    payload = summary_dict(result, config_echo)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for fname, rows in sorted(result.csv_files.items()):
        with open(os.path.join(out_dir, fname), "w") as fh:
            for row in rows:
                fh.write(",".join(str(v) for v in row) + "\n")
    return path
