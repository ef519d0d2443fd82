"""Scenario reports and their byte-stable JSON form."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

SCHEMA = 1

EXIT_OK = 0
EXIT_FAIL = 2
EXIT_ERROR = 3

VERDICTS = ("pass", "fail", "expected-failure", "error")


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, **self.detail}


@dataclass
class ScenarioReport:
    """Outcome of one scenario run.

    The verdict is ``pass`` when every level and every check passed. Scenarios that
    exhibit a failure on purpose set ``expected_failure``; for them the checks confirm the
    failure and a confirmed run reports ``expected-failure``.
    """

    scenario: str
    params: dict
    seed: int
    levels: list = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    expected_failure: bool = False
    error: str | None = None
    wall_time: float | None = None
    version: str = ""

    @property
    def passed(self) -> bool:
        return (self.error is None and all(lv.get("passed", False) for lv in self.levels)
                and all(c.passed for c in self.checks))

    @property
    def verdict(self) -> str:
        if self.error is not None:
            return "error"
        if not self.passed:
            return "fail"
        return "expected-failure" if self.expected_failure else "pass"

    @property
    def exit_code(self) -> int:
        return {"pass": EXIT_OK, "expected-failure": EXIT_OK, "fail": EXIT_FAIL}.get(self.verdict, EXIT_ERROR)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "netdiag_version": self.version,
            "scenario": self.scenario,
            "seed": self.seed,
            "params": dict(self.params),
            "levels": list(self.levels),
            "checks": [c.to_dict() for c in self.checks],
            "expected_failure": self.expected_failure,
            "passed": self.passed,
            "verdict": self.verdict,
            "error": self.error,
            "wall_time": self.wall_time,
        }


def format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    return format(x, ".17g")


def to_json(obj: Any, indent: int = 2) -> str:
    """JSON text with every float written with 17 significant digits.

    The standard encoder writes the shortest round-tripping form, which is not a fixed
    precision, so floats are formatted here; everything else goes through ``json``.
    """
    def emit(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, bool) or o is None or isinstance(o, (str, int)):
            return json.dumps(o)
        if isinstance(o, float):
            return format_float(o)
        if isinstance(o, Fraction):
            return json.dumps(str(o))
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(str(k))}: {emit(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, (list, tuple)):
            if not o:
                return "[]"
            return "[\n" + ",\n".join(pad + emit(v, level + 1) for v in o) + "\n" + end + "]"
        raise TypeError(f"cannot serialise {type(o).__name__}")

    return emit(obj, 0) + "\n"
