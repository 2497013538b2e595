from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from app.config import Config
from app.constants import VERDICT_FAIL
from app.gsets import GSet
from app.perm_groups import Group


@dataclass
class Scenario:
    group_spec: str
    gset_spec: str
    group: Group
    gset: GSet
    checks: List[str]
    guards: Dict[str, int] = field(default_factory=dict)
    name: str = "scenario"
    text: str = ""

    def echo(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "group": self.group_spec,
            "group_order": self.group.order,
            "gset": self.gset_spec,
            "gset_size": self.gset.size,
            "orbits": self.gset.describe(),
            "checks": list(self.checks),
            "guards": dict(sorted(self.guards.items())),
        }


@dataclass
class CheckResult:
    name: str
    verdict: str
    anchor: str
    payload: Dict[str, Any] = field(default_factory=dict)
    reason: Optional[str] = None
    seconds: Optional[float] = None

    def as_payload(self, timing: bool = False) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "name": self.name,
            "verdict": self.verdict,
            "anchor": self.anchor,
            "payload": self.payload,
        }
        if self.reason:
            out["reason"] = self.reason
        if timing and self.seconds is not None:
            out["seconds"] = round(self.seconds, 3)
        return out


@dataclass
class CheckJob:
    scenario: Scenario
    check: str
    config: Config
    run_context: Dict[str, Any] = field(default_factory=dict)


@dataclass
class Report:
    scenario: Scenario
    results: List[CheckResult]
    seed: int

    @property
    def failed(self) -> Tuple[CheckResult, ...]:
        return tuple(r for r in self.results if r.verdict == VERDICT_FAIL)

    @property
    def exit_code(self) -> int:
        return 1 if self.failed else 0
