from __future__ import annotations

import hashlib
from typing import Dict, Optional


def build_run_id(scenario_text: str, seed: int) -> str:
    digest = hashlib.sha256(f"{seed}\n{scenario_text}".encode("utf-8")).hexdigest()
    return digest[:16]


def build_run_context(
    scenario_text: str, seed: int, check: Optional[str] = None
) -> Dict[str, object]:
    context: Dict[str, object] = {"run_id": build_run_id(scenario_text, seed), "seed": seed}
    if check:
        context["check"] = check
    return context
