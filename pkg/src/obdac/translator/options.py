"""Compilation toggles."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, fields


@dataclass(frozen=True)
class CompileOptions:
    structural: bool = True
    semantic_keys: bool = True
    exact_predicates: bool = True
    vfd: bool = True
    cte_mode: bool = False
    explain: bool = False
    branch_budget: int = 512

    def __post_init__(self):
        if self.cte_mode and not self.vfd:
            raise ValueError("cte_mode requires vfd")
        if self.branch_budget < 1:
            raise ValueError("branch_budget must be positive")

    @classmethod
    def none(cls) -> "CompileOptions":
        """Every optimization off: the raw unfolding."""
        return cls(structural=False, semantic_keys=False, exact_predicates=False, vfd=False)

    def label(self) -> str:
        on = [f.name for f in fields(self) if f.type in ("bool", bool) and getattr(self, f.name)
              and f.name != "explain"]
        return "+".join(on) or "none"


TOGGLES = ("structural", "semantic_keys", "exact_predicates", "vfd", "cte_mode")


def all_option_combinations() -> list[CompileOptions]:
    """Every valid assignment of the optimization toggles (cte_mode needs vfd)."""
    out = []
    for bits in itertools.product((False, True), repeat=len(TOGGLES)):
        kw = dict(zip(TOGGLES, bits))
        if kw["cte_mode"] and not kw["vfd"]:
            continue
        out.append(CompileOptions(**kw))
    return out

