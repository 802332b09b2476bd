"""Default resource budgets, overridable through environment variables."""

from __future__ import annotations

import os

from .errors import ResourceError

# name -> (environment variable, default)
_DEFAULTS: dict[str, tuple[str, int]] = {
    "subset_cells": ("SETTLEMENT_SUBSET_MAX_CELLS", 30),
    "backtrack_cells": ("SETTLEMENT_BACKTRACK_MAX_CELLS", 42),
    "census_cells": ("SETTLEMENT_CENSUS_MAX_CELLS", 12),
    "memory_bytes": ("SETTLEMENT_MEMORY_BUDGET_BYTES", 256 * 1024 * 1024),
    "cell_work": ("SETTLEMENT_MAX_CELL_WORK", 2_000_000_000),
}


def budget(name: str) -> int:
    env, default = _DEFAULTS[name]
    raw = os.environ.get(env)
    if raw is None or raw == "":
        return default
    return int(raw)


def env_var(name: str) -> str:
    return _DEFAULTS[name][0]


def check(name: str, requested: int, what: str) -> None:
    limit = budget(name)
    if requested > limit:
        raise ResourceError(
            f"{what}: requested {requested} exceeds the {name} budget of {limit} "
            f"(override with {env_var(name)})",
            budget=name,
            limit=limit,
            requested=requested,
        )
