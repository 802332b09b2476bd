"""Monte Carlo estimation of building densities.

Every run ``r`` of a batch builds one maximal configuration from the seed
``derive_seed(master_seed, r)``, so a batch is a pure function of
``(dims, runs, master_seed)``.  Workers only split the run indices into
contiguous blocks; the per-run occupancies land in a fixed slot, and all
statistics are computed from that array in run order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from . import budgets
from .builder import PRNG_ID, derive_seed, run_bytes, simulate_occupancy
from .errors import ContractViolation, ResourceError
from .grid import Dims

__all__ = [
    "SimulationPlan",
    "DensityStats",
    "SkippedCell",
    "DensityTable",
    "Comparison",
    "MonotonicityReport",
    "run_batch",
    "run_occupancies",
    "summarize",
    "nearest_rank",
    "density_table",
    "percentile_band_sweep",
    "monotonicity_report",
    "bytes_per_run",
]


@dataclass(frozen=True)
class SimulationPlan:
    dims: Dims
    runs: int
    master_seed: int
    workers: int = 1

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ContractViolation(f"runs must be >= 1, got {self.runs}")
        if self.workers < 1:
            raise ContractViolation(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class DensityStats:
    dims: Dims
    runs: int
    mean_density: float
    std_error: float
    p5: float
    p95: float
    histogram: dict[int, int]
    master_seed: int
    prng: str = PRNG_ID

    @property
    def min_occupancy(self) -> int:
        return min(self.histogram)

    @property
    def max_occupancy(self) -> int:
        return max(self.histogram)

    def as_dict(self) -> dict:
        return {
            "m": self.dims.m,
            "n": self.dims.n,
            "runs": self.runs,
            "seed": self.master_seed,
            "prng": self.prng,
            "mean": self.mean_density,
            "stderr": None if math.isnan(self.std_error) else self.std_error,
            "p5": self.p5,
            "p95": self.p95,
            "histogram": {str(k): v for k, v in self.histogram.items()},
        }


@dataclass(frozen=True)
class SkippedCell:
    dims: Dims
    reason: str


@dataclass(frozen=True)
class DensityTable:
    row_dims: list[int]
    col_dims: list[int]
    cells: dict[tuple[int, int], DensityStats | SkippedCell]
    runs: int
    master_seed: int

    def stats(self, m: int, n: int) -> DensityStats | None:
        cell = self.cells[(m, n)]
        return cell if isinstance(cell, DensityStats) else None

    def means(self) -> dict[tuple[int, int], float | None]:
        return {k: (v.mean_density if isinstance(v, DensityStats) else None) for k, v in self.cells.items()}


def bytes_per_run(dims: Dims) -> int:
    """Working memory of one run (see :func:`settlement.builder.run_bytes`)."""
    return run_bytes(dims)


def nearest_rank(sorted_values: np.ndarray, percent: int) -> float:
    """Nearest-rank percentile: the smallest value with at least ``percent``% of the data at or below it."""
    size = sorted_values.shape[0]
    rank = max(1, -(-percent * size // 100))
    return float(sorted_values[rank - 1])


def _run_block(dims: Dims, master_seed: int, start: int, stop: int, out: np.ndarray) -> None:
    for r in range(start, stop):
        out[r] = simulate_occupancy(dims, derive_seed(master_seed, r))


def run_occupancies(plan: SimulationPlan) -> np.ndarray:
    """Per-run occupancies, indexed by run."""
    need = bytes_per_run(plan.dims) * min(plan.workers, plan.runs)
    budgets.check("memory_bytes", need, f"simulating {plan.dims} with {plan.workers} worker(s)")
    out = np.empty(plan.runs, dtype=np.int64)
    workers = min(plan.workers, plan.runs)
    bounds = [plan.runs * w // workers for w in range(workers + 1)]
    if workers == 1:
        _run_block(plan.dims, plan.master_seed, 0, plan.runs, out)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_block, plan.dims, plan.master_seed, bounds[w], bounds[w + 1], out)
                for w in range(workers)
            ]
            for f in futures:
                f.result()
    return out


def summarize(dims: Dims, occupancies: np.ndarray, master_seed: int) -> DensityStats:
    runs = int(occupancies.shape[0])
    cells = dims.cells
    densities = occupancies / cells
    mean = int(occupancies.sum()) / (runs * cells)
    stderr = float(np.std(densities, ddof=1)) / math.sqrt(runs) if runs > 1 else math.nan
    ordered = np.sort(densities)
    values, counts = np.unique(occupancies, return_counts=True)
    return DensityStats(
        dims=dims,
        runs=runs,
        mean_density=mean,
        std_error=stderr,
        p5=nearest_rank(ordered, 5),
        p95=nearest_rank(ordered, 95),
        histogram={int(k): int(c) for k, c in zip(values, counts)},
        master_seed=master_seed,
    )


def run_batch(plan: SimulationPlan) -> DensityStats:
    return summarize(plan.dims, run_occupancies(plan), plan.master_seed)


def density_table(
    ms: Sequence[int],
    ns: Sequence[int],
    runs: int,
    master_seed: int,
    *,
    workers: int = 1,
) -> DensityTable:
    """One batch per ``(m, n)`` cell, all from the same master seed.

    A cell whose work (``m * n * runs`` lot visits) or memory exceeds its
    budget is kept as a :class:`SkippedCell` instead of being dropped.
    """
    cells: dict[tuple[int, int], DensityStats | SkippedCell] = {}
    max_work = budgets.budget("cell_work")
    for m in ms:
        for n in ns:
            dims = Dims(m, n)
            work = dims.cells * runs
            if work > max_work:
                cells[(m, n)] = SkippedCell(dims, f"work {work} exceeds cell_work budget {max_work}")
                continue
            try:
                cells[(m, n)] = run_batch(SimulationPlan(dims, runs, master_seed, workers))
            except ResourceError as exc:
                cells[(m, n)] = SkippedCell(dims, str(exc))
    return DensityTable(list(ms), list(ns), cells, runs, master_seed)


def percentile_band_sweep(
    fixed: Literal["m", "n", "square"],
    fixed_value: int | None,
    varying: Sequence[int],
    runs: int,
    master_seed: int,
    *,
    workers: int = 1,
) -> list[DensityStats]:
    """Batches along one axis: ``m`` fixed, ``n`` fixed, or ``m == n`` (``fixed_value`` ignored)."""
    out = []
    for v in varying:
        if fixed == "m":
            dims = Dims(fixed_value, v)  # type: ignore[arg-type]
        elif fixed == "n":
            dims = Dims(v, fixed_value)  # type: ignore[arg-type]
        elif fixed == "square":
            dims = Dims(v, v)
        else:
            raise ContractViolation(f"fixed must be 'm', 'n' or 'square', got {fixed!r}")
        out.append(run_batch(SimulationPlan(dims, runs, master_seed, workers)))
    return out


@dataclass(frozen=True)
class Comparison:
    axis: Literal["m", "n"]
    before: Dims
    after: Dims
    difference: float
    std_error: float
    violation: bool


@dataclass(frozen=True)
class MonotonicityReport:
    comparisons: list[Comparison] = field(default_factory=list)
    skipped: list[tuple[Dims, Dims]] = field(default_factory=list)

    @property
    def violations(self) -> list[Comparison]:
        return [c for c in self.comparisons if c.violation]

    @property
    def holds(self) -> bool:
        return not self.violations

    def lines(self) -> list[str]:
        out = [
            f"{c.axis}: {c.before} -> {c.after} diff={c.difference:+.5f} se={c.std_error:.5f}"
            + ("  VIOLATION" if c.violation else "")
            for c in self.comparisons
        ]
        out.append(f"significant increases: {len(self.violations)}")
        return out


def _compare(axis: Literal["m", "n"], a: DensityStats, b: DensityStats, slack: float) -> Comparison:
    diff = b.mean_density - a.mean_density
    se_a = 0.0 if math.isnan(a.std_error) else a.std_error
    se_b = 0.0 if math.isnan(b.std_error) else b.std_error
    se = math.hypot(se_a, se_b)
    return Comparison(axis, a.dims, b.dims, diff, se, diff > slack * se and diff > 0)


def monotonicity_report(table: DensityTable, *, slack: float = 2.0) -> MonotonicityReport:
    """Flag any step to a larger ``m`` or ``n`` whose mean rises by more than ``slack`` standard errors."""
    if len(table.row_dims) < 2 or len(table.col_dims) < 2:
        raise ContractViolation("monotonicity needs at least two rows and two columns")
    comparisons: list[Comparison] = []
    skipped: list[tuple[Dims, Dims]] = []
    pairs: list[tuple[Literal["m", "n"], tuple[int, int], tuple[int, int]]] = []
    for m in table.row_dims:
        pairs += [("n", (m, a), (m, b)) for a, b in zip(table.col_dims, table.col_dims[1:])]
    for n in table.col_dims:
        pairs += [("m", (a, n), (b, n)) for a, b in zip(table.row_dims, table.row_dims[1:])]
    for axis, ka, kb in pairs:
        a, b = table.cells[ka], table.cells[kb]
        if isinstance(a, DensityStats) and isinstance(b, DensityStats):
            comparisons.append(_compare(axis, a, b, slack))
        else:
            skipped.append((Dims(*ka), Dims(*kb)))
    return MonotonicityReport(comparisons, skipped)
