"""Exact small-grid combinatorics.

* all maximal configurations of a grid, by brute force over every subset or by
  backtracking over lots in row-major order;
* the occupancy law when a maximal configuration is drawn uniformly;
* the preimage census: how many of the ``(mn)!`` orderings build each maximal
  configuration, and the occupancy law that induces;
* a check that the most-built configurations are efficient (maximum
  occupancy) and the least-built are inefficient (minimum occupancy).
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal

import numpy as np

from . import _kernels, budgets
from .errors import ContractViolation, ResourceError
from .grid import Config, Dims, _blocked_at, _can_build_at, is_maximal

__all__ = [
    "EnumerationResult",
    "PreimageCensus",
    "OccupancyDistribution",
    "Conjecture1Report",
    "enumerate_maximal",
    "xu_distribution",
    "count_preimages",
    "xs_distribution_exact",
    "conjecture1_report",
    "canonical_key",
]

Method = Literal["auto", "subset", "backtrack"]

# counts are tallied in a dense array indexed by the packed grid
_CENSUS_HARD_LIMIT = 20


def canonical_key(config: Config) -> tuple[int, str]:
    """Sort key: occupancy descending, then the row-major 0/1 string."""
    return (-config.count, config.key())


@dataclass(frozen=True)
class EnumerationResult:
    dims: Dims
    configs: list[Config]
    occupancy_spectrum: dict[int, int]

    @property
    def max_occupancy(self) -> int:
        return max(self.occupancy_spectrum)

    @property
    def min_occupancy(self) -> int:
        return min(self.occupancy_spectrum)

    def __len__(self) -> int:
        return len(self.configs)


@dataclass(frozen=True)
class OccupancyDistribution:
    """Probability mass over occupancy ``k``; the density is ``k / (m * n)``."""

    dims: Dims
    pmf: dict[int, Fraction]
    kind: Literal["uniform-model", "sequential-model", "empirical"]

    def mean_occupancy(self) -> Fraction:
        return sum((k * p for k, p in self.pmf.items()), Fraction(0))

    def mean_density(self) -> Fraction:
        return self.mean_occupancy() / self.dims.cells

    def support(self) -> list[int]:
        return sorted(k for k, p in self.pmf.items() if p)


@dataclass(frozen=True)
class PreimageCensus:
    dims: Dims
    counts: dict[Config, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def sorted_items(self) -> list[tuple[Config, int]]:
        return sorted(self.counts.items(), key=lambda kv: canonical_key(kv[0]))


def _finish(dims: Dims, configs: list[Config]) -> EnumerationResult:
    configs = sorted(configs, key=canonical_key)
    spectrum = dict(sorted(Counter(c.count for c in configs).items()))
    return EnumerationResult(dims, configs, spectrum)


def _enumerate_subset(dims: Dims) -> list[Config]:
    budgets.check("subset_cells", dims.cells, f"subset enumeration of {dims}")
    if dims.cells > 62:
        raise ResourceError("subset enumeration is limited to 62 lots", budget="subset_cells",
                            limit=62, requested=dims.cells)
    masks = _kernels.subset_maximal_masks(dims.m, dims.n)
    return [Config.from_mask(dims, int(mask)) for mask in masks]


def _enumerate_backtrack(dims: Dims) -> list[Config]:
    budgets.check("backtrack_cells", dims.cells, f"backtracking enumeration of {dims}")
    m, n = dims.m, dims.n
    grid = np.zeros((m, n), dtype=bool)
    found: list[Config] = []

    def last_index(cells: list[tuple[int, int]]) -> int:
        return max(r * n + c for r, c in cells if 0 <= r < m and 0 <= c < n)

    # after lot k is decided, these houses' blocked status and these lots'
    # buildability are final and can be checked
    houses_due: list[list[tuple[int, int]]] = [[] for _ in range(m * n)]
    lots_due: list[list[tuple[int, int]]] = [[] for _ in range(m * n)]
    for r in range(m):
        for c in range(n):
            houses_due[last_index([(r, c), (r, c - 1), (r, c + 1), (r + 1, c)])].append((r, c))
            lots_due[last_index([
                (r, c), (r, c - 1), (r, c + 1), (r, c - 2), (r, c + 2),
                (r + 1, c - 1), (r + 1, c), (r + 1, c + 1),
                (r - 1, c - 1), (r - 1, c), (r - 1, c + 1),
            ])].append((r, c))

    def consistent(k: int) -> bool:
        for r, c in houses_due[k]:
            if grid[r, c] and _blocked_at(grid, r, c):
                return False
        for r, c in lots_due[k]:
            if not grid[r, c] and _can_build_at(grid, r, c):
                return False
        return True

    def place(k: int) -> None:
        if k == m * n:
            config = Config(dims, grid)
            if is_maximal(config):
                found.append(config)
            return
        r, c = divmod(k, n)
        for value in (True, False):
            grid[r, c] = value
            if consistent(k):
                place(k + 1)
        grid[r, c] = False

    place(0)
    return found


def enumerate_maximal(dims: Dims, method: Method = "auto") -> EnumerationResult:
    """Every maximal configuration of ``dims``, in canonical order."""
    if method == "subset":
        configs = _enumerate_subset(dims)
    elif method in ("backtrack", "auto"):
        configs = _enumerate_backtrack(dims)
    else:
        raise ContractViolation(f"unknown enumeration method {method!r}")
    return _finish(dims, configs)


def xu_distribution(dims: Dims, method: Method = "auto") -> OccupancyDistribution:
    """Occupancy law of a uniformly drawn maximal configuration."""
    result = enumerate_maximal(dims, method)
    total = len(result)
    pmf = {k: Fraction(v, total) for k, v in result.occupancy_spectrum.items()}
    return OccupancyDistribution(dims, pmf, "uniform-model")


def _unrank(rank: int, size: int) -> np.ndarray:
    # lexicographic rank -> permutation of range(size), via the factorial number system
    items = list(range(size))
    out = []
    for pos in range(size, 0, -1):
        f = math.factorial(pos - 1)
        q, rank = divmod(rank, f)
        out.append(items.pop(q))
    return np.array(out, dtype=np.int64)


def _census_shard(dims: Dims, start: int, stop: int) -> np.ndarray:
    counts = np.zeros(1 << dims.cells, dtype=np.int64)
    perm = _unrank(start, dims.cells)
    done = _kernels.census_range(perm, stop - start, dims.m, dims.n, counts)
    if done != stop - start:
        raise RuntimeError(f"census shard [{start}, {stop}) stopped after {done} permutations")
    return counts


def count_preimages(dims: Dims, *, shards: int = 1, workers: int = 1) -> PreimageCensus:
    """Push every ordering of the lots through the builder and tally the results.

    The ``(mn)!`` orderings are split into ``shards`` contiguous ranges of
    lexicographic rank; shard tallies are merged by exact addition, so the
    result does not depend on ``shards`` or ``workers``.
    """
    budgets.check("census_cells", dims.cells, f"preimage census of {dims}")
    if dims.cells > _CENSUS_HARD_LIMIT:
        raise ResourceError(f"preimage census is limited to {_CENSUS_HARD_LIMIT} lots",
                            budget="census_cells", limit=_CENSUS_HARD_LIMIT, requested=dims.cells)
    if shards < 1 or workers < 1:
        raise ContractViolation("shards and workers must be positive")
    total = math.factorial(dims.cells)
    shards = min(shards, total)
    bounds = [total * s // shards for s in range(shards + 1)]
    ranges = [(bounds[s], bounds[s + 1]) for s in range(shards)]
    if workers == 1:
        parts = [_census_shard(dims, a, b) for a, b in ranges]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ab: _census_shard(dims, *ab), ranges))
    merged = parts[0]
    for part in parts[1:]:
        merged = merged + part
    counts = {Config.from_mask(dims, int(mask)): int(merged[mask]) for mask in np.flatnonzero(merged)}
    return PreimageCensus(dims, counts)


def xs_distribution_exact(dims: Dims, census: PreimageCensus | None = None) -> OccupancyDistribution:
    """Exact occupancy law of the builder driven by a uniform random ordering."""
    if census is None:
        census = count_preimages(dims)
    by_k: Counter[int] = Counter()
    for config, count in census.counts.items():
        by_k[config.count] += count
    total = math.factorial(dims.cells)
    pmf = {k: Fraction(v, total) for k, v in sorted(by_k.items())}
    return OccupancyDistribution(dims, pmf, "sequential-model")


@dataclass(frozen=True)
class Conjecture1Report:
    dims: Dims
    max_occupancy: int
    min_occupancy: int
    max_count: int
    min_count: int
    most_built: list[Config] = field(default_factory=list)
    least_built: list[Config] = field(default_factory=list)

    @property
    def most_built_efficient(self) -> list[bool]:
        return [c.count == self.max_occupancy for c in self.most_built]

    @property
    def least_built_inefficient(self) -> list[bool]:
        return [c.count == self.min_occupancy for c in self.least_built]

    @property
    def holds(self) -> bool:
        return all(self.most_built_efficient) and all(self.least_built_inefficient)

    def lines(self) -> list[str]:
        out = [
            f"grid {self.dims}: occupancy range [{self.min_occupancy}, {self.max_occupancy}]",
            f"most built ({self.max_count} orderings each):",
        ]
        out += [f"  {c.key()} occupancy={c.count} efficient={e}"
                for c, e in zip(self.most_built, self.most_built_efficient)]
        out.append(f"least built ({self.min_count} orderings each):")
        out += [f"  {c.key()} occupancy={c.count} inefficient={e}"
                for c, e in zip(self.least_built, self.least_built_inefficient)]
        out.append(f"holds: {self.holds}")
        return out


def conjecture1_report(
    dims: Dims,
    census: PreimageCensus | None = None,
    enumeration: EnumerationResult | None = None,
) -> Conjecture1Report:
    """Are the most-built configurations efficient and the least-built inefficient?

    Efficiency is judged against the occupancy range of the enumerated set of
    maximal configurations, which is computed independently of the census.
    """
    if census is None:
        census = count_preimages(dims)
    if enumeration is None:
        enumeration = enumerate_maximal(dims)
    hi = max(census.counts.values())
    lo = min(census.counts.values())
    items = census.sorted_items()
    return Conjecture1Report(
        dims=dims,
        max_occupancy=enumeration.max_occupancy,
        min_occupancy=enumeration.min_occupancy,
        max_count=hi,
        min_count=lo,
        most_built=[c for c, v in items if v == hi],
        least_built=[c for c, v in items if v == lo],
    )
