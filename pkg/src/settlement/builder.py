"""Sequential building: from a permutation of lots to a maximal configuration.

Lots are visited in the order of a permutation.  A house is built on the
visited lot if the configuration stays permissible, otherwise the lot is
rejected for good.  After all ``m * n`` lots the built set is maximal; the
map from permutations to these final configurations is exposed as
:func:`build_from_permutation`.

Random permutations come from numpy's ``Generator(PCG64)`` shuffle
(Fisher-Yates).  Grids of at least ``STREAM_THRESHOLD`` lots never
materialise the whole ordering: lots are drawn uniformly with rejection of
already processed ones until only an eighth remain, and that remainder is
shuffled.  Both give a uniformly random ordering; which one is used depends
only on the grid size, so results stay a function of ``(dims, seed)``.  A 64-bit seed is expanded with ``numpy.random.SeedSequence``;
run ``r`` of a batch uses the seed ``derive_seed(master_seed, r)``, which
mixes the run index into the master seed through ``SeedSequence`` spawn keys.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import ContractViolation
from .grid import Config, Dims, Lot, _can_build_at

__all__ = [
    "PRNG_ID",
    "Permutation",
    "BuildState",
    "BuildOutcome",
    "try_build",
    "build_from_permutation",
    "trace_build",
    "simulate_one",
    "simulate_occupancy",
    "random_order",
    "derive_seed",
    "STREAM_THRESHOLD",
    "run_bytes",
    "mirror_permutation",
    "format_permutation",
    "parse_permutation",
]

PRNG_ID = f"numpy-{np.__version__}/PCG64+SeedSequence"

_SEED_LIMIT = 1 << 64

STREAM_THRESHOLD = 1 << 24
_DRAW_CHUNK = 1 << 20


def _index_dtype(cells: int) -> type:
    return np.int32 if cells < (1 << 31) else np.int64


class Permutation:
    """An ordering of all ``m * n`` lots, each exactly once."""

    __slots__ = ("dims", "indices")

    def __init__(self, dims: Dims, order: Iterable[tuple[int, int]]):
        idx = [dims.index(lot) for lot in order]
        self.dims = dims
        self.indices = self._validated(dims, np.asarray(idx, dtype=np.int64))

    @staticmethod
    def _validated(dims: Dims, indices: np.ndarray) -> np.ndarray:
        if indices.ndim != 1 or indices.shape[0] != dims.cells:
            raise ContractViolation(f"a permutation of a {dims} grid needs {dims.cells} lots, got {indices.size}")
        if dims.cells and (indices.min() < 0 or indices.max() >= dims.cells):
            raise ContractViolation("permutation contains a lot outside the grid")
        seen = np.zeros(dims.cells, dtype=bool)
        seen[indices] = True
        if not seen.all():
            raise ContractViolation("permutation repeats a lot")
        indices = indices.astype(_index_dtype(dims.cells), copy=False)
        indices.setflags(write=False)
        return indices

    @classmethod
    def from_indices(cls, dims: Dims, indices: Sequence[int] | np.ndarray) -> Permutation:
        self = cls.__new__(cls)
        self.dims = dims
        self.indices = cls._validated(dims, np.array(indices, dtype=np.int64))
        return self

    @classmethod
    def row_major(cls, dims: Dims) -> Permutation:
        return cls.from_indices(dims, np.arange(dims.cells))

    @property
    def order(self) -> list[Lot]:
        n = self.dims.n
        return [Lot(int(k) // n + 1, int(k) % n + 1) for k in self.indices]

    def __len__(self) -> int:
        return self.dims.cells

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.indices, other.indices)

    def __repr__(self) -> str:
        return f"Permutation({self.dims}, {[tuple(l) for l in self.order]})"


@dataclass(frozen=True)
class BuildOutcome:
    lot: Lot
    accepted: bool
    step: int


@dataclass
class BuildState:
    """Built and rejected lots after ``step`` lots have been tried.

    Single-owner and mutated in place by :func:`try_build`.
    """

    dims: Dims
    step: int = 0
    rejected: set[Lot] = field(default_factory=set)
    _grid: np.ndarray = field(init=False, repr=False)
    _count: int = field(init=False, default=0, repr=False)

    def __post_init__(self) -> None:
        self._grid = np.zeros((self.dims.m, self.dims.n), dtype=bool)

    @property
    def built(self) -> Config:
        return Config._wrap(self.dims, self._grid.copy())

    @property
    def occupancy(self) -> int:
        return self._count

    def processed(self, lot: tuple[int, int]) -> bool:
        i, j = lot
        return bool(self._grid[i - 1, j - 1]) or Lot(i, j) in self.rejected


def try_build(state: BuildState, lot: tuple[int, int]) -> BuildOutcome:
    """Attempt to build on ``lot``; the state advances by one step either way."""
    lot = state.dims.check_lot(lot)
    if state.step >= state.dims.cells:
        raise ContractViolation("every lot has already been processed")
    if state.processed(lot):
        raise ContractViolation(f"lot {tuple(lot)} was already processed")
    r, c = lot.i - 1, lot.j - 1
    accepted = _can_build_at(state._grid, r, c)
    if accepted:
        state._grid[r, c] = True
        state._count += 1
    else:
        state.rejected.add(lot)
    state.step += 1
    return BuildOutcome(lot, accepted, state.step)


def _build_indices(dims: Dims, indices: np.ndarray) -> tuple[np.ndarray, int]:
    grid = np.zeros(dims.cells, dtype=np.uint8)
    count = _kernels.build_order(indices, dims.m, dims.n, grid)
    return grid, int(count)


def build_from_permutation(perm: Permutation) -> Config:
    """The maximal configuration reached by building along ``perm``."""
    grid, _ = _build_indices(perm.dims, perm.indices)
    return Config._wrap(perm.dims, grid.view(bool).reshape(perm.dims.m, perm.dims.n))


def trace_build(perm: Permutation) -> list[BuildOutcome]:
    dims = perm.dims
    grid = np.zeros(dims.cells, dtype=np.uint8)
    accepted = np.zeros(dims.cells, dtype=np.uint8)
    _kernels.build_trace(perm.indices, dims.m, dims.n, grid, accepted)
    n = dims.n
    return [
        BuildOutcome(Lot(int(k) // n + 1, int(k) % n + 1), bool(a), step)
        for step, (k, a) in enumerate(zip(perm.indices, accepted), start=1)
    ]


def _check_seed(seed: int) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ContractViolation(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed < _SEED_LIMIT:
        raise ContractViolation(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def derive_seed(master_seed: int, run_index: int) -> int:
    """Per-run 64-bit seed; depends only on ``(master_seed, run_index)``."""
    ss = np.random.SeedSequence(_check_seed(master_seed), spawn_key=(int(run_index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(_check_seed(seed))))


def random_order(dims: Dims, seed: int) -> np.ndarray:
    """Uniformly random ordering of flat lot indices, reproducible from ``seed``."""
    order = np.arange(dims.cells, dtype=_index_dtype(dims.cells))
    _rng(seed).shuffle(order)
    return order


def _streams(dims: Dims) -> bool:
    return dims.cells >= STREAM_THRESHOLD


def run_bytes(dims: Dims) -> int:
    """Working memory of one simulated run."""
    index_bytes = np.dtype(_index_dtype(dims.cells)).itemsize
    if not _streams(dims):
        return dims.cells * (index_bytes + 1)
    tail = dims.cells - dims.cells * 7 // 8
    return dims.cells + (dims.cells + 7) // 8 + tail * index_bytes + _DRAW_CHUNK * 8


def _build_streaming(dims: Dims, seed: int) -> tuple[np.ndarray, int]:
    rng = _rng(seed)
    cells = dims.cells
    grid = np.zeros(cells, dtype=np.uint8)
    processed = np.zeros((cells + 7) // 8, dtype=np.uint8)
    target = cells * 7 // 8
    done = count = 0
    while done < target:
        draws = rng.integers(0, cells, size=_DRAW_CHUNK, dtype=np.int64)
        done, added, _ = _kernels.build_draws(draws, dims.m, dims.n, grid, processed, done, target)
        count += added
    rest = np.empty(cells - done, dtype=_index_dtype(cells))
    _kernels.unprocessed_lots(processed, cells, rest)
    del processed
    rng.shuffle(rest)
    count += _kernels.build_order(rest, dims.m, dims.n, grid)
    return grid, int(count)


def _simulate(dims: Dims, seed: int) -> tuple[np.ndarray, int]:
    if _streams(dims):
        return _build_streaming(dims, seed)
    return _build_indices(dims, random_order(dims, seed))


def simulate_one(dims: Dims, seed: int) -> Config:
    grid, _ = _simulate(dims, seed)
    return Config._wrap(dims, grid.view(bool).reshape(dims.m, dims.n))


def simulate_occupancy(dims: Dims, seed: int) -> int:
    """Occupancy of :func:`simulate_one` without materialising the Config."""
    return _simulate(dims, seed)[1]


def mirror_permutation(perm: Permutation) -> Permutation:
    n = perm.dims.n
    idx = perm.indices.astype(np.int64)
    rows, cols = np.divmod(idx, n)
    return Permutation.from_indices(perm.dims, rows * n + (n - 1 - cols))


def format_permutation(perm: Permutation) -> str:
    lines = [f"{perm.dims.m} {perm.dims.n}"]
    lines.extend(f"{lot.i} {lot.j}" for lot in perm.order)
    return "\n".join(lines) + "\n"


def parse_permutation(text: str) -> Permutation:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ContractViolation("empty permutation text")
    try:
        m, n = (int(x) for x in lines[0].split())
        lots = [tuple(int(x) for x in ln.split()) for ln in lines[1:]]
    except ValueError:
        raise ContractViolation("permutation lines must hold two integers each") from None
    if any(len(lot) != 2 for lot in lots):
        raise ContractViolation("permutation lines must hold two integers each")
    return Permutation(Dims(m, n), lots)  # type: ignore[arg-type]
