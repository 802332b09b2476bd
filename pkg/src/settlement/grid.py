"""Grid geometry, configurations and the sunlight predicates.

Lots are addressed 1-based as ``(i, j)``: row ``i`` counts from the north edge,
column ``j`` from the west edge, and the southern neighbour of ``(i, j)`` is
``(i + 1, j)``.  Internally the occupancy grid is a row-major 0-based numpy
array, so lot ``(i, j)`` lives at ``occupied[i - 1, j - 1]`` and at flat index
``(i - 1) * n + (j - 1)``.

A house is blocked when the lots to its west, east and south all exist and are
occupied.  Lots on the south edge or on the east/west edges are never blocked.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple

import numpy as np

from .errors import ContractViolation

__all__ = [
    "Dims",
    "Lot",
    "Config",
    "Density",
    "is_blocked",
    "is_permissible",
    "can_build",
    "is_maximal",
    "occupancy",
    "density",
    "mirror_ew",
    "render_ascii",
    "format_config",
    "parse_config",
    "blocked_lots",
    "buildable_lots",
]


@dataclass(frozen=True, order=True)
class Dims:
    """Grid size: ``m`` rows (north to south) by ``n`` columns (west to east)."""

    m: int
    n: int

    def __post_init__(self) -> None:
        for name in ("m", "n"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ContractViolation(f"{name} must be an integer, got {value!r}")
            if value < 1:
                raise ContractViolation(f"{name} must be >= 1, got {value}")
            object.__setattr__(self, name, int(value))
        if self.m * self.n > sys.maxsize:
            raise ContractViolation(f"grid {self.m}x{self.n} has more lots than fit in an index")

    @property
    def cells(self) -> int:
        return self.m * self.n

    def __str__(self) -> str:
        return f"{self.m}x{self.n}"

    def lots(self) -> Iterable[Lot]:
        """All lots in row-major order."""
        for i in range(1, self.m + 1):
            for j in range(1, self.n + 1):
                yield Lot(i, j)

    def contains(self, lot: tuple[int, int]) -> bool:
        i, j = lot
        return 1 <= i <= self.m and 1 <= j <= self.n

    def index(self, lot: tuple[int, int]) -> int:
        """Flat row-major index of ``lot``."""
        i, j = self.check_lot(lot)
        return (i - 1) * self.n + (j - 1)

    def lot_at(self, index: int) -> Lot:
        if not 0 <= index < self.cells:
            raise ContractViolation(f"flat index {index} outside a {self} grid")
        q, r = divmod(int(index), self.n)
        return Lot(q + 1, r + 1)

    def check_lot(self, lot: tuple[int, int]) -> Lot:
        try:
            i, j = lot
        except (TypeError, ValueError):
            raise ContractViolation(f"not a lot: {lot!r}") from None
        if not self.contains((i, j)):
            raise ContractViolation(f"lot ({i}, {j}) is outside the {self} grid")
        return Lot(int(i), int(j))


class Lot(NamedTuple):
    i: int
    j: int


class Density(NamedTuple):
    """Unreduced building density ``occupancy / (m * n)``."""

    numerator: int
    denominator: int

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __float__(self) -> float:
        return self.numerator / self.denominator

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"


class Config:
    """An immutable set of occupied lots on a grid.

    Equality and hashing go by ``(dims, occupied cells)``.
    """

    __slots__ = ("dims", "_occ", "count", "_hash")

    def __init__(self, dims: Dims, occupied: np.ndarray | Iterable[Iterable[int]]):
        arr = np.array(occupied, dtype=bool, copy=True)
        if arr.shape != (dims.m, dims.n):
            raise ContractViolation(f"occupancy grid has shape {arr.shape}, expected {(dims.m, dims.n)}")
        arr.setflags(write=False)
        self.dims = dims
        self._occ = arr
        self.count = int(arr.sum())
        self._hash: int | None = None

    @classmethod
    def _wrap(cls, dims: Dims, arr: np.ndarray) -> Config:
        # arr must already be a private bool array of the right shape
        self = cls.__new__(cls)
        arr.setflags(write=False)
        self.dims = dims
        self._occ = arr
        self.count = int(np.count_nonzero(arr))
        self._hash = None
        return self

    @classmethod
    def empty(cls, dims: Dims) -> Config:
        return cls._wrap(dims, np.zeros((dims.m, dims.n), dtype=bool))

    @classmethod
    def full(cls, dims: Dims) -> Config:
        return cls._wrap(dims, np.ones((dims.m, dims.n), dtype=bool))

    @classmethod
    def from_lots(cls, dims: Dims, lots: Iterable[tuple[int, int]]) -> Config:
        arr = np.zeros((dims.m, dims.n), dtype=bool)
        for lot in lots:
            i, j = dims.check_lot(lot)
            arr[i - 1, j - 1] = True
        return cls._wrap(dims, arr)

    @classmethod
    def from_mask(cls, dims: Dims, mask: int) -> Config:
        """Inverse of :meth:`to_mask`."""
        if mask < 0 or mask >> dims.cells:
            raise ContractViolation(f"mask {mask} has bits outside a {dims} grid")
        bits = [(mask >> k) & 1 for k in range(dims.cells)]
        return cls._wrap(dims, np.array(bits, dtype=bool).reshape(dims.m, dims.n))

    @classmethod
    def from_ascii(cls, text: str, dims: Dims | None = None) -> Config:
        """Parse the ``#``/``.`` rendering produced by :func:`render_ascii`."""
        rows = [r for r in text.strip().splitlines()] if text.strip() else []
        if dims is None:
            if not rows:
                raise ContractViolation("empty rendering")
            dims = Dims(len(rows), len(rows[0]))
        if len(rows) != dims.m:
            raise ContractViolation(f"expected {dims.m} rows, got {len(rows)}")
        arr = np.zeros((dims.m, dims.n), dtype=bool)
        for r, row in enumerate(rows):
            row = row.rstrip("\r")
            if len(row) != dims.n:
                raise ContractViolation(f"row {r + 1} has {len(row)} characters, expected {dims.n}")
            for c, ch in enumerate(row):
                if ch == "#":
                    arr[r, c] = True
                elif ch != ".":
                    raise ContractViolation(f"unexpected character {ch!r} in row {r + 1}")
        return cls._wrap(dims, arr)

    @property
    def occupied(self) -> np.ndarray:
        """Read-only ``(m, n)`` boolean view."""
        return self._occ

    def __contains__(self, lot: object) -> bool:
        try:
            i, j = lot  # type: ignore[misc]
        except (TypeError, ValueError):
            return False
        return self.dims.contains((i, j)) and bool(self._occ[i - 1, j - 1])

    def lots(self) -> list[Lot]:
        rows, cols = np.nonzero(self._occ)
        return [Lot(int(r) + 1, int(c) + 1) for r, c in zip(rows, cols)]

    def recount(self) -> int:
        return int(np.count_nonzero(self._occ))

    def to_mask(self) -> int:
        """Pack the grid into an int: bit ``k`` is the lot at flat row-major index ``k``."""
        flat = np.flatnonzero(self._occ.ravel())
        return sum(1 << int(k) for k in flat)

    def key(self) -> str:
        """Row-major 0/1 string, handy as a CSV column."""
        return "".join("1" if b else "0" for b in self._occ.ravel())

    def with_lot(self, lot: tuple[int, int]) -> Config:
        i, j = self.dims.check_lot(lot)
        arr = self._occ.copy()
        arr[i - 1, j - 1] = True
        return Config._wrap(self.dims, arr)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Config):
            return NotImplemented
        return self.dims == other.dims and self.count == other.count and np.array_equal(self._occ, other._occ)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.dims, np.packbits(self._occ).tobytes()))
        return self._hash

    def __repr__(self) -> str:
        return f"Config({self.dims}, {render_ascii(self).replace(chr(10), '/')!r})"


def _occ_at(occ: np.ndarray, r: int, c: int) -> bool:
    # 0-based read that treats anything off the grid as empty
    return 0 <= r < occ.shape[0] and 0 <= c < occ.shape[1] and bool(occ[r, c])


def _blocked_at(occ: np.ndarray, r: int, c: int) -> bool:
    return _occ_at(occ, r, c - 1) and _occ_at(occ, r, c + 1) and _occ_at(occ, r + 1, c)


def _can_build_at(occ: np.ndarray, r: int, c: int) -> bool:
    # occ is assumed permissible and (r, c) empty
    if _blocked_at(occ, r, c):
        return False
    # west house: would gain its east neighbour
    if _occ_at(occ, r, c - 1) and _occ_at(occ, r, c - 2) and _occ_at(occ, r + 1, c - 1):
        return False
    # east house: would gain its west neighbour
    if _occ_at(occ, r, c + 1) and _occ_at(occ, r, c + 2) and _occ_at(occ, r + 1, c + 1):
        return False
    # north house: would gain its south neighbour
    if _occ_at(occ, r - 1, c) and _occ_at(occ, r - 1, c - 1) and _occ_at(occ, r - 1, c + 1):
        return False
    return True


def is_blocked(config: Config, lot: tuple[int, int]) -> bool:
    """Would a house on ``lot`` be blocked from sunlight?  The lot need not be occupied."""
    i, j = config.dims.check_lot(lot)
    return _blocked_at(config._occ, i - 1, j - 1)


def _padded(occ: np.ndarray, width: int = 2) -> np.ndarray:
    return np.pad(occ, width, mode="constant", constant_values=False)


def blocked_lots(config: Config) -> np.ndarray:
    """Boolean ``(m, n)`` array: lots where a house would be blocked."""
    p = _padded(config._occ, 1)
    return p[1:-1, :-2] & p[1:-1, 2:] & p[2:, 1:-1]


def is_permissible(config: Config) -> bool:
    return not bool(np.any(blocked_lots(config) & config._occ))


def buildable_lots(config: Config) -> np.ndarray:
    """Boolean ``(m, n)`` array of empty lots where :func:`can_build` holds.

    Only meaningful for a permissible configuration.
    """
    occ = config._occ
    m, n = occ.shape
    p = _padded(occ, 2)

    def sh(dr: int, dc: int) -> np.ndarray:
        return p[2 + dr : 2 + dr + m, 2 + dc : 2 + dc + n]

    self_blocked = sh(0, -1) & sh(0, 1) & sh(1, 0)
    west_blocked = sh(0, -1) & sh(0, -2) & sh(1, -1)
    east_blocked = sh(0, 1) & sh(0, 2) & sh(1, 1)
    north_blocked = sh(-1, 0) & sh(-1, -1) & sh(-1, 1)
    return ~occ & ~(self_blocked | west_blocked | east_blocked | north_blocked)


def can_build(config: Config, lot: tuple[int, int]) -> bool:
    """Is ``config`` plus a house on ``lot`` still permissible?

    ``config`` must be permissible.  Only the new house and the houses west,
    east and north of it can change state, so this is an O(1) local check.
    """
    i, j = config.dims.check_lot(lot)
    if config._occ[i - 1, j - 1]:
        raise ContractViolation(f"lot ({i}, {j}) is already occupied")
    return _can_build_at(config._occ, i - 1, j - 1)


def is_maximal(config: Config) -> bool:
    return is_permissible(config) and not bool(np.any(buildable_lots(config)))


def occupancy(config: Config) -> int:
    return config.count


def density(config: Config) -> Density:
    return Density(config.count, config.dims.cells)


def mirror_ew(config: Config) -> Config:
    """Reflect east-west: column ``j`` goes to ``n + 1 - j``."""
    return Config._wrap(config.dims, config._occ[:, ::-1].copy())


def render_ascii(config: Config) -> str:
    """``m`` lines of ``#`` (house) and ``.`` (empty), northmost row first."""
    return "\n".join("".join("#" if b else "." for b in row) for row in config._occ)


def format_config(config: Config) -> str:
    """Text file form: an ``"m n"`` header line followed by the rendering."""
    return f"{config.dims.m} {config.dims.n}\n{render_ascii(config)}\n"


def parse_config(text: str) -> Config:
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise ContractViolation("empty config text")
    header = lines[0].split()
    if len(header) != 2:
        raise ContractViolation(f"bad header line {lines[0]!r}, expected 'm n'")
    try:
        dims = Dims(int(header[0]), int(header[1]))
    except ValueError:
        raise ContractViolation(f"bad header line {lines[0]!r}") from None
    body = lines[1:]
    if len(body) != dims.m:
        raise ContractViolation(f"expected {dims.m} grid lines, got {len(body)}")
    return Config.from_ascii("\n".join(body), dims)
