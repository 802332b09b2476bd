"""CSV / JSON / text serialisation with provenance metadata.

CSV and text outputs start with ``# key=value`` comment lines; JSON outputs
wrap the payload as ``{"meta": ..., "data": ...}``.
"""

from __future__ import annotations

import csv
import io
import json
from datetime import datetime, timezone
from typing import Any, Iterable, Sequence

from .builder import PRNG_ID
from .enumeration import EnumerationResult, OccupancyDistribution, PreimageCensus
from .montecarlo import DensityStats, DensityTable, SkippedCell

STATS_HEADER = ["m", "n", "runs", "seed", "mean", "stderr", "p5", "p95"]
HISTOGRAM_HEADER = ["occupancy", "count"]
TABLE_HEADER = ["m", "n", "mean", "stderr", "skipped"]
ENUMERATION_HEADER = ["occupancy", "grid"]
CENSUS_HEADER = ["grid", "count"]
PMF_HEADER = ["k", "numerator", "denominator"]


def metadata(*, timestamp: bool = True, **fields: Any) -> dict[str, Any]:
    from . import __version__

    meta: dict[str, Any] = {"tool": "settlement", "version": __version__, "prng": PRNG_ID}
    meta.update({k: v for k, v in fields.items() if v is not None})
    if timestamp:
        meta["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return meta


def comment_block(meta: dict[str, Any]) -> str:
    return "".join(f"# {k}={v}\n" for k, v in meta.items())


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], meta: dict[str, Any]) -> str:
    buf = io.StringIO()
    buf.write(comment_block(meta))
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def to_json(data: Any, meta: dict[str, Any]) -> str:
    return json.dumps({"meta": meta, "data": data}, indent=2) + "\n"


def read_csv(text: str) -> tuple[dict[str, str], list[dict[str, str]]]:
    """Parse our CSV back into ``(metadata, rows)``."""
    meta: dict[str, str] = {}
    body = []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            meta[key] = value
        else:
            body.append(line)
    return meta, list(csv.DictReader(body))


def _fmt(x: float) -> str:
    return repr(float(x))


def stats_row(s: DensityStats) -> list[Any]:
    stderr = "" if s.std_error != s.std_error else _fmt(s.std_error)
    return [s.dims.m, s.dims.n, s.runs, s.master_seed, _fmt(s.mean_density), stderr, _fmt(s.p5), _fmt(s.p95)]


def histogram_rows(s: DensityStats) -> list[list[int]]:
    return [[k, v] for k, v in s.histogram.items()]


def table_rows(t: DensityTable) -> list[list[Any]]:
    rows = []
    for (m, n), cell in t.cells.items():
        if isinstance(cell, SkippedCell):
            rows.append([m, n, "", "", 1])
        else:
            stderr = "" if cell.std_error != cell.std_error else f"{cell.std_error:.6f}"
            rows.append([m, n, f"{cell.mean_density:.3f}", stderr, 0])
    return rows


def table_json(t: DensityTable) -> list[dict[str, Any]]:
    out = []
    for (m, n), cell in t.cells.items():
        if isinstance(cell, SkippedCell):
            out.append({"m": m, "n": n, "skipped": True, "reason": cell.reason})
        else:
            out.append({**cell.as_dict(), "skipped": False})
    return out


def enumeration_rows(r: EnumerationResult) -> list[list[Any]]:
    return [[c.count, c.key()] for c in r.configs]


def census_rows(c: PreimageCensus) -> list[list[Any]]:
    return [[cfg.key(), count] for cfg, count in c.sorted_items()]


def pmf_rows(d: OccupancyDistribution) -> list[list[int]]:
    return [[k, p.numerator, p.denominator] for k, p in sorted(d.pmf.items())]
