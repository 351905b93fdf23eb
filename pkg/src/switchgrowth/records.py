"""Flat-file output: CSV series and JSON run records."""
from __future__ import annotations

import csv
import json
import math
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

GROWTH_COLUMNS = ("t", "beta", "eps", "alpha_lo", "alpha_hi", "beta_over_t")
SWEEP_COLUMNS = ("p", "q", "theta", "kind", "coupling_or_kappa", "bound_or_slope")
ORACLE_COLUMNS = ("t", "beta_hull", "eps", "beta_brute", "alpha_brute", "abs_diff", "status")


def fmt(x) -> str:
    """Shortest round-tripping text for floats; ints and strings pass through."""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float) or hasattr(x, "dtype"):
        x = float(x)
        if math.isnan(x):
            return "nan"
        return repr(x)
    return str(x)


def ensure_dir(path) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise PermissionError(f"output directory {path} is not writable")
    return path


def write_csv(path, columns, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def growth_rows(series):
    for t, beta, eps, lo, hi in series.records():
        yield t, beta, eps, lo, hi, (beta / t if t else 0.0)


def _finite(obj):
    """Replace non-finite floats so the JSON stays standard."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if hasattr(obj, "dtype"):
        return _finite(obj.item())
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_finite(obj), indent=2, sort_keys=True) + "\n")
    return path


def read_json(path):
    return json.loads(Path(path).read_text())


def _now() -> str:
    # SOURCE_DATE_EPOCH pins timestamps for reproducible records
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = float(epoch) if epoch else time.time()
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t))


@dataclass
class RunRecord:
    """Everything needed to reproduce one CLI invocation."""

    version: str
    command: str
    flags: dict
    params: dict | None = None
    seed: int | None = None
    started: str = field(default_factory=_now)
    finished: str | None = None
    outputs: list[str] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def finish(self, out_dir, name: str = "run.json") -> Path:
        self.finished = _now()
        self.outputs = sorted(self.outputs)
        return write_json(Path(out_dir) / name, asdict(self))
