"""Flat-file outputs: CSV tables, key=value summaries and run manifests.

Floats are written with ``repr``, the shortest string that round-trips, so
reruns diff exactly. Quantities that only exist as logs (levels beyond the
double range) are written in scientific notation reconstructed from the log.
"""

from __future__ import annotations

import csv
import hashlib
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

_LN10 = math.log(10.0)


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def fmt_from_log(log_value: float) -> str:
    """Level exp(log_value), without overflow or underflow."""
    log_value = float(log_value)
    if not math.isfinite(log_value):
        return "0.0" if log_value == -math.inf else repr(math.exp(log_value))
    level = math.exp(log_value)
    if level != 0.0 and math.isfinite(level) and level >= 1e-300:
        return repr(level)
    l10 = log_value / _LN10
    e = math.floor(l10)
    mant = 10.0 ** (l10 - e)
    if mant >= 10.0:
        mant, e = mant / 10.0, e + 1
    return f"{mant!r}e{e:+d}"


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return path


def write_kv(path: Path, items: Mapping[str, object]) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for k, v in items.items():
            fh.write(f"{k}={v if isinstance(v, str) else fmt(v)}\n")
    return path


def read_kv(path: Path) -> dict:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line and not line.startswith("#"):
            k, _, v = line.partition("=")
            out[k] = v
    return out


def config_hash(canonical_text: str) -> str:
    return hashlib.sha256(canonical_text.encode("utf-8")).hexdigest()
