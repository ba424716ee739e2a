"""Signal and table serialisation.

Every file written here starts with ``#`` metadata lines (package version,
seed, band, method and, unless suppressed, a creation timestamp).  Readers
skip ``#`` lines.  Floats are written with 17 significant digits so that a
write/read round trip is exact.
"""

from __future__ import annotations

import csv
import datetime
import io
import math
import os
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DataError
from .model import ELLIPTICAL_KEYS, WL_KEYS, EllipticalParams, WlParams

FLOAT_FMT = "{:.17g}"


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return FLOAT_FMT.format(float(x))
    return str(x)


def metadata_lines(meta: dict | None = None, timestamp: bool = True) -> list[str]:
    lines = [f"# wlcar {__version__}"]
    for k, v in (meta or {}).items():
        lines.append(f"# {k}={fmt(v) if v is not None else ''}")
    if timestamp:
        now = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
        lines.append(f"# created={now}")
    return lines


def _open_text(path):
    if path is None or str(path) == "-":
        return None
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", newline="")


def write_table(path, header, rows, meta=None, timestamp=True):
    """Write a CSV table preceded by metadata comment lines; ``path='-'`` writes a string."""
    buf = io.StringIO()
    for line in metadata_lines(meta, timestamp):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    text = buf.getvalue()
    f = _open_text(path)
    if f is None:
        return text
    with f:
        f.write(text)
    return text


def write_signal(path, z, meta=None, timestamp=True):
    z = np.asarray(z, dtype=complex)
    rows = ((t, v.real, v.imag) for t, v in enumerate(z))
    return write_table(path, ["t", "re", "im"], rows, meta, timestamp)


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def read_signal(path) -> np.ndarray:
    """Read a complex signal.

    Accepted layouts: three columns ``t,re,im`` or two columns ``x,y``
    (read as ``x + i y``), with or without a header row.  Rows must be in
    increasing time order.
    """
    try:
        with open(path, newline="") as f:
            lines = f.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    rows = []
    ncol = None
    for lineno, line in enumerate(lines, start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        fields = [c.strip() for c in next(csv.reader([s]))]
        if ncol is None:
            ncol = len(fields)
            if ncol not in (2, 3):
                raise DataError(f"line {lineno}: expected 2 (x,y) or 3 (t,re,im) columns, got {ncol}")
            if not all(_is_number(c) for c in fields):
                continue  # header
        if len(fields) != ncol:
            raise DataError(f"line {lineno}: expected {ncol} columns, got {len(fields)}")
        try:
            vals = [float(c) for c in fields]
        except ValueError:
            raise DataError(f"line {lineno}: malformed row {s!r}") from None
        if not all(math.isfinite(v) for v in vals):
            raise DataError(f"line {lineno}: non-finite value in row {s!r}")
        rows.append(vals)
    if len(rows) < 2:
        raise DataError(f"{path}: need at least 2 samples, found {len(rows)}")
    a = np.array(rows)
    if ncol == 3:
        if np.any(np.diff(a[:, 0]) <= 0):
            bad = int(np.nonzero(np.diff(a[:, 0]) <= 0)[0][0]) + 2
            raise DataError(f"data row {bad}: time column is not increasing")
        return a[:, 1] + 1j * a[:, 2]
    return a[:, 0] + 1j * a[:, 1]


def format_params(d: dict) -> str:
    return "".join(f"{k}={fmt(v)}\n" for k, v in d.items())


def write_keyvalue(path, d: dict, meta=None, timestamp=True):
    text = "\n".join(metadata_lines(meta, timestamp)) + "\n" + format_params(d)
    f = _open_text(path)
    if f is None:
        return text
    with f:
        f.write(text)
    return text


def read_keyvalue(path) -> dict:
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if "=" not in s:
            raise DataError(f"{path}:{lineno}: expected key=value")
        k, v = (t.strip() for t in s.split("=", 1))
        out[k] = v
    return out


def read_params(path) -> WlParams | EllipticalParams:
    """Read a parameter file in either representation (angles in radians)."""
    d = read_keyvalue(path)
    try:
        if all(k in d for k in WL_KEYS):
            return WlParams.from_dict(d)
        if all(k in d for k in ELLIPTICAL_KEYS):
            return EllipticalParams.from_dict(d)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc
    raise DataError(f"{path}: need keys {', '.join(WL_KEYS)} or {', '.join(ELLIPTICAL_KEYS)}")


def read_segments(path) -> list[tuple[int, int]]:
    """Read half-open ``start,stop`` sample ranges, one per row."""
    segs = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    for lineno, row in enumerate(csv.reader(text.splitlines()), start=1):
        if not row or row[0].strip().startswith("#"):
            continue
        if not all(_is_number(c) for c in row):
            continue
        if len(row) != 2:
            raise DataError(f"{path}:{lineno}: expected start,stop")
        a, b = int(float(row[0])), int(float(row[1]))
        if not 0 <= a < b:
            raise DataError(f"{path}:{lineno}: invalid segment [{a}, {b})")
        segs.append((a, b))
    if not segs:
        raise DataError(f"{path}: no segments")
    return segs


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("WLCAR_THREADS", "1")))
    except ValueError:
        return 1
