"""CSV ingestion, table writing and config loading for the command line.

Output conventions (kept stable so reruns are byte-identical):
comma delimiter, ``\\n`` line endings, minimal quoting, floats written with
``repr`` (shortest round-trip form), integers as plain digits.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np
import yaml

from .errors import InputError

MISSING = {"", "NA", "NaN", "nan", "N/A"}


class ParseError(InputError):
    """Malformed input file; message carries line numbers where known."""


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    features: list[str]
    response: str
    dropped_rows: int = 0
    dropped_cols: list[str] | None = None


def read_dataset(path: str, response: str, missing: str = "drop-cols") -> Dataset:
    """Read a headered CSV; ``response`` names the y column, every other column is a feature.

    Missing cells are handled by ``missing``: drop-cols removes feature columns
    containing any, drop-rows removes rows, error refuses. Rows with a missing
    response are always dropped.
    """
    if missing not in ("drop-cols", "drop-rows", "error"):
        raise InputError(f"unknown missing policy {missing!r}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if response not in header:
        raise ParseError(f"{path}: response column {response!r} not in header {header}")
    if len(set(header)) != len(header):
        raise ParseError(f"{path}: duplicate column names in header")
    body = rows[1:]
    ncol = len(header)
    vals = np.empty((len(body), ncol))
    for r, row in enumerate(body):
        line = r + 2
        if len(row) != ncol:
            raise ParseError(f"{path}:{line}: expected {ncol} fields, found {len(row)}")
        for c, cell in enumerate(row):
            cell = cell.strip()
            if cell in MISSING:
                vals[r, c] = math.nan
                continue
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"{path}:{line}: column {header[c]!r}: cannot parse {cell!r} as a number") from None
            if not math.isfinite(v):
                raise ParseError(f"{path}:{line}: column {header[c]!r}: non-finite value {cell!r}")
            vals[r, c] = v
    yi = header.index(response)
    feats = [h for h in header if h != response]
    fi = [header.index(h) for h in feats]
    y = vals[:, yi]
    X = vals[:, fi]
    keep = ~np.isnan(y)
    dropped_rows = int(np.count_nonzero(~keep))
    X, y = X[keep], y[keep]
    miss = np.isnan(X)
    dropped_cols = []
    if miss.any():
        if missing == "error":
            r, c = np.argwhere(miss)[0]
            raise ParseError(f"{path}: missing value in column {feats[c]!r} ({int(miss.sum())} missing cells)")
        if missing == "drop-cols":
            bad = miss.any(axis=0)
            dropped_cols = [f for f, b in zip(feats, bad) if b]
            X = X[:, ~bad]
            feats = [f for f, b in zip(feats, bad) if not b]
        else:
            bad = miss.any(axis=1)
            dropped_rows += int(bad.sum())
            X, y = X[~bad], y[~bad]
    if X.shape[0] < 2 or X.shape[1] < 1:
        raise ParseError(f"{path}: need at least 2 complete rows and 1 feature column after the missing-value filter")
    return Dataset(X=X, y=y, features=feats, response=response, dropped_rows=dropped_rows, dropped_cols=dropped_cols)


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def table_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def table_text(header, rows, digits: int = 4) -> str:
    """Aligned plain-text rendering; floats rounded for reading."""
    def cell(v):
        if isinstance(v, (float, np.floating)):
            return f"{float(v):.{digits}f}"
        return fmt(v)

    cells = [[str(h) for h in header]] + [[cell(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines) + "\n"


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def dumps_json(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_text(path: str | None, text: str, stdout) -> None:
    if path is None or path == "-":
        stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def load_config(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        cfg = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f":{mark.line + 1}" if mark is not None else ""
        raise ParseError(f"{path}{where}: invalid YAML ({getattr(exc, 'problem', exc)})") from None
    if not isinstance(cfg, dict):
        raise ParseError(f"{path}: top level must be a mapping")
    return cfg
