"""CSV ingestion, serialisation and detrending.

Files are plain comma-separated text with one header row. Values are
written with 17 significant digits, which is enough for every float64 to
survive a write/read cycle unchanged.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionError, NonstatCausalError, ParameterError

FLOAT_FORMAT = "%.17g"
MAX_POLY_DEGREE = 5


class TableError(NonstatCausalError, ValueError):
    """A CSV file is missing, malformed, or lacks a requested column."""


@dataclass(frozen=True)
class DataTable:
    columns: list
    values: np.ndarray  # (T, C)
    index: np.ndarray | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[1] != len(self.columns):
            raise DimensionError("values must be (T, C) with one name per column")
        object.__setattr__(self, "values", v)

    @property
    def length(self) -> int:
        return self.values.shape[0]

    def column(self, name) -> np.ndarray:
        return self.values[:, self._position(name)]

    def _position(self, name) -> int:
        if name in self.columns:
            return self.columns.index(name)
        raise TableError(f"no column named {name!r}; available: {', '.join(self.columns)}")

    def series(self) -> np.ndarray:
        """Columns as rows, shape ``(C, T)``."""
        return np.ascontiguousarray(self.values.T)


def _resolve(selector, header: list) -> int:
    if isinstance(selector, (int, np.integer)):
        if not 0 <= selector < len(header):
            raise TableError(f"column index {selector} out of range (file has {len(header)} columns)")
        return int(selector)
    if selector in header:
        return header.index(selector)
    if isinstance(selector, str) and selector.isdigit() and int(selector) < len(header):
        return int(selector)
    raise TableError(f"no column named {selector!r}; available: {', '.join(header)}")


def load_csv(path, columns=None, index_column=None) -> DataTable:
    """Read selected columns of a headed CSV file.

    ``columns`` holds names or 0-based positions; None selects every column
    except ``index_column``. Any non-numeric or empty cell in a selected
    column is an error that lists the offending row numbers (1-based,
    counting the header as row 1).
    """
    path = Path(path)
    if not path.is_file():
        raise TableError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise TableError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if any(c.strip() for c in r)]
    idx_pos = None if index_column is None else _resolve(index_column, header)
    if columns is None:
        picks = [i for i in range(len(header)) if i != idx_pos]
    else:
        picks = [_resolve(c, header) for c in columns]
    if not picks:
        raise TableError("no data columns selected")
    wanted = picks + ([idx_pos] if idx_pos is not None else [])
    out = np.empty((len(body), len(wanted)))
    bad = []
    for r, row in enumerate(body):
        try:
            out[r] = [float(row[i]) for i in wanted]
        except (ValueError, IndexError):
            bad.append(r + 2)
    if bad:
        shown = ", ".join(str(b) for b in bad[:20]) + (" ..." if len(bad) > 20 else "")
        raise TableError(f"non-numeric or missing cells in {path} at rows {shown}")
    if not np.all(np.isfinite(out)):
        rows_nf = np.flatnonzero(~np.all(np.isfinite(out), axis=1)) + 2
        raise TableError(f"non-finite values in {path} at rows {', '.join(map(str, rows_nf[:20]))}")
    names = [header[i] for i in picks]
    index = out[:, -1].copy() if idx_pos is not None else None
    return DataTable(names, out[:, : len(picks)], index)


def write_csv(path, columns, values) -> None:
    """Write a ``(T, C)`` grid with a header row and 17 significant digits."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if values.shape[1] != len(columns):
        raise DimensionError("one header name per column")
    with Path(path).open("w", newline="") as fh:
        np.savetxt(fh, values, fmt=FLOAT_FORMAT, delimiter=",", header=",".join(map(str, columns)), comments="")


def parse_detrend(method) -> int | None:
    """Polynomial degree for a detrend method name; None means no detrending.

    Accepts ``none``, ``constant``, ``linear``, ``polynomial(k)``, ``poly:k``
    or an integer degree.
    """
    if method is None:
        return None
    if isinstance(method, (int, np.integer)):
        deg = int(method)
    else:
        text = str(method).strip().lower()
        if text == "none":
            return None
        if text == "constant":
            deg = 0
        elif text == "linear":
            deg = 1
        else:
            m = re.fullmatch(r"(?:polynomial|poly)[(:=]\s*(\d+)\s*\)?", text)
            if not m:
                raise ParameterError(f"unknown detrend method {method!r}")
            deg = int(m.group(1))
    if not 0 <= deg <= MAX_POLY_DEGREE:
        raise ParameterError(f"detrend degree must lie in 0..{MAX_POLY_DEGREE}")
    return deg


def trend_basis(length: int, degree: int) -> np.ndarray:
    # Legendre columns on [-1, 1] keep the least-squares problem well conditioned
    u = np.linspace(-1.0, 1.0, length) if length > 1 else np.zeros(1)
    return np.polynomial.legendre.legvander(u, degree)


def detrend(x, method="linear") -> np.ndarray:
    """Subtract the least-squares polynomial trend of the requested degree."""
    x = np.asarray(x, dtype=float)
    deg = parse_detrend(method)
    if deg is None:
        return x.copy()
    basis = trend_basis(x.size, deg)
    coef, *_ = np.linalg.lstsq(basis, x, rcond=None)
    return x - basis @ coef
