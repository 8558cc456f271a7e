"""Plain-text code files and bound-curve CSV.

A code file is a header line ``MPK1 n=<n> M=<M> [P=<P>]`` followed by M
lines of n space-separated coordinates.  Coordinates are written with
``repr``, the shortest decimal string that parses back to the same double.
"""

from __future__ import annotations

import io
import math
import re
from typing import Iterable, Optional, TextIO

import numpy as np

from .bounds import BoundName, DomainError, eval_bound
from .geometry import Code, GeometryError

MAGIC = "MPK1"
_HEADER = re.compile(r"^MPK1 n=(\d+) M=(\d+)(?: P=(\S+))?$")


class CodeFileError(ValueError):
    """Malformed code file."""


def format_code(code: Code) -> str:
    head = f"{MAGIC} n={code.n} M={code.M}"
    if code.power_limit is not None:
        head += f" P={code.power_limit!r}"
    lines = [head]
    lines += [" ".join(repr(float(v)) for v in row) for row in code.points]
    return "\n".join(lines) + "\n"


def parse_code(text: str) -> Code:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CodeFileError("empty file")
    m = _HEADER.match(lines[0].rstrip("\r"))
    if not m:
        raise CodeFileError(f"line 1: expected header 'MPK1 n=<n> M=<M> [P=<P>]', got {lines[0][:60]!r}")
    n, M = int(m.group(1)), int(m.group(2))
    P = None
    if m.group(3) is not None:
        try:
            P = float(m.group(3))
        except ValueError:
            raise CodeFileError(f"line 1: bad power {m.group(3)!r}") from None
    body = lines[1:]
    if len(body) != M:
        raise CodeFileError(f"header says M={M} but the file has {len(body)} rows")
    if n < 1 or M < 1:
        raise CodeFileError("n and M must be positive")
    X = np.empty((M, n))
    for i, line in enumerate(body):
        fields = line.split()
        if len(fields) != n:
            raise CodeFileError(f"line {i + 2}: expected {n} values, got {len(fields)}")
        try:
            X[i] = [float(f) for f in fields]
        except ValueError as e:
            raise CodeFileError(f"line {i + 2}: {e}") from None
    try:
        return Code(X, P)
    except GeometryError as e:
        raise CodeFileError(str(e)) from None


def read_code(path) -> Code:
    with open(path, encoding="utf-8") as f:
        return parse_code(f.read())


def write_code(code: Code, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(format_code(code))


# --------------------------------------------------------------------------
# Bound curves


def _cell(v: Optional[float]) -> str:
    if v is None:
        return ""
    return repr(float(v))


def curve_table(names: Iterable, L: int, grid, units: str = "nats") -> list:
    """Rows ``[x, v_1, ...]``; a value is ``None`` where x is outside the
    bound's domain."""
    if units not in ("nats", "bits"):
        raise ValueError("units must be 'nats' or 'bits'")
    scale = 1.0 if units == "nats" else 1.0 / math.log(2.0)
    rows = []
    for x in grid:
        row = [float(x)]
        for name in names:
            try:
                row.append(eval_bound(name, L, x) * scale)
            except DomainError:
                row.append(None)
        rows.append(row)
    return rows


def write_curve_csv(names, rows, out: TextIO) -> None:
    out.write(",".join(["x"] + [str(BoundName(n)) for n in names]) + "\n")
    for row in rows:
        out.write(",".join(_cell(v) for v in row) + "\n")


def curve_csv(names, L: int, grid, units: str = "nats") -> str:
    buf = io.StringIO()
    write_curve_csv(names, curve_table(names, L, grid, units), buf)
    return buf.getvalue()
