"""On-disk formats for run artifacts: field snapshots and diagnostics logs.

Snapshot format ``f64grid/1``: five ASCII header lines

    magic f64grid/1
    dim <1|2>
    n <nx> [ny]
    length <Lx> [Ly]
    time <t>

followed immediately by raw little-endian float64 values in row-major order
(x fastest; in 2D the y index is the slow axis).  The CSV log schema is

    t,mass,rel_mass_err,energy_original,energy_modified,xi,newton_iters,dt

with 17 significant digits and empty xi/newton_iters cells for the uniform
schemes.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .diagnostics import DiagRecord
from .spectral import Field, build_grid

CSV_HEADER = "t,mass,rel_mass_err,energy_original,energy_modified,xi,newton_iters,dt"


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def write_snapshot(path, field: Field, time: float) -> None:
    grid = field.grid
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = (
        f"magic f64grid/1\n"
        f"dim {grid.dim}\n"
        f"n {' '.join(str(m) for m in grid.n)}\n"
        f"length {' '.join(_fmt(L) for L in grid.length)}\n"
        f"time {_fmt(time)}\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def read_snapshot(path) -> tuple[Field, float]:
    with open(path, "rb") as fh:
        raw = fh.read()
    if not raw.startswith(b"magic f64grid/1\n"):
        raise ValueError(f"{path}: not an f64grid/1 snapshot")
    head_end = 0
    lines = []
    for _ in range(5):
        nl = raw.index(b"\n", head_end)
        lines.append(raw[head_end:nl].decode("ascii"))
        head_end = nl + 1
    fields = dict(line.split(" ", 1) for line in lines)
    dim = int(fields["dim"])
    n = tuple(int(v) for v in fields["n"].split())
    length = tuple(float(v) for v in fields["length"].split())
    time = float(fields["time"])
    grid = build_grid(dim, n, length)
    values = np.frombuffer(raw[head_end:], dtype="<f8").reshape(grid.shape)
    return Field(grid, values.copy()), time


def format_record(rec: DiagRecord) -> str:
    xi = "" if rec.xi is None else _fmt(rec.xi)
    iters = "" if rec.newton_iters is None else str(rec.newton_iters)
    return ",".join([
        _fmt(rec.t), _fmt(rec.mass), _fmt(rec.rel_mass_err),
        _fmt(rec.energy_original), _fmt(rec.energy_modified),
        xi, iters, _fmt(rec.dt),
    ])


def write_log(path, records) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for rec in records:
        buf.write(format_record(rec) + "\n")
    path.write_text(buf.getvalue())


def read_log(path) -> list[DiagRecord]:
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: unexpected CSV header")
    out = []
    for line in lines[1:]:
        cells = line.split(",")
        out.append(DiagRecord(
            t=float(cells[0]), mass=float(cells[1]), rel_mass_err=float(cells[2]),
            energy_original=float(cells[3]), energy_modified=float(cells[4]),
            xi=float(cells[5]) if cells[5] else None,
            newton_iters=int(cells[6]) if cells[6] else None,
            dt=float(cells[7])))
    return out
