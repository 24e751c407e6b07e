"""Parsers for the solver's on-disk run formats.

These are deliberately independent re-implementations against the documented
formats (CSV log, report.txt convergence table, f64grid snapshots), so the
figure tools double as a contract check on what the solver emits.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

LOG_HEADER = "t,mass,rel_mass_err,energy_original,energy_modified,xi,newton_iters,dt"


class FormatError(ValueError):
    """A run artifact did not match the documented format."""


@dataclass
class LogTable:
    """Columns of one log.csv, as arrays (xi/newton_iters hold NaN gaps)."""

    t: np.ndarray
    mass: np.ndarray
    rel_mass_err: np.ndarray
    energy_original: np.ndarray
    energy_modified: np.ndarray
    xi: np.ndarray
    newton_iters: np.ndarray
    dt: np.ndarray

    def __len__(self):
        return len(self.t)


@dataclass
class Snapshot:
    dim: int
    n: tuple[int, ...]
    length: tuple[float, ...]
    time: float
    values: np.ndarray


@dataclass
class ConvergenceTable:
    taus: np.ndarray
    errors: np.ndarray   # inf marks diverged entries

    @property
    def finite(self) -> np.ndarray:
        return np.isfinite(self.errors)


def read_log(path) -> LogTable:
    path = Path(path)
    lines = path.read_text().strip().splitlines()
    if not lines or lines[0] != LOG_HEADER:
        raise FormatError(f"{path}: unexpected log header "
                          f"{lines[0] if lines else '<empty>'!r}")
    cols: list[list[float]] = [[] for _ in range(8)]
    for row_no, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != 8:
            raise FormatError(f"{path}: row {row_no} has {len(cells)} cells")
        try:
            for i, cell in enumerate(cells):
                cols[i].append(float(cell) if cell else math.nan)
        except ValueError as exc:
            raise FormatError(f"{path}: row {row_no}: {exc}") from exc
    return LogTable(*(np.asarray(c) for c in cols))


def read_snapshot(path) -> Snapshot:
    path = Path(path)
    raw = path.read_bytes()
    if not raw.startswith(b"magic f64grid/1\n"):
        raise FormatError(f"{path}: missing f64grid/1 magic")
    pos = 0
    header: dict[str, str] = {}
    for _ in range(5):
        nl = raw.index(b"\n", pos)
        key, _, value = raw[pos:nl].decode("ascii").partition(" ")
        header[key] = value
        pos = nl + 1
    try:
        dim = int(header["dim"])
        n = tuple(int(v) for v in header["n"].split())
        length = tuple(float(v) for v in header["length"].split())
        time = float(header["time"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: bad header: {exc}") from exc
    data = np.frombuffer(raw[pos:], dtype="<f8")
    shape = (n[0],) if dim == 1 else (n[1], n[0])
    if data.size != int(np.prod(shape)):
        raise FormatError(f"{path}: expected {np.prod(shape)} values, got {data.size}")
    return Snapshot(dim=dim, n=n, length=length, time=time,
                    values=data.reshape(shape).copy())


def read_report(path) -> ConvergenceTable:
    path = Path(path)
    taus, errors = [], []
    for row_no, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        cells = line.split()
        if len(cells) < 2:
            raise FormatError(f"{path}: row {row_no} too short")
        try:
            taus.append(float(cells[0]))
            errors.append(float(cells[1]))
        except ValueError as exc:
            raise FormatError(f"{path}: row {row_no}: {exc}") from exc
    if len(taus) < 2:
        raise FormatError(f"{path}: a convergence table needs at least two rows")
    return ConvergenceTable(taus=np.asarray(taus), errors=np.asarray(errors))


def read_meta(run_dir) -> dict:
    return json.loads((Path(run_dir) / "meta.json").read_text())


def list_snapshots(run_dir) -> list[Path]:
    snap_dir = Path(run_dir) / "snapshots"
    if not snap_dir.is_dir():
        return []
    paths = list(snap_dir.glob("*.f64grid"))
    return sorted(paths, key=lambda p: read_snapshot(p).time)
