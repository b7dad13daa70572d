"""Strict loaders for the simulator's documented CSV schemas.

The only coupling to the producing tool is the column contract; nothing here
imports it. Header rows must match exactly and violations raise SchemaError.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

TRAJECTORY_HEADER = ["t", "state", "rx", "ry", "rz"]
DISTANCE_HEADER = ["j", "delta_lower", "c_coef", "d_coef", "bound"]
GENERATOR_HEADER = [
    "t",
    "b_num",
    "c_num",
    "d_num",
    "residual",
    "b_printed",
    "c_printed",
    "d_printed",
    "det3",
]

# Bloch rows may carry roundoff from the producer.
BLOCH_NORM_SLACK = 1e-9


class SchemaError(Exception):
    """Input file does not match the documented CSV contract."""


def _read_rows(path: str, header: list[str]) -> list[list[str]]:
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            got = next(reader)
        except StopIteration:
            raise SchemaError(f"{path} is empty, expected header {','.join(header)}")
        if got != header:
            raise SchemaError(f"{path}: header {got!r} != expected {header!r}")
        rows = []
        for line, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise SchemaError(
                    f"{path} line {line}: expected {len(header)} cells, got {len(row)}"
                )
            rows.append(row)
    return rows


def _number(cell: str, path: str, line: int, column: str, allow_nan: bool = False) -> float:
    try:
        v = float(cell)
    except ValueError as exc:
        raise SchemaError(f"{path} line {line}: {column} = {cell!r} is not a number") from exc
    if not allow_nan and math.isnan(v):
        raise SchemaError(f"{path} line {line}: {column} must not be NaN")
    return v


@dataclass(frozen=True)
class TrajectoryTable:
    """Rows of (t, state label, Bloch coordinates), invariant |r| <= 1 + slack."""

    times: np.ndarray
    labels: tuple[str, ...]
    coords: np.ndarray

    def __len__(self) -> int:
        return len(self.labels)

    def states(self) -> list[str]:
        seen = []
        for label in self.labels:
            if label not in seen:
                seen.append(label)
        return seen

    def curve(self, label: str) -> tuple[np.ndarray, np.ndarray]:
        mask = np.array([lb == label for lb in self.labels], dtype=bool)
        if not mask.any():
            raise KeyError(f"no rows with state label {label!r}")
        return self.times[mask], self.coords[mask]


def load_trajectory(path: str) -> TrajectoryTable:
    rows = _read_rows(path, TRAJECTORY_HEADER)
    times, labels, coords = [], [], []
    for line, row in enumerate(rows, start=2):
        t = _number(row[0], path, line, "t")
        label = row[1]
        if not label:
            raise SchemaError(f"{path} line {line}: empty state label")
        r = [_number(row[k], path, line, TRAJECTORY_HEADER[k]) for k in (2, 3, 4)]
        if r[0] ** 2 + r[1] ** 2 + r[2] ** 2 > 1.0 + BLOCH_NORM_SLACK:
            raise SchemaError(f"{path} line {line}: Bloch point outside the unit ball")
        times.append(t)
        labels.append(label)
        coords.append(r)
    return TrajectoryTable(
        times=np.array(times, dtype=float),
        labels=tuple(labels),
        coords=np.array(coords, dtype=float).reshape(len(rows), 3),
    )


@dataclass(frozen=True)
class DistanceTable:
    """Per-step disturbance estimates with the printed coefficients and bound."""

    j: np.ndarray
    delta_lower: np.ndarray
    c_coef: np.ndarray
    d_coef: np.ndarray
    bound: np.ndarray

    def __len__(self) -> int:
        return len(self.j)


def load_distance(path: str) -> DistanceTable:
    rows = _read_rows(path, DISTANCE_HEADER)
    cols = {name: [] for name in DISTANCE_HEADER}
    for line, row in enumerate(rows, start=2):
        try:
            j = int(row[0])
        except ValueError as exc:
            raise SchemaError(f"{path} line {line}: j = {row[0]!r} is not an integer") from exc
        if j < 0:
            raise SchemaError(f"{path} line {line}: j must be >= 0")
        cols["j"].append(j)
        for k, name in enumerate(DISTANCE_HEADER[1:], start=1):
            cols[name].append(_number(row[k], path, line, name))
    return DistanceTable(
        j=np.array(cols["j"], dtype=int),
        delta_lower=np.array(cols["delta_lower"], dtype=float),
        c_coef=np.array(cols["c_coef"], dtype=float),
        d_coef=np.array(cols["d_coef"], dtype=float),
        bound=np.array(cols["bound"], dtype=float),
    )


@dataclass(frozen=True)
class GeneratorTable:
    """Generator coefficient sweep; printed columns may be NaN where undefined."""

    t: np.ndarray
    b_num: np.ndarray
    c_num: np.ndarray
    d_num: np.ndarray
    residual: np.ndarray
    b_printed: np.ndarray
    c_printed: np.ndarray
    d_printed: np.ndarray
    det3: np.ndarray

    def __len__(self) -> int:
        return len(self.t)


def load_generator(path: str) -> GeneratorTable:
    rows = _read_rows(path, GENERATOR_HEADER)
    printed = {"b_printed", "c_printed", "d_printed"}
    cols = {name: [] for name in GENERATOR_HEADER}
    for line, row in enumerate(rows, start=2):
        for k, name in enumerate(GENERATOR_HEADER):
            cols[name].append(
                _number(row[k], path, line, name, allow_nan=name in printed)
            )
    return GeneratorTable(
        **{name: np.array(cols[name], dtype=float) for name in GENERATOR_HEADER}
    )
