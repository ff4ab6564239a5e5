"""Strict readers for the experiment file formats.

Every reader validates the header and fails fast with the offending column
named; inputs are never mutated.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    """Input does not match the expected column layout."""


def _check_header(path, line, expected):
    cols = line.strip().split(",")
    if cols != expected:
        missing = [c for c in expected if c not in cols]
        offender = missing[0] if missing else cols[len(expected) if len(cols) > len(expected) else 0]
        raise SchemaError(f"{path}: expected columns {expected}, problem with column '{offender}'")


def read_trajectory(path):
    """t,x,y rows; returns (t, x, y) float/int arrays."""
    path = Path(path)
    with open(path) as fh:
        _check_header(path, fh.readline(), ["t", "x", "y"])
        rows = [line.strip().split(",") for line in fh if line.strip()]
    if not rows:
        raise SchemaError(f"{path}: no rows under column 't'")
    t = np.array([float(r[0]) for r in rows])
    x = np.array([int(r[1]) for r in rows])
    y = np.array([int(r[2]) for r in rows])
    return t, x, y


def read_currents(path):
    """x1,y1,x2,y2,current rows."""
    path = Path(path)
    with open(path) as fh:
        _check_header(path, fh.readline(), ["x1", "y1", "x2", "y2", "current"])
        rows = [line.strip().split(",") for line in fh if line.strip()]
    if not rows:
        raise SchemaError(f"{path}: no rows under column 'current'")
    arr = np.array([[float(v) for v in r] for r in rows])
    return arr[:, 0:2].astype(int), arr[:, 2:4].astype(int), arr[:, 4]


def read_field(path):
    """x,y,value rows; returns (x, y, value) plus the grid reshape."""
    path = Path(path)
    with open(path) as fh:
        _check_header(path, fh.readline(), ["x", "y", "value"])
        rows = [line.strip().split(",") for line in fh if line.strip()]
    if not rows:
        raise SchemaError(f"{path}: no rows under column 'value'")
    x = np.array([int(r[0]) for r in rows])
    y = np.array([int(r[1]) for r in rows])
    v = np.array([float(r[2]) for r in rows])
    xs = np.unique(x)
    ys = np.unique(y)
    grid = np.full((len(ys), len(xs)), np.nan)
    grid[y - ys.min(), x - xs.min()] = v
    if np.isnan(grid).any():
        raise SchemaError(f"{path}: rows do not tile a rectangle (column 'value')")
    return x, y, v, xs, ys, grid


def read_scaling_report(path):
    path = Path(path)
    data = json.loads(path.read_text())
    for key in ("quantity", "gamma", "sizes", "per_size", "slope"):
        if key not in data:
            raise SchemaError(f"{path}: scaling report missing field '{key}'")
    for n, block in data["per_size"].items():
        for key in ("median_log", "q25_log", "q75_log"):
            if key not in block:
                raise SchemaError(f"{path}: per_size[{n}] missing field '{key}'")
    return data
