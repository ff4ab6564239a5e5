"""File formats: field/network/trajectory CSV, PGM occupation images, JSON reports.

Formats are plain text so plot scripts and humans can both read them:
  field CSV        x,y,value rows in row-major order + JSON sidecar
  network CSV      x1,y1,x2,y2,log_conductance
  edge-current CSV x1,y1,x2,y2,current
  trajectory CSV   t,x,y
  occupation PGM   P2 grayscale, max-normalized visit counts
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .geometry import LatticeBox
from .fieldlab.fields import FieldSample
from .enet.network import Network

__all__ = [
    "write_field_csv",
    "read_field_csv",
    "write_network_csv",
    "read_network_csv",
    "write_trajectory_csv",
    "write_current_csv",
    "write_pgm",
]


def _dirichlet_tag(field: FieldSample) -> str:
    box = field.domain
    idx = set(int(i) for i in field.dirichlet_idx)
    origin = box.contains(0, 0) and int(box.index(0, 0)) in idx
    x, y = box.all_coords()
    edge = (x == box.xmin) | (x == box.xmax) | (y == box.ymin) | (y == box.ymax)
    ring = set(np.nonzero(edge)[0].tolist())
    boundary = len(idx) > 0 and ring.issubset(idx)
    if origin and boundary:
        return "both"
    if origin:
        return "origin"
    if boundary:
        return "boundary"
    return "none"


def write_field_csv(field: FieldSample, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    x, y = field.domain.all_coords()
    with open(path, "w") as fh:
        fh.write("x,y,value\n")
        for xi, yi, v in zip(x, y, field.values):
            fh.write(f"{xi},{yi},{float(v)!r}\n")
    meta = {
        "kind": field.kind,
        "seed": field.seed,
        "domain": {
            "cx": field.domain.cx,
            "cy": field.domain.cy,
            "hx": field.domain.hx,
            "hy": field.domain.hy,
        },
        "dirichlet": _dirichlet_tag(field),
    }
    path.with_suffix(".json").write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")


def read_field_csv(path) -> FieldSample:
    path = Path(path)
    xs, ys, vals = [], [], []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "x,y,value":
            raise ValueError(f"not a field CSV (header {header!r})")
        for line in fh:
            a, b, c = line.strip().split(",")
            xs.append(int(a))
            ys.append(int(b))
            vals.append(float(c))
    meta_path = path.with_suffix(".json")
    kind, seed = "synthetic", None
    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
        kind = meta.get("kind", "synthetic")
        seed = meta.get("seed")
        d = meta["domain"]
        box = LatticeBox(d["cx"], d["cy"], d["hx"], d["hy"])
    else:
        box = LatticeBox(
            (min(xs) + max(xs)) // 2,
            (min(ys) + max(ys)) // 2,
            (max(xs) - min(xs)) // 2,
            (max(ys) - min(ys)) // 2,
        )
    values = np.empty(box.nvertices)
    values[box.index(np.array(xs), np.array(ys))] = vals
    # only mark structurally-zero vertices that match the recorded pattern
    dir_idx = []
    if meta_path.exists():
        tag = meta.get("dirichlet", "none")
        x, y = box.all_coords()
        if tag in ("origin", "both") and box.contains(0, 0):
            dir_idx.append(int(box.index(0, 0)))
        if tag in ("boundary", "both"):
            edge = (x == box.xmin) | (x == box.xmax) | (y == box.ymin) | (y == box.ymax)
            dir_idx.extend(np.nonzero(edge)[0].tolist())
    return FieldSample(box, values, np.array(sorted(set(dir_idx)), dtype=np.int64), kind=kind, seed=seed)


def write_network_csv(net: Network, path) -> None:
    if net.coords is None:
        raise ValueError("network CSV requires geometry")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write("x1,y1,x2,y2,log_conductance\n")
        for u, v, lc in zip(net.edge_u, net.edge_v, net.log_c):
            x1, y1 = net.coords[u]
            x2, y2 = net.coords[v]
            fh.write(f"{x1},{y1},{x2},{y2},{float(lc)!r}\n")


def read_network_csv(path) -> Network:
    xs1, ys1, xs2, ys2, lcs = [], [], [], [], []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "x1,y1,x2,y2,log_conductance":
            raise ValueError(f"not a network CSV (header {header!r})")
        for line in fh:
            a, b, c, d, e = line.strip().split(",")
            xs1.append(int(a))
            ys1.append(int(b))
            xs2.append(int(c))
            ys2.append(int(d))
            lcs.append(float(e))
    pts = sorted(set(zip(xs1, ys1)) | set(zip(xs2, ys2)))
    index = {p: i for i, p in enumerate(pts)}
    eu = np.array([index[p] for p in zip(xs1, ys1)], dtype=np.int64)
    ev = np.array([index[p] for p in zip(xs2, ys2)], dtype=np.int64)
    return Network(
        len(pts),
        eu,
        ev,
        np.array(lcs),
        log_offset=0.0,
        coords=np.array(pts, dtype=np.int64),
    )


def write_trajectory_csv(traj, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write("t,x,y\n")
        for t, x, y in traj.rows():
            t_repr = int(t) if float(t).is_integer() else repr(float(t))
            fh.write(f"{t_repr},{x},{y}\n")


def write_current_csv(net: Network, theta: np.ndarray, path) -> None:
    if net.coords is None:
        raise ValueError("current CSV requires geometry")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write("x1,y1,x2,y2,current\n")
        for u, v, th in zip(net.edge_u, net.edge_v, theta):
            x1, y1 = net.coords[u]
            x2, y2 = net.coords[v]
            fh.write(f"{x1},{y1},{x2},{y2},{float(th)!r}\n")


def write_pgm(grid: np.ndarray, path, maxval: int = 255) -> None:
    """P2 (ASCII) PGM of a nonnegative grid, max-normalized."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    grid = np.asarray(grid, dtype=float)
    top = grid.max()
    scaled = np.zeros_like(grid, dtype=np.int64) if top <= 0 else np.round(grid / top * maxval).astype(np.int64)
    ny, nx = grid.shape
    lines = [f"P2", f"{nx} {ny}", f"{maxval}"]
    for row in scaled[::-1]:  # image rows top-to-bottom = decreasing y
        lines.append(" ".join(str(int(v)) for v in row))
    path.write_text("\n".join(lines) + "\n")
