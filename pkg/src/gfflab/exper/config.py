"""Experiment configuration and report containers."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

GAMMA_C = math.sqrt(math.pi / 2.0)

__all__ = ["GAMMA_C", "ExperimentConfig", "ScalingReport", "write_ledger", "read_ledger"]


@dataclass
class ExperimentConfig:
    quantity: str
    gammas: list
    sizes: list
    replicas: int = 1
    base_seed: int = 0
    gamma_units: str = "absolute"  # "absolute" | "critical" (multiples of gamma_c)
    margin_factor: float = 4.0
    solver_method: str = "auto"
    workers: int = 1
    out_dir: str | None = None
    extra: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        self.sizes = [int(n) for n in self.sizes]
        self.gammas = [float(g) for g in self.gammas]
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValueError("sizes must be strictly increasing")
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if self.gamma_units not in ("absolute", "critical"):
            raise ValueError("gamma_units must be 'absolute' or 'critical'")

    def resolved_gammas(self) -> list:
        if self.gamma_units == "critical":
            return [g * GAMMA_C for g in self.gammas]
        return list(self.gammas)


def _stat_block(logs: np.ndarray) -> dict:
    return {
        "median_log": float(np.median(logs)),
        "q25_log": float(np.quantile(logs, 0.25)),
        "q75_log": float(np.quantile(logs, 0.75)),
        "mean_log": float(np.mean(logs)),
    }


@dataclass
class ScalingReport:
    quantity: str
    gamma: float
    sizes: list
    replicas: int
    per_size: dict  # size -> stat block
    slope: float
    slope_stderr: float
    seed: int
    ledger_path: str | None = None
    psi_reference: float | None = None
    extras: dict = dc_field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "gamma": self.gamma,
            "sizes": list(self.sizes),
            "replicas": self.replicas,
            "per_size": {str(k): v for k, v in sorted(self.per_size.items())},
            "slope": self.slope,
            "slope_stderr": self.slope_stderr,
            "seed": self.seed,
            "ledger_path": self.ledger_path,
            "psi_reference": self.psi_reference,
            "extras": _jsonable(self.extras),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.to_json())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def write_ledger(path, rows) -> None:
    """Ledger CSV: gamma,N,replica,seed,value_log, one row per raw sample."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write("gamma,N,replica,seed,value_log\n")
        for gamma, n, replica, seed, value_log in rows:
            fh.write(f"{float(gamma)!r},{n},{replica},{seed},{float(value_log)!r}\n")


def read_ledger(path):
    rows = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "gamma,N,replica,seed,value_log":
            raise ValueError(f"unexpected ledger header {header!r}")
        for line in fh:
            g, n, r, s, v = line.strip().split(",")
            rows.append((float(g), int(n), int(r), int(s), float(v)))
    return rows


def stat_blocks_by_size(rows, gamma) -> dict:
    out = {}
    by_n = {}
    for g, n, r, s, v in rows:
        if g == gamma:
            by_n.setdefault(n, []).append(v)
    for n, vals in by_n.items():
        out[n] = _stat_block(np.array(vals))
    return out
