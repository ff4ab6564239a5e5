"""Command-line entry point.

Subcommands expose the samplers, solvers, walks, and experiment sweeps with
explicit seeds and machine-readable outputs. Exit codes: 0 ok, 2 usage,
3 numeric failure, 4 invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import InvariantViolation, NumericError
from .geometry import Rect, centered_box
from .fieldlab.fields import sample_dgff, sample_pinned_window, synthetic_field
from .enet.crossings import crossing_resistance, origin_to_boundary_sets, restricted_crossing
from .enet.network import Network, network_from_field
from .enet.solve import effective_resistance, optimal_flow
from .exper.config import ExperimentConfig
from .exper import runs as exper_runs
from .walklab.exact import return_probability_exact
from .walklab.kernel import transition_kernel
from .walklab.simulate import simulate_walk
from . import io as gio

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_INVARIANT = 4

_SCHEMAS = {
    "sample": {"files": ["<out>.csv field CSV", "<out>.json sidecar"]},
    "resistance": {
        "value_log": "float or 'inf'",
        "value": "float or 'inf'",
        "source": "[x, y] or 'origin'",
        "target": "[x, y] or 'boundary N'",
        "residual": "float",
        "iterations": "int",
    },
    "heatkernel": {"T": "int", "p_return": "float", "field_seed": "int or null", "gamma": "float"},
    "exittime": {
        "size": "int",
        "gamma": "float",
        "expected_exit_time": "float",
        "residual_hitting_identity": "float",
        "residual_commute": "float",
    },
    "walk": {"files": ["--traj CSV t,x,y", "--pgm occupation image"], "steps": "int"},
    "scaling": {
        "quantity": "str",
        "gamma": "float",
        "sizes": "[int]",
        "replicas": "int",
        "per_size": {"<N>": {"median_log": "float", "q25_log": "float", "q75_log": "float"}},
        "slope": "float",
        "slope_stderr": "float",
        "seed": "int",
        "ledger_path": "str or null",
    },
    "crossing": {"value_log": "float", "orientation": "LR|UD", "rect": "[W, H]"},
}


def _emit(payload: dict, args) -> None:
    if not getattr(args, "deterministic", False):
        payload = dict(payload)
        payload["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _merge_config_file(args) -> None:
    """Values from --config JSON fill in flags the user left at their defaults."""
    if not getattr(args, "config", None):
        return
    data = json.loads(Path(args.config).read_text())
    for key, value in data.items():
        if hasattr(args, key) and args.__dict__.get(key) is None:
            setattr(args, key, value)


def _resolved(args) -> dict:
    skip = {"func", "schema", "config"}
    return {k: v for k, v in vars(args).items() if k not in skip and not k.startswith("_")}


# -- subcommand handlers ------------------------------------------------------


def _cmd_sample(args) -> int:
    size = args.size
    if args.kind == "dgff":
        window = centered_box(size + 1)
        ring = window.ring_indices(size + 1)
        field = sample_dgff(window, ring, args.seed)
    else:
        field = sample_pinned_window(centered_box(size), args.seed)
    gio.write_field_csv(field, args.out)
    payload = {"written": str(args.out), "resolved": _resolved(args)}
    args.out = None  # the JSON report goes to stdout; --out named the field CSV
    _emit(payload, args)
    return EXIT_OK


def _load_network(args) -> Network:
    if getattr(args, "network", None):
        return gio.read_network_csv(args.network)
    if getattr(args, "field", None):
        field = gio.read_field_csv(args.field)
    elif getattr(args, "seed", None) is not None:
        field = sample_pinned_window(centered_box(args.size), args.seed)
    else:
        raise InvariantViolation("need --network, --field, or --seed with --size")
    return network_from_field(field, args.gamma)


def _parse_point(text: str) -> tuple[int, int]:
    a, b = text.split(",")
    return int(a), int(b)


def _cmd_resistance(args) -> int:
    net = _load_network(args)
    if args.boundary is not None:
        origin, ring = origin_to_boundary_sets(net, args.boundary)
        a_idx, b_idx = origin, ring
        src, tgt = "origin", f"boundary {args.boundary}"
    else:
        if not (args.source and args.target):
            raise InvariantViolation("need --source and --target, or --boundary N")
        a_idx = np.array([net.vertex_at(*_parse_point(args.source))])
        b_idx = np.array([net.vertex_at(*_parse_point(args.target))])
        src, tgt = list(_parse_point(args.source)), list(_parse_point(args.target))
    val = effective_resistance(net, a_idx, b_idx, method=args.method)
    payload = val.report()
    payload.update({"source": src, "target": tgt, "resolved": _resolved(args)})
    if args.currents:
        flow = optimal_flow(net, a_idx, b_idx, method=args.method)
        gio.write_current_csv(net, flow.theta, args.currents)
        payload["currents"] = str(args.currents)
    _emit(payload, args)
    return EXIT_OK


def _cmd_heatkernel(args) -> int:
    size = args.size if args.size is not None else max(32, 2 * args.T + 1)
    if args.gamma == 0.0:
        field = synthetic_field(centered_box(size), 0.0)
    else:
        if args.seed is None:
            raise InvariantViolation("gamma > 0 requires --seed")
        field = sample_pinned_window(centered_box(size), args.seed)
    kernel = transition_kernel(field, args.gamma, args.boundary)
    p, lost = return_probability_exact(kernel, args.T)
    _emit(
        {
            "T": args.T,
            "p_return": p,
            "lost_mass": lost,
            "field_seed": args.seed,
            "gamma": args.gamma,
            "resolved": _resolved(args),
        },
        args,
    )
    return EXIT_OK


def _cmd_exittime(args) -> int:
    from .walklab.exact import expected_exit_time_exact

    if args.gamma == 0.0 and args.seed is None:
        field = synthetic_field(centered_box(args.size + 1), 0.0)
    else:
        if args.seed is None:
            raise InvariantViolation("gamma > 0 requires --seed")
        field = sample_pinned_window(centered_box(args.size + 1), args.seed)
    rep = expected_exit_time_exact(field, args.gamma, args.size)
    if max(rep.residual_hitting_identity, rep.residual_commute) > 1e-6:
        raise InvariantViolation("hitting/commute identity residual above 1e-6")
    if args.phi:
        from .fieldlab.fields import FieldSample

        phi_field = FieldSample(centered_box(args.size), rep.phi, kind="synthetic", seed=args.seed)
        gio.write_field_csv(phi_field, args.phi)
    _emit(
        {
            "size": args.size,
            "gamma": args.gamma,
            "expected_exit_time": rep.expected_exit_time,
            "r0_boundary_log": rep.r_origin_boundary.log_value,
            "residual_hitting_identity": rep.residual_hitting_identity,
            "residual_commute": rep.residual_commute,
            "resolved": _resolved(args),
        },
        args,
    )
    return EXIT_OK


def _cmd_walk(args) -> int:
    if args.gamma == 0.0 and args.seed is None:
        raise InvariantViolation("walk requires --seed (simulation is randomized)")
    field_seed = args.field_seed if args.field_seed is not None else args.seed
    if args.gamma == 0.0:
        field = synthetic_field(centered_box(args.size), 0.0)
    else:
        field = sample_pinned_window(centered_box(args.size), field_seed)
    kernel = transition_kernel(field, args.gamma, args.boundary)
    traj = simulate_walk(kernel, (0, 0), args.steps, args.seed)
    payload = {"steps": args.steps, "gamma": args.gamma, "resolved": _resolved(args)}
    if args.traj:
        gio.write_trajectory_csv(traj, args.traj)
        payload["traj"] = str(args.traj)
    if args.pgm:
        gio.write_pgm(traj.occupation(), args.pgm)
        payload["pgm"] = str(args.pgm)
    _emit(payload, args)
    return EXIT_OK


_SCALING_RUNNERS = {
    "exit_time": exper_runs.run_exit_time_scaling,
    "volume": exper_runs.run_volume_scaling,
    "resistance": exper_runs.run_resistance_scaling,
    "return_probability": exper_runs.run_return_probability,
}


def _cmd_scaling(args) -> int:
    if args.quantity not in _SCALING_RUNNERS:
        raise InvariantViolation(f"unknown quantity {args.quantity!r}")
    config = ExperimentConfig(
        quantity=args.quantity,
        gammas=[float(g) for g in args.gammas.split(",")],
        sizes=[int(n) for n in args.sizes.split(",")],
        replicas=args.replicas,
        base_seed=args.seed,
        gamma_units=args.gamma_units,
        workers=args.workers,
        out_dir=args.out_dir,
    )
    reports = _SCALING_RUNNERS[args.quantity](config)
    payload = {f"{g:.17g}": rep.to_json_dict() for g, rep in reports.items()}
    payload["resolved"] = _resolved(args)
    _emit(payload, args)
    return EXIT_OK


def _cmd_crossing(args) -> int:
    net = _load_network(args)
    w, h = (int(t) for t in args.rect.lower().split("x"))
    rect = Rect(-(w // 2), w - 1 - w // 2, -(h // 2), h - 1 - h // 2)
    if args.restricted:
        lo, hi = (int(t) for t in args.restricted.split(","))
        n = (min(w, h) - 1) // 2
        val = restricted_crossing(net, n, lo, hi, method=args.method)
        payload = val.report()
        payload.update({"restricted": [lo, hi], "N": n})
    else:
        val = crossing_resistance(net, rect, args.orientation, method=args.method)
        payload = val.report()
        payload.update({"orientation": args.orientation, "rect": [w, h]})
    payload["resolved"] = _resolved(args)
    _emit(payload, args)
    return EXIT_OK


def bundled_fixture_path(name: str = "four_cycle.csv") -> Path:
    return Path(str(resources.files("gfflab").joinpath("data", name)))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gfflab", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seed_required=False):
        p.add_argument("--seed", type=int, required=seed_required, help="RNG seed (explicit; no ambient entropy)")
        p.add_argument("--out", type=str, default=None, help="write JSON here instead of stdout")
        p.add_argument("--deterministic", action="store_true", help="suppress the timestamp field")
        p.add_argument("--schema", action="store_true", help="print the output schema and exit")
        p.add_argument("--config", type=str, default=None, help="JSON config merged under explicit flags")

    p = sub.add_parser("sample", help="sample a field and write CSV + sidecar")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--kind", choices=["dgff", "pinned"], default="dgff")
    common(p, seed_required=True)
    p.set_defaults(func=_cmd_sample, schema_key="sample")

    p = sub.add_parser("resistance", help="effective resistance on a field or network")
    p.add_argument("--field", type=str, default=None, help="field CSV")
    p.add_argument("--network", type=str, default=None, help="network CSV")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--size", type=int, default=16)
    p.add_argument("--source", type=str, default=None, help="x,y")
    p.add_argument("--target", type=str, default=None, help="x,y")
    p.add_argument("--boundary", type=int, default=None, help="R(0, boundary of B(N))")
    p.add_argument("--method", choices=["auto", "dense", "splu", "pcg"], default="auto")
    p.add_argument("--currents", type=str, default=None, help="write the optimal flow's edge currents here")
    common(p)
    p.set_defaults(func=_cmd_resistance, schema_key="resistance")

    p = sub.add_parser("heatkernel", help="exact return probability P(X_2T = 0)")
    p.add_argument("--T", type=int, required=True, dest="T")
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--boundary", choices=["absorb", "reflect"], default="absorb")
    common(p)
    p.set_defaults(func=_cmd_heatkernel, schema_key="heatkernel")

    p = sub.add_parser("exittime", help="exact expected exit time from B(N)")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--phi", type=str, default=None, help="write the voltage profile as a field CSV")
    common(p)
    p.set_defaults(func=_cmd_exittime, schema_key="exittime")

    p = sub.add_parser("walk", help="simulate a trajectory; write CSV/PGM")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--size", type=int, default=50)
    p.add_argument("--boundary", choices=["absorb", "reflect"], default="reflect")
    p.add_argument("--field-seed", type=int, default=None, dest="field_seed")
    p.add_argument("--traj", type=str, default=None)
    p.add_argument("--pgm", type=str, default=None)
    common(p, seed_required=True)
    p.set_defaults(func=_cmd_walk, schema_key="walk")

    p = sub.add_parser("scaling", help="scaling sweeps with reports and ledgers")
    p.add_argument("--quantity", required=True, choices=sorted(_SCALING_RUNNERS))
    p.add_argument("--gammas", type=str, required=True, help="comma separated")
    p.add_argument("--sizes", type=str, required=True, help="comma separated, increasing")
    p.add_argument("--replicas", type=int, default=1)
    p.add_argument("--gamma-units", choices=["absolute", "critical"], default="absolute", dest="gamma_units")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", type=str, default=None, dest="out_dir")
    common(p, seed_required=True)
    p.set_defaults(func=_cmd_scaling, schema_key="scaling")

    p = sub.add_parser("crossing", help="crossing / restricted crossing resistance")
    p.add_argument("--rect", type=str, default="17x17", help="WxH in vertices")
    p.add_argument("--orientation", choices=["LR", "UD"], default="LR")
    p.add_argument("--restricted", type=str, default=None, help="a,b segment of the right side")
    p.add_argument("--field", type=str, default=None)
    p.add_argument("--network", type=str, default=None)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--size", type=int, default=16)
    p.add_argument("--method", choices=["auto", "dense", "splu", "pcg"], default="auto")
    common(p)
    p.set_defaults(func=_cmd_crossing, schema_key="crossing")

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    if "--schema" in argv:
        cmd = next((a for a in argv if not a.startswith("-")), None)
        if cmd in _SCHEMAS:
            sys.stdout.write(json.dumps(_SCHEMAS[cmd], sort_keys=True, indent=2) + "\n")
            return EXIT_OK
        sys.stderr.write("--schema requires a known subcommand\n")
        return EXIT_USAGE
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    try:
        _merge_config_file(args)
        return args.func(args)
    except InvariantViolation as exc:
        sys.stderr.write(f"invariant violation: {exc}\n")
        return EXIT_INVARIANT
    except (NumericError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"numeric failure: {exc}\n")
        return EXIT_NUMERIC
    except (ValueError, KeyError, FileNotFoundError) as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
