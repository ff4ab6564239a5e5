"""Experiment drivers: scaling sweeps, duality symmetry, concentration checks.

Every run is a pure function of (config, seeds): replica streams are keyed by
(base_seed, quantity, gamma, size, replica), aggregation order is fixed, and
re-running reproduces identical reports byte for byte. Workers only change
wall-clock time.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .. import rng as rngmod
from ..fieldlab.fields import sample_box_field, sample_pinned_window
from ..fieldlab.levels import level_set, lil_count
from ..fieldlab.split import concentric_trace
from ..geometry import centered_box
from ..enet.crossings import crossing_resistance, origin_to_boundary_sets, restricted_crossing
from ..enet.network import network_from_field
from ..enet.solve import effective_resistance
from ..walklab.exact import expected_exit_time_exact, return_probability_exact
from ..walklab.kernel import stationary_measure, transition_kernel
from .config import ExperimentConfig, ScalingReport, stat_blocks_by_size, write_ledger
from .fits import exponent_fit, psi_exponent

__all__ = [
    "run_exit_time_scaling",
    "run_volume_scaling",
    "run_resistance_scaling",
    "run_return_probability",
    "run_crossing_duality",
    "run_concentration",
    "run_level_set_concentration",
    "run_lil_check",
    "estimate_crossing_quantile",
]


def _invoke(payload):
    """Top-level trampoline (picklable) with optional numeric-failure capture."""
    fn, args, guard = payload
    if not guard:
        return fn(*args)
    from ..errors import NumericError

    try:
        return fn(*args)
    except NumericError as exc:
        return ("__error__", str(exc))


def _pmap(fn, args_list, workers: int, guard: bool = False):
    payloads = [(fn, a, guard) for a in args_list]
    if workers <= 1 or len(args_list) <= 1:
        return [_invoke(p) for p in payloads]
    import concurrent.futures as cf

    with cf.ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_invoke, payloads))


def _split_failures(args, vals):
    good_args, good_vals, failures = [], [], []
    for a, v in zip(args, vals):
        if isinstance(v, tuple) and len(v) == 2 and v[0] == "__error__":
            failures.append({"args": [str(x) for x in a[:2]], "error": v[1]})
        else:
            good_args.append(a)
            good_vals.append(v)
    return good_args, good_vals, failures


def _gtag(gamma: float) -> str:
    return f"{gamma:.17g}"


# -- per-replica workers (top level for picklability) ------------------------


def _exit_time_one(gamma, n, base_seed, replica, margin):
    field = sample_pinned_window(
        centered_box(n + 1), base_seed, margin_factor=margin,
        stream_tags=("exit", _gtag(gamma), n, replica),
    )
    rep = expected_exit_time_exact(field, gamma, n)
    return math.log(rep.expected_exit_time)


def _volume_one(gamma, n, base_seed, replica, margin):
    field = sample_pinned_window(
        centered_box(n + 1), base_seed, margin_factor=margin,
        stream_tags=("volume", _gtag(gamma), n, replica),
    )
    pi, log_offset = stationary_measure(field, gamma, centered_box(n))
    return math.log(float(pi.sum())) + log_offset


def _resistance_profile(gamma, sizes, base_seed, replica, margin):
    n_max = max(sizes)
    field = sample_pinned_window(
        centered_box(n_max + 1), base_seed, margin_factor=margin,
        stream_tags=("resistance", _gtag(gamma), n_max, replica),
    )
    out = []
    for n in sizes:
        net = network_from_field(field, gamma, centered_box(n + 1))
        o, ring = origin_to_boundary_sets(net, n)
        out.append(effective_resistance(net, o, ring).log_value)
    return out


def _return_prob_one(gamma, T, base_seed, replica, margin, box_n):
    field = sample_pinned_window(
        centered_box(box_n), base_seed, margin_factor=margin,
        stream_tags=("return", _gtag(gamma), T, replica),
    )
    kernel = transition_kernel(field, gamma, "absorb")
    p, lost = return_probability_exact(kernel, T)
    return math.log(T * p) if p > 0 else -math.inf, lost


def _crossing_pair_one(gamma, n, m, base_seed, replica):
    field = sample_box_field(m, base_seed, stream_tags=("duality", _gtag(gamma), n, m, replica))
    net = network_from_field(field, gamma, centered_box(n))
    r_lr = crossing_resistance(net, centered_box(n), "LR").log_value
    r_star_ud = crossing_resistance(net.reciprocal(), centered_box(n), "UD").log_value
    return r_lr, r_star_ud


def _crossing_one(gamma, n, base_seed, replica):
    field = sample_box_field(2 * n, base_seed, stream_tags=("conc", _gtag(gamma), n, replica))
    net = network_from_field(field, gamma, centered_box(n))
    return crossing_resistance(net, centered_box(n), "LR").log_value


def _level_card_one(n, alpha, base_seed, replica):
    field = sample_box_field(n, base_seed, stream_tags=("level", n, f"{alpha:.6f}", replica))
    return float(level_set(field, alpha).cardinality)


def _restricted_profile_one(gamma, n, alphas, base_seed, replica):
    field = sample_box_field(2 * n, base_seed, stream_tags=("quant", _gtag(gamma), n, replica))
    net = network_from_field(field, gamma, centered_box(n))
    return [restricted_crossing(net, n, a, n).log_value for a in alphas]


# -- public drivers -----------------------------------------------------------


def _scalar_sweep(config: ExperimentConfig, worker, quantity: str, extra_args=()):
    reports = {}
    ledger = []
    for gamma in config.resolved_gammas():
        args = [
            (gamma, n, config.base_seed, r) + tuple(extra_args)
            for n in config.sizes
            for r in range(config.replicas)
        ]
        vals = _pmap(worker, args, config.workers, guard=True)
        args, vals, failures = _split_failures(args, vals)
        for (g, n, _s, r, *_rest), v in zip(args, vals):
            ledger.append((gamma, n, r, config.base_seed, v))
        per_size = stat_blocks_by_size(ledger, gamma)
        per_size = {n: per_size[n] for n in config.sizes}
        slope, err = exponent_fit(config.sizes, [per_size[n]["median_log"] for n in config.sizes])
        reports[gamma] = ScalingReport(
            quantity=quantity,
            gamma=gamma,
            sizes=config.sizes,
            replicas=config.replicas,
            per_size=per_size,
            slope=slope,
            slope_stderr=err,
            seed=config.base_seed,
            psi_reference=psi_exponent(gamma),
            extras={"failed_replicas": failures} if failures else {},
        )
    _finalize(config, reports, ledger, quantity)
    return reports


def _finalize(config, reports, ledger, quantity):
    if config.out_dir:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        ledger_path = out / f"{quantity}_ledger.csv"
        write_ledger(ledger_path, ledger)
        for gamma, rep in reports.items():
            rep.ledger_path = str(ledger_path)
            rep.write(out / f"{quantity}_gamma{_gtag(gamma)}.json")


def run_exit_time_scaling(config: ExperimentConfig):
    """Median log E^0(exit time from B(N)) vs log side, per gamma."""
    return _scalar_sweep(config, _exit_time_one, "exit_time", (config.margin_factor,))


def run_volume_scaling(config: ExperimentConfig):
    """Median log pi(B(N)) vs log side, per gamma."""
    return _scalar_sweep(config, _volume_one, "volume", (config.margin_factor,))


def run_resistance_scaling(config: ExperimentConfig):
    """Median log R(0, boundary of B(N)); nested sizes share each replica's field."""
    reports = {}
    ledger = []
    for gamma in config.resolved_gammas():
        args = [
            (gamma, tuple(config.sizes), config.base_seed, r, config.margin_factor)
            for r in range(config.replicas)
        ]
        profiles = _pmap(_resistance_profile, args, config.workers, guard=True)
        args, profiles, failures = _split_failures(args, profiles)
        violations = 0
        for (g_, _sz, _s, r, _m), prof in zip(args, profiles):
            if any(b <= a for a, b in zip(prof, prof[1:])):
                violations += 1
            for n, v in zip(config.sizes, prof):
                ledger.append((gamma, n, r, config.base_seed, v))
        per_size = stat_blocks_by_size(ledger, gamma)
        per_size = {n: per_size[n] for n in config.sizes}
        slope, err = exponent_fit(config.sizes, [per_size[n]["median_log"] for n in config.sizes])
        reports[gamma] = ScalingReport(
            quantity="resistance",
            gamma=gamma,
            sizes=config.sizes,
            replicas=config.replicas,
            per_size=per_size,
            slope=slope,
            slope_stderr=err,
            seed=config.base_seed,
            psi_reference=psi_exponent(gamma),
            extras={"monotonicity_violations": violations, **({"failed_replicas": failures} if failures else {})},
        )
    _finalize(config, reports, ledger, "resistance")
    return reports


def run_return_probability(config: ExperimentConfig):
    """T * P^0(X_{2T} = 0) against the subpolynomial window e^{+-(log T)^0.7}."""
    delta = float(config.extra.get("window_delta", 0.2))
    reports = {}
    ledger = []
    for gamma in config.resolved_gammas():
        windows = {}
        losts = []
        for T in config.sizes:
            box_n = int(config.extra.get("box_halfwidth", max(32, int(4 * math.sqrt(T)))))
            args = [
                (gamma, T, config.base_seed, r, config.margin_factor, box_n)
                for r in range(config.replicas)
            ]
            vals = _pmap(_return_prob_one, args, config.workers)
            half_width = math.log(T) ** (0.5 + delta)
            inside = 0
            for r, (v, lost) in enumerate(vals):
                ledger.append((gamma, T, r, config.base_seed, v))
                losts.append(lost)
                if -half_width <= v <= half_width:
                    inside += 1
            windows[T] = {
                "window_log_halfwidth": half_width,
                "fraction_in_window": inside / config.replicas,
                "box_halfwidth": box_n,
            }
        per_size = stat_blocks_by_size(ledger, gamma)
        per_size = {t: per_size[t] for t in config.sizes}
        if len(config.sizes) >= 3:
            slope, err = exponent_fit(config.sizes, [per_size[t]["median_log"] for t in config.sizes])
        else:
            slope, err = 0.0, 0.0
        reports[gamma] = ScalingReport(
            quantity="return_probability",
            gamma=gamma,
            sizes=config.sizes,
            replicas=config.replicas,
            per_size=per_size,
            slope=slope,
            slope_stderr=err,
            seed=config.base_seed,
            psi_reference=psi_exponent(gamma),
            extras={"windows": windows, "max_lost_mass": float(np.max(losts)), "window_delta": delta},
        )
    _finalize(config, reports, ledger, "return_probability")
    return reports


def run_crossing_duality(config: ExperimentConfig):
    """Joint law of (log R_LR, log R*_UD of the reciprocal network)."""
    n = config.sizes[-1]
    m = int(config.extra.get("field_halfwidth", 2 * n))
    if m < 2 * n:
        raise ValueError("field halfwidth must be at least 2N")
    out = {}
    for gamma in config.resolved_gammas():
        args = [(gamma, n, m, config.base_seed, r) for r in range(config.replicas)]
        pairs = _pmap(_crossing_pair_one, args, config.workers)
        lr = np.array([p[0] for p in pairs])
        star = np.array([p[1] for p in pairs])
        out[gamma] = {
            "quantity": "crossing_duality",
            "gamma": gamma,
            "N": n,
            "M": m,
            "replicas": config.replicas,
            "seed": config.base_seed,
            "median_log_r_lr": float(np.median(lr)),
            "median_log_r_star_ud": float(np.median(star)),
            "symmetry_statistic": float(abs(np.median(lr) + np.median(star))),
            "median_log_product": float(np.median(lr + star)),
        }
        if config.out_dir:
            write_ledger(
                Path(config.out_dir) / f"duality_gamma{_gtag(gamma)}_ledger.csv",
                [(gamma, n, r, config.base_seed, float(v)) for r, v in enumerate(lr)]
                + [(gamma, -n, r, config.base_seed, float(v)) for r, v in enumerate(star)],
            )
    return out


def run_concentration(config: ExperimentConfig):
    """Std of log crossing resistance per (gamma, N), scaled by sqrt(log N)."""
    out = {}
    for gamma in config.resolved_gammas():
        sig = {}
        for n in config.sizes:
            args = [(gamma, n, config.base_seed, r) for r in range(config.replicas)]
            vals = np.array(_pmap(_crossing_one, args, config.workers))
            sig[n] = {
                "sigma": float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0,
                "sigma_over_sqrt_log": float(np.std(vals, ddof=1) / math.sqrt(math.log(n)))
                if len(vals) > 1
                else 0.0,
                "median_log": float(np.median(vals)),
            }
        out[gamma] = {
            "quantity": "concentration",
            "gamma": gamma,
            "replicas": config.replicas,
            "seed": config.base_seed,
            "per_size": sig,
        }
    return out


def run_level_set_concentration(config: ExperimentConfig):
    """Frequency of |level set| <= delta * empirical mean, several deltas."""
    alpha = float(config.extra.get("alpha", 0.5))
    deltas = config.extra.get("deltas", (0.05, 0.1, 0.2))
    n = config.sizes[-1]
    args = [(n, alpha, config.base_seed, r) for r in range(config.replicas)]
    cards = np.array(_pmap(_level_card_one, args, config.workers))
    mean = float(cards.mean())
    freq = {
        f"{d:g}": float(np.mean(cards <= d * mean)) if mean > 0 else 1.0 for d in deltas
    }
    report = {
        "quantity": "level_set_concentration",
        "N": n,
        "alpha": alpha,
        "replicas": config.replicas,
        "seed": config.base_seed,
        "mean_cardinality": mean,
        "frequency_below_delta_mean": freq,
    }
    if config.out_dir:
        write_ledger(
            Path(config.out_dir) / "level_set_ledger.csv",
            [(alpha, n, r, config.base_seed, float(c)) for r, c in enumerate(cards)],
        )
    return report


def run_lil_check(config: ExperimentConfig):
    """Distribution of the LIL count for Gaussian walks with the concentric variances."""
    b = int(config.extra.get("base", 2))
    depth = int(config.extra.get("depth", 10))
    inner = int(config.extra.get("inner", 1))
    trace = concentric_trace(b, depth, inner)
    incs = trace.increments
    counts = []
    for r in range(config.replicas):
        gen = rngmod.stream(config.base_seed, "lil", r)
        steps = gen.standard_normal(len(incs)) * np.sqrt(incs)
        s = np.cumsum(steps)
        counts.append(lil_count(s, np.cumsum(incs)))
    counts = np.array(counts)
    return {
        "quantity": "lil_check",
        "base": b,
        "depth": depth,
        "replicas": config.replicas,
        "seed": config.base_seed,
        "mean_count": float(counts.mean()),
        "fraction_positive": float(np.mean(counts >= 1)),
        "count_quantiles": {q: float(np.quantile(counts, q)) for q in (0.1, 0.5, 0.9)},
    }


def estimate_crossing_quantile(config: ExperimentConfig):
    """The empirical phi_N(alpha) curve and the 0.99-rule alpha_N estimate.

    phi_N(alpha) = P(restricted crossing R_{N,[alpha,N]} exceeds
    (4 + C1) e^{c_hat log log 2N}); the proof constants c_hat, C1 are config
    knobs (the theory provides existence, not values).
    """
    n = config.sizes[-1]
    c_hat = float(config.extra.get("c_hat", 1.0))
    c1 = float(config.extra.get("C1", 10.0))
    alphas = list(range(0, n // 2 + 1))
    threshold_log = math.log(4.0 + c1) + c_hat * math.log(math.log(2 * n))
    out = {}
    for gamma in config.resolved_gammas():
        args = [(gamma, n, tuple(alphas), config.base_seed, r) for r in range(config.replicas)]
        profiles = np.array(_pmap(_restricted_profile_one, args, config.workers))
        phi = (profiles > threshold_log).mean(axis=0)
        exceeding = [a for a, p in zip(alphas, phi) if p > 0.99]
        alpha_n = exceeding[0] if exceeding else n // 2
        out[gamma] = {
            "quantity": "crossing_quantile",
            "gamma": gamma,
            "N": n,
            "replicas": config.replicas,
            "seed": config.base_seed,
            "c_hat": c_hat,
            "C1": c1,
            "threshold_log": threshold_log,
            "phi_curve": {str(a): float(p) for a, p in zip(alphas, phi)},
            "alpha_N": int(alpha_n),
        }
    return out
