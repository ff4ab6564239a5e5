"""Harness: exponent formula, fits, reproducibility, quantile machinery."""

import json
import math

import numpy as np
import pytest

from gfflab import rng as rngmod
from gfflab.exper import (
    GAMMA_C,
    ExperimentConfig,
    estimate_crossing_quantile,
    exponent_fit,
    psi_exponent,
    read_ledger,
    run_concentration,
    run_crossing_duality,
    run_level_set_concentration,
    run_lil_check,
    run_resistance_scaling,
    run_volume_scaling,
)
from gfflab.exper.config import stat_blocks_by_size


def test_psi_values_and_continuity():
    assert psi_exponent(0.0) == 2.0
    assert psi_exponent(GAMMA_C) == 4.0
    assert psi_exponent(2 * GAMMA_C) == 8.0
    assert psi_exponent(0.5 * GAMMA_C) == pytest.approx(2.5)
    eps = 1e-9
    assert psi_exponent(GAMMA_C - eps) == pytest.approx(psi_exponent(GAMMA_C + eps), abs=1e-6)
    with pytest.raises(ValueError):
        psi_exponent(-0.1)


def test_exponent_fit_exact_and_noise():
    sizes = [8, 16, 32, 64]
    logs = [2 * math.log(2 * n + 1) for n in sizes]
    slope, err = exponent_fit(sizes, logs)
    assert slope == pytest.approx(2.0, abs=1e-12)
    assert err <= 1e-12

    slope, err = exponent_fit(sizes, [5.0] * 4)
    assert slope == pytest.approx(0.0, abs=1e-12)

    gen = rngmod.stream(99, "fit-noise")
    slopes = []
    for _ in range(100):
        noisy = [2 * math.log(2 * n + 1) + math.log(1 + 0.1 * gen.uniform(-1, 1)) for n in sizes]
        s, _ = exponent_fit(sizes, noisy)
        slopes.append(s)
    assert abs(np.mean(slopes) - 2.0) <= 0.05

    with pytest.raises(ValueError):
        exponent_fit([8, 16], [1.0, 2.0])


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig("q", [0.0], [8, 8], 1)
    with pytest.raises(ValueError):
        ExperimentConfig("q", [0.0], [8, 16], 0)
    cfg = ExperimentConfig("q", [0.5], [4, 8], 1, gamma_units="critical")
    assert cfg.resolved_gammas()[0] == pytest.approx(0.5 * GAMMA_C)


def test_report_reproducible_and_ledger_roundtrip(tmp_path):
    cfg = ExperimentConfig(
        "volume", [0.4], [4, 8, 16], replicas=3, base_seed=5, out_dir=str(tmp_path)
    )
    rep1 = run_volume_scaling(cfg)[0.4]
    rep2 = run_volume_scaling(cfg)[0.4]
    assert rep1.to_json() == rep2.to_json()

    rows = read_ledger(rep1.ledger_path)
    assert len(rows) == 3 * 3
    blocks = stat_blocks_by_size(rows, 0.4)
    for n in cfg.sizes:
        assert blocks[n]["median_log"] == rep1.per_size[n]["median_log"]

    payload = json.loads(rep1.to_json())
    for key in ("quantity", "gamma", "sizes", "replicas", "per_size", "slope", "slope_stderr", "seed", "ledger_path"):
        assert key in payload


def test_workers_do_not_change_results(tmp_path):
    cfg1 = ExperimentConfig("volume", [0.3], [4, 8, 16], replicas=4, base_seed=6)
    cfg2 = ExperimentConfig("volume", [0.3], [4, 8, 16], replicas=4, base_seed=6, workers=2)
    assert run_volume_scaling(cfg1)[0.3].to_json() == run_volume_scaling(cfg2)[0.3].to_json()


def test_resistance_monotonicity_tracked():
    cfg = ExperimentConfig("resistance", [0.6], [4, 8, 16], replicas=5, base_seed=8)
    rep = run_resistance_scaling(cfg)[0.6]
    assert rep.extras["monotonicity_violations"] == 0


def test_duality_flat_gamma_zero():
    cfg = ExperimentConfig("duality", [0.0], [8], replicas=2, base_seed=1)
    rep = run_crossing_duality(cfg)[0.0]
    # gamma = 0: deterministic unit network; R_LR = R, R*_UD = R, product constant
    assert rep["median_log_r_lr"] == pytest.approx(rep["median_log_r_star_ud"], abs=1e-12)
    assert rep["median_log_product"] == pytest.approx(
        rep["median_log_r_lr"] + rep["median_log_r_star_ud"], abs=1e-12
    )


def test_concentration_gamma_zero_is_deterministic():
    cfg = ExperimentConfig("conc", [0.0], [8], replicas=4, base_seed=2)
    rep = run_concentration(cfg)[0.0]
    assert rep["per_size"][8]["sigma"] == pytest.approx(0.0, abs=1e-14)


def test_level_set_run_with_synthetic_control():
    cfg = ExperimentConfig("level", [0.0], [16], replicas=10, base_seed=3, extra={"alpha": 0.0})
    rep = run_level_set_concentration(cfg)
    assert rep["mean_cardinality"] > 0
    assert set(rep["frequency_below_delta_mean"]) == {"0.05", "0.1", "0.2"}


def test_lil_run_deterministic_shape():
    cfg = ExperimentConfig("lil", [0.0], [1], replicas=50, base_seed=4, extra={"depth": 8})
    rep = run_lil_check(cfg)
    assert 0.0 <= rep["fraction_positive"] <= 1.0
    rep2 = run_lil_check(cfg)
    assert rep == rep2


def test_quantile_unit_network_deterministic():
    # gamma = 0: restricted crossings are deterministic; alpha_N is the first
    # alpha whose resistance exceeds the configured threshold (or N/2)
    cfg = ExperimentConfig("quant", [0.0], [8], replicas=1, base_seed=5, extra={"c_hat": 1.0, "C1": 10.0})
    rep = estimate_crossing_quantile(cfg)[0.0]
    threshold = rep["threshold_log"]
    from gfflab.enet import network_from_field, restricted_crossing
    from gfflab.fieldlab import synthetic_field
    from gfflab.geometry import centered_box

    net = network_from_field(synthetic_field(centered_box(8), 0.0), 0.0)
    expected = next(
        (a for a in range(0, 5) if restricted_crossing(net, 8, a, 8).log_value > threshold), 4
    )
    assert rep["alpha_N"] == expected
    assert all(v in (0.0, 1.0) for v in rep["phi_curve"].values())


def test_concentration_bounded_across_sizes():
    # sigma_N / sqrt(log N) stays bounded along the size sweep at gamma_c
    cfg = ExperimentConfig("conc", [1.0], [16, 64], replicas=80, base_seed=1234, gamma_units="critical")
    rep = run_concentration(cfg)[GAMMA_C]
    s16 = rep["per_size"][16]["sigma_over_sqrt_log"]
    s64 = rep["per_size"][64]["sigma_over_sqrt_log"]
    assert max(s16, s64) / min(s16, s64) <= 1.5


def test_concentration_lipschitz_in_gamma():
    # doubling gamma roughly doubles the log-resistance spread (2gamma-Lipschitz
    # dependence on the field); measured 1.9-2.2 at these settings
    cfg1 = ExperimentConfig("conc", [0.4], [32], replicas=150, base_seed=1234)
    cfg2 = ExperimentConfig("conc", [0.8], [32], replicas=150, base_seed=1234)
    s1 = run_concentration(cfg1)[0.4]["per_size"][32]["sigma"]
    s2 = run_concentration(cfg2)[0.8]["per_size"][32]["sigma"]
    assert 1.5 <= s2 / s1 <= 2.5
