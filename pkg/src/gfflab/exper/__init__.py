from .config import GAMMA_C, ExperimentConfig, ScalingReport, read_ledger, write_ledger
from .fits import exponent_fit, psi_exponent
from .runs import (
    estimate_crossing_quantile,
    run_concentration,
    run_crossing_duality,
    run_exit_time_scaling,
    run_level_set_concentration,
    run_lil_check,
    run_resistance_scaling,
    run_return_probability,
    run_volume_scaling,
)
