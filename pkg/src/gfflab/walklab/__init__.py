from .kernel import (
    WalkKernel,
    interpolated_generator,
    lrw_generator,
    stationarity_residual,
    stationary_measure,
    transition_kernel,
    transition_kernel_from_gradients,
)
from .exact import (
    HittingReport,
    expected_exit_time_exact,
    heat_kernel_sequence,
    moderate_set,
    return_probability_exact,
)
from .simulate import TrajectoryRecord, ensemble_returns, simulate_ctmc, simulate_walk
