from .fields import (
    FieldSample,
    GibbsMarkovSplit,
    gibbs_markov_split,
    harmonic_measure,
    sample_box_field,
    sample_dgff,
    sample_pinned_window,
    synthetic_field,
)
from .greens import (
    GRID_G,
    GreenOracle,
    RectPoisson,
    box_green_nn_forms,
    box_green_origin,
    green_matrix,
    pinned_covariance,
    potential_kernel,
    potential_kernel_c0,
)
from .levels import LevelSetReport, level_set, lil_count, lil_phi
from .split import ConcentricTrace, LazyKernelSplit, concentric_trace, lazy_kernel_split
