from .network import Network, lattice_edges, network_from_edges, network_from_field
from .solve import (
    Flow,
    Potential,
    ResistanceValue,
    dirichlet_energy,
    effective_conductance,
    effective_resistance,
    harmonic_potential,
    optimal_flow,
    pairwise_resistance_dense,
    thomson_energy,
)
from .decomp import (
    CutsetFamily,
    Path,
    Splitting,
    enumerate_simple_paths,
    flow_path_decomposition,
    parallel_series_value,
    potential_cutset_decomposition,
    restricted_resistance,
    series_parallel_value,
)
from .crossings import (
    annulus_resistance,
    crossing_resistance,
    origin_to_boundary_sets,
    resistance_difference,
    restricted_crossing,
    side_vertices,
    three_node_voltage,
    voltage_from_resistances,
)
from .duality import duality_gap, field_shift_bound_check, rectangle_cross_terminals
