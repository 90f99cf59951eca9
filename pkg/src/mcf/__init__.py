"""Graph models of multidimensional continued fraction algorithms."""

from .graph import (
    Edge,
    GraphError,
    SimplicialSystem,
    check_non_degenerating,
    degenerate_subgraph,
    find_positive_path,
    strongly_connected_components,
    validate_system,
)
from .induction import (
    BoundaryTieError,
    HoleReachedError,
    MaxStepsExceeded,
    birkhoff_contraction,
    code_point,
    hilbert_distance,
    in_cylinder,
    induced_step,
    orbit,
    step,
)
from .catalog import NAMES as CATALOG_NAMES
from .catalog import DomainEscape, build, conjugacy_check, gasket_survival
from .stochastic import (
    Escape,
    Jump,
    JumpCoord,
    LeaveSubgraph,
    Lose,
    MinMax,
    StepCount,
    StoppingTime,
    SuffixPattern,
    Win,
    cylinder_measure,
    edge_law,
    estimate_order_prob,
    path_probability,
    sample_simplex_point,
    sample_walk,
)
from .thermo import (
    asymptotic_gasket_bound,
    build_induced_alphabet,
    hausdorff_bound,
    partition_sum,
    perron_value,
    pressure_analysis,
    solve_kappa,
)

__version__ = "0.1.0"
