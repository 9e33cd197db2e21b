"""Green's-function solver for the Kuramoto-Sivashinsky equation.

Solves u_t + u u_x + u_xx + nu u_xxxx = 0 on [-1, 1] with fixed boundary
values u(-1) = l, u(1) = r and u_xx(+-1) = 0. Time stepping uses
semi-implicit backward differentiation formulae of orders 1 to 4; each
step applies the analytic Green's function of the implicit operator by
Clenshaw-Curtis quadrature on Chebyshev sub-grids, so no differentiation
matrices or linear solves appear anywhere.
"""

from .cheb import (
    ChebyshevGrid,
    bary_weights,
    chebyshev_nodes,
    clenshaw_curtis_row,
    interpolation_matrix,
)
from .config import RunConfig, load_config, parse_config
from .errors import (
    BlowUpError,
    CacheMismatchError,
    ConfigError,
    DegenerateSpectrumError,
    KsgreenError,
    PartitionError,
    RealRootError,
    SeedingUnstableError,
    StatisticsError,
)
from .experiments import (
    StabilityMap,
    boundary_layer_profile,
    contour_export,
    convergence_test,
    fit_order,
    layer_settling_length,
    quadrature_error_test,
    random_mode_amplitudes,
    real_root_transition_h,
    simulate_series,
    stability_scan,
    test_function,
)
from .greens import (
    GreenAux,
    ProblemParams,
    eigen_sum_oracle,
    green_aux,
    green_deriv_eval,
    green_eval,
)
from .operators import (
    ConvolutionOperators,
    ResourceError,
    SubgridPolicy,
    build_operators,
    load_operators,
    merge_partitions,
    save_operators,
)
from .stepping import (
    SbdfScheme,
    SimState,
    integrands,
    linear_growth_rates,
    load_checkpoint,
    save_checkpoint,
    sbdf_scheme,
    seed_eigenmode_growth,
    seed_exact_soliton,
    seed_richardson,
    seed_small_step_order1,
    soliton,
    soliton_limits,
    step,
)
from .series_io import TimeSeriesWriter, read_time_series, write_csv

__version__ = "0.1.0"
