"""Sequential building of sunlit settlements on rectangular grids.

Simulation, exact enumeration and Monte Carlo density estimation for maximal
configurations in which no house has its west, east and south neighbours all
occupied.
"""

from .builder import (
    PRNG_ID,
    BuildOutcome,
    BuildState,
    Permutation,
    build_from_permutation,
    derive_seed,
    simulate_one,
    trace_build,
    try_build,
)
from .enumeration import (
    conjecture1_report,
    count_preimages,
    enumerate_maximal,
    xs_distribution_exact,
    xu_distribution,
)
from .errors import ContractViolation, ResourceError
from .grid import (
    Config,
    Dims,
    Lot,
    can_build,
    density,
    is_blocked,
    is_maximal,
    is_permissible,
    mirror_ew,
    occupancy,
    render_ascii,
)
from .montecarlo import (
    DensityStats,
    SimulationPlan,
    density_table,
    monotonicity_report,
    percentile_band_sweep,
    run_batch,
)

__version__ = "0.1.0"
