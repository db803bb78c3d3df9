"""Outage probability and outage capacity of opportunistic beamforming
with Poisson-distributed users."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    INFINITE, Kind, ModelError, OutageQuery, PathLossModel, SystemConfig,
    UnsupportedOperation, gain, generalized_inverse, pathloss_cdf,
)
from .specfun import complete_gamma, lower_incomplete_gamma  # noqa: E402
from .outage import (  # noqa: E402
    Method, OutageResult, conditional_sinr_cdf, outage_bounded, outage_general,
    outage_unbounded, rate_outage, sinr_outage,
)
from .capacity import (  # noqa: E402
    CapacityEquation, CapacitySolution, capacity_finite_d, capacity_single_beam_closed_form,
    large_system_capacity, scaling_diagnostic, solve_capacity_bounded, solve_capacity_unbounded,
)
from .montecarlo import (  # noqa: E402
    EmpiricalCdf, Mode, SimSeed, beam_sinrs, drop_users, empirical_outage_capacity, run_trials,
)
