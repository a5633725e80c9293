"""Optimal VWAP execution under general market impact functions."""

from .engine import (
    RevenueEstimate,
    closed_form_value,
    conditional_expected_revenue,
    is_cost,
    simulate,
)
from .errors import (
    BracketFailure,
    ConfigError,
    EnumerationTooLarge,
    GridMismatch,
    ImpactDomainError,
    ImpactShapeError,
    InvalidFamily,
    InvalidPaths,
    NegativeH,
    NonMonotoneTail,
    NonPositiveRate,
    NoRootAboveKnee,
    VwapOptError,
)
from .impact import (
    ENDOGENOUS,
    EXOGENOUS,
    ImpactFunction,
    SolvedRate,
    ValidationReport,
    make_hat_log_impact,
    make_kneed_impact,
    make_piecewise_h_impact,
    make_power_impact,
    solve_nu,
    validate,
)
from .market import (
    FeasibilityReport,
    MarketParams,
    VolumeModel,
    VolumePath,
    build_deterministic_path,
    check_feasibility,
    load_volume_csv,
    sample_volume_path,
)
from .oracle import OracleResult, brute_force
from .strategy import (
    RateSchedule,
    Strategy,
    load_schedule_csv,
    optimal_vwap,
    pov,
    realize,
    schedule,
    twap,
)

__version__ = "0.1.0"
