"""Minimum-time cell-mapping control of a two-box energy-balance climate model."""
from .cellspace import SINK, CellGrid, Region
from .config import RunConfig
from .integrator import QUARTER, YEAR, TimeStep, integrate_interval, rk4_step
from .model import (
    ClimateState,
    EquilibriumError,
    ModelParams,
    NumericalBlowUp,
    equilibrium,
    jacobian,
    net_flux,
    rhs,
    shortwave_coefficients,
)
from .simulate import (
    ControlLost,
    ScenarioReport,
    Trajectory,
    closed_loop,
    offset_scenario,
    open_loop,
    regulator_scenario,
)
from .synthesis import (
    DocTable,
    TransitionTable,
    build_transitions,
    control_levels,
    controllable_region,
    solve_min_time,
)

__version__ = "0.1.0"
