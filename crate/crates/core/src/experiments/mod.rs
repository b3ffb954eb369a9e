//! Parameter sweeps, optimum tracking and model validations.

mod curves;
mod sweep;
mod validation;

pub use curves::{
    crossing, optimal_curve, temperature_grid, thermal_sweep, OptimalCurve, ThermalCurve,
    ThermalSweep, THERMAL_STEP,
};
pub use sweep::{
    evaluate_point, locate_minimum, sweep_1d, sweep_2d, Axis, AxisSpec, Cell, CellFlag, Channel,
    GridMinimum, SweepGrid, SweepOptions,
};
pub use validation::{
    adiabatic_validation, check_regime, convergence_check, relative_deviation, AdiabaticInputs,
    ConvergenceRow, ConvergenceTable, ValidationReport, CONVERGENCE_TOLERANCE, COUPLING_MARGIN,
    DETUNING_MARGIN,
};
