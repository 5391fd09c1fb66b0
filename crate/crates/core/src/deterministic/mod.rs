//! Deterministic system: parameters, smallness conditions, time stepping,
//! energy bookkeeping and the singleton attractor search.

pub mod conditions;
pub mod integrator;
pub mod params;
pub mod simulate;
pub mod singleton;

pub use conditions::{
    check_singleton_condition, evaluate_condition, grashof, reynolds, scale_forcing_to_threshold,
    ConditionInputs, ConditionReport, Regime,
};
pub use integrator::{steady_residual, EtdStepper, SolverOptions, StepCoefficients};
pub use params::{EstimateConstants, PhysicsParams};
pub use simulate::{energy_residual, simulate, Trajectory, TrajectoryRecord};
pub use singleton::{find_singleton, SingletonOptions, SingletonResult};
