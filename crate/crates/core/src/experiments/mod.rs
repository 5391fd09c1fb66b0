//! Distance measurements between random and deterministic attractors, rate
//! sweeps over the noise intensity, and contraction measurements.

mod contraction;
mod rates;

pub use contraction::{
    contraction_experiment, contraction_for_seeds, tail_slope, ContractionReport,
    ContractionSettings, PairContraction,
};
pub use rates::{
    check_rate_regime, delta_theory, field_distance, fit_rate, measure_distance, rate_sweep,
    sweep_records, write_sweep_csv, RateFit, SweepPlan, SweepRecord, SweepResult, SWEEP_CSV_HEADER,
};
