//! Two-sided Wiener paths and the stationary Ornstein–Uhlenbeck process
//! driving the pathwise random equations.

pub mod diagnostics;
mod ou;
mod wiener;

pub use diagnostics::{ou_abs_moment, ou_diagnostics, OuDiagnostics, OuDiagnosticsConfig};
pub use ou::{ou_shift_eval, OuPath, OuStep, ShiftedOu};
pub use wiener::{sample_wiener, WienerPath, BLOCK_STEPS};
