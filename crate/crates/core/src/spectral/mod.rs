//! Spectral representation of periodic, mean-zero, divergence-free vector
//! fields on the torus and the operators acting on them.

mod field;
mod grid;
pub mod ops;
pub mod snapshot;
pub(crate) mod transform;

pub use field::{PhysicalField, SpectralVelocity};
pub use grid::TorusGrid;
pub use ops::{
    bilinear, damping, h_norm, inner, leray_project, lp_integral, lr_norm, norms, stokes_apply,
    trilinear, Norms,
};
