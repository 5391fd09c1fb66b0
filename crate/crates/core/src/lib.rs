//! Pseudo-spectral laboratory for the convective Brinkman–Forchheimer
//! equations on the 2D/3D torus.
//!
//! The crate covers the deterministic system
//! `du/dt + μAu + B(u) + βC(u) = f`, its pathwise random counterparts with
//! additive and multiplicative Stratonovich noise (integrated through the
//! Ornstein–Uhlenbeck change of variables), pullback sampling of random
//! attractors, and sweeps that fit the rate at which those attractors
//! approach the deterministic singleton attractor as the noise vanishes.

pub mod config;
pub mod deterministic;
mod error;
pub mod experiments;
pub mod random_dynamics;
pub mod report;
pub mod run;
pub mod spectral;
pub mod stats;
pub mod stochastic;

pub use error::{Error, Result};
