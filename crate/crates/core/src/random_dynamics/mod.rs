//! Pathwise random equations obtained from the stochastic system through the
//! Ornstein–Uhlenbeck change of variables, and pullback sampling of their
//! random attractors.

mod noise;
mod pullback;
mod solver;

pub use noise::{NoiseConfig, NoiseMode};
pub use pullback::{
    pullback_path, pullback_sample, PullbackOptions, PullbackSample, SampleNorms, SampleSidecar,
};
pub use solver::{
    solve_additive_2d, solve_multiplicative, PathwiseNorms, PathwiseSolver, PathwiseState,
};
