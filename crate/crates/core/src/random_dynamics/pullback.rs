use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::noise::{NoiseConfig, NoiseMode};
use super::solver::PathwiseSolver;
use crate::deterministic::{PhysicsParams, SolverOptions};
use crate::error::{Error, Result};
use crate::spectral::{h_norm, norms, snapshot, Norms, SpectralVelocity};
use crate::stochastic::OuPath;

#[derive(Debug, Clone, PartialEq)]
pub struct PullbackOptions {
    pub solver: SolverOptions,
    /// State at time `−t_pull`; the zero field when absent.
    pub initial: Option<SpectralVelocity>,
    /// When set, the run is repeated from `−2·t_pull` and the two time-0
    /// states must agree to this tolerance in H.
    pub doubling_tol: Option<f64>,
}

impl Default for PullbackOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            initial: None,
            doubling_tol: None,
        }
    }
}

/// Approximation `a_ε(ω)` of the random attractor at time 0.
#[derive(Debug, Clone)]
pub struct PullbackSample {
    /// Transformed variable `v` at time 0.
    pub state: SpectralVelocity,
    /// Physical velocity `u` at time 0.
    pub reconstructed: SpectralVelocity,
    pub t_pull: f64,
    pub seed: u64,
    pub epsilon: f64,
    pub mode: NoiseMode,
    pub h: f64,
    pub z0: f64,
    /// `‖v(t_pull) − v(2 t_pull)‖_H` when the doubling test ran.
    pub doubling_change: Option<f64>,
    pub converged: bool,
}

/// Sidecar metadata written next to a sample snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSidecar {
    pub epsilon: f64,
    pub seed: u64,
    pub t_pull: f64,
    pub mode: NoiseMode,
    pub h: f64,
    pub norms: SampleNorms,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleNorms {
    pub v: Norms,
    pub u: Norms,
}

impl PullbackSample {
    pub fn sidecar(&self) -> SampleSidecar {
        SampleSidecar {
            epsilon: self.epsilon,
            seed: self.seed,
            t_pull: self.t_pull,
            mode: self.mode,
            h: self.h,
            norms: SampleNorms {
                v: norms(&self.state),
                u: norms(&self.reconstructed),
            },
        }
    }

    /// Writes `<stem>.cbff` (the `v` state) and `<stem>.json`; returns both
    /// paths.
    pub fn export(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
        let field = dir.join(format!("{stem}.cbff"));
        let meta = dir.join(format!("{stem}.json"));
        snapshot::write_file(&field, &self.state)?;
        std::fs::write(&meta, serde_json::to_string_pretty(&self.sidecar())?)?;
        Ok((field, meta))
    }
}

/// Path covering `[−2 t_pull, 0]`, shared by the single and doubled runs.
pub fn pullback_path(noise: &NoiseConfig, t_pull: f64, h: f64) -> Result<OuPath> {
    OuPath::sample(noise.seed, noise.ou_alpha, -2.0 * t_pull, 0.0, h)
}

/// Integrates the transformed system from `−t_pull` to 0 along the noise
/// path of `noise.seed` and returns the time-0 state.
pub fn pullback_sample(
    params: &PhysicsParams,
    noise: &NoiseConfig,
    t_pull: f64,
    h: f64,
    opts: &PullbackOptions,
) -> Result<PullbackSample> {
    if !(t_pull > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "t_pull must be positive, got {t_pull}"
        )));
    }
    let solver = PathwiseSolver::new(params.clone(), noise.clone(), h, opts.solver)?;
    let ou = pullback_path(noise, t_pull, h)?;
    let start = ou.wiener().tick(-t_pull)?;
    let zero = SpectralVelocity::zeros(*params.grid());
    let init = opts.initial.as_ref().unwrap_or(&zero);
    init.check_same_grid(&zero)?;
    let state = solver.advance(init, &ou, start, 0)?;
    let (doubling_change, converged) = match opts.doubling_tol {
        Some(tol) => {
            let long = solver.advance(init, &ou, 2 * start, 0)?;
            let change = h_norm(&long.sub(&state)?);
            (Some(change), change <= tol)
        }
        None => (None, true),
    };
    let z0 = ou.z_at_tick(0)?;
    Ok(PullbackSample {
        reconstructed: solver.reconstruct(&state, z0),
        state,
        t_pull,
        seed: noise.seed,
        epsilon: noise.epsilon,
        mode: noise.mode,
        h,
        z0,
        doubling_change,
        converged,
    })
}
