use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::integrator::{steady_residual, step_count, EtdStepper, SolverOptions, StepCoefficients};
use super::params::PhysicsParams;
use crate::error::{Error, Result};
use crate::spectral::{h_norm, SpectralVelocity};
use crate::stats::linear_fit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingletonOptions {
    /// Bound on pairwise probe distances and on the discrete drift.
    pub tol: f64,
    pub max_t: f64,
    pub n_probes: usize,
    pub h: f64,
    /// Time between convergence checks.
    pub check_interval: f64,
    /// Probe `i` is drawn with seed `seed + i`.
    pub seed: u64,
    pub solver: SolverOptions,
}

impl Default for SingletonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_t: 200.0,
            n_probes: 3,
            h: 0.01,
            check_interval: 0.5,
            seed: 0,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionEntry {
    pub t: f64,
    /// Largest pairwise `‖u_i − u_j‖_H` among the probes.
    pub max_distance: f64,
    /// Largest `‖u(t) − u(t − h)‖_H / h` among the probes.
    pub drift: f64,
}

#[derive(Debug, Clone)]
pub struct SingletonResult {
    pub a_star: SpectralVelocity,
    pub converged: bool,
    pub log: Vec<ContractionEntry>,
    pub probe_seeds: Vec<u64>,
}

impl SingletonResult {
    /// Least-squares slope of `ln(max_distance²)` against `t` over the later
    /// half of the log.
    pub fn tail_slope(&self) -> Result<f64> {
        let entries: Vec<_> = self.log.iter().filter(|e| e.max_distance > 0.0).collect();
        let tail = &entries[entries.len() / 2..];
        let t: Vec<f64> = tail.iter().map(|e| e.t).collect();
        let y: Vec<f64> = tail
            .iter()
            .map(|e| (e.max_distance * e.max_distance).ln())
            .collect();
        Ok(linear_fit(&t, &y)?.slope)
    }

    pub fn steady_residual(&self, params: &PhysicsParams) -> Result<f64> {
        steady_residual(params, &self.a_star)
    }
}

/// Smooth probe datum: spectrum `∝ |k|^{-2}` for `|k| ≤ N/4`, unit H-norm.
pub fn probe_initial_state(params: &PhysicsParams, seed: u64) -> Result<SpectralVelocity> {
    let grid = *params.grid();
    SpectralVelocity::random_smooth(grid, seed, 2.0, grid.modes() as f64 / 4.0, 1.0)
}

/// Integrates several probes until they agree and stop moving.
pub fn find_singleton(params: &PhysicsParams, opts: &SingletonOptions) -> Result<SingletonResult> {
    if opts.n_probes < 2 {
        return Err(Error::InvalidParameter(
            "at least two probes are required".into(),
        ));
    }
    if !(opts.tol > 0.0 && opts.max_t > 0.0) {
        return Err(Error::InvalidParameter(
            "tol and max_t must be positive".into(),
        ));
    }
    let chunk = step_count(opts.check_interval, opts.h)?;
    if chunk == 0 {
        return Err(Error::InvalidParameter(
            "check interval shorter than one step".into(),
        ));
    }
    let stepper = EtdStepper::new(params.clone(), opts.h, opts.solver)?;
    let probe_seeds: Vec<u64> = (0..opts.n_probes as u64)
        .map(|i| opts.seed.wrapping_add(i))
        .collect();
    let mut probes = probe_seeds
        .iter()
        .map(|&s| probe_initial_state(params, s))
        .collect::<Result<Vec<_>>>()?;
    let mut log = Vec::new();
    let mut tick = 0i64;
    loop {
        let advanced: Vec<(SpectralVelocity, SpectralVelocity)> = probes
            .par_iter()
            .map(|u| {
                let det = |_| Ok(StepCoefficients::DETERMINISTIC);
                let prev = stepper.integrate(u, tick, chunk - 1, det, |_, _| Ok(()))?;
                let t_prev = (tick + chunk as i64 - 1) as f64 * opts.h;
                let next = stepper.step(&prev, &StepCoefficients::DETERMINISTIC, t_prev)?;
                Ok((prev, next))
            })
            .collect::<Result<_>>()?;
        tick += chunk as i64;
        let t = tick as f64 * opts.h;
        let mut drift: f64 = 0.0;
        for (prev, next) in &advanced {
            drift = drift.max(h_norm(&next.sub(prev)?) / opts.h);
        }
        probes = advanced.into_iter().map(|(_, n)| n).collect();
        let mut max_distance: f64 = 0.0;
        for i in 0..probes.len() {
            for j in i + 1..probes.len() {
                max_distance = max_distance.max(h_norm(&probes[i].sub(&probes[j])?));
            }
        }
        log.push(ContractionEntry {
            t,
            max_distance,
            drift,
        });
        log::debug!("singleton search t = {t}: distance {max_distance:e}, drift {drift:e}");
        let converged = max_distance < opts.tol && drift < opts.tol;
        if converged || t >= opts.max_t {
            if !converged {
                log::warn!("singleton search stopped at t = {t} without converging");
            }
            return Ok(SingletonResult {
                a_star: probes.swap_remove(0),
                converged,
                log,
                probe_seeds,
            });
        }
    }
}
