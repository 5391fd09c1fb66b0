use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deterministic::PhysicsParams;
use crate::error::{Error, Result};
use crate::random_dynamics::{
    pullback_sample, NoiseConfig, NoiseMode, PullbackOptions, PullbackSample,
};
use crate::spectral::{h_norm, SpectralVelocity};
use crate::stats::linear_fit;

/// `‖a_ε(ω) − a*‖_H`, the Hausdorff distance between two singletons.
pub fn measure_distance(a_star: &SpectralVelocity, sample: &PullbackSample) -> Result<f64> {
    field_distance(a_star, &sample.state)
}

pub fn field_distance(a: &SpectralVelocity, b: &SpectralVelocity) -> Result<f64> {
    Ok(h_norm(&a.sub(b)?))
}

/// One `(ε, ω)` distance measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub epsilon: f64,
    pub seed: u64,
    pub mode: NoiseMode,
    pub r: f64,
    pub dist_h: f64,
    pub t_pull: f64,
    pub converged: bool,
}

pub const SWEEP_CSV_HEADER: &str = "epsilon,seed,mode,r,dist_h,t_pull,converged";

pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], mut out: W) -> Result<()> {
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.epsilon, r.seed, r.mode, r.r, r.dist_h, r.t_pull, r.converged
        )?;
    }
    Ok(())
}

/// Predicted exponent of `dist_H ≲ ε^δ`.
pub fn delta_theory(mode: NoiseMode, r: f64) -> Option<f64> {
    match mode {
        NoiseMode::Additive => Some((r + 1.0) / (2.0 * r)),
        NoiseMode::Multiplicative => Some(1.0),
        NoiseMode::None => None,
    }
}

/// Log-log least-squares fit of per-ε geometric means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub delta_theory: Option<f64>,
    /// Distinct ε levels, ascending.
    pub eps_grid: Vec<f64>,
    /// Converged samples per level.
    pub n_samples: Vec<usize>,
    /// Mean of `ln dist` per level.
    pub mean_log_dist: Vec<f64>,
    /// Standard deviation of `ln dist` per level.
    pub spread_log_dist: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl RateFit {
    /// Adjacent level pairs where the mean distance grows as ε shrinks.
    pub fn inversions(&self) -> usize {
        self.mean_log_dist
            .windows(2)
            .filter(|w| w[0] > w[1])
            .count()
    }
}

pub fn fit_rate(records: &[SweepRecord], delta_theory: Option<f64>) -> Result<RateFit> {
    let mut levels: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.converged) {
        if !(r.epsilon > 0.0 && r.dist_h > 0.0) {
            return Err(Error::InsufficientData(format!(
                "record at epsilon {} has distance {}, not usable in a log fit",
                r.epsilon, r.dist_h
            )));
        }
        levels
            .entry(r.epsilon.to_bits())
            .or_insert_with(|| (r.epsilon, Vec::new()))
            .1
            .push(r.dist_h.ln());
    }
    let mut rows: Vec<(f64, Vec<f64>)> = levels.into_values().collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    if rows.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "fit needs at least 3 epsilon levels with converged samples, got {}",
            rows.len()
        )));
    }
    if let Some((eps, v)) = rows.iter().find(|(_, v)| v.len() < 2) {
        return Err(Error::InsufficientData(format!(
            "epsilon {eps} has {} converged samples, at least 2 are needed",
            v.len()
        )));
    }
    let eps_grid: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let n_samples: Vec<usize> = rows.iter().map(|r| r.1.len()).collect();
    let mean_log_dist: Vec<f64> = rows
        .iter()
        .map(|(_, v)| v.iter().sum::<f64>() / v.len() as f64)
        .collect();
    let spread_log_dist = rows
        .iter()
        .zip(&mean_log_dist)
        .map(|((_, v), m)| {
            (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
        })
        .collect();
    let log_eps: Vec<f64> = eps_grid.iter().map(|e| e.ln()).collect();
    let line = linear_fit(&log_eps, &mean_log_dist)?;
    Ok(RateFit {
        slope: line.slope,
        intercept: line.intercept,
        delta_theory,
        eps_grid,
        n_samples,
        mean_log_dist,
        spread_log_dist,
        residuals: line.residuals,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub eps_grid: Vec<f64>,
    /// Path seeds, reused at every ε.
    pub seeds: Vec<u64>,
    pub t_pull: f64,
    pub h: f64,
    /// Tolerance of the doubling test applied at the largest ε.
    pub doubling_tol: f64,
    pub options: PullbackOptions,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
    pub fit: RateFit,
}

/// Checks that the noise mode has a convergence theory for these parameters.
pub fn check_rate_regime(params: &PhysicsParams, mode: NoiseMode) -> Result<()> {
    let (dim, r) = (params.dim(), params.r);
    let ok = match mode {
        NoiseMode::Additive => dim == 2 && (1.0..=2.0).contains(&r),
        NoiseMode::Multiplicative => dim == 2 || (3.0..=5.0).contains(&r),
        NoiseMode::None => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Regime(format!(
            "no convergence rate is predicted for {mode} noise with dim = {dim}, r = {r}"
        )))
    }
}

/// One pullback sample per `(ε, seed)` against the singleton `a_star`,
/// followed by the rate fit.
pub fn rate_sweep(
    params: &PhysicsParams,
    noise: &NoiseConfig,
    a_star: &SpectralVelocity,
    plan: &SweepPlan,
) -> Result<SweepResult> {
    let records = sweep_records(params, noise, a_star, plan)?;
    let fit = fit_rate(&records, delta_theory(noise.mode, params.r))?;
    Ok(SweepResult { records, fit })
}

/// The distance records of a sweep, ordered by decreasing ε then seed.
pub fn sweep_records(
    params: &PhysicsParams,
    noise: &NoiseConfig,
    a_star: &SpectralVelocity,
    plan: &SweepPlan,
) -> Result<Vec<SweepRecord>> {
    check_rate_regime(params, noise.mode)?;
    if plan.eps_grid.is_empty() || plan.seeds.is_empty() {
        return Err(Error::InsufficientData(
            "empty epsilon grid or seed list".into(),
        ));
    }
    let largest = plan
        .eps_grid
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let jobs: Vec<(f64, u64)> = plan
        .eps_grid
        .iter()
        .flat_map(|&e| plan.seeds.iter().map(move |&s| (e, s)))
        .collect();
    let mut records = jobs
        .par_iter()
        .map(|&(epsilon, seed)| {
            let mut opts = plan.options.clone();
            opts.doubling_tol = (epsilon == largest).then_some(plan.doubling_tol);
            let cfg = noise.with_epsilon(epsilon).with_seed(seed);
            let sample = pullback_sample(params, &cfg, plan.t_pull, plan.h, &opts)?;
            let dist_h = measure_distance(a_star, &sample)?;
            log::info!("epsilon {epsilon}, seed {seed}: dist {dist_h:e}");
            Ok(SweepRecord {
                epsilon,
                seed,
                mode: noise.mode,
                r: params.r,
                dist_h,
                t_pull: plan.t_pull,
                converged: sample.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon).then(a.seed.cmp(&b.seed)));
    Ok(records)
}
