use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deterministic::integrator::step_count;
use crate::deterministic::singleton::probe_initial_state;
use crate::deterministic::{EtdStepper, PhysicsParams, SolverOptions, StepCoefficients};
use crate::error::{Error, Result};
use crate::spectral::h_norm;
use crate::stats::linear_fit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionSettings {
    pub n_pairs: usize,
    pub duration: f64,
    pub h: f64,
    /// Time between recorded distances.
    pub record_interval: f64,
    pub seed: u64,
    /// Distances below this level are treated as converged and left out of
    /// the fit.
    pub floor: f64,
    pub solver: SolverOptions,
}

impl Default for ContractionSettings {
    fn default() -> Self {
        Self {
            n_pairs: 3,
            duration: 20.0,
            h: 0.01,
            record_interval: 0.1,
            seed: 0,
            floor: 1e-12,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairContraction {
    pub seeds: (u64, u64),
    /// `(t, ‖u₁(t) − u₂(t)‖_H²)`
    pub log: Vec<(f64, f64)>,
    /// Tail slope of `ln ‖u₁ − u₂‖²`; absent when too few points remain
    /// above the floor.
    pub slope: Option<f64>,
    pub decaying: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub pairs: Vec<PairContraction>,
    /// Largest (least negative) measured slope.
    pub worst_slope: Option<f64>,
    /// `−ϱ/2` when a condition report was supplied.
    pub theory_floor: Option<f64>,
}

/// Least-squares slope of `ln d²` over the later half of the entries that
/// stay above `floor²`.
pub fn tail_slope(log: &[(f64, f64)], floor: f64) -> Option<f64> {
    let above: Vec<_> = log.iter().filter(|(_, d2)| *d2 > floor * floor).collect();
    let tail = &above[above.len() / 2..];
    if tail.len() < 3 {
        return None;
    }
    let t: Vec<f64> = tail.iter().map(|e| e.0).collect();
    let y: Vec<f64> = tail.iter().map(|e| e.1.ln()).collect();
    linear_fit(&t, &y).ok().map(|f| f.slope)
}

/// Integrates `n_pairs` pairs of probe trajectories and fits the decay of
/// their squared distance. Pair `i` uses seeds `seed + 2i` and `seed + 2i + 1`.
pub fn contraction_experiment(
    params: &PhysicsParams,
    settings: &ContractionSettings,
    varrho: Option<f64>,
) -> Result<ContractionReport> {
    if settings.n_pairs == 0 {
        return Err(Error::InvalidParameter(
            "at least one pair is required".into(),
        ));
    }
    let seeds: Vec<(u64, u64)> = (0..settings.n_pairs as u64)
        .map(|i| (settings.seed + 2 * i, settings.seed + 2 * i + 1))
        .collect();
    contraction_for_seeds(params, settings, &seeds, varrho)
}

/// As [`contraction_experiment`] with explicit seed pairs.
pub fn contraction_for_seeds(
    params: &PhysicsParams,
    settings: &ContractionSettings,
    seeds: &[(u64, u64)],
    varrho: Option<f64>,
) -> Result<ContractionReport> {
    let stepper = EtdStepper::new(params.clone(), settings.h, settings.solver)?;
    let total = step_count(settings.duration, settings.h)?;
    let every = step_count(settings.record_interval, settings.h)?.max(1);
    let pairs = seeds
        .par_iter()
        .map(|&(s1, s2)| {
            let mut u1 = probe_initial_state(params, s1)?;
            let mut u2 = probe_initial_state(params, s2)?;
            let mut log = vec![(0.0, h_norm(&u1.sub(&u2)?).powi(2))];
            let mut tick = 0i64;
            while (tick as usize) < total {
                let n = every.min(total - tick as usize);
                let det = |_| Ok(StepCoefficients::DETERMINISTIC);
                u1 = stepper.integrate(&u1, tick, n, det, |_, _| Ok(()))?;
                u2 = stepper.integrate(&u2, tick, n, det, |_, _| Ok(()))?;
                tick += n as i64;
                log.push((tick as f64 * settings.h, h_norm(&u1.sub(&u2)?).powi(2)));
            }
            let slope = tail_slope(&log, settings.floor);
            let first = log[0].1;
            let last = log.last().map(|e| e.1).unwrap_or(first);
            let decaying = last < first || last == 0.0;
            if !decaying {
                log::warn!("pair ({s1}, {s2}) did not contract");
            }
            Ok(PairContraction {
                seeds: (s1, s2),
                log,
                slope,
                decaying,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let worst_slope = pairs
        .iter()
        .filter_map(|p| p.slope)
        .fold(None, |acc: Option<f64>, s| {
            Some(acc.map_or(s, |a| a.max(s)))
        });
    Ok(ContractionReport {
        pairs,
        worst_slope,
        theory_floor: varrho.map(|v| -v / 2.0),
    })
}
