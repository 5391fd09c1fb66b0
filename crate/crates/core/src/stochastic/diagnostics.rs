//! Statistical checks of the OU path: moments of the stationary law,
//! time averages and sublinear growth.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::ou::OuPath;
use super::wiener::tick_of;
use crate::error::{Error, Result};
use crate::stats::mean_and_stderr;

/// `E|z|^k = Γ((1+k)/2) / √(π α^k)` under the stationary law.
pub fn ou_abs_moment(alpha: f64, k: f64) -> f64 {
    gamma((1.0 + k) / 2.0) / (std::f64::consts::PI * alpha.powf(k)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub order: f64,
    pub mean: f64,
    pub stderr: f64,
    pub expected: f64,
}

impl MomentEstimate {
    /// Deviation from the expected value in units of the standard error.
    pub fn z_score(&self) -> f64 {
        (self.mean - self.expected) / self.stderr
    }
}

/// `z(0)` of `n` independent paths with seeds `seed, seed + 1, …`, each
/// started one step before the origin.
pub fn stationary_samples(alpha: f64, n: usize, seed: u64, h: f64) -> Result<Vec<f64>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| OuPath::sample(seed.wrapping_add(i), alpha, -h, 0.0, h)?.z_at_tick(0))
        .collect()
}

/// Sample mean of `|z|^k` with its standard error.
pub fn moment_estimate(samples: &[f64], alpha: f64, k: f64) -> MomentEstimate {
    let values: Vec<f64> = samples.iter().map(|z| z.abs().powf(k)).collect();
    let (mean, stderr) = mean_and_stderr(&values);
    MomentEstimate {
        order: k,
        mean,
        stderr,
        expected: ou_abs_moment(alpha, k),
    }
}

/// Trapezoid approximation of `(1/(b − a)) ∫_a^b g(z(s)) ds`.
fn path_average<F: Fn(f64) -> f64>(ou: &OuPath, a: f64, b: f64, g: F) -> Result<f64> {
    let h = ou.step();
    let ia = tick_of(a, h)?;
    let ib = tick_of(b, h)?;
    if ib <= ia {
        return Err(Error::InvalidParameter(format!(
            "empty averaging window [{a}, {b}]"
        )));
    }
    let mut acc = 0.5 * (g(ou.z_at_tick(ia)?) + g(ou.z_at_tick(ib)?));
    for j in ia + 1..ib {
        acc += g(ou.z_at_tick(j)?);
    }
    Ok(acc * h / ((ib - ia) as f64 * h))
}

/// `(1/t) ∫_0^t z(θ_s ω) ds`.
pub fn time_average(ou: &OuPath, t: f64) -> Result<f64> {
    path_average(ou, 0.0, t, |z| z)
}

/// `(1/t) ∫_{−t}^0 |z(θ_s ω)|^k ds`.
pub fn pullback_average(ou: &OuPath, t: f64, k: f64) -> Result<f64> {
    path_average(ou, -t, 0.0, |z| z.abs().powf(k))
}

/// `(1/(t − T)) ∫_{−t}^{T−t} |z(θ_s ω)|^k ds` for a fixed window `T < t`.
pub fn window_average(ou: &OuPath, t: f64, window: f64, k: f64) -> Result<f64> {
    if !(window > 0.0 && window < t) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < T < t, got T = {window}, t = {t}"
        )));
    }
    let mean = path_average(ou, -t, window - t, |z| z.abs().powf(k))?;
    Ok(mean * window / (t - window))
}

/// `max_{t ∈ [t_from, t_to]} e^{−δt} |z(θ_{−t} ω)|` over grid times.
pub fn growth_envelope(ou: &OuPath, delta: f64, t_from: f64, t_to: f64) -> Result<f64> {
    let h = ou.step();
    let a = tick_of(t_from, h)?;
    let b = tick_of(t_to, h)?;
    let mut worst: f64 = 0.0;
    for j in a..=b {
        let t = j as f64 * h;
        worst = worst.max((-delta * t).exp() * ou.z_at_tick(-j)?.abs());
    }
    Ok(worst)
}

/// Settings of the OU diagnostic battery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuDiagnosticsConfig {
    pub alpha: f64,
    pub seed: u64,
    pub n_samples: usize,
    pub h: f64,
    /// Horizon of the time averages.
    pub horizon: f64,
    /// Rate of the exponential weight in the growth check.
    pub delta: f64,
    /// Window length `T` of the fixed-window average.
    pub window: f64,
    /// Seeds used for the growth check.
    pub growth_seeds: usize,
}

impl Default for OuDiagnosticsConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            seed: 0,
            n_samples: 100_000,
            h: 0.01,
            horizon: 1000.0,
            delta: 0.1,
            window: 1.0,
            growth_seeds: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuDiagnostics {
    pub config: OuDiagnosticsConfig,
    pub first_moment: MomentEstimate,
    pub second_moment: MomentEstimate,
    /// `(1/t)∫_0^t z` at `t = horizon`.
    pub time_average: f64,
    /// `5/√(2αt)`.
    pub time_average_bound: f64,
    /// `(1/t)∫_{−t}^0 |z|^k` for `k = 2, 4`.
    pub pullback_average_2: f64,
    pub pullback_average_4: f64,
    /// Fixed-window averages for `k = 2, 4`.
    pub window_average_2: f64,
    pub window_average_4: f64,
    /// Growth envelope over `[100, horizon]` for each seed.
    pub growth: Vec<f64>,
}

pub fn ou_diagnostics(cfg: &OuDiagnosticsConfig) -> Result<OuDiagnostics> {
    let samples = stationary_samples(cfg.alpha, cfg.n_samples, cfg.seed, cfg.h)?;
    let t = cfg.horizon;
    let path = OuPath::sample(cfg.seed, cfg.alpha, -t, t, cfg.h)?;
    let growth = (0..cfg.growth_seeds as u64)
        .into_par_iter()
        .map(|i| {
            let p = OuPath::sample(cfg.seed.wrapping_add(i), cfg.alpha, -t, 0.0, cfg.h)?;
            growth_envelope(&p, cfg.delta, t.min(100.0), t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OuDiagnostics {
        config: *cfg,
        first_moment: moment_estimate(&samples, cfg.alpha, 1.0),
        second_moment: moment_estimate(&samples, cfg.alpha, 2.0),
        time_average: time_average(&path, t)?,
        time_average_bound: 5.0 / (2.0 * cfg.alpha * t).sqrt(),
        pullback_average_2: pullback_average(&path, t, 2.0)?,
        pullback_average_4: pullback_average(&path, t, 4.0)?,
        window_average_2: window_average(&path, t, cfg.window, 2.0)?,
        window_average_4: window_average(&path, t, cfg.window, 4.0)?,
        growth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_moments() {
        assert!((ou_abs_moment(1.0, 1.0) - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert!((ou_abs_moment(1.0, 2.0) - 0.5).abs() < 1e-14);
        assert!((ou_abs_moment(3.0, 2.0) - 1.0 / 6.0).abs() < 1e-14);
        assert!((ou_abs_moment(1.0, 4.0) - 0.75).abs() < 1e-13);
    }

    #[test]
    fn averages_of_constant_windows() {
        let ou = OuPath::sample(1, 1.0, -10.0, 10.0, 0.5).unwrap();
        assert!(time_average(&ou, 0.0).is_err());
        assert!(window_average(&ou, 5.0, 6.0, 2.0).is_err());
        let w = window_average(&ou, 8.0, 1.0, 2.0).unwrap();
        assert!(w >= 0.0);
    }
}
