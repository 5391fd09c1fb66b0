use std::io::Write;

use serde::{Deserialize, Serialize};

use super::integrator::{step_count, EtdStepper, SolverOptions, StepCoefficients};
use super::params::PhysicsParams;
use crate::error::{Error, Result};
use crate::spectral::{inner, lp_integral, norms, SpectralVelocity};

/// Quantities entering the energy balance, recorded at every step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyTerms {
    pub t: f64,
    /// `‖u‖_H²`
    pub h2: f64,
    /// `‖u‖_V²`
    pub v2: f64,
    /// `‖u‖_{L^{r+1}}^{r+1}`
    pub lr_pow: f64,
    /// `(f, u)`
    pub forcing_work: f64,
}

impl EnergyTerms {
    pub fn of(u: &SpectralVelocity, params: &PhysicsParams, t: f64) -> Result<Self> {
        let n = norms(u);
        Ok(Self {
            t,
            h2: n.h_norm * n.h_norm,
            v2: n.v_norm * n.v_norm,
            lr_pow: lp_integral(u, params.r + 1.0),
            forcing_work: inner(&params.forcing, u)?,
        })
    }
}

/// One row of the trajectory CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub h_norm: f64,
    pub v_norm: f64,
    pub lr_norm: f64,
    pub energy_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub h: f64,
    pub r: f64,
    /// One entry per accepted state, starting with the initial datum.
    pub energy: Vec<EnergyTerms>,
    /// States kept at the requested cadence, always including both ends.
    pub samples: Vec<(f64, SpectralVelocity)>,
}

impl Trajectory {
    pub fn final_state(&self) -> &SpectralVelocity {
        &self
            .samples
            .last()
            .expect("trajectory holds its initial state")
            .1
    }

    pub fn records(&self, params: &PhysicsParams) -> Vec<TrajectoryRecord> {
        let res = energy_residual(self, params);
        self.energy
            .iter()
            .zip(res)
            .map(|(e, residual)| TrajectoryRecord {
                t: e.t,
                h_norm: e.h2.sqrt(),
                v_norm: e.v2.sqrt(),
                lr_norm: e.lr_pow.powf(1.0 / (self.r + 1.0)),
                energy_residual: residual,
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, params: &PhysicsParams, mut out: W) -> Result<()> {
        writeln!(out, "t,h_norm,v_norm,lr_norm,energy_residual")?;
        for r in self.records(params) {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.t, r.h_norm, r.v_norm, r.lr_norm, r.energy_residual
            )?;
        }
        Ok(())
    }
}

/// Integrates the deterministic system over `[0, duration]` with step `h`,
/// keeping every `sample_every`-th state (0 keeps only the ends).
pub fn simulate(
    u0: &SpectralVelocity,
    params: &PhysicsParams,
    duration: f64,
    h: f64,
    sample_every: usize,
    options: SolverOptions,
) -> Result<Trajectory> {
    u0.check_same_grid(&params.forcing)?;
    if u0.mean_defect() != 0.0 {
        return Err(Error::MeanViolation(u0.mean_defect()));
    }
    let steps = step_count(duration, h)?;
    let stepper = EtdStepper::new(params.clone(), h, options)?;
    let mut energy = Vec::with_capacity(steps + 1);
    let mut samples = Vec::new();
    let last = steps as i64;
    stepper.integrate(
        u0,
        0,
        steps,
        |_| Ok(StepCoefficients::DETERMINISTIC),
        |tick, u| {
            let t = tick as f64 * h;
            energy.push(EnergyTerms::of(u, params, t)?);
            let keep = tick == 0
                || tick == last
                || (sample_every > 0 && tick as usize % sample_every == 0);
            if keep {
                samples.push((t, u.clone()));
            }
            Ok(())
        },
    )?;
    Ok(Trajectory {
        h,
        r: params.r,
        energy,
        samples,
    })
}

/// Residual of the energy equality
/// `‖u(t)‖² + 2μ∫‖u‖_V² + 2β∫‖u‖_{L^{r+1}}^{r+1} + 2·darcy∫‖u‖² − ‖u(0)‖² − 2∫(f, u)`,
/// with the time integrals taken by the trapezoid rule.
pub fn energy_residual(traj: &Trajectory, params: &PhysicsParams) -> Vec<f64> {
    let Some(first) = traj.energy.first() else {
        return Vec::new();
    };
    let density = |e: &EnergyTerms| {
        2.0 * params.mu * e.v2 + 2.0 * params.beta * e.lr_pow + 2.0 * params.darcy * e.h2
            - 2.0 * e.forcing_work
    };
    let mut out = Vec::with_capacity(traj.energy.len());
    let mut integral = 0.0;
    out.push(0.0);
    for w in traj.energy.windows(2) {
        integral += 0.5 * (w[1].t - w[0].t) * (density(&w[0]) + density(&w[1]));
        out.push(w[1].h2 + integral - first.h2);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGrid;
    use num_complex::Complex64;

    #[test]
    fn zero_state_zero_residual() {
        let grid = TorusGrid::periodic_2pi(2, 16).unwrap();
        let p = PhysicsParams::unforced(grid, 1.0, 1.0, 3.0).unwrap();
        let tr = simulate(
            &SpectralVelocity::zeros(grid),
            &p,
            0.5,
            0.05,
            1,
            SolverOptions::default(),
        )
        .unwrap();
        assert!(energy_residual(&tr, &p).iter().all(|&r| r == 0.0));
        assert_eq!(tr.samples.len(), 11);
        assert!(tr.final_state().is_zero());
    }

    #[test]
    fn csv_header_and_rows() {
        let grid = TorusGrid::periodic_2pi(2, 16).unwrap();
        let p = PhysicsParams::unforced(grid, 1.0, 1.0, 3.0).unwrap();
        let u0 = SpectralVelocity::random_smooth(grid, 2, 2.0, 4.0, 0.5).unwrap();
        let tr = simulate(&u0, &p, 0.1, 0.05, 0, SolverOptions::default()).unwrap();
        assert_eq!(tr.samples.len(), 2);
        let mut buf = Vec::new();
        tr.write_csv(&p, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t,h_norm,v_norm,lr_norm,energy_residual");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn stokes_mode_energy_matches_quadrature_error() {
        let grid = TorusGrid::periodic_2pi(2, 16).unwrap();
        let amp = Complex64::new(0.01, 0.0);
        let zero = Complex64::default();
        let u0 = SpectralVelocity::from_modes(grid, &[([1, 0, 0], [zero, amp, zero])]).unwrap();
        let p = PhysicsParams::unforced(grid, 1.0, 0.0, 3.0).unwrap();
        let tr = simulate(&u0, &p, 1.0, 1e-3, 0, SolverOptions::default()).unwrap();
        let worst = energy_residual(&tr, &p)
            .iter()
            .fold(0.0f64, |m, r| m.max(r.abs()));
        assert!(worst <= 1e-8, "{worst}");
    }
}
