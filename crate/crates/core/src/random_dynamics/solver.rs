use serde::{Deserialize, Serialize};

use super::noise::{NoiseConfig, NoiseMode};
use crate::deterministic::{EtdStepper, PhysicsParams, SolverOptions, StepCoefficients};
use crate::error::{Error, Result};
use crate::spectral::{norms, Norms, SpectralVelocity};
use crate::stochastic::OuPath;

/// Integrator of the transformed random equation for a fixed noise
/// configuration. States are in the transformed variable `v`; the physical
/// velocity `u` is recovered with [`PathwiseSolver::reconstruct`].
#[derive(Debug, Clone)]
pub struct PathwiseSolver {
    stepper: EtdStepper,
    noise: NoiseConfig,
}

/// A state of a pathwise trajectory at grid time `t`.
#[derive(Debug, Clone)]
pub struct PathwiseState {
    pub t: f64,
    pub z: f64,
    pub v: SpectralVelocity,
    pub u: SpectralVelocity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathwiseNorms {
    pub t: f64,
    pub z: f64,
    pub v: Norms,
    pub u: Norms,
}

impl PathwiseState {
    pub fn norms(&self) -> PathwiseNorms {
        PathwiseNorms {
            t: self.t,
            z: self.z,
            v: norms(&self.v),
            u: norms(&self.u),
        }
    }
}

impl PathwiseSolver {
    pub fn new(
        params: PhysicsParams,
        noise: NoiseConfig,
        h: f64,
        options: SolverOptions,
    ) -> Result<Self> {
        noise.validate(&params)?;
        let mut stepper = EtdStepper::new(params, h, options)?;
        if noise.mode == NoiseMode::Additive {
            let phi = noise
                .phi
                .clone()
                .expect("validated additive noise has a profile");
            stepper = stepper.with_noise_shape(phi, noise.ou_alpha)?;
        }
        Ok(Self { stepper, noise })
    }

    pub fn params(&self) -> &PhysicsParams {
        self.stepper.params()
    }

    pub fn noise(&self) -> &NoiseConfig {
        &self.noise
    }

    pub fn step_size(&self) -> f64 {
        self.stepper.step_size()
    }

    pub fn stepper(&self) -> &EtdStepper {
        &self.stepper
    }

    /// Drift multipliers for OU value `z`.
    pub fn coefficients(&self, z: f64) -> StepCoefficients {
        let eps = self.noise.epsilon;
        match self.noise.mode {
            NoiseMode::None => StepCoefficients::DETERMINISTIC,
            NoiseMode::Additive => StepCoefficients::additive(eps, z),
            NoiseMode::Multiplicative => {
                StepCoefficients::multiplicative(eps, z, self.params().r, self.noise.ou_alpha)
            }
        }
    }

    /// `u = v + εzΦ` (additive) or `u = e^{εz} v` (multiplicative).
    pub fn reconstruct(&self, v: &SpectralVelocity, z: f64) -> SpectralVelocity {
        let ez = self.noise.epsilon * z;
        match (self.noise.mode, &self.noise.phi) {
            (NoiseMode::Additive, Some(phi)) => {
                let mut u = v.clone();
                for (a, b) in u.coeffs_mut().iter_mut().zip(phi.coeffs()) {
                    *a += b * ez;
                }
                u
            }
            (NoiseMode::Multiplicative, _) => v.scaled(ez.exp()),
            _ => v.clone(),
        }
    }

    /// Inverse of [`reconstruct`](Self::reconstruct).
    pub fn transform(&self, u: &SpectralVelocity, z: f64) -> SpectralVelocity {
        let ez = self.noise.epsilon * z;
        match (self.noise.mode, &self.noise.phi) {
            (NoiseMode::Additive, Some(phi)) => {
                let mut v = u.clone();
                for (a, b) in v.coeffs_mut().iter_mut().zip(phi.coeffs()) {
                    *a -= b * ez;
                }
                v
            }
            (NoiseMode::Multiplicative, _) => u.scaled((-ez).exp()),
            _ => u.clone(),
        }
    }

    fn check_path(&self, ou: &OuPath) -> Result<()> {
        if ou.step() != self.step_size() {
            return Err(Error::InvalidParameter(format!(
                "OU path step {} differs from the solver step {}",
                ou.step(),
                self.step_size()
            )));
        }
        if ou.alpha() != self.noise.ou_alpha {
            return Err(Error::InvalidParameter(format!(
                "OU path rate {} differs from the configured rate {}",
                ou.alpha(),
                self.noise.ou_alpha
            )));
        }
        Ok(())
    }

    /// Advances `v` from tick `start` to tick `end` along `ou`, with `z`
    /// frozen at the left end of every step.
    pub fn advance(
        &self,
        v0: &SpectralVelocity,
        ou: &OuPath,
        start: i64,
        end: i64,
    ) -> Result<SpectralVelocity> {
        self.advance_observed(v0, ou, start, end, |_, _| Ok(()))
    }

    pub fn advance_observed<O>(
        &self,
        v0: &SpectralVelocity,
        ou: &OuPath,
        start: i64,
        end: i64,
        observe: O,
    ) -> Result<SpectralVelocity>
    where
        O: FnMut(i64, &SpectralVelocity) -> Result<()>,
    {
        self.check_path(ou)?;
        if end < start {
            return Err(Error::InvalidParameter(format!(
                "interval end {end} precedes start {start}"
            )));
        }
        ou.wiener().check_tick(start)?;
        ou.wiener().check_tick(end)?;
        self.stepper.integrate(
            v0,
            start,
            (end - start) as usize,
            |tick| Ok(self.coefficients(ou.z_at_tick(tick)?)),
            observe,
        )
    }

    /// Solves on `[t0, t1]`, keeping every `sample_every`-th state (0 keeps
    /// only the ends).
    pub fn solve(
        &self,
        v0: &SpectralVelocity,
        ou: &OuPath,
        t0: f64,
        t1: f64,
        sample_every: usize,
    ) -> Result<Vec<PathwiseState>> {
        let start = ou.wiener().tick(t0)?;
        let end = ou.wiener().tick(t1)?;
        let h = self.step_size();
        let mut out = Vec::new();
        self.advance_observed(v0, ou, start, end, |tick, v| {
            let keep = tick == start
                || tick == end
                || (sample_every > 0 && (tick - start) as usize % sample_every == 0);
            if keep {
                let z = ou.z_at_tick(tick)?;
                out.push(PathwiseState {
                    t: tick as f64 * h,
                    z,
                    v: v.clone(),
                    u: self.reconstruct(v, z),
                });
            }
            Ok(())
        })?;
        Ok(out)
    }
}

/// Additive-noise system in 2D over `[t0, t1]`.
pub fn solve_additive_2d(
    v0: &SpectralVelocity,
    params: &PhysicsParams,
    noise: &NoiseConfig,
    ou: &OuPath,
    interval: (f64, f64),
    options: SolverOptions,
) -> Result<Vec<PathwiseState>> {
    if noise.mode != NoiseMode::Additive {
        return Err(Error::InvalidParameter("expected additive noise".into()));
    }
    let solver = PathwiseSolver::new(params.clone(), noise.clone(), ou.step(), options)?;
    solver.solve(v0, ou, interval.0, interval.1, 1)
}

/// Multiplicative-noise system (2D or 3D) over `[t0, t1]`.
pub fn solve_multiplicative(
    v0: &SpectralVelocity,
    params: &PhysicsParams,
    noise: &NoiseConfig,
    ou: &OuPath,
    interval: (f64, f64),
    options: SolverOptions,
) -> Result<Vec<PathwiseState>> {
    if noise.mode != NoiseMode::Multiplicative {
        return Err(Error::InvalidParameter(
            "expected multiplicative noise".into(),
        ));
    }
    let solver = PathwiseSolver::new(params.clone(), noise.clone(), ou.step(), options)?;
    solver.solve(v0, ou, interval.0, interval.1, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{h_norm, TorusGrid};

    #[test]
    fn multiplicative_zero_stays_zero() {
        let grid = TorusGrid::periodic_2pi(2, 16).unwrap();
        let p = PhysicsParams::unforced(grid, 1.0, 1.0, 3.0).unwrap();
        let noise = NoiseConfig::multiplicative(0.8, 1.0, 4);
        let ou = OuPath::sample(4, 1.0, -2.0, 0.0, 0.01).unwrap();
        let out = solve_multiplicative(
            &SpectralVelocity::zeros(grid),
            &p,
            &noise,
            &ou,
            (-2.0, 0.0),
            SolverOptions::default(),
        )
        .unwrap();
        assert!(out.iter().all(|s| s.v.is_zero() && s.u.is_zero()));
        assert_eq!(out.len(), 201);
    }

    #[test]
    fn path_step_must_match() {
        let grid = TorusGrid::periodic_2pi(2, 16).unwrap();
        let p = PhysicsParams::unforced(grid, 1.0, 1.0, 3.0).unwrap();
        let noise = NoiseConfig::multiplicative(0.5, 1.0, 4);
        let solver = PathwiseSolver::new(p, noise, 0.01, SolverOptions::default()).unwrap();
        let ou = OuPath::sample(4, 1.0, -1.0, 0.0, 0.02).unwrap();
        assert!(solver
            .advance(&SpectralVelocity::zeros(grid), &ou, -10, 0)
            .is_err());
    }

    #[test]
    fn transform_inverts_reconstruction() {
        let grid = TorusGrid::periodic_2pi(2, 16).unwrap();
        let p = PhysicsParams::unforced(grid, 1.0, 1.0, 3.0).unwrap();
        let v = SpectralVelocity::random_smooth(grid, 3, 2.0, 4.0, 1.0).unwrap();
        let phi = SpectralVelocity::random_smooth(grid, 4, 2.0, 4.0, 1.0).unwrap();
        for noise in [
            NoiseConfig::multiplicative(0.3, 1.0, 0),
            NoiseConfig::additive(0.3, phi, 1.0, 0),
        ] {
            let s = PathwiseSolver::new(p.clone(), noise, 0.01, SolverOptions::default()).unwrap();
            let back = s.transform(&s.reconstruct(&v, 1.7), 1.7);
            assert!(h_norm(&back.sub(&v).unwrap()) < 1e-15);
        }
    }
}
