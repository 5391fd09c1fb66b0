//! Second-order exponential time differencing (Cox–Matthews ETDRK2).
//!
//! The diagonal linear part `−(μA + darcy)` is integrated exactly; the
//! remaining drift is treated explicitly in two stages:
//!
//! ```text
//! a   = e^{hL} u + h φ1(hL) N(u)
//! u⁺  = a + h φ2(hL) (N(a) − N(u))
//! ```
//!
//! The same drift routine serves the deterministic system and its pathwise
//! random counterparts; the noise enters only through [`StepCoefficients`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::params::PhysicsParams;
use crate::error::{Error, Result};
use crate::spectral::ops::{self, advect, damping_coeffs, project_in_place};
use crate::spectral::SpectralVelocity;

/// Scalar multipliers of the drift terms during one step:
///
/// ```text
/// N(v) = forcing·f − advection·B(v + shift·Φ) − damping·β C(v + shift·Φ)
///        + linear·v + extra·(αΦ − μAΦ − darcy·Φ)
/// ```
///
/// Terms with a zero multiplier are skipped entirely.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepCoefficients {
    pub forcing: f64,
    pub advection: f64,
    pub damping: f64,
    pub linear: f64,
    pub shift: f64,
    pub extra: f64,
}

impl StepCoefficients {
    pub const DETERMINISTIC: StepCoefficients = StepCoefficients {
        forcing: 1.0,
        advection: 1.0,
        damping: 1.0,
        linear: 0.0,
        shift: 0.0,
        extra: 0.0,
    };

    /// Additive noise with OU value `z`: `v = u − εzΦ`.
    pub fn additive(epsilon: f64, z: f64) -> Self {
        let ez = epsilon * z;
        Self {
            shift: ez,
            extra: ez,
            ..Self::DETERMINISTIC
        }
    }

    /// Multiplicative noise with OU value `z`: `v = e^{−εz} u`.
    pub fn multiplicative(epsilon: f64, z: f64, r: f64, alpha: f64) -> Self {
        let ez = epsilon * z;
        Self {
            forcing: (-ez).exp(),
            advection: ez.exp(),
            damping: (ez * (r - 1.0)).exp(),
            linear: ez * alpha,
            shift: 0.0,
            extra: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Steps must satisfy `h ≤ cfl_safety · Δx / max|u|`.
    pub cfl_safety: f64,
    /// Abort once `‖u‖_H` exceeds this value.
    pub blowup_guard: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            cfl_safety: 0.4,
            blowup_guard: 1e8,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl_safety.is_finite() && self.cfl_safety > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cfl_safety must be positive, got {}",
                self.cfl_safety
            )));
        }
        if !(self.blowup_guard > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "blow-up guard must be positive, got {}",
                self.blowup_guard
            )));
        }
        Ok(())
    }
}

/// `(e^x, φ1(x), φ2(x))` with `φ1 = (e^x − 1)/x`, `φ2 = (e^x − 1 − x)/x²`.
pub fn phi_functions(x: f64) -> (f64, f64, f64) {
    if x.abs() < 1e-2 {
        let p1 = 1.0 + x * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x / 120.0)));
        let p2 = 0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x * (1.0 / 120.0 + x / 720.0)));
        (x.exp(), p1, p2)
    } else {
        let em1 = x.exp_m1();
        (x.exp(), em1 / x, (em1 - x) / (x * x))
    }
}

/// Fixed-step ETDRK2 integrator for one set of physical parameters.
#[derive(Debug, Clone)]
pub struct EtdStepper {
    params: PhysicsParams,
    h: f64,
    options: SolverOptions,
    decay: Vec<f64>,
    phi1: Vec<f64>,
    phi2: Vec<f64>,
    shape: Option<NoiseShape>,
}

/// Additive noise profile `Φ` with the precomputed combination
/// `αΦ − μAΦ − darcy·Φ`.
#[derive(Debug, Clone)]
struct NoiseShape {
    phi: SpectralVelocity,
    source: SpectralVelocity,
}

impl EtdStepper {
    pub fn new(params: PhysicsParams, h: f64, options: SolverOptions) -> Result<Self> {
        params.validate()?;
        options.validate()?;
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "step must be positive, got {h}"
            )));
        }
        let grid = *params.grid();
        let symbol = ops::stokes_symbol(&grid);
        let mut decay = Vec::with_capacity(symbol.len());
        let mut phi1 = Vec::with_capacity(symbol.len());
        let mut phi2 = Vec::with_capacity(symbol.len());
        for s in symbol {
            let (e, p1, p2) = phi_functions(-h * (params.mu * s + params.darcy));
            decay.push(e);
            phi1.push(h * p1);
            phi2.push(h * p2);
        }
        Ok(Self {
            params,
            h,
            options,
            decay,
            phi1,
            phi2,
            shape: None,
        })
    }

    /// Attaches an additive noise profile `Φ` with OU rate `alpha`.
    pub fn with_noise_shape(mut self, phi: SpectralVelocity, alpha: f64) -> Result<Self> {
        phi.check_same_grid(&self.params.forcing)?;
        let mut source = phi.scaled(alpha - self.params.darcy);
        source.axpy(-self.params.mu, &ops::stokes_apply(&phi))?;
        self.shape = Some(NoiseShape { phi, source });
        Ok(self)
    }

    pub fn params(&self) -> &PhysicsParams {
        &self.params
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    pub fn noise_shape(&self) -> Option<&SpectralVelocity> {
        self.shape.as_ref().map(|s| &s.phi)
    }

    /// Explicit drift `N(v)` and the largest collocation speed of the
    /// advecting field.
    pub fn drift(&self, v: &SpectralVelocity, c: &StepCoefficients) -> (Vec<Complex64>, f64) {
        let p = &self.params;
        let grid = *p.grid();
        let mut out = vec![Complex64::default(); grid.coeff_len()];
        if c.forcing != 0.0 {
            for (o, f) in out.iter_mut().zip(p.forcing.coeffs()) {
                *o = f * c.forcing;
            }
        }
        let shifted;
        let w = match (&self.shape, c.shift) {
            (Some(shape), s) if s != 0.0 => {
                let mut tmp = v.clone();
                for (a, b) in tmp.coeffs_mut().iter_mut().zip(shape.phi.coeffs()) {
                    *a += b * s;
                }
                shifted = tmp;
                &shifted
            }
            _ => v,
        };
        let mut max_speed = 0.0;
        if c.advection != 0.0 {
            let (b, speed) = advect(w, w);
            max_speed = speed;
            for (o, x) in out.iter_mut().zip(&b) {
                *o -= x * c.advection;
            }
        }
        if c.damping != 0.0 && p.beta != 0.0 {
            let scale = c.damping * p.beta;
            if p.r == 1.0 {
                for (o, x) in out.iter_mut().zip(w.coeffs()) {
                    *o -= x * scale;
                }
            } else {
                let (d, speed) = damping_coeffs(w, p.r);
                if c.advection == 0.0 {
                    max_speed = speed;
                }
                for (o, x) in out.iter_mut().zip(&d) {
                    *o -= x * scale;
                }
            }
        }
        if c.linear != 0.0 {
            for (o, x) in out.iter_mut().zip(v.coeffs()) {
                *o += x * c.linear;
            }
        }
        if let (Some(shape), e) = (&self.shape, c.extra) {
            if e != 0.0 {
                for (o, x) in out.iter_mut().zip(shape.source.coeffs()) {
                    *o += x * e;
                }
            }
        }
        (out, max_speed)
    }

    /// One ETDRK2 step from time `t` (used only in diagnostics).
    pub fn step(
        &self,
        u: &SpectralVelocity,
        c: &StepCoefficients,
        t: f64,
    ) -> Result<SpectralVelocity> {
        let grid = *u.grid();
        if !grid.same_as(self.params.grid()) {
            return Err(Error::GridMismatch);
        }
        let len = grid.lattice_len();
        let (n0, speed) = self.drift(u, c);
        let limit = self.options.cfl_safety * grid.cell_width() / speed;
        if self.h > limit {
            return Err(Error::StepTooLarge {
                h: self.h,
                limit,
                max_speed: speed,
            });
        }
        let mut a = vec![Complex64::default(); grid.coeff_len()];
        for (i, slot) in a.iter_mut().enumerate() {
            let s = i % len;
            *slot = u.coeffs()[i] * self.decay[s] + n0[i] * self.phi1[s];
        }
        project_in_place(&grid, &mut a);
        let a = SpectralVelocity::from_projected(grid, a);
        let (n1, _) = self.drift(&a, c);
        let mut next = a.into_coeffs();
        for (i, slot) in next.iter_mut().enumerate() {
            *slot += (n1[i] - n0[i]) * self.phi2[i % len];
        }
        project_in_place(&grid, &mut next);
        let next = SpectralVelocity::from_projected(grid, next);
        let t_next = t + self.h;
        if !next.is_finite() {
            return Err(Error::BlowUp {
                t: t_next,
                reason: "non-finite coefficients".into(),
            });
        }
        let norm = ops::h_norm(&next);
        if norm > self.options.blowup_guard {
            return Err(Error::BlowUp {
                t: t_next,
                reason: format!("H-norm {norm} exceeds guard {}", self.options.blowup_guard),
            });
        }
        Ok(next)
    }

    /// Integrates `steps` steps starting at tick `start` (time `start·h`).
    /// `coeffs(tick)` supplies the multipliers of the step leaving `tick`;
    /// `observe(tick, state)` sees every accepted state, including the
    /// initial one.
    pub fn integrate<C, O>(
        &self,
        u0: &SpectralVelocity,
        start: i64,
        steps: usize,
        mut coeffs: C,
        mut observe: O,
    ) -> Result<SpectralVelocity>
    where
        C: FnMut(i64) -> Result<StepCoefficients>,
        O: FnMut(i64, &SpectralVelocity) -> Result<()>,
    {
        u0.check_same_grid(&self.params.forcing)?;
        let mut u = u0.clone();
        observe(start, &u)?;
        for j in 0..steps as i64 {
            let tick = start + j;
            let c = coeffs(tick)?;
            u = self.step(&u, &c, tick as f64 * self.h)?;
            observe(tick + 1, &u)?;
        }
        Ok(u)
    }
}

/// Number of steps of size `h` covering `duration`, which must be an
/// integer multiple of `h` up to rounding.
pub fn step_count(duration: f64, h: f64) -> Result<usize> {
    if !(duration.is_finite() && duration >= 0.0 && h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "invalid duration {duration} or step {h}"
        )));
    }
    let n = (duration / h).round();
    if (n * h - duration).abs() > 1e-9 * duration.max(h) {
        return Err(Error::InvalidParameter(format!(
            "duration {duration} is not a multiple of the step {h}"
        )));
    }
    Ok(n as usize)
}

/// `‖μAa + B(a) + βC(a) + darcy·a − f‖_H`.
pub fn steady_residual(params: &PhysicsParams, a: &SpectralVelocity) -> Result<f64> {
    a.check_same_grid(&params.forcing)?;
    let mut res = ops::stokes_apply(a).scaled(params.mu);
    res.axpy(1.0, &ops::bilinear(a, a)?)?;
    if params.beta != 0.0 {
        res.axpy(params.beta, &ops::damping(a, params.r)?)?;
    }
    if params.darcy != 0.0 {
        res.axpy(params.darcy, a)?;
    }
    res.axpy(-1.0, &params.forcing)?;
    Ok(ops::h_norm(&res))
}
