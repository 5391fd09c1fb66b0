use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{SpectralVelocity, TorusGrid};

/// Coefficients of `du/dt + μAu + B(u) + darcy·u + β|u|^{r-1}u = f`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicsParams {
    pub mu: f64,
    pub beta: f64,
    pub r: f64,
    pub darcy: f64,
    pub forcing: SpectralVelocity,
}

impl PhysicsParams {
    pub fn new(mu: f64, beta: f64, r: f64, darcy: f64, forcing: SpectralVelocity) -> Result<Self> {
        let p = Self {
            mu,
            beta,
            r,
            darcy,
            forcing,
        };
        p.validate()?;
        Ok(p)
    }

    /// Unforced parameters on `grid`.
    pub fn unforced(grid: TorusGrid, mu: f64, beta: f64, r: f64) -> Result<Self> {
        Self::new(mu, beta, r, 0.0, SpectralVelocity::zeros(grid))
    }

    pub fn grid(&self) -> &TorusGrid {
        self.forcing.grid()
    }

    pub fn dim(&self) -> usize {
        self.grid().dim()
    }

    pub fn validate(&self) -> Result<()> {
        let violations = self.violations();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(violations.join("; ")))
        }
    }

    /// Every violated constraint, as human-readable messages.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.mu.is_finite() && self.mu > 0.0) {
            out.push(format!("mu must be positive, got {}", self.mu));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            out.push(format!("beta must be non-negative, got {}", self.beta));
        }
        if !(self.darcy.is_finite() && self.darcy >= 0.0) {
            out.push(format!("darcy must be non-negative, got {}", self.darcy));
        }
        if !(self.r.is_finite() && self.r >= 1.0) {
            out.push(format!("r must be >= 1, got {}", self.r));
        }
        if self.dim() == 3 {
            out.extend(three_d_violation(self.r, self.beta, self.mu));
        }
        if !self.forcing.is_finite() {
            out.push("forcing has non-finite coefficients".into());
        }
        out
    }

    pub fn with_forcing(&self, forcing: SpectralVelocity) -> Result<Self> {
        Self::new(self.mu, self.beta, self.r, self.darcy, forcing)
    }
}

/// The 3D well-posedness restriction: `r ≥ 3`, and `2βμ ≥ 1` when `r = 3`.
pub fn three_d_violation(r: f64, beta: f64, mu: f64) -> Option<String> {
    if r < 3.0 {
        Some("3D requires r ≥ 3".into())
    } else if r == 3.0 && 2.0 * beta * mu < 1.0 {
        Some(format!(
            "3D with r = 3 requires 2·beta·mu ≥ 1, got {}",
            2.0 * beta * mu
        ))
    } else {
        None
    }
}

/// Constants of the trilinear estimates entering the smallness conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Set while the values are placeholders rather than sharp constants.
    pub provisional: bool,
}

impl Default for EstimateConstants {
    fn default() -> Self {
        Self {
            c1: std::f64::consts::SQRT_2,
            c2: std::f64::consts::SQRT_2,
            c3: 2.0,
            provisional: true,
        }
    }
}

impl EstimateConstants {
    pub fn new(c1: f64, c2: f64, c3: f64) -> Result<Self> {
        for (name, v) in [("c1", c1), ("c2", c2), ("c3", c3)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        let d = Self::default();
        let provisional = c1 == d.c1 && c2 == d.c2 && c3 == d.c3;
        Ok(Self {
            c1,
            c2,
            c3,
            provisional,
        })
    }

    pub fn label(&self) -> String {
        let tag = if self.provisional {
            " (provisional placeholders)"
        } else {
            ""
        };
        format!(
            "c1 = {}, c2 = {}, c3 = {}{}",
            self.c1, self.c2, self.c3, tag
        )
    }
}
