use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::deterministic::PhysicsParams;
use crate::error::{Error, Result};
use crate::spectral::SpectralVelocity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseMode {
    None,
    Additive,
    Multiplicative,
}

impl NoiseMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            NoiseMode::None => "none",
            NoiseMode::Additive => "additive",
            NoiseMode::Multiplicative => "multiplicative",
        }
    }
}

impl fmt::Display for NoiseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(NoiseMode::None),
            "additive" => Ok(NoiseMode::Additive),
            "multiplicative" => Ok(NoiseMode::Multiplicative),
            other => Err(Error::InvalidParameter(format!(
                "unknown noise mode {other:?}"
            ))),
        }
    }
}

/// Noise intensity and shape of one random system.
///
/// `epsilon = 0` is accepted so that the transformed solvers can be compared
/// against the deterministic one; user-facing configuration requires
/// `0 < epsilon ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseConfig {
    pub mode: NoiseMode,
    pub epsilon: f64,
    /// Spatial profile `Φ` of additive noise.
    pub phi: Option<SpectralVelocity>,
    pub ou_alpha: f64,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn none() -> Self {
        Self {
            mode: NoiseMode::None,
            epsilon: 0.0,
            phi: None,
            ou_alpha: 1.0,
            seed: 0,
        }
    }

    pub fn additive(epsilon: f64, phi: SpectralVelocity, ou_alpha: f64, seed: u64) -> Self {
        Self {
            mode: NoiseMode::Additive,
            epsilon,
            phi: Some(phi),
            ou_alpha,
            seed,
        }
    }

    pub fn multiplicative(epsilon: f64, ou_alpha: f64, seed: u64) -> Self {
        Self {
            mode: NoiseMode::Multiplicative,
            epsilon,
            phi: None,
            ou_alpha,
            seed,
        }
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self {
            epsilon,
            ..self.clone()
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn validate(&self, params: &PhysicsParams) -> Result<()> {
        let v = self.violations(params);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(v.join("; ")))
        }
    }

    pub fn violations(&self, params: &PhysicsParams) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.epsilon >= 0.0 && self.epsilon <= 1.0) {
            out.push(format!("epsilon must lie in (0, 1], got {}", self.epsilon));
        }
        if !(self.ou_alpha.is_finite() && self.ou_alpha > 0.0) {
            out.push(format!("ou_alpha must be positive, got {}", self.ou_alpha));
        }
        match self.mode {
            NoiseMode::Additive => {
                if params.dim() == 3 {
                    out.push("additive noise is only supported in 2D".into());
                }
                match &self.phi {
                    None => out.push("additive noise requires a profile phi".into()),
                    Some(phi) => {
                        if !phi.grid().same_as(params.grid()) {
                            out.push("phi lives on a different grid".into());
                        } else if let Some(k) = band_violation(phi) {
                            out.push(format!(
                                "phi must be band-limited to |k| <= N/4, found mode {k:?}"
                            ));
                        }
                    }
                }
            }
            NoiseMode::Multiplicative | NoiseMode::None => {
                if self.phi.is_some() {
                    out.push(format!(
                        "phi is only used with additive noise, not {}",
                        self.mode
                    ));
                }
            }
        }
        out
    }
}

/// First nonzero mode of `phi` with `|k| > N/4`, if any.
fn band_violation(phi: &SpectralVelocity) -> Option<[i64; 3]> {
    let grid = phi.grid();
    let len = grid.lattice_len();
    let limit = grid.modes() as f64 / 4.0;
    for idx in 0..len {
        let nonzero = (0..grid.dim()).any(|c| phi.coeffs()[c * len + idx].norm() != 0.0);
        if nonzero && (grid.k_squared(idx) as f64).sqrt() > limit {
            return Some(grid.wavevector(idx));
        }
    }
    None
}
