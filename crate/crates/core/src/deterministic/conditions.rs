//! Smallness conditions on the Grashof number that make the global
//! attractor a single point.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::params::{three_d_violation, EstimateConstants, PhysicsParams};
use crate::error::{Error, Result};
use crate::spectral::h_norm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// 2D, any `r ≥ 1`, data in H.
    #[serde(rename = "2D-C1")]
    TwoD,
    /// 2D, data in V (weaker smallness requirement).
    #[serde(rename = "2D-C3")]
    TwoDRegular,
    /// 3D, `r > 3`.
    #[serde(rename = "3D-r>3")]
    ThreeDSupercritical,
    /// 3D, `r = 3` with `2βμ ≥ 1`.
    #[serde(rename = "3D-r=3")]
    ThreeDCritical,
}

impl Regime {
    /// Regime implied by the dimension and exponent (2D defaults to the
    /// H-data condition).
    pub fn for_problem(dim: usize, r: f64) -> Self {
        match (dim, r > 3.0) {
            (2, _) => Regime::TwoD,
            (_, true) => Regime::ThreeDSupercritical,
            (_, false) => Regime::ThreeDCritical,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Regime::TwoD | Regime::TwoDRegular => 2,
            _ => 3,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Regime::TwoD => "2D-C1",
            Regime::TwoDRegular => "2D-C3",
            Regime::ThreeDSupercritical => "3D-r>3",
            Regime::ThreeDCritical => "3D-r=3",
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2D-C1" => Ok(Regime::TwoD),
            "2D-C3" => Ok(Regime::TwoDRegular),
            "3D-r>3" => Ok(Regime::ThreeDSupercritical),
            "3D-r=3" => Ok(Regime::ThreeDCritical),
            other => Err(Error::Regime(format!("unknown regime tag {other:?}"))),
        }
    }
}

/// `G = ‖f‖_H / (μ² λ₁)`.
pub fn grashof(params: &PhysicsParams) -> f64 {
    h_norm(&params.forcing) / (params.mu * params.mu * params.grid().lambda1())
}

/// `Re = ‖f‖_H^{1/2} / (μ λ₁^{1/2})`.
pub fn reynolds(params: &PhysicsParams) -> f64 {
    h_norm(&params.forcing).sqrt() / (params.mu * params.grid().lambda1().sqrt())
}

/// `η₃ = [(r−3)/(μ(r−1))]·[4/(βμ(r−1))]^{2/(r−3)}` for `r > 3`.
pub fn eta3(mu: f64, beta: f64, r: f64) -> f64 {
    (r - 3.0) / (mu * (r - 1.0)) * (4.0 / (beta * mu * (r - 1.0))).powf(2.0 / (r - 3.0))
}

/// Scalar ingredients of a condition check, independent of any field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionInputs {
    pub mu: f64,
    pub beta: f64,
    pub r: f64,
    pub lambda1: f64,
    pub forcing_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub regime: Regime,
    pub grashof: f64,
    pub reynolds: f64,
    /// Upper bound on G.
    pub threshold: f64,
    pub holds: bool,
    /// ϱ, ϱ*, ϱ₁ or ϱ₂ depending on the regime.
    pub varrho: f64,
    pub eta3: Option<f64>,
    /// Whether `G < threshold` agrees with `varrho > 0`.
    pub consistent: bool,
    pub constants: EstimateConstants,
}

impl ConditionReport {
    /// Exponent floor `−ϱ/2` for the squared distance of two trajectories.
    pub fn contraction_floor(&self) -> f64 {
        -self.varrho / 2.0
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "regime: {}", self.regime.tag())?;
        writeln!(f, "grashof: {}", self.grashof)?;
        writeln!(f, "reynolds: {}", self.reynolds)?;
        writeln!(f, "threshold: {}", self.threshold)?;
        writeln!(f, "holds: {}, varrho = {}", self.holds, self.varrho)?;
        if let Some(e) = self.eta3 {
            writeln!(f, "eta3: {e}")?;
        }
        writeln!(f, "consistent: {}", self.consistent)?;
        write!(f, "constants: {}", self.constants.label())
    }
}

/// Evaluates the Grashof condition of `regime` from scalar inputs.
pub fn evaluate_condition(
    inputs: ConditionInputs,
    constants: &EstimateConstants,
    regime: Regime,
) -> Result<ConditionReport> {
    let ConditionInputs {
        mu,
        beta,
        r,
        lambda1,
        forcing_norm: f,
    } = inputs;
    if !(mu > 0.0 && lambda1 > 0.0 && f >= 0.0 && r >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "condition inputs out of range: mu = {mu}, lambda1 = {lambda1}, |f| = {f}, r = {r}"
        )));
    }
    match regime {
        Regime::TwoD | Regime::TwoDRegular => {}
        Regime::ThreeDSupercritical => {
            if r <= 3.0 || beta <= 0.0 {
                return Err(Error::Regime(format!(
                    "regime 3D-r>3 needs r > 3 and beta > 0 (r = {r}, beta = {beta})"
                )));
            }
        }
        Regime::ThreeDCritical => {
            if r != 3.0 {
                return Err(Error::Regime(format!("regime 3D-r=3 needs r = 3, got {r}")));
            }
            if let Some(msg) = three_d_violation(r, beta, mu) {
                return Err(Error::Regime(msg));
            }
        }
    }
    let ml = mu * lambda1;
    let g = f / (mu * mu * lambda1);
    let re = f.sqrt() / (mu * lambda1.sqrt());
    let mut eta = None;
    let (threshold, varrho) = match regime {
        Regime::TwoD => {
            let c1 = constants.c1;
            let threshold = (ml / (1.0 + ml + ml * ml)).sqrt() / c1;
            let varrho = ml - c1 * c1 / (mu * mu) * (1.0 + 1.0 / ml + 1.0 / (ml * ml)) * f * f;
            (threshold, varrho)
        }
        Regime::TwoDRegular => {
            let c1 = constants.c1;
            (1.0 / c1, ml - c1 * c1 * f * f / (mu * mu * mu * lambda1))
        }
        Regime::ThreeDSupercritical | Regime::ThreeDCritical => {
            let c3 = constants.c3;
            // bracket = 2η₃+1 in the supercritical case, 1 at r = 3
            let (a, b) = if regime == Regime::ThreeDSupercritical {
                let e = eta3(mu, beta, r);
                eta = Some(e);
                (2.0 * e + 1.0, 2.0)
            } else {
                (1.0, 1.0)
            };
            let denom = 3.0 * 3f64.sqrt() * (a + a * ml + b * ml * ml);
            let threshold = (4.0 * mu * lambda1.sqrt() / denom).sqrt() / c3;
            let bracket = b + a / ml + a / (ml * ml);
            let varrho =
                ml - 27.0 * c3.powi(4) / (16.0 * mu.powi(5)) * bracket * bracket * f.powi(4);
            (threshold, varrho)
        }
    };
    let holds = varrho > 0.0;
    Ok(ConditionReport {
        regime,
        grashof: g,
        reynolds: re,
        threshold,
        holds,
        varrho,
        eta3: eta,
        consistent: (g < threshold) == holds,
        constants: *constants,
    })
}

/// Checks the smallness condition for the given parameters. The Darcy
/// term must vanish and the regime must match the grid dimension.
pub fn check_singleton_condition(
    params: &PhysicsParams,
    constants: &EstimateConstants,
    regime: Regime,
) -> Result<ConditionReport> {
    if params.darcy != 0.0 {
        return Err(Error::Regime("condition checks assume darcy = 0".into()));
    }
    if regime.dim() != params.dim() {
        return Err(Error::Regime(format!(
            "regime {} does not apply to a {}D grid",
            regime.tag(),
            params.dim()
        )));
    }
    evaluate_condition(
        ConditionInputs {
            mu: params.mu,
            beta: params.beta,
            r: params.r,
            lambda1: params.grid().lambda1(),
            forcing_norm: h_norm(&params.forcing),
        },
        constants,
        regime,
    )
}

/// Rescales the forcing so that `G = fraction × threshold`.
pub fn scale_forcing_to_threshold(
    params: &PhysicsParams,
    constants: &EstimateConstants,
    regime: Regime,
    fraction: f64,
) -> Result<PhysicsParams> {
    let norm = h_norm(&params.forcing);
    if norm == 0.0 {
        return Err(Error::InvalidParameter(
            "cannot rescale a zero forcing".into(),
        ));
    }
    let report = check_singleton_condition(params, constants, regime)?;
    let target = fraction * report.threshold * params.mu * params.mu * params.grid().lambda1();
    params.with_forcing(params.forcing.scaled(target / norm))
}
