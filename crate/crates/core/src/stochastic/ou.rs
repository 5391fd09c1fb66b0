use super::wiener::{step_normals, stream_normals, tick_of, StreamKind, WienerPath, ANCHOR_STREAM};
use crate::error::{Error, Result};

/// One-step constants of the OU recursion with rate `alpha` and step `h`:
/// `z⁺ = a·z + (c/h)·ΔW + σ·ξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuStep {
    pub a: f64,
    /// `∫_0^h e^{−α(h−s)} ds`, the covariance of the OU increment with `ΔW`.
    pub c: f64,
    /// `Var ∫_0^h e^{−α(h−s)} dW`.
    pub v: f64,
    pub sigma: f64,
}

impl OuStep {
    pub fn new(alpha: f64, h: f64) -> Self {
        let a = (-alpha * h).exp();
        let c = -(-alpha * h).exp_m1() / alpha;
        let v = -(-2.0 * alpha * h).exp_m1() / (2.0 * alpha);
        let sigma = (v - c * c / h).max(0.0).sqrt();
        Self { a, c, v, sigma }
    }
}

/// Stationary Ornstein–Uhlenbeck path `dz = −αz dt + dW` driven by a
/// [`WienerPath`]. The value at the left end is a stationary draw; each step
/// adds the exact conditional law of the OU increment given `ΔW`.
#[derive(Debug, Clone, PartialEq)]
pub struct OuPath {
    alpha: f64,
    wiener: WienerPath,
    z: Vec<f64>,
}

impl OuPath {
    pub fn from_wiener(wiener: WienerPath, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "OU rate must be positive, got {alpha}"
            )));
        }
        let h = wiener.step();
        let k = OuStep::new(alpha, h);
        let steps = wiener.len() - 1;
        let xi = step_normals(
            wiener.seed(),
            StreamKind::Innovation,
            wiener.min_tick(),
            steps,
        );
        let anchor = stream_normals(wiener.seed(), ANCHOR_STREAM, 1)[0];
        let mut z = Vec::with_capacity(wiener.len());
        z.push(anchor / (2.0 * alpha).sqrt());
        let w = wiener.values();
        for j in 0..steps {
            let dw = w[j + 1] - w[j];
            z.push(k.a * z[j] + k.c / h * dw + k.sigma * xi[j]);
        }
        Ok(Self { alpha, wiener, z })
    }

    /// Wiener path on `[t_min, t_max]` and its OU transform in one call.
    pub fn sample(seed: u64, alpha: f64, t_min: f64, t_max: f64, h: f64) -> Result<Self> {
        Self::from_wiener(WienerPath::sample(seed, t_min, t_max, h)?, alpha)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn wiener(&self) -> &WienerPath {
        &self.wiener
    }

    pub fn step(&self) -> f64 {
        self.wiener.step()
    }

    pub fn values(&self) -> &[f64] {
        &self.z
    }

    pub fn z_at_tick(&self, tick: i64) -> Result<f64> {
        self.wiener.check_tick(tick)?;
        Ok(self.z[(tick - self.wiener.min_tick()) as usize])
    }

    /// `z(θ_s ω)`, defined only on grid points of the path.
    pub fn z_at(&self, s: f64) -> Result<f64> {
        self.z_at_tick(tick_of(s, self.step())?)
    }

    /// View of the path along the shifted noise `θ_s ω`.
    pub fn shifted(&self, s: f64) -> Result<ShiftedOu<'_>> {
        Ok(ShiftedOu {
            path: self,
            shift: tick_of(s, self.step())?,
        })
    }

    /// `(t, W, z)` rows of the path.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let h = self.step();
        let m = self.wiener.min_tick();
        self.wiener
            .values()
            .iter()
            .zip(&self.z)
            .enumerate()
            .map(move |(i, (w, z))| ((m + i as i64) as f64 * h, *w, *z))
    }

    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,W,z")?;
        for (t, w, z) in self.rows() {
            writeln!(out, "{t},{w},{z}")?;
        }
        Ok(())
    }
}

/// `z(θ_s ω)` as a function of `s`; [`ou_shift_eval`] is the unshifted case.
pub fn ou_shift_eval(ou: &OuPath, s: f64) -> Result<f64> {
    ou.z_at(s)
}

/// The OU path seen along `θ_shift ω`: `eval(s) = z(θ_{s+shift} ω)`.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedOu<'a> {
    path: &'a OuPath,
    shift: i64,
}

impl<'a> ShiftedOu<'a> {
    pub fn shift(&self) -> f64 {
        self.shift as f64 * self.path.step()
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        self.path
            .z_at_tick(tick_of(s, self.path.step())? + self.shift)
    }

    /// `θ_u ∘ θ_shift = θ_{u + shift}`.
    pub fn shifted(&self, u: f64) -> Result<ShiftedOu<'a>> {
        Ok(ShiftedOu {
            path: self.path,
            shift: self.shift + tick_of(u, self.path.step())?,
        })
    }
}
