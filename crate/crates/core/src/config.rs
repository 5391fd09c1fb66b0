//! Run configuration: a sectioned TOML document.
//!
//! ```toml
//! [grid]
//! dim = 2
//! modes = 32
//!
//! [physics]
//! mu = 1.0
//! beta = 1.0
//! r = 3.0
//! forcing = [{ k = [0, 1], amplitude = [[0.0, -0.5], [0.0, 0.0]] }]
//! forcing_grashof_fraction = 0.5
//!
//! [noise]
//! mode = "multiplicative"
//! eps_grid = [0.1, 0.05, 0.025]
//! seeds = [1, 2]
//!
//! [solver]
//! h = 0.01
//! t_pull = 30.0
//! ```
//!
//! Every section and key except `grid.dim`, `grid.modes`, `physics.mu`,
//! `physics.beta` and `physics.r` has a default. Unknown keys are rejected.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::deterministic::params::three_d_violation;
use crate::deterministic::{
    scale_forcing_to_threshold, EstimateConstants, PhysicsParams, Regime, SingletonOptions,
    SolverOptions,
};
use crate::error::{Error, Result};
use crate::random_dynamics::{NoiseConfig, NoiseMode};
use crate::spectral::{snapshot, SpectralVelocity, TorusGrid};
use crate::stochastic::OuDiagnosticsConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    pub physics: PhysicsSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub constants: ConstantsSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dim: usize,
    pub modes: usize,
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default = "default_dealias")]
    pub dealias_factor: f64,
}

/// One Fourier mode `k` with complex amplitude `[[re, im], …]` per
/// component; the conjugate at `−k` is added automatically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub k: Vec<i64>,
    pub amplitude: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    pub mu: f64,
    pub beta: f64,
    pub r: f64,
    #[serde(default)]
    pub darcy: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forcing: Vec<ModeSpec>,
    /// Binary field snapshot, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forcing_file: Option<PathBuf>,
    /// Rescale the forcing so that `G` is this fraction of the threshold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forcing_grashof_fraction: Option<f64>,
    /// Condition regime tag; inferred from `dim` and `r` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(default = "default_mode")]
    pub mode: NoiseMode,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_eps_grid")]
    pub eps_grid: Vec<f64>,
    #[serde(default = "default_one")]
    pub ou_alpha: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phi: Vec<ModeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_file: Option<PathBuf>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            mode: default_mode(),
            epsilon: default_epsilon(),
            eps_grid: default_eps_grid(),
            ou_alpha: 1.0,
            phi: Vec::new(),
            phi_file: None,
            seeds: default_seeds(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    /// The zero field.
    Zero,
    /// A smooth random probe with unit H-norm drawn from `initial_seed`.
    Probe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_h")]
    pub h: f64,
    /// Duration of `simulate`.
    #[serde(default = "default_one")]
    pub t_final: f64,
    #[serde(default = "default_t_pull")]
    pub t_pull: f64,
    /// Singleton search tolerance.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_t")]
    pub max_t: f64,
    #[serde(default = "default_probes")]
    pub n_probes: usize,
    #[serde(default = "default_check")]
    pub check_interval: f64,
    #[serde(default)]
    pub probe_seed: u64,
    /// Tolerance of the pullback doubling test.
    #[serde(default = "default_pullback_tol")]
    pub pullback_tol: f64,
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
    #[serde(default = "default_guard")]
    pub blowup_guard: f64,
    #[serde(default = "default_initial")]
    pub initial: InitialState,
    #[serde(default)]
    pub initial_seed: u64,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            h: default_h(),
            t_final: 1.0,
            t_pull: default_t_pull(),
            tol: default_tol(),
            max_t: default_max_t(),
            n_probes: default_probes(),
            check_interval: default_check(),
            probe_seed: 0,
            pullback_tol: default_pullback_tol(),
            cfl_safety: default_cfl(),
            blowup_guard: default_guard(),
            initial: default_initial(),
            initial_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSection {
    #[serde(default = "default_c12")]
    pub c1: f64,
    #[serde(default = "default_c12")]
    pub c2: f64,
    #[serde(default = "default_c3")]
    pub c3: f64,
}

impl Default for ConstantsSection {
    fn default() -> Self {
        Self {
            c1: default_c12(),
            c2: default_c12(),
            c3: default_c3(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_one")]
    pub window: f64,
    #[serde(default = "default_growth_seeds")]
    pub growth_seeds: usize,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        Self {
            n_samples: default_n_samples(),
            horizon: default_horizon(),
            h: default_h(),
            delta: default_delta(),
            window: 1.0,
            growth_seeds: default_growth_seeds(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
    /// Steps between field snapshots in `simulate` (0 disables them).
    #[serde(default)]
    pub snapshot_every: usize,
    /// Steps between trajectory states kept in `pullback` output.
    #[serde(default)]
    pub sample_every: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
            formats: default_formats(),
            snapshot_every: 0,
            sample_every: 0,
        }
    }
}

fn default_length() -> f64 {
    2.0 * PI
}
fn default_dealias() -> f64 {
    1.5
}
fn default_mode() -> NoiseMode {
    NoiseMode::None
}
fn default_epsilon() -> f64 {
    0.1
}
fn default_eps_grid() -> Vec<f64> {
    vec![0.1, 0.05, 0.025, 0.0125]
}
fn default_one() -> f64 {
    1.0
}
fn default_seeds() -> Vec<u64> {
    vec![1, 2, 3, 4]
}
fn default_h() -> f64 {
    0.01
}
fn default_t_pull() -> f64 {
    30.0
}
fn default_tol() -> f64 {
    1e-8
}
fn default_max_t() -> f64 {
    200.0
}
fn default_probes() -> usize {
    3
}
fn default_check() -> f64 {
    0.5
}
fn default_pullback_tol() -> f64 {
    1e-6
}
fn default_cfl() -> f64 {
    0.4
}
fn default_guard() -> f64 {
    1e8
}
fn default_initial() -> InitialState {
    InitialState::Zero
}
fn default_c12() -> f64 {
    std::f64::consts::SQRT_2
}
fn default_c3() -> f64 {
    2.0
}
fn default_n_samples() -> usize {
    100_000
}
fn default_horizon() -> f64 {
    1000.0
}
fn default_delta() -> f64 {
    0.1
}
fn default_growth_seeds() -> usize {
    20
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_formats() -> Vec<String> {
    vec!["csv".into(), "json".into()]
}

pub const FORMATS: [&str; 3] = ["csv", "json", "svg"];

/// Parses and validates a configuration. Syntax errors carry the line
/// number; semantic errors list every violation with its field path.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::ConfigSyntax {
        line: e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
            .unwrap_or(0),
        message: e.message().trim().to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigInvalid(v))
        }
    }

    /// Every violated rule, prefixed with the offending field path.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bad = |path: &str, msg: String| out.push(format!("{path}: {msg}"));
        let g = &self.grid;
        if g.dim != 2 && g.dim != 3 {
            bad("grid.dim", format!("must be 2 or 3, got {}", g.dim));
        }
        if g.modes < 8 || g.modes % 2 != 0 {
            bad(
                "grid.modes",
                format!("must be even and >= 8, got {}", g.modes),
            );
        }
        if !(g.length.is_finite() && g.length > 0.0) {
            bad("grid.length", format!("must be positive, got {}", g.length));
        }
        if !(g.dealias_factor >= 1.0) {
            bad(
                "grid.dealias_factor",
                format!("must be >= 1, got {}", g.dealias_factor),
            );
        }
        let p = &self.physics;
        if !(p.mu > 0.0) {
            bad("physics.mu", format!("must be positive, got {}", p.mu));
        }
        if !(p.beta >= 0.0) {
            bad(
                "physics.beta",
                format!("must be non-negative, got {}", p.beta),
            );
        }
        if !(p.r >= 1.0) {
            bad("physics.r", format!("must be >= 1, got {}", p.r));
        }
        if !(p.darcy >= 0.0) {
            bad(
                "physics.darcy",
                format!("must be non-negative, got {}", p.darcy),
            );
        }
        if g.dim == 3 {
            if let Some(msg) = three_d_violation(p.r, p.beta, p.mu) {
                bad("physics.r", msg);
            }
        }
        if !p.forcing.is_empty() && p.forcing_file.is_some() {
            bad(
                "physics.forcing",
                "give either forcing modes or forcing_file, not both".into(),
            );
        }
        for (i, m) in p.forcing.iter().enumerate() {
            if let Some(msg) = mode_violation(m, g) {
                bad(&format!("physics.forcing[{i}]"), msg);
            }
        }
        if let Some(frac) = p.forcing_grashof_fraction {
            if !(frac > 0.0) {
                bad(
                    "physics.forcing_grashof_fraction",
                    format!("must be positive, got {frac}"),
                );
            }
            if p.forcing.is_empty() && p.forcing_file.is_none() {
                bad(
                    "physics.forcing_grashof_fraction",
                    "needs a nonzero forcing".into(),
                );
            }
            if p.darcy != 0.0 {
                bad(
                    "physics.forcing_grashof_fraction",
                    "conditions assume darcy = 0".into(),
                );
            }
        }
        if let Some(tag) = &p.regime {
            match tag.parse::<Regime>() {
                Ok(r) if r.dim() != g.dim => bad(
                    "physics.regime",
                    format!("{tag} does not apply to dim = {}", g.dim),
                ),
                Ok(_) => {}
                Err(e) => bad("physics.regime", e.to_string()),
            }
        }
        let n = &self.noise;
        let eps_ok = |e: f64| e > 0.0 && e <= 1.0;
        if !eps_ok(n.epsilon) {
            bad(
                "noise.epsilon",
                format!("must lie in (0, 1], got {}", n.epsilon),
            );
        }
        for (i, &e) in n.eps_grid.iter().enumerate() {
            if !eps_ok(e) {
                bad(
                    &format!("noise.eps_grid[{i}]"),
                    format!("must lie in (0, 1], got {e}"),
                );
            }
        }
        if !(n.ou_alpha > 0.0) {
            bad(
                "noise.ou_alpha",
                format!("must be positive, got {}", n.ou_alpha),
            );
        }
        if n.seeds.is_empty() {
            bad("noise.seeds", "at least one seed is required".into());
        }
        let has_phi = !n.phi.is_empty() || n.phi_file.is_some();
        match n.mode {
            NoiseMode::Additive => {
                if g.dim == 3 {
                    bad(
                        "noise.mode",
                        "additive noise is only supported in 2D".into(),
                    );
                }
                if !has_phi {
                    bad(
                        "noise.phi",
                        "additive noise requires phi or phi_file".into(),
                    );
                }
            }
            _ => {
                if has_phi {
                    bad(
                        "noise.phi",
                        format!("phi is only used with additive noise, not {}", n.mode),
                    );
                }
            }
        }
        if !n.phi.is_empty() && n.phi_file.is_some() {
            bad(
                "noise.phi",
                "give either phi modes or phi_file, not both".into(),
            );
        }
        for (i, m) in n.phi.iter().enumerate() {
            if let Some(msg) = mode_violation(m, g) {
                bad(&format!("noise.phi[{i}]"), msg);
            } else {
                let k2: i64 = m.k.iter().map(|x| x * x).sum();
                if (k2 as f64).sqrt() > g.modes as f64 / 4.0 {
                    bad(
                        &format!("noise.phi[{i}]"),
                        format!("mode {:?} exceeds |k| <= N/4", m.k),
                    );
                }
            }
        }
        let s = &self.solver;
        for (name, v) in [
            ("solver.h", s.h),
            ("solver.t_pull", s.t_pull),
            ("solver.tol", s.tol),
            ("solver.max_t", s.max_t),
            ("solver.check_interval", s.check_interval),
            ("solver.pullback_tol", s.pullback_tol),
            ("solver.cfl_safety", s.cfl_safety),
            ("solver.blowup_guard", s.blowup_guard),
        ] {
            if !(v.is_finite() && v > 0.0) {
                bad(name, format!("must be positive, got {v}"));
            }
        }
        if !(s.t_final >= 0.0) {
            bad(
                "solver.t_final",
                format!("must be non-negative, got {}", s.t_final),
            );
        }
        if s.n_probes < 2 {
            bad(
                "solver.n_probes",
                format!("must be >= 2, got {}", s.n_probes),
            );
        }
        for (name, v) in [
            ("solver.t_final", s.t_final),
            ("solver.t_pull", s.t_pull),
            ("solver.check_interval", s.check_interval),
        ] {
            if s.h > 0.0 && v >= 0.0 && !is_multiple(v, s.h) {
                bad(name, format!("{v} is not a multiple of solver.h = {}", s.h));
            }
        }
        let c = &self.constants;
        for (name, v) in [
            ("constants.c1", c.c1),
            ("constants.c2", c.c2),
            ("constants.c3", c.c3),
        ] {
            if !(v > 0.0) {
                bad(name, format!("must be positive, got {v}"));
            }
        }
        let d = &self.diagnostics;
        if d.n_samples < 2 {
            bad(
                "diagnostics.n_samples",
                format!("must be >= 2, got {}", d.n_samples),
            );
        }
        for (name, v) in [
            ("diagnostics.horizon", d.horizon),
            ("diagnostics.h", d.h),
            ("diagnostics.delta", d.delta),
            ("diagnostics.window", d.window),
        ] {
            if !(v > 0.0) {
                bad(name, format!("must be positive, got {v}"));
            }
        }
        if d.window >= d.horizon {
            bad(
                "diagnostics.window",
                "must be shorter than the horizon".into(),
            );
        }
        if d.h > 0.0 && !(is_multiple(d.horizon, d.h) && is_multiple(d.window, d.h)) {
            bad(
                "diagnostics.h",
                "horizon and window must be multiples of the step".into(),
            );
        }
        for (i, f) in self.output.formats.iter().enumerate() {
            if !FORMATS.contains(&f.as_str()) {
                bad(
                    &format!("output.formats[{i}]"),
                    format!("unknown format {f:?}"),
                );
            }
        }
        out
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        let g = &self.grid;
        TorusGrid::new(g.dim, g.length, g.modes, g.dealias_factor)
    }

    pub fn constants(&self) -> Result<EstimateConstants> {
        EstimateConstants::new(self.constants.c1, self.constants.c2, self.constants.c3)
    }

    pub fn regime(&self) -> Result<Regime> {
        match &self.physics.regime {
            Some(tag) => tag.parse(),
            None => Ok(Regime::for_problem(self.grid.dim, self.physics.r)),
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            cfl_safety: self.solver.cfl_safety,
            blowup_guard: self.solver.blowup_guard,
        }
    }

    pub fn singleton_options(&self) -> SingletonOptions {
        let s = &self.solver;
        SingletonOptions {
            tol: s.tol,
            max_t: s.max_t,
            n_probes: s.n_probes,
            h: s.h,
            check_interval: s.check_interval,
            seed: s.probe_seed,
            solver: self.solver_options(),
        }
    }

    pub fn diagnostics_config(&self, seed: u64) -> OuDiagnosticsConfig {
        let d = &self.diagnostics;
        OuDiagnosticsConfig {
            alpha: self.noise.ou_alpha,
            seed,
            n_samples: d.n_samples,
            h: d.h,
            horizon: d.horizon,
            delta: d.delta,
            window: d.window,
            growth_seeds: d.growth_seeds,
        }
    }

    /// Physical parameters; field files are resolved against `base`.
    pub fn physics_params(&self, base: &Path) -> Result<PhysicsParams> {
        let grid = self.grid()?;
        let p = &self.physics;
        let forcing = match &p.forcing_file {
            Some(file) => load_field(base, file, grid)?,
            None => field_from_modes(grid, &p.forcing)?,
        };
        let params = PhysicsParams::new(p.mu, p.beta, p.r, p.darcy, forcing)?;
        match p.forcing_grashof_fraction {
            Some(frac) => {
                scale_forcing_to_threshold(&params, &self.constants()?, self.regime()?, frac)
            }
            None => Ok(params),
        }
    }

    /// Noise configuration at `epsilon` with path seed `seed`.
    pub fn noise_config(&self, base: &Path, epsilon: f64, seed: u64) -> Result<NoiseConfig> {
        let grid = self.grid()?;
        let n = &self.noise;
        let phi = if let Some(file) = &n.phi_file {
            Some(load_field(base, file, grid)?)
        } else if !n.phi.is_empty() {
            Some(field_from_modes(grid, &n.phi)?)
        } else {
            None
        };
        Ok(NoiseConfig {
            mode: n.mode,
            epsilon,
            phi,
            ou_alpha: n.ou_alpha,
            seed,
        })
    }

    /// Initial state of pullback runs.
    pub fn initial_state(&self) -> Result<Option<SpectralVelocity>> {
        match self.solver.initial {
            InitialState::Zero => Ok(None),
            InitialState::Probe => {
                let grid = self.grid()?;
                Ok(Some(SpectralVelocity::random_smooth(
                    grid,
                    self.solver.initial_seed,
                    2.0,
                    grid.modes() as f64 / 4.0,
                    1.0,
                )?))
            }
        }
    }
}

fn is_multiple(v: f64, h: f64) -> bool {
    let n = (v / h).round();
    (n * h - v).abs() <= 1e-9 * v.abs().max(h)
}

fn mode_violation(m: &ModeSpec, g: &GridSection) -> Option<String> {
    if m.k.len() != g.dim {
        return Some(format!("k has {} entries, expected {}", m.k.len(), g.dim));
    }
    if m.amplitude.len() != g.dim {
        return Some(format!(
            "amplitude has {} entries, expected {}",
            m.amplitude.len(),
            g.dim
        ));
    }
    if m.k.iter().all(|&x| x == 0) {
        return Some("the zero mode cannot be forced (mean-zero fields)".into());
    }
    if m.k
        .iter()
        .any(|&x| x.unsigned_abs() as usize >= g.modes / 2)
    {
        return Some(format!(
            "mode {:?} is not retained with {} modes",
            m.k, g.modes
        ));
    }
    None
}

fn field_from_modes(grid: TorusGrid, modes: &[ModeSpec]) -> Result<SpectralVelocity> {
    let list: Vec<([i64; 3], [Complex64; 3])> = modes
        .iter()
        .map(|m| {
            let mut k = [0i64; 3];
            let mut a = [Complex64::default(); 3];
            for (i, &x) in m.k.iter().enumerate().take(3) {
                k[i] = x;
            }
            for (i, z) in m.amplitude.iter().enumerate().take(3) {
                a[i] = Complex64::new(z[0], z[1]);
            }
            (k, a)
        })
        .collect();
    SpectralVelocity::from_modes(grid, &list)
}

fn load_field(base: &Path, file: &Path, grid: TorusGrid) -> Result<SpectralVelocity> {
    let u = snapshot::read_file(&base.join(file), grid.dealias_factor())?;
    if !u.grid().same_as(&grid) {
        return Err(Error::GridMismatch);
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        "[grid]\ndim = 2\nmodes = 16\n\n[physics]\nmu = 1.0\nbeta = 1.0\nr = 3.0\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.physics.darcy, 0.0);
        assert_eq!(c.grid.dealias_factor, 1.5);
        assert_eq!(c.solver.cfl_safety, 0.4);
        assert_eq!(c.grid.length, 2.0 * PI);
        assert_eq!(c.noise.mode, NoiseMode::None);
    }

    #[test]
    fn three_d_low_exponent_rejected() {
        let text = MINIMAL
            .replace("dim = 2", "dim = 3")
            .replace("r = 3.0", "r = 2.0");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("3D requires r ≥ 3"), "{err}");
    }

    #[test]
    fn additive_in_3d_rejected() {
        let text = MINIMAL.replace("dim = 2", "dim = 3")
            + "\n[noise]\nmode = \"additive\"\nphi = [{ k = [0, 1, 0], amplitude = [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]] }]\n";
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("noise.mode"), "{err}");
    }

    #[test]
    fn all_violations_reported() {
        let text = MINIMAL
            .replace("mu = 1.0", "mu = -1.0")
            .replace("modes = 16", "modes = 15");
        match parse_config(&text) {
            Err(Error::ConfigInvalid(v)) => {
                assert!(v.iter().any(|m| m.starts_with("grid.modes")));
                assert!(v.iter().any(|m| m.starts_with("physics.mu")));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_line() {
        let text = "[grid]\ndim = 2\nmodes = = 16\n";
        match parse_config(text) {
            Err(Error::ConfigSyntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn round_trip() {
        let text = MINIMAL.to_string()
            + "forcing = [{ k = [0, 1], amplitude = [[0.0, -0.5], [0.0, 0.0]] }]\n[noise]\nmode = \"multiplicative\"\neps_grid = [0.1, 0.05, 0.025]\n";
        let c = parse_config(&text).unwrap();
        let again = parse_config(&c.to_toml()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn grashof_fraction_rescales() {
        let text = MINIMAL.to_string()
            + "forcing = [{ k = [0, 1], amplitude = [[0.0, -0.5], [0.0, 0.0]] }]\nforcing_grashof_fraction = 0.5\n";
        let c = parse_config(&text).unwrap();
        let p = c.physics_params(Path::new(".")).unwrap();
        let rep = crate::deterministic::check_singleton_condition(
            &p,
            &c.constants().unwrap(),
            c.regime().unwrap(),
        )
        .unwrap();
        assert!((rep.grashof / rep.threshold - 0.5).abs() < 1e-14);
    }
}
