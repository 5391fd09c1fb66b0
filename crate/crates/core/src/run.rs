//! Run orchestration: one function per subcommand, artifact emission and
//! manifests.
//!
//! Every run writes `manifest-<command>.json` next to its artifacts. The
//! manifest holds the resolved configuration, the seed offset, the effective
//! seeds, the estimate constants and the SHA-256 of every artifact. Passing a
//! manifest back as `--config` repeats the run.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{parse_config, RunConfig};
use crate::deterministic::{
    check_singleton_condition, find_singleton, simulate, EstimateConstants, PhysicsParams,
    SingletonResult,
};
use crate::error::{Error, Result};
use crate::experiments::{delta_theory, fit_rate, sweep_records, write_sweep_csv, SweepPlan};
use crate::random_dynamics::{pullback_sample, PullbackOptions};
use crate::report;
use crate::spectral::{h_norm, snapshot, SpectralVelocity};
use crate::stochastic::ou_diagnostics;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    CheckConditions,
    Simulate,
    Singleton,
    Pullback,
    Sweep,
    OuDiagnostics,
    Report,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::CheckConditions,
        Command::Simulate,
        Command::Singleton,
        Command::Pullback,
        Command::Sweep,
        Command::OuDiagnostics,
        Command::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::CheckConditions => "check-conditions",
            Command::Simulate => "simulate",
            Command::Singleton => "singleton",
            Command::Pullback => "pullback",
            Command::Sweep => "sweep",
            Command::OuDiagnostics => "ou-diagnostics",
            Command::Report => "report",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown subcommand {s:?}")))
    }
}

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const NOT_CONVERGED: i32 = 3;
    pub const BLOW_UP: i32 = 4;
}

/// Exit code for an error surfaced by a run.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ConfigSyntax { .. }
        | Error::ConfigInvalid(_)
        | Error::InvalidGrid(_)
        | Error::GridMismatch
        | Error::MeanViolation(_)
        | Error::InvalidField(_)
        | Error::InvalidParameter(_)
        | Error::Regime(_) => exit::VALIDATION,
        Error::NotConverged(_) | Error::InsufficientData(_) => exit::NOT_CONVERGED,
        Error::BlowUp { .. } | Error::StepTooLarge { .. } => exit::BLOW_UP,
        _ => exit::FAILURE,
    }
}

/// A configuration together with the directory its relative paths refer to.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base: PathBuf,
    /// Seed offset recorded in a manifest, if the config came from one.
    pub seed_offset: Option<u64>,
}

impl LoadedConfig {
    pub fn from_text(text: &str, base: &Path) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            let m: Manifest = serde_json::from_str(text)?;
            m.config.validate()?;
            Ok(Self {
                config: m.config,
                base: base.to_path_buf(),
                seed_offset: Some(m.seed_offset),
            })
        } else {
            Ok(Self {
                config: parse_config(text)?,
                base: base.to_path_buf(),
                seed_offset: None,
            })
        }
    }

    /// Reads a TOML config or a manifest JSON.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_text(&text, &base)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Output directory; defaults to `output.dir` relative to the config.
    pub out: Option<PathBuf>,
    /// Worker threads; rayon's default when absent.
    pub workers: Option<usize>,
    /// Added to every seed; defaults to the manifest value or 0.
    pub seed_offset: Option<u64>,
    /// Replaces `output.formats` when non-empty.
    pub formats: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Ok,
    NotConverged,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Ok => exit::OK,
            RunStatus::NotConverged => exit::NOT_CONVERGED,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: RunStatus,
    /// Text for the terminal.
    pub summary: String,
    pub out_dir: PathBuf,
    pub artifacts: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub noise: Vec<u64>,
    pub probe: u64,
    pub initial: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: Command,
    pub status: RunStatus,
    pub version: String,
    pub seed_offset: u64,
    pub seeds: SeedRecord,
    pub constants: EstimateConstants,
    pub config: RunConfig,
    pub artifacts: Vec<ArtifactDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Collects artifacts, honouring the selected formats.
struct Emitter {
    dir: PathBuf,
    formats: Vec<String>,
    written: Vec<PathBuf>,
}

impl Emitter {
    fn wants(&self, format: &str) -> bool {
        self.formats.iter().any(|f| f == format)
    }

    fn bytes(&mut self, name: &str, data: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, data)?;
        self.written.push(path);
        Ok(())
    }

    fn csv(&mut self, name: &str, data: Vec<u8>) -> Result<()> {
        if self.wants("csv") {
            self.bytes(name, &data)?;
        }
        Ok(())
    }

    /// JSON results are always written: the report and SVG layers read them.
    fn json(&mut self, name: &str, v: &Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(v)?;
        text.push('\n');
        self.bytes(name, text.as_bytes())?;
        if self.wants("svg") {
            for (svg_name, svg) in report::plots(name, v)? {
                self.bytes(&svg_name, svg.as_bytes())?;
            }
        }
        Ok(())
    }

    fn field(&mut self, name: &str, u: &SpectralVelocity) -> Result<()> {
        self.bytes(name, &snapshot::encode(u))
    }
}

/// Everything a subcommand needs, resolved once.
struct Ctx<'a> {
    cfg: &'a RunConfig,
    base: &'a Path,
    offset: u64,
    emit: Emitter,
}

impl Ctx<'_> {
    fn noise_seeds(&self) -> Vec<u64> {
        self.cfg
            .noise
            .seeds
            .iter()
            .map(|s| s + self.offset)
            .collect()
    }

    fn params(&self) -> Result<PhysicsParams> {
        self.cfg.physics_params(self.base)
    }
}

/// Runs `command` and writes its artifacts and manifest.
pub fn run(command: Command, loaded: &LoadedConfig, opts: &RunOptions) -> Result<RunOutcome> {
    let cfg = &loaded.config;
    cfg.validate()?;
    let out_dir = opts
        .out
        .clone()
        .unwrap_or_else(|| loaded.base.join(&cfg.output.dir));
    if command == Command::Report {
        return run_report(&out_dir, &opts.formats);
    }
    let formats = if opts.formats.is_empty() {
        cfg.output.formats.clone()
    } else {
        opts.formats.clone()
    };
    if let Some(bad) = formats
        .iter()
        .find(|f| !crate::config::FORMATS.contains(&f.as_str()))
    {
        return Err(Error::InvalidParameter(format!(
            "unknown output format {bad:?}"
        )));
    }
    std::fs::create_dir_all(&out_dir)?;
    let offset = opts.seed_offset.or(loaded.seed_offset).unwrap_or(0);
    let mut ctx = Ctx {
        cfg,
        base: &loaded.base,
        offset,
        emit: Emitter {
            dir: out_dir.clone(),
            formats,
            written: Vec::new(),
        },
    };
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = opts.workers {
            if n == 0 {
                return Err(Error::InvalidParameter("--workers must be positive".into()));
            }
            b = b.num_threads(n);
        }
        b.build()
            .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?
    };
    log::info!("{command}: writing to {}", out_dir.display());
    let (status, summary) = pool.install(|| match command {
        Command::CheckConditions => check_conditions(&mut ctx),
        Command::Simulate => run_simulate(&mut ctx),
        Command::Singleton => run_singleton(&mut ctx),
        Command::Pullback => run_pullback(&mut ctx),
        Command::Sweep => run_sweep(&mut ctx),
        Command::OuDiagnostics => run_ou(&mut ctx),
        Command::Report => unreachable!("handled above"),
    })?;
    write_manifest(command, status, &mut ctx, cfg)?;
    Ok(RunOutcome {
        status,
        summary,
        out_dir,
        artifacts: ctx.emit.written,
    })
}

fn write_manifest(
    command: Command,
    status: RunStatus,
    ctx: &mut Ctx,
    cfg: &RunConfig,
) -> Result<()> {
    let mut artifacts = Vec::new();
    for path in &ctx.emit.written {
        let data = std::fs::read(path)?;
        artifacts.push(ArtifactDigest {
            path: path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            sha256: sha256_hex(&data),
            bytes: data.len() as u64,
        });
    }
    // Field files are made absolute so the manifest works from any directory.
    let mut resolved = cfg.clone();
    for file in [
        &mut resolved.physics.forcing_file,
        &mut resolved.noise.phi_file,
    ]
    .into_iter()
    .flatten()
    {
        *file = std::path::absolute(ctx.base.join(&*file))?;
    }
    let manifest = Manifest {
        command,
        status,
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed_offset: ctx.offset,
        seeds: SeedRecord {
            noise: ctx.noise_seeds(),
            probe: cfg.solver.probe_seed + ctx.offset,
            initial: cfg.solver.initial_seed + ctx.offset,
        },
        constants: cfg.constants()?,
        config: resolved,
        artifacts,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(ctx.emit.dir.join(format!("manifest-{command}.json")), text)?;
    Ok(())
}

/// Config with seeds shifted by the offset.
fn offset_config(ctx: &Ctx) -> RunConfig {
    let mut cfg = ctx.cfg.clone();
    cfg.solver.probe_seed += ctx.offset;
    cfg.solver.initial_seed += ctx.offset;
    cfg
}

fn check_conditions(ctx: &mut Ctx) -> Result<(RunStatus, String)> {
    let params = ctx.params()?;
    let rep = check_singleton_condition(&params, &ctx.cfg.constants()?, ctx.cfg.regime()?)?;
    ctx.emit
        .json("conditions.json", &serde_json::to_value(&rep)?)?;
    Ok((RunStatus::Ok, rep.to_string()))
}

fn run_simulate(ctx: &mut Ctx) -> Result<(RunStatus, String)> {
    let params = ctx.params()?;
    let cfg = offset_config(ctx);
    let u0 = cfg
        .initial_state()?
        .unwrap_or_else(|| SpectralVelocity::zeros(*params.grid()));
    let s = &cfg.solver;
    let traj = simulate(
        &u0,
        &params,
        s.t_final,
        s.h,
        cfg.output.snapshot_every,
        cfg.solver_options(),
    )?;
    let mut csv = Vec::new();
    traj.write_csv(&params, &mut csv)?;
    ctx.emit.csv("trajectory.csv", csv)?;
    let records = traj.records(&params);
    let max_res = records
        .iter()
        .map(|r| r.energy_residual.abs())
        .fold(0.0, f64::max);
    ctx.emit.json(
        "trajectory.json",
        &json!({ "h": s.h, "t_final": s.t_final, "max_energy_residual": max_res, "records": records }),
    )?;
    if cfg.output.snapshot_every > 0 {
        for (t, u) in &traj.samples {
            let tick = (t / s.h).round() as i64;
            ctx.emit.field(&format!("snap_{tick:08}.cbff"), u)?;
        }
    }
    let last = traj.final_state();
    ctx.emit.field("final.cbff", last)?;
    Ok((
        RunStatus::Ok,
        format!(
            "simulated t in [0, {}]: final |u|_H = {}, max energy residual = {max_res}",
            s.t_final,
            h_norm(last)
        ),
    ))
}

/// Runs the singleton search and writes its log; shared by `sweep`.
fn singleton_artifacts(ctx: &mut Ctx, params: &PhysicsParams) -> Result<(SingletonResult, String)> {
    let cfg = offset_config(ctx);
    let res = find_singleton(params, &cfg.singleton_options())?;
    let mut csv = b"t,max_distance,drift\n".to_vec();
    for e in &res.log {
        csv.extend(format!("{},{},{}\n", e.t, e.max_distance, e.drift).bytes());
    }
    ctx.emit.csv("singleton_log.csv", csv)?;
    let residual = res.steady_residual(params)?;
    let slope = res.tail_slope().ok();
    let varrho = check_singleton_condition(params, &cfg.constants()?, cfg.regime()?)
        .ok()
        .map(|r| r.varrho);
    let t_final = res.log.last().map(|e| e.t).unwrap_or(0.0);
    ctx.emit.json(
        "singleton.json",
        &json!({
            "converged": res.converged,
            "t_final": t_final,
            "tail_slope": slope,
            "slope_bound": varrho.map(|v| -v / 2.0),
            "steady_residual": residual,
            "probe_seeds": res.probe_seeds,
            "log": res.log,
        }),
    )?;
    if res.converged {
        ctx.emit.field("a_star.cbff", &res.a_star)?;
    }
    let summary = format!(
        "singleton converged: {} at t = {t_final}, tail slope {}, steady residual {residual}",
        res.converged,
        slope.map_or("n/a".into(), |s| s.to_string())
    );
    Ok((res, summary))
}

fn run_singleton(ctx: &mut Ctx) -> Result<(RunStatus, String)> {
    let params = ctx.params()?;
    let (res, summary) = singleton_artifacts(ctx, &params)?;
    let status = if res.converged {
        RunStatus::Ok
    } else {
        RunStatus::NotConverged
    };
    Ok((status, summary))
}

fn pullback_options(cfg: &RunConfig, doubling: bool) -> Result<PullbackOptions> {
    Ok(PullbackOptions {
        solver: cfg.solver_options(),
        initial: cfg.initial_state()?,
        doubling_tol: doubling.then_some(cfg.solver.pullback_tol),
    })
}

fn run_pullback(ctx: &mut Ctx) -> Result<(RunStatus, String)> {
    let params = ctx.params()?;
    let cfg = offset_config(ctx);
    let opts = pullback_options(&cfg, true)?;
    let (t_pull, h, eps) = (cfg.solver.t_pull, cfg.solver.h, cfg.noise.epsilon);
    let samples = ctx
        .noise_seeds()
        .par_iter()
        .map(|&seed| {
            let noise = cfg.noise_config(ctx.base, eps, seed)?;
            pullback_sample(&params, &noise, t_pull, h, &opts)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut csv = b"seed,epsilon,mode,z0,v_h,u_h,doubling_change,converged\n".to_vec();
    let mut rows = Vec::new();
    for s in &samples {
        let (v_h, u_h) = (h_norm(&s.state), h_norm(&s.reconstructed));
        let change = s.doubling_change.map_or(String::new(), |c| c.to_string());
        csv.extend(
            format!(
                "{},{},{},{},{v_h},{u_h},{change},{}\n",
                s.seed, s.epsilon, s.mode, s.z0, s.converged
            )
            .bytes(),
        );
        rows.push(json!({
            "seed": s.seed, "z0": s.z0, "v_h": v_h, "u_h": u_h,
            "doubling_change": s.doubling_change, "converged": s.converged,
        }));
        let stem = format!("sample_{}", s.seed);
        ctx.emit.field(&format!("{stem}.cbff"), &s.state)?;
        ctx.emit
            .json(&format!("{stem}.json"), &serde_json::to_value(s.sidecar())?)?;
    }
    ctx.emit.csv("pullback.csv", csv)?;
    ctx.emit.json(
        "pullback.json",
        &json!({ "mode": cfg.noise.mode, "epsilon": eps, "t_pull": t_pull, "h": h, "samples": rows }),
    )?;
    let all = samples.iter().all(|s| s.converged);
    let summary = format!(
        "{} pullback samples at epsilon = {eps}, t_pull = {t_pull}: doubling test {}",
        samples.len(),
        if all { "passed" } else { "FAILED" }
    );
    Ok((
        if all {
            RunStatus::Ok
        } else {
            RunStatus::NotConverged
        },
        summary,
    ))
}

fn run_sweep(ctx: &mut Ctx) -> Result<(RunStatus, String)> {
    let params = ctx.params()?;
    let (single, single_summary) = singleton_artifacts(ctx, &params)?;
    if !single.converged {
        return Ok((
            RunStatus::NotConverged,
            format!("{single_summary}\nsweep skipped"),
        ));
    }
    let cfg = offset_config(ctx);
    let plan = SweepPlan {
        eps_grid: cfg.noise.eps_grid.clone(),
        seeds: ctx.noise_seeds(),
        t_pull: cfg.solver.t_pull,
        h: cfg.solver.h,
        doubling_tol: cfg.solver.pullback_tol,
        options: pullback_options(&cfg, false)?,
    };
    // The path seed is replaced per job; 0 is a placeholder.
    let noise = cfg.noise_config(ctx.base, plan.eps_grid[0], 0)?;
    let records = sweep_records(&params, &noise, &single.a_star, &plan)?;
    let mut csv = Vec::new();
    write_sweep_csv(&records, &mut csv)?;
    ctx.emit.csv("sweep.csv", csv)?;
    ctx.emit
        .json("sweep.json", &serde_json::to_value(&records)?)?;
    let fit = fit_rate(&records, delta_theory(noise.mode, params.r))?;
    let mut v = serde_json::to_value(&fit)?;
    v["inversions"] = json!(fit.inversions());
    v["mode"] = json!(noise.mode);
    v["r"] = json!(params.r);
    ctx.emit.json("fit.json", &v)?;
    let summary = format!(
        "{single_summary}\n{} records, fitted slope {} (theory {}), {} inversions",
        records.len(),
        fit.slope,
        fit.delta_theory.map_or("n/a".into(), |d| d.to_string()),
        fit.inversions()
    );
    Ok((RunStatus::Ok, summary))
}

fn run_ou(ctx: &mut Ctx) -> Result<(RunStatus, String)> {
    let seed = ctx.noise_seeds()[0];
    let d = ou_diagnostics(&ctx.cfg.diagnostics_config(seed))?;
    let mut csv = b"order,mean,stderr,expected,z_score\n".to_vec();
    for m in [&d.first_moment, &d.second_moment] {
        csv.extend(
            format!(
                "{},{},{},{},{}\n",
                m.order,
                m.mean,
                m.stderr,
                m.expected,
                m.z_score()
            )
            .bytes(),
        );
    }
    ctx.emit.csv("ou_moments.csv", csv)?;
    let v = serde_json::to_value(&d)?;
    ctx.emit.json("ou_diagnostics.json", &v)?;
    Ok((RunStatus::Ok, report::summarize("ou_diagnostics.json", &v)?))
}

/// Summarizes the result JSON in `dir`; SVG plots are re-rendered when the
/// `svg` format is selected.
pub fn run_report(dir: &Path, formats: &[String]) -> Result<RunOutcome> {
    let summary = report::summarize_dir(dir)?;
    let mut artifacts = Vec::new();
    let path = dir.join("report.txt");
    std::fs::write(&path, &summary)?;
    artifacts.push(path);
    if formats.iter().any(|f| f == "svg") {
        for name in report::RESULT_FILES {
            let p = dir.join(name);
            if !p.exists() {
                continue;
            }
            let v: Value = serde_json::from_str(&std::fs::read_to_string(&p)?)?;
            for (svg_name, svg) in report::plots(name, &v)? {
                let out = dir.join(svg_name);
                std::fs::write(&out, svg)?;
                artifacts.push(out);
            }
        }
    }
    Ok(RunOutcome {
        status: RunStatus::Ok,
        summary,
        out_dir: dir.to_path_buf(),
        artifacts,
    })
}
