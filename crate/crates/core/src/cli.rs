//! Command implementations behind the `boussinesq` binary.
//!
//! Each command writes its artifacts plus one `manifest.json` into its
//! output directory and reports whether the run succeeded. Exit statuses:
//! 0 success, 2 configuration error, 3 numerical failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;

use crate::collocation::{newton_solve, CosineExpansion};
use crate::config::{NonlinearityConfig, RunConfig};
use crate::error::{Error, Result};
use crate::io::{load_profile, profile_csv, state_csv, write_json, write_text};
use crate::petviashvili;
use crate::profile::WaveProfile;
use crate::propagator::{propagate, verify_translation, TranslationError};
use crate::report::{SolveReport, Termination};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutcome {
    pub success: bool,
    pub out_dir: PathBuf,
    pub message: String,
}

pub fn exit_code(result: &Result<CommandOutcome>) -> u8 {
    match result {
        Ok(o) if o.success => 0,
        Ok(_) => 3,
        Err(e) => e.exit_code(),
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub command: &'a str,
    pub version: &'static str,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub config_path: Option<String>,
    pub config: &'a RunConfig,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub summary: serde_json::Value,
}

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Solve report without the per-iteration history, which goes to CSV.
#[derive(Debug, Serialize)]
struct SolveSummary<'a> {
    termination: Termination,
    converged: bool,
    iterations: usize,
    sign_degenerate: bool,
    warnings: &'a [String],
    final_residual_inf: Option<f64>,
    relative_residual_inf: Option<f64>,
}

impl<'a> SolveSummary<'a> {
    fn new(r: &'a SolveReport) -> Self {
        Self {
            termination: r.termination,
            converged: r.converged,
            iterations: r.iterations,
            sign_degenerate: r.sign_degenerate,
            warnings: &r.warnings,
            final_residual_inf: r.final_report.as_ref().map(|f| f.residual_inf),
            relative_residual_inf: r.final_report.as_ref().map(|f| f.relative_residual_inf()),
        }
    }
}

struct Artifacts<'a> {
    dir: &'a Path,
    written: Vec<String>,
}

impl<'a> Artifacts<'a> {
    fn new(dir: &'a Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir,
            written: Vec::new(),
        })
    }

    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        write_text(&self.dir.join(name), text)?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        write_json(&self.dir.join(name), value)?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn manifest(
        self,
        command: &str,
        started: f64,
        config_path: Option<&Path>,
        cfg: &RunConfig,
        inputs: Vec<String>,
        summary: serde_json::Value,
    ) -> Result<()> {
        let m = RunManifest {
            command,
            version: VERSION,
            started_unix: started,
            finished_unix: now(),
            config_path: config_path.map(|p| p.display().to_string()),
            config: cfg,
            inputs,
            outputs: self.written,
            summary,
        };
        write_json(&self.dir.join("manifest.json"), &m)
    }
}

/// Stabilized fixed-point solve of the configured problem.
pub fn run_homogeneous(cfg: &RunConfig) -> Result<(WaveProfile, SolveReport)> {
    if cfg.nonlinearity.p().is_none() {
        return Err(Error::Config(
            "solve-homogeneous needs nonlinearity kind = \"homogeneous_power\"".into(),
        ));
    }
    let params = cfg.params()?;
    petviashvili::solve(
        &cfg.initial_profile()?,
        &params,
        &cfg.build_nonlinearity()?,
        &cfg.solver,
    )
}

/// Collocation Newton solve of the configured problem.
pub fn run_nonhomogeneous(cfg: &RunConfig) -> Result<(CosineExpansion, SolveReport)> {
    let params = cfg.params()?;
    newton_solve(
        &cfg.initial_expansion()?,
        &params,
        &cfg.build_nonlinearity()?,
        &cfg.newton,
    )
}

fn write_solve_outputs(art: &mut Artifacts, profile: &WaveProfile, report: &SolveReport) -> Result<()> {
    art.text("profile.csv", &profile_csv(profile))?;
    if let Some(f) = &report.final_report {
        art.json("functionals.json", f)?;
    }
    art.text("history.csv", &report.history_csv())
}

fn outcome(report: &SolveReport, out: &Path) -> CommandOutcome {
    let mut message = format!("{:?} after {} iterations", report.termination, report.iterations);
    if let Some(f) = &report.final_report {
        let _ = write!(message, ", relative residual {:.3e}", f.relative_residual_inf());
    }
    CommandOutcome {
        success: report.termination == Termination::Converged,
        out_dir: out.to_path_buf(),
        message,
    }
}

fn homogeneous_into(cfg: &RunConfig, config_path: Option<&Path>, out: &Path) -> Result<SolveReport> {
    let started = now();
    let (profile, report) = run_homogeneous(cfg)?;
    let mut art = Artifacts::new(out)?;
    write_solve_outputs(&mut art, &profile, &report)?;
    let summary = serde_json::to_value(SolveSummary::new(&report))?;
    art.manifest("solve-homogeneous", started, config_path, cfg, vec![], summary)?;
    Ok(report)
}

fn nonhomogeneous_into(cfg: &RunConfig, config_path: Option<&Path>, out: &Path) -> Result<SolveReport> {
    let started = now();
    let (expansion, report) = run_nonhomogeneous(cfg)?;
    let mut art = Artifacts::new(out)?;
    art.json("coefficients.json", &expansion)?;
    write_solve_outputs(&mut art, &expansion.to_profile(), &report)?;
    let summary = serde_json::to_value(SolveSummary::new(&report))?;
    art.manifest("solve-nonhomogeneous", started, config_path, cfg, vec![], summary)?;
    Ok(report)
}

pub fn cmd_solve_homogeneous(cfg: &RunConfig, config_path: Option<&Path>, out: &Path) -> Result<CommandOutcome> {
    Ok(outcome(&homogeneous_into(cfg, config_path, out)?, out))
}

pub fn cmd_solve_nonhomogeneous(cfg: &RunConfig, config_path: Option<&Path>, out: &Path) -> Result<CommandOutcome> {
    Ok(outcome(&nonhomogeneous_into(cfg, config_path, out)?, out))
}

#[derive(Debug, Serialize)]
struct SnapshotEntry {
    step: usize,
    time: f64,
    file: String,
}

#[derive(Debug, Serialize)]
struct PropagationErrors {
    t: f64,
    omega: f64,
    #[serde(flatten)]
    errors: TranslationError,
}

/// Propagates a stored steady profile and compares the end state with the
/// initial profile translated by `omega * t_final`.
pub fn cmd_propagate(
    cfg: &RunConfig,
    config_path: Option<&Path>,
    profile_path: &Path,
    out: &Path,
) -> Result<CommandOutcome> {
    let started = now();
    let params = cfg.params()?;
    let initial = load_profile(profile_path, &cfg.grid()?)?;
    let run = propagate(&initial, &params, &cfg.build_nonlinearity()?, &cfg.propagation)?;
    let t = cfg.propagation.t_final;
    let errors = verify_translation(&run.final_state, &initial, params.omega, t)?;

    let mut art = Artifacts::new(out)?;
    let mut index = Vec::with_capacity(run.snapshots.len());
    for s in &run.snapshots {
        let file = format!("snapshot_{:07}.csv", s.step);
        art.text(&file, &state_csv(&s.state))?;
        index.push(SnapshotEntry {
            step: s.step,
            time: s.time,
            file,
        });
    }
    art.json("snapshots.json", &index)?;
    let mut diag = String::from("step,time,u_max,eta_max\n");
    for d in &run.diagnostics {
        let _ = writeln!(diag, "{},{:.16e},{:.16e},{:.16e}", d.step, d.time, d.u_max, d.eta_max);
    }
    art.text("diagnostics.csv", &diag)?;
    let table = PropagationErrors {
        t,
        omega: params.omega,
        errors,
    };
    art.json("errors.json", &table)?;
    let summary = serde_json::to_value(&table)?;
    art.manifest(
        "propagate",
        started,
        config_path,
        cfg,
        vec![profile_path.display().to_string()],
        summary,
    )?;
    Ok(CommandOutcome {
        success: true,
        out_dir: out.to_path_buf(),
        message: format!(
            "t = {t}: relative L2 error u {:.3e}, eta {:.3e}",
            errors.err_l2_u, errors.err_l2_eta
        ),
    })
}

/// One row of the sweep summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub omega: f64,
    pub p: Option<u32>,
    pub in_regime: bool,
    pub converged: bool,
    pub iterations: Option<usize>,
    pub residual: Option<f64>,
    pub i_omega: Option<f64>,
    pub j_omega: Option<f64>,
    pub i2: Option<f64>,
    pub error: Option<String>,
}

pub fn sweep_summary_csv(rows: &[SweepRow]) -> String {
    let num = |x: Option<f64>| x.map(|v| format!("{v:.16e}")).unwrap_or_default();
    let mut out = String::from("omega,p,in_regime,converged,iterations,residual,I_omega,J_omega,I2\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.omega,
            r.p.map(|p| p.to_string()).unwrap_or_default(),
            r.in_regime,
            r.converged,
            r.iterations.map(|i| i.to_string()).unwrap_or_default(),
            num(r.residual),
            num(r.i_omega),
            num(r.j_omega),
            num(r.i2),
        );
    }
    out
}

fn point_dir(omega: f64, p: Option<u32>) -> String {
    match p {
        Some(p) => format!("omega_{omega}_p{p}"),
        None => format!("omega_{omega}"),
    }
}

fn run_point(point: &RunConfig, dir: &Path) -> SweepRow {
    let params = point.params();
    let mut row = SweepRow {
        omega: point.omega,
        p: point.nonlinearity.p(),
        in_regime: params.as_ref().is_ok_and(|p| p.velocity_in_regime()),
        converged: false,
        iterations: None,
        residual: None,
        i_omega: None,
        j_omega: None,
        i2: None,
        error: None,
    };
    let solved = match point.nonlinearity {
        NonlinearityConfig::HomogeneousPower { .. } => homogeneous_into(point, None, dir),
        NonlinearityConfig::QuarticVariational => nonhomogeneous_into(point, None, dir),
    };
    match solved {
        Ok(report) => {
            row.converged = report.converged;
            row.iterations = Some(report.iterations);
            if let Some(f) = &report.final_report {
                row.residual = Some(f.residual_inf);
                row.i_omega = Some(f.i_omega);
                row.j_omega = Some(f.j_omega);
                row.i2 = Some(f.i2);
            }
        }
        Err(e) => {
            log::warn!("sweep point omega = {}: {e}", point.omega);
            row.error = Some(e.to_string());
        }
    }
    row
}

/// Solves every `(omega, p)` point of the configured sweep, up to `workers`
/// at a time, each into its own subdirectory.
pub fn cmd_sweep(cfg: &RunConfig, config_path: Option<&Path>, out: &Path, workers: usize) -> Result<CommandOutcome> {
    let started = now();
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep needs a [sweep] table".into()))?;
    let omegas = sweep.omega_values()?;
    let ps: Vec<Option<u32>> = match cfg.nonlinearity {
        NonlinearityConfig::HomogeneousPower { p } if sweep.ps.is_empty() => vec![Some(p)],
        NonlinearityConfig::HomogeneousPower { .. } => sweep.ps.iter().map(|&p| Some(p)).collect(),
        NonlinearityConfig::QuarticVariational if sweep.ps.is_empty() => vec![None],
        NonlinearityConfig::QuarticVariational => {
            return Err(Error::Config("sweep `ps` only applies to homogeneous_power".into()))
        }
    };
    let points: Vec<RunConfig> = ps
        .iter()
        .flat_map(|&p| omegas.iter().map(move |&w| (w, p)))
        .map(|(w, p)| cfg.with_point(w, p))
        .collect();
    for p in &points {
        p.validate()?;
    }
    let mut art = Artifacts::new(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        points
            .par_iter()
            .map(|point| {
                let dir = out.join(point_dir(point.omega, point.nonlinearity.p()));
                run_point(point, &dir)
            })
            .collect()
    });
    art.text("summary.csv", &sweep_summary_csv(&rows))?;
    let converged = rows.iter().filter(|r| r.converged).count();
    let summary = serde_json::json!({
        "points": rows.len(),
        "converged": converged,
        "rows": &rows,
    });
    art.manifest("sweep", started, config_path, cfg, vec![], summary)?;
    Ok(CommandOutcome {
        success: true,
        out_dir: out.to_path_buf(),
        message: format!("{converged} of {} points converged", rows.len()),
    })
}
