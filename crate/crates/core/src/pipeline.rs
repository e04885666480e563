//! End-to-end experiment runs: simulate, analyze, summarize, write files.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::analysis::{verify_convergence, verify_monotone_eps_star, ConvergenceVerdict, MonotoneVerdict};
use crate::config::{bundled, parse_config, ConfigError, SimConfig};
use crate::export::{export_csv, export_svg, ExportError};
use crate::simulator::{select_frame, simulate, SimError, Trace};
use crate::transform::{InitialConditionClass, TransformError};

/// Tolerance on the minimum-scalar monotonicity check.
pub const MONOTONE_TOL: f64 = 1e-9;
/// Disagreement threshold for a converged run.
pub const CONVERGENCE_TOL: f64 = 1e-3;
pub const DEFAULT_OUT_DIR: &str = "out";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Transform(TransformError),
    #[error("{0}")]
    Integration(SimError),
    #[error("{0}")]
    Export(ExportError),
}

impl From<SimError> for RunError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(c) => Self::Config(c),
            SimError::Transform(t) => Self::Transform(t),
            other => Self::Integration(other),
        }
    }
}

impl From<ExportError> for RunError {
    fn from(e: ExportError) -> Self {
        match e {
            ExportError::Io { path, source } => Self::Io { path, source },
            other => Self::Export(other),
        }
    }
}

impl RunError {
    /// Short machine-readable tag for the error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Config(_) => "validation",
            Self::Io { .. } => "io",
            Self::Transform(TransformError::Postcondition { .. }) => "integration",
            Self::Transform(_) => "validation",
            Self::Integration(_) | Self::Export(_) => "integration",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "integration" => 2,
            _ => 1,
        }
    }
}

/// Connectivity and initial-condition facts, computed without simulating.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub strong: bool,
    pub quasi_strong: bool,
    /// 1-based.
    pub roots: Vec<usize>,
    pub class: Option<InitialConditionClass>,
    pub v: [f64; 4],
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "case: {}", self.name)?;
        writeln!(f, "strongly connected: {}", self.strong)?;
        writeln!(f, "quasi-strongly connected: {}", self.quasi_strong)?;
        writeln!(f, "roots: {}", fmt_set(&self.roots))?;
        match self.class {
            Some(c) => writeln!(f, "initial condition class: {c}")?,
            None => writeln!(f, "initial condition class: n/a")?,
        }
        writeln!(f, "transform v: {}", fmt_quat(&self.v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub check: CheckReport,
    pub final_disagreement: f64,
    /// Final minimum scalar part over all agents in the analysis frame.
    pub c1_estimate: f64,
    pub monotone: MonotoneVerdict,
    pub convergence: ConvergenceVerdict,
    pub samples: usize,
    pub wall_time: Duration,
}

impl RunSummary {
    pub fn from_trace(check: CheckReport, trace: &Trace, wall_time: Duration) -> Self {
        let all: Vec<usize> = (0..trace.final_state().len()).collect();
        let window = (trace.samples.len() / 10).max(2);
        let convergence = verify_convergence(trace, CONVERGENCE_TOL, window);
        Self {
            check,
            final_disagreement: convergence.final_disagreement,
            c1_estimate: convergence.c1_estimate,
            monotone: verify_monotone_eps_star(trace, &all, MONOTONE_TOL),
            convergence,
            samples: trace.samples.len(),
            wall_time,
        }
    }
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.check)?;
        writeln!(f, "samples: {}", self.samples)?;
        writeln!(f, "final disagreement: {:.6e}", self.final_disagreement)?;
        writeln!(f, "final eps* (C1 estimate): {:.6e}", self.c1_estimate)?;
        match self.monotone {
            MonotoneVerdict::Pass => writeln!(f, "eps* monotone: pass")?,
            MonotoneVerdict::Fail { sample, t, delta } => {
                writeln!(f, "eps* monotone: fail at sample {sample} (t={t}, drop {delta:.3e})")?
            }
        }
        match &self.convergence.reason {
            None => writeln!(f, "convergence: pass")?,
            Some(r) => writeln!(f, "convergence: fail ({r})")?,
        }
        writeln!(f, "wall time: {:.3} s", self.wall_time.as_secs_f64())
    }
}

fn fmt_set(v: &[usize]) -> String {
    let items: Vec<String> = v.iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

fn fmt_quat(a: &[f64; 4]) -> String {
    format!("({:.6}, {:.6}, {:.6}, {:.6})", a[0], a[1], a[2], a[3])
}

/// Connectivity and classification only.
pub fn check(config: &SimConfig) -> Result<CheckReport, RunError> {
    config.validate()?;
    let g = config.graph()?;
    let initial = config.initial_attitudes()?;
    let ra = g.root_analysis();
    let (v, transform) = select_frame(config.transform_mode, &initial, &ra).map_err(RunError::Transform)?;
    Ok(CheckReport {
        name: config.name.clone(),
        strong: g.is_strongly_connected(),
        quasi_strong: !ra.roots.is_empty(),
        roots: ra.roots.iter().map(|r| r + 1).collect(),
        class: transform.map(|t| t.cls),
        v: v.to_array(),
    })
}

pub struct RunOutput {
    pub trace: Trace,
    pub summary: RunSummary,
    pub files: Vec<PathBuf>,
}

/// Output directory: explicit override, then the config's `path`, then `out`.
pub fn output_dir(config: &SimConfig, override_dir: Option<&Path>) -> PathBuf {
    override_dir
        .map(Path::to_path_buf)
        .or_else(|| config.output_path.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Simulates without touching the filesystem.
pub fn execute(config: &SimConfig) -> Result<(Trace, RunSummary), RunError> {
    let report = check(config)?;
    let start = Instant::now();
    let trace = simulate(config)?;
    let summary = RunSummary::from_trace(report, &trace, start.elapsed());
    Ok((trace, summary))
}

/// Runs a config and writes `<name>.trace.csv`, `<name>.metrics.csv`,
/// `<name>.summary.txt` and, when enabled, SVG charts into `out_dir`.
pub fn run(config: &SimConfig, out_dir: &Path, svg: bool) -> Result<RunOutput, RunError> {
    let (trace, summary) = execute(config)?;
    let mut files = export_csv(&trace, out_dir, &config.name)?;
    let summary_path = out_dir.join(format!("{}.summary.txt", config.name));
    fs::write(&summary_path, summary.to_string()).map_err(|source| RunError::Io {
        path: summary_path.clone(),
        source,
    })?;
    files.push(summary_path);
    if svg || config.emit_svg {
        files.extend(export_svg(&trace, out_dir, &config.name)?);
    }
    Ok(RunOutput { trace, summary, files })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenCheck {
    pub case: &'static str,
    pub criterion: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for GoldenCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {} ({})", self.case, self.criterion, self.detail)
    }
}

fn push(out: &mut Vec<GoldenCheck>, case: &'static str, criterion: &str, passed: bool, detail: String) {
    out.push(GoldenCheck {
        case,
        criterion: criterion.to_string(),
        passed,
        detail,
    });
}

/// Largest gap between a non-root final attitude and any root final attitude.
pub fn non_root_gap(trace: &Trace) -> f64 {
    let fin = &trace.final_state().attitudes;
    let mut worst: f64 = 0.0;
    for &i in &trace.root_analysis.non_roots {
        for &r in &trace.root_analysis.roots {
            let (a, b) = (fin[i].to_array(), fin[r].to_array());
            let dq = ((a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2) + (a[3] - b[3]).powi(2)).sqrt();
            worst = worst.max((a[0] - b[0]).abs() + dq);
        }
    }
    worst
}

fn judge(case: &'static str, out: &mut Vec<GoldenCheck>, res: &Result<RunOutput, RunError>) {
    let o = match res {
        Ok(o) => o,
        Err(e) => {
            push(out, case, "run completes", false, e.to_string());
            return;
        }
    };
    let s = &o.summary;
    let c = &s.check;
    let roots = fmt_set(&c.roots);
    match case {
        "case1" => {
            push(out, case, "strongly connected", c.strong, format!("roots {roots}"));
            push(
                out,
                case,
                "final disagreement < 1e-3",
                s.final_disagreement < CONVERGENCE_TOL,
                format!("{:.3e}", s.final_disagreement),
            );
            push(out, case, "eps* non-decreasing", s.monotone.passed(), format!("{:?}", s.monotone));
            push(out, case, "final eps* > 0", s.c1_estimate > 0.0, format!("{:.6}", s.c1_estimate));
        }
        "case2" => {
            push(out, case, "not strongly connected", !c.strong, format!("strong={}", c.strong));
            push(out, case, "roots = {2,3,4}", c.roots == [2, 3, 4], roots);
            let sub_strong = o
                .trace
                .root_analysis
                .root_subgraph
                .as_ref()
                .is_some_and(|g| g.is_strongly_connected());
            push(out, case, "root subgraph strongly connected", sub_strong, String::new());
            push(
                out,
                case,
                "final disagreement < 1e-3",
                s.final_disagreement < CONVERGENCE_TOL,
                format!("{:.3e}", s.final_disagreement),
            );
            let gap = non_root_gap(&o.trace);
            push(out, case, "non-roots within 1e-3 of roots", gap < CONVERGENCE_TOL, format!("{gap:.3e}"));
        }
        _ => {
            push(out, case, "not quasi-strongly connected", !c.quasi_strong, format!("roots {roots}"));
            push(
                out,
                case,
                "final disagreement > 0.1",
                s.final_disagreement > 0.1,
                format!("{:.3e}", s.final_disagreement),
            );
            push(
                out,
                case,
                "convergence verdict fails",
                !s.convergence.passed,
                s.convergence.reason.clone().unwrap_or_default(),
            );
        }
    }
}

/// Runs the bundled cases concurrently, writing each case's files into
/// `out_dir`, and returns one line per checked property.
pub fn goldens(out_dir: &Path, svg: bool) -> Result<Vec<GoldenCheck>, RunError> {
    let configs = bundled()
        .into_iter()
        .map(|(name, text)| Ok((name, parse_config(text)?)))
        .collect::<Result<Vec<_>, ConfigError>>()?;
    let results: Vec<(&'static str, Result<RunOutput, RunError>)> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|(name, cfg)| (*name, s.spawn(move || run(cfg, out_dir, svg))))
            .collect();
        handles
            .into_iter()
            .map(|(name, h)| (name, h.join().expect("golden case panicked")))
            .collect()
    });
    let mut out = Vec::new();
    for (name, res) in &results {
        judge(name, &mut out, res);
    }
    Ok(out)
}
