//! Subcommand implementations: load the experiment, run the pipeline and
//! write the artifacts.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use branching_stable::io::{read_runs, write_cloud, write_columns, write_runs, write_tabulated, Metadata};
use branching_stable::{phi0_of, theoretical_tail, RunBatch, StableParams64};
use serde::Serialize;

use crate::config::{preset, Experiment, ExperimentConfig, PRESETS};
use crate::error::CliError;
use crate::pipeline::{self, TOOL_VERSION};

/// Where the configuration comes from, and the overrides applied to it.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Source {
    /// TOML experiment file.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in experiment: critical, subcritical, tauberian, cubic, root-only.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub cloud_size: Option<usize>,
    #[arg(long)]
    pub n_steps: Option<usize>,
    #[arg(long)]
    pub max_particles: Option<u64>,
}

impl Source {
    pub fn experiment(&self) -> Result<Experiment, CliError> {
        let mut config = match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(name)) => preset(name).ok_or_else(|| {
                CliError::Invalid(format!("unknown preset `{name}` (known: {})", PRESETS.join(", ")))
            })?,
            (None, None) => return Err(CliError::Invalid("either --config or --preset is required".into())),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.output_dir = out.clone();
        }
        if let Some(n) = self.replications {
            config.sampling.replications = n;
        }
        if let Some(n) = self.cloud_size {
            config.sampling.cloud_size = n;
        }
        if let Some(n) = self.n_steps {
            config.sampling.n_steps = n;
        }
        if let Some(n) = self.max_particles {
            config.caps.max_particles = n;
        }
        config.resolve()
    }
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
    Ok((path, BufWriter::new(file)))
}

fn write_with(
    dir: &Path,
    name: &str,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<PathBuf, CliError> {
    let (path, mut w) = create(dir, name)?;
    body(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<PathBuf, CliError> {
    let text = serde_json::to_string_pretty(value).expect("reports are serializable");
    write_with(dir, name, |w| writeln!(w, "{text}"))
}

fn base_metadata(exp: &Experiment) -> Metadata {
    Metadata::new()
        .with("tool", "bstable")
        .with("version", TOOL_VERSION)
        .with("config_hash", &exp.hash)
        .with("seed", exp.config.seed)
}

fn law_string(exp: &Experiment) -> String {
    let probs: Vec<String> = exp.law.probs().iter().map(|p| p.to_string()).collect();
    probs.join(";")
}

pub const RUNS_FILE: &str = "runs.csv";

fn write_batch(exp: &Experiment, batch: &RunBatch<f64>) -> Result<PathBuf, CliError> {
    let c = &exp.config;
    let meta = base_metadata(exp)
        .with("simulation_hash", c.simulation_hash())
        .with("alpha", c.stable.alpha)
        .with("beta", c.stable.beta)
        .with("law", law_string(exp))
        .with("max_particles", c.caps.max_particles)
        .with("max_time", c.caps.max_time)
        .with("n_steps", c.sampling.n_steps)
        .with("replications", c.sampling.replications);
    write_with(&c.output_dir, RUNS_FILE, |w| write_runs(w, &batch.runs, &meta))
}

/// Runs from an earlier `simulate` with the same simulation settings, if any.
fn load_batch(exp: &Experiment) -> Result<Option<RunBatch<f64>>, CliError> {
    let path = exp.config.output_dir.join(RUNS_FILE);
    let file = match File::open(&path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(CliError::io(&path, e)),
    };
    let (meta, runs) = read_runs(BufReader::new(file)).map_err(|e| CliError::io(&path, e))?;
    if meta.get("simulation_hash") != Some(exp.config.simulation_hash().as_str()) {
        return Ok(None);
    }
    Ok(Some(RunBatch { runs }))
}

pub fn constants(alpha: f64, beta: f64) -> Result<String, CliError> {
    let p = StableParams64::new(alpha, beta).map_err(|e| CliError::Invalid(e.to_string()))?;
    let mut notes = Vec::new();
    if p.is_cauchy() {
        notes.push("symmetric Cauchy: the only strictly stable law at alpha = 1");
    }
    if p.is_subordinator() {
        notes.push("subordinator: paths are non-decreasing");
    }
    if alpha > 1.0 {
        notes.push("finite mean, equal to zero");
    }
    if beta == 0.0 {
        notes.push("symmetric");
    }
    let mut out = format!(
        "alpha  {alpha}\nbeta   {beta}\nc      {:.10}\nkappa  {:.10}\n",
        p.c(),
        p.kappa()
    );
    for n in notes {
        out.push_str(&format!("note   {n}\n"));
    }
    Ok(out)
}

pub fn simulate(exp: &Experiment) -> Result<String, CliError> {
    let batch = pipeline::simulate(exp);
    let runs = write_batch(exp, &batch)?;
    let summary = pipeline::summarize_runs(exp, &batch)?;
    let summary_path = write_json(&exp.config.output_dir, "simulate_summary.json", &summary)?;
    let mut out = format!(
        "{} runs, truncated {:.3e}, extinct {:.6}\n",
        summary.replications, summary.truncated_fraction, summary.extinct_fraction
    );
    if let Some(f) = &summary.tail_fit {
        out.push_str(&format!(
            "tail slope {:.4} (target {:.4}), constant {:.4} (target {:.4})\n",
            f.slope, -summary.target.exponent, f.constant, summary.target.constant
        ));
    }
    out.push_str(&format!("wrote {} and {}\n", runs.display(), summary_path.display()));
    Ok(out)
}

pub fn solve(exp: &Experiment, save_cloud: bool) -> Result<String, CliError> {
    let cloud = pipeline::cloud(exp)?;
    let dir = &exp.config.output_dir;
    if save_cloud {
        write_with(dir, "cloud.csv", |w| write_cloud(w, &cloud, &base_metadata(exp)))?;
    }
    let sol = pipeline::solve(exp, &cloud)?;
    let residual = pipeline::residual(exp, &cloud, &sol)?;
    let summary = pipeline::summarize_solution(exp, &cloud, &sol, &residual);
    let meta = base_metadata(exp)
        .with("law", law_string(exp))
        .with("cloud_seed", cloud.seed())
        .with("cloud_size", cloud.len())
        .with("n_steps", cloud.n_steps())
        .with("tol", exp.config.solver.tol)
        .with("iterations", sol.iterations)
        .with("sandwich_gap", sol.gap);
    write_with(dir, "u.csv", |w| write_tabulated(w, &sol.u, &meta, ("x", "u")))?;
    let phi0 = phi0_of(&sol.u, &exp.law);
    write_with(dir, "phi0.csv", |w| write_tabulated(w, &phi0, &meta, ("x", "phi0")))?;
    write_with(dir, "residual.csv", |w| {
        write_columns(
            w,
            &meta,
            &["x", "residual", "bound"],
            &[sol.u.xs(), residual.lhs_minus_rhs.ys(), residual.upper_bound.ys()],
        )
    })?;
    write_json(dir, "solve_summary.json", &summary)?;
    Ok(format!(
        "converged in {} iterations (sandwich gap {:.3e}); residual {}\nwrote u.csv, phi0.csv, residual.csv, solve_summary.json to {}\n",
        sol.iterations,
        sol.gap,
        if residual.holds() { "within bounds" } else { "OUT OF BOUNDS" },
        dir.display()
    ))
}

/// Writes the verification report; the error variant carries the failure.
pub fn verify(exp: &Experiment, require_artifacts: bool) -> Result<String, CliError> {
    let batch = match load_batch(exp)? {
        Some(b) => b,
        None if require_artifacts => {
            let path = exp.config.output_dir.join(RUNS_FILE);
            return Err(CliError::io(
                &path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "no runs for this configuration"),
            ));
        }
        None => {
            let b = pipeline::simulate(exp);
            write_batch(exp, &b)?;
            b
        }
    };
    let cloud = pipeline::cloud(exp)?;
    let solution = pipeline::solve(exp, &cloud);
    let report = pipeline::verify(exp, &batch, &cloud, &solution);
    let dir = &exp.config.output_dir;
    write_json(dir, "verify_report.json", &report)?;

    let target = theoretical_tail(&exp.params, &exp.law);
    let mc = branching_stable::empirical_survival(&batch.complete_maxima(), &exp.grid)
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    let solver_u: Vec<f64> = match &solution {
        Ok(s) => s.u.ys().to_vec(),
        Err(_) => vec![f64::NAN; exp.grid.len()],
    };
    let predicted: Vec<f64> = exp
        .grid
        .iter()
        .map(|&x| (target.constant * x.powf(-report.checked_exponent)).min(1.0))
        .collect();
    write_with(dir, "verify_tail.csv", |w| {
        write_columns(
            w,
            &base_metadata(exp),
            &["x", "mc_survival", "solver_u", "target"],
            &[&exp.grid, mc.ys(), &solver_u, &predicted],
        )
    })?;

    let mut out = String::new();
    for c in &report.checks {
        out.push_str(&format!(
            "{} {:<32} {:>12.5e}  [{:.4e}, {:.4e}]{}\n",
            c.status(),
            c.name,
            c.value,
            c.lo,
            c.hi,
            c.note.as_ref().map(|n| format!("  {n}")).unwrap_or_default()
        ));
    }
    if report.passed {
        Ok(out)
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| c.counts()).map(|c| c.name).collect();
        print!("{out}");
        Err(CliError::VerificationFailed(failed.join(", ")))
    }
}
