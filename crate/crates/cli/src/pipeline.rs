//! The computations behind the subcommands, without any file handling.

use branching_stable::asymptotics::{
    fit_sample_tail, integral_on_grid, quantile_window, solver_window, tauberian_probes,
    variation_per_decade, MC_WINDOW_QUANTILES,
};
use branching_stable::stats::{ks_two_sample, quantile_sorted};
use branching_stable::{
    apriori_bound_check, empirical_survival, fit_tail, geometric_grid, phi0_of, residual_check,
    sample_cloud, simulate_batch, solve_u, theoretical_tail, ExpPairCloud64, Regime,
    ResidualReport, RunBatch, Solution64, TabulatedFn64, TailTarget,
};
use serde::Serialize;

use crate::config::Experiment;
use crate::error::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Geometric nodes spanning each Monte Carlo fit window.
pub const MC_FIT_POINTS: usize = 60;

pub fn simulate(exp: &Experiment) -> RunBatch<f64> {
    let s = &exp.config.sampling;
    simulate_batch(&exp.params, &exp.law, &exp.caps, s.n_steps, s.replications, exp.config.seed)
}

pub fn cloud(exp: &Experiment) -> Result<ExpPairCloud64, CliError> {
    let s = &exp.config.sampling;
    sample_cloud(&exp.params, s.n_steps, s.cloud_size, exp.config.seed)
        .map_err(|e| CliError::Invalid(e.to_string()))
}

pub fn solve(exp: &Experiment, cloud: &ExpPairCloud64) -> Result<Solution64, CliError> {
    let s = &exp.config.solver;
    solve_u(&exp.law, cloud, &exp.grid, s.tol, s.max_iter).map_err(|e| match e {
        branching_stable::Error::NonConvergence { .. } => CliError::NonConvergence(e.to_string()),
        other => CliError::Invalid(other.to_string()),
    })
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Subcritical => "subcritical",
        Regime::Critical => "critical",
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TargetReport {
    pub regime: &'static str,
    pub exponent: f64,
    pub constant: f64,
}

impl From<TailTarget<f64>> for TargetReport {
    fn from(t: TailTarget<f64>) -> Self {
        TargetReport {
            regime: regime_name(t.regime),
            exponent: t.exponent,
            constant: t.constant,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TailFitReport {
    pub window: [f64; 2],
    pub points: usize,
    pub slope: f64,
    pub slope_stderr: f64,
    /// Exponent at which `constant` was estimated.
    pub exponent_used: f64,
    pub constant: f64,
    pub constant_stderr: Option<f64>,
    pub implied_constant: f64,
}

/// Fit of the complete maxima over the default quantile window.
pub fn mc_tail_fit(exp: &Experiment, maxima: &[f64], exponent: f64) -> Result<TailFitReport, String> {
    let window = quantile_window(maxima, MC_WINDOW_QUANTILES).map_err(|e| e.to_string())?;
    let f = fit_sample_tail(
        maxima,
        window,
        MC_FIT_POINTS,
        exponent,
        exp.config.verify.bootstrap,
        exp.config.seed,
    )
    .map_err(|e| e.to_string())?;
    Ok(TailFitReport {
        window: [window.0, window.1],
        points: f.fit.points,
        slope: f.fit.slope,
        slope_stderr: f.slope_stderr_bootstrap,
        exponent_used: exponent,
        constant: f.constant,
        constant_stderr: Some(f.constant_stderr),
        implied_constant: f.fit.implied_constant(),
    })
}

/// Fit of the solver output over `[x_max/20, x_max/2]`.
pub fn solver_tail_fit(u: &TabulatedFn64, exponent: f64) -> Result<TailFitReport, String> {
    let window = solver_window(u.x_max());
    let f = fit_tail(u, window).map_err(|e| e.to_string())?;
    Ok(TailFitReport {
        window: [window.0, window.1],
        points: f.points,
        slope: f.slope,
        slope_stderr: f.stderr_slope,
        exponent_used: exponent,
        constant: f.constant_at_exponent(exponent),
        constant_stderr: None,
        implied_constant: f.implied_constant(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct QuantileReport {
    pub level: f64,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KsReport {
    pub statistic: f64,
    pub p_value: f64,
    pub reference_size: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulateSummary {
    pub tool_version: &'static str,
    pub config_hash: String,
    pub seed: u64,
    pub replications: usize,
    pub complete: usize,
    pub truncated_fraction: f64,
    pub extinct_fraction: f64,
    pub quantiles: Vec<QuantileReport>,
    pub target: TargetReport,
    pub tail_fit: Option<TailFitReport>,
    pub tail_fit_error: Option<String>,
    /// Maxima against an independent sample of `S_e` (laws without children).
    pub root_only_ks: Option<KsReport>,
}

pub const SUMMARY_QUANTILES: [f64; 5] = [0.5, 0.9, 0.99, 0.999, 0.9999];

pub fn summarize_runs(exp: &Experiment, batch: &RunBatch<f64>) -> Result<SimulateSummary, CliError> {
    let target = theoretical_tail(&exp.params, &exp.law);
    let mut maxima = batch.complete_maxima();
    maxima.sort_by(f64::total_cmp);
    let quantiles = if maxima.is_empty() {
        Vec::new()
    } else {
        SUMMARY_QUANTILES
            .iter()
            .map(|&level| QuantileReport {
                level,
                value: quantile_sorted(&maxima, level),
            })
            .collect()
    };
    let (tail_fit, tail_fit_error) = match mc_tail_fit(exp, &maxima, target.exponent) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e)),
    };
    let root_only_ks = if exp.law.max_offspring() == 0 && !maxima.is_empty() {
        let reference = cloud(exp)?.s_values();
        let ks = ks_two_sample(&maxima, &reference);
        Some(KsReport {
            statistic: ks.statistic,
            p_value: ks.p_value,
            reference_size: reference.len(),
        })
    } else {
        None
    };
    Ok(SimulateSummary {
        tool_version: TOOL_VERSION,
        config_hash: exp.hash.clone(),
        seed: exp.config.seed,
        replications: batch.len(),
        complete: maxima.len(),
        truncated_fraction: batch.truncated_fraction(),
        extinct_fraction: batch.extinct_fraction(),
        quantiles,
        target: target.into(),
        tail_fit,
        tail_fit_error,
        root_only_ks,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveSummary {
    pub tool_version: &'static str,
    pub config_hash: String,
    pub cloud_size: usize,
    pub n_steps: usize,
    pub grid_points: usize,
    pub iterations: usize,
    pub last_delta: f64,
    /// Sup-norm distance between the iterates from above and below.
    pub sandwich_gap: f64,
    pub tol: f64,
    pub monotone: bool,
    pub residual_holds: bool,
    pub residual_max_violation: f64,
    pub residual_slack: f64,
    pub target: TargetReport,
    pub tail_fit: Option<TailFitReport>,
    pub tail_fit_error: Option<String>,
}

/// Solver output satisfies `u(0) = 1`, `u ∈ [0, 1]` and is non-increasing.
/// Upward steps this small are rounding in `1 - Σ` and are not counted as
/// monotonicity violations.
pub const MONOTONE_ROUNDING: f64 = 1e-14;

pub fn is_survival_shaped(u: &TabulatedFn64) -> bool {
    u.ys()[0] == 1.0 && u.is_non_increasing_within(MONOTONE_ROUNDING) && u.ys().iter().all(|&y| (0.0..=1.0).contains(&y))
}

pub fn residual(exp: &Experiment, cloud: &ExpPairCloud64, sol: &Solution64) -> Result<ResidualReport<f64>, CliError> {
    residual_check(&sol.u, &exp.law, cloud, exp.config.solver.residual_slack)
        .map_err(|e| CliError::Invalid(e.to_string()))
}

pub fn summarize_solution(
    exp: &Experiment,
    cloud: &ExpPairCloud64,
    sol: &Solution64,
    residual: &ResidualReport<f64>,
) -> SolveSummary {
    let target = theoretical_tail(&exp.params, &exp.law);
    let (tail_fit, tail_fit_error) = match solver_tail_fit(&sol.u, target.exponent) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e)),
    };
    SolveSummary {
        tool_version: TOOL_VERSION,
        config_hash: exp.hash.clone(),
        cloud_size: cloud.len(),
        n_steps: cloud.n_steps(),
        grid_points: exp.grid.len(),
        iterations: sol.iterations,
        last_delta: sol.last_delta,
        sandwich_gap: sol.gap,
        tol: exp.config.solver.tol,
        monotone: is_survival_shaped(&sol.u),
        residual_holds: residual.holds(),
        residual_max_violation: residual.max_violation,
        residual_slack: residual.slack,
        target: target.into(),
        tail_fit,
        tail_fit_error,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub passed: bool,
    /// False when the data cannot decide the check; it is reported but does
    /// not count toward the verdict.
    pub applicable: bool,
    pub note: Option<String>,
}

impl Check {
    fn band(name: &'static str, value: f64, lo: f64, hi: f64) -> Self {
        Check {
            name,
            value,
            lo,
            hi,
            passed: value >= lo && value <= hi,
            applicable: true,
            note: None,
        }
    }

    fn flag(name: &'static str, ok: bool) -> Self {
        Check::band(name, if ok { 1.0 } else { 0.0 }, 1.0, 1.0)
    }

    fn failed(name: &'static str, note: String) -> Self {
        Check {
            name,
            value: f64::NAN,
            lo: f64::NAN,
            hi: f64::NAN,
            passed: false,
            applicable: true,
            note: Some(note),
        }
    }

    fn with_note(mut self, note: String) -> Self {
        self.note = Some(note);
        self
    }

    fn not_applicable(mut self, note: String) -> Self {
        self.applicable = false;
        self.note = Some(note);
        self
    }

    pub fn status(&self) -> &'static str {
        match (self.applicable, self.passed) {
            (false, _) => "SKIP",
            (true, true) => "PASS",
            (true, false) => "FAIL",
        }
    }

    pub fn counts(&self) -> bool {
        self.applicable && !self.passed
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub lambda: f64,
    pub laplace: f64,
    pub eta: f64,
    pub ratio: f64,
    pub ratio_over_kappa: f64,
    pub extension_share: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub tool_version: &'static str,
    pub config_hash: String,
    pub target: TargetReport,
    /// Exponent the checks were run against (target plus offset).
    pub checked_exponent: f64,
    pub mc_fit: Option<TailFitReport>,
    pub solver_fit: Option<TailFitReport>,
    pub truncated_fraction: f64,
    pub tauberian: Vec<ProbeReport>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Slope half-width and constant band per regime.
pub fn tolerances(regime: Regime) -> (f64, (f64, f64)) {
    match regime {
        Regime::Subcritical => (0.15, (0.5, 2.0)),
        Regime::Critical => (0.1, (0.6, 1.6)),
    }
}

pub const MAX_TRUNCATED_FRACTION: f64 = 0.01;
pub const TAUBERIAN_BAND: f64 = 0.2;
pub const TAUBERIAN_VARIATION: f64 = 0.1;
/// Cloud suprema needed beyond the solver fit window before its slope is
/// checked; with fewer, `u` there reflects a handful of jumps.
pub const MIN_RESOLVING_SAMPLES: usize = 100;
/// Largest ratio of successive increments of `∫_0^X u` over doublings of X.
pub const INTEGRAL_INCREMENT_RATIO: f64 = 0.9;

fn integral_upto(u: &TabulatedFn64, x: f64) -> f64 {
    let (xs, ys): (Vec<f64>, Vec<f64>) = u.window(0.0, x).unzip();
    integral_on_grid(&TabulatedFn64::new(xs, ys).expect("sub-grid of a valid grid"))
}

/// Runs every check that applies to the experiment's regime.
pub fn verify(
    exp: &Experiment,
    batch: &RunBatch<f64>,
    cloud: &ExpPairCloud64,
    solution: &Result<Solution64, CliError>,
) -> VerifyReport {
    let target = theoretical_tail(&exp.params, &exp.law);
    let exponent = target.exponent + exp.config.verify.target_exponent_offset;
    let (slope_band, constant_band) = tolerances(target.regime);
    let mut checks = Vec::new();

    let truncated = batch.truncated_fraction();
    checks.push(Check::band("truncated_fraction", truncated, 0.0, MAX_TRUNCATED_FRACTION));

    let maxima = batch.complete_maxima();
    let mc_fit = match mc_tail_fit(exp, &maxima, exponent) {
        Ok(f) => {
            checks.push(
                Check::band("mc_tail_slope", f.slope, -exponent - slope_band, -exponent + slope_band)
                    .with_note(format!("window [{:.4e}, {:.4e}]", f.window[0], f.window[1])),
            );
            checks.push(
                Check::band(
                    "mc_tail_constant_ratio",
                    f.constant / target.constant,
                    constant_band.0,
                    constant_band.1,
                )
                .with_note(format!("truncated fraction {truncated:.3e}")),
            );
            Some(f)
        }
        Err(e) => {
            checks.push(Check::failed("mc_tail_slope", e));
            None
        }
    };

    if target.regime == Regime::Critical && exp.params.alpha() > 1.0 {
        let [lo, hi] = exp.config.verify.apriori_window;
        let check = geometric_grid(lo, hi, 40)
            .and_then(|grid| empirical_survival(&maxima, &grid))
            .and_then(|s| apriori_bound_check(&s, &exp.params, lo));
        checks.push(match check {
            Ok(ok) => Check::flag("apriori_bound", ok),
            Err(e) => Check::failed("apriori_bound", e.to_string()),
        });
    }

    let mut solver_fit = None;
    let mut tauberian = Vec::new();
    match solution {
        Err(e) => checks.push(Check::failed("solver_converged", e.to_string())),
        Ok(sol) => {
            checks.push(Check::band("sandwich_gap", sol.gap, 0.0, 2.0 * exp.config.solver.tol));
            checks.push(Check::flag("solver_monotone", is_survival_shaped(&sol.u)));
            match empirical_survival(&maxima, &exp.grid) {
                Ok(mc) => checks.push(Check::band(
                    "solver_vs_mc_sup_norm",
                    sol.u.sup_distance(&mc),
                    0.0,
                    exp.config.verify.sup_norm_max,
                )),
                Err(e) => checks.push(Check::failed("solver_vs_mc_sup_norm", e.to_string())),
            }
            match residual(exp, cloud, sol) {
                Ok(r) => checks.push(
                    Check::band("residual_violation", r.max_violation, 0.0, 0.0)
                        .with_note(format!("slack {:e}", r.slack)),
                ),
                Err(e) => checks.push(Check::failed("residual_violation", e.to_string())),
            }
            match solver_tail_fit(&sol.u, exponent) {
                Ok(f) => {
                    let check = Check::band("solver_tail_slope", f.slope, -exponent - slope_band, -exponent + slope_band);
                    let resolving = cloud.samples().iter().filter(|p| p.s >= f.window[1]).count();
                    checks.push(if resolving >= MIN_RESOLVING_SAMPLES {
                        check
                    } else {
                        check.not_applicable(format!(
                            "only {resolving} cloud suprema beyond {:.3e}; need {MIN_RESOLVING_SAMPLES}",
                            f.window[1]
                        ))
                    });
                    solver_fit = Some(f);
                }
                Err(e) => checks.push(Check::failed("solver_tail_slope", e)),
            }
            if target.regime == Regime::Subcritical && exp.params.alpha() > 1.0 {
                let x = sol.u.x_max();
                let (i1, i2, i4) = (integral_upto(&sol.u, x / 4.0), integral_upto(&sol.u, x / 2.0), integral_upto(&sol.u, x));
                let check = Check::band("integral_increment_ratio", (i4 - i2) / (i2 - i1), 0.0, INTEGRAL_INCREMENT_RATIO);
                let resolving = cloud.samples().iter().filter(|p| p.s >= x / 2.0).count();
                checks.push(if resolving >= MIN_RESOLVING_SAMPLES {
                    check.with_note(format!("integral of u up to x_max: {i4:.6}"))
                } else {
                    check.not_applicable(format!(
                        "only {resolving} cloud suprema beyond {:.3e}; need {MIN_RESOLVING_SAMPLES}",
                        x / 2.0
                    ))
                });
            }
            if exp.config.verify.tauberian {
                let phi0 = phi0_of(&sol.u, &exp.law);
                match tauberian_probes(&phi0, &exp.params, &exp.config.verify.lambdas) {
                    Ok(probes) => {
                        let kappa = exp.params.kappa();
                        let worst = probes
                            .iter()
                            .map(|p| (p.ratio / kappa - 1.0).abs())
                            .fold(0.0, f64::max);
                        checks.push(Check::band("tauberian_ratio_error", worst, 0.0, TAUBERIAN_BAND));
                        checks.push(Check::band(
                            "tauberian_variation_per_decade",
                            variation_per_decade(&probes),
                            0.0,
                            TAUBERIAN_VARIATION,
                        ));
                        tauberian = probes
                            .iter()
                            .map(|p| ProbeReport {
                                lambda: p.lambda,
                                laplace: p.laplace.value,
                                eta: p.eta,
                                ratio: p.ratio,
                                ratio_over_kappa: p.ratio / kappa,
                                extension_share: p.laplace.tail / p.laplace.value,
                                flagged: p.laplace.flagged,
                            })
                            .collect();
                    }
                    Err(e) => checks.push(Check::failed("tauberian_ratio_error", e.to_string())),
                }
            }
        }
    }

    let passed = !checks.iter().any(Check::counts);
    VerifyReport {
        tool_version: TOOL_VERSION,
        config_hash: exp.hash.clone(),
        target: target.into(),
        checked_exponent: exponent,
        mc_fit,
        solver_fit,
        truncated_fraction: truncated,
        tauberian,
        checks,
        passed,
    }
}
