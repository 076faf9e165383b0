//! Suites, result tables and performance profiles.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate_problem, RcmConfig, RunRecord, Status};
use crate::problems::{resolve, HS_IDS};
use crate::solver::{solve_with, SolveOptions, SolveOutput};

pub const SUITE_IDS: [&str; 4] = ["hs", "constructed-small", "constructed-medium", "all"];

/// Base functions of the constructed suites.
pub const SUITE_BASES: [&str; 5] = [
    "trid",
    "rosenbrock",
    "broyden-tridiagonal",
    "discrete-boundary-value",
    "extended-powell-singular",
];

/// Ratio assigned to a failed run in a performance profile.
pub const FAILURE_RATIO: f64 = 999.0;

/// Results of one suite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite_id: String,
    /// Solver variant name used in performance profiles.
    pub label: String,
    /// RFC 3339 time at which the run started.
    pub timestamp: String,
    pub config_snapshot: RcmConfig,
    pub records: Vec<RunRecord>,
}

impl SuiteReport {
    pub fn converged(&self) -> usize {
        self.records.iter().filter(|r| r.status == Status::Converged).count()
    }
}

/// Deterministic uniform perturbation of start points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub seed: u64,
    pub amplitude: f64,
}

impl Perturbation {
    /// `z0 + amplitude · u` with `u` uniform in `[−1, 1]ⁿ`.
    pub fn apply(&self, z0: &DVector<f64>) -> DVector<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        z0.map(|v| v + self.amplitude * rng.gen_range(-1.0..=1.0))
    }
}

/// Problem ids of a suite, in report order.
pub fn suite_problem_ids(suite_id: &str) -> Result<Vec<String>> {
    let family = |n: usize, ms: &[usize]| -> Vec<String> {
        SUITE_BASES
            .iter()
            .flat_map(|b| ms.iter().map(move |m| format!("ackley-{b}:n={n},m={m}")))
            .collect()
    };
    let small = || {
        let mut ids = vec!["ackley:n=50".to_string()];
        ids.extend(family(50, &[10, 25, 49]));
        ids
    };
    let medium = || family(200, &[10, 100, 199]);
    let hs = || HS_IDS.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    match suite_id {
        "hs" => Ok(hs()),
        "constructed-small" => Ok(small()),
        "constructed-medium" => Ok(medium()),
        "all" => Ok(hs().into_iter().chain(small()).chain(medium()).collect()),
        other => Err(Error::InvalidConfig(format!(
            "unknown suite `{other}` (expected one of {})",
            SUITE_IDS.join(", ")
        ))),
    }
}

/// Resolves, validates and solves one problem.
///
/// Unknown ids and failed validation are errors; solver failures are not,
/// they come back as a non-converged record.
pub fn run_single_with(
    problem_id: &str,
    cfg: &RcmConfig,
    perturbation: Option<Perturbation>,
    opts: SolveOptions,
) -> Result<SolveOutput> {
    let named = resolve(problem_id)?;
    let problem = &named.problem;
    let report = validate_problem(problem);
    if !report.is_ok() {
        let issues: Vec<String> = report.issues.iter().map(|i| i.to_string()).collect();
        return Err(Error::InvalidConfig(format!(
            "`{problem_id}` failed validation: {}",
            issues.join("; ")
        )));
    }
    let z0 = match perturbation {
        Some(p) => p.apply(problem.start_point()),
        None => problem.start_point().clone(),
    };
    Ok(solve_with(problem, &z0, cfg, opts))
}

pub fn run_single(problem_id: &str, cfg: &RcmConfig, perturbation: Option<Perturbation>) -> Result<RunRecord> {
    run_single_with(problem_id, cfg, perturbation, SolveOptions::default()).map(|o| o.record)
}

/// Runs every problem of a suite, up to `parallelism` at a time.
///
/// Records keep suite order whatever the parallelism. A problem that cannot
/// be set up is recorded as a numerical breakdown instead of aborting.
pub fn run_suite(
    suite_id: &str,
    parallelism: usize,
    cfg: &RcmConfig,
    perturbation: Option<Perturbation>,
) -> Result<SuiteReport> {
    let ids = suite_problem_ids(suite_id)?;
    run_problems(suite_id, &ids, parallelism, cfg, perturbation)
}

/// [`run_suite`] over an explicit list of ids.
pub fn run_problems(
    suite_id: &str,
    ids: &[String],
    parallelism: usize,
    cfg: &RcmConfig,
    perturbation: Option<Perturbation>,
) -> Result<SuiteReport> {
    cfg.validate()?;
    if parallelism == 0 {
        return Err(Error::InvalidConfig("parallelism must be at least 1".into()));
    }
    let timestamp = chrono::Utc::now().to_rfc3339();
    let one = |id: &String| run_single(id, cfg, perturbation).unwrap_or_else(|e| setup_failure(id, e));
    let records = if parallelism == 1 {
        ids.iter().map(one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        pool.install(|| ids.par_iter().map(one).collect())
    };
    Ok(SuiteReport {
        suite_id: suite_id.to_string(),
        label: "rcm".to_string(),
        timestamp,
        config_snapshot: *cfg,
        records,
    })
}

fn setup_failure(id: &str, e: Error) -> RunRecord {
    RunRecord {
        problem: id.to_string(),
        n: 0,
        m: 0,
        status: Status::NumericalBreakdown,
        x_final: Vec::new(),
        f_final: f64::NAN,
        kkt_residual: f64::INFINITY,
        constraint_violation: f64::INFINITY,
        itc_feasibility: 0,
        itc_main: 0,
        trials: 0,
        wall_time: 0.0,
        min_dt: f64::NAN,
        message: Some(e.to_string()),
    }
}

/// Applies a `key=value` override to a configuration.
///
/// Setting `eps` also moves `eps0` and the feasibility tolerance to
/// `eps / 10`; later keys override that.
pub fn apply_override(cfg: &mut RcmConfig, key: &str, value: &str) -> Result<()> {
    let float = || {
        value
            .parse::<f64>()
            .map_err(|_| Error::InvalidConfig(format!("`{key}` expects a number, got `{value}`")))
    };
    let int = || {
        value
            .parse::<usize>()
            .map_err(|_| Error::InvalidConfig(format!("`{key}` expects an integer, got `{value}`")))
    };
    match key {
        "eps" => {
            let base = RcmConfig::with_eps(float()?);
            cfg.eps = base.eps;
            cfg.eps0 = base.eps0;
            cfg.feasibility.eps = base.eps0;
        }
        "eps0" => cfg.eps0 = float()?,
        "eta_a" => cfg.eta_a = float()?,
        "eta_q" => cfg.eta_q = float()?,
        "eta1" => cfg.eta1 = float()?,
        "eta2" => cfg.eta2 = float()?,
        "gamma1" => cfg.gamma1 = float()?,
        "gamma2" => cfg.gamma2 = float()?,
        "sigma0" => cfg.sigma0 = float()?,
        "dt0" => cfg.dt0 = float()?,
        "dt_illposed" => cfg.dt_illposed = float()?,
        "max_itc" => cfg.max_itc = int()?,
        "theta1" => cfg.theta1 = float()?,
        "fd_eps" => cfg.fd_eps = float()?,
        "feasibility.eps" => cfg.feasibility.eps = float()?,
        "feasibility.dtau0" => cfg.feasibility.dtau0 = float()?,
        "feasibility.maxit" => cfg.feasibility.maxit = int()?,
        "feasibility.fd_eps" => cfg.feasibility.fd_eps = float()?,
        other => return Err(Error::InvalidConfig(format!("unknown configuration key `{other}`"))),
    }
    Ok(())
}

/// Parses `key=value` and applies it.
pub fn apply_override_str(cfg: &mut RcmConfig, kv: &str) -> Result<()> {
    let (k, v) = kv
        .split_once('=')
        .ok_or_else(|| Error::InvalidConfig(format!("expected key=value, got `{kv}`")))?;
    apply_override(cfg, k.trim(), v.trim())
}

/// Configuration that uses the regularized projected Hessian from the first
/// iteration on. The threshold stays finite so the snapshot serializes.
pub fn hessian_only_config(base: &RcmConfig) -> RcmConfig {
    RcmConfig {
        dt_illposed: 1e300,
        ..*base
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Text,
    Csv,
    Json,
}

impl FromStr for TableFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Self::Text),
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::InvalidConfig(format!("unknown table format `{other}`"))),
        }
    }
}

/// `3.84e-06`: two decimals and at least two exponent digits.
pub fn sci2(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.2e}");
    let (mantissa, exp) = s.split_once('e').expect("`e` formatting has an exponent");
    let (sign, digits) = match exp.strip_prefix('-') {
        Some(d) => ("-", d),
        None => ("+", exp),
    };
    format!("{mantissa}e{sign}{digits:0>2}")
}

fn iterations(r: &RunRecord) -> String {
    format!("{}+{}", r.itc_feasibility, r.itc_main)
}

const CSV_HEADER: [&str; 13] = [
    "problem",
    "n",
    "m",
    "itc",
    "wall_time",
    "kkt_residual",
    "constraint_violation",
    "status",
    "itc_feasibility",
    "itc_main",
    "trials",
    "f_final",
    "min_dt",
];

/// 17 significant digits, enough to round-trip any `f64`.
fn full(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Renders a report as an aligned text table, CSV or JSON.
pub fn emit_table(report: &SuiteReport, format: TableFormat) -> Result<String> {
    match format {
        TableFormat::Json => serde_json::to_string_pretty(report).map_err(|e| Error::InvalidConfig(e.to_string())),
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::InvalidConfig(e.to_string());
            w.write_record(CSV_HEADER).map_err(io)?;
            for r in &report.records {
                w.write_record([
                    r.problem.clone(),
                    r.n.to_string(),
                    r.m.to_string(),
                    iterations(r),
                    full(r.wall_time),
                    full(r.kkt_residual),
                    full(r.constraint_violation),
                    r.status.to_string(),
                    r.itc_feasibility.to_string(),
                    r.itc_main.to_string(),
                    r.trials.to_string(),
                    full(r.f_final),
                    full(r.min_dt),
                ])
                .map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::InvalidConfig(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::InvalidConfig(e.to_string()))
        }
        TableFormat::Text => {
            let width = report
                .records
                .iter()
                .map(|r| r.problem.len())
                .max()
                .unwrap_or(0)
                .max("problem".len());
            let mut out = String::new();
            let _ = writeln!(
                out,
                "{:<width$} {:>5} {:>5} {:>9} {:>10} {:>10} {:>10}  status",
                "problem", "n", "m", "itc", "time", "KKT", "|c|inf"
            );
            for r in &report.records {
                let _ = writeln!(
                    out,
                    "{:<width$} {:>5} {:>5} {:>9} {:>10} {:>10} {:>10}  {}",
                    r.problem,
                    r.n,
                    r.m,
                    iterations(r),
                    sci2(r.wall_time),
                    sci2(r.kkt_residual),
                    sci2(r.constraint_violation),
                    r.status
                );
            }
            Ok(out)
        }
    }
}

/// A row of the CSV table, parsed back.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub problem: String,
    pub n: usize,
    pub m: usize,
    pub status: Status,
    pub itc_feasibility: usize,
    pub itc_main: usize,
    pub trials: usize,
    pub wall_time: f64,
    pub kkt_residual: f64,
    pub constraint_violation: f64,
    pub f_final: f64,
    pub min_dt: f64,
}

/// Parses the output of [`emit_table`] in CSV format.
pub fn parse_csv_table(text: &str) -> Result<Vec<CsvRow>> {
    let bad = |what: &str| Error::InvalidConfig(format!("malformed CSV table: {what}"));
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::InvalidConfig(e.to_string()))?;
        if rec.len() != CSV_HEADER.len() {
            return Err(bad("wrong column count"));
        }
        let int = |i: usize| rec[i].parse::<usize>().map_err(|_| bad(CSV_HEADER[i]));
        let float = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(CSV_HEADER[i]));
        rows.push(CsvRow {
            problem: rec[0].to_string(),
            n: int(1)?,
            m: int(2)?,
            wall_time: float(4)?,
            kkt_residual: float(5)?,
            constraint_violation: float(6)?,
            status: rec[7].parse()?,
            itc_feasibility: int(8)?,
            itc_main: int(9)?,
            trials: int(10)?,
            f_final: float(11)?,
            min_dt: float(12)?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileMetric {
    Time,
    Iterations,
}

impl FromStr for ProfileMetric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "time" => Ok(Self::Time),
            "iterations" => Ok(Self::Iterations),
            other => Err(Error::InvalidConfig(format!("unknown profile metric `{other}`"))),
        }
    }
}

/// Dolan–Moré performance profile: for each solver, the fraction of
/// problems solved within a factor `τ` of the best solver.
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceProfile {
    pub solvers: Vec<String>,
    /// Every distinct ratio, ascending, starting at `1`.
    pub taus: Vec<f64>,
    /// `fractions[s][i]` is solver `s`'s fraction at `taus[i]`.
    pub fractions: Vec<Vec<f64>>,
    /// `ratios[s][p]`, with failures at [`FAILURE_RATIO`].
    pub ratios: Vec<Vec<f64>>,
}

impl PerformanceProfile {
    /// Fraction of problems solver `s` solves within factor `tau`.
    pub fn at(&self, s: usize, tau: f64) -> f64 {
        let np = self.ratios[s].len();
        if np == 0 {
            return 1.0;
        }
        self.ratios[s].iter().filter(|&&r| r <= tau).count() as f64 / np as f64
    }

    /// CSV with a `tau` column and one column per solver.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau");
        for s in &self.solvers {
            out.push(',');
            out.push_str(s);
        }
        out.push('\n');
        for (i, tau) in self.taus.iter().enumerate() {
            out.push_str(&format!("{tau}"));
            for f in &self.fractions {
                out.push_str(&format!(",{}", f[i]));
            }
            out.push('\n');
        }
        out
    }
}

fn metric_value(r: &RunRecord, metric: ProfileMetric) -> f64 {
    match metric {
        // Timers can read zero on tiny problems.
        ProfileMetric::Time => r.wall_time.max(1e-9),
        ProfileMetric::Iterations => r.total_iterations().max(1) as f64,
    }
}

/// Builds the profile of several runs over the same problems.
///
/// Problems are matched by name. Runs that did not converge get ratio
/// [`FAILURE_RATIO`]; so does every solver on a problem nobody solved.
pub fn emit_performance_profile(reports: &[SuiteReport], metric: ProfileMetric) -> Result<PerformanceProfile> {
    let first = reports
        .first()
        .ok_or_else(|| Error::InvalidConfig("performance profile needs at least one report".into()))?;
    let problems: Vec<&str> = first.records.iter().map(|r| r.problem.as_str()).collect();
    let want: BTreeSet<&str> = problems.iter().copied().collect();
    if want.len() != problems.len() {
        return Err(Error::InvalidConfig("report lists a problem twice".into()));
    }
    for rep in &reports[1..] {
        let have: BTreeSet<&str> = rep.records.iter().map(|r| r.problem.as_str()).collect();
        if have != want || rep.records.len() != problems.len() {
            return Err(Error::InvalidConfig(format!(
                "report `{}` covers a different problem set than `{}`",
                rep.label, first.label
            )));
        }
    }

    let lookup = |rep: &SuiteReport, p: &str| -> Option<f64> {
        let r = rep.records.iter().find(|r| r.problem == p)?;
        (r.status == Status::Converged).then(|| metric_value(r, metric))
    };
    let mut ratios = vec![Vec::with_capacity(problems.len()); reports.len()];
    for p in &problems {
        let values: Vec<Option<f64>> = reports.iter().map(|rep| lookup(rep, p)).collect();
        let best = values.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        for (s, v) in values.iter().enumerate() {
            ratios[s].push(match v {
                Some(t) => (t / best).min(FAILURE_RATIO),
                None => FAILURE_RATIO,
            });
        }
    }

    let mut taus: Vec<f64> = ratios.iter().flatten().copied().chain([1.0]).collect();
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    let mut labels = Vec::with_capacity(reports.len());
    for (i, rep) in reports.iter().enumerate() {
        let mut label = rep.label.clone();
        if labels.contains(&label) {
            label = format!("{label}-{}", i + 1);
        }
        labels.push(label);
    }
    let mut profile = PerformanceProfile {
        solvers: labels,
        taus,
        fractions: Vec::new(),
        ratios,
    };
    profile.fractions = (0..reports.len())
        .map(|s| profile.taus.iter().map(|&t| profile.at(s, t)).collect())
        .collect();
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sci2_formatting() {
        assert_eq!(sci2(3.84e-6), "3.84e-06");
        assert_eq!(sci2(5.12e-8), "5.12e-08");
        assert_eq!(sci2(0.0), "0.00e+00");
        assert_eq!(sci2(1.5e120), "1.50e+120");
        assert_eq!(sci2(f64::INFINITY), "inf");
    }

    #[test]
    fn suites() {
        assert_eq!(suite_problem_ids("hs").unwrap().len(), 5);
        assert_eq!(suite_problem_ids("constructed-small").unwrap().len(), 16);
        assert_eq!(suite_problem_ids("constructed-medium").unwrap().len(), 15);
        assert_eq!(suite_problem_ids("all").unwrap().len(), 36);
        assert!(suite_problem_ids("nosuch").is_err());
    }

    #[test]
    fn overrides() {
        let mut cfg = RcmConfig::default();
        apply_override_str(&mut cfg, "eps=1e-2").unwrap();
        assert_eq!(cfg.eps, 1e-2);
        assert_eq!(cfg.eps0, 1e-3);
        assert_eq!(cfg.feasibility.eps, 1e-3);
        apply_override_str(&mut cfg, "max_itc=7").unwrap();
        assert_eq!(cfg.max_itc, 7);
        assert!(apply_override_str(&mut cfg, "nosuch=1").is_err());
        assert!(apply_override_str(&mut cfg, "dt0=abc").is_err());
        assert!(apply_override_str(&mut cfg, "dt0").is_err());
    }

    #[test]
    fn perturbation_is_deterministic() {
        let p = Perturbation {
            seed: 7,
            amplitude: 0.1,
        };
        let z = DVector::from_element(4, 1.0);
        assert_eq!(p.apply(&z), p.apply(&z));
        assert!((p.apply(&z) - &z).amax() <= 0.1);
    }
}
