//! `rcm`: solve single problems, run suites, emit tables and profiles.
//!
//! Exit codes: 0 success, 1 solver failure, 2 usage error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rcm::bench::{
    apply_override, apply_override_str, emit_performance_profile, emit_table, hessian_only_config,
    run_problems, run_single_with, suite_problem_ids, Perturbation, ProfileMetric, SuiteReport, TableFormat,
};
use rcm::gcnmtr::{find_feasible_point, FeasibilityStatus};
use rcm::model::validate_problem;
use rcm::problems::{classic_set, resolve, HS_IDS};
use rcm::{Error, RcmConfig, SolveOptions, Status};

const PERTURBATION_AMPLITUDE: f64 = 1e-2;

#[derive(Parser)]
#[command(name = "rcm", version, about = "Equality-constrained optimization by regularization continuation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem.
    Solve {
        id: String,
        #[command(flatten)]
        config: ConfigArgs,
        /// Write one JSON object per trial step to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// text or json.
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// Run a suite: hs, constructed-small, constructed-medium or all.
    Bench {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
        /// Write the table here; `.json` gives JSON, anything else CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also run the projected-Hessian-only variant and write the
        /// performance profile of both as CSV.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// time or iterations.
        #[arg(long, default_value = "time")]
        metric: String,
        /// Format of the table printed to stdout: text, csv or json.
        #[arg(long, default_value = "text")]
        format: String,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Check dimensions, finiteness and analytic derivatives of a problem.
    Validate { id: String },
    /// Run only the feasibility phase.
    Feasible {
        id: String,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// List problem ids and suites.
    List,
}

#[derive(Args, Default)]
struct ConfigArgs {
    /// Termination tolerance; also sets eps0 = eps / 10.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    eps0: Option<f64>,
    #[arg(long)]
    dt0: Option<f64>,
    #[arg(long)]
    sigma0: Option<f64>,
    #[arg(long)]
    max_itc: Option<usize>,
    #[arg(long)]
    dt_illposed: Option<f64>,
    /// Any configuration field, as key=value. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ConfigArgs {
    fn build(&self) -> rcm::Result<RcmConfig> {
        let mut cfg = RcmConfig::default();
        if let Some(eps) = self.eps {
            apply_override(&mut cfg, "eps", &eps.to_string())?;
        }
        let named = [
            ("eps0", self.eps0),
            ("dt0", self.dt0),
            ("sigma0", self.sigma0),
            ("dt_illposed", self.dt_illposed),
        ];
        for (key, value) in named {
            if let Some(v) = value {
                apply_override(&mut cfg, key, &v.to_string())?;
            }
        }
        if let Some(v) = self.max_itc {
            cfg.max_itc = v;
        }
        for kv in &self.set {
            apply_override_str(&mut cfg, kv)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

enum Failure {
    Usage(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownProblem(_) | Error::InvalidConfig(_) | Error::Dimension { .. } => Failure::Usage(e.to_string()),
            other => Failure::Solver(other.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

fn perturbation_from_env() -> Result<Option<Perturbation>, Failure> {
    match std::env::var("RCM_SEED") {
        Ok(s) => {
            let seed = s
                .trim()
                .parse::<u64>()
                .map_err(|_| Failure::Usage(format!("RCM_SEED must be an unsigned integer, got `{s}`")))?;
            Ok(Some(Perturbation {
                seed,
                amplitude: PERTURBATION_AMPLITUDE,
            }))
        }
        Err(_) => Ok(None),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| io_failure(path, e))
}

fn cmd_solve(id: &str, config: &ConfigArgs, trace: Option<&Path>, format: &str) -> Result<bool, Failure> {
    let cfg = config.build()?;
    let format: TableFormat = format.parse()?;
    let perturbation = perturbation_from_env()?;
    let opts = SolveOptions { trace: trace.is_some() };
    let out = run_single_with(id, &cfg, perturbation, opts)?;
    if let Some(path) = trace {
        let file = fs::File::create(path).map_err(|e| io_failure(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        for t in &out.trace {
            let line = serde_json::to_string(t).map_err(|e| Failure::Solver(e.to_string()))?;
            writeln!(w, "{line}").map_err(|e| io_failure(path, e))?;
        }
        w.flush().map_err(|e| io_failure(path, e))?;
    }
    let r = &out.record;
    match format {
        TableFormat::Json => {
            println!("{}", serde_json::to_string_pretty(r).map_err(|e| Failure::Solver(e.to_string()))?);
        }
        _ => {
            let report = SuiteReport {
                suite_id: "single".into(),
                label: "rcm".into(),
                timestamp: chrono::Utc::now().to_rfc3339(),
                config_snapshot: cfg,
                records: vec![r.clone()],
            };
            print!("{}", emit_table(&report, format)?);
            println!("f = {:.10e}", r.f_final);
            if let Some(msg) = &r.message {
                println!("{msg}");
            }
        }
    }
    Ok(r.status == Status::Converged)
}

fn table_format_for(path: &Path) -> TableFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => TableFormat::Json,
        _ => TableFormat::Csv,
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    suite: &str,
    parallelism: usize,
    out: Option<&Path>,
    profile: Option<&Path>,
    metric: &str,
    format: &str,
    config: &ConfigArgs,
) -> Result<bool, Failure> {
    let cfg = config.build()?;
    let format: TableFormat = format.parse()?;
    let metric: ProfileMetric = metric.parse()?;
    let perturbation = perturbation_from_env()?;
    let ids = suite_problem_ids(suite)?;
    let report = run_problems(suite, &ids, parallelism, &cfg, perturbation)?;
    print!("{}", emit_table(&report, format)?);
    eprintln!("{}/{} converged", report.converged(), report.records.len());
    if let Some(path) = out {
        write_file(path, &emit_table(&report, table_format_for(path))?)?;
    }
    if let Some(path) = profile {
        let mut variant = run_problems(suite, &ids, parallelism, &hessian_only_config(&cfg), perturbation)?;
        variant.label = "hessian-only".into();
        let profile = emit_performance_profile(&[report.clone(), variant], metric)?;
        write_file(path, &profile.to_csv())?;
    }
    Ok(report.converged() == report.records.len())
}

fn cmd_validate(id: &str) -> Result<bool, Failure> {
    let named = resolve(id)?;
    let p = &named.problem;
    println!("{}: n = {}, m = {}", named.id, p.n(), p.m());
    println!("  source: {}", named.provenance);
    if let Some(opt) = named.known_optimum {
        println!("  known optimum: {}", opt.value);
    }
    println!(
        "  derivatives: gradient {}, jacobian {}",
        if p.has_analytic_gradient() { "analytic" } else { "finite differences" },
        if p.m() == 0 {
            "none"
        } else if p.has_analytic_jacobian() {
            "analytic"
        } else {
            "finite differences"
        }
    );
    let report = validate_problem(p);
    if report.is_ok() {
        println!("  ok");
        return Ok(true);
    }
    for issue in &report.issues {
        println!("  {issue}");
    }
    Ok(false)
}

fn cmd_feasible(id: &str, config: &ConfigArgs) -> Result<bool, Failure> {
    let cfg = config.build()?;
    let named = resolve(id)?;
    let p = &named.problem;
    let z0 = match perturbation_from_env()? {
        Some(pert) => pert.apply(p.start_point()),
        None => p.start_point().clone(),
    };
    let res = find_feasible_point(p, &z0, &cfg.feasibility)?;
    println!(
        "{}: {:?}, |c|inf = {:.2e}, {} iterations, {} trials, {} Jacobians",
        named.id, res.status, res.residual, res.itc, res.trials, res.jacobian_evaluations
    );
    Ok(res.status == FeasibilityStatus::Converged)
}

fn cmd_list() {
    println!("Hock-Schittkowski: {}", HS_IDS.join(" "));
    println!("Ackley: ackley[:n=N]");
    println!("Constrained Ackley: ackley-<base>[:n=N,m=M] with <base> one of");
    for f in classic_set() {
        println!("  {:<26} {}", f.id, f.name);
    }
    println!("Feasibility test: broyden-system[:n=N,m=M]");
    println!("Suites: hs constructed-small constructed-medium all");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve {
            id,
            config,
            trace,
            format,
        } => cmd_solve(id, config, trace.as_deref(), format),
        Command::Bench {
            suite,
            parallelism,
            out,
            profile,
            metric,
            format,
            config,
        } => cmd_bench(suite, *parallelism, out.as_deref(), profile.as_deref(), metric, format, config),
        Command::Validate { id } => cmd_validate(id),
        Command::Feasible { id, config } => cmd_feasible(id, config),
        Command::List => {
            cmd_list();
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Solver(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
