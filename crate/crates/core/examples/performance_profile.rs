//! Compares the default solver with the projected-Hessian-only variant on a
//! suite and prints the performance profile as CSV.
//!
//! ```text
//! cargo run --release --example performance_profile -- hs iterations
//! ```

use rcm::bench::{emit_performance_profile, hessian_only_config, run_suite, ProfileMetric};
use rcm::RcmConfig;

fn main() {
    let mut args = std::env::args().skip(1);
    let suite = args.next().unwrap_or_else(|| "hs".to_string());
    let metric: ProfileMetric = match args.next().unwrap_or_else(|| "iterations".into()).parse() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let base = RcmConfig::default();
    let run = |cfg: &RcmConfig, label: &str| {
        let mut report = run_suite(&suite, threads, cfg, None).unwrap_or_else(|e| {
            eprintln!("{e}");
            std::process::exit(2);
        });
        report.label = label.to_string();
        eprintln!("{label}: {}/{} converged", report.converged(), report.records.len());
        report
    };
    let reports = [run(&base, "rcm"), run(&hessian_only_config(&base), "hessian-only")];
    let profile = emit_performance_profile(&reports, metric).expect("same problem set");
    print!("{}", profile.to_csv());
}
