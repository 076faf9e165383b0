//! Prints the per-trial trace of one solve.
//!
//! ```text
//! cargo run --example trace -- hs046
//! ```

use rcm::problems::resolve;
use rcm::{solve_with, RcmConfig, SolveOptions};

fn main() {
    let id = std::env::args().nth(1).unwrap_or_else(|| "hs046".to_string());
    let named = match resolve(&id) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    let p = &named.problem;
    let out = solve_with(p, p.start_point(), &RcmConfig::default(), SolveOptions { trace: true });
    println!("{:>5} {:>10} {:>10} {:>10} {:>10} {:>10} accepted", "k", "dt", "rho", "pg_inf", "c_inf", "phase");
    for t in &out.trace {
        println!(
            "{:>5} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e} {:>10?} {}",
            t.k, t.dt, t.rho, t.pg_inf, t.c_inf, t.phase, t.accepted
        );
    }
    let rec = &out.record;
    println!(
        "{}: {} after {}+{} iterations, f = {:.10}, kkt = {:.2e}, |c| = {:.2e}",
        rec.problem, rec.status, rec.itc_feasibility, rec.itc_main, rec.f_final, rec.kkt_residual, rec.constraint_violation
    );
    if let Some(msg) = &rec.message {
        println!("message: {msg}");
    }
    println!("x = {:?}", rec.x_final);
    let mut counts = std::collections::BTreeMap::new();
    for r in &out.diagnostics.rejections {
        *counts.entry(format!("{r:?}")).or_insert(0usize) += 1;
    }
    println!("rejections: {counts:?}");
}
