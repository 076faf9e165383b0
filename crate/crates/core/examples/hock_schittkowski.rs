//! Solves the built-in Hock–Schittkowski problems and prints one row each.

use rcm::problems::hs_set;
use rcm::{solve, RcmConfig};

fn main() {
    let cfg = RcmConfig::default();
    println!("{:<10} {:>7} {:>12} {:>10} {:>10}  status", "problem", "itc", "f", "kkt", "|c|");
    for named in hs_set() {
        let p = &named.problem;
        let rec = solve(p, p.start_point(), &cfg);
        println!(
            "{:<10} {:>7} {:>12.6} {:>10.2e} {:>10.2e}  {}",
            named.id,
            format!("{}+{}", rec.itc_feasibility, rec.itc_main),
            rec.f_final,
            rec.kkt_residual,
            rec.constraint_violation,
            rec.status
        );
        if let Some(opt) = named.known_optimum {
            println!("{:<10} known optimum f* = {:.6}", "", opt.value);
        }
    }
}
