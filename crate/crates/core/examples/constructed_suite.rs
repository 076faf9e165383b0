//! Ackley objective under gradient-derived constraints, one family per
//! classic base function.
//!
//! ```text
//! cargo run --release --example constructed_suite -- 50 10
//! ```

use rcm::problems::{classic_set, gradient_constraint_family};
use rcm::{solve, RcmConfig};

fn main() {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>());
    let n = args.next().and_then(Result::ok).unwrap_or(50);
    let m = args.next().and_then(Result::ok).unwrap_or(10);
    let cfg = RcmConfig::default();
    for base in classic_set() {
        let p = gradient_constraint_family(base.id, n, m).expect("m ≤ n");
        let rec = solve(&p, p.start_point(), &cfg);
        println!(
            "{:<40} {:>8} {:>9.2e} {:>9.2e} {:>8.3}s  {}",
            rec.problem,
            format!("{}+{}", rec.itc_feasibility, rec.itc_main),
            rec.kkt_residual,
            rec.constraint_violation,
            rec.wall_time,
            rec.status
        );
    }
}
