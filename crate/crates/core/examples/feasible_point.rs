//! Runs only the feasibility phase and prints the accepted residual history.
//!
//! ```text
//! cargo run --example feasible_point -- broyden-system:n=30
//! ```

use rcm::gcnmtr::find_feasible_point;
use rcm::problems::resolve;
use rcm::GcnmtrConfig;

fn main() {
    let id = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "broyden-system:n=30".to_string());
    let named = match resolve(&id) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    let p = &named.problem;
    match find_feasible_point(p, p.start_point(), &GcnmtrConfig::default()) {
        Ok(res) => {
            for (j, r) in res.accepted_residuals.iter().enumerate() {
                println!("{j:>4}  ‖c‖₂ = {r:.6e}");
            }
            println!(
                "{:?}: ‖c‖∞ = {:.3e} after {} iterations, {} trials, {} Jacobians",
                res.status, res.residual, res.itc, res.trials, res.jacobian_evaluations
            );
        }
        Err(e) => {
            println!("failed: {e}");
            std::process::exit(1);
        }
    }
}
