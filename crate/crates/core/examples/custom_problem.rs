//! Defines a problem in code and solves it.
//!
//! Minimizes `x1 + x2 + x3` on the sphere `‖x‖² = 3`; the minimizer is
//! `(−1, −1, −1)`. The Jacobian is left out, so finite differences are used.
//!
//! ```text
//! cargo run --example custom_problem
//! ```

use nalgebra::{dvector, DVector};
use rcm::model::validate_problem;
use rcm::{solve, Problem, RcmConfig};

fn main() {
    let problem = Problem::new("sphere-linear", dvector![1.0, 0.5, -0.5], |x| x.sum())
        .with_gradient(|x| DVector::from_element(x.len(), 1.0))
        .with_constraints(1, |x| dvector![x.norm_squared() - 3.0]);

    let report = validate_problem(&problem);
    for issue in &report.issues {
        println!("validation: {issue}");
    }

    let rec = solve(&problem, problem.start_point(), &RcmConfig::default());
    println!("status      {}", rec.status);
    println!("iterations  {}+{}", rec.itc_feasibility, rec.itc_main);
    println!("x           {:?}", rec.x_final);
    println!("f           {:.10}", rec.f_final);
    println!("KKT         {:.2e}", rec.kkt_residual);
    println!("|c|inf      {:.2e}", rec.constraint_violation);
}
