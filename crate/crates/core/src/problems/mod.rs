//! Built-in test problems, addressable by id.
//!
//! | id | problem |
//! |----|---------|
//! | `hs007`, `hs008`, `hs009`, `hs046`, `hs100lnp` | Hock–Schittkowski problems |
//! | `ackley:n=50` | unconstrained Ackley |
//! | `ackley-<base>:n=50,m=10` | Ackley subject to the first `m` gradient components of `<base>` vanishing |
//! | `broyden-system:n=20,m=20` | `½‖x‖²` subject to the first `m` Broyden tridiagonal residuals vanishing |
//!
//! `<base>` is any id in [`classic_set`]. Omitted sizes default to `n = 50`,
//! `m = 10` (`m = n` for `broyden-system`).

mod ackley;
mod classic;
mod hs;

use std::collections::BTreeMap;

use nalgebra::DVector;

pub use ackley::{ackley_gradient, ackley_value, ACKLEY_A, ACKLEY_B};
pub use classic::{broyden_residuals, classic_by_id, classic_set, ClassicFunction};
pub use hs::{hs_problem, hs_set, HS_IDS};

use crate::error::{Error, Result};
use crate::model::{central_jacobian, Problem};

pub const DEFAULT_N: usize = 50;
pub const DEFAULT_M: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnownOptimum {
    pub value: f64,
    pub note: &'static str,
}

#[derive(Debug, Clone)]
pub struct NamedProblem {
    pub id: String,
    pub problem: Problem,
    pub scale_params: BTreeMap<String, usize>,
    pub known_optimum: Option<KnownOptimum>,
    pub provenance: String,
}

fn sizes(n: usize, m: usize) -> BTreeMap<String, usize> {
    [("n".to_string(), n), ("m".to_string(), m)].into_iter().collect()
}

/// Unconstrained Ackley in `n` variables, started from the all-ones vector.
pub fn ackley(n: usize) -> Result<Problem> {
    if n == 0 {
        return Err(Error::InvalidConfig("ackley needs n ≥ 1".into()));
    }
    Ok(Problem::new(format!("ackley:n={n}"), DVector::from_element(n, 1.0), ackley_value)
        .with_gradient(ackley_gradient))
}

/// Ackley objective subject to `∂φ/∂x_i = 0` for `i < m`, where `φ` is the
/// classic function `base`. The Jacobian is the matching block of Hessian
/// rows when the base function provides them.
pub fn gradient_constraint_family(base: &str, n: usize, m: usize) -> Result<Problem> {
    let f = classic_by_id(base).ok_or_else(|| Error::UnknownProblem(format!("ackley-{base}")))?;
    if m > n {
        return Err(Error::Dimension {
            what: "constraint count (m ≤ n)",
            expected: n,
            got: m,
        });
    }
    let problem = ackley(n)?.with_name(format!("ackley-{base}:n={n},m={m}"));
    if m == 0 {
        return Ok(problem);
    }
    let gradient = f.gradient;
    let problem = problem.with_constraints(m, move |x| gradient(x).rows(0, m).into_owned());
    Ok(match f.hessian_rows {
        Some(rows) => problem.with_jacobian(move |x| rows(x, m)),
        None => problem,
    })
}

/// `½‖x‖²` subject to the first `m` Broyden tridiagonal residuals vanishing,
/// started from `−1`. Mostly useful for exercising the feasibility phase.
pub fn broyden_system(n: usize, m: usize) -> Result<Problem> {
    if n == 0 || m > n {
        return Err(Error::InvalidConfig(format!("broyden-system needs 1 ≤ n and m ≤ n (n={n}, m={m})")));
    }
    let problem = Problem::new(
        format!("broyden-system:n={n},m={m}"),
        DVector::from_element(n, -1.0),
        |x| 0.5 * x.norm_squared(),
    )
    .with_gradient(|x| x.clone());
    if m == 0 {
        return Ok(problem);
    }
    let c = move |x: &DVector<f64>| broyden_residuals(x).rows(0, m).into_owned();
    Ok(problem.with_constraints(m, c).with_jacobian(move |x| {
        // Tridiagonal, with diagonal 3 − 4 x_i, sub-diagonal −1, super-diagonal −2.
        nalgebra::DMatrix::from_fn(m, n, |i, j| {
            if i == j {
                3.0 - 4.0 * x[i]
            } else if j + 1 == i {
                -1.0
            } else if j == i + 1 {
                -2.0
            } else {
                0.0
            }
        })
    }))
}

/// Central-difference Jacobian of the first `m` gradient components; handy
/// as an oracle for analytic Hessian rows.
pub fn gradient_rows_by_difference(base: &ClassicFunction, x: &DVector<f64>, m: usize) -> nalgebra::DMatrix<f64> {
    let gradient = base.gradient;
    central_jacobian(&|z| gradient(z).rows(0, m).into_owned(), x, m)
}

fn parse_params(text: &str, allowed: &[&str]) -> Result<BTreeMap<String, usize>> {
    let mut out = BTreeMap::new();
    for part in text.split(',').filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("expected key=value, got `{part}`")))?;
        let key = key.trim();
        if !allowed.contains(&key) {
            return Err(Error::InvalidConfig(format!("unknown size parameter `{key}`")));
        }
        let value: usize = value
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("`{key}` must be a non-negative integer")))?;
        out.insert(key.to_string(), value);
    }
    Ok(out)
}

/// Resolves a problem id. Unknown names give [`Error::UnknownProblem`];
/// malformed sizes give [`Error::InvalidConfig`].
pub fn resolve(id: &str) -> Result<NamedProblem> {
    let id = id.trim();
    if let Some(named) = hs_problem(id) {
        return Ok(named);
    }
    let (head, params) = id.split_once(':').unwrap_or((id, ""));
    if head == "ackley" {
        let p = parse_params(params, &["n"])?;
        let n = p.get("n").copied().unwrap_or(DEFAULT_N);
        let problem = ackley(n)?;
        return Ok(NamedProblem {
            id: problem.name().to_string(),
            problem,
            scale_params: sizes(n, 0),
            known_optimum: Some(KnownOptimum {
                value: 0.0,
                note: "global minimum at the origin",
            }),
            provenance: "Ackley function with a = 20, b = 0.2".into(),
        });
    }
    if head == "broyden-system" {
        let p = parse_params(params, &["n", "m"])?;
        let n = p.get("n").copied().unwrap_or(DEFAULT_N);
        let m = p.get("m").copied().unwrap_or(n);
        let problem = broyden_system(n, m)?;
        return Ok(NamedProblem {
            id: problem.name().to_string(),
            problem,
            scale_params: sizes(n, m),
            known_optimum: None,
            provenance: "Broyden tridiagonal residuals as equality constraints".into(),
        });
    }
    if let Some(base) = head.strip_prefix("ackley-") {
        if classic_by_id(base).is_none() {
            return Err(Error::UnknownProblem(id.to_string()));
        }
        let p = parse_params(params, &["n", "m"])?;
        let n = p.get("n").copied().unwrap_or(DEFAULT_N);
        let m = p.get("m").copied().unwrap_or(DEFAULT_M.min(n));
        let problem = gradient_constraint_family(base, n, m)?;
        return Ok(NamedProblem {
            id: problem.name().to_string(),
            problem,
            scale_params: sizes(n, m),
            known_optimum: None,
            provenance: format!("Ackley objective, constraints from the gradient of `{base}`"),
        });
    }
    Err(Error::UnknownProblem(id.to_string()))
}
