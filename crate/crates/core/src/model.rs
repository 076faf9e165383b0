//! Problem definitions, solver configuration, run records and the derivative
//! and KKT utilities shared by both solvers.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inf_norm, ThinQr};

pub type ScalarFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// `min f(x)` subject to `c(x) = 0`, with optional analytic derivatives.
///
/// The callbacks must be pure; a problem is cheap to clone and can be shared
/// across threads.
#[derive(Clone)]
pub struct Problem {
    name: String,
    n: usize,
    m: usize,
    objective: ScalarFn,
    gradient: Option<VectorFn>,
    constraints: VectorFn,
    jacobian: Option<MatrixFn>,
    start_point: DVector<f64>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("analytic_gradient", &self.gradient.is_some())
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl Problem {
    /// Unconstrained problem; `n` is the length of `start_point`.
    pub fn new<F>(name: impl Into<String>, start_point: DVector<f64>, objective: F) -> Self
    where
        F: Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
    {
        let n = start_point.len();
        Self {
            name: name.into(),
            n,
            m: 0,
            objective: Arc::new(objective),
            gradient: None,
            constraints: Arc::new(|_| DVector::zeros(0)),
            jacobian: None,
            start_point,
        }
    }

    pub fn with_gradient<F>(mut self, gradient: F) -> Self
    where
        F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    /// Sets `m` equality constraints. Any previously attached Jacobian is dropped.
    pub fn with_constraints<F>(mut self, m: usize, constraints: F) -> Self
    where
        F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        self.m = m;
        self.constraints = Arc::new(constraints);
        self.jacobian = None;
        self
    }

    pub fn with_jacobian<F>(mut self, jacobian: F) -> Self
    where
        F: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_start_point(mut self, start_point: DVector<f64>) -> Self {
        self.start_point = start_point;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn start_point(&self) -> &DVector<f64> {
        &self.start_point
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    /// Raw objective value, no checks.
    pub fn objective_raw(&self, x: &DVector<f64>) -> f64 {
        (self.objective)(x)
    }

    /// Raw constraint vector, no checks.
    pub fn constraints_raw(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.constraints)(x)
    }

    /// Raw analytic gradient, if the problem has one.
    pub fn gradient_raw(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        self.gradient.as_ref().map(|g| g(x))
    }

    /// Raw analytic Jacobian, if the problem has one.
    pub fn jacobian_raw(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        self.jacobian.as_ref().map(|j| j(x))
    }

    pub fn objective(&self, x: &DVector<f64>) -> Result<f64> {
        let f = (self.objective)(x);
        if !f.is_finite() {
            return Err(Error::NumericalBreakdown(format!(
                "objective of `{}` is not finite",
                self.name
            )));
        }
        Ok(f)
    }

    /// Analytic gradient, or central differences when none is attached.
    pub fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let g = match &self.gradient {
            Some(g) => g(x),
            None => central_gradient(&*self.objective, x),
        };
        if g.len() != self.n {
            return Err(Error::Dimension {
                what: "gradient",
                expected: self.n,
                got: g.len(),
            });
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalBreakdown(format!(
                "gradient of `{}` is not finite",
                self.name
            )));
        }
        Ok(g)
    }

    pub fn constraints(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let c = (self.constraints)(x);
        if c.len() != self.m {
            return Err(Error::Dimension {
                what: "constraints",
                expected: self.m,
                got: c.len(),
            });
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalBreakdown(format!(
                "constraints of `{}` are not finite",
                self.name
            )));
        }
        Ok(c)
    }

    /// Analytic Jacobian, or forward differences with increment `fd_eps`.
    pub fn jacobian(&self, x: &DVector<f64>, fd_eps: f64) -> Result<DMatrix<f64>> {
        match &self.jacobian {
            Some(j) => {
                let a = j(x);
                if a.shape() != (self.m, self.n) {
                    return Err(Error::Dimension {
                        what: "jacobian rows",
                        expected: self.m,
                        got: a.nrows(),
                    });
                }
                if a.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NumericalBreakdown(format!(
                        "jacobian of `{}` is not finite",
                        self.name
                    )));
                }
                Ok(a)
            }
            None => fd_jacobian(self, x, fd_eps),
        }
    }
}

/// Main-solver parameters. Defaults follow the published settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcmConfig {
    /// Termination tolerance on `‖P g‖∞`.
    pub eps: f64,
    /// Feasibility tolerance every accepted iterate must meet.
    pub eps0: f64,
    pub eta_a: f64,
    /// Armijo coefficient of the sufficient-descent clause.
    pub eta_q: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Regularization numerator; the shift is `sigma0 / dt`.
    pub sigma0: f64,
    pub dt0: f64,
    /// Below this time step the solver switches to the projected Hessian.
    pub dt_illposed: f64,
    pub max_itc: usize,
    /// Bound on `‖s_c‖ / ‖s_p‖`.
    pub theta1: f64,
    pub fd_eps: f64,
    /// Parameters of the feasibility phase.
    pub feasibility: GcnmtrConfig,
}

impl Default for RcmConfig {
    fn default() -> Self {
        Self::with_eps(1e-6)
    }
}

impl RcmConfig {
    /// Defaults with termination tolerance `eps`, `eps0 = eps / 10` and the
    /// feasibility phase run to `eps0`.
    pub fn with_eps(eps: f64) -> Self {
        let eps0 = eps / 10.0;
        Self {
            eps,
            eps0,
            eta_a: 1e-6,
            eta_q: 1e-6,
            eta1: 0.25,
            eta2: 0.75,
            gamma1: 2.0,
            gamma2: 0.5,
            sigma0: 1e-5,
            dt0: 1e-2,
            dt_illposed: 1e-3,
            max_itc: 300,
            theta1: 1e6,
            fd_eps: 1e-6,
            feasibility: GcnmtrConfig {
                eps: eps0,
                ..GcnmtrConfig::default()
            },
        }
    }

    /// Hard bound on trial steps (accepted or not).
    pub fn max_trials(&self) -> usize {
        20 * self.max_itc
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eps", self.eps),
            ("eps0", self.eps0),
            ("eta_a", self.eta_a),
            ("eta_q", self.eta_q),
            ("sigma0", self.sigma0),
            ("dt0", self.dt0),
            ("dt_illposed", self.dt_illposed),
            ("theta1", self.theta1),
            ("fd_eps", self.fd_eps),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} = {v} must be positive")));
            }
        }
        check_trust_constants(self.eta_a, self.eta1, self.eta2, self.gamma1, self.gamma2)?;
        if !(self.eps0 < self.eps) {
            return Err(Error::InvalidConfig(format!(
                "eps0 = {} must be below eps = {}",
                self.eps0, self.eps
            )));
        }
        if self.max_itc == 0 {
            return Err(Error::InvalidConfig("max_itc must be at least 1".into()));
        }
        self.feasibility.validate()
    }
}

/// Feasibility-phase parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GcnmtrConfig {
    /// Residual tolerance on `‖c‖∞`.
    pub eps: f64,
    pub eta_a: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub dtau0: f64,
    pub maxit: usize,
    pub fd_eps: f64,
}

impl Default for GcnmtrConfig {
    fn default() -> Self {
        Self {
            eps: 1e-7,
            eta_a: 1e-6,
            eta1: 0.25,
            eta2: 0.75,
            gamma1: 2.0,
            gamma2: 0.5,
            dtau0: 1e-2,
            maxit: 400,
            fd_eps: 1e-6,
        }
    }
}

impl GcnmtrConfig {
    /// Hard bound on trial steps (accepted or not).
    pub fn max_trials(&self) -> usize {
        20 * self.maxit
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eps", self.eps), ("dtau0", self.dtau0), ("fd_eps", self.fd_eps)] {
            if !(v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} = {v} must be positive")));
            }
        }
        if self.maxit == 0 {
            return Err(Error::InvalidConfig("maxit must be at least 1".into()));
        }
        check_trust_constants(self.eta_a, self.eta1, self.eta2, self.gamma1, self.gamma2)
    }
}

fn check_trust_constants(eta_a: f64, eta1: f64, eta2: f64, gamma1: f64, gamma2: f64) -> Result<()> {
    if !(0.0 < eta_a && eta_a <= eta1 && eta1 < eta2 && eta2 < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "need 0 < eta_a ≤ eta1 < eta2 < 1 (got {eta_a}, {eta1}, {eta2})"
        )));
    }
    if !(0.0 < gamma2 && gamma2 < 1.0 && 1.0 < gamma1) {
        return Err(Error::InvalidConfig(format!(
            "need 0 < gamma2 < 1 < gamma1 (got {gamma2}, {gamma1})"
        )));
    }
    Ok(())
}

/// Outcome of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Converged,
    MaxIterations,
    FeasibilityFailed,
    NumericalBreakdown,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Converged => "converged",
            Status::MaxIterations => "max-iterations",
            Status::FeasibilityFailed => "feasibility-failed",
            Status::NumericalBreakdown => "numerical-breakdown",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "converged" => Ok(Status::Converged),
            "max-iterations" => Ok(Status::MaxIterations),
            "feasibility-failed" => Ok(Status::FeasibilityFailed),
            "numerical-breakdown" => Ok(Status::NumericalBreakdown),
            other => Err(Error::InvalidConfig(format!("unknown status `{other}`"))),
        }
    }
}

/// Per-problem result of one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: String,
    pub n: usize,
    pub m: usize,
    pub status: Status,
    pub x_final: Vec<f64>,
    #[serde(with = "crate::float_serde")]
    pub f_final: f64,
    /// `‖∇f + Aᵀλ‖∞` at `x_final` from a fresh factorization.
    #[serde(with = "crate::float_serde")]
    pub kkt_residual: f64,
    /// `‖c(x_final)‖∞`.
    #[serde(with = "crate::float_serde")]
    pub constraint_violation: f64,
    pub itc_feasibility: usize,
    pub itc_main: usize,
    /// Trial steps of the main phase, rejected ones included.
    pub trials: usize,
    /// Seconds.
    #[serde(with = "crate::float_serde")]
    pub wall_time: f64,
    /// Smallest time step reached during the main phase.
    #[serde(with = "crate::float_serde")]
    pub min_dt: f64,
    #[serde(default)]
    pub message: Option<String>,
}

impl RunRecord {
    pub fn total_iterations(&self) -> usize {
        self.itc_feasibility + self.itc_main
    }
}

/// Forward-difference constraint Jacobian, column `i` equal to
/// `(c(x + ε eᵢ) − c(x)) / ε`.
pub fn fd_jacobian(problem: &Problem, x: &DVector<f64>, fd_eps: f64) -> Result<DMatrix<f64>> {
    if !(fd_eps > 0.0) {
        return Err(Error::InvalidConfig(format!("fd_eps = {fd_eps} must be positive")));
    }
    let c0 = problem.constraints(x)?;
    let mut jac = DMatrix::zeros(problem.m(), problem.n());
    let mut xp = x.clone();
    for i in 0..problem.n() {
        xp[i] = x[i] + fd_eps;
        // The increment actually taken, after rounding of x + ε.
        let h = xp[i] - x[i];
        let ci = problem.constraints(&xp)?;
        jac.set_column(i, &((ci - &c0) / h));
        xp[i] = x[i];
    }
    Ok(jac)
}

/// Forward-difference two-sided projected Hessian `P ∇²f P`, symmetrized.
///
/// Column `i` is `(P g(x + ε P eᵢ) − P g(x)) / ε` with `P = I − Q Qᵀ`.
pub fn fd_projected_hessian(
    problem: &Problem,
    x: &DVector<f64>,
    q: &DMatrix<f64>,
    fd_eps: f64,
) -> Result<DMatrix<f64>> {
    let n = problem.n();
    let proj = |v: &DVector<f64>| crate::linalg::apply_projection(q, v);
    let pg0 = proj(&problem.gradient(x)?);
    let mut h = DMatrix::zeros(n, n);
    let mut e = DVector::zeros(n);
    for i in 0..n {
        e[i] = 1.0;
        let dir = proj(&e);
        e[i] = 0.0;
        let xi = x + dir * fd_eps;
        let pgi = proj(&problem.gradient(&xi)?);
        h.set_column(i, &((pgi - &pg0) / fd_eps));
    }
    Ok((&h + h.transpose()) * 0.5)
}

/// Central-difference gradient, used when no analytic gradient is attached.
pub fn central_gradient(f: &dyn Fn(&DVector<f64>) -> f64, x: &DVector<f64>) -> DVector<f64> {
    let base = f64::EPSILON.cbrt();
    let mut g = DVector::zeros(x.len());
    let mut xp = x.clone();
    for i in 0..x.len() {
        let h = base * x[i].abs().max(1.0);
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

/// Central-difference Jacobian of a vector map with `rows` outputs.
pub fn central_jacobian(
    c: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    x: &DVector<f64>,
    rows: usize,
) -> DMatrix<f64> {
    let base = f64::EPSILON.cbrt();
    let mut jac = DMatrix::zeros(rows, x.len());
    let mut xp = x.clone();
    for i in 0..x.len() {
        let h = base * x[i].abs().max(1.0);
        xp[i] = x[i] + h;
        let cp = c(&xp);
        xp[i] = x[i] - h;
        let cm = c(&xp);
        xp[i] = x[i];
        if cp.len() == rows && cm.len() == rows {
            jac.set_column(i, &((cp - cm) / (2.0 * h)));
        }
    }
    jac
}

/// Multipliers `λ = −(A Aᵀ)⁻¹ A g` from the factors `Aᵀ = Q R`.
pub fn lagrange_multipliers(g: &DVector<f64>, qr: &ThinQr) -> Result<DVector<f64>> {
    if qr.ncols() == 0 {
        return Ok(DVector::zeros(0));
    }
    // (A Aᵀ)⁻¹ A g = R⁻¹ R⁻ᵀ Rᵀ Qᵀ g
    let w = qr.solve_rt(&(qr.r().transpose() * qr.q().tr_mul(g)))?;
    Ok(-qr.solve_r(&w)?)
}

/// `‖∇f(x) + A(x)ᵀ λ‖∞` with `qr` the factorization of `A(x)ᵀ`.
pub fn kkt_residual(problem: &Problem, x: &DVector<f64>, qr: &ThinQr) -> Result<f64> {
    let g = problem.gradient(x)?;
    kkt_residual_from_gradient(&g, qr)
}

pub fn kkt_residual_from_gradient(g: &DVector<f64>, qr: &ThinQr) -> Result<f64> {
    if qr.ncols() == 0 {
        return Ok(inf_norm(g));
    }
    let lambda = lagrange_multipliers(g, qr)?;
    // Aᵀ λ = Q R λ
    let at_lambda = qr.q() * (qr.r() * lambda);
    Ok(inf_norm(&(g + at_lambda)))
}

/// KKT residual and constraint violation at `x` from a fresh factorization.
pub fn kkt_report(problem: &Problem, x: &DVector<f64>, fd_eps: f64) -> Result<(f64, f64)> {
    let c = problem.constraints(x)?;
    let qr = if problem.m() == 0 {
        ThinQr::empty(problem.n())
    } else {
        ThinQr::factor(&problem.jacobian(x, fd_eps)?.transpose())?
    };
    Ok((kkt_residual(problem, x, &qr)?, inf_norm(&c)))
}

/// One finding of [`validate_problem`].
#[derive(Debug, Clone, PartialEq)]
pub enum Issue {
    TooManyConstraints { n: usize, m: usize },
    StartPointLength { expected: usize, got: usize },
    GradientLength { expected: usize, got: usize },
    ConstraintLength { expected: usize, got: usize },
    JacobianShape { expected: (usize, usize), got: (usize, usize) },
    NonFinite { what: &'static str },
    GradientMismatch { index: usize, rel_err: f64 },
    JacobianMismatch { column: usize, rel_err: f64 },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::TooManyConstraints { n, m } => write!(f, "m = {m} exceeds n = {n}"),
            Issue::StartPointLength { expected, got } => {
                write!(f, "start point has {got} entries, expected {expected}")
            }
            Issue::GradientLength { expected, got } => {
                write!(f, "gradient has {got} entries, expected {expected}")
            }
            Issue::ConstraintLength { expected, got } => {
                write!(f, "constraints have {got} entries, expected {expected}")
            }
            Issue::JacobianShape { expected, got } => write!(
                f,
                "jacobian is {}x{}, expected {}x{}",
                got.0, got.1, expected.0, expected.1
            ),
            Issue::NonFinite { what } => write!(f, "{what} is not finite at the start point"),
            Issue::GradientMismatch { index, rel_err } => write!(
                f,
                "gradient entry {index} disagrees with central differences (rel. err. {rel_err:.2e})"
            ),
            Issue::JacobianMismatch { column, rel_err } => write!(
                f,
                "jacobian column {column} disagrees with central differences (rel. err. {rel_err:.2e})"
            ),
        }
    }
}

/// Findings of [`validate_problem`]; empty means the problem is well formed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Relative tolerance for analytic-vs-difference derivative agreement.
pub const DERIVATIVE_TOL: f64 = 1e-4;

/// Checks dimensions, finiteness and analytic derivatives at the start point.
pub fn validate_problem(problem: &Problem) -> ValidationReport {
    let mut issues = Vec::new();
    let (n, m) = (problem.n(), problem.m());
    let x = problem.start_point();
    if m > n {
        issues.push(Issue::TooManyConstraints { n, m });
    }
    if x.len() != n {
        issues.push(Issue::StartPointLength {
            expected: n,
            got: x.len(),
        });
        return ValidationReport { issues };
    }

    if !problem.objective_raw(x).is_finite() {
        issues.push(Issue::NonFinite { what: "objective" });
    }
    let c = problem.constraints_raw(x);
    let constraints_ok = if c.len() != m {
        issues.push(Issue::ConstraintLength {
            expected: m,
            got: c.len(),
        });
        false
    } else if c.iter().any(|v| !v.is_finite()) {
        issues.push(Issue::NonFinite { what: "constraints" });
        false
    } else {
        true
    };

    if let Some(g) = problem.gradient_raw(x) {
        if g.len() != n {
            issues.push(Issue::GradientLength {
                expected: n,
                got: g.len(),
            });
        } else if g.iter().any(|v| !v.is_finite()) {
            issues.push(Issue::NonFinite { what: "gradient" });
        } else {
            let fd = central_gradient(&|z| problem.objective_raw(z), x);
            let scale = inf_norm(&fd).max(1.0);
            let worst = (0..n)
                .map(|i| (i, (g[i] - fd[i]).abs() / scale))
                .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
            if worst.1 > DERIVATIVE_TOL {
                issues.push(Issue::GradientMismatch {
                    index: worst.0,
                    rel_err: worst.1,
                });
            }
        }
    }

    if constraints_ok {
        if let Some(a) = problem.jacobian_raw(x) {
            if a.shape() != (m, n) {
                issues.push(Issue::JacobianShape {
                    expected: (m, n),
                    got: a.shape(),
                });
            } else if a.iter().any(|v| !v.is_finite()) {
                issues.push(Issue::NonFinite { what: "jacobian" });
            } else {
                let fd = central_jacobian(&|z| problem.constraints_raw(z), x, m);
                for j in 0..n {
                    let col_fd = fd.column(j);
                    let scale = col_fd.amax().max(1.0);
                    let err = (a.column(j) - col_fd).amax() / scale;
                    if err > DERIVATIVE_TOL {
                        issues.push(Issue::JacobianMismatch {
                            column: j,
                            rel_err: err,
                        });
                    }
                }
            }
        }
    }
    ValidationReport { issues }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    fn half_norm_sq(start: DVector<f64>) -> Problem {
        Problem::new("half-norm", start, |x| 0.5 * x.norm_squared()).with_gradient(|x| x.clone())
    }

    #[test]
    fn fd_jacobian_linear_map() {
        let a = dmatrix![1.0, 2.0; 3.0, 4.0];
        let a2 = a.clone();
        let p = half_norm_sq(dvector![0.3, -0.7]).with_constraints(2, move |x| &a2 * x);
        let jac = fd_jacobian(&p, &dvector![0.3, -0.7], 1e-6).unwrap();
        assert!((jac - a).amax() < 1e-8);
    }

    #[test]
    fn fd_jacobian_one_sided_bias() {
        let p = half_norm_sq(dvector![1.0]).with_constraints(1, |x| dvector![x[0] * x[0]]);
        let jac = fd_jacobian(&p, &dvector![1.0], 1e-6).unwrap();
        // ((1 + h)² − 1) / h = 2 + h
        assert!((jac[(0, 0)] - (2.0 + 1e-6)).abs() < 1e-9);
    }

    #[test]
    fn fd_jacobian_nonfinite() {
        let p = half_norm_sq(dvector![1.0]).with_constraints(1, |x| dvector![(x[0] - 1.0).ln()]);
        assert!(matches!(
            fd_jacobian(&p, &dvector![1.0], 1e-6),
            Err(Error::NumericalBreakdown(_))
        ));
    }

    #[test]
    fn projected_hessian_identity() {
        let p = half_norm_sq(dvector![0.1, 0.2, 0.3]);
        let h = fd_projected_hessian(&p, p.start_point(), &DMatrix::zeros(3, 0), 1e-6).unwrap();
        assert!((h - DMatrix::<f64>::identity(3, 3)).amax() < 1e-6);
    }

    #[test]
    fn projected_hessian_two_sided() {
        let p = Problem::new("quad", dvector![0.4, -0.2], |x| x[0] * x[0] + 2.0 * x[1] * x[1])
            .with_gradient(|x| dvector![2.0 * x[0], 4.0 * x[1]]);
        let q = dmatrix![1.0; 0.0];
        let h = fd_projected_hessian(&p, p.start_point(), &q, 1e-6).unwrap();
        let expected = dmatrix![0.0, 0.0; 0.0, 4.0];
        assert!((&h - expected).amax() < 1e-6);
        assert_eq!(h, h.transpose());
    }

    #[test]
    fn kkt_zero_at_stationary_point() {
        let p = half_norm_sq(dvector![1.0, 0.0])
            .with_constraints(1, |x| dvector![x[0] - 1.0])
            .with_jacobian(|_| dmatrix![1.0, 0.0]);
        let x = dvector![1.0, 0.0];
        let qr = ThinQr::factor(&p.jacobian(&x, 1e-6).unwrap().transpose()).unwrap();
        assert!(kkt_residual(&p, &x, &qr).unwrap() < 1e-12);
        let lambda = lagrange_multipliers(&x, &qr).unwrap();
        assert!((lambda[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn kkt_unconstrained_is_gradient_norm() {
        let x = dvector![0.5, -3.0, 2.0];
        let p = half_norm_sq(x.clone());
        assert_eq!(kkt_residual(&p, &x, &ThinQr::empty(3)).unwrap(), 3.0);
    }

    #[test]
    fn kkt_rank_deficient() {
        let qr = ThinQr::factor(&dmatrix![1.0, 2.0; 0.0, 0.0; 0.0, 0.0]).unwrap();
        assert!(matches!(
            kkt_residual_from_gradient(&dvector![1.0, 1.0, 1.0], &qr),
            Err(Error::RankDeficiency { .. })
        ));
    }

    #[test]
    fn validation_flags_short_gradient() {
        let p = Problem::new("bad", dvector![1.0, 2.0], |x| x.norm_squared())
            .with_gradient(|x| dvector![2.0 * x[0]]);
        let report = validate_problem(&p);
        assert_eq!(
            report.issues,
            vec![Issue::GradientLength {
                expected: 2,
                got: 1
            }]
        );
    }

    #[test]
    fn validation_flags_wrong_gradient() {
        let p = Problem::new("bad", dvector![1.0, 2.0], |x| x.norm_squared())
            .with_gradient(|x| dvector![2.0 * x[0], -2.0 * x[1]]);
        let report = validate_problem(&p);
        assert!(matches!(
            report.issues.as_slice(),
            [Issue::GradientMismatch { index: 1, .. }]
        ));
    }

    #[test]
    fn validation_flags_too_many_constraints_and_nan() {
        let p = Problem::new("bad", dvector![1.0], |_| f64::NAN)
            .with_constraints(2, |x| dvector![x[0], x[0]]);
        let report = validate_problem(&p);
        assert!(report.issues.contains(&Issue::TooManyConstraints { n: 1, m: 2 }));
        assert!(report.issues.contains(&Issue::NonFinite { what: "objective" }));
    }

    #[test]
    fn config_defaults_are_valid() {
        let cfg = RcmConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.eps0, 1e-7);
        assert_eq!(cfg.feasibility.eps, 1e-7);
        assert_eq!(cfg.max_trials(), 6000);
        GcnmtrConfig::default().validate().unwrap();
    }

    #[test]
    fn config_rejects_bad_ordering() {
        let cfg = RcmConfig {
            eta1: 0.9,
            ..RcmConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = RcmConfig {
            gamma2: 1.5,
            ..RcmConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = RcmConfig {
            eps0: 1e-5,
            ..RcmConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn status_round_trips_through_text() {
        for s in [
            Status::Converged,
            Status::MaxIterations,
            Status::FeasibilityFailed,
            Status::NumericalBreakdown,
        ] {
            assert_eq!(s.to_string().parse::<Status>().unwrap(), s);
        }
    }
}
