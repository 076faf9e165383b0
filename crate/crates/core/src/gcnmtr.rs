//! Feasibility phase: generalized continuation Newton iteration with
//! trust-region control of the pseudo-time step, for underdetermined
//! systems `c(z) = 0`.
//!
//! Each accepted iteration takes the minimum-norm Newton direction
//! `Δz^N = −A† c` and moves by `Δτ/(1+Δτ) · Δz^N`. The Jacobian factors are
//! kept while the linear model keeps predicting the residual decrease well.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{inf_norm, ThinQr};
use crate::model::{GcnmtrConfig, Problem};

/// Which bound stopped the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeasibilityStatus {
    Converged,
    /// `maxit` accepted iterations were used.
    MaxIterations,
    /// The total trial bound (`20 · maxit`) fired first.
    TrialLimit,
}

/// Result of [`find_feasible_point`].
#[derive(Debug, Clone)]
pub struct FeasibleResult {
    /// Best point found (smallest `‖c‖∞`).
    pub z: DVector<f64>,
    /// `‖c(z)‖∞`.
    pub residual: f64,
    pub itc: usize,
    pub trials: usize,
    pub jacobian_evaluations: usize,
    pub status: FeasibilityStatus,
    /// `‖c‖₂` of every accepted iterate, the start point first.
    pub accepted_residuals: Vec<f64>,
}

/// Iteration state.
#[derive(Debug, Clone)]
pub struct GcnmtrState {
    pub z: DVector<f64>,
    pub c_val: DVector<f64>,
    pub dtau: f64,
    pub qr: Option<ThinQr>,
    pub last_ratio: f64,
    pub newton_dir: DVector<f64>,
    pub success_flag: bool,
    /// Whether `qr` was computed at the current `z`.
    pub factors_current: bool,
    pub itc: usize,
}

/// `Δz^N = −A† c` from the factors `Aᵀ = U W`: solve `Wᵀ w = −c`, then `U w`.
pub fn gcnmtr_direction(qr: &ThinQr, c_val: &DVector<f64>) -> Result<DVector<f64>> {
    qr.min_norm_solve(&(-c_val))
}

/// Ratio of actual to linearly predicted residual decrease (Euclidean norms).
///
/// Returns `−1` when the trial residual grew.
pub fn gcnmtr_ratio(c_now: &DVector<f64>, c_trial: &DVector<f64>, dtau: f64) -> Result<f64> {
    let now = c_now.norm();
    let trial = c_trial.norm();
    if now == 0.0 {
        return Err(Error::InternalInvariant(
            "ratio requested at an exactly feasible point".into(),
        ));
    }
    if now < trial {
        return Ok(-1.0);
    }
    Ok((now - trial) / ((dtau / (1.0 + dtau)) * now))
}

/// Pseudo-time step update driven by `|1 − r|`.
pub fn gcnmtr_update_tau(dtau: f64, r: f64, cfg: &GcnmtrConfig) -> f64 {
    let dev = (1.0 - r).abs();
    if dev <= cfg.eta1 {
        cfg.gamma1 * dtau
    } else if dev < cfg.eta2 {
        dtau
    } else {
        cfg.gamma2 * dtau
    }
}

/// `true` when the cached Jacobian factors may be reused.
pub fn gcnmtr_jacobian_reuse(last_r: f64, cfg: &GcnmtrConfig) -> bool {
    (1.0 - last_r).abs() <= cfg.eta1
}

fn refactor(problem: &Problem, state: &mut GcnmtrState, cfg: &GcnmtrConfig) -> Result<()> {
    let jac = problem.jacobian(&state.z, cfg.fd_eps)?;
    state.qr = Some(ThinQr::factor(&jac.transpose())?);
    state.factors_current = true;
    Ok(())
}

/// Drives `‖c(z)‖∞` below `cfg.eps` starting from `z0`.
///
/// `itc` counts accepted iterations the same way the residual check does:
/// it is incremented whenever the previous trial succeeded, so an already
/// feasible start point returns with `itc = 1`. Trial points with
/// non-finite residuals are rejected like residual increases.
///
/// A rejected direction is kept for the next, shorter trial, except when it
/// came from reused factors: then the Jacobian is re-evaluated at the
/// current point first.
pub fn find_feasible_point(
    problem: &Problem,
    z0: &DVector<f64>,
    cfg: &GcnmtrConfig,
) -> Result<FeasibleResult> {
    cfg.validate()?;
    if z0.len() != problem.n() {
        return Err(Error::Dimension {
            what: "feasibility start point",
            expected: problem.n(),
            got: z0.len(),
        });
    }
    if z0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalBreakdown("start point is not finite".into()));
    }
    let c0 = problem.constraints(z0)?;
    let mut state = GcnmtrState {
        z: z0.clone(),
        c_val: c0,
        dtau: cfg.dtau0,
        qr: None,
        last_ratio: 0.0,
        newton_dir: DVector::zeros(problem.n()),
        success_flag: true,
        factors_current: false,
        itc: 0,
    };
    let mut best_z = state.z.clone();
    let mut best_res = inf_norm(&state.c_val);
    let mut accepted_residuals = vec![state.c_val.norm()];
    let mut trials = 0;
    let mut jac_evals = 0;

    let status = loop {
        if state.itc >= cfg.maxit {
            break FeasibilityStatus::MaxIterations;
        }
        if state.success_flag {
            state.itc += 1;
            if inf_norm(&state.c_val) < cfg.eps {
                break FeasibilityStatus::Converged;
            }
            let reuse = state.qr.is_some() && gcnmtr_jacobian_reuse(state.last_ratio, cfg);
            if reuse {
                state.factors_current = false;
            } else {
                refactor(problem, &mut state, cfg)?;
                jac_evals += 1;
            }
            let qr = state.qr.as_ref().expect("factors computed above");
            state.newton_dir = gcnmtr_direction(qr, &state.c_val)?;
        }
        if trials >= cfg.max_trials() {
            break FeasibilityStatus::TrialLimit;
        }
        trials += 1;

        let alpha = state.dtau / (1.0 + state.dtau);
        let z_trial = &state.z + &state.newton_dir * alpha;
        let c_trial = problem.constraints_raw(&z_trial);
        if c_trial.len() != problem.m() {
            return Err(Error::Dimension {
                what: "constraints",
                expected: problem.m(),
                got: c_trial.len(),
            });
        }
        let r = if c_trial.iter().all(|v| v.is_finite()) {
            gcnmtr_ratio(&state.c_val, &c_trial, state.dtau)?
        } else {
            -1.0
        };
        state.dtau = gcnmtr_update_tau(state.dtau, r, cfg);
        if r >= cfg.eta_a {
            debug_assert!(c_trial.norm() <= state.c_val.norm());
            state.z = z_trial;
            state.c_val = c_trial;
            state.success_flag = true;
            accepted_residuals.push(state.c_val.norm());
            let res = inf_norm(&state.c_val);
            if res < best_res {
                best_res = res;
                best_z = state.z.clone();
            }
        } else {
            state.success_flag = false;
            // A direction from reused factors need not be a descent direction
            // at the current point, and shrinking Δτ cannot repair that.
            if !state.factors_current {
                refactor(problem, &mut state, cfg)?;
                jac_evals += 1;
                let qr = state.qr.as_ref().expect("factors computed above");
                state.newton_dir = gcnmtr_direction(qr, &state.c_val)?;
            }
        }
        state.last_ratio = r;
    };

    // The last accepted trial may already be feasible even when a bound fired.
    let status = if best_res < cfg.eps {
        FeasibilityStatus::Converged
    } else {
        status
    };
    Ok(FeasibleResult {
        z: best_z,
        residual: best_res,
        itc: state.itc,
        trials,
        jacobian_evaluations: jac_evals,
        status,
        accepted_residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector, DMatrix};

    fn cfg() -> GcnmtrConfig {
        GcnmtrConfig::default()
    }

    #[test]
    fn direction_coordinate_case() {
        let qr = ThinQr::factor(&dmatrix![1.0; 0.0]).unwrap();
        let d = gcnmtr_direction(&qr, &dvector![2.0]).unwrap();
        assert!((d - dvector![-2.0, 0.0]).amax() < 1e-15);
    }

    #[test]
    fn direction_minimum_norm() {
        let s = 0.5_f64.sqrt();
        let qr = ThinQr::factor(&dmatrix![s; s]).unwrap();
        let d = gcnmtr_direction(&qr, &dvector![2.0_f64.sqrt()]).unwrap();
        assert!((d - dvector![-1.0, -1.0]).amax() < 1e-14);
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(gcnmtr_ratio(&dvector![1.0], &dvector![0.0], 1.0).unwrap(), 2.0);
        assert_eq!(gcnmtr_ratio(&dvector![1.0], &dvector![1.5], 1.0).unwrap(), -1.0);
        let dtau = 0.3;
        let c = dvector![0.6, -0.8];
        let r = gcnmtr_ratio(&c, &(&c / (1.0 + dtau)), dtau).unwrap();
        assert!((r - 1.0).abs() < 1e-14);
        assert!(matches!(
            gcnmtr_ratio(&dvector![0.0], &dvector![0.0], 1.0),
            Err(Error::InternalInvariant(_))
        ));
    }

    #[test]
    fn tau_update_branches() {
        let c = cfg();
        assert_eq!(gcnmtr_update_tau(0.01, 1.0, &c), 0.02);
        assert_eq!(gcnmtr_update_tau(0.01, 0.5, &c), 0.01);
        assert_eq!(gcnmtr_update_tau(0.01, -1.0, &c), 0.005);
    }

    #[test]
    fn jacobian_reuse_rule() {
        let c = cfg();
        assert!(gcnmtr_jacobian_reuse(0.9, &c));
        assert!(!gcnmtr_jacobian_reuse(0.0, &c));
        assert!(!gcnmtr_jacobian_reuse(-1.0, &c));
    }

    fn affine(a: DMatrix<f64>, b: DVector<f64>) -> Problem {
        let n = a.ncols();
        let m = a.nrows();
        let a2 = a.clone();
        Problem::new("affine", DVector::from_element(n, 1.0), |x| x.norm_squared())
            .with_constraints(m, move |x| &a2 * x - &b)
            .with_jacobian(move |_| a.clone())
    }

    #[test]
    fn feasible_start_returns_immediately() {
        let p = affine(dmatrix![1.0, 1.0], dvector![2.0]);
        let res = find_feasible_point(&p, p.start_point(), &cfg()).unwrap();
        assert_eq!(res.status, FeasibilityStatus::Converged);
        assert_eq!(res.itc, 1);
        assert_eq!(res.trials, 0);
        assert_eq!(res.z, *p.start_point());
    }

    #[test]
    fn affine_system_accepted_step_count_matches_closed_form() {
        // Every affine trial has ratio 1, so dtau doubles each step and the
        // residual shrinks by 1/(1+dtau_j) exactly.
        let p = affine(dmatrix![1.0, 2.0, 0.0; 0.0, 1.0, -1.0], dvector![4.0, -1.0]);
        let c0 = inf_norm(&p.constraints(p.start_point()).unwrap());
        let (mut tau, mut res, mut steps) = (1e-2, c0, 0);
        while res >= 1e-7 {
            res /= 1.0 + tau;
            tau *= 2.0;
            steps += 1;
        }
        let out = find_feasible_point(&p, p.start_point(), &cfg()).unwrap();
        assert_eq!(out.status, FeasibilityStatus::Converged);
        assert_eq!(out.trials, steps);
        assert_eq!(out.itc, steps + 1);
        assert_eq!(out.jacobian_evaluations, 1);
    }

    #[test]
    fn large_step_scales_affine_residual() {
        let p = affine(dmatrix![2.0, -1.0, 0.5], dvector![3.0]);
        let c = GcnmtrConfig {
            dtau0: 9.0,
            maxit: 2,
            ..cfg()
        };
        let out = find_feasible_point(&p, p.start_point(), &c).unwrap();
        let ratio = out.accepted_residuals[1] / out.accepted_residuals[0];
        assert!((ratio - 0.1).abs() < 1e-10);
    }

    #[test]
    fn circle_constraint_converges() {
        let p = Problem::new("circle", dvector![3.0, 1.0], |x| x[0])
            .with_constraints(1, |x| dvector![x[0] * x[0] + x[1] * x[1] - 1.0]);
        let out = find_feasible_point(&p, p.start_point(), &cfg()).unwrap();
        assert_eq!(out.status, FeasibilityStatus::Converged);
        assert!(out.residual < 1e-7);
        for w in out.accepted_residuals.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn rank_deficient_jacobian_is_reported() {
        let p = affine(dmatrix![1.0, 1.0; 2.0, 2.0], dvector![1.0, 1.0]);
        assert!(matches!(
            find_feasible_point(&p, p.start_point(), &cfg()),
            Err(Error::RankDeficiency { .. })
        ));
    }

    #[test]
    fn max_iterations_returns_best_point() {
        let p = Problem::new("far", dvector![10.0], |x| x[0])
            .with_constraints(1, |x| dvector![x[0].exp() - 1.0]);
        let c = GcnmtrConfig { maxit: 3, ..cfg() };
        let out = find_feasible_point(&p, p.start_point(), &c).unwrap();
        assert_eq!(out.status, FeasibilityStatus::MaxIterations);
        assert!(out.residual < (10.0_f64).exp() - 1.0);
    }
}
