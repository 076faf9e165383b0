//! The regularization continuation method.
//!
//! Each trial takes a tangent prediction step
//! `s_p = Δt/(1+Δt) · P d` with `((σ0/Δt) I + B) d = −P g`, restores
//! feasibility with one minimum-norm Newton correction, and is then judged
//! by the ratio of actual to predicted decrease of `f`. `Δt` plays the role
//! of a trust-region radius. `B` is a BFGS matrix while the time step stays
//! healthy and the finite-difference projected Hessian once `Δt` has dropped
//! below `dt_illposed`.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gcnmtr::{find_feasible_point, FeasibilityStatus};
use crate::linalg::{inf_norm, max_abs, smw_apply_inverse, BfgsFactors, DenseQr, ThinQr};
use crate::model::{fd_projected_hessian, kkt_report, Problem, RcmConfig, RunRecord, Status};

/// Iterates with `|f|` or `‖x‖∞` beyond this are treated as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    /// Preconditioned by the regularized BFGS matrix.
    WellPosed,
    /// Preconditioned by the regularized projected Hessian.
    IllPosed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RejectReason {
    RatioTooLow,
    Infeasible,
    ArmijoFailed,
    CorrectionTooLarge,
}

/// Mutable state of one solve.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub x: DVector<f64>,
    pub f_val: f64,
    pub g_val: DVector<f64>,
    /// Constraint Jacobian at `x`.
    pub jac: DMatrix<f64>,
    /// Factors of `jacᵀ`.
    pub qr: ThinQr,
    /// Projected gradient `P g`.
    pub pg: DVector<f64>,
    pub dt: f64,
    pub phase: Phase,
    pub bfgs: BfgsFactors,
    /// Projected Hessian behind `hess_qr`.
    pub hess: DMatrix<f64>,
    /// Factors of `(σ0/Δt) I + hess`.
    pub hess_qr: DenseQr,
    /// Accepted-iteration count at which `hess` was evaluated.
    pub hess_evaluated_at: Option<usize>,
    pub last_rho: f64,
    pub d_cached: DVector<f64>,
    pub success_flag: bool,
    /// Accepted iterations.
    pub itc: usize,
    /// Trials, accepted or not.
    pub k: usize,
}

impl SolverState {
    /// State at a point `x` where the constraint factors are already known.
    pub fn at_point(problem: &Problem, x: DVector<f64>, cfg: &RcmConfig) -> Result<Self> {
        let n = problem.n();
        let f_val = problem.objective(&x)?;
        let g_val = problem.gradient(&x)?;
        let (jac, qr) = factor_constraints(problem, &x, cfg.fd_eps)?;
        let pg = qr.project(&g_val);
        Ok(Self {
            x,
            f_val,
            g_val,
            jac,
            qr,
            pg,
            dt: cfg.dt0,
            phase: Phase::WellPosed,
            bfgs: BfgsFactors::new(n),
            hess: DMatrix::identity(n, n),
            hess_qr: DenseQr::identity(n),
            hess_evaluated_at: None,
            last_rho: 0.0,
            d_cached: DVector::zeros(n),
            success_flag: true,
            itc: 0,
            k: 0,
        })
    }

    /// `B s` for the matrix of the current phase.
    pub fn apply_model_matrix(&self, s: &DVector<f64>) -> DVector<f64> {
        match self.phase {
            Phase::WellPosed => self.bfgs.apply(s),
            Phase::IllPosed => &self.hess * s,
        }
    }
}

fn factor_constraints(problem: &Problem, x: &DVector<f64>, fd_eps: f64) -> Result<(DMatrix<f64>, ThinQr)> {
    if problem.m() == 0 {
        return Ok((DMatrix::zeros(0, problem.n()), ThinQr::empty(problem.n())));
    }
    let jac = problem.jacobian(x, fd_eps)?;
    let qr = ThinQr::factor(&jac.transpose())?;
    qr.check_rank()?;
    Ok((jac, qr))
}

/// Everything computed for one trial step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub s_p: DVector<f64>,
    pub s_c: DVector<f64>,
    pub x_trial: DVector<f64>,
    pub f_trial: f64,
    /// `‖c(x_trial)‖∞`.
    pub c_trial_inf: f64,
    /// `q(0) − q(s_p)`.
    pub hpred: f64,
    /// `q(s_p) − q(s_p + s_c)`.
    pub vpred: f64,
    /// `q(0) − q(s)`, evaluated directly.
    pub pred: f64,
    pub ared: f64,
    pub rho: f64,
    pub accepted: bool,
    pub reject_reason: Option<RejectReason>,
}

/// `q(s) = f + sᵀg + ½ sᵀ B s`.
pub fn quadratic_model<F>(f_k: f64, g_k: &DVector<f64>, apply_b: F, s: &DVector<f64>) -> f64
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    f_k + s.dot(g_k) + 0.5 * s.dot(&apply_b(s))
}

/// Time-step update from the ratio and the acceptance verdict.
pub fn update_time_step(dt: f64, rho: f64, accepted: bool, cfg: &RcmConfig) -> f64 {
    if accepted && rho >= cfg.eta2 {
        cfg.gamma1 * dt
    } else if accepted && cfg.eta1 < rho && rho < cfg.eta2 {
        dt
    } else {
        cfg.gamma2 * dt
    }
}

/// One-way switch to the projected-Hessian phase once `Δt < dt_illposed`.
pub fn phase_switch_check(state: &SolverState, cfg: &RcmConfig) -> Phase {
    match state.phase {
        Phase::IllPosed => Phase::IllPosed,
        Phase::WellPosed if state.dt < cfg.dt_illposed => Phase::IllPosed,
        Phase::WellPosed => Phase::WellPosed,
    }
}

/// Refreshes `P ∇²f P` and its regularized factorization when the last ratio
/// was poor, and otherwise keeps the cached factors. Returns whether the
/// factors were rebuilt.
///
/// The first call of a solve always builds the factors. The Hessian itself
/// is only re-evaluated when `x` moved since the last evaluation; after a
/// rejection only the `σ0/Δt` shift changes.
pub fn illposed_hessian_refresh(state: &mut SolverState, problem: &Problem, cfg: &RcmConfig) -> Result<bool> {
    let stale = state.hess_evaluated_at.is_none() || (state.last_rho - 1.0).abs() > cfg.eta1;
    if !stale {
        return Ok(false);
    }
    if state.hess_evaluated_at != Some(state.itc) {
        state.hess = fd_projected_hessian(problem, &state.x, state.qr.q(), cfg.fd_eps)?;
        state.hess_evaluated_at = Some(state.itc);
    }
    let n = problem.n();
    let shifted = &state.hess + DMatrix::identity(n, n) * (cfg.sigma0 / state.dt);
    state.hess_qr = DenseQr::factor(&shifted)?;
    Ok(true)
}

/// Tangent step `s_p = Δt/(1+Δt) · P d`.
///
/// In the BFGS phase `d` is only recomputed after a successful trial; a
/// rejected trial reuses the cached direction with the new step scale.
pub fn prediction_step(state: &mut SolverState, cfg: &RcmConfig) -> Result<DVector<f64>> {
    let d = match state.phase {
        Phase::WellPosed => {
            if state.success_flag {
                let sigma = cfg.sigma0 / state.dt;
                state.d_cached = -smw_apply_inverse(&state.bfgs, sigma, &state.pg)?;
            }
            state.d_cached.clone()
        }
        Phase::IllPosed => {
            let d = state.hess_qr.solve(&(-&state.pg))?;
            state.d_cached = d.clone();
            d
        }
    };
    let alpha = state.dt / (1.0 + state.dt);
    Ok(state.qr.project(&d) * alpha)
}

/// Result of [`correction_step`].
#[derive(Debug, Clone)]
pub struct Correction {
    pub s_c: DVector<f64>,
    pub x_next: DVector<f64>,
    /// `‖c(x_next)‖∞`; infinite when the constraints could not be evaluated.
    pub c_inf: f64,
    /// Whether the Jacobian was re-evaluated at the predicted point.
    pub recomputed: bool,
}

/// Minimum-norm Newton correction back onto `c = 0` from `x_p`.
///
/// The cached factors at `x_k` are tried first; if the result misses
/// `eps0`, the Jacobian is re-evaluated at `x_p` and the solve is redone once.
pub fn correction_step(
    problem: &Problem,
    state: &SolverState,
    x_p: &DVector<f64>,
    cfg: &RcmConfig,
) -> Result<Correction> {
    let n = problem.n();
    if problem.m() == 0 {
        return Ok(Correction {
            s_c: DVector::zeros(n),
            x_next: x_p.clone(),
            c_inf: 0.0,
            recomputed: false,
        });
    }
    let Ok(c_p) = problem.constraints(x_p) else {
        return Ok(Correction {
            s_c: DVector::zeros(n),
            x_next: x_p.clone(),
            c_inf: f64::INFINITY,
            recomputed: false,
        });
    };
    let attempt = |qr: &ThinQr| -> Result<(DVector<f64>, DVector<f64>, f64)> {
        let s_c = qr.min_norm_solve(&(-&c_p))?;
        let x_next = x_p + &s_c;
        let c_inf = problem
            .constraints(&x_next)
            .map(|c| inf_norm(&c))
            .unwrap_or(f64::INFINITY);
        Ok((s_c, x_next, c_inf))
    };
    let (s_c, x_next, c_inf) = attempt(&state.qr)?;
    if c_inf <= cfg.eps0 {
        return Ok(Correction {
            s_c,
            x_next,
            c_inf,
            recomputed: false,
        });
    }
    let retry = factor_constraints(problem, x_p, cfg.fd_eps).and_then(|(_, qr)| attempt(&qr));
    match retry {
        Ok((s_c, x_next, c_inf)) => Ok(Correction {
            s_c,
            x_next,
            c_inf,
            recomputed: true,
        }),
        // A singular Jacobian at the predicted point leaves the first attempt
        // standing; acceptance will reject it as infeasible.
        Err(Error::RankDeficiency { .. }) | Err(Error::NumericalBreakdown(_)) => Ok(Correction {
            s_c,
            x_next,
            c_inf,
            recomputed: true,
        }),
        Err(e) => Err(e),
    }
}

/// Acceptance verdict for a populated outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub accepted: bool,
    pub reason: Option<RejectReason>,
}

/// Accepts iff `ρ ≥ η_a`, `‖c(x_trial)‖∞ ≤ eps0`,
/// `Pred ≥ η_q ‖s_p‖ ‖P g‖` and `‖s_c‖ ≤ θ1 ‖s_p‖`.
pub fn acceptance_test(outcome: &StepOutcome, state: &SolverState, cfg: &RcmConfig) -> Decision {
    let reject = |reason| Decision {
        accepted: false,
        reason: Some(reason),
    };
    if !(outcome.c_trial_inf <= cfg.eps0) {
        return reject(RejectReason::Infeasible);
    }
    let sp_norm = outcome.s_p.norm();
    if !(outcome.pred > 0.0 && outcome.pred >= cfg.eta_q * sp_norm * state.pg.norm()) {
        return reject(RejectReason::ArmijoFailed);
    }
    if !(outcome.rho >= cfg.eta_a) {
        return reject(RejectReason::RatioTooLow);
    }
    if !(outcome.s_c.norm() <= cfg.theta1 * sp_norm) {
        return reject(RejectReason::CorrectionTooLarge);
    }
    Decision {
        accepted: true,
        reason: None,
    }
}

/// One line of the optional iteration trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    #[serde(with = "crate::float_serde")]
    pub dt: f64,
    #[serde(with = "crate::float_serde")]
    pub rho: f64,
    #[serde(with = "crate::float_serde")]
    pub pg_inf: f64,
    #[serde(with = "crate::float_serde")]
    pub c_inf: f64,
    pub phase: Phase,
    pub accepted: bool,
}

/// Runtime checks of the solver's structural guarantees.
///
/// Every counter should stay at zero; they are monitored rather than
/// asserted so a finite-precision violation shows up in the report.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Accepted iterates with `‖c‖∞ > eps0`.
    pub feasibility_violations: usize,
    /// Accepted iterates where `f` did not strictly decrease.
    pub descent_violations: usize,
    /// Trials with `‖A s_p‖∞ > 1e-10 ‖A‖∞ ‖s_p‖∞`.
    pub tangency_violations: usize,
    /// Trials with `|Hpred + Vpred − Pred| > 1e-10 · max(|Pred|, scale)`.
    pub decomposition_violations: usize,
    /// BFGS updates (n ≤ 20) where `B s = y` failed to 1e-8 relative.
    pub secant_violations: usize,
    /// Trial at which the phase switched, if it did.
    pub phase_switch_at: Option<usize>,
    /// `f` at the start point and at every accepted iterate.
    pub accepted_f: Vec<f64>,
    /// `‖c‖∞` at the start point and at every accepted iterate.
    pub accepted_c_inf: Vec<f64>,
    pub rejections: Vec<RejectReason>,
}

impl Diagnostics {
    pub fn is_clean(&self) -> bool {
        self.feasibility_violations == 0
            && self.descent_violations == 0
            && self.tangency_violations == 0
            && self.decomposition_violations == 0
            && self.secant_violations == 0
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveOptions {
    /// Keep one [`TraceRecord`] per trial.
    pub trace: bool,
}

/// Full output of [`solve_with`].
#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub record: RunRecord,
    pub trace: Vec<TraceRecord>,
    pub diagnostics: Diagnostics,
}

/// Solves `problem` from `z0` and returns the run record.
pub fn solve(problem: &Problem, z0: &DVector<f64>, cfg: &RcmConfig) -> RunRecord {
    solve_with(problem, z0, cfg, SolveOptions::default()).record
}

/// Solves `problem` from `z0`, also returning the trace and diagnostics.
///
/// Errors never escape: they end the run with a non-converged status and a
/// message on the record.
pub fn solve_with(problem: &Problem, z0: &DVector<f64>, cfg: &RcmConfig, opts: SolveOptions) -> SolveOutput {
    let start = Instant::now();
    let mut run = Run {
        problem,
        cfg,
        opts,
        trace: Vec::new(),
        diag: Diagnostics::default(),
        itc_feasibility: 0,
        min_dt: cfg.dt0,
    };
    let outcome = run.execute(z0);
    let wall_time = start.elapsed().as_secs_f64();
    let Run {
        trace,
        diag,
        itc_feasibility,
        min_dt,
        ..
    } = run;

    let (x, itc_main, trials, status, message) = match outcome {
        Ok(Finished {
            x,
            itc,
            k,
            exhausted,
        }) => (
            x,
            itc,
            k,
            if exhausted { Status::MaxIterations } else { Status::Converged },
            None,
        ),
        Err(Failure {
            x,
            itc,
            k,
            status,
            error,
        }) => (x, itc, k, status, Some(error.to_string())),
    };

    let f_final = problem.objective_raw(&x);
    // A rank-deficient Jacobian has no multipliers, but the violation is
    // still meaningful.
    let (kkt, viol) = kkt_report(problem, &x, cfg.fd_eps)
        .unwrap_or_else(|_| (f64::INFINITY, inf_norm(&problem.constraints_raw(&x))));
    let status = match status {
        Status::Converged | Status::MaxIterations if kkt <= cfg.eps && viol <= cfg.eps => Status::Converged,
        Status::Converged => Status::MaxIterations,
        other => other,
    };
    SolveOutput {
        record: RunRecord {
            problem: problem.name().to_string(),
            n: problem.n(),
            m: problem.m(),
            status,
            x_final: x.iter().copied().collect(),
            f_final,
            kkt_residual: kkt,
            constraint_violation: viol,
            itc_feasibility,
            itc_main,
            trials,
            wall_time,
            min_dt,
            message,
        },
        trace,
        diagnostics: diag,
    }
}

struct Finished {
    x: DVector<f64>,
    itc: usize,
    k: usize,
    exhausted: bool,
}

struct Failure {
    x: DVector<f64>,
    itc: usize,
    k: usize,
    status: Status,
    error: Error,
}

struct Run<'a> {
    problem: &'a Problem,
    cfg: &'a RcmConfig,
    opts: SolveOptions,
    trace: Vec<TraceRecord>,
    diag: Diagnostics,
    itc_feasibility: usize,
    min_dt: f64,
}

impl Run<'_> {
    fn execute(&mut self, z0: &DVector<f64>) -> std::result::Result<Finished, Failure> {
        let fail = |x: &DVector<f64>, itc, k, status, error| Failure {
            x: x.clone(),
            itc,
            k,
            status,
            error,
        };
        let (problem, cfg) = (self.problem, self.cfg);
        if let Err(e) = cfg.validate() {
            return Err(fail(z0, 0, 0, Status::NumericalBreakdown, e));
        }
        if problem.m() > problem.n() || z0.len() != problem.n() {
            let e = Error::Dimension {
                what: "problem (need m ≤ n and a length-n start point)",
                expected: problem.n(),
                got: if z0.len() != problem.n() { z0.len() } else { problem.m() },
            };
            return Err(fail(z0, 0, 0, Status::NumericalBreakdown, e));
        }

        let x0 = if problem.m() > 0 {
            match find_feasible_point(problem, z0, &cfg.feasibility) {
                Ok(res) => {
                    self.itc_feasibility = res.itc;
                    if res.residual > cfg.eps {
                        let e = Error::NumericalBreakdown(format!(
                            "feasibility phase stopped ({:?}) at ‖c‖∞ = {:.3e}",
                            res.status, res.residual
                        ));
                        return Err(fail(&res.z, 0, 0, Status::FeasibilityFailed, e));
                    }
                    debug_assert!(res.status == FeasibilityStatus::Converged || res.residual <= cfg.eps);
                    res.z
                }
                Err(e) => return Err(fail(z0, 0, 0, Status::FeasibilityFailed, e)),
            }
        } else {
            z0.clone()
        };

        let mut state = match SolverState::at_point(problem, x0.clone(), cfg) {
            Ok(s) => s,
            Err(e) => return Err(fail(&x0, 0, 0, Status::NumericalBreakdown, e)),
        };
        self.diag.accepted_f.push(state.f_val);
        self.diag.accepted_c_inf.push(
            problem
                .constraints(&state.x)
                .map(|c| inf_norm(&c))
                .unwrap_or(f64::INFINITY),
        );

        while inf_norm(&state.pg) > cfg.eps {
            if state.itc >= cfg.max_itc || state.k >= cfg.max_trials() {
                return Ok(Finished {
                    x: state.x,
                    itc: state.itc,
                    k: state.k,
                    exhausted: true,
                });
            }
            if let Err(e) = self.trial(&mut state) {
                let (itc, k) = (state.itc, state.k);
                return Err(fail(&state.x, itc, k, Status::NumericalBreakdown, e));
            }
        }
        Ok(Finished {
            x: state.x,
            itc: state.itc,
            k: state.k,
            exhausted: false,
        })
    }

    fn switch_phase(&mut self, state: &mut SolverState) {
        if state.phase == Phase::WellPosed {
            state.phase = Phase::IllPosed;
            self.diag.phase_switch_at = Some(state.k);
        }
    }

    fn trial(&mut self, state: &mut SolverState) -> Result<()> {
        let (problem, cfg) = (self.problem, self.cfg);
        if phase_switch_check(state, cfg) == Phase::IllPosed {
            self.switch_phase(state);
        }
        if state.phase == Phase::IllPosed {
            illposed_hessian_refresh(state, problem, cfg)?;
        }
        let s_p = match prediction_step(state, cfg) {
            Ok(s) => s,
            Err(Error::IllConditioned { .. }) if state.phase == Phase::WellPosed => {
                self.switch_phase(state);
                illposed_hessian_refresh(state, problem, cfg)?;
                prediction_step(state, cfg)?
            }
            Err(e) => return Err(e),
        };

        let sp_inf = inf_norm(&s_p);
        if problem.m() > 0 && sp_inf > 0.0 {
            let tangency = inf_norm(&(&state.jac * &s_p));
            if tangency > 1e-10 * max_abs(&state.jac) * sp_inf {
                self.diag.tangency_violations += 1;
            }
        }

        let x_p = &state.x + &s_p;
        let corr = correction_step(problem, state, &x_p, cfg)?;
        let s = &s_p + &corr.s_c;
        let f_trial = problem.objective_raw(&corr.x_next);

        // Reductions are formed from q(s) − f directly; subtracting two values
        // of q would cancel away small steps when |f| is large.
        let model_change = |v: &DVector<f64>| quadratic_model(0.0, &state.g_val, |w| state.apply_model_matrix(w), v);
        let dq_sp = model_change(&s_p);
        let dq_s = model_change(&s);
        let hpred = -dq_sp;
        let vpred = dq_sp - dq_s;
        let pred = -dq_s;
        let scale = hpred.abs().max(vpred.abs());
        if (hpred + vpred - pred).abs() > 1e-10 * pred.abs().max(scale) {
            self.diag.decomposition_violations += 1;
        }
        let ared = state.f_val - f_trial;
        let rho = if !f_trial.is_finite() {
            -1.0
        } else if pred != 0.0 {
            ared / pred
        } else {
            0.0
        };

        let mut outcome = StepOutcome {
            s_p,
            s_c: corr.s_c,
            x_trial: corr.x_next,
            f_trial,
            c_trial_inf: corr.c_inf,
            hpred,
            vpred,
            pred,
            ared,
            rho,
            accepted: false,
            reject_reason: None,
        };
        let decision = acceptance_test(&outcome, state, cfg);
        outcome.accepted = decision.accepted;
        outcome.reject_reason = decision.reason;

        if self.opts.trace {
            self.trace.push(TraceRecord {
                k: state.k,
                dt: state.dt,
                rho,
                pg_inf: inf_norm(&state.pg),
                c_inf: outcome.c_trial_inf,
                phase: state.phase,
                accepted: outcome.accepted,
            });
        }

        if outcome.accepted {
            self.commit(state, outcome)?;
        } else if let Some(reason) = outcome.reject_reason {
            self.diag.rejections.push(reason);
        }
        state.dt = update_time_step(state.dt, rho, decision.accepted, cfg);
        self.min_dt = self.min_dt.min(state.dt);
        state.last_rho = rho;
        state.success_flag = decision.accepted;
        state.k += 1;
        Ok(())
    }

    fn commit(&mut self, state: &mut SolverState, outcome: StepOutcome) -> Result<()> {
        let (problem, cfg) = (self.problem, self.cfg);
        let x_new = outcome.x_trial;
        if outcome.f_trial.abs() > DIVERGENCE_LIMIT || inf_norm(&x_new) > DIVERGENCE_LIMIT {
            return Err(Error::NumericalBreakdown(format!(
                "iterate diverged (f = {:e}, ‖x‖∞ = {:e})",
                outcome.f_trial,
                inf_norm(&x_new)
            )));
        }
        if outcome.c_trial_inf > cfg.eps0 {
            self.diag.feasibility_violations += 1;
        }
        let tol = 1e-15 * state.f_val.abs();
        if !(outcome.f_trial < state.f_val + tol) || outcome.f_trial > state.f_val {
            self.diag.descent_violations += 1;
        }

        let g_new = problem.gradient(&x_new)?;
        let (jac_new, qr_new) = factor_constraints(problem, &x_new, cfg.fd_eps)?;
        let pg_new = qr_new.project(&g_new);
        if state.phase == Phase::WellPosed {
            let s = &x_new - &state.x;
            let y = &pg_new - &state.pg;
            let bfgs = state.bfgs.append(&s, &y)?;
            if problem.n() <= 20 && y.dot(&s) > 0.0 {
                let bs = bfgs.dense() * &s;
                if (bs - &y).norm() > 1e-8 * y.norm().max(f64::MIN_POSITIVE) {
                    self.diag.secant_violations += 1;
                }
            }
            state.bfgs = bfgs;
        }

        state.x = x_new;
        state.f_val = outcome.f_trial;
        state.g_val = g_new;
        state.jac = jac_new;
        state.qr = qr_new;
        state.pg = pg_new;
        state.itc += 1;
        self.diag.accepted_f.push(state.f_val);
        self.diag.accepted_c_inf.push(outcome.c_trial_inf);
        Ok(())
    }
}
