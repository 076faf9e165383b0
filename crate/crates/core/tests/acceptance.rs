//! Acceptance checks, one PASS/FAIL line each. Exits non-zero if any fails.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rcm::bench::{emit_performance_profile, suite_problem_ids, ProfileMetric, SuiteReport, FAILURE_RATIO};
use rcm::gcnmtr::{find_feasible_point, gcnmtr_update_tau, FeasibilityStatus};
use rcm::linalg::{smw_apply_inverse, BfgsFactors, ThinQr};
use rcm::problems::resolve;
use rcm::solver::update_time_step;
use rcm::{solve_with, GcnmtrConfig, Problem, RcmConfig, RunRecord, SolveOptions, SolveOutput, Status};

struct Report {
    failed: usize,
}

impl Report {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        if !ok {
            self.failed += 1;
        }
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn run(id: &str) -> SolveOutput {
    let named = resolve(id).expect("known problem id");
    let p = &named.problem;
    solve_with(p, p.start_point(), &RcmConfig::default(), SolveOptions::default())
}

fn describe(r: &RunRecord) -> String {
    format!(
        "{} {}+{} KKT {:.2e} |c| {:.2e} {:.3}s",
        r.status, r.itc_feasibility, r.itc_main, r.kkt_residual, r.constraint_violation, r.wall_time
    )
}

fn hs_row(report: &mut Report, id: &str, kkt: f64, viol: Option<f64>, iters: usize, seconds: Option<f64>) {
    let r = run(id).record;
    let ok = r.status == Status::Converged
        && r.kkt_residual <= kkt
        && viol.is_none_or(|v| r.constraint_violation <= v)
        && r.total_iterations() <= iters
        && seconds.is_none_or(|s| r.wall_time < s);
    report.check(id, ok, describe(&r));
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let g = random_matrix(rng, n, n);
    &g * g.transpose() + DMatrix::identity(n, n)
}

fn rel(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn constructed_suite(report: &mut Report) {
    let ids = [
        "ackley-trid:n=50,m=10",
        "ackley-rosenbrock:n=50,m=10",
        "ackley-broyden-tridiagonal:n=50,m=10",
        "ackley-discrete-boundary-value:n=50,m=10",
        "ackley-extended-powell-singular:n=50,m=10",
    ];
    let mut passed = 0;
    let mut rows = Vec::new();
    for id in ids {
        let r = run(id).record;
        let ok = r.status == Status::Converged
            && r.kkt_residual <= 1e-6
            && r.constraint_violation <= 1e-7
            && r.itc_main <= 300
            && r.wall_time < 5.0;
        passed += usize::from(ok);
        rows.push(format!("{id} {}", describe(&r)));
    }
    report.check(
        "constructed suite n=50 m=10",
        passed >= 4,
        format!("{passed}/5 within limits\n    {}", rows.join("\n    ")),
    );
}

fn suite_invariants(report: &mut Report) {
    let mut ids = suite_problem_ids("hs").unwrap();
    ids.extend(suite_problem_ids("constructed-small").unwrap());
    let cfg = RcmConfig::default();
    let mut feasibility = 0;
    let mut descent = 0;
    let mut iterates = 0;
    for id in &ids {
        let named = resolve(id).unwrap();
        let p = &named.problem;
        let out = solve_with(p, p.start_point(), &cfg, SolveOptions::default());
        let d = &out.diagnostics;
        iterates += d.accepted_f.len();
        if out.record.status == Status::Converged {
            feasibility += d.accepted_c_inf.iter().filter(|&&c| c > 1e-7 || c.is_nan()).count();
        }
        descent += d.accepted_f.windows(2).filter(|w| w[1] >= w[0] || w[1].is_nan()).count();
    }
    report.check(
        "feasibility preservation",
        feasibility == 0,
        format!("{feasibility} violations over {iterates} accepted iterates of {} runs", ids.len()),
    );
    report.check(
        "monotone descent",
        descent == 0,
        format!("{descent} violations over {iterates} accepted iterates of {} runs", ids.len()),
    );
}

fn smw_oracle(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=16);
        let h = random_spd(&mut rng, n);
        let mut b = BfgsFactors::new(n);
        for _ in 0..rng.gen_range(0..=10) {
            let s = random_vector(&mut rng, n);
            // A few pairs with random y exercise the skipped-update path.
            let y = if rng.gen_bool(0.8) { &h * &s } else { random_vector(&mut rng, n) };
            b = b.append(&s, &y).unwrap();
        }
        let sigma = 10f64.powf(rng.gen_range(-5.0..=2.0));
        let v = random_vector(&mut rng, n);
        let fast = smw_apply_inverse(&b, sigma, &v).unwrap();
        let dense = (b.dense() + DMatrix::identity(n, n) * sigma).lu().solve(&v).unwrap();
        worst = worst.max(rel(&fast, &dense));
    }
    let secs = start.elapsed().as_secs_f64();
    report.check(
        "SMW oracle",
        worst <= 1e-9 && secs < 1.0,
        format!("worst relative error {worst:.2e} over 100 trials in {secs:.3}s"),
    );
}

fn projection_oracle(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut oracle, mut idem, mut null): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..100 {
        let n = rng.gen_range(1..=30);
        let m = rng.gen_range(1..=n);
        let a = random_matrix(&mut rng, m, n);
        let v = random_vector(&mut rng, n);
        let qr = ThinQr::factor(&a.transpose()).unwrap();
        let pv = qr.project(&v);
        let aat = &a * a.transpose();
        let dense = &v - a.transpose() * aat.lu().solve(&(&a * &v)).unwrap();
        oracle = oracle.max((&pv - &dense).amax());
        idem = idem.max((qr.project(&pv) - &pv).amax());
        null = null.max((&a * &pv).amax());
    }
    report.check(
        "projection oracle",
        oracle <= 1e-10 && idem <= 1e-10 && null <= 1e-10,
        format!("oracle {oracle:.2e}, idempotence {idem:.2e}, |A P v| {null:.2e} over 100 trials"),
    );
}

fn bfgs_secant(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst: f64 = 0.0;
    let mut updates = 0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=20);
        let h = random_spd(&mut rng, n);
        let mut b = BfgsFactors::new(n);
        for _ in 0..rng.gen_range(1..=10) {
            let s = random_vector(&mut rng, n);
            let y = if rng.gen_bool(0.8) { &h * &s } else { random_vector(&mut rng, n) };
            b = b.append(&s, &y).unwrap();
            if y.dot(&s) > 0.0 {
                updates += 1;
                worst = worst.max(rel(&(b.dense() * &s), &y));
            }
        }
    }
    report.check(
        "BFGS secant",
        worst <= 1e-10,
        format!("worst relative residual {worst:.2e} over {updates} updates"),
    );
}

fn affine_problem(a: DMatrix<f64>, b: DVector<f64>, z0: DVector<f64>) -> Problem {
    let (m, n) = a.shape();
    let a2 = a.clone();
    Problem::new("affine", z0, |_| 0.0)
        .with_gradient(move |_| DVector::zeros(n))
        .with_constraints(m, move |z| &a * z - &b)
        .with_jacobian(move |_| a2.clone())
}

fn gcnmtr_affine(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let cfg = GcnmtrConfig::default();
    let mut max_steps = 0;
    let mut unconverged = 0;
    let mut endpoint: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(1..=40);
        let m = rng.gen_range(1..=n);
        let a = random_matrix(&mut rng, m, n);
        let b = random_vector(&mut rng, m);
        let z0 = random_vector(&mut rng, n);
        // Least-squares oracle: the projection of z0 onto {z : A z = b}.
        let aat = &a * a.transpose();
        let oracle = &z0 - a.transpose() * aat.lu().solve(&(&a * &z0 - &b)).unwrap();
        let p = affine_problem(a, b, z0.clone());
        let res = find_feasible_point(&p, &z0, &cfg).unwrap();
        if res.status != FeasibilityStatus::Converged {
            unconverged += 1;
        }
        // `itc` counts the final feasibility check as well.
        max_steps = max_steps.max(res.accepted_residuals.len() - 1);
        endpoint = endpoint.max((&res.z - &oracle).amax());
    }
    report.check(
        "GCNMTr affine step count",
        unconverged == 0 && max_steps <= 10,
        format!("up to {max_steps} accepted steps, {unconverged} of 50 unconverged"),
    );
    report.check(
        "GCNMTr affine endpoint",
        unconverged == 0 && endpoint <= 1e-6,
        format!("max distance to least-squares projection {endpoint:.2e}"),
    );
}

fn branch_tables(report: &mut Report) {
    let rc = RcmConfig::default();
    // (dt, rho, accepted, expected)
    let rows = [
        (0.01, 0.8, true, 0.02),
        (0.01, 0.75, true, 0.02),
        (0.01, 1.5, true, 0.02),
        (0.01, 0.5, true, 0.01),
        (0.01, 0.26, true, 0.01),
        (0.01, 0.25, true, 0.005),
        (0.01, 0.1, true, 0.005),
        (0.01, 0.8, false, 0.005),
        (0.01, 0.5, false, 0.005),
        (0.01, -1.0, false, 0.005),
    ];
    let mut bad = Vec::new();
    for (dt, rho, acc, want) in rows {
        let got = update_time_step(dt, rho, acc, &rc);
        if got != want {
            bad.push(format!("dt({dt}, {rho}, {acc}) = {got}, want {want}"));
        }
    }
    let gc = GcnmtrConfig::default();
    // (dtau, r, expected)
    let rows = [
        (0.01, 1.0, 0.02),
        (0.01, 0.75, 0.02),
        (0.01, 1.25, 0.02),
        (0.01, 0.5, 0.01),
        (0.01, 1.5, 0.01),
        (0.01, 0.25, 0.005),
        (0.01, 1.75, 0.005),
        (0.01, 2.0, 0.005),
        (0.01, -1.0, 0.005),
        (0.01, 0.0, 0.005),
    ];
    for (dtau, r, want) in rows {
        let got = gcnmtr_update_tau(dtau, r, &gc);
        if got != want {
            bad.push(format!("tau({dtau}, {r}) = {got}, want {want}"));
        }
    }
    report.check(
        "time-step and pseudo-time branch tables",
        bad.is_empty(),
        if bad.is_empty() { "20 rows exact".into() } else { bad.join("; ") },
    );
}

fn record(problem: &str, status: Status, wall_time: f64) -> RunRecord {
    RunRecord {
        problem: problem.into(),
        n: 1,
        m: 0,
        status,
        x_final: vec![0.0],
        f_final: 0.0,
        kkt_residual: 0.0,
        constraint_violation: 0.0,
        itc_feasibility: 0,
        itc_main: 1,
        trials: 1,
        wall_time,
        min_dt: 0.01,
        message: None,
    }
}

fn suite(label: &str, records: Vec<RunRecord>) -> SuiteReport {
    SuiteReport {
        suite_id: "fixture".into(),
        label: label.into(),
        timestamp: "1970-01-01T00:00:00+00:00".into(),
        config_snapshot: RcmConfig::default(),
        records,
    }
}

fn profile_fixture(report: &mut Report) {
    let names: Vec<String> = (0..10).map(|i| format!("p{i}")).collect();
    let timed = |label: &str, scale: f64, failed: Option<usize>| {
        let recs = names
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let status = if Some(i) == failed { Status::MaxIterations } else { Status::Converged };
                record(p, status, scale * (i + 1) as f64)
            })
            .collect();
        suite(label, recs)
    };
    let mut notes = Vec::new();

    let single = emit_performance_profile(&[timed("a", 1.0, None)], ProfileMetric::Time).unwrap();
    let single_ok = single.taus == vec![1.0] && single.fractions == vec![vec![1.0]];
    notes.push(format!("single solver {:?}", single.fractions[0]));

    let two = emit_performance_profile(&[timed("a", 2.0, None), timed("b", 1.0, None)], ProfileMetric::Time).unwrap();
    let two_ok = two.taus == vec![1.0, 2.0] && two.fractions == vec![vec![0.0, 1.0], vec![1.0, 1.0]];
    notes.push(format!("2x slower knots {:?} {:?}", two.taus, two.fractions[0]));

    let failed = emit_performance_profile(&[timed("a", 1.0, Some(3))], ProfileMetric::Time).unwrap();
    let capped = failed.taus == vec![1.0, FAILURE_RATIO]
        && failed.fractions[0][0] == 0.9
        && failed.at(0, 998.0) == 0.9
        && failed.at(0, FAILURE_RATIO) == 1.0;
    notes.push(format!("one failure knots {:?} {:?}", failed.taus, failed.fractions[0]));

    report.check(
        "performance profile knots",
        single_ok && two_ok && capped,
        notes.join("; "),
    );
}

fn main() {
    let mut report = Report { failed: 0 };
    hs_row(&mut report, "hs008", 1e-6, Some(1e-7), 30, Some(0.1));
    hs_row(&mut report, "hs009", 1e-5, Some(1e-7), 50, Some(0.1));
    hs_row(&mut report, "hs046", 1e-5, None, 200, None);
    constructed_suite(&mut report);
    suite_invariants(&mut report);
    smw_oracle(&mut report);
    projection_oracle(&mut report);
    bfgs_secant(&mut report);
    gcnmtr_affine(&mut report);
    branch_tables(&mut report);
    profile_fixture(&mut report);
    println!("{} failed", report.failed);
    if report.failed > 0 {
        std::process::exit(1);
    }
}
