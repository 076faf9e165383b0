use proptest::prelude::*;

use rcm::bench::{
    emit_performance_profile, emit_table, parse_csv_table, run_suite, ProfileMetric, SuiteReport, TableFormat,
};
use rcm::{RcmConfig, RunRecord, Status};

fn record(problem: &str, status: Status, wall_time: f64, itc_main: usize) -> RunRecord {
    RunRecord {
        problem: problem.into(),
        n: 3,
        m: 1,
        status,
        x_final: vec![0.1, 1.0 / 3.0, -2.5e-300],
        f_final: std::f64::consts::PI,
        kkt_residual: 3.84e-6,
        constraint_violation: 5.12e-8,
        itc_feasibility: 3,
        itc_main,
        trials: itc_main + 2,
        wall_time,
        min_dt: 1.0 / 7.0,
        message: None,
    }
}

fn report(label: &str, records: Vec<RunRecord>) -> SuiteReport {
    SuiteReport {
        suite_id: "fixture".into(),
        label: label.into(),
        timestamp: "2024-01-01T00:00:00+00:00".into(),
        config_snapshot: RcmConfig::default(),
        records,
    }
}

#[test]
fn empty_report_is_header_only() {
    let r = report("a", Vec::new());
    assert_eq!(emit_table(&r, TableFormat::Text).unwrap().lines().count(), 1);
    assert_eq!(emit_table(&r, TableFormat::Csv).unwrap().lines().count(), 1);
}

#[test]
fn text_row_formatting() {
    let r = report("a", vec![record("hs009", Status::Converged, 0.0123, 0)]);
    let text = emit_table(&r, TableFormat::Text).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.contains(" 3+0 "), "{row}");
    assert!(row.contains("3.84e-06") && row.contains("5.12e-08") && row.contains("1.23e-02"), "{row}");
    assert!(row.ends_with("converged"));
}

#[test]
fn csv_and_json_round_trip() {
    let mut odd = record("ackley-trid:n=50,m=10", Status::MaxIterations, 1e-9, 300);
    odd.kkt_residual = f64::INFINITY;
    odd.f_final = f64::NAN;
    odd.message = Some("quote \" and, comma".into());
    let r = report("a", vec![record("hs008", Status::Converged, 2.5e-5, 0), odd]);

    let csv = emit_table(&r, TableFormat::Csv).unwrap();
    let rows = parse_csv_table(&csv).unwrap();
    assert_eq!(rows.len(), 2);
    for (row, rec) in rows.iter().zip(&r.records) {
        assert_eq!(row.problem, rec.problem);
        assert_eq!(row.status, rec.status);
        assert_eq!((row.itc_feasibility, row.itc_main, row.trials), (rec.itc_feasibility, rec.itc_main, rec.trials));
        assert_eq!(row.wall_time.to_bits(), rec.wall_time.to_bits());
        assert_eq!(row.kkt_residual.to_bits(), rec.kkt_residual.to_bits());
        assert_eq!(row.constraint_violation.to_bits(), rec.constraint_violation.to_bits());
        assert_eq!(row.min_dt.to_bits(), rec.min_dt.to_bits());
        assert!(row.f_final.to_bits() == rec.f_final.to_bits() || (row.f_final.is_nan() && rec.f_final.is_nan()));
    }

    let json = emit_table(&r, TableFormat::Json).unwrap();
    let back: SuiteReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back.records[0], r.records[0]);
    assert!(back.records[1].f_final.is_nan());
    assert_eq!(back.records[1].kkt_residual, f64::INFINITY);
    assert_eq!(back.records[1].message, r.records[1].message);
    assert_eq!(back.config_snapshot, r.config_snapshot);
}

#[test]
fn profile_rejects_mismatched_problem_sets() {
    let a = report("a", vec![record("p1", Status::Converged, 1.0, 1)]);
    let b = report("b", vec![record("p2", Status::Converged, 1.0, 1)]);
    assert!(emit_performance_profile(&[a, b], ProfileMetric::Time).is_err());
    assert!(emit_performance_profile(&[], ProfileMetric::Time).is_err());
}

#[test]
fn profile_by_iterations() {
    let a = report("a", vec![record("p1", Status::Converged, 1.0, 10), record("p2", Status::Converged, 1.0, 30)]);
    let b = report("b", vec![record("p1", Status::Converged, 9.0, 20), record("p2", Status::NumericalBreakdown, 1.0, 3)]);
    let p = emit_performance_profile(&[a, b], ProfileMetric::Iterations).unwrap();
    // Iterations are itc_feasibility + itc_main: 13 vs 23 on p1.
    assert_eq!(p.ratios[1], vec![23.0 / 13.0, 999.0]);
    assert_eq!(p.ratios[0], vec![1.0, 1.0]);
    assert!(p.to_csv().starts_with("tau,a,b\n1,1,0\n"));
}

fn arbitrary_reports() -> impl Strategy<Value = Vec<SuiteReport>> {
    (1usize..=4, 1usize..=12).prop_flat_map(|(solvers, problems)| {
        prop::collection::vec(
            prop::collection::vec((1e-4..10.0f64, any::<bool>()), problems),
            solvers,
        )
        .prop_map(|table| {
            table
                .into_iter()
                .enumerate()
                .map(|(s, row)| {
                    let recs = row
                        .into_iter()
                        .enumerate()
                        .map(|(p, (t, ok))| {
                            let status = if ok { Status::Converged } else { Status::MaxIterations };
                            record(&format!("p{p}"), status, t, 5)
                        })
                        .collect();
                    report(&format!("s{s}"), recs)
                })
                .collect()
        })
    })
}

proptest! {
    #[test]
    fn profiles_are_monotone_and_bounded(reports in arbitrary_reports()) {
        let p = emit_performance_profile(&reports, ProfileMetric::Time).unwrap();
        prop_assert_eq!(p.taus[0], 1.0);
        for f in &p.fractions {
            prop_assert!(f.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(f.iter().all(|&v| (0.0..=1.0).contains(&v)));
            prop_assert_eq!(*f.last().unwrap(), 1.0);
        }
        prop_assert!(p.taus.windows(2).all(|w| w[0] < w[1]));
    }
}

fn without_time(mut r: RunRecord) -> RunRecord {
    r.wall_time = 0.0;
    r
}

#[test]
fn parallel_suite_matches_sequential() {
    let cfg = RcmConfig::default();
    let seq = run_suite("hs", 1, &cfg, None).unwrap();
    let par = run_suite("hs", 4, &cfg, None).unwrap();
    assert_eq!(seq.records.len(), 5);
    assert!(seq.converged() >= 4);
    let a: Vec<_> = seq.records.into_iter().map(without_time).collect();
    let b: Vec<_> = par.records.into_iter().map(without_time).collect();
    assert_eq!(a, b);
}

#[test]
fn constructed_small_respects_iteration_bound() {
    let rep = run_suite("constructed-small", 4, &RcmConfig::default(), None).unwrap();
    assert_eq!(rep.records.len(), 16);
    for r in &rep.records {
        assert!(r.itc_main <= 300, "{}: {}", r.problem, r.itc_main);
    }
}
