use condwalk::experiment::{
    check_triple, convergence_sweep, default_triple, load_report, localization_fraction, run_experiment, serialize_report, sweep_from_report,
    ExperimentPlan, ReportFormat, Triple, CSV_COLUMNS,
};
use condwalk::limits::{Regime, RegimeSpec};
use condwalk::{Error, StableParams};
use proptest::prelude::*;

fn r3_plan(triples: Vec<Triple>, budget: usize, seed: u64) -> ExperimentPlan {
    let spec = RegimeSpec::new(Regime::R3, 1.0, None).unwrap();
    ExperimentPlan::new(StableParams::gaussian(), spec, triples, budget, seed)
}

fn r3_ladder(ns: &[usize]) -> Vec<Triple> {
    ns.iter().map(|&n| default_triple(Regime::R3, n, None)).collect()
}

#[test]
fn reports_survive_csv_and_json_round_trips() {
    let plan = r3_plan(vec![Triple::new(256, 4, 128), Triple::new(512, 4, 256)], 300, 9);
    let report = run_experiment(&plan).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for (format, name) in [(ReportFormat::Csv, "r.csv"), (ReportFormat::Json, "r.json")] {
        let path = dir.path().join(name);
        serialize_report(&report, format, &path).unwrap();
        assert_eq!(load_report(&path).unwrap(), report, "{name}");
    }
    let text = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# schema_version="));
    assert!(lines[1].starts_with("# meta="));
    assert_eq!(lines[2], CSV_COLUMNS.join(","));
    let grid = plan.y_grid.len();
    assert_eq!(lines.len(), 3 + 2 * grid);
}

#[test]
fn unknown_formats_and_files_are_rejected() {
    assert!(matches!("xml".parse::<ReportFormat>(), Err(Error::UnknownFormat(_))));
    assert_eq!("JSON".parse::<ReportFormat>().unwrap(), ReportFormat::Json);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "regime,alpha\nr3,2\n").unwrap();
    assert!(load_report(&path).is_err());
    assert!(matches!(load_report(&dir.path().join("missing.csv")), Err(Error::IoFailure(_))));
}

#[test]
fn wrong_rho_in_the_theory_is_caught() {
    let ladder = r3_ladder(&[1024, 4096, 16384]);
    let (_, honest) = convergence_sweep(&r3_plan(ladder.clone(), 4000, 5)).unwrap();
    let mut plan = r3_plan(ladder, 4000, 5);
    plan.theory_rho = Some(0.7);
    let (_, wrong) = convergence_sweep(&plan).unwrap();
    let (h, w) = (honest.rows.last().unwrap(), wrong.rows.last().unwrap());
    // Same sample, so the gap is systematic; it dwarfs the sampling error.
    assert!(w.ks > 0.1 && w.ks - h.ks > 5.0 * h.ks_error, "honest {} wrong {}", h.ks, w.ks);
}

#[test]
fn the_r3_limit_does_not_depend_on_the_start() {
    let ladder = vec![default_triple(Regime::R3, 4096, None)];
    let base = run_experiment(&r3_plan(ladder.clone(), 4000, 12)).unwrap();
    let mut plan = r3_plan(ladder, 4000, 13);
    plan.w = 1.0;
    let shifted = run_experiment(&plan).unwrap();
    let (a, b) = (&base.triples[0], &shifted.triples[0]);
    let err = a.ks_error.unwrap().hypot(b.ks_error.unwrap());
    assert!((a.ks.unwrap() - b.ks.unwrap()).abs() < 4.0 * err + 0.01, "w=0: {:?}, w=1: {:?}", a.ks, b.ks);
}

#[test]
fn the_r1_limit_does_not_depend_on_the_start() {
    let spec = RegimeSpec::new(Regime::R1, 1.0, None).unwrap();
    let tr = vec![default_triple(Regime::R1, 4096, None)];
    let p = StableParams::gaussian();
    let base = run_experiment(&ExperimentPlan::new(p, spec, tr.clone(), 3000, 21)).unwrap();
    let mut plan = ExperimentPlan::new(p, spec, tr, 3000, 22);
    plan.w = 1.0;
    let shifted = run_experiment(&plan).unwrap();
    let (a, b) = (&base.triples[0], &shifted.triples[0]);
    let err = a.ks_error.unwrap().hypot(b.ks_error.unwrap());
    assert!((a.ks.unwrap() - b.ks.unwrap()).abs() < 4.0 * err + 0.01, "w=0: {:?}, w=1: {:?}", a.ks, b.ks);
}

#[test]
fn sweeps_need_three_points() {
    let plan = r3_plan(r3_ladder(&[1024]), 100, 1);
    assert!(matches!(convergence_sweep(&plan), Err(Error::DomainError(_))));
    let report = run_experiment(&r3_plan(r3_ladder(&[1024, 2048]), 100, 1)).unwrap();
    assert!(sweep_from_report(&report).is_err());
}

#[test]
fn symmetric_window_localizes_trivially() {
    let rows = localization_fraction(&r3_plan(vec![Triple::new(1024, 4, 512)], 500, 3)).unwrap();
    assert_eq!(rows[0].1, 1.0);
    let rows = localization_fraction(&r3_plan(vec![Triple::new(1024, 4, 256)], 500, 3)).unwrap();
    assert!(rows[0].1 < 1.0 && rows[0].1 > 0.5, "{rows:?}");
}

#[test]
fn plans_reject_bad_inputs() {
    let mut plan = r3_plan(vec![Triple::new(1024, 200, 512)], 100, 1);
    assert!(matches!(plan.validate(), Err(Error::RegimeViolation(_))));
    plan.triples = vec![Triple::new(1024, 4, 512)];
    plan.w = -1.0;
    assert!(matches!(plan.validate(), Err(Error::DomainError(_))));
    plan.w = 0.0;
    plan.theory_rho = Some(1.5);
    assert!(plan.validate().is_err());
    plan.theory_rho = None;
    plan.budget = 0;
    assert!(matches!(plan.validate(), Err(Error::SamplerShortfall(_))));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn default_triples_are_admissible(n in 256usize..(1 << 22), theta in 0.25f64..16.0) {
        for regime in Regime::ALL {
            let th = regime.uses_theta().then_some(theta);
            let spec = RegimeSpec::new(regime, 1.0, th).unwrap();
            let tr = default_triple(regime, n, th);
            // Large θ can push k beyond n/4 at the small end of the range.
            if regime.uses_theta() && 4.0 * theta * (n as f64).sqrt() + 8.0 > n as f64 {
                continue;
            }
            prop_assert!(check_triple(&spec, &tr).is_ok(), "{} n={} θ={}: {:?}", regime, n, theta, tr);
        }
    }
}
