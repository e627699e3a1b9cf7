use sparselab::pipelines::{extremal_search, power_sweep, verify_theorem, write_sweep_csv, Objective, TheoremInput, TheoremParams};
use sparselab::sparse::verify_sparsity;

#[test]
fn objectives_parse_and_print() {
    for s in ["thm-a-ratio", "prop32-ratio:3/2", "thm-c-ratio:2,4,1"] {
        let o: Objective = s.parse().unwrap();
        assert_eq!(o.to_string(), s);
    }
    assert!("thm-c-ratio".parse::<Objective>().is_err());
    assert!("ratio".parse::<Objective>().is_err());
}

#[test]
fn best_never_decreases_and_stays_sparse() {
    for (seed, obj) in [(1, "thm-a-ratio"), (2, "prop32-ratio:2"), (3, "thm-c-ratio:2,4,1")] {
        let out = extremal_search(obj.parse().unwrap(), seed, 120, 4).unwrap();
        assert!(out.trajectory.windows(2).all(|w| w[1].best >= w[0].best));
        assert!(out.trajectory.iter().all(|r| r.current <= r.best));
        assert_eq!(out.best, out.trajectory.last().unwrap().best);
        assert!(verify_sparsity(&out.s).pass);
    }
}

#[test]
fn best_configuration_reproduces_its_value() {
    let out = extremal_search(Objective::ThmA, 8, 80, 4).unwrap();
    let input = TheoremInput { v: out.weight.clone(), h: out.f.clone(), s: out.s.clone(), e: out.e.clone() };
    let trace = verify_theorem(&TheoremParams::endpoint(), &input, 1e-9).unwrap();
    assert_eq!(trace.summary.final_ratio, out.best);
    assert!(trace.steps.iter().all(|s| s.pass));
}

#[test]
fn search_is_deterministic() {
    let a = extremal_search(Objective::ThmA, 4, 60, 4).unwrap();
    let b = extremal_search(Objective::ThmA, 4, 60, 4).unwrap();
    let rows = |o: &sparselab::pipelines::SearchOutcome| o.trajectory.iter().map(|r| (r.current, r.best, r.accepted)).collect::<Vec<_>>();
    assert_eq!(rows(&a), rows(&b));
}

#[test]
fn power_sweep_rows_are_consistent() {
    let rows = power_sweep(6, &[1.0, 0.5, 0.1], 2, 8).unwrap();
    assert_eq!(rows.len(), 3);
    let flat = &rows[0];
    assert!((flat.a1 - 1.0).abs() < 1e-12 && (flat.fw_dyadic - 1.0).abs() < 1e-12);
    for r in &rows {
        assert!(r.fw_dyadic <= r.fw_exact * (1.0 + 1e-12));
        assert!(r.fw_dyadic <= r.a1 * (1.0 + 1e-12));
        assert!(r.measured > 0.0);
    }
    assert!(rows.windows(2).all(|w| w[1].a1 >= w[0].a1));
    let mut a = Vec::new();
    let mut b = Vec::new();
    write_sweep_csv(&rows, &mut a).unwrap();
    write_sweep_csv(&power_sweep(6, &[1.0, 0.5, 0.1], 2, 8).unwrap(), &mut b).unwrap();
    assert_eq!(a, b);
}
