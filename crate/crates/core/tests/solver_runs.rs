use hamlink_core::{
    find_critical_points, maximize_i, two_solution_certificate, Classification,
    CriticalPointRecord, FunctionalContext, SolverConfig,
};

fn ctx() -> FunctionalContext {
    FunctionalContext::example31(6, 3, 1.0, 3.0, 0.01, 0.25).unwrap()
}

fn in_pool(threads: usize, cfg: &SolverConfig) -> Vec<CriticalPointRecord> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap();
    pool.install(|| find_critical_points(&ctx(), cfg).unwrap())
}

#[test]
fn thread_count_does_not_change_results() {
    let cfg = SolverConfig::default();
    let one = in_pool(1, &cfg);
    let four = in_pool(4, &cfg);
    assert_eq!(one.len(), four.len());
    for (a, b) in one.iter().zip(&four) {
        assert_eq!(a.point.as_slice(), b.point.as_slice());
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.orbit_id, b.orbit_id);
    }
}

#[test]
fn more_restarts_never_lose_orbits() {
    let base = SolverConfig::default();
    let doubled = SolverConfig {
        restarts: 2 * base.restarts,
        ..base
    };
    let few = find_critical_points(&ctx(), &base).unwrap();
    let many = find_critical_points(&ctx(), &doubled).unwrap();
    for r in &few {
        let seen = many
            .iter()
            .any(|s| s.point.distance(&r.point) <= base.merge_tol);
        assert!(seen, "lost critical point at I = {}", r.value);
    }
}

#[test]
fn maximum_value_is_pinned() {
    let best = maximize_i(&ctx(), &SolverConfig::default()).unwrap();
    assert!((best.value - 256.6504203595796).abs() < 1e-9);
    assert_eq!(best.classification, Classification::Nonconstant);
    assert_eq!(best.morse.index, 6);
}

#[test]
fn example_is_certified() {
    let cfg = SolverConfig::default();
    let cert = two_solution_certificate(&ctx(), &cfg).unwrap();
    assert!(cert.certified(), "{:?}", cert.verdict);
    assert!(cert.distinct_orbits >= 2);
    let c0 = cert.c0.unwrap();
    for r in &cert.records {
        assert!(r.value <= c0 + 1e-9);
        assert!(r.grad_norm <= cfg.grad_tol);
    }
    let trivial: Vec<_> = cert
        .records
        .iter()
        .filter(|r| r.classification == Classification::Trivial)
        .collect();
    assert_eq!(trivial.len(), 1);
}

#[test]
fn records_are_sorted_by_value() {
    let recs = find_critical_points(&ctx(), &SolverConfig::default()).unwrap();
    for w in recs.windows(2) {
        assert!(w[0].value >= w[1].value);
    }
}
