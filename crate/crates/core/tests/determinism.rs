//! Suite reports are byte-stable across runs for a fixed seed, apart from
//! the wall time.

use oscbound_core::verify::{run_suite, SuiteConfig, SuiteId};

#[test]
fn reports_are_reproducible_except_wall_time() {
    for suite in [
        SuiteId::HardyLittlewood,
        SuiteId::Bisection,
        SuiteId::CzdValidity,
    ] {
        let mut cfg = SuiteConfig::with_dim(suite, 2);
        cfg.extents = vec![16, 16];
        cfg.trials = 8;
        cfg.seed = 31415;
        let mut a = run_suite(&cfg).unwrap();
        let mut b = run_suite(&cfg).unwrap();
        a.wall_time_s = 0.0;
        b.wall_time_s = 0.0;
        let ja = serde_json::to_string(&a).unwrap();
        let jb = serde_json::to_string(&b).unwrap();
        assert_eq!(ja, jb, "suite {} not reproducible", suite.name());
    }
}

#[test]
fn different_seeds_differ() {
    let mut cfg = SuiteConfig::with_dim(SuiteId::HardyLittlewood, 2);
    cfg.extents = vec![16, 16];
    cfg.trials = 8;
    cfg.seed = 1;
    let a = run_suite(&cfg).unwrap();
    cfg.seed = 2;
    let b = run_suite(&cfg).unwrap();
    assert_ne!(
        serde_json::to_string(&a.trials).unwrap(),
        serde_json::to_string(&b.trials).unwrap()
    );
}
