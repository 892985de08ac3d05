//! Full-scale runs of the seeded invariant suites.
//!
//! The in-module unit tests cover the suites at smoke scale; these runs
//! use the case counts the library advertises as its verification
//! baseline and double as a wall-clock sanity check, since each suite is
//! expected to stay interactive.

use std::time::Instant;

use lifespan_core::suites::{run_suite, SUITES};

#[test]
fn identity_suite_at_baseline_scale() {
    let start = Instant::now();
    let report = run_suite("identities", 2024, 200).unwrap();
    assert!(report.passed(), "{:?}", report.counterexample);
    assert_eq!(report.cases, 800, "200 states for each of the four catalog systems");
    assert!(report.max_ratio <= 1.0, "ratio {}", report.max_ratio);
    assert!(start.elapsed().as_secs() < 30, "took {:?}", start.elapsed());
}

#[test]
fn riccati_suite_at_baseline_scale() {
    let start = Instant::now();
    let report = run_suite("riccati", 2024, 1000).unwrap();
    assert!(report.passed(), "{:?}", report.counterexample);
    assert_eq!(report.cases, 1000);
    assert!(report.max_ratio <= 1.0, "ratio {}", report.max_ratio);
    assert!(report.max_ratio > 0.5, "margins never got close: {}", report.max_ratio);
    assert!(start.elapsed().as_secs() < 60, "took {:?}", start.elapsed());
}

#[test]
fn wld_suite_at_baseline_scale() {
    let start = Instant::now();
    let report = run_suite("wld", 2024, 40).unwrap();
    assert!(report.passed(), "{:?}", report.counterexample);
    assert!(start.elapsed().as_secs() < 5, "took {:?}", start.elapsed());
}

#[test]
fn spectral_suite_at_baseline_scale() {
    let report = run_suite("spectral", 2024, 100).unwrap();
    assert!(report.passed(), "{:?}", report.counterexample);
    assert!(report.checks >= 300, "only {} checks", report.checks);
}

#[test]
fn seeds_shift_the_stream_but_not_the_verdict() {
    for seed in [1u64, 7, 99] {
        for name in SUITES {
            let report = run_suite(name, seed, 10).unwrap();
            assert!(report.passed(), "{name} at seed {seed}: {:?}", report.counterexample);
        }
    }
}
