//! Cross-module invariants on the fuzzed corpus (the generator families are
//! covered by in-module property tests).

mod common;

use common::fuzz_metric;
use supembed::frechet::{frechet_sigma, frechet_translated};
use supembed::NormSpec;

#[test]
fn separation_bound_holds_on_fuzzed_metrics() {
    let mut checked = 0usize;
    for seed in 0..150u64 {
        let space = fuzz_metric(seed.wrapping_add(50_000), 3, 40);
        let report = space.concavity_report().unwrap();
        if report.gap <= 0.0 {
            continue; // tight shortest-path triangles; the bound is about positive gaps
        }
        assert!(
            report.separation >= report.gap / 2.0 - 1e-12,
            "seed {seed}: separation {} below gap/2 = {}",
            report.separation,
            report.gap / 2.0
        );
        checked += 1;
    }
    assert!(checked > 100, "corpus unexpectedly degenerate: {checked} usable spaces");
}

#[test]
fn translation_preserves_distances_on_fuzzed_metrics() {
    for seed in 0..60u64 {
        let space = fuzz_metric(seed.wrapping_add(60_000), 2, 30);
        let n = space.len();
        let sigma = frechet_sigma(&space).unwrap();
        let translated = frechet_translated(&space).unwrap();
        let sup = NormSpec::sup(n).unwrap();
        let tol = 4.0 * f64::EPSILON * space.diameter().max(1.0);
        for i in 0..n {
            for j in (i + 1)..n {
                let ds: Vec<f64> =
                    sigma.points[i].iter().zip(&sigma.points[j]).map(|(a, b)| a - b).collect();
                let dt: Vec<f64> = translated.points[i]
                    .iter()
                    .zip(&translated.points[j])
                    .map(|(a, b)| a - b)
                    .collect();
                let d1 = sup.eval(&ds).unwrap();
                let d2 = sup.eval(&dt).unwrap();
                assert!(
                    (d1 - d2).abs() <= tol,
                    "seed {seed} pair ({i},{j}): sigma {d1} vs translated {d2}"
                );
            }
        }
    }
}
