use condwalk::experiment::ks_distance;
use condwalk::ladder::{build_renewal, Sign};
use condwalk::limits::{LimitCdf, Regime};
use condwalk::stable::{normal_cdf, normal_pdf, scaling};
use condwalk::walk::{
    empirical_cdf_from_values, sample_conditioned_htransform, sample_conditioned_rejection, sample_conditioned_spliced,
    sample_htransform_unconditioned, window_functionals_slice, ConditionedSample, ConditioningEvent,
};
use condwalk::StableParams;
use proptest::prelude::*;

const N: usize = 256;

/// Five bounded functionals of a conditioned path with n = 256, x = a_16 = 4.
fn functionals(s: &[f64]) -> [f64; 5] {
    let w = window_functionals_slice(s, N / 2, N).unwrap();
    [
        f64::from(w.l_rn <= 2.0),
        s[N] / 4.0,
        (-s[N / 2] / 16.0).exp(),
        (window_functionals_slice(s, N / 4, N).unwrap().l_rn / 4.0).min(1.0),
        f64::from(w.tau_rn >= N - 16),
    ]
}

fn weighted_means(sample: &ConditionedSample<[f64; 5]>) -> [f64; 5] {
    let total: f64 = sample.weights.iter().sum();
    let mut out = [0.0; 5];
    for (r, w) in sample.records.iter().zip(&sample.weights) {
        for i in 0..5 {
            out[i] += w * r[i] / total;
        }
    }
    out
}

/// Means and standard errors over independent replicate runs.
fn replicate(runs: &[[f64; 5]]) -> ([f64; 5], [f64; 5]) {
    let n = runs.len() as f64;
    let mut mean = [0.0; 5];
    let mut se = [0.0; 5];
    for i in 0..5 {
        mean[i] = runs.iter().map(|r| r[i]).sum::<f64>() / n;
        let var = runs.iter().map(|r| (r[i] - mean[i]).powi(2)).sum::<f64>() / (n - 1.0);
        se[i] = (var / n).sqrt();
    }
    (mean, se)
}

#[test]
fn three_samplers_agree_on_the_conditioned_law() {
    let p = StableParams::gaussian();
    let ev = ConditioningEvent::new(4.0, N).unwrap();
    let table = build_renewal(&p, Sign::Minus, N as u64, 3000, 50, 5).unwrap();
    let mut rej = Vec::new();
    let mut spl = Vec::new();
    let mut ht = Vec::new();
    for rep in 0..8u64 {
        let s = sample_conditioned_rejection(&p, 0.0, &ev, 1500, u64::MAX, 100 + rep, functionals).unwrap();
        rej.push(weighted_means(&s));
        let s = sample_conditioned_spliced(&p, 0.0, &ev, 1500, 200 + rep, functionals).unwrap();
        spl.push(weighted_means(&s));
        let s = sample_conditioned_htransform(&p, 0.0, &ev, &table, 1500, 300 + rep, functionals).unwrap();
        ht.push(weighted_means(&s));
    }
    let (mr, sr) = replicate(&rej);
    for (name, runs) in [("spliced", &spl), ("h-transform", &ht)] {
        let (m, s) = replicate(runs);
        for i in 0..5 {
            let sigma = sr[i].hypot(s[i]);
            assert!((m[i] - mr[i]).abs() <= 3.0 * sigma, "{name}, functional {i}: {} vs rejection {} (σ = {sigma})", m[i], mr[i]);
        }
    }
}

#[test]
fn conditioned_paths_satisfy_the_event() {
    let p = StableParams::new(1.5, 0.3, 1.0).unwrap();
    let ev = ConditioningEvent::new(3.0, 64).unwrap();
    let s = sample_conditioned_rejection(&p, 0.5, &ev, 500, u64::MAX, 1, |s: &[f64]| s.to_vec()).unwrap();
    assert!(s.records.iter().all(|path| ev.holds(path) && path[0] == 0.5));
    let table = build_renewal(&p, Sign::Minus, 64, 500, 30, 2).unwrap();
    let s = sample_conditioned_htransform(&p, 0.5, &ev, &table, 500, 3, |s: &[f64]| s.to_vec()).unwrap();
    assert!(s.records.iter().all(|path| ev.holds(path)));
    assert!(s.weights.iter().all(|w| *w > 0.0));
}

#[test]
fn identical_seeds_give_identical_samples() {
    let p = StableParams::gaussian();
    let ev = ConditioningEvent::new(4.0, 512).unwrap();
    let a = sample_conditioned_spliced(&p, 0.0, &ev, 300, 77, |s: &[f64]| s[256]).unwrap();
    let b = sample_conditioned_spliced(&p, 0.0, &ev, 300, 77, |s: &[f64]| s[256]).unwrap();
    let c = sample_conditioned_spliced(&p, 0.0, &ev, 300, 78, |s: &[f64]| s[256]).unwrap();
    assert_eq!(a.records, b.records);
    assert_ne!(a.records, c.records);
}

/// CDF of √(X² + Y² + Z²) for standard normals.
fn chi3_cdf(z: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    2.0 * normal_cdf(z) - 1.0 - 2.0 * z * normal_pdf(z)
}

fn harmonic_endpoint_cdf(p: &StableParams, r: usize, grid: &[f64], seed: u64) -> condwalk::walk::EmpiricalCdf {
    let table = build_renewal(p, Sign::Minus, r as u64, 2000, 50, 8).unwrap();
    let s = sample_htransform_unconditioned(p, 0.0, r, &table, 16_000, seed, |s: &[f64]| s[r]).unwrap();
    let (ar, _) = scaling(p, r as u64);
    empirical_cdf_from_values(&s.records, &s.weights, ar, grid).unwrap()
}

#[test]
fn harmonic_transform_endpoint_settles_between_horizons() {
    let p = StableParams::new(1.5, 0.0, 1.0).unwrap();
    let grid: Vec<f64> = (0..=60).map(|i| 0.1 * i as f64).collect();
    let short = harmonic_endpoint_cdf(&p, 512, &grid, 31);
    let long = harmonic_endpoint_cdf(&p, 2048, &grid, 32);
    let theory = LimitCdf { regime: Regime::R3, grid: grid.clone(), values: long.values.clone(), errors: vec![0.0; grid.len()] };
    let ks = ks_distance(&short, &theory).unwrap();
    assert!(ks <= 0.03, "KS between r=512 and r=2048 is {ks}");
}

#[test]
fn gaussian_harmonic_transform_endpoint_is_chi3() {
    let p = StableParams::gaussian();
    let grid: Vec<f64> = (0..=40).map(|i| 0.1 * i as f64).collect();
    let emp = harmonic_endpoint_cdf(&p, 1024, &grid, 33);
    let worst = grid.iter().zip(&emp.values).map(|(&y, &f)| (f - chi3_cdf(y)).abs()).fold(0.0, f64::max);
    assert!(worst < 0.03, "sup distance to the χ3 law is {worst}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn empirical_cdf_is_monotone_and_bounded(
        values in prop::collection::vec(-5.0f64..5.0, 1..200),
        seed_w in prop::collection::vec(0.01f64..3.0, 200),
        scale in 0.1f64..4.0,
    ) {
        let weights = &seed_w[..values.len()];
        let grid: Vec<f64> = (0..41).map(|i| -3.0 + 0.15 * i as f64).collect();
        let emp = empirical_cdf_from_values(&values, weights, scale, &grid).unwrap();
        for w in emp.values.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
        prop_assert!(emp.values.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!(emp.stderr.iter().all(|e| *e >= 0.0));
        let flat = LimitCdf { regime: Regime::R3, grid: grid.clone(), values: vec![0.5; grid.len()], errors: vec![0.0; grid.len()] };
        let ks = ks_distance(&emp, &flat).unwrap();
        prop_assert!((0.0..=1.0).contains(&ks));
    }

    #[test]
    fn event_membership_matches_its_definition(steps in prop::collection::vec(-2.0f64..2.0, 1..40), x in 0.0f64..3.0) {
        let mut s = vec![0.0];
        for d in &steps {
            s.push(s.last().unwrap() + d);
        }
        let ev = ConditioningEvent::new(x, steps.len()).unwrap();
        let want = s.iter().all(|v| *v >= 0.0) && *s.last().unwrap() <= x;
        prop_assert_eq!(ev.holds(&s), want);
    }
}
