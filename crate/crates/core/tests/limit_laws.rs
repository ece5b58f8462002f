use condwalk::limits::{
    limit_curve, limit_r1, limit_r2, limit_r2_printed, limit_r3, limit_r4, limit_r5, limits_csv, remark_from_extremes, remark_identity_residual,
    resolution_check, simulate_levy_extremes, LimitContext, MeanderLaw, Regime, RegimeSpec, LIMITS_CSV_COLUMNS,
};
use condwalk::StableParams;
use proptest::prelude::*;
use std::f64::consts::PI;

/// erfc by its continued fraction for x ≥ 2 and the Maclaurin series below.
fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 2.0 {
        let mut term = x;
        let mut sum = x;
        for n in 1..200 {
            term *= -x * x / n as f64;
            sum += term / (2 * n + 1) as f64;
        }
        return 1.0 - 2.0 / PI.sqrt() * sum;
    }
    let mut f = 0.0;
    for k in (1..120).rev() {
        f = (k as f64 / 2.0) / (x + f);
    }
    (-x * x).exp() / PI.sqrt() / (x + f)
}

fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / 2f64.sqrt())
}

/// P(min_{[0,1]} B ≥ −a, B_1 ≤ b) for standard Brownian motion, by reflection.
fn reflect(a: f64, b: f64) -> f64 {
    if a < 0.0 || b < -a {
        return 0.0;
    }
    phi(b) - 2.0 * phi(-a) + phi(-2.0 * a - b)
}

/// Composite Simpson on [lo, hi].
fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        s += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// A(T, y) for standard Brownian motion: (2/T²) ∫ z P(−z ≤ min, B_1 ≤ T−z, min ≤ y−z) dz.
fn a_oracle(big_t: f64, y: f64) -> f64 {
    let f = |z: f64| z * (reflect(z, big_t - z) - reflect(z - y, big_t - z)).max(0.0);
    let mut total = 0.0;
    let mut cuts = vec![0.0, y.min(big_t), big_t, big_t + 12.0];
    cuts.dedup();
    for w in cuts.windows(2) {
        total += simpson(f, w[0], w[1], 4000);
    }
    2.0 * total / (big_t * big_t)
}

/// W(T, y) for standard Brownian motion: 1 − 2(1 − Φ(y))(1 − y/T)².
fn w_oracle(big_t: f64, y: f64) -> f64 {
    1.0 - 2.0 * (1.0 - phi(y)) * (1.0 - y / big_t).powi(2)
}

fn g() -> StableParams {
    StableParams::gaussian()
}

#[test]
fn brownian_r4_values_match_the_reflection_oracle() {
    for (y, frozen) in [(0.25, 0.33028), (0.5, 0.65229), (0.75, 0.90029)] {
        let v = limit_r4(&g(), 1.0, 1.0, y, 0, 0, 0).unwrap().value;
        assert!((v - a_oracle(1.0, y)).abs() < 1e-7, "y={y}: {v}");
        assert!((v - frozen).abs() < 1e-5, "y={y}: {v} vs frozen {frozen}");
    }
    assert!((limit_r4(&g(), 1.0, 1.0, 1.0, 0, 0, 0).unwrap().value - 1.0).abs() < 1e-8);
}

#[test]
fn brownian_r2_values_match_the_antiderivative_form() {
    let law = MeanderLaw::closed_form(&g()).unwrap();
    let css = law.c_star_star(&g()).unwrap().value;
    assert!((css - (2.0 / PI).sqrt()).abs() < 1e-10);
    for theta in [1.0f64, 4.0, 25.0] {
        let big_t = theta.sqrt();
        for i in 1..=8 {
            let y = big_t * i as f64 / 8.0;
            let v = limit_r2(&g(), &law, css, 1.0, theta, y).unwrap().value;
            assert!((v - w_oracle(big_t, y)).abs() < 1e-7, "θ={theta} y={y}: {v} vs {}", w_oracle(big_t, y));
        }
    }
    let frozen = [(0.25, 0.54854), (0.5, 0.84573), (1.0, 1.0)];
    for (y, want) in frozen {
        assert!((limit_r2(&g(), &law, css, 1.0, 1.0, y).unwrap().value - want).abs() < 1e-5);
    }
}

#[test]
fn brownian_r1_and_r5_closed_forms() {
    let law = MeanderLaw::closed_form(&g()).unwrap();
    let css = law.c_star_star(&g()).unwrap().value;
    for y in [0.1, 0.5, 1.0, 2.0, 3.5] {
        let v = limit_r1(&g(), &law, css, y).unwrap().value;
        assert!((v - (2.0 * phi(y) - 1.0)).abs() < 1e-8);
        let m = limit_r5(&g(), -y, 0, 0, 0).unwrap().value;
        assert!((m - 2.0 * phi(-y)).abs() < 1e-8);
    }
    assert!((limit_r1(&g(), &law, css, 1.0).unwrap().value - 0.682689).abs() < 1e-6);
}

#[test]
fn r3_depends_on_rho_only() {
    let p = StableParams::new(1.5, 0.3, 1.0).unwrap();
    for y in [0.0f64, 0.2, 0.7, 1.0] {
        let want = 1.0 - (1.0 - y).powf(p.alpha * p.rho + 1.0);
        assert!((limit_r3(&p, 1.0, y).unwrap() - want).abs() < 1e-14);
        let q = StableParams::new(1.5, 0.3, 9.0).unwrap();
        assert_eq!(limit_r3(&q, 1.0, y).unwrap(), limit_r3(&p, 1.0, y).unwrap());
    }
}

#[test]
fn corrected_w_is_normalized_and_the_printed_form_is_not() {
    // Any density for g works here: the top normalization is algebraic.
    let p = StableParams::new(1.5, 0.3, 1.0).unwrap();
    let law = MeanderLaw::Rayleigh { sigma: 1.3 };
    let css = law.c_star_star(&p).unwrap().value;
    let top = limit_r2(&p, &law, css, 1.0, 2.0, 2f64.powf(1.0 / 1.5)).unwrap().value;
    assert!((top - 1.0).abs() < 1e-6, "{top}");
    let printed = limit_r2_printed(&p, &law, css, 1.0, 2.0, 2f64.powf(1.0 / 1.5)).unwrap().value;
    assert!((printed - 1.0).abs() > 0.01, "{printed}");
    // With ρ = 1/2 the two forms coincide.
    let law = MeanderLaw::closed_form(&g()).unwrap();
    let css = law.c_star_star(&g()).unwrap().value;
    for y in [0.3, 0.9] {
        let a = limit_r2(&g(), &law, css, 1.0, 1.0, y).unwrap().value;
        let b = limit_r2_printed(&g(), &law, css, 1.0, 1.0, y).unwrap().value;
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn r2_approaches_r1_slowly_in_theta() {
    let law = MeanderLaw::closed_form(&g()).unwrap();
    let css = law.c_star_star(&g()).unwrap().value;
    let gap = |theta: f64| {
        (1..=30)
            .map(|i| {
                let y = 0.1 * i as f64;
                let w = limit_r2(&g(), &law, css, 1.0, theta, y).unwrap().value;
                (w - limit_r1(&g(), &law, css, y).unwrap().value).abs()
            })
            .fold(0.0, f64::max)
    };
    let gaps: Vec<f64> = [100.0, 1e3, 1e4].iter().map(|&t| gap(t)).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]));
    assert!(gaps[2] < 0.02);
    // At θ = 100 the boundary is still about 0.06 away (see the decisions ledger).
    assert!((gaps[0] - 0.0654).abs() < 0.002, "{}", gaps[0]);
}

#[test]
fn r4_with_large_theta_tends_to_a_power_of_the_ratio() {
    for theta in [100.0f64, 1e4] {
        let big_t = theta.sqrt();
        for u in [0.25, 0.5, 0.75] {
            let v = limit_r4(&g(), 1.0, theta, u * big_t, 0, 0, 0).unwrap().value;
            let tol = 4.0 / big_t;
            assert!((v - u * u).abs() < tol, "θ={theta} u={u}: {v}");
        }
    }
}

#[test]
fn remark_identity_holds_in_closed_form() {
    for t in [0.5, 1.0, 2.0] {
        let r = remark_identity_residual(&g(), t, 0, 0, 0).unwrap();
        assert!(r.residual.abs() < 1e-6, "t={t}: {r:?}");
    }
}

#[test]
fn remark_identity_holds_for_a_skewed_law() {
    let p = StableParams::new(1.5, 0.3, 1.0).unwrap();
    let ext = simulate_levy_extremes(&p, 1024, 40_000, 3);
    for t in [0.5, 1.0] {
        let r = remark_from_extremes(&p, &ext, t);
        let rc = resolution_check(&p, &ext, t);
        // Allow for the measured discretization gap on top of the noise.
        let tol = 3.0 * r.error + 2.0 * rc.gap.abs();
        assert!(r.residual.abs() <= tol, "t={t}: {r:?}, gap {}", rc.gap);
    }
}

#[test]
fn csv_header_is_the_documented_one() {
    let spec = RegimeSpec::new(Regime::R3, 1.0, None).unwrap();
    let curve = limit_curve(&spec, &LimitContext::gaussian(&g()).unwrap(), &[0.0, 0.5, 1.0]).unwrap();
    let text = limits_csv(&spec, &curve, &g()).unwrap();
    assert_eq!(text.lines().next().unwrap(), LIMITS_CSV_COLUMNS.join(","));
    assert_eq!(text.lines().nth(2).unwrap(), "r3,2,0,0.5,1,,0.5,0.75,0");
}

fn sorted_grid(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn closed_form_limits_are_monotone_cdfs(raw in prop::collection::vec(0.0f64..1.0, 2..12), theta in 0.2f64..20.0, t in 0.3f64..3.0) {
        let ctx = LimitContext::gaussian(&g()).unwrap();
        for regime in Regime::ALL {
            let spec = RegimeSpec::new(regime, t, regime.uses_theta().then_some(theta)).unwrap();
            let (lo, hi) = spec.y_domain(&g());
            let hi = if hi.is_finite() { hi } else { 5.0 };
            let lo = if lo.is_finite() { lo } else { -5.0 };
            let grid = sorted_grid(raw.iter().map(|u| lo + u * (hi - lo)).collect());
            let curve = limit_curve(&spec, &ctx, &grid).unwrap();
            for v in &curve.values {
                prop_assert!((-1e-9..=1.0 + 1e-9).contains(v), "{regime}: {v}");
            }
            for w in curve.values.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-9, "{regime}: {w:?}");
            }
        }
    }

    #[test]
    fn r3_is_a_cdf_for_any_rho(alpha in 1.1f64..1.9, beta in -0.8f64..0.8, t in 0.2f64..4.0, u in 0.0f64..1.0, du in 0.0f64..1.0) {
        let p = StableParams::new(alpha, beta, 1.0).unwrap();
        let y0 = u * t;
        let y1 = (u + du).min(1.0) * t;
        let (a, b) = (limit_r3(&p, t, y0).unwrap(), limit_r3(&p, t, y1).unwrap());
        prop_assert!((0.0..=1.0).contains(&a) && b >= a);
    }
}
