//! Stable laws with characteristic function
//! `exp{-c|w|^α (1 - iβ sgn(w) tan(πα/2))}`: parameters, density and CDF by
//! Fourier inversion, exact sampling, and the scaling sequences a_n, b_n.

use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_breaks, QuadResult};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// |G(w)| below this value is treated as zero when truncating the inversion integrals.
const CF_CUTOFF: f64 = 1e-12;
const INVERSION_ABS_TOL: f64 = 1e-8;
/// Tail probability at which `cdf` switches to the leading power-law term.
const TAIL_SWITCH: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    /// Mass of the law on (0, ∞).
    pub rho: f64,
}

fn in_set_a(alpha: f64, beta: f64) -> bool {
    if !(alpha > 0.0 && alpha <= 2.0) || !beta.is_finite() {
        return false;
    }
    if alpha == 2.0 || alpha == 1.0 {
        beta == 0.0
    } else {
        beta.abs() < 1.0
    }
}

/// Checks (α, β, c) and computes ρ.
pub fn validate_params(alpha: f64, beta: f64, c: f64) -> Result<StableParams> {
    if !in_set_a(alpha, beta) {
        return Err(Error::OutOfSetA { alpha, beta });
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::NonpositiveScale(c));
    }
    let mut p = StableParams { alpha, beta, c, rho: 0.5 };
    if beta != 0.0 {
        p.rho = 1.0 - cdf(&p, 0.0)?;
    }
    Ok(p)
}

impl StableParams {
    /// Shorthand for tests and defaults where the parameters are known to be valid.
    pub fn new(alpha: f64, beta: f64, c: f64) -> Result<Self> {
        validate_params(alpha, beta, c)
    }

    /// The standard normal convention: α=2, c=1/2.
    pub fn gaussian() -> Self {
        StableParams { alpha: 2.0, beta: 0.0, c: 0.5, rho: 0.5 }
    }

    pub fn is_gaussian(&self) -> bool {
        self.alpha == 2.0
    }

    /// Law of −X: same α and c, β flipped, ρ ↦ 1−ρ.
    pub fn reflected(&self) -> Self {
        StableParams { alpha: self.alpha, beta: -self.beta, c: self.c, rho: 1.0 - self.rho }
    }

    /// Natural scale c^{1/α} of a single increment.
    pub fn scale(&self) -> f64 {
        self.c.powf(1.0 / self.alpha)
    }

    fn skew_tan(&self) -> f64 {
        if self.beta == 0.0 {
            0.0
        } else {
            self.beta * (PI * self.alpha / 2.0).tan()
        }
    }

    /// Upper frequency beyond which |G(w)| < 1e-12.
    fn frequency_cutoff(&self) -> f64 {
        ((1.0 / CF_CUTOFF).ln() / self.c).powf(1.0 / self.alpha)
    }

    /// Leading coefficient K± in P(±X > x) ~ K± x^{−α} (α < 2).
    fn tail_coefficient(&self, upper: bool) -> f64 {
        let side = if upper { 1.0 + self.beta } else { 1.0 - self.beta };
        self.c * side * libm::tgamma(self.alpha) * (PI * self.alpha / 2.0).sin() / PI
    }

    /// Distance from the origin beyond which `cdf` uses the power-law tail.
    fn tail_switch_point(&self, upper: bool) -> f64 {
        if self.is_gaussian() {
            return f64::INFINITY;
        }
        let k = self.tail_coefficient(upper);
        (k / TAIL_SWITCH).powf(1.0 / self.alpha).max(10.0 * self.scale())
    }
}

fn oscillation_breaks(w_max: f64, freq: f64) -> Vec<f64> {
    // One break per half period of cos(wx), at least 8 pieces.
    let pieces = ((w_max * freq / PI).ceil() as usize).clamp(8, 200_000);
    (0..=pieces).map(|i| w_max * i as f64 / pieces as f64).collect()
}

fn inversion<F: Fn(f64) -> f64>(f: F, w_max: f64, freq: f64) -> Result<QuadResult> {
    let breaks = oscillation_breaks(w_max, freq);
    let budget = breaks.len() * 4 + 4000;
    integrate_with_breaks(f, &breaks, INVERSION_ABS_TOL, 0.0, budget)
}

/// Density g_{α,β}(x) by inversion of the characteristic function.
pub fn density(p: &StableParams, x: f64) -> Result<f64> {
    let k = p.c * p.skew_tan();
    let (alpha, c) = (p.alpha, p.c);
    let w_max = p.frequency_cutoff();
    let integrand = |w: f64| {
        let wa = w.powf(alpha);
        (-c * wa).exp() * (k * wa - w * x).cos()
    };
    let r = inversion(integrand, w_max, x.abs() + k.abs())?;
    Ok((r.value / PI).max(0.0))
}

/// Distribution function via the Gil-Pelaez formula; far tails use the
/// leading regular-variation term.
pub fn cdf(p: &StableParams, x: f64) -> Result<f64> {
    if x == f64::INFINITY {
        return Ok(1.0);
    }
    if x == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if x.is_nan() {
        return Err(Error::DomainError("cdf at NaN".into()));
    }
    if x > p.tail_switch_point(true) {
        return Ok(1.0 - p.tail_coefficient(true) * x.powf(-p.alpha));
    }
    if x < -p.tail_switch_point(false) {
        return Ok(p.tail_coefficient(false) * (-x).powf(-p.alpha));
    }
    let k = p.c * p.skew_tan();
    let (alpha, c) = (p.alpha, p.c);
    let w_max = p.frequency_cutoff();
    let integrand = |w: f64| {
        let wa = w.powf(alpha);
        (-c * wa).exp() * (k * wa - w * x).sin() / w
    };
    let r = inversion(integrand, w_max, x.abs() + k.abs())?;
    Ok((0.5 - r.value / PI).clamp(0.0, 1.0))
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Tabulated CDF for fast repeated evaluation (KS statistics on large samples).
/// Nodes are uniform in asinh(x/scale); evaluation interpolates linearly.
#[derive(Debug, Clone)]
pub struct CdfTable {
    params: StableParams,
    scale: f64,
    u_lo: f64,
    step: f64,
    values: Vec<f64>,
}

impl CdfTable {
    pub fn new(p: &StableParams, nodes: usize) -> Result<Self> {
        let nodes = nodes.max(16);
        let scale = p.scale();
        let reach = if p.is_gaussian() { 12.0 * (2.0 * p.c).sqrt() } else { p.tail_switch_point(true).max(p.tail_switch_point(false)) };
        let u_hi = (reach / scale).asinh();
        let u_lo = -u_hi;
        let step = (u_hi - u_lo) / (nodes - 1) as f64;
        let mut values = Vec::with_capacity(nodes);
        for i in 0..nodes {
            let x = scale * (u_lo + step * i as f64).sinh();
            values.push(cdf(p, x)?);
        }
        // Quadrature noise can break monotonicity by ~1e-9; repair it.
        for i in 1..values.len() {
            if values[i] < values[i - 1] {
                values[i] = values[i - 1];
            }
        }
        Ok(CdfTable { params: *p, scale, u_lo, step, values })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let u = (x / self.scale).asinh();
        let pos = (u - self.u_lo) / self.step;
        if pos < 0.0 || pos >= (self.values.len() - 1) as f64 {
            return cdf(&self.params, x).unwrap_or(if x > 0.0 { 1.0 } else { 0.0 });
        }
        let i = pos.floor() as usize;
        let f = pos - i as f64;
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }
}

/// Exact sampler for G_{α,β} with scale c (Chambers–Mallows–Stuck; a plain
/// normal draw at α=2).
#[derive(Debug, Clone, Copy)]
pub struct IncrementSampler {
    alpha: f64,
    inv_alpha: f64,
    shift: f64,
    factor: f64,
    expo: f64,
    kind: Kind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Gaussian,
    Cauchy,
    General,
}

impl IncrementSampler {
    pub fn new(p: &StableParams) -> Self {
        let alpha = p.alpha;
        if p.is_gaussian() {
            return IncrementSampler { alpha, inv_alpha: 0.5, shift: 0.0, factor: (2.0 * p.c).sqrt(), expo: 0.0, kind: Kind::Gaussian };
        }
        if alpha == 1.0 {
            return IncrementSampler { alpha, inv_alpha: 1.0, shift: 0.0, factor: p.c, expo: 0.0, kind: Kind::Cauchy };
        }
        let zeta = p.skew_tan();
        let shift = zeta.atan() / alpha;
        let s = (1.0 + zeta * zeta).powf(1.0 / (2.0 * alpha));
        IncrementSampler { alpha, inv_alpha: 1.0 / alpha, shift, factor: s * p.scale(), expo: (1.0 - alpha) / alpha, kind: Kind::General }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            Kind::Gaussian => {
                let z: f64 = StandardNormal.sample(rng);
                self.factor * z
            }
            Kind::Cauchy => {
                let u: f64 = open01(rng);
                self.factor * (PI * (u - 0.5)).tan()
            }
            Kind::General => {
                let v = PI * (open01(rng) - 0.5);
                let e = -open01(rng).ln();
                let t = self.alpha * (v + self.shift);
                let log_mag = -self.inv_alpha * v.cos().ln() + self.expo * ((v - t).cos().ln() - e.ln());
                self.factor * t.sin() * log_mag.exp()
            }
        }
    }
}

#[inline]
fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // 53-bit uniform on (0,1).
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// One draw from G_{α,β}.
pub fn sample_increment<R: Rng + ?Sized>(p: &StableParams, rng: &mut R) -> f64 {
    IncrementSampler::new(p).sample(rng)
}

/// a_n = n^{1/α}, b_n = 1/(n a_n).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingSequence {
    pub alpha: f64,
}

impl ScalingSequence {
    pub fn a(&self, n: f64) -> f64 {
        n.powf(1.0 / self.alpha)
    }
    pub fn b(&self, n: f64) -> f64 {
        1.0 / (n * self.a(n))
    }
}

pub fn scaling(p: &StableParams, n: u64) -> (f64, f64) {
    let s = ScalingSequence { alpha: p.alpha };
    (s.a(n as f64), s.b(n as f64))
}

/// Σ_{j=k}^{n−k} b_j b_{n−j} · a_k / b_n.
pub fn lemma1_ratio(alpha: f64, n: u64, k: u64) -> f64 {
    let s = ScalingSequence { alpha };
    let mut sum = 0.0;
    for j in k..=(n - k) {
        sum += s.b(j as f64) * s.b((n - j) as f64);
    }
    sum * s.a(k as f64) / s.b(n as f64)
}

/// Largest Lemma-1 ratio over n ∈ [n_lo, n_hi], 1 ≤ k ≤ n/4.
pub fn lemma1_constant(alpha: f64, n_lo: u64, n_hi: u64) -> f64 {
    let s = ScalingSequence { alpha };
    let b: Vec<f64> = (0..=n_hi).map(|j| if j == 0 { 0.0 } else { s.b(j as f64) }).collect();
    let mut worst: f64 = 0.0;
    for n in n_lo..=n_hi {
        let n_us = n as usize;
        // Start from the full sum over j ∈ [1, n−1] and peel both ends as k grows.
        let mut sum: f64 = (1..n_us).map(|j| b[j] * b[n_us - j]).sum();
        for k in 1..=n_us / 4 {
            if k > 1 {
                sum -= b[k - 1] * b[n_us - k + 1];
                sum -= b[n_us - k + 1] * b[k - 1];
            }
            worst = worst.max(sum * s.a(k as f64) / b[n_us]);
        }
    }
    worst
}

/// Crude a-priori bound 2·(b_{⌊n/2⌋}/b_n)·(1+α) on the Lemma-1 ratio.
pub fn lemma1_bound(alpha: f64) -> f64 {
    2.0 * 2f64.powf(1.0 + 1.0 / alpha) * (1.0 + alpha)
}

/// Returns (Σ_{j≥k} b_j · a_k/α, width of the bracket on the truncation remainder).
pub fn tauberian_ratio(alpha: f64, k: u64) -> (f64, f64) {
    let s = ScalingSequence { alpha };
    let j_max = k + 1_000_000;
    let mut sum = 0.0;
    // Summing small terms first limits rounding.
    for j in (k..=j_max).rev() {
        sum += s.b(j as f64);
    }
    // Σ_{j>J} j^{−1−1/α} lies between ∫_{J+1}^∞ and ∫_J^∞ = α J^{−1/α}.
    let lo = alpha * ((j_max + 1) as f64).powf(-1.0 / alpha);
    let hi = alpha * (j_max as f64).powf(-1.0 / alpha);
    let norm = s.a(k as f64) / alpha;
    let mid = 0.5 * (lo + hi);
    ((sum + mid) * norm, (hi - lo) * norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;

    #[test]
    fn set_a_membership() {
        assert!(validate_params(2.0, 0.0, 0.5).is_ok());
        assert!(matches!(validate_params(1.0, 0.3, 1.0), Err(Error::OutOfSetA { .. })));
        assert!(matches!(validate_params(2.0, 0.1, 1.0), Err(Error::OutOfSetA { .. })));
        assert!(matches!(validate_params(1.5, 1.0, 1.0), Err(Error::OutOfSetA { .. })));
        assert!(matches!(validate_params(2.5, 0.0, 1.0), Err(Error::OutOfSetA { .. })));
        assert!(matches!(validate_params(0.0, 0.0, 1.0), Err(Error::OutOfSetA { .. })));
        assert!(matches!(validate_params(1.5, 0.0, 0.0), Err(Error::NonpositiveScale(_))));
        assert!(matches!(validate_params(1.5, 0.0, -1.0), Err(Error::NonpositiveScale(_))));
        assert_eq!(validate_params(1.5, 0.0, 1.0).unwrap().rho, 0.5);
    }

    #[test]
    fn gaussian_and_cauchy_densities() {
        let g = StableParams::gaussian();
        assert!((density(&g, 0.0).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-8);
        assert!((density(&g, 1.3).unwrap() - normal_pdf(1.3)).abs() < 1e-8);
        let cauchy = validate_params(1.0, 0.0, 1.0).unwrap();
        for &x in &[0.0, 0.7, -3.0, 12.0] {
            let want = 1.0 / (PI * (1.0 + x * x));
            assert!((density(&cauchy, x).unwrap() - want).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn gaussian_cdf_matches_phi() {
        let g = StableParams::gaussian();
        assert!((cdf(&g, 1.0).unwrap() - 0.841_344_746_068_542_9).abs() < 1e-8);
        assert!((cdf(&g, -2.2).unwrap() - normal_cdf(-2.2)).abs() < 1e-8);
        assert!((cdf(&g, 0.0).unwrap() - 0.5).abs() < 1e-12);
        assert!(cdf(&g, 60.0).unwrap() > 1.0 - 1e-6);
        assert_eq!(cdf(&g, f64::INFINITY).unwrap(), 1.0);
    }

    #[test]
    fn phi_reference_values() {
        // Values from tables of the normal integral.
        assert!((normal_cdf(-1.0) - 0.158_655_253_931_457_05).abs() < 1e-12);
        assert!((normal_cdf(2.5) - 0.993_790_334_674_223_7).abs() < 1e-12);
    }

    #[test]
    fn cauchy_cdf_closed_form() {
        let p = validate_params(1.0, 0.0, 1.0).unwrap();
        for &x in &[-5.0f64, -0.3, 0.0, 2.0, 40.0] {
            let want = 0.5 + x.atan() / PI;
            assert!((cdf(&p, x).unwrap() - want).abs() < 1e-7, "x={x}");
        }
        // Far tail uses the power-law term.
        let far = 1e5;
        assert!((cdf(&p, far).unwrap() - (0.5 + far.atan() / PI)).abs() < 1e-9);
    }

    /// Independent oracle: the closed-form positivity parameter for this
    /// parametrization, 1/2 + arctan(β tan(πα/2))/(πα).
    fn rho_closed_form(alpha: f64, beta: f64) -> f64 {
        0.5 + (beta * (PI * alpha / 2.0).tan()).atan() / (PI * alpha)
    }

    #[test]
    fn rho_from_density_mass() {
        for &(a, b) in &[(1.5, 0.3), (1.5, -0.6), (0.7, 0.4), (1.2, 0.5)] {
            let p = validate_params(a, b, 1.0).unwrap();
            let want = rho_closed_form(a, b);
            assert!((p.rho - want).abs() < 1e-7, "({a},{b}) {} vs {want}", p.rho);
        }
    }

    #[test]
    fn rho_matches_sign_frequency() {
        let p = validate_params(1.5, 0.3, 1.0).unwrap();
        let s = IncrementSampler::new(&p);
        let mut rng = rng_from(11, 0);
        let n = 1_000_000;
        let pos = (0..n).filter(|_| s.sample(&mut rng) > 0.0).count() as f64 / n as f64;
        let sd = (p.rho * (1.0 - p.rho) / n as f64).sqrt();
        assert!((pos - p.rho).abs() < 4.0 * sd, "freq {pos} rho {}", p.rho);
    }

    #[test]
    fn density_integrates_to_one_and_matches_cdf_slope() {
        let p = validate_params(1.5, 0.3, 1.0).unwrap();
        let h = 1e-3;
        for i in -12..=12 {
            let x = 0.5 * i as f64;
            let num = (cdf(&p, x + h).unwrap() - cdf(&p, x - h).unwrap()) / (2.0 * h);
            let d = density(&p, x).unwrap();
            assert!((num - d).abs() < 1e-4, "x={x} {num} vs {d}");
        }
        let mass = crate::quadrature::integrate(|x| density(&p, x).unwrap(), -30.0, 30.0, 1e-7, 0.0, 400).unwrap().value;
        let tails = cdf(&p, -30.0).unwrap() + 1.0 - cdf(&p, 30.0).unwrap();
        assert!((mass + tails - 1.0).abs() < 1e-5, "{mass} + {tails}");
    }

    #[test]
    fn symmetric_density_is_even() {
        let p = validate_params(0.8, 0.0, 2.0).unwrap();
        for &x in &[0.3, 1.7, 5.0] {
            assert!((density(&p, x).unwrap() - density(&p, -x).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn cdf_table_interpolates_accurately() {
        let p = validate_params(1.5, 0.3, 1.0).unwrap();
        let t = CdfTable::new(&p, 2001).unwrap();
        for &x in &[-40.0, -2.2, -0.1, 0.0, 0.9, 7.3, 150.0, 1e4] {
            assert!((t.eval(x) - cdf(&p, x).unwrap()).abs() < 2e-5, "x={x}");
        }
    }

    #[test]
    fn cms_gaussian_branch_has_unit_variance() {
        let g = StableParams::gaussian();
        let s = IncrementSampler::new(&g);
        let mut rng = rng_from(5, 0);
        let n = 1_000_000;
        let (mut m1, mut m2) = (0.0, 0.0);
        for _ in 0..n {
            let x = s.sample(&mut rng);
            m1 += x;
            m2 += x * x;
        }
        m1 /= n as f64;
        m2 /= n as f64;
        assert!(m1.abs() < 3.0 / 1000.0);
        assert!((m2 - 1.0).abs() < 0.006);
    }

    #[test]
    fn scaling_arithmetic() {
        let g = StableParams::gaussian();
        assert_eq!(scaling(&g, 16), (4.0, 1.0 / 64.0));
        let c = validate_params(1.0, 0.0, 1.0).unwrap();
        assert!((scaling(&c, 1000).0 - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn tauberian_ratio_near_one() {
        for &alpha in &[1.0, 1.5, 2.0] {
            let (r, width) = tauberian_ratio(alpha, 10_000);
            assert!((r - 1.0).abs() < 0.02, "alpha={alpha} r={r}");
            assert!(width < 1e-6);
        }
    }
}
