//! The five limiting distribution functions of the scaled prospective minimum,
//! the joint (minimum, endpoint) probability of the limiting Lévy process, and
//! the integral identity tying them together.

use crate::error::{Error, Result};
use crate::ladder::MeanderDensityEstimate;
use crate::quadrature::{integrate_with_breaks, QuadResult};
use crate::rng::{par_chunks, split_counts};
use crate::stable::{normal_cdf, IncrementSampler, StableParams};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// n ≫ k ≫ r
    R1,
    /// k = θr
    R2,
    /// min(r, n−r) ≫ k
    R3,
    /// k = θ(n−r)
    R4,
    /// n ≫ k ≫ n−r
    R5,
}

impl Regime {
    pub const ALL: [Regime; 5] = [Regime::R1, Regime::R2, Regime::R3, Regime::R4, Regime::R5];

    pub fn uses_theta(self) -> bool {
        matches!(self, Regime::R2 | Regime::R4)
    }

    /// Which scaling constant divides the functional.
    pub fn normalization(self) -> &'static str {
        match self {
            Regime::R1 | Regime::R2 => "a_r",
            Regime::R3 => "a_k",
            Regime::R4 | Regime::R5 => "a_m",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::R1 => "r1",
            Regime::R2 => "r2",
            Regime::R3 => "r3",
            Regime::R4 => "r4",
            Regime::R5 => "r5",
        };
        f.write_str(s)
    }
}

impl FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "r1" => Ok(Regime::R1),
            "r2" => Ok(Regime::R2),
            "r3" => Ok(Regime::R3),
            "r4" => Ok(Regime::R4),
            "r5" => Ok(Regime::R5),
            other => Err(Error::DomainError(format!("unknown regime `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeSpec {
    pub regime: Regime,
    pub t: f64,
    pub theta: Option<f64>,
}

impl RegimeSpec {
    pub fn new(regime: Regime, t: f64, theta: Option<f64>) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::DomainError(format!("t must be positive, got {t}")));
        }
        let theta = if regime.uses_theta() {
            match theta {
                Some(th) if th > 0.0 && th.is_finite() => Some(th),
                Some(th) => return Err(Error::DomainError(format!("theta must be positive, got {th}"))),
                None => return Err(Error::DomainError(format!("regime {regime} needs theta"))),
            }
        } else {
            None
        };
        Ok(RegimeSpec { regime, t, theta })
    }

    /// tθ^{1/α} for R2/R4, t otherwise.
    pub fn effective_t(&self, p: &StableParams) -> f64 {
        match self.theta {
            Some(th) => self.t * th.powf(1.0 / p.alpha),
            None => self.t,
        }
    }

    /// Closed y-domain, if bounded on both sides.
    pub fn y_domain(&self, p: &StableParams) -> (f64, f64) {
        match self.regime {
            Regime::R1 => (0.0, f64::INFINITY),
            Regime::R2 | Regime::R4 => (0.0, self.effective_t(p)),
            Regime::R3 => (0.0, self.t),
            Regime::R5 => (f64::NEG_INFINITY, 0.0),
        }
    }

    pub fn check_y(&self, p: &StableParams, y: f64) -> Result<()> {
        let (lo, hi) = self.y_domain(p);
        let tol = 1e-12 * hi.abs().max(1.0);
        if y.is_nan() || y < lo - tol || y > hi + tol {
            return Err(Error::DomainError(format!("y = {y} outside [{lo}, {hi}] for regime {}", self.regime)));
        }
        Ok(())
    }

    /// Evenly spaced grid over the natural plotting range.
    pub fn default_grid(&self, p: &StableParams, points: usize) -> Vec<f64> {
        let (lo, hi) = match self.regime {
            Regime::R1 => (0.0, 4.0),
            Regime::R5 => (-3.0, 0.0),
            _ => self.y_domain(p),
        };
        let points = points.max(2);
        (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCdf {
    pub regime: Regime,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
}

impl LimitCdf {
    /// Linear interpolation, clamped at the grid ends.
    pub fn eval(&self, y: f64) -> f64 {
        let g = &self.grid;
        if y <= g[0] {
            return self.values[0];
        }
        let last = g.len() - 1;
        if y >= g[last] {
            return self.values[last];
        }
        let i = g.partition_point(|x| *x <= y) - 1;
        let f = (y - g[i]) / (g[i + 1] - g[i]);
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitValue {
    pub value: f64,
    pub error: f64,
}

/// Time-one meander marginal g^+: the Rayleigh law for Brownian increments, or
/// a Monte Carlo histogram otherwise.
#[derive(Debug, Clone, Copy)]
pub enum MeanderLaw<'a> {
    /// σ·Rayleigh with σ² = 2c.
    Rayleigh {
        sigma: f64,
    },
    Estimate(&'a MeanderDensityEstimate),
}

impl MeanderLaw<'_> {
    pub fn closed_form(p: &StableParams) -> Option<MeanderLaw<'static>> {
        p.is_gaussian().then(|| MeanderLaw::Rayleigh { sigma: (2.0 * p.c).sqrt() })
    }

    /// ∫ φ(z) g(z) dz together with an error figure (quadrature or MC).
    /// `kinks` are points where φ is not smooth.
    pub fn integrate<F: Fn(f64) -> f64>(&self, phi: F, kinks: &[f64]) -> Result<LimitValue> {
        match *self {
            MeanderLaw::Rayleigh { sigma } => {
                let top = 9.0 * sigma + kinks.iter().cloned().fold(0.0, f64::max);
                let mut pts = vec![0.0, top];
                pts.extend(kinks.iter().filter(|k| **k > 0.0 && **k < top));
                pts.extend((1..8).map(|i| i as f64 * sigma));
                pts.sort_by(|a, b| a.total_cmp(b));
                pts.dedup();
                let g = |z: f64| z / (sigma * sigma) * (-0.5 * z * z / (sigma * sigma)).exp();
                let r: QuadResult = integrate_with_breaks(|z| g(z) * phi(z), &pts, 1e-11, 1e-11, 4000)?;
                Ok(LimitValue { value: r.value, error: r.abs_err })
            }
            MeanderLaw::Estimate(m) => {
                let value = m.integrate(&phi);
                let mut var = 0.0;
                for i in 0..m.density.len() {
                    let w = crate::quadrature::gauss_legendre_10(&phi, m.edges[i], m.edges[i + 1]);
                    var += (m.stderr[i] * w).powi(2);
                }
                Ok(LimitValue { value, error: var.sqrt() })
            }
        }
    }

    /// C** = 1/∫ z^{α(1−ρ)} g^+(z) dz.
    pub fn c_star_star(&self, p: &StableParams) -> Result<LimitValue> {
        let b = p.alpha * (1.0 - p.rho);
        let m = self.integrate(|z| z.powf(b), &[])?;
        let err = match *self {
            MeanderLaw::Estimate(est) => est.moment_stderr,
            MeanderLaw::Rayleigh { .. } => m.error,
        };
        Ok(LimitValue { value: 1.0 / m.value, error: err / (m.value * m.value) })
    }
}

fn gamma_plus(p: &StableParams) -> (f64, f64) {
    (p.alpha * p.rho, p.alpha * (1.0 - p.rho))
}

/// C**·H(y) with H(y) = ∫ g^+(z)(z^b − (z − y∧z)^b) dz, b = α(1−ρ).
pub fn limit_r1(p: &StableParams, meander: &MeanderLaw, c_star_star: f64, y: f64) -> Result<LimitValue> {
    if y.is_nan() || y < 0.0 {
        return Err(Error::DomainError(format!("y = {y} must be ≥ 0")));
    }
    if y == 0.0 {
        return Ok(LimitValue { value: 0.0, error: 0.0 });
    }
    let (_, b) = gamma_plus(p);
    let h = meander.integrate(|z| z.powf(b) - (z - y.min(z)).powf(b), &[y])?;
    Ok(LimitValue { value: c_star_star * h.value, error: c_star_star * h.error })
}

/// Inner q-integrals of W for one z, at first argument T. With `printed`
/// the first integrand is q^{αρ}(T−z+q)^{α(1−ρ)}; otherwise the exponents are
/// exchanged so that the two terms add up to d/dq[q^b (T−z+q)^{a+1}].
fn w_inner(a: f64, b: f64, big_t: f64, z: f64, y: f64, printed: bool) -> Result<f64> {
    let lo = (z - y).max(0.0);
    if z <= lo {
        return Ok(0.0);
    }
    let first = |q: f64| {
        let s = (big_t - z + q).max(0.0);
        if printed {
            q.powf(a) * s.powf(b)
        } else {
            q.powf(b) * s.powf(a)
        }
    };
    let second = |q: f64| (big_t - z + q).max(0.0).powf(a + 1.0) * q.powf(b - 1.0);
    let r1 = integrate_with_breaks(first, &[lo, z], 1e-12, 1e-10, 2000)?;
    let r2 = integrate_with_breaks(second, &[lo, z], 1e-12, 1e-10, 2000)?;
    Ok((a + 1.0) * r1.value + b * r2.value)
}

fn w_value(p: &StableParams, meander: &MeanderLaw, c_star_star: f64, big_t: f64, y: f64, printed: bool) -> Result<LimitValue> {
    let (a, b) = gamma_plus(p);
    if y == 0.0 {
        return Ok(LimitValue { value: 0.0, error: 0.0 });
    }
    // The outer integrand must return a plain f64, so inner failures go through a cell.
    let inner_err = std::cell::Cell::new(None);
    let phi = |z: f64| match w_inner(a, b, big_t, z, y, printed) {
        Ok(v) => v,
        Err(e) => {
            inner_err.set(Some(e.to_string()));
            0.0
        }
    };
    let v = meander.integrate(phi, &[y])?;
    if let Some(msg) = inner_err.take() {
        return Err(Error::QuadratureFailure(msg));
    }
    let norm = c_star_star / big_t.powf(a + 1.0);
    Ok(LimitValue { value: norm * v.value, error: norm * v.error })
}

/// W(T, y) at T = tθ^{1/α}, by nested quadrature of the two-term double integral.
pub fn limit_r2(p: &StableParams, meander: &MeanderLaw, c_star_star: f64, t: f64, theta: f64, y: f64) -> Result<LimitValue> {
    let spec = RegimeSpec::new(Regime::R2, t, Some(theta))?;
    spec.check_y(p, y)?;
    w_value(p, meander, c_star_star, spec.effective_t(p), y, false)
}

/// W(T, y) with the first inner integrand exactly as printed,
/// q^{αρ}(T−z+q)^{α(1−ρ)}. Coincides with [`limit_r2`] when ρ = 1/2.
pub fn limit_r2_printed(p: &StableParams, meander: &MeanderLaw, c_star_star: f64, t: f64, theta: f64, y: f64) -> Result<LimitValue> {
    let spec = RegimeSpec::new(Regime::R2, t, Some(theta))?;
    spec.check_y(p, y)?;
    w_value(p, meander, c_star_star, spec.effective_t(p), y, true)
}

/// 1 − (1 − y/t)^{αρ+1}.
pub fn limit_r3(p: &StableParams, t: f64, y: f64) -> Result<f64> {
    let spec = RegimeSpec::new(Regime::R3, t, None)?;
    spec.check_y(p, y)?;
    let u = (y / t).clamp(0.0, 1.0);
    Ok(1.0 - (1.0 - u).powf(p.alpha * p.rho + 1.0))
}

/// P(min_{[0,1]} B ≥ −a, B_1 ≤ b) for standard Brownian motion B.
pub fn brownian_min_endpoint(a: f64, b: f64) -> f64 {
    if a < 0.0 || b < -a {
        return 0.0;
    }
    (normal_cdf(b) - 2.0 * normal_cdf(-a) + normal_cdf(-2.0 * a - b)).max(0.0)
}

/// Minimum and endpoint of many discretized Lévy paths on [0,1]: each path is
/// an exactly stable walk of `resolution` steps scaled by resolution^{−1/α}.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyExtremes {
    pub min: Vec<f64>,
    /// Minimum over even step indices only: the same path at half resolution.
    pub min_half: Vec<f64>,
    pub end: Vec<f64>,
    pub resolution: usize,
    pub seed: u64,
}

pub fn simulate_levy_extremes(p: &StableParams, resolution: usize, paths: usize, seed: u64) -> LevyExtremes {
    let sampler = IncrementSampler::new(p);
    let scale = (resolution.max(1) as f64).powf(-1.0 / p.alpha);
    let counts = split_counts(paths, 64);
    let parts = par_chunks(seed, counts.len(), |i, rng| {
        let mut out = Vec::with_capacity(counts[i]);
        for _ in 0..counts[i] {
            let mut s = 0.0f64;
            let mut lo = 0.0f64;
            let mut lo_half = 0.0f64;
            for j in 1..=resolution {
                s += sampler.sample(rng);
                lo = lo.min(s);
                if j % 2 == 0 {
                    lo_half = lo_half.min(s);
                }
            }
            out.push((lo * scale, lo_half * scale, s * scale));
        }
        out
    });
    let flat: Vec<(f64, f64, f64)> = parts.into_iter().flatten().collect();
    LevyExtremes {
        min: flat.iter().map(|v| v.0).collect(),
        min_half: flat.iter().map(|v| v.1).collect(),
        end: flat.iter().map(|v| v.2).collect(),
        resolution,
        seed,
    }
}

fn z_kernel(m: f64, e: f64, pw: f64, y: f64, t: f64) -> f64 {
    let lo = -m;
    let hi = (y - m).min(t - e);
    if hi > lo {
        (hi.powf(pw) - lo.powf(pw)) / pw
    } else {
        0.0
    }
}

fn mean_se(vals: impl Iterator<Item = f64>) -> LimitValue {
    let (mut n, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for v in vals {
        n += 1.0;
        s1 += v;
        s2 += v * v;
    }
    let m = s1 / n;
    let var = (s2 / n - m * m).max(0.0);
    LimitValue { value: m, error: (var / n).sqrt() }
}

impl LevyExtremes {
    /// Fraction of paths with −z ≤ min ≤ y − z and end ≤ t − z.
    pub fn joint_prob(&self, z: f64, y: f64, t: f64) -> LimitValue {
        mean_se(self.min.iter().zip(&self.end).map(|(&m, &e)| f64::from(u8::from(-z <= m && m <= y - z && e <= t - z))))
    }

    /// Per path, ∫_0^∞ z^{p−1} 1{−z ≤ min ≤ y−z, end ≤ t−z} dz in closed form, averaged.
    fn z_weighted(&self, pw: f64, y: f64, t: f64) -> LimitValue {
        mean_se(self.min.iter().zip(&self.end).map(|(&m, &e)| z_kernel(m, e, pw, y, t)))
    }

    pub fn min_cdf(&self, y: f64) -> LimitValue {
        mean_se(self.min.iter().map(|&m| f64::from(u8::from(m <= y))))
    }
}

/// P(−z ≤ min_{[0,1]} Y ≤ y − z, Y_1 ≤ t − z). Reflection-principle closed form
/// for Brownian increments, Monte Carlo over discretized paths otherwise.
pub fn joint_min_endpoint_prob(p: &StableParams, z: f64, y: f64, t: f64, resolution: usize, paths: usize, seed: u64) -> Result<LimitValue> {
    if z.is_nan() || z < 0.0 {
        return Err(Error::DomainError(format!("z = {z} must be ≥ 0")));
    }
    if p.is_gaussian() {
        let s = (2.0 * p.c).sqrt();
        let v = brownian_min_endpoint(z / s, (t - z) / s) - brownian_min_endpoint((z - y) / s, (t - z) / s);
        return Ok(LimitValue { value: v.max(0.0), error: 0.0 });
    }
    Ok(simulate_levy_extremes(p, resolution, paths, seed).joint_prob(z, y, t))
}

/// A(T, y) for Brownian increments by quadrature over z of the closed form.
fn a_gaussian(p: &StableParams, big_t: f64, y: f64) -> Result<LimitValue> {
    let (a, _) = gamma_plus(p);
    let s = (2.0 * p.c).sqrt();
    let f = |z: f64| {
        let v = brownian_min_endpoint(z / s, (big_t - z) / s) - brownian_min_endpoint((z - y) / s, (big_t - z) / s);
        z.powf(a) * v.max(0.0)
    };
    let top = big_t.max(y) + 12.0 * s;
    let mut pts = vec![0.0, y, big_t, top];
    pts.sort_by(|u, v| u.total_cmp(v));
    pts.dedup();
    let r = integrate_with_breaks(f, &pts, 1e-12, 1e-11, 4000)?;
    let norm = (a + 1.0) / big_t.powf(a + 1.0);
    Ok(LimitValue { value: norm * r.value, error: norm * r.abs_err })
}

/// A(T, y) from simulated extremes: the z-integral is done exactly per path.
pub fn a_from_extremes(p: &StableParams, ext: &LevyExtremes, big_t: f64, y: f64) -> LimitValue {
    let (a, _) = gamma_plus(p);
    let v = ext.z_weighted(a + 1.0, y, big_t);
    let norm = (a + 1.0) / big_t.powf(a + 1.0);
    LimitValue { value: norm * v.value, error: norm * v.error }
}

/// A(T, y) at T = tθ^{1/α}.
pub fn limit_r4(p: &StableParams, t: f64, theta: f64, y: f64, resolution: usize, paths: usize, seed: u64) -> Result<LimitValue> {
    let spec = RegimeSpec::new(Regime::R4, t, Some(theta))?;
    spec.check_y(p, y)?;
    let big_t = spec.effective_t(p);
    if y == 0.0 {
        return Ok(LimitValue { value: 0.0, error: 0.0 });
    }
    if p.is_gaussian() {
        return a_gaussian(p, big_t, y);
    }
    let ext = simulate_levy_extremes(p, resolution, paths, seed);
    Ok(a_from_extremes(p, &ext, big_t, y))
}

/// P(min_{[0,1]} Y ≤ y) for y ≤ 0.
pub fn limit_r5(p: &StableParams, y: f64, resolution: usize, paths: usize, seed: u64) -> Result<LimitValue> {
    if y.is_nan() || y > 0.0 {
        return Err(Error::DomainError(format!("y = {y} must be ≤ 0")));
    }
    if y == 0.0 {
        return Ok(LimitValue { value: 1.0, error: 0.0 });
    }
    if p.is_gaussian() {
        let s = (2.0 * p.c).sqrt();
        return Ok(LimitValue { value: 2.0 * normal_cdf(y / s), error: 0.0 });
    }
    Ok(simulate_levy_extremes(p, resolution, paths, seed).min_cdf(y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemarkResidual {
    pub lhs: f64,
    pub rhs: f64,
    /// lhs − rhs
    pub residual: f64,
    /// Quadrature error (closed-form route) or Monte Carlo standard error.
    pub error: f64,
}

/// ∫_0^∞ z^{αρ} P(−z ≤ min Y, Y_1 ≤ t − z) dz against t^{1+αρ}/(αρ+1).
pub fn remark_identity_residual(p: &StableParams, t: f64, resolution: usize, paths: usize, seed: u64) -> Result<RemarkResidual> {
    if !(t > 0.0) {
        return Err(Error::DomainError(format!("t = {t} must be positive")));
    }
    let (a, _) = gamma_plus(p);
    let rhs = t.powf(1.0 + a) / (a + 1.0);
    if !p.is_gaussian() {
        let ext = simulate_levy_extremes(p, resolution, paths, seed);
        return Ok(remark_from_extremes(p, &ext, t));
    }
    let s = (2.0 * p.c).sqrt();
    let f = |z: f64| z.powf(a) * brownian_min_endpoint(z / s, (t - z) / s);
    let r = integrate_with_breaks(f, &[0.0, t, t + 12.0 * s], 1e-12, 1e-12, 4000)?;
    Ok(RemarkResidual { lhs: r.value, rhs, residual: r.value - rhs, error: r.abs_err })
}

/// Monte Carlo route of [`remark_identity_residual`] on given paths.
pub fn remark_from_extremes(p: &StableParams, ext: &LevyExtremes, t: f64) -> RemarkResidual {
    let (a, _) = gamma_plus(p);
    let rhs = t.powf(1.0 + a) / (a + 1.0);
    let v = ext.z_weighted(a + 1.0, f64::INFINITY, t);
    RemarkResidual { lhs: v.value, rhs, residual: v.value - rhs, error: v.error }
}

/// Discretization check: the Remark left-hand side from the same paths read
/// at full and at half resolution, with the paired standard error of the gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolutionCheck {
    pub resolution: usize,
    pub fine: f64,
    pub coarse: f64,
    pub fine_err: f64,
    /// fine − coarse and its standard error.
    pub gap: f64,
    pub gap_err: f64,
}

impl ResolutionCheck {
    /// Extrapolation to the continuum assuming the bias shrinks like Δ^{1/α}.
    pub fn extrapolated(&self, alpha: f64) -> f64 {
        let q = 2f64.powf(1.0 / alpha);
        self.fine + self.gap / (q - 1.0)
    }
}

pub fn resolution_check(p: &StableParams, ext: &LevyExtremes, t: f64) -> ResolutionCheck {
    let (a, _) = gamma_plus(p);
    let pw = a + 1.0;
    let fine = mean_se(ext.min.iter().zip(&ext.end).map(|(&m, &e)| z_kernel(m, e, pw, f64::INFINITY, t)));
    let coarse = mean_se(ext.min_half.iter().zip(&ext.end).map(|(&m, &e)| z_kernel(m, e, pw, f64::INFINITY, t)));
    let gap = mean_se(
        ext.min
            .iter()
            .zip(&ext.min_half)
            .zip(&ext.end)
            .map(|((&m, &mh), &e)| z_kernel(m, e, pw, f64::INFINITY, t) - z_kernel(mh, e, pw, f64::INFINITY, t)),
    );
    ResolutionCheck { resolution: ext.resolution, fine: fine.value, coarse: coarse.value, fine_err: fine.error, gap: gap.value, gap_err: gap.error }
}

/// Everything needed to evaluate a theoretical curve for any regime.
#[derive(Debug, Clone, Copy)]
pub struct LimitContext<'a> {
    pub params: StableParams,
    pub meander: MeanderLaw<'a>,
    pub c_star_star: f64,
    pub resolution: usize,
    pub paths: usize,
    pub seed: u64,
}

impl<'a> LimitContext<'a> {
    /// Closed-form context for Brownian increments.
    pub fn gaussian(p: &StableParams) -> Result<LimitContext<'static>> {
        let meander = MeanderLaw::closed_form(p).ok_or_else(|| Error::DomainError("closed-form context needs alpha = 2".into()))?;
        let css = meander.c_star_star(p)?.value;
        Ok(LimitContext { params: *p, meander, c_star_star: css, resolution: 4096, paths: 0, seed: 0 })
    }
}

/// Theoretical CDF of `spec` on `grid`. Monte Carlo regimes share one set of
/// simulated paths across the grid.
pub fn limit_curve(spec: &RegimeSpec, ctx: &LimitContext, grid: &[f64]) -> Result<LimitCdf> {
    let p = &ctx.params;
    for &y in grid {
        spec.check_y(p, y)?;
    }
    let big_t = spec.effective_t(p);
    let needs_paths = !p.is_gaussian() && matches!(spec.regime, Regime::R4 | Regime::R5);
    let ext = needs_paths.then(|| simulate_levy_extremes(p, ctx.resolution, ctx.paths.max(1), ctx.seed));
    let mut values = Vec::with_capacity(grid.len());
    let mut errors = Vec::with_capacity(grid.len());
    for &y in grid {
        let v = match spec.regime {
            Regime::R1 => limit_r1(p, &ctx.meander, ctx.c_star_star, y)?,
            Regime::R2 => w_value(p, &ctx.meander, ctx.c_star_star, big_t, y, false)?,
            Regime::R3 => LimitValue { value: limit_r3(p, spec.t, y)?, error: 0.0 },
            Regime::R4 => match (&ext, y == 0.0) {
                (_, true) => LimitValue { value: 0.0, error: 0.0 },
                (Some(e), false) => a_from_extremes(p, e, big_t, y),
                (None, false) => a_gaussian(p, big_t, y)?,
            },
            Regime::R5 => match &ext {
                Some(e) if y < 0.0 => e.min_cdf(y),
                _ => limit_r5(p, y, ctx.resolution, 1, ctx.seed)?,
            },
        };
        values.push(v.value.clamp(0.0, 1.0));
        errors.push(v.error);
    }
    Ok(LimitCdf { regime: spec.regime, grid: grid.to_vec(), values, errors })
}

/// Columns of the theory-curve CSV.
pub const LIMITS_CSV_COLUMNS: [&str; 9] = ["regime", "alpha", "beta", "c", "t", "theta", "y", "value", "error"];

pub fn limits_csv(spec: &RegimeSpec, curve: &LimitCdf, p: &StableParams) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(LIMITS_CSV_COLUMNS)?;
    let theta = spec.theta.map(|x| x.to_string()).unwrap_or_default();
    for i in 0..curve.grid.len() {
        w.write_record([
            spec.regime.to_string(),
            p.alpha.to_string(),
            p.beta.to_string(),
            p.c.to_string(),
            spec.t.to_string(),
            theta.clone(),
            curve.grid[i].to_string(),
            curve.values[i].to_string(),
            curve.errors[i].to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::IoFailure(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::IoFailure(e.to_string()))
}

/// Parses `lo:hi:step` into lo, lo+step, ..., hi (inclusive up to rounding),
/// or a comma-separated list of values.
pub fn parse_y_grid(s: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::DomainError(format!("y-grid `{s}`: {why}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("not a number"));
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected lo:hi:step"));
        }
        let (lo, hi, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || !(hi >= lo) {
            return Err(bad("need step > 0 and hi ≥ lo"));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize;
        Ok((0..=count)
            .map(|i| if i == count && ((lo + i as f64 * step) - hi).abs() < 1e-9 * step.max(1.0) { hi } else { lo + i as f64 * step })
            .collect())
    } else {
        let v = s.split(',').map(num).collect::<Result<Vec<f64>>>()?;
        if v.is_empty() {
            return Err(bad("empty"));
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss() -> StableParams {
        StableParams::gaussian()
    }

    #[test]
    fn r3_closed_form() {
        let p = gauss();
        assert_eq!(limit_r3(&p, 1.0, 0.5).unwrap(), 0.75);
        assert_eq!(limit_r3(&p, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(limit_r3(&p, 1.0, 0.0).unwrap(), 0.0);
        assert!(matches!(limit_r3(&p, 1.0, 1.5), Err(Error::DomainError(_))));
    }

    #[test]
    fn brownian_joint_law_edges() {
        assert_eq!(brownian_min_endpoint(0.0, 1.0), 0.0);
        assert!((brownian_min_endpoint(40.0, 40.0) - 1.0).abs() < 1e-12);
        assert_eq!(brownian_min_endpoint(1.0, -2.0), 0.0);
    }

    #[test]
    fn regime_spec_validation() {
        assert!(RegimeSpec::new(Regime::R2, 1.0, None).is_err());
        assert!(RegimeSpec::new(Regime::R3, -1.0, None).is_err());
        let s = RegimeSpec::new(Regime::R4, 1.0, Some(4.0)).unwrap();
        assert!((s.effective_t(&gauss()) - 2.0).abs() < 1e-15);
        assert!(s.check_y(&gauss(), 2.0).is_ok());
        assert!(s.check_y(&gauss(), 2.1).is_err());
        assert_eq!("R5".parse::<Regime>().unwrap(), Regime::R5);
    }

    #[test]
    fn limit_cdf_eval_interpolates() {
        let c = LimitCdf { regime: Regime::R3, grid: vec![0.0, 1.0], values: vec![0.0, 1.0], errors: vec![0.0; 2] };
        assert_eq!(c.eval(0.25), 0.25);
        assert_eq!(c.eval(-1.0), 0.0);
        assert_eq!(c.eval(3.0), 1.0);
    }
}
