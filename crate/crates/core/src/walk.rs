//! Trajectories, window functionals, the event ℬ(x,n) = {S_n ≤ x, L_n ≥ 0},
//! and samplers for walks conditioned on it.

use crate::error::{Error, Result};
use crate::ladder::RenewalTable;
use crate::rng::{derive_seed, par_chunks, rng_from, split_counts, WalkRng};
use crate::stable::{IncrementSampler, StableParams};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkPath {
    /// S_0..S_n with S_0 = w.
    pub s: Vec<f64>,
    pub seed: u64,
    pub params: StableParams,
}

impl WalkPath {
    pub fn len(&self) -> usize {
        self.s.len()
    }
    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
    pub fn increments(&self) -> Vec<f64> {
        self.s.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

pub fn simulate_path(p: &StableParams, w: f64, n: usize, seed: u64) -> WalkPath {
    let sampler = IncrementSampler::new(p);
    let mut rng = rng_from(seed, 0);
    let mut s = Vec::with_capacity(n + 1);
    let mut cur = w;
    s.push(cur);
    for _ in 0..n {
        cur += sampler.sample(&mut rng);
        s.push(cur);
    }
    WalkPath { s, seed, params: *p }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowFunctionals {
    /// L_{r,n} = min_{r≤m≤n} S_m.
    pub l_rn: f64,
    /// First index in [r,n] attaining L_{r,n}.
    pub tau_rn: usize,
    /// max_{1≤m≤n} S_m (S_0 when n = 0).
    pub m_n: f64,
    pub endpoint: f64,
}

pub fn window_functionals_slice(s: &[f64], r: usize, n: usize) -> Result<WindowFunctionals> {
    if r > n || n >= s.len() {
        return Err(Error::WindowOutOfRange { r, n, len: s.len() });
    }
    let mut l = s[r];
    let mut tau = r;
    for (m, &v) in s.iter().enumerate().take(n + 1).skip(r + 1) {
        if v < l {
            l = v;
            tau = m;
        }
    }
    let m_n = if n == 0 { s[0] } else { s[1..=n].iter().copied().fold(f64::NEG_INFINITY, f64::max) };
    Ok(WindowFunctionals { l_rn: l, tau_rn: tau, m_n, endpoint: s[n] })
}

pub fn window_functionals(path: &WalkPath, r: usize, n: usize) -> Result<WindowFunctionals> {
    window_functionals_slice(&path.s, r, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditioningEvent {
    pub x: f64,
    pub n: usize,
}

impl ConditioningEvent {
    pub fn new(x: f64, n: usize) -> Result<Self> {
        if !(x >= 0.0) {
            return Err(Error::DomainError(format!("endpoint bound x must be ≥ 0, got {x}")));
        }
        Ok(ConditioningEvent { x, n })
    }

    pub fn holds(&self, s: &[f64]) -> bool {
        s.len() > self.n && s[self.n] <= self.x && s[..=self.n].iter().all(|&v| v >= 0.0)
    }
}

pub fn event_holds(path: &WalkPath, ev: &ConditioningEvent) -> bool {
    ev.holds(&path.s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerMethod {
    /// Plain rejection from the free walk with early kill on negativity.
    Rejection,
    /// Sequential importance resampling under the V⁻ h-transform.
    HTransform,
    /// Exact Gaussian sampler: forward meander, time-reversed meander from a
    /// uniform endpoint, joined by a Gaussian bridge (α = 2 only).
    Spliced,
}

impl std::str::FromStr for SamplerMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rejection" => Ok(SamplerMethod::Rejection),
            "htransform" | "h-transform" => Ok(SamplerMethod::HTransform),
            "spliced" => Ok(SamplerMethod::Spliced),
            other => Err(Error::DomainError(format!("unknown sampler `{other}`"))),
        }
    }
}

/// Conditioned draws with their weights. `T` is whatever the caller extracted
/// from each path (the full path, or a few functionals for long horizons).
#[derive(Debug, Clone)]
pub struct ConditionedSample<T> {
    pub records: Vec<T>,
    /// Unit for exact samplers; importance weights otherwise.
    pub weights: Vec<f64>,
    pub attempts: u64,
    pub acceptance_rate: f64,
    pub acceptance_se: f64,
    pub method: SamplerMethod,
    /// Kish effective sample size of `weights`.
    pub ess: f64,
    /// For the h-transform: estimate of E[V⁻(S_n); L_n ≥ 0]/V⁻(w) and its
    /// standard error. Equals (1, 0) for exact samplers.
    pub weight_normalization: (f64, f64),
}

impl<T> ConditionedSample<T> {
    pub fn len(&self) -> usize {
        self.records.len()
    }
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

pub fn kish_ess(weights: &[f64]) -> f64 {
    let s: f64 = weights.iter().sum();
    let s2: f64 = weights.iter().map(|w| w * w).sum();
    if s2 > 0.0 {
        s * s / s2
    } else {
        0.0
    }
}

const CHUNKS: usize = 64;

/// Runs the free walk from `w` for `n` steps into `buf`, stopping early if it
/// goes negative. Returns the number of steps taken and whether it survived.
#[inline]
fn run_killed(sampler: &IncrementSampler, rng: &mut WalkRng, w: f64, n: usize, buf: &mut Vec<f64>, sign: f64) -> (usize, bool) {
    buf.clear();
    buf.push(w);
    let mut cur = w;
    for i in 1..=n {
        cur += sign * sampler.sample(rng);
        if cur < 0.0 {
            return (i, false);
        }
        buf.push(cur);
    }
    (n, true)
}

/// Exact draws from P_w(· | ℬ(x,n)) by rejection. Each attempt is abandoned as
/// soon as the walk goes negative.
pub fn sample_conditioned_rejection<T, E>(
    p: &StableParams,
    w: f64,
    ev: &ConditioningEvent,
    target_accepts: usize,
    max_attempts: u64,
    seed: u64,
    extract: E,
) -> Result<ConditionedSample<T>>
where
    T: Send,
    E: Fn(&[f64]) -> T + Sync,
{
    if target_accepts == 0 {
        return Err(Error::SamplerShortfall("target of zero accepted paths".into()));
    }
    if !(w >= 0.0) {
        return Err(Error::DomainError(format!("start w must be ≥ 0, got {w}")));
    }
    let sampler = IncrementSampler::new(p);
    let targets = split_counts(target_accepts, CHUNKS);
    let budgets = split_counts(max_attempts.min(usize::MAX as u64) as usize, CHUNKS);
    let parts = par_chunks(seed, CHUNKS, |i, rng| {
        let mut out = Vec::with_capacity(targets[i]);
        let mut buf = Vec::with_capacity(ev.n + 1);
        let mut attempts = 0u64;
        while out.len() < targets[i] && attempts < budgets[i] as u64 {
            attempts += 1;
            let (_, alive) = run_killed(&sampler, rng, w, ev.n, &mut buf, 1.0);
            if alive && buf[ev.n] <= ev.x {
                out.push(extract(&buf));
            }
        }
        (out, attempts)
    });
    let mut records = Vec::with_capacity(target_accepts);
    let mut attempts = 0u64;
    for (recs, a) in parts {
        records.extend(recs);
        attempts += a;
    }
    let accepted = records.len();
    if accepted < target_accepts {
        return Err(Error::BudgetExhausted { accepted, target: target_accepts, attempts });
    }
    let rate = accepted as f64 / attempts as f64;
    Ok(ConditionedSample {
        weights: vec![1.0; accepted],
        records,
        attempts,
        acceptance_rate: rate,
        acceptance_se: (rate * (1.0 - rate) / attempts as f64).sqrt(),
        method: SamplerMethod::Rejection,
        ess: accepted as f64,
        weight_normalization: (1.0, 0.0),
    })
}

/// Estimates P_w(ℬ(x,n)) by rejection with a fixed number of attempts.
/// Returns (probability, binomial standard error, accepted count).
pub fn acceptance_probability(p: &StableParams, w: f64, ev: &ConditioningEvent, attempts: u64, seed: u64) -> (f64, f64, u64) {
    let sampler = IncrementSampler::new(p);
    let budgets = split_counts(attempts as usize, CHUNKS);
    let hits: u64 = par_chunks(seed, CHUNKS, |i, rng| {
        let mut buf = Vec::with_capacity(ev.n + 1);
        let mut h = 0u64;
        for _ in 0..budgets[i] {
            let (_, alive) = run_killed(&sampler, rng, w, ev.n, &mut buf, 1.0);
            if alive && buf[ev.n] <= ev.x {
                h += 1;
            }
        }
        h
    })
    .into_iter()
    .sum();
    let rate = hits as f64 / attempts as f64;
    (rate, (rate * (1.0 - rate) / attempts as f64).sqrt(), hits)
}

/// Exact Gaussian sampler for P_w(· | ℬ(x,n)).
///
/// Draws a forward path of length n1 from w kept nonnegative (rejection), an
/// endpoint e ~ U[0,x] together with a time-reversed path of length n2 from e
/// kept nonnegative (rejection with a fresh e per attempt, which tilts e by its
/// survival probability), and joins them with a Gaussian bridge of m steps.
/// The triple is accepted with probability φ_m(v−u)/φ_m(0) times the
/// indicator that the bridge stays nonnegative, which makes the accepted path
/// exactly distributed as the conditioned walk.
pub fn sample_conditioned_spliced<T, E>(
    p: &StableParams,
    w: f64,
    ev: &ConditioningEvent,
    target: usize,
    seed: u64,
    extract: E,
) -> Result<ConditionedSample<T>>
where
    T: Send,
    E: Fn(&[f64]) -> T + Sync,
{
    if !p.is_gaussian() {
        return Err(Error::DomainError("the spliced sampler needs Gaussian increments (α = 2)".into()));
    }
    if target == 0 {
        return Err(Error::SamplerShortfall("target of zero accepted paths".into()));
    }
    if !(w >= 0.0) {
        return Err(Error::DomainError(format!("start w must be ≥ 0, got {w}")));
    }
    let n = ev.n;
    if n < 6 || ev.x <= 0.0 {
        return sample_conditioned_rejection(p, w, ev, target, u64::MAX, seed, extract).map(|mut s| {
            s.method = SamplerMethod::Spliced;
            s
        });
    }
    let n1 = n / 3;
    let n2 = n / 3;
    let m = n - n1 - n2;
    let sigma = (2.0 * p.c).sqrt();
    let bridge_var = sigma * sigma * m as f64;
    let sampler = IncrementSampler::new(p);
    let targets = split_counts(target, CHUNKS);
    let parts = par_chunks(seed, CHUNKS, |i, rng| {
        let mut out = Vec::with_capacity(targets[i]);
        let mut fwd = Vec::with_capacity(n1 + 1);
        let mut bwd = Vec::with_capacity(n2 + 1);
        let mut bridge = vec![0.0; m + 1];
        let mut full = vec![0.0; n + 1];
        let mut rounds = 0u64;
        while out.len() < targets[i] {
            rounds += 1;
            loop {
                let (_, alive) = run_killed(&sampler, rng, w, n1, &mut fwd, 1.0);
                if alive {
                    break;
                }
            }
            loop {
                let e = ev.x * rng.random::<f64>();
                let (_, alive) = run_killed(&sampler, rng, e, n2, &mut bwd, -1.0);
                if alive {
                    break;
                }
            }
            let u = fwd[n1];
            let v = bwd[n2];
            let gap = v - u;
            if rng.random::<f64>() >= (-0.5 * gap * gap / bridge_var).exp() {
                continue;
            }
            let mut z = 0.0;
            bridge[0] = 0.0;
            for slot in bridge.iter_mut().skip(1) {
                let g: f64 = StandardNormal.sample(rng);
                z += sigma * g;
                *slot = z;
            }
            let zm = bridge[m];
            let mut ok = true;
            for (j, slot) in bridge.iter_mut().enumerate() {
                let f = j as f64 / m as f64;
                *slot = u + *slot + f * (gap - zm);
                if *slot < 0.0 {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            full[..=n1].copy_from_slice(&fwd);
            full[n1..=n1 + m].copy_from_slice(&bridge);
            for (j, &val) in bwd.iter().enumerate() {
                full[n - j] = val;
            }
            out.push(extract(&full));
        }
        (out, rounds)
    });
    let mut records = Vec::with_capacity(target);
    let mut attempts = 0u64;
    for (recs, a) in parts {
        records.extend(recs);
        attempts += a;
    }
    let accepted = records.len();
    let rate = accepted as f64 / attempts as f64;
    Ok(ConditionedSample {
        weights: vec![1.0; accepted],
        records,
        attempts,
        acceptance_rate: rate,
        acceptance_se: (rate * (1.0 - rate) / attempts as f64).sqrt(),
        method: SamplerMethod::Spliced,
        ess: accepted as f64,
        weight_normalization: (1.0, 0.0),
    })
}

/// Which law the h-transform particles are reweighted to at the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
enum HTarget {
    /// P_w(· | ℬ(x,n)).
    Conditioned,
    /// P̂⁻_w itself on F_n (no endpoint constraint).
    Harmonic,
}

#[derive(Debug, Clone, Copy)]
pub struct HTransformConfig {
    pub particles: usize,
    pub max_islands: usize,
}

impl Default for HTransformConfig {
    fn default() -> Self {
        HTransformConfig { particles: 1024, max_islands: 4096 }
    }
}

struct Island<T> {
    records: Vec<T>,
    weights: Vec<f64>,
    normalization: f64,
}

fn run_island<T, E>(
    sampler: &IncrementSampler,
    v: &RenewalTable,
    w: f64,
    ev: &ConditioningEvent,
    mode: HTarget,
    particles: usize,
    rng: &mut WalkRng,
    extract: &E,
) -> Island<T>
where
    E: Fn(&[f64]) -> T,
{
    let n = ev.n;
    let width = n + 1;
    let mut paths = vec![0.0; particles * width];
    let mut spare = vec![0.0; particles * width];
    let mut weight = vec![1.0; particles];
    let mut vcur = vec![v.eval(w); particles];
    for k in 0..particles {
        paths[k * width] = w;
    }
    // Running estimate of E[V(S_i); L_i ≥ 0]/V(w).
    let mut log_norm = 0.0;
    for i in 1..=n {
        for k in 0..particles {
            if weight[k] == 0.0 {
                continue;
            }
            let next = paths[k * width + i - 1] + sampler.sample(rng);
            paths[k * width + i] = next;
            if next < 0.0 {
                weight[k] = 0.0;
                continue;
            }
            let vn = v.eval(next);
            weight[k] *= vn / vcur[k];
            vcur[k] = vn;
        }
        let sum: f64 = weight.iter().sum();
        if sum == 0.0 {
            return Island { records: Vec::new(), weights: Vec::new(), normalization: 0.0 };
        }
        let ess = kish_ess(&weight);
        if ess < 0.5 * particles as f64 && i < n {
            let mean = sum / particles as f64;
            log_norm += mean.ln();
            // Systematic resampling.
            let step = sum / particles as f64;
            let mut u = rng.random::<f64>() * step;
            let mut acc = weight[0];
            let mut src = 0usize;
            let mut new_v = vec![0.0; particles];
            for k in 0..particles {
                while u > acc && src + 1 < particles {
                    src += 1;
                    acc += weight[src];
                }
                spare[k * width..k * width + i + 1].copy_from_slice(&paths[src * width..src * width + i + 1]);
                new_v[k] = vcur[src];
                u += step;
            }
            std::mem::swap(&mut paths, &mut spare);
            vcur = new_v;
            weight.iter_mut().for_each(|x| *x = 1.0);
        }
    }
    let mean_final: f64 = weight.iter().sum::<f64>() / particles as f64;
    let normalization = (log_norm + mean_final.ln()).exp();
    let scale = (log_norm).exp();
    let mut records = Vec::new();
    let mut weights = Vec::new();
    for k in 0..particles {
        if weight[k] == 0.0 {
            continue;
        }
        let row = &paths[k * width..(k + 1) * width];
        let fw = match mode {
            HTarget::Conditioned => {
                if row[n] > ev.x {
                    continue;
                }
                scale * weight[k] / vcur[k]
            }
            HTarget::Harmonic => scale * weight[k],
        };
        records.push(extract(row));
        weights.push(fw);
    }
    Island { records, weights, normalization }
}

fn htransform_engine<T, E>(
    p: &StableParams,
    w: f64,
    ev: &ConditioningEvent,
    v: &RenewalTable,
    target: usize,
    seed: u64,
    cfg: HTransformConfig,
    mode: HTarget,
    extract: E,
) -> Result<ConditionedSample<T>>
where
    T: Send,
    E: Fn(&[f64]) -> T + Sync,
{
    if target == 0 {
        return Err(Error::SamplerShortfall("target of zero paths".into()));
    }
    if !(w >= 0.0) {
        return Err(Error::DomainError(format!("start w must be ≥ 0, got {w}")));
    }
    let sampler = IncrementSampler::new(p);
    let batch = 8usize;
    let mut records = Vec::new();
    let mut weights = Vec::new();
    let mut norms = Vec::new();
    let mut islands = 0usize;
    while records.len() < target && islands < cfg.max_islands {
        let batch_seed = derive_seed(seed, islands as u64);
        let out = par_chunks(batch_seed, batch, |_, rng| run_island(&sampler, v, w, ev, mode, cfg.particles, rng, &extract));
        for isl in out {
            records.extend(isl.records);
            weights.extend(isl.weights);
            norms.push(isl.normalization);
        }
        islands += batch;
    }
    if records.is_empty() {
        return Err(Error::DegenerateWeights { ess: 0.0, target });
    }
    let ess = kish_ess(&weights);
    if ess < 0.1 * target as f64 {
        return Err(Error::DegenerateWeights { ess, target });
    }
    // Self-normalized weights with mean 1.
    let mean_w: f64 = weights.iter().sum::<f64>() / weights.len() as f64;
    weights.iter_mut().for_each(|x| *x /= mean_w);
    let k = norms.len() as f64;
    let nm = norms.iter().sum::<f64>() / k;
    let nv = norms.iter().map(|x| (x - nm).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
    let attempts = (islands * cfg.particles) as u64;
    let rate = records.len() as f64 / attempts as f64;
    Ok(ConditionedSample {
        records,
        weights,
        attempts,
        acceptance_rate: rate,
        acceptance_se: (rate * (1.0 - rate) / attempts as f64).sqrt(),
        method: SamplerMethod::HTransform,
        ess,
        weight_normalization: (nm, (nv / k).sqrt()),
    })
}

/// Weighted draws targeting P_w(· | ℬ(x,n)) built on the h-transform P̂⁻_w.
///
/// Particles take free steps, die when they go negative and otherwise carry
/// the weight V⁻(S_i)/V⁻(w); systematic resampling keeps the population alive.
/// At the horizon each particle is reweighted by 1{S_n ≤ x}/V⁻(S_n), so the
/// self-normalized estimator targets the conditioned law. Paths within one
/// island of particles share ancestry; islands are independent.
pub fn sample_conditioned_htransform<T, E>(
    p: &StableParams,
    w: f64,
    ev: &ConditioningEvent,
    renewal_minus: &RenewalTable,
    target: usize,
    seed: u64,
    extract: E,
) -> Result<ConditionedSample<T>>
where
    T: Send,
    E: Fn(&[f64]) -> T + Sync,
{
    htransform_engine(p, w, ev, renewal_minus, target, seed, HTransformConfig::default(), HTarget::Conditioned, extract)
}

pub fn sample_conditioned_htransform_with<T, E>(
    p: &StableParams,
    w: f64,
    ev: &ConditioningEvent,
    renewal_minus: &RenewalTable,
    target: usize,
    seed: u64,
    cfg: HTransformConfig,
    extract: E,
) -> Result<ConditionedSample<T>>
where
    T: Send,
    E: Fn(&[f64]) -> T + Sync,
{
    htransform_engine(p, w, ev, renewal_minus, target, seed, cfg, HTarget::Conditioned, extract)
}

/// Weighted draws from the h-transformed law P̂⁻_w on the first n steps.
pub fn sample_htransform_unconditioned<T, E>(
    p: &StableParams,
    w: f64,
    n: usize,
    renewal_minus: &RenewalTable,
    target: usize,
    seed: u64,
    extract: E,
) -> Result<ConditionedSample<T>>
where
    T: Send,
    E: Fn(&[f64]) -> T + Sync,
{
    let ev = ConditioningEvent { x: f64::INFINITY, n };
    htransform_engine(p, w, &ev, renewal_minus, target, seed, HTransformConfig::default(), HTarget::Harmonic, extract)
}

/// Functional of a path evaluated by [`empirical_conditional_cdf`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Functional {
    /// L_{r,n}.
    WindowMin { r: usize },
    /// S_n.
    Endpoint,
    /// L_{r,n} − S_r.
    ShiftedMin { r: usize },
}

impl Functional {
    pub fn eval(&self, s: &[f64]) -> Result<f64> {
        let n = s.len().saturating_sub(1);
        match *self {
            Functional::WindowMin { r } => Ok(window_functionals_slice(s, r, n)?.l_rn),
            Functional::Endpoint => s.last().copied().ok_or(Error::EmptySample),
            Functional::ShiftedMin { r } => Ok(window_functionals_slice(s, r, n)?.l_rn - s[r]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub sample_size: usize,
    pub ess: f64,
}

/// Weighted empirical CDF of `values/scale` on `grid` (right-continuous) with
/// delta-method standard errors.
pub fn empirical_cdf_from_values(values: &[f64], weights: &[f64], scale: f64, grid: &[f64]) -> Result<EmpiricalCdf> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    if values.len() != weights.len() {
        return Err(Error::DomainError("values and weights differ in length".into()));
    }
    if !(scale > 0.0) {
        return Err(Error::DomainError(format!("scale must be positive, got {scale}")));
    }
    let mut pairs: Vec<(f64, f64)> = values.iter().zip(weights).map(|(&v, &w)| (v / scale, w)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    if !(total > 0.0) {
        return Err(Error::EmptySample);
    }
    let w2_total: f64 = pairs.iter().map(|p| p.1 * p.1).sum();
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[a].total_cmp(&grid[b]));
    let mut out = vec![0.0; grid.len()];
    let mut errs = vec![0.0; grid.len()];
    let (mut idx, mut acc, mut acc2) = (0usize, 0.0, 0.0);
    for &g in &order {
        while idx < pairs.len() && pairs[idx].0 <= grid[g] {
            acc += pairs[idx].1;
            acc2 += pairs[idx].1 * pairs[idx].1;
            idx += 1;
        }
        let f = (acc / total).clamp(0.0, 1.0);
        // Σ w_i²(1{v_i ≤ y} − F)², split at the sorted position.
        let s2 = (1.0 - f) * (1.0 - f) * acc2 + f * f * (w2_total - acc2);
        out[g] = f;
        errs[g] = s2.max(0.0).sqrt() / total;
    }
    Ok(EmpiricalCdf { grid: grid.to_vec(), values: out, stderr: errs, sample_size: values.len(), ess: kish_ess(weights) })
}

pub fn empirical_conditional_cdf(samples: &ConditionedSample<Vec<f64>>, functional: Functional, scale: f64, grid: &[f64]) -> Result<EmpiricalCdf> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let vals = samples.records.iter().map(|s| functional.eval(s)).collect::<Result<Vec<f64>>>()?;
    empirical_cdf_from_values(&vals, &samples.weights, scale, grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(v: &[f64]) -> WalkPath {
        WalkPath { s: v.to_vec(), seed: 0, params: StableParams::gaussian() }
    }

    #[test]
    fn hand_scans() {
        let f = window_functionals(&path(&[0.0, 1.0, -1.0, 2.0]), 0, 3).unwrap();
        assert_eq!((f.l_rn, f.tau_rn, f.m_n, f.endpoint), (-1.0, 2, 2.0, 2.0));
        let f = window_functionals(&path(&[0.0, -1.0, -1.0]), 0, 2).unwrap();
        assert_eq!(f.tau_rn, 1);
        let f = window_functionals(&path(&[0.0, 3.0, 1.0, 2.0]), 3, 3).unwrap();
        assert_eq!((f.l_rn, f.tau_rn), (2.0, 3));
        assert!(matches!(window_functionals(&path(&[0.0, 1.0]), 0, 2), Err(Error::WindowOutOfRange { .. })));
        assert!(matches!(window_functionals(&path(&[0.0, 1.0]), 2, 1), Err(Error::WindowOutOfRange { .. })));
    }

    #[test]
    fn event_cases() {
        let ev = ConditioningEvent::new(1.0, 2).unwrap();
        assert!(event_holds(&path(&[0.0, 1.0, 0.5]), &ev));
        assert!(!event_holds(&path(&[0.0, 1.0, 2.0]), &ev));
        let ev10 = ConditioningEvent::new(10.0, 2).unwrap();
        assert!(!event_holds(&path(&[0.0, -0.1, 3.0]), &ev10));
        assert!(ConditioningEvent::new(-1.0, 2).is_err());
    }

    #[test]
    fn zero_step_walk() {
        let p = simulate_path(&StableParams::gaussian(), 0.7, 0, 1);
        assert_eq!(p.s, vec![0.7]);
    }

    #[test]
    fn simulate_is_deterministic() {
        let g = StableParams::gaussian();
        assert_eq!(simulate_path(&g, 0.0, 50, 9), simulate_path(&g, 0.0, 50, 9));
        assert_ne!(simulate_path(&g, 0.0, 50, 9).s, simulate_path(&g, 0.0, 50, 10).s);
    }

    #[test]
    fn empirical_cdf_basics() {
        let e = empirical_cdf_from_values(&[0.5], &[1.0], 1.0, &[0.0, 0.49, 0.5, 1.0]).unwrap();
        assert_eq!(e.values, vec![0.0, 0.0, 1.0, 1.0]);
        let vals = [0.3, 0.1, 0.7, 0.2];
        let a = empirical_cdf_from_values(&vals, &[1.0; 4], 1.0, &[0.15, 0.5]).unwrap();
        let b = empirical_cdf_from_values(&vals, &[2.5; 4], 1.0, &[0.15, 0.5]).unwrap();
        assert_eq!(a.values, b.values);
        assert!((a.values[1] - 0.75).abs() < 1e-15);
        assert!((a.stderr[1] - (0.75f64 * 0.25 / 4.0).sqrt()).abs() < 1e-12);
        assert!(matches!(empirical_cdf_from_values(&[], &[], 1.0, &[0.0]), Err(Error::EmptySample)));
    }

    #[test]
    fn rejection_paths_satisfy_event() {
        let g = StableParams::gaussian();
        let ev = ConditioningEvent::new(3.0, 40).unwrap();
        let s = sample_conditioned_rejection(&g, 0.0, &ev, 200, 10_000_000, 3, |s| s.to_vec()).unwrap();
        assert_eq!(s.len(), 200);
        assert!(s.records.iter().all(|r| ev.holds(r)));
        assert!(s.acceptance_rate > 0.0 && s.acceptance_rate < 1.0);
    }

    #[test]
    fn rejection_budget_exhaustion() {
        let g = StableParams::gaussian();
        let ev = ConditioningEvent::new(0.01, 400).unwrap();
        let r = sample_conditioned_rejection(&g, 0.0, &ev, 100, 1000, 3, |s| s.len());
        assert!(matches!(r, Err(Error::BudgetExhausted { .. })));
    }

    #[test]
    fn spliced_paths_satisfy_event() {
        let g = StableParams::gaussian();
        let ev = ConditioningEvent::new(2.0, 300).unwrap();
        let s = sample_conditioned_spliced(&g, 1.0, &ev, 300, 5, |s| s.to_vec()).unwrap();
        assert!(s.records.iter().all(|r| ev.holds(r) && r[0] == 1.0 && r.len() == 301));
        let c = validate_params_for_test();
        assert!(sample_conditioned_spliced(&c, 0.0, &ev, 10, 5, |s| s.len()).is_err());
    }

    fn validate_params_for_test() -> StableParams {
        crate::stable::validate_params(1.5, 0.0, 1.0).unwrap()
    }
}
