//! Regime experiments: conditioned sampling at concrete (n, k, r), empirical
//! CDFs of the scaled prospective minimum, comparison with the limit laws,
//! convergence ladders and report serialization.

use crate::error::{Error, Result};
use crate::ladder::{build_renewal, estimate_meander_density, MeanderDensityEstimate, RenewalTable, Sign};
use crate::limits::{limit_curve, LimitCdf, LimitContext, MeanderLaw, Regime, RegimeSpec};
use crate::rng::derive_seed;
use crate::stable::{ScalingSequence, StableParams};
use crate::walk::{
    empirical_cdf_from_values, sample_conditioned_htransform, sample_conditioned_rejection, sample_conditioned_spliced, window_functionals_slice,
    ConditionedSample, ConditioningEvent, EmpiricalCdf, SamplerMethod,
};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

/// Column list of the report CSV, in order.
pub const CSV_COLUMNS: [&str; 16] =
    ["regime", "alpha", "beta", "c", "t", "theta", "n", "k", "r", "w", "y", "emp_cdf", "emp_err", "theory_cdf", "ks", "seed"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triple {
    pub n: usize,
    pub k: usize,
    pub r: usize,
}

impl Triple {
    pub fn new(n: usize, k: usize, r: usize) -> Self {
        Triple { n, k, r }
    }

    /// m = n − r.
    pub fn m(&self) -> usize {
        self.n - self.r
    }
}

/// Default instantiation of a regime at horizon n.
pub fn default_triple(regime: Regime, n: usize, theta: Option<f64>) -> Triple {
    let nf = n as f64;
    let th = theta.unwrap_or(1.0);
    let root = nf.sqrt().ceil() as usize;
    let eighth = nf.powf(0.125).ceil() as usize * 4;
    match regime {
        Regime::R1 => Triple::new(n, root, eighth),
        Regime::R2 => Triple::new(n, (th * root as f64).ceil() as usize, root),
        Regime::R3 => Triple::new(n, nf.powf(0.25).ceil() as usize, n / 2),
        Regime::R4 => {
            let m = (root as f64 / th).ceil() as usize;
            Triple::new(n, (th * m as f64).ceil() as usize, n - m)
        }
        Regime::R5 => Triple::new(n, root, n - eighth),
    }
}

/// Checks that a triple respects the ordering of its regime.
pub fn check_triple(spec: &RegimeSpec, tr: &Triple) -> Result<()> {
    let Triple { n, k, r } = *tr;
    let fail = |why: &str| Err(Error::RegimeViolation(format!("(n,k,r)=({n},{k},{r}) for {}: {why}", spec.regime)));
    if n == 0 || k == 0 || r > n {
        return fail("need n ≥ 1, k ≥ 1 and r ≤ n");
    }
    let m = n - r;
    let near = |k: usize, target: f64| (k as f64 - target).abs() <= 1.0;
    match spec.regime {
        Regime::R1 => {
            if r == 0 || k < 2 * r || n < 2 * k {
                return fail("need n ≥ 2k and k ≥ 2r ≥ 2");
            }
        }
        Regime::R2 => {
            let th = spec.theta.unwrap_or(1.0);
            if r == 0 || !near(k, th * r as f64) || n < 4 * k {
                return fail("need k = ⌈θr⌉ and n ≥ 4k");
            }
        }
        Regime::R3 => {
            if 8 * k > r.min(m) {
                return fail("need k ≤ min(r, n−r)/8");
            }
        }
        Regime::R4 => {
            let th = spec.theta.unwrap_or(1.0);
            if m == 0 || !near(k, th * m as f64) || n < 4 * k || n < 4 * m {
                return fail("need k = ⌈θ(n−r)⌉ and n ≥ 4·max(k, n−r)");
            }
        }
        Regime::R5 => {
            if m == 0 || k < 2 * m || n < 2 * k {
                return fail("need n ≥ 2k and k ≥ 2(n−r) ≥ 2");
            }
        }
    }
    Ok(())
}

/// Budgets for supporting estimates needed when no closed form applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportConfig {
    pub meander_n: usize,
    pub meander_samples: usize,
    pub renewal_walks: usize,
    pub renewal_depth: usize,
    pub levy_resolution: usize,
    pub levy_paths: usize,
    /// Optional CSV files from `renewal` / `meander` runs to reuse.
    pub renewal_minus_path: Option<String>,
    pub meander_plus_path: Option<String>,
}

impl Default for SupportConfig {
    fn default() -> Self {
        SupportConfig {
            meander_n: 2048,
            meander_samples: 20_000,
            renewal_walks: 4000,
            renewal_depth: 50,
            levy_resolution: 4096,
            levy_paths: 20_000,
            renewal_minus_path: None,
            meander_plus_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub params: StableParams,
    pub regime: RegimeSpec,
    pub triples: Vec<Triple>,
    pub w: f64,
    /// Conditioned samples per triple.
    pub budget: usize,
    pub sampler: SamplerMethod,
    pub seed: u64,
    pub y_grid: Vec<f64>,
    /// Attempt cap for the rejection sampler, per triple.
    pub max_attempts: u64,
    pub support: SupportConfig,
    /// Replaces ρ in the theoretical curve only (negative controls).
    pub theory_rho: Option<f64>,
}

impl ExperimentPlan {
    pub fn new(params: StableParams, regime: RegimeSpec, triples: Vec<Triple>, budget: usize, seed: u64) -> Self {
        let y_grid = regime.default_grid(&params, 101);
        let sampler = if params.is_gaussian() { SamplerMethod::Spliced } else { SamplerMethod::HTransform };
        ExperimentPlan {
            params,
            regime,
            triples,
            w: 0.0,
            budget,
            sampler,
            seed,
            y_grid,
            max_attempts: 50_000_000,
            support: SupportConfig::default(),
            theory_rho: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.triples.is_empty() {
            return Err(Error::RegimeViolation("plan has no (n,k,r) triples".into()));
        }
        for tr in &self.triples {
            check_triple(&self.regime, tr)?;
        }
        if !(self.w >= 0.0 && self.w.is_finite()) {
            return Err(Error::DomainError(format!("start w must be ≥ 0, got {}", self.w)));
        }
        if self.budget == 0 {
            return Err(Error::SamplerShortfall("sample budget is zero".into()));
        }
        if self.y_grid.is_empty() {
            return Err(Error::GridMismatch("empty y-grid".into()));
        }
        for &y in &self.y_grid {
            self.regime.check_y(&self.params, y)?;
        }
        if self.sampler == SamplerMethod::Spliced && !self.params.is_gaussian() {
            return Err(Error::DomainError("the spliced sampler needs alpha = 2".into()));
        }
        if let Some(r) = self.theory_rho {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::DomainError(format!("theory rho must lie in (0,1), got {r}")));
            }
        }
        Ok(())
    }

    /// Conditioning level x = t·a_k and the scale dividing the functional.
    fn scales(&self, tr: &Triple) -> (f64, f64) {
        let s = ScalingSequence { alpha: self.params.alpha };
        let x = self.regime.t * s.a(tr.k as f64);
        let scale = match self.regime.regime {
            Regime::R1 | Regime::R2 => s.a(tr.r as f64),
            Regime::R3 => s.a(tr.k as f64),
            Regime::R4 | Regime::R5 => s.a(tr.m() as f64),
        };
        (x, scale)
    }
}

/// What is kept of each conditioned path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSummary {
    /// L_{r,n}
    pub l_rn: f64,
    /// L_{n−r,n}
    pub l_tail: f64,
    pub s_r: f64,
    pub endpoint: f64,
}

pub fn summarize_path(s: &[f64], r: usize) -> PathSummary {
    let n = s.len() - 1;
    let main = window_functionals_slice(s, r, n).expect("r ≤ n by plan validation");
    let tail = window_functionals_slice(s, n - r, n).expect("n − r ≤ n");
    PathSummary { l_rn: main.l_rn, l_tail: tail.l_rn, s_r: s[r], endpoint: s[n] }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleReport {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub seed: u64,
    /// Conditioning level t·a_k and the divisor of the functional.
    pub x: f64,
    pub scale: f64,
    pub empirical: Option<EmpiricalCdf>,
    pub ks: Option<f64>,
    /// Standard error scale of the KS statistic (max pointwise combined error).
    pub ks_error: Option<f64>,
    pub samples: usize,
    pub attempts: u64,
    pub acceptance_rate: f64,
    pub acceptance_se: f64,
    pub ess: f64,
    pub weight_normalization: (f64, f64),
    /// Weighted fraction of paths with L_{r,n} = L_{n−r,n}, and its standard error.
    pub localization: (f64, f64),
    pub shortfall: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema_version: u32,
    pub plan: ExperimentPlan,
    pub theory: LimitCdf,
    pub triples: Vec<TripleReport>,
    pub flags: Vec<String>,
    /// RAYON_NUM_THREADS at run time. Numbers do not depend on it.
    #[serde(default)]
    pub threads_env: Option<String>,
}

/// Sup-norm distance between an empirical CDF and a theoretical curve on a
/// common grid.
pub fn ks_distance(emp: &EmpiricalCdf, theory: &LimitCdf) -> Result<f64> {
    if emp.grid.len() != theory.grid.len() || emp.grid.iter().zip(&theory.grid).any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0)) {
        return Err(Error::GridMismatch(format!("empirical grid has {} points, theory grid {}", emp.grid.len(), theory.grid.len())));
    }
    Ok(emp.values.iter().zip(&theory.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

fn ks_error(emp: &EmpiricalCdf, theory: &LimitCdf) -> f64 {
    emp.stderr.iter().zip(&theory.errors).map(|(a, b)| a.hypot(*b)).fold(0.0, f64::max)
}

/// Supporting objects for non-Gaussian parameters.
struct Support {
    meander: Option<MeanderDensityEstimate>,
    renewal_minus: Option<RenewalTable>,
}

fn build_support(plan: &ExperimentPlan) -> Result<Support> {
    let p = &plan.params;
    let sup = &plan.support;
    let needs_meander = !p.is_gaussian() && matches!(plan.regime.regime, Regime::R1 | Regime::R2);
    let meander = if needs_meander {
        Some(match &sup.meander_plus_path {
            Some(path) => MeanderDensityEstimate::read_csv(Path::new(path))?,
            None => estimate_meander_density(p, Sign::Plus, sup.meander_n, sup.meander_samples, derive_seed(plan.seed, 0xA11CE))?,
        })
    } else {
        None
    };
    let renewal_minus = if plan.sampler == SamplerMethod::HTransform {
        Some(match &sup.renewal_minus_path {
            Some(path) => RenewalTable::read_csv(Path::new(path))?,
            None => {
                let n_max = plan.triples.iter().map(|t| t.n).max().unwrap_or(1) as u64;
                build_renewal(p, Sign::Minus, n_max, sup.renewal_walks, sup.renewal_depth, derive_seed(plan.seed, 0xB0B))?
            }
        })
    } else {
        None
    };
    Ok(Support { meander, renewal_minus })
}

/// Theoretical curve for the plan, honoring a ρ override.
pub fn theory_curve(plan: &ExperimentPlan, meander: Option<&MeanderDensityEstimate>) -> Result<LimitCdf> {
    let mut p = plan.params;
    if let Some(r) = plan.theory_rho {
        p.rho = r;
    }
    let law = match (MeanderLaw::closed_form(&p), meander) {
        (Some(l), _) => l,
        (None, Some(m)) => MeanderLaw::Estimate(m),
        (None, None) => MeanderLaw::Rayleigh { sigma: 1.0 },
    };
    let css = match plan.regime.regime {
        Regime::R1 | Regime::R2 => law.c_star_star(&p)?.value,
        _ => 1.0,
    };
    let ctx = LimitContext {
        params: p,
        meander: law,
        c_star_star: css,
        resolution: plan.support.levy_resolution,
        paths: plan.support.levy_paths,
        seed: derive_seed(plan.seed, 0x7E0),
    };
    limit_curve(&plan.regime, &ctx, &plan.y_grid)
}

fn draw(plan: &ExperimentPlan, tr: &Triple, x: f64, seed: u64, renewal: Option<&RenewalTable>) -> Result<ConditionedSample<PathSummary>> {
    let ev = ConditioningEvent::new(x, tr.n)?;
    let r = tr.r;
    let extract = move |s: &[f64]| summarize_path(s, r);
    match plan.sampler {
        SamplerMethod::Rejection => sample_conditioned_rejection(&plan.params, plan.w, &ev, plan.budget, plan.max_attempts, seed, extract),
        SamplerMethod::Spliced => sample_conditioned_spliced(&plan.params, plan.w, &ev, plan.budget, seed, extract),
        SamplerMethod::HTransform => {
            let v = renewal.ok_or_else(|| Error::DomainError("h-transform sampler without a renewal table".into()))?;
            sample_conditioned_htransform(&plan.params, plan.w, &ev, v, plan.budget, seed, extract)
        }
    }
}

fn functional_value(regime: Regime, s: &PathSummary) -> f64 {
    match regime {
        Regime::R5 => s.l_rn - s.s_r,
        _ => s.l_rn,
    }
}

fn weighted_fraction(flags: impl Iterator<Item = bool>, weights: &[f64]) -> (f64, f64) {
    let total: f64 = weights.iter().sum();
    let hits: Vec<f64> = flags.map(|b| f64::from(u8::from(b))).collect();
    let f = hits.iter().zip(weights).map(|(h, w)| h * w).sum::<f64>() / total;
    let var = hits.iter().zip(weights).map(|(h, w)| (w * (h - f)).powi(2)).sum::<f64>() / (total * total);
    (f, var.sqrt())
}

/// Runs every triple of the plan. Sampler shortfalls are recorded in the
/// affected triple and in `flags`; the report is still returned.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ComparisonReport> {
    plan.validate()?;
    let support = build_support(plan)?;
    let theory = theory_curve(plan, support.meander.as_ref())?;
    let mut triples = Vec::with_capacity(plan.triples.len());
    let mut flags = Vec::new();
    for (i, tr) in plan.triples.iter().enumerate() {
        let seed = derive_seed(plan.seed, i as u64 + 1);
        let (x, scale) = plan.scales(tr);
        let mut rep = TripleReport {
            n: tr.n,
            k: tr.k,
            r: tr.r,
            seed,
            x,
            scale,
            empirical: None,
            ks: None,
            ks_error: None,
            samples: 0,
            attempts: 0,
            acceptance_rate: 0.0,
            acceptance_se: 0.0,
            ess: 0.0,
            weight_normalization: (0.0, 0.0),
            localization: (0.0, 0.0),
            shortfall: None,
        };
        match draw(plan, tr, x, seed, support.renewal_minus.as_ref()) {
            Ok(sample) => {
                let vals: Vec<f64> = sample.records.iter().map(|s| functional_value(plan.regime.regime, s)).collect();
                let emp = empirical_cdf_from_values(&vals, &sample.weights, scale, &plan.y_grid)?;
                rep.ks = Some(ks_distance(&emp, &theory)?);
                rep.ks_error = Some(ks_error(&emp, &theory));
                rep.empirical = Some(emp);
                rep.samples = sample.len();
                rep.attempts = sample.attempts;
                rep.acceptance_rate = sample.acceptance_rate;
                rep.acceptance_se = sample.acceptance_se;
                rep.ess = sample.ess;
                rep.weight_normalization = sample.weight_normalization;
                rep.localization = weighted_fraction(sample.records.iter().map(|s| s.l_rn == s.l_tail), &sample.weights);
            }
            Err(e @ (Error::BudgetExhausted { .. } | Error::DegenerateWeights { .. } | Error::SamplerShortfall(_))) => {
                let msg = e.to_string();
                flags.push(format!("({},{},{}): {msg}", tr.n, tr.k, tr.r));
                rep.shortfall = Some(msg);
            }
            Err(e) => return Err(e),
        }
        triples.push(rep);
    }
    Ok(ComparisonReport {
        schema_version: SCHEMA_VERSION,
        plan: plan.clone(),
        theory,
        triples,
        flags,
        threads_env: std::env::var("RAYON_NUM_THREADS").ok(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub ks: f64,
    pub ks_error: f64,
    pub localization: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Every step satisfies KS_{i+1} ≤ KS_i + 2·(combined error).
    pub monotone: bool,
    pub flags: Vec<String>,
}

/// Checks the nonincreasing-within-error property along a ladder.
pub fn sweep_from_report(report: &ComparisonReport) -> Result<SweepTable> {
    if report.triples.len() < 3 {
        return Err(Error::DomainError(format!("a convergence ladder needs at least 3 points, got {}", report.triples.len())));
    }
    let mut rows = Vec::new();
    let mut flags = report.flags.clone();
    for t in &report.triples {
        match (t.ks, t.ks_error) {
            (Some(ks), Some(err)) => rows.push(SweepRow { n: t.n, k: t.k, r: t.r, ks, ks_error: err, localization: t.localization.0 }),
            _ => return Err(Error::SamplerShortfall(format!("ladder point n={} has no sample", t.n))),
        }
    }
    let mut monotone = true;
    for w in rows.windows(2) {
        let allowed = w[0].ks + 2.0 * w[0].ks_error.hypot(w[1].ks_error);
        if w[1].ks > allowed {
            monotone = false;
            flags.push(format!("KS rises from {:.4} (n={}) to {:.4} (n={}) beyond 2 combined errors", w[0].ks, w[0].n, w[1].ks, w[1].n));
        }
    }
    Ok(SweepTable { rows, monotone, flags })
}

pub fn convergence_sweep(plan: &ExperimentPlan) -> Result<(ComparisonReport, SweepTable)> {
    if plan.triples.len() < 3 {
        return Err(Error::DomainError(format!("a convergence ladder needs at least 3 points, got {}", plan.triples.len())));
    }
    let report = run_experiment(plan)?;
    let table = sweep_from_report(&report)?;
    Ok((report, table))
}

/// Fraction of conditioned paths whose minimum over [r, n] is attained in
/// [n − r, n], for each triple of an R3 plan.
pub fn localization_fraction(plan: &ExperimentPlan) -> Result<Vec<(Triple, f64, f64)>> {
    if plan.regime.regime != Regime::R3 {
        return Err(Error::RegimeViolation(format!("localization is defined for r3 plans, got {}", plan.regime.regime)));
    }
    let report = run_experiment(plan)?;
    report
        .triples
        .iter()
        .map(|t| match &t.shortfall {
            None => Ok((Triple::new(t.n, t.k, t.r), t.localization.0, t.localization.1)),
            Some(msg) => Err(Error::SamplerShortfall(msg.clone())),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the report. CSV keeps one row per (triple, y) with the documented
/// columns; everything else rides along in a `# meta=` comment line as JSON so
/// that the loader can rebuild the report exactly.
pub fn serialize_report(report: &ComparisonReport, format: ReportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ReportFormat::Json => serde_json::to_string_pretty(report)? + "\n",
        ReportFormat::Csv => report_to_csv(report)?,
    };
    std::fs::write(path, text).map_err(|e| Error::IoFailure(format!("{}: {e}", path.display())))
}

pub fn report_to_csv(report: &ComparisonReport) -> Result<String> {
    let mut meta = report.clone();
    for t in &mut meta.triples {
        if let Some(e) = &mut t.empirical {
            e.values.clear();
            e.stderr.clear();
            e.grid.clear();
        }
    }
    let mut out = format!("# schema_version={}\n# meta={}\n", report.schema_version, serde_json::to_string(&meta)?);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    let p = &report.plan.params;
    let spec = &report.plan.regime;
    for t in &report.triples {
        let Some(emp) = &t.empirical else { continue };
        for (i, y) in emp.grid.iter().enumerate() {
            w.write_record([
                spec.regime.to_string(),
                p.alpha.to_string(),
                p.beta.to_string(),
                p.c.to_string(),
                spec.t.to_string(),
                fmt_opt(spec.theta),
                t.n.to_string(),
                t.k.to_string(),
                t.r.to_string(),
                report.plan.w.to_string(),
                y.to_string(),
                emp.values[i].to_string(),
                emp.stderr[i].to_string(),
                report.theory.values[i].to_string(),
                fmt_opt(t.ks),
                t.seed.to_string(),
            ])?;
        }
    }
    let body = w.into_inner().map_err(|e| Error::IoFailure(e.to_string()))?;
    out.push_str(&String::from_utf8(body).map_err(|e| Error::IoFailure(e.to_string()))?);
    Ok(out)
}

pub fn load_report(path: &Path) -> Result<ComparisonReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::IoFailure(format!("{}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        let rep: ComparisonReport = serde_json::from_str(&text)?;
        return check_version(rep);
    }
    report_from_csv(&text)
}

fn check_version(rep: ComparisonReport) -> Result<ComparisonReport> {
    if rep.schema_version != SCHEMA_VERSION {
        return Err(Error::UnknownFormat(format!("schema_version {}", rep.schema_version)));
    }
    Ok(rep)
}

pub fn report_from_csv(text: &str) -> Result<ComparisonReport> {
    let mut meta: Option<ComparisonReport> = None;
    let mut body = String::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# meta=") {
            meta = Some(serde_json::from_str(rest)?);
        } else if !line.starts_with('#') {
            body.push_str(line);
            body.push('\n');
        }
    }
    let mut rep = meta.ok_or_else(|| Error::IoFailure("CSV report lacks its `# meta=` line".into()))?;
    let mut rd = csv::Reader::from_reader(body.as_bytes());
    let header: Vec<String> = rd.headers()?.iter().map(String::from).collect();
    if header != CSV_COLUMNS {
        return Err(Error::IoFailure(format!("unexpected CSV columns {header:?}")));
    }
    let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::IoFailure(format!("`{s}`: {e}")));
    for rec in rd.records() {
        let rec = rec?;
        let key = (rec[6].parse().unwrap_or(0), rec[7].parse().unwrap_or(0), rec[8].parse().unwrap_or(0));
        let t = rep.triples.iter_mut().find(|t| (t.n, t.k, t.r) == key).ok_or_else(|| Error::IoFailure(format!("row for unknown triple {key:?}")))?;
        let emp = t.empirical.as_mut().ok_or_else(|| Error::IoFailure(format!("rows for triple {key:?} without sample")))?;
        emp.grid.push(parse(&rec[10])?);
        emp.values.push(parse(&rec[11])?);
        emp.stderr.push(parse(&rec[12])?);
    }
    check_version(rep)
}
