mod config;

use clap::{Parser, Subcommand};
use condwalk::acceptance::{format_line, run_acceptance, AcceptanceConfig, Budget};
use condwalk::experiment::{report_to_csv, run_experiment, sweep_from_report, ExperimentPlan};
use condwalk::ladder::{build_constants_inputs, build_renewal, estimate_meander_density, ConstantsConfig, MeanderDensityEstimate, Sign};
use condwalk::limits::{limit_curve, limits_csv, LimitContext, MeanderLaw, Regime};
use condwalk::rng::derive_seed;
use condwalk::walk::SamplerMethod;
use condwalk::Error;
use config::{ensure_dir, Invalid, Settings};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "condwalk", version, about = "Conditioned stable random walks: limit laws, renewal functions and Monte Carlo checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Theoretical limit CDF of a regime, as CSV
    Limits(Settings),
    /// Conditioned empirical CDFs against theory, as CSV and JSON reports
    Simulate(Settings),
    /// Estimate and persist the renewal functions V±
    Renewal(Settings),
    /// Estimate and persist meander densities
    Meander(Settings),
    /// C* and C** by both routes
    Constants(Settings),
    /// Run the acceptance suite and write a JSON summary
    Verify(Settings),
    /// Convergence ladder: KS along a sequence of walk lengths
    Sweep(Settings),
}

impl Command {
    fn parts(self) -> (&'static str, Settings) {
        match self {
            Command::Limits(s) => ("limits", s),
            Command::Simulate(s) => ("simulate", s),
            Command::Renewal(s) => ("renewal", s),
            Command::Meander(s) => ("meander", s),
            Command::Constants(s) => ("constants", s),
            Command::Verify(s) => ("verify", s),
            Command::Sweep(s) => ("sweep", s),
        }
    }
}

enum Failure {
    Invalid(Invalid),
    Compute(Error),
    Acceptance(usize, Vec<PathBuf>),
}

impl From<Invalid> for Failure {
    fn from(e: Invalid) -> Self {
        Failure::Invalid(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

type Outcome = Result<Vec<PathBuf>, Failure>;

/// What a run needs to be repeated: the resolved settings and the thread
/// count in effect.
#[derive(Serialize)]
struct RunRecord<'a> {
    subcommand: &'a str,
    settings: &'a Settings,
    threads_env: Option<String>,
    outputs: Vec<String>,
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf, Error> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| Error::IoFailure(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn prepare_out(s: &Settings) -> Result<PathBuf, Error> {
    let dir = s.out_dir();
    ensure_dir(&dir).map_err(|e| Error::IoFailure(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn load_meander(s: &Settings, p: &condwalk::StableParams, seed: u64) -> Result<Option<MeanderDensityEstimate>, Error> {
    if p.is_gaussian() {
        return Ok(None);
    }
    match &s.meander {
        Some(path) => MeanderDensityEstimate::read_csv(Path::new(path)).map(Some),
        None => estimate_meander_density(p, Sign::Plus, 2048, s.meander_samples.unwrap_or(20_000), derive_seed(seed, 0xA11CE)).map(Some),
    }
}

fn limits(s: &Settings) -> Outcome {
    let p = s.params()?;
    let spec = s.regime()?;
    let grid = s.y_grid(&spec, &p, 101)?;
    let seed = s.seed();
    let dir = prepare_out(s)?;
    let needs_meander = matches!(spec.regime, Regime::R1 | Regime::R2);
    let estimate = if needs_meander { load_meander(s, &p, seed)? } else { None };
    let meander = match (MeanderLaw::closed_form(&p), &estimate) {
        (Some(l), _) => l,
        (None, Some(m)) => MeanderLaw::Estimate(m),
        (None, None) => MeanderLaw::Rayleigh { sigma: 1.0 },
    };
    let css = if needs_meander { meander.c_star_star(&p)?.value } else { 1.0 };
    let ctx = LimitContext {
        params: p,
        meander,
        c_star_star: css,
        resolution: s.resolution.unwrap_or(4096),
        paths: s.paths.unwrap_or(20_000),
        seed: derive_seed(seed, 0x7E0),
    };
    let curve = limit_curve(&spec, &ctx, &grid)?;
    let text = limits_csv(&spec, &curve, &p)?;
    Ok(vec![write(&dir, &format!("limits_{}.csv", spec.regime), &text)?])
}

fn plan(s: &Settings, default_n: &[usize]) -> Result<ExperimentPlan, Failure> {
    let p = s.params()?;
    let spec = s.regime()?;
    let triples = s.triples(&spec, default_n)?;
    let grid = s.y_grid(&spec, &p, 101)?;
    let mut plan = ExperimentPlan::new(p, spec, triples, s.samples.unwrap_or(10_000), s.seed());
    plan.y_grid = grid;
    if let Some(w) = s.w {
        plan.w = w;
    }
    if let Some(name) = &s.sampler {
        plan.sampler = name.parse::<SamplerMethod>().map_err(|e| Invalid { flag: "sampler", message: e.to_string() })?;
    }
    if let Some(m) = s.max_attempts {
        plan.max_attempts = m;
    }
    if let Some(v) = s.resolution {
        plan.support.levy_resolution = v;
    }
    if let Some(v) = s.paths {
        plan.support.levy_paths = v;
    }
    if let Some(v) = s.walks {
        plan.support.renewal_walks = v;
    }
    if let Some(v) = s.depth {
        plan.support.renewal_depth = v;
    }
    if let Some(v) = s.meander_samples {
        plan.support.meander_samples = v;
    }
    plan.support.renewal_minus_path = s.renewal.clone();
    plan.support.meander_plus_path = s.meander.clone();
    plan.theory_rho = s.theory_rho;
    plan.validate().map_err(|e| {
        let flag = match e {
            Error::SamplerShortfall(_) => "samples",
            Error::DomainError(ref m) if m.contains("spliced") => "sampler",
            Error::DomainError(ref m) if m.contains("rho") => "theory-rho",
            Error::DomainError(_) => "w",
            _ => "y-grid",
        };
        Invalid { flag, message: e.to_string() }
    })?;
    Ok(plan)
}

fn simulate(s: &Settings) -> Outcome {
    let plan = plan(s, &[4096])?;
    let formats = s.formats()?;
    let dir = prepare_out(s)?;
    let report = run_experiment(&plan)?;
    for f in &report.flags {
        eprintln!("flag: {f}");
    }
    let stem = format!("report_{}", plan.regime.regime);
    let mut out = Vec::new();
    for f in formats {
        let text = if f == "csv" { report_to_csv(&report)? } else { serde_json::to_string_pretty(&report).map_err(Error::from)? + "\n" };
        out.push(write(&dir, &format!("{stem}.{f}"), &text)?);
    }
    Ok(out)
}

fn sweep(s: &Settings) -> Outcome {
    let plan = plan(s, &[1024, 4096, 16384])?;
    if plan.triples.len() < 3 {
        return Err(Invalid { flag: "n", message: format!("a ladder needs at least 3 walk lengths, got {}", plan.triples.len()) }.into());
    }
    let dir = prepare_out(s)?;
    let report = run_experiment(&plan)?;
    let table = sweep_from_report(&report)?;
    let mut csv = String::from("n,k,r,ks,ks_error,localization\n");
    for r in &table.rows {
        csv.push_str(&format!("{},{},{},{},{},{}\n", r.n, r.k, r.r, r.ks, r.ks_error, r.localization));
    }
    let stem = format!("sweep_{}", plan.regime.regime);
    let mut out = vec![write(&dir, &format!("{stem}.csv"), &csv)?];
    #[derive(Serialize)]
    struct Sweep<'a> {
        table: &'a condwalk::experiment::SweepTable,
        report: &'a condwalk::experiment::ComparisonReport,
    }
    let json = serde_json::to_string_pretty(&Sweep { table: &table, report: &report }).map_err(Error::from)? + "\n";
    out.push(write(&dir, &format!("{stem}.json"), &json)?);
    if !table.monotone {
        for f in &table.flags {
            eprintln!("flag: {f}");
        }
    }
    Ok(out)
}

fn renewal(s: &Settings) -> Outcome {
    let p = s.params()?;
    let dirs = s.directions("both")?;
    let seed = s.seed();
    let out_dir = prepare_out(s)?;
    let mut out = Vec::new();
    for d in dirs {
        let table = build_renewal(&p, d, s.n_max.unwrap_or(4096), s.walks.unwrap_or(4000), s.depth.unwrap_or(50), derive_seed(seed, d as u64))?;
        eprintln!("V{}: fitted exponent {:.4} ± {:.4} (theory {:.4})", d.label(), table.fitted_exponent, table.exponent_stderr, table.tail_exponent);
        out.push(write(&out_dir, &format!("renewal_{}.csv", d.label()), &table.to_csv_string())?);
    }
    Ok(out)
}

fn meander(s: &Settings) -> Outcome {
    let p = s.params()?;
    let dirs = s.directions("plus")?;
    let seed = s.seed();
    let n = s.n.first().copied().unwrap_or(2048);
    let out_dir = prepare_out(s)?;
    let mut out = Vec::new();
    for d in dirs {
        let m = estimate_meander_density(&p, d, n, s.meander_samples.unwrap_or(20_000), derive_seed(seed, d as u64))?;
        eprintln!("meander {}: moment {:.4} ± {:.4}, overflow mass {:.4}", d.label(), m.moment_exponent, m.moment_stderr, m.overflow_mass);
        out.push(write(&out_dir, &format!("meander_{}.csv", d.label()), &m.to_csv_string())?);
    }
    Ok(out)
}

fn constants(s: &Settings) -> Outcome {
    let p = s.params()?;
    let d = ConstantsConfig::default();
    let cfg = ConstantsConfig {
        n: s.n.first().copied().unwrap_or(d.n),
        meander_samples: s.meander_samples.unwrap_or(d.meander_samples),
        tail_walks: s.tail_walks.unwrap_or(d.tail_walks),
        renewal_walks: s.walks.unwrap_or(d.renewal_walks),
        renewal_depth: s.depth.unwrap_or(d.renewal_depth),
    };
    let dir = prepare_out(s)?;
    let inputs = build_constants_inputs(&p, &cfg, s.seed())?;
    let c = inputs.estimate(&p)?;
    let oracle = MeanderLaw::closed_form(&p).map(|l| l.c_star_star(&p)).transpose()?.map(|v| v.value);
    #[derive(Serialize)]
    struct Constants {
        params: condwalk::StableParams,
        config: ConstantsConfig,
        seed: u64,
        estimates: condwalk::ladder::AsymptoticConstants,
        discrepancy_sigmas: (f64, f64),
        closed_form: Option<f64>,
    }
    let rec = Constants { params: p, config: cfg, seed: s.seed(), estimates: c, discrepancy_sigmas: c.discrepancy_sigmas(), closed_form: oracle };
    eprintln!(
        "C** = {:.4} ± {:.4} (integral), {:.4} ± {:.4} (product)",
        c.c_star_star, c.c_star_star_err, c.product_c_star_star, c.product_c_star_star_err
    );
    let json = serde_json::to_string_pretty(&rec).map_err(Error::from)? + "\n";
    Ok(vec![write(&dir, "constants.json", &json)?])
}

fn verify(s: &Settings) -> Outcome {
    let budget: Budget = s.budget.as_deref().unwrap_or("small").parse().map_err(|e: Error| Invalid { flag: "budget", message: e.to_string() })?;
    if let Some(a) = s.alpha {
        if !(a > 0.0 && a <= 2.0) {
            return Err(Invalid { flag: "alpha", message: format!("alpha must lie in (0, 2], got {a}") }.into());
        }
    }
    if let Some(bad) = s.only.iter().find(|&&i| !(1..=12).contains(&i)) {
        return Err(Invalid { flag: "only", message: format!("criterion ids run from 1 to 12, got {bad}") }.into());
    }
    let dir = prepare_out(s)?;
    let mut cfg = AcceptanceConfig::new(budget, s.seed());
    cfg.alpha = s.alpha;
    cfg.only = s.only.clone();
    let summary = run_acceptance(&cfg, |r| println!("{}", format_line(r)));
    let json = serde_json::to_string_pretty(&summary).map_err(Error::from)? + "\n";
    let path = write(&dir, "verify.json", &json)?;
    println!("{} passed, {} failed, {} skipped", summary.passed, summary.failed, summary.skipped);
    if summary.all_passed() {
        Ok(vec![path])
    } else {
        Err(Failure::Acceptance(summary.failed, vec![path]))
    }
}

fn record(name: &str, settings: &Settings, paths: &[PathBuf]) {
    let rec = RunRecord {
        subcommand: name,
        settings,
        threads_env: std::env::var("RAYON_NUM_THREADS").ok(),
        outputs: paths.iter().map(|p| p.display().to_string()).collect(),
    };
    if let Ok(json) = serde_json::to_string_pretty(&rec) {
        let _ = std::fs::write(settings.out_dir().join(format!("{name}.run.json")), json + "\n");
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (name, raw) = cli.command.parts();
    let settings = match raw.resolve() {
        Ok(s) => Settings { seed: Some(s.seed()), ..s },
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let result = match name {
        "limits" => limits(&settings),
        "simulate" => simulate(&settings),
        "renewal" => renewal(&settings),
        "meander" => meander(&settings),
        "constants" => constants(&settings),
        "verify" => verify(&settings),
        _ => sweep(&settings),
    };
    match result {
        Ok(paths) => {
            record(name, &settings, &paths);
            for p in &paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Acceptance(n, paths)) => {
            record(name, &settings, &paths);
            eprintln!("error: {n} acceptance criteria failed");
            ExitCode::from(3)
        }
    }
}
