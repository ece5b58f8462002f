//! Flat settings shared by every subcommand. The same keys work as flags and
//! in a JSON file given with `--config`; flags win.

use clap::Args;
use condwalk::experiment::{check_triple, default_triple, Triple};
use condwalk::limits::{Regime, RegimeSpec};
use condwalk::StableParams;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// A bad or missing setting, reported with the flag that carries it.
#[derive(Debug)]
pub struct Invalid {
    pub flag: &'static str,
    pub message: String,
}

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "--{}: {}", self.flag, self.message)
    }
}

fn invalid(flag: &'static str, message: impl Into<String>) -> Invalid {
    Invalid { flag, message: message.into() }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// JSON file with any of these settings as flat keys (flags take precedence)
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long, help_heading = "Stable law")]
    pub alpha: Option<f64>,
    /// Skewness [default: 0]
    #[arg(long, allow_negative_numbers = true, help_heading = "Stable law")]
    pub beta: Option<f64>,
    /// Scale in exp{-c|w|^alpha(...)} [default: 1]
    #[arg(long, help_heading = "Stable law")]
    pub c: Option<f64>,

    /// r1 .. r5
    #[arg(long, help_heading = "Regime")]
    pub regime: Option<String>,
    /// Conditioning level: the endpoint stays below t·a_k [default: 1]
    #[arg(long, help_heading = "Regime")]
    pub t: Option<f64>,
    /// Ratio for r2 (k = θr) and r4 (k = θ(n−r))
    #[arg(long, help_heading = "Regime")]
    pub theta: Option<f64>,
    /// `lo:hi:step` or a comma list
    #[arg(long, allow_hyphen_values = true, help_heading = "Regime")]
    pub y_grid: Option<String>,
    /// Walk lengths, comma separated (one per ladder point)
    #[arg(long, value_delimiter = ',', help_heading = "Regime")]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', help_heading = "Regime")]
    pub k: Vec<usize>,
    /// Window start; defaults follow the regime's instantiation rule
    #[arg(long, value_delimiter = ',', help_heading = "Regime")]
    pub r: Vec<usize>,
    /// Tail length n − r, an alternative to --r for r4 and r5
    #[arg(long, value_delimiter = ',', help_heading = "Regime")]
    pub m: Vec<usize>,
    /// Starting point of the walk [default: 0]
    #[arg(long, help_heading = "Regime")]
    pub w: Option<f64>,

    /// Conditioned samples per triple [default: 10000]
    #[arg(long, help_heading = "Budgets")]
    pub samples: Option<usize>,
    /// rejection, htransform or spliced
    #[arg(long, help_heading = "Budgets")]
    pub sampler: Option<String>,
    #[arg(long, help_heading = "Budgets")]
    pub max_attempts: Option<u64>,
    /// Lévy path resolution for Monte Carlo limit laws [default: 4096]
    #[arg(long, help_heading = "Budgets")]
    pub resolution: Option<usize>,
    /// Lévy paths for Monte Carlo limit laws [default: 20000]
    #[arg(long, help_heading = "Budgets")]
    pub paths: Option<usize>,
    /// plus, minus or both
    #[arg(long, help_heading = "Budgets")]
    pub direction: Option<String>,
    /// Largest n the renewal grid must cover [default: 4096]
    #[arg(long, help_heading = "Budgets")]
    pub n_max: Option<u64>,
    /// Ladder walks for renewal estimation [default: 4000]
    #[arg(long, help_heading = "Budgets")]
    pub walks: Option<usize>,
    /// Ladder epochs per walk [default: 50]
    #[arg(long, help_heading = "Budgets")]
    pub depth: Option<usize>,
    /// Meander samples [default: 20000]
    #[arg(long, help_heading = "Budgets")]
    pub meander_samples: Option<usize>,
    /// Walks for the ladder-epoch tail [default: 1000000]
    #[arg(long, help_heading = "Budgets")]
    pub tail_walks: Option<usize>,
    /// small or full
    #[arg(long, help_heading = "Budgets")]
    pub budget: Option<String>,
    /// Criterion ids for `verify`, comma separated
    #[arg(long, value_delimiter = ',', help_heading = "Budgets")]
    pub only: Vec<u32>,

    /// csv, json or both [default: both]
    #[arg(long, help_heading = "Files")]
    pub format: Option<String>,
    /// Renewal table CSV (minus side) to reuse
    #[arg(long, help_heading = "Files")]
    pub renewal: Option<String>,
    /// Meander density CSV (plus side) to reuse
    #[arg(long, help_heading = "Files")]
    pub meander: Option<String>,
    /// Replace ρ in the theoretical curve only
    #[arg(long, help_heading = "Files")]
    pub theory_rho: Option<f64>,
}

macro_rules! prefer {
    ($a:expr, $b:expr; $($f:ident),*; $($v:ident),*) => {{
        let (a, b) = ($a, $b);
        Settings {
            config: a.config,
            $($f: a.$f.or(b.$f),)*
            $($v: if a.$v.is_empty() { b.$v } else { a.$v },)*
        }
    }};
}

impl Settings {
    /// Reads `--config` if given and fills every unset flag from it.
    pub fn resolve(self) -> Result<Settings, Invalid> {
        let Some(path) = self.config.clone() else { return Ok(self) };
        let text = std::fs::read_to_string(&path).map_err(|e| invalid("config", format!("{}: {e}", path.display())))?;
        let file: Settings = serde_json::from_str(&text).map_err(|e| invalid("config", format!("{}: {e}", path.display())))?;
        Ok(prefer!(self, file;
            out, seed, alpha, beta, c, regime, t, theta, y_grid, w, samples, sampler, max_attempts, resolution, paths,
            direction, n_max, walks, depth, meander_samples, tail_walks, budget, format, renewal, meander, theory_rho;
            n, k, r, m, only))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("condwalk-out"))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    pub fn params(&self) -> Result<StableParams, Invalid> {
        let alpha = self.alpha.ok_or_else(|| invalid("alpha", "missing (required by this subcommand)"))?;
        let beta = self.beta.unwrap_or(0.0);
        let c = self.c.unwrap_or(1.0);
        StableParams::new(alpha, beta, c).map_err(|e| {
            let flag = if matches!(e, condwalk::Error::NonpositiveScale(_)) { "c" } else { "alpha" };
            invalid(flag, e.to_string())
        })
    }

    pub fn regime(&self) -> Result<RegimeSpec, Invalid> {
        let name = self.regime.as_deref().ok_or_else(|| invalid("regime", "missing (r1 .. r5)"))?;
        let regime: Regime = name.parse().map_err(|e: condwalk::Error| invalid("regime", e.to_string()))?;
        let theta =
            if regime.uses_theta() { Some(self.theta.ok_or_else(|| invalid("theta", format!("missing (required by {regime})")))?) } else { None };
        RegimeSpec::new(regime, self.t.unwrap_or(1.0), theta)
            .map_err(|e| invalid(if self.t.is_some_and(|t| t <= 0.0) { "t" } else { "theta" }, e.to_string()))
    }

    pub fn y_grid(&self, spec: &RegimeSpec, p: &StableParams, points: usize) -> Result<Vec<f64>, Invalid> {
        let grid = match &self.y_grid {
            Some(s) => condwalk::limits::parse_y_grid(s).map_err(|e| invalid("y-grid", e.to_string()))?,
            None => spec.default_grid(p, points),
        };
        for &y in &grid {
            spec.check_y(p, y).map_err(|e| invalid("y-grid", e.to_string()))?;
        }
        Ok(grid)
    }

    /// Triples from --n with optional --k and --r/--m, each either one value
    /// or one per n. Missing entries follow the default instantiation.
    pub fn triples(&self, spec: &RegimeSpec, default_n: &[usize]) -> Result<Vec<Triple>, Invalid> {
        let ns: Vec<usize> = if self.n.is_empty() { default_n.to_vec() } else { self.n.clone() };
        let pick = |v: &[usize], i: usize, flag: &'static str| -> Result<Option<usize>, Invalid> {
            match v.len() {
                0 => Ok(None),
                1 => Ok(Some(v[0])),
                l if l == ns.len() => Ok(Some(v[i])),
                l => Err(invalid(flag, format!("{l} values for {} walk lengths", ns.len()))),
            }
        };
        if !self.r.is_empty() && !self.m.is_empty() {
            return Err(invalid("m", "give either --r or --m, not both"));
        }
        let mut out = Vec::new();
        for (i, &n) in ns.iter().enumerate() {
            if n < 2 {
                return Err(invalid("n", format!("walk length must be at least 2, got {n}")));
            }
            let mut tr = default_triple(spec.regime, n, spec.theta);
            if let Some(k) = pick(&self.k, i, "k")? {
                tr.k = k;
            }
            if let Some(r) = pick(&self.r, i, "r")? {
                tr.r = r;
            }
            if let Some(m) = pick(&self.m, i, "m")? {
                if m > n {
                    return Err(invalid("m", format!("tail length {m} exceeds n = {n}")));
                }
                tr.r = n - m;
            }
            check_triple(spec, &tr).map_err(|e| invalid("n", e.to_string()))?;
            out.push(tr);
        }
        Ok(out)
    }

    pub fn directions(&self, default: &str) -> Result<Vec<condwalk::ladder::Sign>, Invalid> {
        use condwalk::ladder::Sign;
        match self.direction.as_deref().unwrap_or(default) {
            "both" => Ok(vec![Sign::Minus, Sign::Plus]),
            s => Ok(vec![s.parse().map_err(|e: condwalk::Error| invalid("direction", e.to_string()))?]),
        }
    }

    pub fn formats(&self) -> Result<Vec<&'static str>, Invalid> {
        match self.format.as_deref().unwrap_or("both") {
            "both" => Ok(vec!["csv", "json"]),
            "csv" => Ok(vec!["csv"]),
            "json" => Ok(vec!["json"]),
            other => Err(invalid("format", format!("unknown format `{other}` (csv, json or both)"))),
        }
    }
}

pub fn ensure_dir(dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)
}
