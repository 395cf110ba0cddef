//! Run configuration: defaults, the `key = value` file format, and merging
//! with command-line flags.
//!
//! Grammar of a config file, one entry per line:
//!
//! ```text
//! line    := blank | comment | entry
//! comment := '#' anything
//! entry   := key ws* '=' ws* value
//! ```
//!
//! Keys are the long flag names with `-` or `_` (`max-spins`, `max_spins`).
//! Integer lists accept `4`, `2,4,6`, `2..8` (inclusive) and mixtures like
//! `2..6,10`. Flags given on the command line override file values.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use ladder_ent::analysis::Trend;
use ladder_ent::spectral::DEFAULT_SEED;
use ladder_ent::tolerances::LANCZOS_RITZ_TOL;
use ladder_ent::{Boundary, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    ExactGgm,
    RvbGgm,
    Compare,
    Scan,
    Fit,
    Validate,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::ExactGgm => "exact-ggm",
            Command::RvbGgm => "rvb-ggm",
            Command::Compare => "compare",
            Command::Scan => "scan",
            Command::Fit => "fit",
            Command::Validate => "validate",
        }
    }
}

impl FromStr for Command {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Ok(match s {
            "exact-ggm" => Command::ExactGgm,
            "rvb-ggm" => Command::RvbGgm,
            "compare" => Command::Compare,
            "scan" => Command::Scan,
            "fit" => Command::Fit,
            "validate" => Command::Validate,
            other => return Err(ConfigError(format!("unknown command `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Exact,
    Rvb,
    RvbRecursive,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Exact => "exact",
            Model::Rvb => "rvb",
            Model::RvbRecursive => "rvb-recursive",
        }
    }
}

impl FromStr for Model {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Ok(match s {
            "exact" => Model::Exact,
            "rvb" => Model::Rvb,
            "rvb-recursive" => Model::RvbRecursive,
            other => return Err(ConfigError(format!("unknown model `{other}`"))),
        })
    }
}

/// What `validate` checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Spectral,
    RvbRecursion,
    Restricted,
    Identities,
    All,
}

impl Target {
    pub fn as_str(self) -> &'static str {
        match self {
            Target::Spectral => "spectral",
            Target::RvbRecursion => "rvb-recursion",
            Target::Restricted => "restricted",
            Target::Identities => "identities",
            Target::All => "all",
        }
    }
}

impl FromStr for Target {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Ok(match s {
            "spectral" => Target::Spectral,
            "rvb-recursion" => Target::RvbRecursion,
            "restricted" => Target::Restricted,
            "identities" => Target::Identities,
            "all" => Target::All,
            other => return Err(ConfigError(format!("unknown validation target `{other}`"))),
        })
    }
}

/// How `fit` picks the trend of each leg count's data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignRule {
    /// From the data; non-monotone data are an error.
    Data,
    Fixed(Trend),
    /// Odd leg counts increasing, even ones decreasing.
    LegParity,
}

impl SignRule {
    pub fn as_str(self) -> &'static str {
        match self {
            SignRule::Data => "auto",
            SignRule::Fixed(t) => t.symbol(),
            SignRule::LegParity => "parity",
        }
    }

    pub fn hint(self, legs: usize) -> Option<Trend> {
        match self {
            SignRule::Data => None,
            SignRule::Fixed(t) => Some(t),
            SignRule::LegParity if legs % 2 == 1 => Some(Trend::Increasing),
            SignRule::LegParity => Some(Trend::Decreasing),
        }
    }
}

impl FromStr for SignRule {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "" | "auto" => Ok(SignRule::Data),
            "parity" => Ok(SignRule::LegParity),
            other => other
                .parse()
                .map(SignRule::Fixed)
                .map_err(|e| ConfigError(format!("sign: {e}"))),
        }
    }
}

/// Invalid configuration; the CLI exits with status 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub legs: Vec<usize>,
    pub rungs: Vec<usize>,
    pub boundary: Boundary,
    pub model: Model,
    pub j: f64,
    pub delta: f64,
    pub strategy: Strategy,
    pub jobs: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub tol: f64,
    pub delta_e_per_site: bool,
    pub input: Option<PathBuf>,
    pub sign: SignRule,
    /// Fits use even rung counts from this one up.
    pub fit_min_rungs: usize,
    pub what: Target,
    pub max_spins: usize,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            legs: Vec::new(),
            rungs: Vec::new(),
            boundary: Boundary::PeriodicAlongLegs,
            model: match command {
                Command::RvbGgm => Model::Rvb,
                _ => Model::Exact,
            },
            j: 1.0,
            delta: 1.0,
            strategy: Strategy::Restricted2xL,
            jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
            seed: DEFAULT_SEED,
            out: PathBuf::from("ladder-ent-out"),
            tol: LANCZOS_RITZ_TOL,
            delta_e_per_site: false,
            input: None,
            sign: SignRule::Data,
            fit_min_rungs: 2,
            what: Target::All,
            max_spins: 20,
        }
    }

    /// Sets `key` from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let bad = |e: &dyn std::fmt::Display| ConfigError(format!("{key}: {e}"));
        match key.as_str() {
            "command" => self.command = value.parse()?,
            "legs" => self.legs = parse_list(value).map_err(|e| bad(&e))?,
            "rungs" => self.rungs = parse_list(value).map_err(|e| bad(&e))?,
            "boundary" => self.boundary = value.parse().map_err(|e| bad(&e))?,
            "model" => self.model = value.parse()?,
            "j" => self.j = parse_num(value).map_err(|e| bad(&e))?,
            "delta" => self.delta = parse_num(value).map_err(|e| bad(&e))?,
            "strategy" => self.strategy = value.parse().map_err(|e| bad(&e))?,
            "jobs" => self.jobs = value.parse().map_err(|e| bad(&e))?,
            "seed" => self.seed = value.parse().map_err(|e| bad(&e))?,
            "out" => self.out = PathBuf::from(value),
            "tol" => self.tol = parse_num(value).map_err(|e| bad(&e))?,
            "delta-e-per-site" => self.delta_e_per_site = value.parse().map_err(|e| bad(&e))?,
            "input" => self.input = (!value.is_empty()).then(|| PathBuf::from(value)),
            "sign" => self.sign = value.parse()?,
            "fit-min-rungs" => self.fit_min_rungs = value.parse().map_err(|e| bad(&e))?,
            "what" => self.what = value.parse()?,
            "max-spins" => self.max_spins = value.parse().map_err(|e| bad(&e))?,
            other => return Err(ConfigError(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies a config file's entries on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected `key = value`", i + 1)))?;
            self.set(k, v).map_err(|e| ConfigError(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let command = text
            .lines()
            .filter_map(|l| l.split_once('='))
            .find(|(k, _)| k.trim() == "command")
            .map(|(_, v)| v.trim().parse())
            .transpose()?
            .ok_or_else(|| ConfigError("config text has no `command` entry".into()))?;
        let mut cfg = Self::new(command);
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Canonical text form; [`RunConfig::from_text`] reads it back exactly.
    pub fn to_text(&self) -> String {
        let list = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        let _ = writeln!(s, "command = {}", self.command.as_str());
        let _ = writeln!(s, "legs = {}", list(&self.legs));
        let _ = writeln!(s, "rungs = {}", list(&self.rungs));
        let _ = writeln!(s, "boundary = {}", self.boundary);
        let _ = writeln!(s, "model = {}", self.model.as_str());
        let _ = writeln!(s, "j = {:?}", self.j);
        let _ = writeln!(s, "delta = {:?}", self.delta);
        let _ = writeln!(s, "strategy = {}", self.strategy);
        let _ = writeln!(s, "jobs = {}", self.jobs);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "out = {}", self.out.display());
        let _ = writeln!(s, "tol = {:?}", self.tol);
        let _ = writeln!(s, "delta-e-per-site = {}", self.delta_e_per_site);
        let _ = writeln!(s, "input = {}", self.input.as_ref().map(|p| p.display().to_string()).unwrap_or_default());
        let _ = writeln!(s, "sign = {}", self.sign.as_str());
        let _ = writeln!(s, "fit-min-rungs = {}", self.fit_min_rungs);
        let _ = writeln!(s, "what = {}", self.what.as_str());
        let _ = writeln!(s, "max-spins = {}", self.max_spins);
        s
    }

    /// Text form without the fields that do not change results (`jobs`,
    /// `out`), used for the config hash.
    pub fn hash_text(&self) -> String {
        self.to_text()
            .lines()
            .filter(|l| !l.starts_with("jobs =") && !l.starts_with("out ="))
            .map(|l| format!("{l}\n"))
            .collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let needs_geometry = match self.command {
            Command::Validate => false,
            Command::Fit => self.input.is_none(),
            _ => true,
        };
        if needs_geometry && (self.legs.is_empty() || self.rungs.is_empty()) {
            return Err(ConfigError(format!("`{}` needs --legs and --rungs", self.command.as_str())));
        }
        if self.legs.contains(&0) || self.rungs.contains(&0) {
            return Err(ConfigError("legs and rungs must be positive".into()));
        }
        if !(self.j > 0.0) || !self.j.is_finite() {
            return Err(ConfigError("j must be positive".into()));
        }
        if !self.delta.is_finite() {
            return Err(ConfigError("delta must be finite".into()));
        }
        if !(self.tol > 0.0) {
            return Err(ConfigError("tol must be positive".into()));
        }
        if self.jobs == 0 {
            return Err(ConfigError("jobs must be at least 1".into()));
        }
        if self.command == Command::RvbGgm && self.model == Model::Exact {
            return Err(ConfigError("rvb-ggm needs --model rvb or rvb-recursive".into()));
        }
        Ok(())
    }
}

fn parse_num(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

/// `4`, `2,4,6`, `2..8` (inclusive) or comma-separated mixtures; sorted and
/// deduplicated.
pub fn parse_list(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| format!("bad range start in `{part}`"))?;
            let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| format!("bad range end in `{part}`"))?;
            if a > b {
                return Err(format!("empty range `{part}`"));
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| format!("`{part}` is not a non-negative integer"))?);
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}
