//! Experiment configuration files.
//!
//! The format is flat `section.key = value` lines (TOML syntax restricted to
//! dotted keys at top level):
//!
//! ```text
//! assets.count = 10
//! assets.theta = -0.2859
//! assets.c = [0.25, 0.25, ...]   # scalars or one value per asset
//! copula_plus.family = "fgm"
//! option.strikes = [80.0, 90.0]
//! simulation.master_seed = 20240601
//! ```
//!
//! Loading collects every violation, each named by its field path, instead
//! of stopping at the first.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::copula::{CopulaModel, CopulaRegistry};
use crate::lhsd::{EtaPolicy, Lhsd, PlainMonteCarlo};
use crate::pricing::{Experiment, OptionSpec, PayoffRegistry};
use crate::vg::{martingale_drift, BasketModel, DriftConvention, VgAsset};

/// Relative tolerance of `monitoring_spacing × monitoring_count = maturity`.
const GRID_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct AssetConfig {
    pub theta: f64,
    pub sigma: f64,
    pub c: f64,
    pub s0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CopulaConfig {
    pub family: String,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptionConfig {
    pub kind: String,
    pub strikes: Vec<f64>,
    pub rate: f64,
    pub maturity: f64,
    pub monitoring_count: usize,
    pub monitoring_spacing: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub n: usize,
    pub m_reps: usize,
    pub eta_policy: EtaPolicy,
    pub master_seed: u64,
    pub drift_convention: DriftConvention,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub assets: Vec<AssetConfig>,
    pub copula_plus: CopulaConfig,
    pub copula_minus: CopulaConfig,
    pub option: OptionConfig,
    pub simulation: SimulationConfig,
    pub output: OutputConfig,
    /// Hex SHA-256 of the source text.
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub source: Option<PathBuf>,
    pub violations: Vec<Violation>,
}

impl ConfigError {
    fn single(source: Option<PathBuf>, field: &str, message: impl Into<String>) -> Self {
        Self {
            source,
            violations: vec![Violation {
                field: field.to_string(),
                message: message.into(),
            }],
        }
    }

    /// Whether some violation names `field` exactly or an element of it.
    pub fn mentions(&self, field: &str) -> bool {
        self.violations.iter().any(|v| {
            v.field == field || v.field.starts_with(&format!("{field}[")) || v.field.starts_with(&format!("{field}."))
        })
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            Some(p) => write!(f, "invalid configuration {}", p.display())?,
            None => write!(f, "invalid configuration")?,
        }
        for v in &self.violations {
            write!(f, "\n  {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Reads and validates a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        ConfigError::single(Some(path.to_path_buf()), "<file>", e.to_string())
    })?;
    text.parse::<ExperimentConfig>().map_err(|mut e| {
        e.source = Some(path.to_path_buf());
        e
    })
}

impl FromStr for ExperimentConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let table: Table = toml::from_str(text)
            .map_err(|e| ConfigError::single(None, "<syntax>", e.to_string().trim_end()))?;
        let mut r = Reader::new(&table);
        let cfg = r.experiment();
        r.unknown_keys(&table, "");
        match cfg {
            Some(mut cfg) if r.violations.is_empty() => {
                cfg.digest = hex::encode(Sha256::digest(text.as_bytes()));
                Ok(cfg)
            }
            _ => Err(ConfigError {
                source: None,
                violations: r.violations,
            }),
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "assets.count",
    "assets.theta",
    "assets.sigma",
    "assets.c",
    "assets.s0",
    "copula_plus.family",
    "copula_plus.alpha",
    "copula_plus.dim",
    "copula_minus.family",
    "copula_minus.alpha",
    "copula_minus.dim",
    "option.kind",
    "option.strikes",
    "option.rate",
    "option.maturity",
    "option.monitoring_count",
    "option.monitoring_spacing",
    "simulation.n",
    "simulation.m_reps",
    "simulation.eta_policy",
    "simulation.master_seed",
    "simulation.drift_convention",
    "output.path",
    "output.format",
];

struct Reader<'a> {
    root: &'a Table,
    violations: Vec<Violation>,
}

impl<'a> Reader<'a> {
    fn new(root: &'a Table) -> Self {
        Self {
            root,
            violations: Vec::new(),
        }
    }

    fn fail(&mut self, field: &str, message: impl Into<String>) {
        self.violations.push(Violation {
            field: field.to_string(),
            message: message.into(),
        });
    }

    fn lookup(&self, path: &str) -> Option<&'a Value> {
        let mut parts = path.split('.');
        let mut value = self.root.get(parts.next()?)?;
        for p in parts {
            value = value.as_table()?.get(p)?;
        }
        Some(value)
    }

    fn unknown_keys(&mut self, table: &Table, prefix: &str) {
        for (k, v) in table {
            let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            match v {
                Value::Table(t) if !KNOWN_KEYS.contains(&path.as_str()) => self.unknown_keys(t, &path),
                _ if KNOWN_KEYS.contains(&path.as_str()) => {}
                _ => self.fail(&path, "unknown field"),
            }
        }
    }

    fn float(&mut self, path: &str) -> Option<f64> {
        match self.lookup(path) {
            None => {
                self.fail(path, "missing field");
                None
            }
            Some(v) => self.as_float(path, v),
        }
    }

    fn as_float(&mut self, path: &str, v: &Value) -> Option<f64> {
        match v {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                self.fail(path, format!("expected a number, found {}", v.type_str()));
                None
            }
        }
    }

    fn integer(&mut self, path: &str) -> Option<i64> {
        match self.lookup(path) {
            None => {
                self.fail(path, "missing field");
                None
            }
            Some(Value::Integer(i)) => Some(*i),
            Some(v) => {
                self.fail(path, format!("expected an integer, found {}", v.type_str()));
                None
            }
        }
    }

    fn count(&mut self, path: &str) -> Option<usize> {
        let i = self.integer(path)?;
        if i < 1 {
            self.fail(path, format!("must be at least 1, got {i}"));
            return None;
        }
        Some(i as usize)
    }

    fn string(&mut self, path: &str, default: Option<&str>) -> Option<String> {
        match self.lookup(path) {
            None => match default {
                Some(d) => Some(d.to_string()),
                None => {
                    self.fail(path, "missing field");
                    None
                }
            },
            Some(Value::String(s)) => Some(s.clone()),
            Some(v) => {
                self.fail(path, format!("expected a string, found {}", v.type_str()));
                None
            }
        }
    }

    fn float_list(&mut self, path: &str) -> Option<Vec<f64>> {
        match self.lookup(path) {
            None => {
                self.fail(path, "missing field");
                None
            }
            Some(Value::Array(items)) => {
                let mut out = Vec::with_capacity(items.len());
                let mut ok = true;
                for (i, v) in items.iter().enumerate() {
                    match self.as_float(&format!("{path}[{i}]"), v) {
                        Some(x) => out.push(x),
                        None => ok = false,
                    }
                }
                ok.then_some(out)
            }
            Some(v) => {
                self.fail(path, format!("expected a list of numbers, found {}", v.type_str()));
                None
            }
        }
    }

    /// A scalar applied to every asset or one value per asset.
    fn per_asset(&mut self, path: &str, count: Option<usize>) -> Option<Vec<f64>> {
        match self.lookup(path) {
            Some(Value::Array(_)) => {
                let xs = self.float_list(path)?;
                match count {
                    Some(n) if xs.len() != n => {
                        self.fail(path, format!("has {} entries for {n} assets", xs.len()));
                        None
                    }
                    _ => Some(xs),
                }
            }
            _ => {
                let x = self.float(path)?;
                Some(vec![x; count.unwrap_or(1)])
            }
        }
    }

    fn positive(&mut self, path: &str, what: &str, xs: &[f64]) -> bool {
        let mut ok = true;
        for (i, &x) in xs.iter().enumerate() {
            if !(x > 0.0 && x.is_finite()) {
                let field = if xs.len() > 1 { format!("{path}[{i}]") } else { path.to_string() };
                self.fail(&field, format!("{what} must be positive and finite, got {x}"));
                ok = false;
            }
        }
        ok
    }

    fn assets(&mut self) -> Option<Vec<AssetConfig>> {
        let count = match self.lookup("assets.count") {
            Some(_) => Some(self.count("assets.count")?),
            None => ["assets.theta", "assets.sigma", "assets.c", "assets.s0"]
                .iter()
                .find_map(|p| self.lookup(p).and_then(Value::as_array).map(|a| a.len())),
        };
        let theta = self.per_asset("assets.theta", count);
        let sigma = self.per_asset("assets.sigma", count);
        let c = self.per_asset("assets.c", count);
        let s0 = self.per_asset("assets.s0", count);
        let mut ok = true;
        for (i, &x) in theta.iter().flatten().enumerate() {
            if !x.is_finite() {
                self.fail(&format!("assets.theta[{i}]"), "drift theta must be finite");
                ok = false;
            }
        }
        ok &= self.positive("assets.sigma", "volatility sigma", sigma.as_deref().unwrap_or(&[]));
        ok &= self.positive("assets.c", "gamma volatility c", c.as_deref().unwrap_or(&[]));
        ok &= self.positive("assets.s0", "initial price s0", s0.as_deref().unwrap_or(&[]));
        let (theta, sigma, c, s0) = (theta?, sigma?, c?, s0?);
        if !ok {
            return None;
        }

        let n = [theta.len(), sigma.len(), c.len(), s0.len()].into_iter().max()?;
        let widen = |xs: Vec<f64>| if xs.len() == 1 { vec![xs[0]; n] } else { xs };
        let (theta, sigma, c, s0) = (widen(theta), widen(sigma), widen(c), widen(s0));
        if [theta.len(), sigma.len(), c.len(), s0.len()].iter().any(|&l| l != n) {
            self.fail("assets", "per-asset lists have different lengths");
            return None;
        }
        for i in 0..n {
            if let Err(e) = martingale_drift(theta[i], sigma[i], c[i]) {
                self.fail(&format!("assets[{i}]"), e.to_string());
                ok = false;
            }
        }
        ok.then(|| {
            (0..n)
                .map(|i| AssetConfig {
                    theta: theta[i],
                    sigma: sigma[i],
                    c: c[i],
                    s0: s0[i],
                })
                .collect()
        })
    }

    fn copula(&mut self, section: &str, dim: Option<usize>) -> Option<CopulaConfig> {
        let family = self.string(&format!("{section}.family"), None);
        let alpha = match self.lookup(&format!("{section}.alpha")) {
            Some(_) => self.float(&format!("{section}.alpha")),
            None => Some(0.0),
        };
        let declared = match self.lookup(&format!("{section}.dim")) {
            Some(_) => Some(self.count(&format!("{section}.dim"))?),
            None => None,
        };
        let (family, alpha) = (family?, alpha?);
        let registry = CopulaRegistry::builtin();
        if !registry.names().contains(&family.to_ascii_lowercase().as_str()) {
            self.fail(
                &format!("{section}.family"),
                format!("unknown family `{family}` (known: {})", registry.names().join(", ")),
            );
            return None;
        }
        if !(-1.0..=1.0).contains(&alpha) {
            self.fail(&format!("{section}.alpha"), format!("must lie in [-1, 1], got {alpha}"));
            return None;
        }
        if let (Some(a), Some(b)) = (declared, dim) {
            if a != b {
                self.fail(&format!("{section}.dim"), format!("is {a} but there are {b} assets"));
                return None;
            }
        }
        if let Some(d) = declared.or(dim) {
            match registry.build(&family, alpha, d) {
                Ok(model) if model.family().density_bound().is_none() => {
                    self.fail(
                        &format!("{section}.alpha"),
                        format!("{family} with alpha = {alpha} has an unbounded density and cannot be sampled"),
                    );
                    return None;
                }
                Ok(_) => {}
                Err(e) => {
                    self.fail(section, e.to_string());
                    return None;
                }
            }
        }
        Some(CopulaConfig {
            family: family.to_ascii_lowercase(),
            alpha,
        })
    }

    fn option(&mut self) -> Option<OptionConfig> {
        let kind = self.string("option.kind", None);
        let strikes = self.float_list("option.strikes");
        let rate = self.float("option.rate");
        let maturity = self.float("option.maturity");
        let count = self.count("option.monitoring_count");
        let spacing = self.float("option.monitoring_spacing");

        let mut ok = true;
        if let Some(k) = &kind {
            if let Err(e) = PayoffRegistry::builtin().get(k) {
                self.fail("option.kind", e.to_string());
                ok = false;
            }
        }
        if let Some(ks) = &strikes {
            for (i, &k) in ks.iter().enumerate() {
                if !(k > 0.0 && k.is_finite()) {
                    self.fail(&format!("option.strikes[{i}]"), format!("strike must be positive, got {k}"));
                    ok = false;
                }
            }
        }
        if let Some(r) = rate {
            if !r.is_finite() {
                self.fail("option.rate", "must be finite");
                ok = false;
            }
        }
        if let Some(t) = maturity {
            ok &= self.positive("option.maturity", "maturity", &[t]);
        }
        if let Some(s) = spacing {
            ok &= self.positive("option.monitoring_spacing", "spacing", &[s]);
        }
        let (kind, strikes, rate, maturity, count, spacing) =
            (kind?, strikes?, rate?, maturity?, count?, spacing?);
        if !ok {
            return None;
        }
        let end = spacing * count as f64;
        if (end - maturity).abs() > GRID_RTOL * maturity {
            self.fail(
                "option.monitoring_spacing",
                format!("spacing × count = {end} differs from maturity {maturity}"),
            );
            return None;
        }
        Some(OptionConfig {
            kind: kind.to_ascii_lowercase(),
            strikes,
            rate,
            maturity,
            monitoring_count: count,
            monitoring_spacing: spacing,
        })
    }

    fn simulation(&mut self) -> Option<SimulationConfig> {
        let n = self.count("simulation.n");
        let m_reps = self.count("simulation.m_reps");
        let eta = self.string("simulation.eta_policy", Some("half"));
        let seed = self.integer("simulation.master_seed");
        let drift = self.string("simulation.drift_convention", Some("risk_neutral"));

        let eta = eta.and_then(|s| match EtaPolicy::parse(&s) {
            Ok(e) => Some(e),
            Err(e) => {
                self.fail("simulation.eta_policy", e.to_string());
                None
            }
        });
        let drift = drift.and_then(|s| match DriftConvention::parse(&s) {
            Ok(d) => Some(d),
            Err(e) => {
                self.fail("simulation.drift_convention", e.to_string());
                None
            }
        });
        let seed = seed.and_then(|s| {
            if s < 0 {
                self.fail("simulation.master_seed", "must be nonnegative");
                None
            } else {
                Some(s as u64)
            }
        });
        Some(SimulationConfig {
            n: n?,
            m_reps: m_reps?,
            eta_policy: eta?,
            master_seed: seed?,
            drift_convention: drift?,
        })
    }

    fn output(&mut self) -> Option<OutputConfig> {
        let path = match self.lookup("output.path") {
            Some(_) => Some(PathBuf::from(self.string("output.path", None)?)),
            None => None,
        };
        let format = self.string("output.format", Some("csv"))?;
        if !format.eq_ignore_ascii_case("csv") {
            self.fail("output.format", format!("unsupported format `{format}` (only csv)"));
            return None;
        }
        Some(OutputConfig {
            path,
            format: OutputFormat::Csv,
        })
    }

    fn experiment(&mut self) -> Option<ExperimentConfig> {
        let assets = self.assets();
        let dim = assets.as_ref().map(Vec::len);
        let copula_plus = self.copula("copula_plus", dim);
        let copula_minus = self.copula("copula_minus", dim);
        let option = self.option();
        let simulation = self.simulation();
        let output = self.output();
        Some(ExperimentConfig {
            assets: assets?,
            copula_plus: copula_plus?,
            copula_minus: copula_minus?,
            option: option?,
            simulation: simulation?,
            output: output?,
            digest: String::new(),
        })
    }
}

impl ExperimentConfig {
    pub fn dim(&self) -> usize {
        self.assets.len()
    }

    pub fn basket(&self) -> crate::Result<BasketModel> {
        let assets = self
            .assets
            .iter()
            .map(|a| VgAsset::new(a.theta, a.sigma, a.c, a.s0))
            .collect::<crate::Result<Vec<_>>>()?;
        let d = self.dim();
        let plus = CopulaModel::new(&self.copula_plus.family, self.copula_plus.alpha, d)?;
        let minus = CopulaModel::new(&self.copula_minus.family, self.copula_minus.alpha, d)?;
        let times = BasketModel::uniform_grid(self.option.monitoring_count, self.option.monitoring_spacing);
        BasketModel::new(assets, plus, minus, times)
    }

    /// One spec per strike, in file order.
    pub fn specs(&self) -> crate::Result<Vec<OptionSpec>> {
        let payoff = PayoffRegistry::builtin().get(&self.option.kind)?;
        self.option
            .strikes
            .iter()
            .map(|&k| OptionSpec::new(payoff.clone(), k, self.option.rate))
            .collect()
    }

    pub fn experiment(&self) -> crate::Result<Experiment> {
        let sim = &self.simulation;
        let mut exp = Experiment::new(self.basket()?, sim.n, sim.m_reps, sim.master_seed);
        exp.convention = sim.drift_convention;
        exp.candidate = Arc::new(Lhsd { eta: sim.eta_policy });
        exp.baseline = Arc::new(PlainMonteCarlo);
        Ok(exp)
    }
}
