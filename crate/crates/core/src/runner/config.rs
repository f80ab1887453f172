use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::tree::{GraphKind, LevelSpec, ProductGraph};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("bad override `{0}`, expected key=value")]
    Override(String),
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, reason: reason.into() }
}

/// One experiment. Every field has a default, so an empty file (or no file)
/// is a valid config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphKind,
    pub d: u8,
    pub seed: u64,
    /// 0 means one worker per core.
    pub workers: usize,
    pub out: PathBuf,
    /// Explicit retention probabilities. Empty means `p_factor × p̂_c`.
    pub p: Vec<f64>,
    pub p_factor: Vec<f64>,
    /// Anisotropy: `p₂ = min(1, rho·p₁)`.
    pub rho: f64,
    pub n_cap: usize,
    pub pc: PcConfig,
    pub gball: GballConfig,
    pub connprob: ConnprobConfig,
    pub triangle: TriangleConfig,
    pub offpointa: OffpointaConfig,
    pub schramm: SchrammConfig,
    pub invade: InvadeConfig,
    pub curve: CurveConfig,
    pub verify: VerifyConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            graph: GraphKind::Txt,
            d: 3,
            seed: 1,
            workers: 0,
            out: PathBuf::from("out"),
            p: Vec::new(),
            p_factor: vec![1.0],
            rho: 1.0,
            n_cap: 100_000,
            pc: PcConfig::default(),
            gball: GballConfig::default(),
            connprob: ConnprobConfig::default(),
            triangle: TriangleConfig::default(),
            offpointa: OffpointaConfig::default(),
            schramm: SchrammConfig::default(),
            invade: InvadeConfig::default(),
            curve: CurveConfig::default(),
            verify: VerifyConfig::default(),
        }
    }
}

/// Invasion run that supplies `p̂_c` when no explicit `p` is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PcConfig {
    pub target: usize,
    pub seeds: usize,
}

impl Default for PcConfig {
    fn default() -> Self {
        Self { target: 100_000, seeds: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GballConfig {
    pub radii: Vec<u32>,
    pub trials: usize,
    /// Extra estimators, each skipped when empty or zero.
    pub moment_radius: u32,
    pub ballistic_radii: Vec<u32>,
    pub stability_caps: Vec<usize>,
    pub bootstrap: usize,
}

impl Default for GballConfig {
    fn default() -> Self {
        Self {
            radii: vec![4, 8, 16, 32],
            trials: 2000,
            moment_radius: 0,
            ballistic_radii: Vec::new(),
            stability_caps: Vec::new(),
            bootstrap: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConnprobConfig {
    pub max_norm: u32,
    pub trials: usize,
    /// Chemical radius restriction for the census; 0 means none.
    pub restrict: u32,
    /// Classes also estimated by direct point sampling.
    pub specs: Vec<[u32; 2]>,
}

impl Default for ConnprobConfig {
    fn default() -> Self {
        Self {
            max_norm: 12,
            trials: 2000,
            restrict: 0,
            specs: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TriangleFunction {
    Geometric,
    Anisotropic,
    Oded,
    /// Census estimates of the two-point function at each `p`.
    Census,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TriangleConfig {
    pub radii: Vec<u32>,
    pub openings: Vec<[u32; 2]>,
    pub function: TriangleFunction,
    /// Also evaluate by enumeration where the ball is small enough.
    pub brute: bool,
    pub trials: usize,
}

impl Default for TriangleConfig {
    fn default() -> Self {
        Self {
            radii: vec![1, 2, 3, 4, 5],
            openings: vec![[0, 0], [1, 0], [2, 2]],
            function: TriangleFunction::Geometric,
            brute: true,
            trials: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OffpointaConfig {
    /// `(r, |w|)` pairs; `w` splits `|w|` evenly over the coordinates.
    pub cases: Vec<[u32; 2]>,
    pub trials: usize,
    pub census_trials: usize,
    pub blocks: usize,
    pub n_cap: usize,
}

impl Default for OffpointaConfig {
    fn default() -> Self {
        Self {
            cases: vec![[4, 6]],
            trials: 1000,
            census_trials: 5000,
            blocks: 20,
            n_cap: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchrammExperiment {
    Degree,
    TwoOverM,
    Returns,
    Invariance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchrammConfig {
    pub spec: [u32; 2],
    /// Safety constant of the transience threshold.
    pub c: f64,
    /// Overrides the threshold when nonzero.
    pub m: u64,
    pub depth: u32,
    pub trials: usize,
    pub experiments: Vec<SchrammExperiment>,
    pub return_steps: Vec<u32>,
}

impl Default for SchrammConfig {
    fn default() -> Self {
        Self {
            spec: [6, 6],
            c: 0.5,
            m: 0,
            depth: 2,
            trials: 2000,
            experiments: vec![SchrammExperiment::Degree, SchrammExperiment::Returns, SchrammExperiment::Invariance],
            return_steps: vec![1, 2, 3, 4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InvadeConfig {
    pub rho: Vec<f64>,
    pub target: usize,
    pub seeds: usize,
}

impl Default for InvadeConfig {
    fn default() -> Self {
        Self {
            rho: vec![1.0],
            target: 100_000,
            seeds: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveConfig {
    /// Smallest `rho`; the grid runs to its reciprocal.
    pub rho_extreme: f64,
    /// Interior points in (0, 1); mirrored through 1.
    pub rho_inner: Vec<f64>,
    pub target: usize,
    pub seeds: usize,
}

impl Default for CurveConfig {
    fn default() -> Self {
        Self {
            rho_extreme: 1e-3,
            rho_inner: vec![0.01, 0.1, 0.25, 0.5],
            target: 100_000,
            seeds: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyScale {
    Full,
    Smoke,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub scale: VerifyScale,
    /// Criterion ids; empty means all.
    pub criteria: Vec<u8>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            scale: VerifyScale::Full,
            criteria: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Reads `path` (or starts from the defaults) and applies `key=value`
    /// overrides, where `key` is a dotted path such as `gball.trials`.
    pub fn load(path: Option<&std::path::Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|source| ConfigError::Read { path: p.to_path_buf(), source })?,
            None => String::new(),
        };
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: Self = table.try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn graph(&self) -> ProductGraph {
        ProductGraph::new(self.graph, self.d).expect("validated")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.d < 3 || self.d > 64 {
            return Err(invalid("d", "degree must be in 3..=64"));
        }
        if let Some(&p) = self.p.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(invalid("p", format!("{p} is not a probability")));
        }
        if self.p.is_empty() && self.p_factor.is_empty() {
            return Err(invalid("p_factor", "need p or p_factor"));
        }
        if self.p_factor.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
            return Err(invalid("p_factor", "factors must be finite and nonnegative"));
        }
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(invalid("rho", "must be positive"));
        }
        positive("n_cap", self.n_cap)?;
        positive("pc.target", self.pc.target)?;
        positive("pc.seeds", self.pc.seeds)?;
        positive("gball.trials", self.gball.trials)?;
        if self.gball.radii.is_empty() {
            return Err(invalid("gball.radii", "empty"));
        }
        if self.gball.ballistic_radii.len() == 1 || self.gball.ballistic_radii.contains(&0) {
            return Err(invalid("gball.ballistic_radii", "need at least two positive radii"));
        }
        if !self.gball.stability_caps.is_empty()
            && (self.gball.stability_caps.len() < 2 || self.gball.stability_caps.windows(2).any(|w| w[1] != 2 * w[0]) || self.gball.stability_caps[0] == 0)
        {
            return Err(invalid("gball.stability_caps", "need a doubling schedule of at least two caps"));
        }
        positive("connprob.trials", self.connprob.trials)?;
        positive("triangle.trials", self.triangle.trials)?;
        if self.triangle.radii.is_empty() {
            return Err(invalid("triangle.radii", "empty"));
        }
        positive("offpointa.trials", self.offpointa.trials)?;
        positive("offpointa.census_trials", self.offpointa.census_trials)?;
        positive("offpointa.n_cap", self.offpointa.n_cap)?;
        if self.offpointa.blocks < 2 {
            return Err(invalid("offpointa.blocks", "need at least 2 jackknife blocks"));
        }
        if self.offpointa.cases.iter().any(|&[r, w]| r == 0 || w == 0) {
            return Err(invalid("offpointa.cases", "r and |w| must be positive"));
        }
        positive("schramm.trials", self.schramm.trials)?;
        if self.schramm.depth == 0 {
            return Err(invalid("schramm.depth", "must be at least 1"));
        }
        if self.schramm.spec[0] + self.schramm.spec[1] == 0 {
            return Err(invalid("schramm.spec", "|x| must be at least 1"));
        }
        if !(self.schramm.c > 0.0 && self.schramm.c < 1.0) {
            return Err(invalid("schramm.c", "must lie in (0, 1)"));
        }
        positive("invade.target", self.invade.target)?;
        positive("invade.seeds", self.invade.seeds)?;
        if self.invade.rho.iter().any(|r| !(r.is_finite() && *r > 0.0)) || self.invade.rho.is_empty() {
            return Err(invalid("invade.rho", "need positive values"));
        }
        positive("curve.target", self.curve.target)?;
        positive("curve.seeds", self.curve.seeds)?;
        if !(self.curve.rho_extreme > 0.0 && self.curve.rho_extreme < 1.0) || self.curve.rho_inner.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
            return Err(invalid("curve", "rho values must lie in (0, 1)"));
        }
        if self.verify.criteria.iter().any(|id| !(1..=14).contains(id)) {
            return Err(invalid("verify.criteria", "ids run from 1 to 14"));
        }
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML. Worker count
    /// and output directory are left out: they never change a result.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.workers = 0;
        canonical.out = PathBuf::new();
        let text = toml::to_string(&canonical).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn level_specs(pairs: &[[u32; 2]]) -> Vec<LevelSpec> {
        pairs.iter().map(|&[a, b]| LevelSpec::new(a, b)).collect()
    }
}

fn positive(field: &'static str, v: usize) -> Result<(), ConfigError> {
    if v == 0 {
        Err(invalid(field, "must be positive"))
    } else {
        Ok(())
    }
}

fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), ConfigError> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| ConfigError::Override(spec.into()))?;
    let value = parse_value(raw.trim());
    let mut parts: Vec<&str> = key.trim().split('.').collect();
    let last = parts.pop().filter(|k| !k.is_empty()).ok_or_else(|| ConfigError::Override(spec.into()))?;
    let mut t = table;
    for p in parts {
        t = t
            .entry(p)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| ConfigError::Override(spec.into()))?;
    }
    t.insert(last.to_string(), value);
    Ok(())
}

/// A TOML literal if it parses as one, otherwise a bare string.
fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("just inserted"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}
