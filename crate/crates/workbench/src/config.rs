//! Run configuration: one TOML file plus command-line overrides.

use std::path::Path;

use serde::{Deserialize, Serialize};
use wb_core::gf::SUPPORTED_Q;
use wb_core::quad::Kind;

use crate::hecke_expr::HeckeExpr;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Everything a run depends on. Unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Residue field size; `None` lets grid suites sweep their own values.
    pub q: Option<u8>,
    pub precision: u32,
    /// Half-rank of the pairs; `None` lets grid suites sweep.
    pub n: Option<usize>,
    /// Levi split `n0 + n1` for partial Satake and reduction runs.
    pub split: Option<[usize; 2]>,
    pub e1: String,
    pub e2: String,
    /// Test function, e.g. `T_1*T_1`, `f(2,1)`, `[pi]^-1*f(1)`.
    pub hecke: String,
    /// Largest enumeration window before giving up.
    pub window: i64,
    pub seed: u64,
    /// Number of seeded samples in randomized suites.
    pub samples: usize,
    pub suite: Option<String>,
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            q: None,
            precision: wb_core::field::DEFAULT_PRECISION,
            n: None,
            split: None,
            e1: "unramified".into(),
            e2: "unramified".into(),
            hecke: "unit".into(),
            window: 10,
            seed: 0,
            samples: 20,
            suite: None,
            threads: 1,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn q_or(&self, default: u8) -> u8 {
        self.q.unwrap_or(default)
    }

    pub fn n_or(&self, default: usize) -> usize {
        self.n.unwrap_or(default)
    }

    pub fn kinds(&self) -> Result<(Kind, Kind), ConfigError> {
        let parse = |s: &str| Kind::parse(s).map_err(|_| ConfigError::Invalid(format!("unknown algebra kind {s:?}; use split, unramified or ramified")));
        Ok((parse(&self.e1)?, parse(&self.e2)?))
    }

    pub fn hecke_expr(&self) -> Result<HeckeExpr, ConfigError> {
        HeckeExpr::parse(&self.hecke).map_err(ConfigError::Invalid)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if let Some(q) = self.q {
            if !SUPPORTED_Q.contains(&q) {
                return bad(format!("q = {q} is not a prime power at most 9"));
            }
        }
        if self.precision == 0 || self.precision > 1000 {
            return bad(format!("precision = {} must lie in 1..=1000", self.precision));
        }
        if let Some(n) = self.n {
            if !(1..=3).contains(&n) {
                return bad(format!("n = {n} must lie in 1..=3"));
            }
        }
        if let Some([a, b]) = self.split {
            if a == 0 || b == 0 {
                return bad("split parts must be positive".into());
            }
            if let Some(n) = self.n {
                if a + b != n {
                    return bad(format!("split {a}+{b} does not add up to n = {n}"));
                }
            }
        }
        let (k1, k2) = self.kinds()?;
        if k1 == Kind::Split || k2 == Kind::Split {
            return bad("e1 and e2 must be field extensions (split appears only on the matched side)".into());
        }
        if k1 == Kind::Ramified && k2 == Kind::Ramified {
            return bad("at most one of e1, e2 may be ramified".into());
        }
        if (k1 == Kind::Ramified || k2 == Kind::Ramified) && self.q.is_some_and(|q| q % 2 == 0) {
            return bad("ramified algebras need odd q".into());
        }
        self.hecke_expr()?;
        if !(0..=12).contains(&self.window) {
            return bad(format!("window = {} must lie in 0..=12", self.window));
        }
        if self.samples == 0 || self.samples > 1000 {
            return bad(format!("samples = {} must lie in 1..=1000", self.samples));
        }
        if self.threads == 0 || self.threads > 256 {
            return bad(format!("threads = {} must lie in 1..=256", self.threads));
        }
        if let Some(s) = &self.suite {
            if s != "all" && crate::suites::Suite::parse(s).is_none() {
                return bad(format!("unknown suite {s:?}; known: {}", crate::suites::Suite::names().join(", ")));
            }
        }
        Ok(())
    }
}
