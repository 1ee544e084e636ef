//! Optional TOML experiment file. Every key mirrors a command-line flag and
//! the flag wins when both are given.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn into_vec(self) -> Vec<f64> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mech: Option<String>,
    pub epsilon: Option<OneOrMany>,
    pub input: Option<PathBuf>,
    pub dist: Option<PathBuf>,
    pub n: Option<u64>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub q: Option<f64>,
    pub scale: Option<f64>,
    pub count: Option<u64>,
    pub alpha: Option<f64>,
    pub mode: Option<String>,
}

impl ExperimentConfig {
    /// Reads a config file. Relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: ExperimentConfig = toml::from_str(&text).map_err(|e| {
            anyhow!(dpsampler::Error::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        for p in [&mut cfg.input, &mut cfg.dist, &mut cfg.out]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// The single epsilon for commands that take one.
    pub fn single_epsilon(&self) -> Result<Option<f64>> {
        match &self.epsilon {
            None => Ok(None),
            Some(OneOrMany::One(x)) => Ok(Some(*x)),
            Some(OneOrMany::Many(v)) if v.len() == 1 => Ok(Some(v[0])),
            Some(OneOrMany::Many(_)) => Err(usage("this command takes a single epsilon")),
        }
    }
}

/// Flag value if given, else config value, else an error naming the flag.
pub fn require<T>(flag: Option<T>, file: Option<T>, name: &str) -> Result<T> {
    flag.or(file).ok_or_else(|| {
        usage(format!(
            "missing required value --{name} (flag or config key `{name}`)"
        ))
    })
}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(dpsampler::Error::InvalidParameter(msg.into()))
}
