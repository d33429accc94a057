//! Service configuration: corpus locations, the token table, port and
//! executor overrides, stored as TOML.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use adsk_core::corpus::load_corpus;
use adsk_core::{Catalog, CorpusError, ExecConfig, ExecError};
use rand::distributions::Alphanumeric;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_RATE_LIMIT: u32 = 300;
pub const TOKEN_LEN: usize = 40;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("duplicate token for client `{0}`")]
    DuplicateToken(String),
    #[error("client `{0}` has a rate limit of zero")]
    ZeroRateLimit(String),
    #[error("config has no [corpus] records path")]
    NoCorpus,
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiToken {
    pub token: String,
    pub client_name: String,
    #[serde(default = "default_rate_limit")]
    pub rate_limit: u32,
}

fn default_rate_limit() -> u32 {
    DEFAULT_RATE_LIMIT
}

fn default_port() -> u16 {
    DEFAULT_PORT
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusPaths {
    pub records: Option<PathBuf>,
    pub readership: Option<PathBuf>,
    pub synonyms: Option<PathBuf>,
}

/// Executor settings that differ from the defaults. `inner_top_k = 0` means
/// no truncation before operator expansion.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExecOverrides {
    pub inner_top_k: Option<usize>,
    pub bm25_k1: Option<f64>,
    pub bm25_b: Option<f64>,
    pub default_rows: Option<usize>,
    pub max_rows: Option<usize>,
}

impl ExecOverrides {
    pub fn apply(&self, mut base: ExecConfig) -> Result<ExecConfig, ExecError> {
        if let Some(k) = self.inner_top_k {
            base.inner_top_k = (k > 0).then_some(k);
        }
        if let Some(k1) = self.bm25_k1 {
            base.bm25_k1 = k1;
        }
        if let Some(b) = self.bm25_b {
            base.bm25_b = b;
        }
        if let Some(r) = self.default_rows {
            base.default_rows = r;
        }
        if let Some(r) = self.max_rows {
            base.max_rows = r;
        }
        base.validate()?;
        Ok(base)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiConfig {
    #[serde(default = "default_port")]
    pub port: u16,
    #[serde(default)]
    pub corpus: CorpusPaths,
    #[serde(default)]
    pub exec: ExecOverrides,
    #[serde(default)]
    pub tokens: Vec<ApiToken>,
}

impl Default for ApiConfig {
    fn default() -> Self {
        ApiConfig {
            port: DEFAULT_PORT,
            corpus: CorpusPaths::default(),
            exec: ExecOverrides::default(),
            tokens: Vec::new(),
        }
    }
}

impl ApiConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let mut config: ApiConfig = toml::from_str(text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        config.validate()?;
        // corpus paths are relative to the config file
        if let Some(dir) = path.parent() {
            for p in [
                &mut config.corpus.records,
                &mut config.corpus.readership,
                &mut config.corpus.synonyms,
            ]
            .into_iter()
            .flatten()
            {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut seen = HashSet::new();
        for t in &self.tokens {
            if !seen.insert(t.token.as_str()) {
                return Err(ConfigError::DuplicateToken(t.client_name.clone()));
            }
            if t.rate_limit == 0 {
                return Err(ConfigError::ZeroRateLimit(t.client_name.clone()));
            }
        }
        self.exec_config()?;
        Ok(())
    }

    pub fn exec_config(&self) -> Result<ExecConfig, ConfigError> {
        Ok(self.exec.apply(ExecConfig::default())?)
    }

    /// Loads and indexes the corpus named in `[corpus]`.
    pub fn build_catalog(&self) -> Result<Catalog, ConfigError> {
        let records = self
            .corpus
            .records
            .as_deref()
            .ok_or(ConfigError::NoCorpus)?;
        let corpus = load_corpus(
            records,
            self.corpus.readership.as_deref(),
            self.corpus.synonyms.as_deref(),
        )?;
        Ok(Catalog::build(corpus))
    }
}

pub fn generate_token() -> String {
    rand::thread_rng()
        .sample_iter(&Alphanumeric)
        .take(TOKEN_LEN)
        .map(char::from)
        .collect()
}

/// Adds a fresh token for `client_name` to the config file at `path`,
/// creating the file if needed, and returns the token. Other settings in
/// the file are kept as they are.
pub fn append_token(path: impl AsRef<Path>, client_name: &str) -> Result<String, ConfigError> {
    let path = path.as_ref();
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
        Err(source) => {
            return Err(ConfigError::Read {
                path: path.to_path_buf(),
                source,
            })
        }
    };
    let mut table: toml::Table = toml::from_str(&text).map_err(|source| ConfigError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    let token = generate_token();
    let entry = ApiToken {
        token: token.clone(),
        client_name: client_name.to_string(),
        rate_limit: DEFAULT_RATE_LIMIT,
    };
    let entry = toml::Value::try_from(entry).expect("token entry serializes");
    match table
        .entry("tokens")
        .or_insert_with(|| toml::Value::Array(Vec::new()))
    {
        toml::Value::Array(list) => list.push(entry),
        _ => {
            return Err(ConfigError::Parse {
                path: path.to_path_buf(),
                source: serde::de::Error::custom("`tokens` must be an array of tables"),
            })
        }
    }
    let out = toml::to_string(&table).expect("toml table serializes");
    fs::write(path, out).map_err(|source| ConfigError::Write {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(token)
}
