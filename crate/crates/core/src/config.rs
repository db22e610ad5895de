//! Run configuration and file output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{ErwsError, Result};
use crate::simulator::CheckpointGrid;

/// Everything a command can take from a JSON config file. Command-line
/// flags override these values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub checkpoints: Option<CheckpointGrid>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub m_far: Option<u64>,
    #[serde(default)]
    pub fresh_seed: bool,
}

impl RunConfig {
    /// Fill every unset field from `base`.
    pub fn or(self, base: RunConfig) -> RunConfig {
        RunConfig {
            p: self.p.or(base.p),
            q: self.q.or(base.q),
            r: self.r.or(base.r),
            s: self.s.or(base.s),
            n: self.n.or(base.n),
            reps: self.reps.or(base.reps),
            seed: self.seed.or(base.seed),
            out: self.out.or(base.out),
            checkpoints: self.checkpoints.or(base.checkpoints),
            threads: self.threads.or(base.threads),
            m_far: self.m_far.or(base.m_far),
            fresh_seed: self.fresh_seed || base.fresh_seed,
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| ErwsError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| ErwsError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_config(path: &Path) -> Result<RunConfig> {
    read_json(path)
}

/// Pretty JSON with a trailing newline. Key order follows field order.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let io = |source| ErwsError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(text.as_bytes()).map_err(io)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_json(value))
}

/// Write to `path`, or to standard output when it is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_text(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| ErwsError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

/// Parse `geometric:R`, `dense:K` or `list:N1,N2,...`.
pub fn parse_grid(spec: &str) -> Result<CheckpointGrid> {
    let bad = || ErwsError::domain(format!("bad checkpoint grid {spec:?}; use geometric:R, dense:K or list:N1,N2,..."));
    let (kind, arg) = spec.split_once(':').ok_or_else(bad)?;
    match kind {
        "geometric" => Ok(CheckpointGrid::Geometric {
            ratio: arg.parse().map_err(|_| bad())?,
        }),
        "dense" => Ok(CheckpointGrid::Dense {
            every: arg.parse().map_err(|_| bad())?,
        }),
        "list" => Ok(CheckpointGrid::Explicit {
            steps: arg
                .split(',')
                .map(|t| t.trim().parse().map_err(|_| bad()))
                .collect::<Result<_>>()?,
        }),
        _ => Err(bad()),
    }
}
