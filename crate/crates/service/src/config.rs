//! Service configuration: a TOML file, then `DE_*` environment overrides.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use de_core::analysis::WcpuReading;
use de_core::model::FailureSetSpec;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Toml {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("{var}: {message}")]
    Env { var: &'static str, message: String },
    #[error("{field}: {message}")]
    Invalid {
        field: &'static str,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    pub topology: Option<PathBuf>,
    pub demands: Option<PathBuf>,
    /// Reject unknown JSON fields instead of ignoring them.
    pub strict_json: bool,
    pub wcpu_reading: WcpuReading,
    /// Append-only JSON-lines log, replayed at startup.
    pub decision_log: Option<PathBuf>,
    /// How long a request waits for the controller before a 503.
    pub lock_timeout_ms: u64,
    /// Failure classes behind `network_wc_util` in `GET /v1/state`.
    pub state_failure_sets: String,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            topology: None,
            demands: None,
            strict_json: true,
            wcpu_reading: WcpuReading::Union,
            decision_log: None,
            lock_timeout_ms: 5000,
            state_failure_sets: "all".to_string(),
        }
    }
}

fn parse_bool(var: &'static str, v: &str) -> Result<bool, ConfigError> {
    match v.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(ConfigError::Env {
            var,
            message: format!("expected a boolean, got `{v}`"),
        }),
    }
}

impl ServiceConfig {
    /// Reads `path` (if any; relative paths inside resolve against its
    /// directory), then applies overrides looked up through `env`.
    pub fn load(
        path: Option<&Path>,
        env: impl Fn(&str) -> Option<String>,
    ) -> Result<Self, ConfigError> {
        let mut cfg = match path {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|source| ConfigError::Io {
                    path: p.to_path_buf(),
                    source,
                })?;
                let mut cfg: ServiceConfig =
                    toml::from_str(&text).map_err(|source| ConfigError::Toml {
                        path: p.to_path_buf(),
                        source,
                    })?;
                let base = p.parent().unwrap_or(Path::new(""));
                for f in [&mut cfg.topology, &mut cfg.demands, &mut cfg.decision_log] {
                    if let Some(rel) = f.as_mut().filter(|x| x.is_relative()) {
                        *rel = base.join(&*rel);
                    }
                }
                cfg
            }
            None => ServiceConfig::default(),
        };

        if let Some(v) = env("DE_LISTEN") {
            cfg.listen = v.parse().map_err(|e| ConfigError::Env {
                var: "DE_LISTEN",
                message: format!("{e}"),
            })?;
        }
        if let Some(v) = env("DE_TOPOLOGY") {
            cfg.topology = Some(v.into());
        }
        if let Some(v) = env("DE_DEMANDS") {
            cfg.demands = Some(v.into());
        }
        if let Some(v) = env("DE_DECISION_LOG") {
            cfg.decision_log = Some(v.into());
        }
        if let Some(v) = env("DE_STRICT_JSON") {
            cfg.strict_json = parse_bool("DE_STRICT_JSON", &v)?;
        }
        if let Some(v) = env("DE_WCPU_READING") {
            cfg.wcpu_reading = v.parse().map_err(|message| ConfigError::Env {
                var: "DE_WCPU_READING",
                message,
            })?;
        }
        if let Some(v) = env("DE_LOCK_TIMEOUT_MS") {
            cfg.lock_timeout_ms = v.parse().map_err(|e| ConfigError::Env {
                var: "DE_LOCK_TIMEOUT_MS",
                message: format!("{e}"),
            })?;
        }
        if let Some(v) = env("DE_STATE_FAILURE_SETS") {
            cfg.state_failure_sets = v;
        }
        cfg.state_spec()?;
        Ok(cfg)
    }

    pub fn state_spec(&self) -> Result<FailureSetSpec, ConfigError> {
        FailureSetSpec::parse_list(&self.state_failure_sets).map_err(|message| {
            ConfigError::Invalid {
                field: "state_failure_sets",
                message,
            }
        })
    }

    pub fn lock_timeout(&self) -> Duration {
        Duration::from_millis(self.lock_timeout_ms)
    }
}
