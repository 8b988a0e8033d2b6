//! Service configuration, read from a TOML file.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use nepkit_core::metrics::{
    DEFAULT_CHUNK_MINUTES, DEFAULT_DURATION_THRESHOLD_MINUTES, DEFAULT_MIN_PRESORTED_ISSUES,
};
use serde::{Deserialize, Serialize};

use crate::analytics::AnalyticsOptions;
use crate::engine::DEFAULT_REPORT_CODE_PATTERN;
use crate::error::{Error, Result};

/// ```toml
/// data_root = "/var/lib/nepkit"
/// listen_address = "127.0.0.1:8080"
/// duration_threshold_minutes = 90
/// histogram_chunk_minutes = 3
/// min_presorted_issues = 50
/// report_code_pattern = "^nep-[a-z]{3}$"
///
/// [editor_tokens]
/// nep-mac = "secret"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub data_root: PathBuf,
    pub listen_address: SocketAddr,
    pub duration_threshold_minutes: f64,
    pub histogram_chunk_minutes: f64,
    pub min_presorted_issues: usize,
    pub report_code_pattern: String,
    /// Reports listed here require the token in the `x-editor-token` header
    /// for editorial requests.
    pub editor_tokens: BTreeMap<String, String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            data_root: PathBuf::from("data"),
            listen_address: SocketAddr::from(([127, 0, 0, 1], 8080)),
            duration_threshold_minutes: DEFAULT_DURATION_THRESHOLD_MINUTES,
            histogram_chunk_minutes: DEFAULT_CHUNK_MINUTES,
            min_presorted_issues: DEFAULT_MIN_PRESORTED_ISSUES,
            report_code_pattern: DEFAULT_REPORT_CODE_PATTERN.to_string(),
            editor_tokens: BTreeMap::new(),
        }
    }
}

impl ServiceConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Invalid(format!("config: {e}")))
    }

    /// Reads the file. A relative `data_root` is resolved against the
    /// directory holding the config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_toml(&text)?;
        if config.data_root.is_relative() {
            let base = path.parent().unwrap_or(Path::new("."));
            config.data_root = base.join(&config.data_root);
        }
        Ok(config)
    }

    /// Checks the settings and that `data_root` is an existing writable
    /// directory.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::Invalid(format!("config: {name} must be positive")))
            }
        };
        positive(
            "duration_threshold_minutes",
            self.duration_threshold_minutes,
        )?;
        positive("histogram_chunk_minutes", self.histogram_chunk_minutes)?;
        regex::Regex::new(&self.report_code_pattern)
            .map_err(|e| Error::Invalid(format!("config: report_code_pattern: {e}")))?;

        let root = &self.data_root;
        if !root.is_dir() {
            return Err(Error::Invalid(format!(
                "config: data_root {} is not an existing directory",
                root.display()
            )));
        }
        let probe = root.join(".nepkit-write-probe");
        std::fs::write(&probe, b"")
            .and_then(|()| std::fs::remove_file(&probe))
            .map_err(|e| {
                Error::Invalid(format!(
                    "config: data_root {} is not writable: {e}",
                    root.display()
                ))
            })
    }

    pub fn analytics(&self) -> AnalyticsOptions {
        AnalyticsOptions {
            threshold_minutes: self.duration_threshold_minutes,
            chunk_minutes: self.histogram_chunk_minutes,
            min_presorted: self.min_presorted_issues,
        }
    }
}
