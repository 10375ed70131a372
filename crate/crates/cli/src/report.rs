use std::fmt::Display;
use std::fs;
use std::path::Path;

use kcomb::config::RunConfig;
use sha2::{Digest, Sha256};

/// SHA-256 of the fully resolved configuration.
pub fn config_hash(cfg: &RunConfig) -> String {
    hex::encode(Sha256::digest(cfg.to_toml().as_bytes()))
}

/// Ordered `key=value` lines.
#[derive(Debug, Default)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn new(command: &str, cfg: &RunConfig) -> Self {
        let mut r = Self::default();
        r.push("command", command);
        r.push("config_hash", config_hash(cfg));
        r
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Display) {
        self.lines.push((key.into(), value.to_string()));
    }

    pub fn render(&self) -> String {
        self.lines
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    /// Prints to stdout and stores a copy in `path`.
    pub fn emit(&self, path: &Path) -> std::io::Result<()> {
        let text = self.render();
        print!("{text}");
        fs::write(path, text)
    }
}

/// Fixed-precision dB or a marker for absent values.
pub fn db_or(v: Option<f64>, marker: &str) -> String {
    match v {
        Some(x) => format!("{:.6}", 10.0 * x.log10()),
        None => marker.to_string(),
    }
}
