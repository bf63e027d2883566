//! Flat `key=value` configuration files, merged under the CLI flags.

use std::collections::BTreeMap;

use martinet::error::Error;

#[derive(Default)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    /// Parses a file of `key=value` lines; `#` starts a comment.
    pub fn load(path: &str) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Precondition(format!("cannot read config `{path}`: {e}")))?;
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Precondition(format!(
                    "config `{path}` line {}: expected key=value, got `{line}`",
                    lineno + 1
                )));
            };
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn get_str(&self, key: &str) -> Option<String> {
        self.entries.get(key).cloned()
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.entries.get(key).and_then(|v| v.parse().ok())
    }

    pub fn get_u64(&self, key: &str) -> Option<u64> {
        self.entries.get(key).and_then(|v| v.parse().ok())
    }

    pub fn get_usize(&self, key: &str) -> Option<usize> {
        self.entries.get(key).and_then(|v| v.parse().ok())
    }
}
