use crate::error::{Error, Result};

/// One `key = value` line of a run config file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigEntry {
    pub key: String,
    pub value: String,
}

impl ConfigEntry {
    /// Command-line form. Underscores in keys become dashes; `true` yields
    /// a bare switch and `false` yields nothing.
    pub fn to_flags(&self) -> Vec<String> {
        let flag = format!("--{}", self.key.replace('_', "-"));
        match self.value.as_str() {
            "true" => vec![flag],
            "false" => vec![],
            v => vec![flag, v.to_owned()],
        }
    }
}

/// Blank lines and `#` comments are skipped. Values may be wrapped in
/// double quotes.
pub fn parse_config(text: &str) -> Result<Vec<ConfigEntry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("config line {}: expected `key = value`", i + 1)))?;
        let key = key.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(Error::Config(format!("config line {}: bad key {key:?}", i + 1)));
        }
        let value = value.trim();
        let value = value
            .strip_prefix('"')
            .and_then(|v| v.strip_suffix('"'))
            .unwrap_or(value);
        if matches!(key, "config" | "manifest") {
            return Err(Error::Config(format!("config line {}: {key} cannot be set from a config file", i + 1)));
        }
        out.push(ConfigEntry {
            key: key.to_owned(),
            value: value.to_owned(),
        });
    }
    Ok(out)
}
