//! `key = value` configuration files with `[section]` headers.
//!
//! Keys before any header belong to the `common` section. `#` and `;` start
//! comments. Lookups try the command's own section, then `common`.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

pub const SECTIONS: [&str; 5] = ["common", "verify-abstract", "betti-bound", "mesh-info", "gen-fixture"];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<(String, String), String>,
}

fn err(line: usize, reason: impl Into<String>) -> CliError {
    CliError::Config {
        line,
        reason: reason.into(),
    }
}

impl ConfigFile {
    pub fn parse(text: &str, known_keys: &[&str]) -> Result<Self, CliError> {
        let mut section = "common".to_string();
        let mut values = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let n = k + 1;
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(n, "unterminated section header"))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(err(n, format!("unknown section `[{name}]`")));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(n, format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim().replace('_', "-");
            if !known_keys.contains(&key.as_str()) {
                return Err(err(n, format!("unknown key `{key}`")));
            }
            if values.insert((section.clone(), key.clone()), value.trim().to_string()).is_some() {
                return Err(err(n, format!("duplicate key `{key}` in `[{section}]`")));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path, known_keys: &[&str]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Self::parse(&text, known_keys)
    }

    pub fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.values
            .get(&(section.to_string(), key.to_string()))
            .or_else(|| self.values.get(&("common".to_string(), key.to_string())))
            .map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, CliError> {
        match self.raw(section, key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Input(format!("config key `{key}`: cannot parse `{v}`"))),
        }
    }
}
