//! Flat `key = value` configuration text.
//!
//! One entry per line, `#` starts a comment, keys carry dotted section
//! prefixes (`rsf.n_trees`). Keys are kept sorted so serialized files diff
//! cleanly.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KvConfig {
    entries: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: n + 1,
                message: format!("expected key = value, got {raw:?}"),
            })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Parse {
                    line: n + 1,
                    message: "empty key".into(),
                });
            }
            if entries.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Parse {
                    line: n + 1,
                    message: format!("duplicate key {k:?}"),
                });
            }
        }
        Ok(KvConfig { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.insert(key.into(), value.to_string());
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn require_str(&self, key: &str) -> Result<&str> {
        self.get_str(key)
            .ok_or_else(|| Error::Config(format!("missing key {key:?}")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get_str(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Config(format!("cannot parse {key} = {v:?}")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| Error::Config(format!("missing key {key:?}")))
    }

    /// Entries under `prefix.`, with the prefix stripped.
    pub fn section(&self, prefix: &str) -> KvConfig {
        let p = format!("{prefix}.");
        KvConfig {
            entries: self
                .entries
                .iter()
                .filter_map(|(k, v)| k.strip_prefix(&p).map(|s| (s.to_string(), v.clone())))
                .collect(),
        }
    }

    /// Insert every entry of `other` under `prefix.`.
    pub fn merge_section(&mut self, prefix: &str, other: &KvConfig) {
        for (k, v) in &other.entries {
            self.entries.insert(format!("{prefix}.{k}"), v.clone());
        }
    }

    /// Drop every key under `prefix.`.
    pub fn clear_section(&mut self, prefix: &str) {
        let p = format!("{prefix}.");
        self.entries.retain(|k, _| !k.starts_with(&p));
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

impl fmt::Display for KvConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}
