//! Parameter resolution: command-line flag, then config file, then default.
//!
//! Config files are flat `key = value` lines. Keys use the long flag names
//! (`radius`, `max-iter`, ...); `#` starts a comment line.

use std::{
    collections::{BTreeMap, BTreeSet},
    fmt::Display,
    path::Path,
    str::FromStr,
};

use serde::Serialize;
use serde_json::Value;

use crate::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Invalid(format!("config line {}: expected key=value", i + 1)))?;
            let key = key.trim().replace('_', "-");
            if key.is_empty() {
                return Err(CliError::Invalid(format!("config line {}: empty key", i + 1)));
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::Invalid(format!("config key {key:?} given twice")));
            }
        }
        Ok(ConfigFile { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }
}

/// Resolves parameters for one command and records every resolved value.
#[derive(Debug)]
pub struct Resolver {
    file: ConfigFile,
    used: BTreeSet<String>,
    resolved: BTreeMap<String, Value>,
}

impl Resolver {
    pub fn new(file: ConfigFile) -> Self {
        Resolver { file, used: BTreeSet::new(), resolved: BTreeMap::new() }
    }

    fn lookup<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.used.insert(key.to_string());
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.entries.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| CliError::Invalid(format!("config key {key}: cannot parse {raw:?}: {e}"))),
        }
    }

    fn record<T: Serialize>(&mut self, key: &str, value: &T) {
        let v = serde_json::to_value(value).expect("config values serialise");
        self.resolved.insert(key.to_string(), v);
    }

    pub fn value<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        let v = self.lookup(key, flag)?.unwrap_or(default);
        self.record(key, &v);
        Ok(v)
    }

    pub fn required<T>(&mut self, key: &str, flag: Option<T>) -> Result<T>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        let v =
            self.lookup(key, flag)?.ok_or_else(|| CliError::Invalid(format!("missing required parameter --{key}")))?;
        self.record(key, &v);
        Ok(v)
    }

    pub fn optional<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        let v = self.lookup(key, flag)?;
        self.record(key, &v);
        Ok(v)
    }

    /// The resolved configuration. Fails if the file set keys this command
    /// does not understand.
    pub fn finish(self) -> Result<BTreeMap<String, Value>> {
        if let Some(key) = self.file.entries.keys().find(|k| !self.used.contains(*k)) {
            return Err(CliError::Invalid(format!("unknown config key {key:?}")));
        }
        Ok(self.resolved)
    }
}
