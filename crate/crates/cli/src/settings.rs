//! Flat `key = value` settings merged from a config file and the command line.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::Failure;

pub const KNOWN_KEYS: &[&str] = &[
    "scheme", "epsilon", "tau", "modes", "time", "norm-r", "out", "format", "seed", "dealias",
    "timings", "datum", "stride", "sigma", "flow-time", "trials", "weight", "order", "tol",
];

#[derive(Debug, Default, Clone)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

impl Settings {
    /// Parses a config file: one `key = value` per line, `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        let mut settings = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Failure::Config(format!("config line {}: expected key = value", lineno + 1)))?;
            settings.set(key, value.trim())?;
        }
        Ok(settings)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Failure> {
        let key = normalize(key);
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Failure::Config(format!("unknown setting '{key}'")));
        }
        self.values.insert(key, value.to_string());
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, Failure>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => parse_one(key, v),
        }
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str, default: Vec<T>) -> Result<Vec<T>, Failure>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| parse_one(key, s))
                .collect(),
        }
    }

    pub fn flag(&self, key: &str) -> Result<bool, Failure> {
        match self.raw(key).map(|v| v.trim().to_ascii_lowercase()) {
            None => Ok(false),
            Some(v) => match v.as_str() {
                "true" | "1" | "yes" | "on" => Ok(true),
                "false" | "0" | "no" | "off" => Ok(false),
                _ => Err(Failure::Config(format!("{key}: expected a boolean, got '{v}'"))),
            },
        }
    }
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T, Failure>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| Failure::Config(format!("{key}: cannot parse '{}': {e}", value.trim())))
}
