//! Flat key=value run-configuration files with `[section]` headers,
//! `#` comments, and typed accessors.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// A parsed configuration: sections of key/value pairs.
#[derive(Debug, Clone, Default)]
pub struct Config {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl Config {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| {
                        Error::Config(format!("line {}: unterminated section header", lineno + 1))
                    })?
                    .trim();
                if name.is_empty() {
                    return Err(Error::Config(format!("line {}: empty section name", lineno + 1)));
                }
                current = name.to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected `key = value`, got {line:?}",
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
            }
            let section = sections.entry(current.clone()).or_default();
            if section.insert(key.clone(), value).is_some() {
                return Err(Error::Config(format!(
                    "line {}: duplicate key {key:?} in section [{current}]",
                    lineno + 1
                )));
            }
        }
        Ok(Self { sections })
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section)?.get(key).map(String::as_str)
    }

    pub fn require(&self, section: &str, key: &str) -> Result<&str> {
        self.get(section, key)
            .ok_or_else(|| Error::Config(format!("missing key {key:?} in section [{section}]")))
    }

    pub fn get_f64(&self, section: &str, key: &str) -> Result<Option<f64>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("[{section}] {key}: not a number: {s:?}"))),
        }
    }

    pub fn require_f64(&self, section: &str, key: &str) -> Result<f64> {
        let s = self.require(section, key)?;
        s.parse()
            .map_err(|_| Error::Config(format!("[{section}] {key}: not a number: {s:?}")))
    }

    pub fn get_usize(&self, section: &str, key: &str) -> Result<Option<usize>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("[{section}] {key}: not an integer: {s:?}"))),
        }
    }

    /// All key/value pairs of a section in deterministic (sorted) order.
    pub fn section(&self, name: &str) -> impl Iterator<Item = (&str, &str)> {
        self.sections
            .get(name)
            .into_iter()
            .flat_map(|s| s.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let text = "
# top comment
[run]
benchmark = sen   # inline comment
model = at1

[material]
young_modulus = 210000
";
        let c = Config::parse(text).unwrap();
        assert_eq!(c.get("run", "benchmark"), Some("sen"));
        assert_eq!(c.get("run", "model"), Some("at1"));
        assert_eq!(c.require_f64("material", "young_modulus").unwrap(), 210000.0);
        assert_eq!(c.get("material", "missing"), None);
        assert!(c.require("material", "missing").is_err());
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(Config::parse("[run\nx = 1").is_err());
        assert!(Config::parse("just words").is_err());
        assert!(Config::parse("[s]\na = 1\na = 2").is_err());
        assert!(Config::parse("[s]\n= 2").is_err());
    }

    #[test]
    fn typed_accessors() {
        let c = Config::parse("[s]\nx = 2.5\nn = 7\nbad = zz").unwrap();
        assert_eq!(c.get_f64("s", "x").unwrap(), Some(2.5));
        assert_eq!(c.get_usize("s", "n").unwrap(), Some(7));
        assert!(c.get_f64("s", "bad").is_err());
        assert_eq!(c.get_f64("s", "absent").unwrap(), None);
    }
}
