//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are unique.
//! Consumers pull typed values out with [`KvConfig::take`] and finish with
//! [`KvConfig::finish`], which rejects any key nobody asked for.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}:{line}: expected `key = value`, got `{text}`")]
    Syntax { origin: String, line: usize, text: String },
    #[error("{origin}:{line}: duplicate key `{key}`")]
    Duplicate { origin: String, line: usize, key: String },
    #[error("{origin}: unknown config key `{key}`")]
    UnknownKey { origin: String, key: String },
    #[error("{origin}: invalid value `{value}` for key `{key}`: {reason}")]
    InvalidValue {
        origin: String,
        key: String,
        value: String,
        reason: String,
    },
}

#[derive(Debug, Clone, Default)]
pub struct KvConfig {
    origin: String,
    entries: BTreeMap<String, (usize, String)>,
}

impl KvConfig {
    pub fn parse(origin: &str, text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    origin: origin.to_string(),
                    line: idx + 1,
                    text: line.to_string(),
                });
            };
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(ConfigError::Syntax {
                    origin: origin.to_string(),
                    line: idx + 1,
                    text: line.to_string(),
                });
            }
            if entries.insert(key.clone(), (idx + 1, v.trim().to_string())).is_some() {
                return Err(ConfigError::Duplicate { origin: origin.to_string(), line: idx + 1, key });
            }
        }
        Ok(Self { origin: origin.to_string(), entries })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&path.display().to_string(), &text)
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }

    /// Removes `key` and parses it, leaving `slot` untouched when absent.
    pub fn take<T>(&mut self, key: &str, slot: &mut T) -> Result<(), ConfigError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        if let Some((_, value)) = self.entries.remove(key) {
            *slot = value.parse().map_err(|e: T::Err| ConfigError::InvalidValue {
                origin: self.origin.clone(),
                key: key.to_string(),
                value: value.clone(),
                reason: e.to_string(),
            })?;
        }
        Ok(())
    }

    /// Like [`take`](Self::take) for optional values; `none` clears the slot.
    pub fn take_opt<T>(&mut self, key: &str, slot: &mut Option<T>) -> Result<(), ConfigError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        if let Some((_, value)) = self.entries.remove(key) {
            *slot = if value.eq_ignore_ascii_case("none") || value.eq_ignore_ascii_case("all") {
                None
            } else {
                Some(value.parse().map_err(|e: T::Err| ConfigError::InvalidValue {
                    origin: self.origin.clone(),
                    key: key.to_string(),
                    value: value.clone(),
                    reason: e.to_string(),
                })?)
            };
        }
        Ok(())
    }

    pub fn invalid(&self, key: &str, value: impl ToString, reason: impl ToString) -> ConfigError {
        ConfigError::InvalidValue {
            origin: self.origin.clone(),
            key: key.to_string(),
            value: value.to_string(),
            reason: reason.to_string(),
        }
    }

    /// Errors on the first key that was never consumed.
    pub fn finish(self) -> Result<(), ConfigError> {
        match self.entries.into_keys().next() {
            Some(key) => Err(ConfigError::UnknownKey { origin: self.origin, key }),
            None => Ok(()),
        }
    }
}

/// Parses `true/false/1/0/yes/no`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flag(pub bool);

impl FromStr for Flag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "true" | "1" | "yes" | "on" => Ok(Flag(true)),
            "false" | "0" | "no" | "off" => Ok(Flag(false)),
            other => Err(format!("expected a boolean, got `{other}`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_consumes() {
        let mut kv = KvConfig::parse("t", "# comment\npopulation = 98\n\neta_c=15\n").unwrap();
        let mut pop = 0usize;
        let mut eta = 0.0f64;
        kv.take("population", &mut pop).unwrap();
        kv.take("eta_c", &mut eta).unwrap();
        kv.finish().unwrap();
        assert_eq!(pop, 98);
        assert_eq!(eta, 15.0);
    }

    #[test]
    fn unknown_key_is_named() {
        let kv = KvConfig::parse("t", "bogus = 1").unwrap();
        let err = kv.finish().unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn bad_value_and_syntax() {
        let mut kv = KvConfig::parse("t", "population = many").unwrap();
        let mut pop = 0usize;
        assert!(kv.take("population", &mut pop).is_err());
        assert!(KvConfig::parse("t", "no equals sign").is_err());
        assert!(KvConfig::parse("t", "a=1\na=2").is_err());
    }

    #[test]
    fn optional_values() {
        let mut kv = KvConfig::parse("t", "a = 5\nb = all").unwrap();
        let mut a: Option<usize> = None;
        let mut b: Option<usize> = Some(3);
        kv.take_opt("a", &mut a).unwrap();
        kv.take_opt("b", &mut b).unwrap();
        assert_eq!(a, Some(5));
        assert_eq!(b, None);
    }
}
