//! Plain-text `key = value` run configuration. Command-line flags take
//! precedence over file values.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::failure::Failure;

#[derive(Clone, Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Failure::Usage(format!("config line {}: expected key = value", n + 1)));
            };
            let key = k.trim().replace('-', "_");
            if key.is_empty() {
                return Err(Failure::Usage(format!("config line {}: empty key", n + 1)));
            }
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Failure::Usage(format!("config key {key:?} given twice")));
            }
        }
        Ok(Self { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Rejects keys no command reads.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), Failure> {
        match self.values.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Failure::Usage(format!("unknown config key {k:?}"))),
            None => Ok(()),
        }
    }
}

/// Resolves one setting from a flag, then the config file, and records the
/// effective value for the manifest.
pub struct Resolver<'a> {
    file: &'a ConfigFile,
    pub effective: BTreeMap<String, String>,
}

impl<'a> Resolver<'a> {
    pub fn new(file: &'a ConfigFile) -> Self {
        Self { file, effective: BTreeMap::new() }
    }

    pub fn opt<T: FromStr + ToString + Clone>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, Failure>
    where
        T::Err: std::fmt::Display,
    {
        let value = match flag {
            Some(v) => Some(v),
            None => match self.file.raw(key) {
                Some(text) => {
                    Some(text.parse::<T>().map_err(|e| Failure::Usage(format!("config {key} = {text:?}: {e}")))?)
                }
                None => None,
            },
        };
        if let Some(v) = &value {
            self.effective.insert(key.to_string(), v.to_string());
        }
        Ok(value)
    }

    pub fn or<T: FromStr + ToString + Clone>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, Failure>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.opt(key, flag)?.unwrap_or(default);
        self.effective.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    pub fn required<T: FromStr + ToString + Clone>(&mut self, key: &str, flag: Option<T>) -> Result<T, Failure>
    where
        T::Err: std::fmt::Display,
    {
        self.opt(key, flag)?.ok_or_else(|| Failure::Usage(format!("missing --{}", key.replace('_', "-"))))
    }

    pub fn flag(&mut self, key: &str, flag: bool) -> Result<bool, Failure> {
        let v = if flag { true } else { self.opt::<bool>(key, None)?.unwrap_or(false) };
        self.effective.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    pub fn record(&mut self, key: &str, value: impl ToString) {
        self.effective.insert(key.to_string(), value.to_string());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_dashes() {
        let c = ConfigFile::parse("# run\nkind = scalar\nsupport-len=3 # inline\n\n").unwrap();
        assert_eq!(c.raw("kind"), Some("scalar"));
        assert_eq!(c.raw("support_len"), Some("3"));
        assert!(c.check_keys(&["kind", "support_len"]).is_ok());
        assert!(c.check_keys(&["kind"]).is_err());
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(ConfigFile::parse("kind scalar").is_err());
        assert!(ConfigFile::parse("a=1\na=2").is_err());
        assert!(ConfigFile::parse("=1").is_err());
    }

    #[test]
    fn flags_override_file() {
        let c = ConfigFile::parse("dim = 3").unwrap();
        let mut r = Resolver::new(&c);
        assert_eq!(r.required::<usize>("dim", Some(2)).unwrap(), 2);
        assert_eq!(r.required::<usize>("dim", None).unwrap(), 3);
        assert!(r.required::<usize>("support_len", None).is_err());
        assert_eq!(r.effective.get("dim").map(String::as_str), Some("3"));
    }
}
