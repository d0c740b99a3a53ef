//! key=value configuration merged with command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, Result};

/// Values from a configuration file, each remembered with its line number so
/// parse errors point at the file.
#[derive(Debug, Default)]
pub struct Settings {
    path: PathBuf,
    values: BTreeMap<String, (usize, String)>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Settings::default());
        };
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(path, &text)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| CliError::Config {
                path: path.to_path_buf(),
                line: i + 1,
                msg,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got `{line}`")))?;
            let key = key.trim().trim_start_matches("--").to_string();
            if values
                .insert(key.clone(), (i + 1, value.trim().to_string()))
                .is_some()
            {
                return Err(err(format!("duplicate key `{key}`")));
            }
        }
        Ok(Settings {
            path: path.to_path_buf(),
            values,
        })
    }

    fn take_raw(&mut self, key: &str) -> Option<(usize, String)> {
        self.values.remove(key)
    }

    fn parse_value<T: FromStr>(&self, key: &str, line: usize, s: &str) -> Result<T> {
        s.parse().map_err(|_| CliError::Config {
            path: self.path.clone(),
            line,
            msg: format!("invalid value `{s}` for `{key}`"),
        })
    }

    /// Flag value if given, else the file value, else `None`.
    pub fn opt<T: FromStr>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>> {
        let from_file = self.take_raw(key);
        if flag.is_some() {
            return Ok(flag);
        }
        from_file
            .map(|(line, s)| self.parse_value(key, line, &s))
            .transpose()
    }

    pub fn get<T: FromStr>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T> {
        Ok(self.opt(key, flag)?.unwrap_or(default))
    }

    /// Comma-separated list; an empty flag list falls back to the file.
    pub fn list<T: FromStr>(&mut self, key: &str, flag: Vec<T>, default: Vec<T>) -> Result<Vec<T>> {
        let from_file = self.take_raw(key);
        if !flag.is_empty() {
            return Ok(flag);
        }
        match from_file {
            Some((line, s)) => s
                .split(',')
                .map(|item| self.parse_value(key, line, item.trim()))
                .collect(),
            None => Ok(default),
        }
    }

    /// Fails on keys that no option consumed.
    pub fn finish(self) -> Result<()> {
        match self.values.into_iter().next() {
            None => Ok(()),
            Some((key, (line, _))) => Err(CliError::Config {
                path: self.path,
                line,
                msg: format!("unknown key `{key}` for this command"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(text: &str) -> Settings {
        Settings::parse(Path::new("test.conf"), text).unwrap()
    }

    #[test]
    fn flags_override_file() {
        let mut s = settings("precision = 8\n# comment\nN = 10, 20\n");
        assert_eq!(s.get("precision", Some(5usize), 12).unwrap(), 5);
        assert_eq!(s.list::<u64>("N", vec![], vec![4]).unwrap(), vec![10, 20]);
        s.finish().unwrap();
    }

    #[test]
    fn defaults_and_unknown_keys() {
        let mut s = settings("bogus = 1");
        assert_eq!(s.get("precision", None, 12usize).unwrap(), 12);
        assert!(matches!(s.finish(), Err(CliError::Config { line: 1, .. })));
    }

    #[test]
    fn malformed_lines() {
        assert!(Settings::parse(Path::new("x"), "precision 12").is_err());
        assert!(Settings::parse(Path::new("x"), "a=1\na=2").is_err());
        let mut s = settings("eta = high");
        assert!(matches!(
            s.opt::<f64>("eta", None),
            Err(CliError::Config { .. })
        ));
    }
}
