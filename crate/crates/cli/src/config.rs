//! Flat `key = value` run configuration.
//!
//! One entry per line, `#` starts a comment, later entries override earlier
//! ones. Every key a command reads must be listed in [`KNOWN_KEYS`]; anything
//! else is rejected so that typos cannot silently fall back to defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::RunError;

pub const KNOWN_KEYS: &[&str] = &[
    "command",
    "model",
    "C",
    "profile",
    "warp",
    "profile_file",
    "weights",
    "level",
    "r",
    "curve",
    "center",
    "radius",
    "theta",
    "wobble",
    "wobble_mode",
    "nodes",
    "seed",
    "perturbation",
    "amplitude",
    "perturbation_terms",
    "essential",
    "deform_steps",
    "dt_safety",
    "dt_cap",
    "max_time",
    "stop_tol",
    "resample",
    "resample_ratio",
    "sample_interval",
    "tail_fraction",
    "tail_threshold",
    "probe_fraction",
    "diagnostics",
    "snapshot_times",
    "trials",
    "max_mode",
    "trial_dim",
    "fd_checks",
    "points",
    "rho",
    "orbit_dt",
    "orbit_time",
    "orbit_every",
    "node_cap",
    "exhaustive",
    "max_entry",
    "max_n",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
    /// Directory that relative file references resolve against.
    base: PathBuf,
}

impl Config {
    pub fn parse(text: &str, base: &Path) -> Result<Self, RunError> {
        let mut cfg = Config { entries: BTreeMap::new(), base: base.to_path_buf() };
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| RunError::validation(format!("config line {}: expected key = value", no + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), RunError> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(RunError::validation(format!("unknown config key '{key}'")));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn resolve(&self, file: &str) -> PathBuf {
        self.base.join(file)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, RunError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| RunError::validation(format!("config key '{key}': cannot parse '{v}'"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, RunError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, RunError> {
        self.get(key)?.ok_or_else(|| RunError::validation(format!("config key '{key}' is required")))
    }

    /// Comma-separated list; an absent key gives `None`.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, RunError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) if v.trim().is_empty() => Ok(Some(Vec::new())),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| RunError::validation(format!("config key '{key}': cannot parse '{s}'")))
                })
                .collect::<Result<Vec<T>, _>>()
                .map(Some),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let cfg = Config::parse("model = round_sphere # trailing\n\n# note\nnodes=64\nnodes = 128\n", Path::new(".")).unwrap();
        assert_eq!(cfg.raw("model"), Some("round_sphere"));
        assert_eq!(cfg.require::<usize>("nodes").unwrap(), 128);
        assert_eq!(cfg.get::<f64>("C").unwrap(), None);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(Config::parse("modle = x", Path::new(".")).is_err());
        assert!(Config::parse("nodes", Path::new(".")).is_err());
        let cfg = Config::parse("nodes = many\nweights = 1, 2,x", Path::new(".")).unwrap();
        assert!(cfg.require::<usize>("nodes").is_err());
        assert!(cfg.list::<i64>("weights").is_err());
    }
}
