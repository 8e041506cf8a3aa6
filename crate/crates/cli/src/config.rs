//! Flat `key = value` configuration with dotted section prefixes.
//!
//! Blank lines and lines starting with `#` are ignored. Every key that is
//! read, with its default if absent, is recorded so manifests can echo the
//! fully resolved configuration. Keys present in the file but never read are
//! reported as unknown, with their line numbers.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug, Clone)]
pub struct Config {
    source: String,
    base_dir: PathBuf,
    entries: BTreeMap<String, Entry>,
    used: BTreeSet<String>,
    resolved: BTreeMap<String, String>,
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

impl Config {
    pub fn parse(text: &str, source: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let Some((k, v)) = s.split_once('=') else {
                return Err(CliError::new(format!("{source}:{line}: expected `key = value`, found `{s}`")));
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || k.contains(char::is_whitespace) {
                return Err(CliError::new(format!("{source}:{line}: invalid key `{k}`")));
            }
            if let Some(prev) = entries.insert(
                k.to_string(),
                Entry {
                    value: v.to_string(),
                    line,
                },
            ) {
                return Err(CliError::new(format!(
                    "{source}:{line}: duplicate key `{k}` (first set on line {})",
                    prev.line
                )));
            }
        }
        Ok(Self {
            source: source.to_string(),
            base_dir: base_dir.to_path_buf(),
            entries,
            used: BTreeSet::new(),
            resolved: BTreeMap::new(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::new(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &path.display().to_string(), &base)
    }

    /// Empty configuration: every key takes its default.
    pub fn empty(base_dir: &Path) -> Self {
        Self::parse("", "<defaults>", base_dir).expect("empty config parses")
    }

    fn take(&mut self, key: &str) -> Option<Entry> {
        self.used.insert(key.to_string());
        self.entries.get(key).cloned()
    }

    fn bad(&self, e: &Entry, key: &str, what: &str) -> CliError {
        CliError::new(format!("{}:{}: `{key}` must be {what}, got `{}`", self.source, e.line, e.value))
    }

    fn record(&mut self, key: &str, shown: String) {
        self.resolved.insert(key.to_string(), shown);
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn f64_opt(&mut self, key: &str) -> Result<Option<f64>, CliError> {
        let Some(e) = self.take(key) else {
            return Ok(None);
        };
        let v: f64 = parse_f64(&e.value).ok_or_else(|| self.bad(&e, key, "a number"))?;
        self.record(key, fmt_f64(v));
        Ok(Some(v))
    }

    pub fn f64_or(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.f64_opt(key)? {
            Some(v) => Ok(v),
            None => {
                self.record(key, fmt_f64(default));
                Ok(default)
            }
        }
    }

    pub fn f64_req(&mut self, key: &str) -> Result<f64, CliError> {
        self.f64_opt(key)?
            .ok_or_else(|| CliError::new(format!("{}: missing required key `{key}`", self.source)))
    }

    pub fn u64_or(&mut self, key: &str, default: u64) -> Result<u64, CliError> {
        let v = match self.take(key) {
            Some(e) => e.value.parse().map_err(|_| self.bad(&e, key, "a nonnegative integer"))?,
            None => default,
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn usize_or(&mut self, key: &str, default: usize) -> Result<usize, CliError> {
        Ok(self.u64_or(key, default as u64)? as usize)
    }

    pub fn i64_or(&mut self, key: &str, default: i64) -> Result<i64, CliError> {
        let v = match self.take(key) {
            Some(e) => e.value.parse().map_err(|_| self.bad(&e, key, "an integer"))?,
            None => default,
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn bool_or(&mut self, key: &str, default: bool) -> Result<bool, CliError> {
        let v = match self.take(key) {
            Some(e) => match e.value.as_str() {
                "true" | "yes" | "1" => true,
                "false" | "no" | "0" => false,
                _ => return Err(self.bad(&e, key, "true or false")),
            },
            None => default,
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn str_or(&mut self, key: &str, default: &str) -> String {
        let v = self.take(key).map(|e| e.value).unwrap_or_else(|| default.to_string());
        self.record(key, v.clone());
        v
    }

    /// Value checked against a fixed list of choices.
    pub fn choice_or(&mut self, key: &str, choices: &[&str], default: &str) -> Result<String, CliError> {
        if let Some(e) = self.entries.get(key).cloned() {
            if !choices.contains(&e.value.as_str()) {
                self.used.insert(key.to_string());
                return Err(self.bad(&e, key, &format!("one of {}", choices.join(", "))));
            }
        }
        Ok(self.str_or(key, default))
    }

    pub fn path_opt(&mut self, key: &str) -> Option<PathBuf> {
        let e = self.take(key)?;
        self.record(key, e.value.clone());
        Some(self.base_dir.join(&e.value))
    }

    pub fn path_or(&mut self, key: &str, default: &str) -> PathBuf {
        let v = self.str_or(key, default);
        self.base_dir.join(v)
    }

    pub fn f64_list_opt(&mut self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some(e) = self.take(key) else {
            return Ok(None);
        };
        let v: Option<Vec<f64>> = e.value.split(',').map(|s| parse_f64(s.trim())).collect();
        let v = v.filter(|v| !v.is_empty()).ok_or_else(|| self.bad(&e, key, "a comma-separated list of numbers"))?;
        self.record(key, join(&v));
        Ok(Some(v))
    }

    pub fn f64_list_or(&mut self, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        match self.f64_list_opt(key)? {
            Some(v) => Ok(v),
            None => {
                self.record(key, join(default));
                Ok(default.to_vec())
            }
        }
    }

    pub fn u64_list_or(&mut self, key: &str, default: &[u64]) -> Result<Vec<u64>, CliError> {
        let v = match self.take(key) {
            Some(e) => {
                let v: Option<Vec<u64>> = e.value.split(',').map(|s| s.trim().parse().ok()).collect();
                v.filter(|v| !v.is_empty())
                    .ok_or_else(|| self.bad(&e, key, "a comma-separated list of integers"))?
            }
            None => default.to_vec(),
        };
        let shown = v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        self.record(key, shown);
        Ok(v)
    }

    pub fn vec3_opt(&mut self, key: &str) -> Result<Option<[f64; 3]>, CliError> {
        let Some(e) = self.entries.get(key).cloned() else {
            self.used.insert(key.to_string());
            return Ok(None);
        };
        let v = self.f64_list_opt(key)?.expect("entry present");
        let arr: [f64; 3] = v.try_into().map_err(|_| self.bad(&e, key, "three comma-separated numbers"))?;
        Ok(Some(arr))
    }

    pub fn vec3_or(&mut self, key: &str, default: [f64; 3]) -> Result<[f64; 3], CliError> {
        match self.vec3_opt(key)? {
            Some(v) => Ok(v),
            None => {
                self.record(key, join(&default));
                Ok(default)
            }
        }
    }

    /// Semicolon-separated list of points `x,y,z; x,y,z`.
    pub fn points_opt(&mut self, key: &str) -> Result<Option<Vec<[f64; 3]>>, CliError> {
        let Some(e) = self.take(key) else {
            return Ok(None);
        };
        let mut out = Vec::new();
        for part in e.value.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let v: Option<Vec<f64>> = part.split(',').map(|s| parse_f64(s.trim())).collect();
            let p: [f64; 3] = v
                .and_then(|v| v.try_into().ok())
                .ok_or_else(|| self.bad(&e, key, "points `x,y,z` separated by `;`"))?;
            out.push(p);
        }
        if out.is_empty() {
            return Err(self.bad(&e, key, "a nonempty list of points"));
        }
        let shown = out.iter().map(|p| join(p)).collect::<Vec<_>>().join("; ");
        self.record(key, shown);
        Ok(Some(out))
    }

    /// Fail on keys that were present but never read.
    pub fn check_unused(&self) -> Result<(), CliError> {
        let unknown: Vec<String> = self
            .entries
            .iter()
            .filter(|(k, _)| !self.used.contains(*k))
            .map(|(k, e)| format!("{}:{}: unknown key `{k}`", self.source, e.line))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::new(unknown.join("\n")))
        }
    }

    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    match s {
        "inf" | "infinity" => Some(f64::INFINITY),
        "pi" => Some(std::f64::consts::PI),
        "2pi" => Some(std::f64::consts::TAU),
        _ => s.parse().ok().filter(|v: &f64| !v.is_nan()),
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(",")
}
