//! Flat `key = value` configuration with `[section]` headers.
//!
//! Keys inside a section are addressed as `section.key`. Every key read by an
//! experiment is recorded together with its resolved value (defaults
//! included), and keys that no experiment reads are rejected.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (no, line) in text.lines().enumerate() {
            let line = strip_comment(line).trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: &str| CliError::Config(format!("line {}: {msg}", no + 1));
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| at("unterminated section header"))?.trim();
                if !valid_name(name) {
                    return Err(at(&format!("invalid section name '{name}'")));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| at("expected 'key = value'"))?;
            let key = key.trim();
            if !valid_name(key) {
                return Err(at(&format!("invalid key '{key}'")));
            }
            let full = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
            if entries.insert(full.clone(), value.trim().to_string()).is_some() {
                return Err(at(&format!("duplicate key '{full}'")));
            }
        }
        Ok(RawConfig { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

fn strip_comment(line: &str) -> &str {
    let t = line.trim_start();
    if t.starts_with('#') || t.starts_with(';') {
        return "";
    }
    match line.find(" #") {
        Some(i) => &line[..i],
        None => line,
    }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// Typed, tracked access to a [`RawConfig`].
#[derive(Debug)]
pub struct Params {
    raw: RawConfig,
    used: RefCell<BTreeSet<String>>,
    resolved: RefCell<BTreeMap<String, String>>,
}

impl Params {
    pub fn new(raw: RawConfig) -> Self {
        Params { raw, used: RefCell::default(), resolved: RefCell::default() }
    }

    fn lookup<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        self.used.borrow_mut().insert(key.to_string());
        match self.raw.get(key) {
            None => Ok(None),
            Some(text) => {
                let value = text
                    .parse::<T>()
                    .map_err(|_| CliError::Config(format!("key '{key}': cannot parse '{text}'")))?;
                self.resolved.borrow_mut().insert(key.to_string(), text.to_string());
                Ok(Some(value))
            }
        }
    }

    /// Value of a key that has no default.
    pub fn require<T: FromStr>(&self, key: &str) -> CliResult<T> {
        self.lookup(key)?.ok_or_else(|| CliError::Config(format!("missing required key '{key}'")))
    }

    /// Value of a key, falling back to `default`.
    pub fn get<T: FromStr + Display>(&self, key: &str, default: T) -> CliResult<T> {
        match self.lookup(key)? {
            Some(v) => Ok(v),
            None => {
                self.resolved.borrow_mut().insert(key.to_string(), default.to_string());
                Ok(default)
            }
        }
    }

    /// Comma-separated list of values.
    pub fn get_list<T: FromStr + Display>(&self, key: &str, default: &[T]) -> CliResult<Vec<T>>
    where
        T: Clone,
    {
        self.used.borrow_mut().insert(key.to_string());
        match self.raw.get(key) {
            None => {
                let text = default.iter().map(T::to_string).collect::<Vec<_>>().join(", ");
                self.resolved.borrow_mut().insert(key.to_string(), text);
                Ok(default.to_vec())
            }
            Some(text) => {
                let items = text
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<T>()
                            .map_err(|_| CliError::Config(format!("key '{key}': cannot parse '{}'", s.trim())))
                    })
                    .collect::<CliResult<Vec<T>>>()?;
                if items.is_empty() {
                    return Err(CliError::Config(format!("key '{key}': empty list")));
                }
                self.resolved.borrow_mut().insert(key.to_string(), text.to_string());
                Ok(items)
            }
        }
    }

    /// Rejects keys nobody read and returns the resolved configuration.
    pub fn finish(self) -> CliResult<BTreeMap<String, String>> {
        let used = self.used.into_inner();
        let unknown: Vec<&str> = self.raw.keys().filter(|k| !used.contains(*k)).collect();
        if !unknown.is_empty() {
            return Err(CliError::Config(format!("unknown key(s): {}", unknown.join(", "))));
        }
        Ok(self.resolved.into_inner())
    }
}

/// Renders a resolved configuration back into config-file text.
pub fn render(resolved: &BTreeMap<String, String>) -> String {
    let mut top = String::new();
    let mut sections: BTreeMap<&str, String> = BTreeMap::new();
    for (key, value) in resolved {
        match key.split_once('.') {
            None => top.push_str(&format!("{key} = {value}\n")),
            Some((section, name)) => sections.entry(section).or_default().push_str(&format!("{name} = {value}\n")),
        }
    }
    for (section, body) in sections {
        top.push_str(&format!("\n[{section}]\n{body}"));
    }
    top
}
