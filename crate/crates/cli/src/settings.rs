//! Resolution of run settings: defaults, then a `key = value` config file,
//! then command-line flags. Keys are the long flag names.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use clap::parser::ValueSource;
use clap::ArgMatches;

use crate::Failure;

pub struct Settings {
    values: BTreeMap<String, String>,
    resolved: RefCell<BTreeMap<String, String>>,
}

/// Keys that do not affect results.
const NOT_ECHOED: [&str; 2] = ["config", "threads"];

impl Settings {
    /// Reads the optional `--config` file and overlays flags given on the
    /// command line. Config keys must be flags of the command (`known`).
    pub fn from_matches(m: &ArgMatches, known: &[String]) -> Result<Self, Failure> {
        let mut values = BTreeMap::new();
        if let Some(path) = m.get_one::<String>("config") {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::config(format!("reading config {path}: {e}")))?;
            values = parse_config(&text)?;
            if let Some(k) = values
                .keys()
                .find(|k| k.as_str() == "config" || !known.contains(k))
            {
                return Err(Failure::config(format!("{path}: unknown key {k}")));
            }
        }
        for id in m.ids() {
            let id = id.as_str();
            if m.value_source(id) != Some(ValueSource::CommandLine) || id == "config" {
                continue;
            }
            let key = id.replace('_', "-");
            let raw: Vec<String> = m
                .get_raw(id)
                .map(|vals| vals.map(|v| v.to_string_lossy().into_owned()).collect())
                .unwrap_or_default();
            let value = if raw.is_empty() {
                "true".to_string()
            } else {
                raw.join(",")
            };
            values.insert(key, value);
        }
        Ok(Settings {
            values,
            resolved: RefCell::new(BTreeMap::new()),
        })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn record(&self, key: &str, value: String) {
        if !NOT_ECHOED.contains(&key) {
            self.resolved.borrow_mut().insert(key.to_string(), value);
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, Failure>
    where
        T::Err: Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => {
                let parsed = v
                    .parse::<T>()
                    .map_err(|e| Failure::config(format!("bad value {v:?} for {key}: {e}")))?;
                self.record(key, v.to_string());
                Ok(Some(parsed))
            }
        }
    }

    pub fn or<T: FromStr + Display>(&self, key: &str, default: T) -> Result<T, Failure>
    where
        T::Err: Display,
    {
        match self.get(key)? {
            Some(v) => Ok(v),
            None => {
                self.record(key, default.to_string());
                Ok(default)
            }
        }
    }

    pub fn required<T: FromStr>(&self, key: &str) -> Result<T, Failure>
    where
        T::Err: Display,
    {
        self.get(key)?.ok_or_else(|| {
            Failure::config(format!("--{key} is required (flag or config key `{key}`)"))
        })
    }

    pub fn string(&self, key: &str) -> Option<String> {
        let v = self.raw(key)?.to_string();
        self.record(key, v.clone());
        Some(v)
    }

    pub fn flag(&self, key: &str) -> Result<bool, Failure> {
        self.or(key, false)
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str, default: &str) -> Result<Vec<T>, Failure>
    where
        T::Err: Display,
    {
        let raw = self.raw(key).unwrap_or(default).to_string();
        self.record(key, raw.clone());
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<T>()
                    .map_err(|e| Failure::config(format!("bad item {s:?} in {key}: {e}")))
            })
            .collect()
    }

    /// The settings actually used, as a config file that reproduces the run.
    pub fn echo(&self) -> String {
        let mut s = String::from("# resolved settings; pass back with --config\n");
        for (k, v) in self.resolved.borrow().iter() {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }

    pub fn write_echo(&self, dir: &Path, name: &str) -> Result<(), Failure> {
        let path = dir.join(name);
        std::fs::write(&path, self.echo())
            .map_err(|e| Failure::io(format!("writing {}: {e}", path.display())))
    }
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, Failure> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Failure::config(format!("config line {}: expected `key = value`", i + 1))
        })?;
        let key = k.trim().replace('_', "-");
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(Failure::config(format!(
                "config line {}: key {key} repeated",
                i + 1
            )));
        }
    }
    Ok(out)
}
