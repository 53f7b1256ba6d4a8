//! Merges a flat JSON config file with command-line flags.
//!
//! Keys mirror flag names (`"N"`, `"h-over-R"`, `"hop-cap"`, ...). A flag
//! given on the command line wins over the file. Every key in the file must
//! be one the running subcommand reads.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::{Map, Value};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

/// Parses a count written as an integer or in scientific notation (`1e6`).
pub fn parse_count(s: &str) -> std::result::Result<u64, String> {
    let s = s.trim();
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a count"))?;
    count_from_f64(x).ok_or_else(|| format!("`{s}` is not a non-negative integer"))
}

fn count_from_f64(x: f64) -> Option<u64> {
    (x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x <= 9.007_199_254_740_992e15).then_some(x as u64)
}

/// Comma-separated numbers, e.g. `10,25,50`.
#[derive(Debug, Clone, PartialEq)]
pub struct NumList(pub Vec<f64>);

impl FromStr for NumList {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number")))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(NumList)
    }
}

pub struct Resolver {
    source: String,
    text: String,
    map: Map<String, Value>,
    used: RefCell<BTreeSet<String>>,
}

impl Resolver {
    pub fn empty() -> Self {
        Resolver { source: String::new(), text: String::new(), map: Map::new(), used: RefCell::new(BTreeSet::new()) }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("{}: cannot read config: {e}", path.display())))?;
        Self::from_text(&path.display().to_string(), text)
    }

    pub fn from_text(source: &str, text: String) -> Result<Self> {
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| ConfigError(format!("{source}:{}:{}: {e}", e.line(), e.column())))?;
        let Value::Object(map) = value else {
            return Err(ConfigError(format!("{source}:1: config must be a JSON object")));
        };
        for (k, v) in &map {
            if v.is_object() {
                return Err(ConfigError(format!(
                    "{source}:{}: key `{k}`: nested objects are not allowed",
                    line_of(&text, k)
                )));
            }
        }
        Ok(Resolver { source: source.to_string(), text, map, used: RefCell::new(BTreeSet::new()) })
    }

    fn err(&self, key: &str, msg: impl fmt::Display) -> ConfigError {
        ConfigError(format!("{}:{}: key `{key}`: {msg}", self.source, line_of(&self.text, key)))
    }

    fn raw(&self, key: &str) -> Option<&Value> {
        self.used.borrow_mut().insert(key.to_string());
        self.map.get(key)
    }

    pub fn f64(&self, key: &str, flag: Option<f64>, default: f64) -> Result<f64> {
        Ok(self.opt_f64(key, flag)?.unwrap_or(default))
    }

    pub fn opt_f64(&self, key: &str, flag: Option<f64>) -> Result<Option<f64>> {
        let file = match self.raw(key) {
            None | Some(Value::Null) => None,
            Some(Value::Number(n)) => n.as_f64(),
            Some(Value::String(s)) => Some(s.trim().parse().map_err(|_| self.err(key, "expected a number"))?),
            Some(_) => return Err(self.err(key, "expected a number")),
        };
        Ok(flag.or(file))
    }

    pub fn count(&self, key: &str, flag: Option<u64>, default: u64) -> Result<u64> {
        Ok(self.opt_count(key, flag)?.unwrap_or(default))
    }

    pub fn opt_count(&self, key: &str, flag: Option<u64>) -> Result<Option<u64>> {
        let file = match self.raw(key) {
            None | Some(Value::Null) => None,
            Some(Value::Number(n)) => Some(
                n.as_u64()
                    .or_else(|| n.as_f64().and_then(count_from_f64))
                    .ok_or_else(|| self.err(key, "expected a non-negative integer"))?,
            ),
            Some(Value::String(s)) => Some(parse_count(s).map_err(|e| self.err(key, e))?),
            Some(_) => return Err(self.err(key, "expected a non-negative integer")),
        };
        Ok(flag.or(file))
    }

    pub fn list(&self, key: &str, flag: Option<NumList>, default: &[f64]) -> Result<Vec<f64>> {
        let file = match self.raw(key) {
            None | Some(Value::Null) => None,
            Some(Value::Number(n)) => n.as_f64().map(|x| vec![x]),
            Some(Value::String(s)) => Some(s.parse::<NumList>().map_err(|e| self.err(key, e))?.0),
            Some(Value::Array(items)) => Some(
                items
                    .iter()
                    .map(|v| v.as_f64().ok_or_else(|| self.err(key, "expected an array of numbers")))
                    .collect::<Result<Vec<_>>>()?,
            ),
            Some(_) => return Err(self.err(key, "expected a number or an array of numbers")),
        };
        Ok(flag.map(|l| l.0).or(file).unwrap_or_else(|| default.to_vec()))
    }

    pub fn parsed<T>(&self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        let file = match self.raw(key) {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.parse::<T>().map_err(|e| self.err(key, e))?),
            Some(_) => return Err(self.err(key, "expected a string")),
        };
        Ok(flag.or(file).unwrap_or(default))
    }

    pub fn path(&self, key: &str, flag: Option<PathBuf>) -> Result<Option<PathBuf>> {
        let file = match self.raw(key) {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(PathBuf::from(s)),
            Some(_) => return Err(self.err(key, "expected a path string")),
        };
        Ok(flag.or(file))
    }

    pub fn flag(&self, key: &str, flag: bool) -> Result<bool> {
        match self.raw(key) {
            None | Some(Value::Null) => Ok(flag),
            Some(Value::Bool(b)) => Ok(flag || *b),
            Some(_) => Err(self.err(key, "expected true or false")),
        }
    }

    /// Fails on the first key (in file order) that no getter asked for.
    pub fn reject_unknown(&self) -> Result<()> {
        let used = self.used.borrow();
        let mut unknown: Vec<&String> = self.map.keys().filter(|k| !used.contains(*k)).collect();
        unknown.sort_by_key(|k| line_of(&self.text, k));
        match unknown.first() {
            Some(k) => Err(self.err(k, "unknown key for this command")),
            None => Ok(()),
        }
    }
}

/// 1-based line of the first `"key"` followed by a colon.
fn line_of(text: &str, key: &str) -> usize {
    let quoted = format!("\"{key}\"");
    text.lines()
        .position(|l| l.find(&quoted).is_some_and(|i| l[i + quoted.len()..].trim_start().starts_with(':')))
        .map_or(1, |i| i + 1)
}
