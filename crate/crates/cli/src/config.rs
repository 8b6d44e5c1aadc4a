//! Run configuration.
//!
//! ```toml
//! out = "results"
//! seed = 7
//!
//! [experiments.stiff-6.14]
//! lambda = 0.6
//! steps = 500
//!
//! [experiments.f2-euler]
//! h = 0.2
//!
//! [tolerances]
//! stiff.rel = 1e-3
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// Parameter values as given on the command line or in a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params(BTreeMap<String, String>);

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, name: impl Into<String>, value: impl Into<String>) {
        self.0.insert(name.into(), value.into());
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn raw(&self, name: &str) -> Option<&str> {
        self.0.get(name).map(String::as_str)
    }

    pub fn f64_or(&self, name: &str, default: f64) -> CliResult<f64> {
        self.parse_or(name, default)
    }

    pub fn usize_or(&self, name: &str, default: usize) -> CliResult<usize> {
        self.parse_or(name, default)
    }

    pub fn str_or<'a>(&'a self, name: &str, default: &'a str) -> &'a str {
        self.raw(name).unwrap_or(default)
    }

    fn parse_or<T: std::str::FromStr>(&self, name: &str, default: T) -> CliResult<T> {
        match self.raw(name) {
            None => Ok(default),
            Some(v) => v.trim().parse().map_err(|_| CliError::BadParam {
                name: name.to_string(),
                value: v.to_string(),
            }),
        }
    }
}

impl FromIterator<(String, String)> for Params {
    fn from_iter<I: IntoIterator<Item = (String, String)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    out: Option<PathBuf>,
    seed: Option<u64>,
    #[serde(default)]
    experiments: BTreeMap<String, BTreeMap<String, toml::Value>>,
    #[serde(default)]
    tolerances: BTreeMap<String, toml::Value>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Experiments sorted by name.
    pub experiments: Vec<(String, Params)>,
    pub tolerances: BTreeMap<String, f64>,
}

fn scalar(v: &toml::Value) -> Option<String> {
    match v {
        toml::Value::String(s) => Some(s.clone()),
        toml::Value::Integer(i) => Some(i.to_string()),
        toml::Value::Float(f) => Some(f.to_string()),
        toml::Value::Boolean(b) => Some(b.to_string()),
        _ => None,
    }
}

/// An unquoted `[experiments.stiff-6.14]` parses as nested tables; the
/// nesting is folded back into a dotted name.
fn collect_experiment(
    name: &str,
    table: &BTreeMap<String, toml::Value>,
    out: &mut Vec<(String, Params)>,
) -> CliResult<()> {
    let mut p = Params::new();
    let mut has_scalars = false;
    for (k, v) in table {
        if let toml::Value::Table(t) = v {
            let inner: BTreeMap<String, toml::Value> = t.clone().into_iter().collect();
            collect_experiment(&format!("{name}.{k}"), &inner, out)?;
            continue;
        }
        let s = scalar(v)
            .ok_or_else(|| CliError::Config(format!("{name}.{k}: expected a scalar value")))?;
        p.set(k.clone(), s);
        has_scalars = true;
    }
    if has_scalars || table.is_empty() {
        out.push((name.to_string(), p));
    }
    Ok(())
}

fn flatten(
    prefix: &str,
    table: &BTreeMap<String, toml::Value>,
    out: &mut BTreeMap<String, f64>,
) -> CliResult<()> {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            toml::Value::Table(t) => {
                let inner: BTreeMap<String, toml::Value> = t.clone().into_iter().collect();
                flatten(&key, &inner, out)?;
            }
            toml::Value::Float(f) => {
                out.insert(key, *f);
            }
            toml::Value::Integer(i) => {
                out.insert(key, *i as f64);
            }
            _ => {
                return Err(CliError::Config(format!(
                    "tolerance `{key}` must be a number"
                )))
            }
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let mut experiments = Vec::new();
        for (name, table) in &raw.experiments {
            collect_experiment(name, table, &mut experiments)?;
        }
        experiments.sort_by(|a, b| a.0.cmp(&b.0));
        let mut tolerances = BTreeMap::new();
        flatten("", &raw.tolerances, &mut tolerances)?;
        Ok(Self {
            out: raw.out,
            seed: raw.seed,
            experiments,
            tolerances,
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections() {
        let cfg = RunConfig::parse(
            r#"
out = "o"
seed = 3
[experiments.stiff-6.14]
lambda = 0.9
steps = 10
[experiments.f2-euler]
h = "0.1"
[experiments."f4-heun"]
[tolerances]
stiff.rel = 1e-5
"#,
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(3));
        assert_eq!(cfg.out.as_deref(), Some(Path::new("o")));
        assert_eq!(cfg.experiments[0].0, "f2-euler");
        assert_eq!(cfg.experiments[1].0, "f4-heun");
        assert_eq!(cfg.experiments[2].0, "stiff-6.14");
        let stiff = &cfg.experiments[2].1;
        assert_eq!(stiff.f64_or("lambda", 0.0).unwrap(), 0.9);
        assert_eq!(stiff.usize_or("steps", 0).unwrap(), 10);
        assert_eq!(cfg.tolerances["stiff.rel"], 1e-5);
    }

    #[test]
    fn rejects_garbage() {
        assert!(RunConfig::parse("nonsense = [").is_err());
        assert!(RunConfig::parse("colour = 1").is_err());
        let mut p = Params::new();
        p.set("h", "abc");
        assert!(matches!(p.f64_or("h", 1.0), Err(CliError::BadParam { .. })));
    }
}
