//! Output files are assembled in memory and written only after every target
//! has been checked, so a refused overwrite leaves nothing half-written.

use std::path::{Path, PathBuf};

use dtqw_core::export::round_sig;
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::Config(format!("format must be csv or json, got {other:?}"))),
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Rounds every non-integer number to 12 significant digits.
fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64().map(round_sig).and_then(serde_json::Number::from_f64) {
                *n = x;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("output serializes");
    round_floats(&mut v);
    let mut text = serde_json::to_string_pretty(&v).expect("json value serializes");
    text.push('\n');
    text
}

#[derive(Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn add_json<T: Serialize>(&mut self, name: impl Into<String>, value: &T) {
        self.add(name, to_json(value));
    }

    /// Writes every file into `dir`, refusing to replace existing ones
    /// unless `force` is set. Returns the written paths.
    pub fn write(self, dir: &Path, force: bool) -> Result<Vec<PathBuf>> {
        let targets: Vec<PathBuf> = self.files.iter().map(|(name, _)| dir.join(name)).collect();
        if !force {
            if let Some(existing) = targets.iter().find(|p| p.exists()) {
                return Err(CliError::Exists(existing.clone()));
            }
        }
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        for (path, (_, contents)) in targets.iter().zip(&self.files) {
            std::fs::write(path, contents).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
        }
        Ok(targets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_floats_are_rounded_and_integers_kept() {
        #[derive(Serialize)]
        struct Row {
            t: u64,
            x: f64,
        }
        let text = to_json(&Row { t: 3, x: 1.0 / 3.0 });
        assert!(text.contains("\"t\": 3"));
        assert!(text.contains("0.333333333333"));
        assert!(!text.contains("0.3333333333333"));
    }

    #[test]
    fn refuses_to_overwrite_without_force() {
        let dir = tempfile::tempdir().unwrap();
        let mut first = Outputs::default();
        first.add("a.csv", "1\n");
        first.write(dir.path(), false).unwrap();

        let mut second = Outputs::default();
        second.add("b.csv", "2\n");
        second.add("a.csv", "3\n");
        assert!(matches!(second.write(dir.path(), false), Err(CliError::Exists(_))));
        assert!(!dir.path().join("b.csv").exists());

        let mut third = Outputs::default();
        third.add("a.csv", "4\n");
        third.write(dir.path(), true).unwrap();
        assert_eq!(std::fs::read_to_string(dir.path().join("a.csv")).unwrap(), "4\n");
    }
}
