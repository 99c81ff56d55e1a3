//! JSON reports, verdicts, CSV tables and artifact hashing.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

/// One pass/fail check, keyed by the estimate it tests.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub key: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Verdict {
    /// Passes when `value ≤ threshold`.
    pub fn at_most(key: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Verdict { key: key.into(), pass: value <= threshold, value, threshold, detail: detail.into() }
    }

    /// Passes when `value < threshold`.
    pub fn below(key: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Verdict { key: key.into(), pass: value < threshold, value, threshold, detail: detail.into() }
    }

    /// Passes when `value ≥ threshold`.
    pub fn at_least(key: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Verdict { key: key.into(), pass: value >= threshold, value, threshold, detail: detail.into() }
    }

    /// Passes when `|value − target| ≤ tol`.
    pub fn within(key: &str, value: f64, target: f64, tol: f64, detail: impl Into<String>) -> Self {
        Verdict {
            key: key.into(),
            pass: (value - target).abs() <= tol,
            value,
            threshold: tol,
            detail: format!("target {target}; {}", detail.into()),
        }
    }

    pub fn flag(key: &str, pass: bool, detail: impl Into<String>) -> Self {
        Verdict { key: key.into(), pass, value: pass as u8 as f64, threshold: 1.0, detail: detail.into() }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest.iter() {
        let _ = write!(s, "{b:02x}");
    }
    s
}

pub fn hash_file(path: &Path) -> Result<String, CliError> {
    Ok(sha256_hex(&fs::read(path)?))
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub config: BTreeMap<&'static str, String>,
    /// sha256 of every input artifact
    pub inputs: BTreeMap<String, String>,
    /// sha256 of every artifact written
    pub outputs: BTreeMap<String, String>,
    pub data: Value,
    pub verdicts: Vec<Verdict>,
    pub passed: bool,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Report {
            command: command.into(),
            config: config.entries(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            data: Value::Null,
            verdicts: Vec::new(),
            passed: true,
        }
    }

    pub fn input(&mut self, dir: &Path, name: &str) -> Result<(), CliError> {
        self.inputs.insert(name.into(), hash_file(&dir.join(name))?);
        Ok(())
    }

    pub fn output(&mut self, dir: &Path, name: &str) -> Result<(), CliError> {
        self.outputs.insert(name.into(), hash_file(&dir.join(name))?);
        Ok(())
    }

    pub fn verdict(&mut self, v: Verdict) {
        if !v.pass {
            log::warn!("{} failed: {} (threshold {}) {}", v.key, v.value, v.threshold, v.detail);
        }
        self.passed &= v.pass;
        self.verdicts.push(v);
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }
}

/// Comma-separated table with a header row; floats in round-trip form.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn num(x: f64) -> String {
    format!("{x:?}")
}
