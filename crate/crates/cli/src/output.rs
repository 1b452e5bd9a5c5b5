//! File writers with fixed float formatting.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use photonchain::qstate::round_sig;
use serde::Serialize;

/// Significant digits of every serialized float.
pub const DIGITS: usize = 12;

pub fn num(x: f64) -> f64 {
    round_sig(x, DIGITS)
}

pub fn nums(xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| num(x)).collect()
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}
