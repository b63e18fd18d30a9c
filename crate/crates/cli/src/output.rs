//! Deterministic artifact emission: full-precision CSV plus a JSON
//! manifest echoing the resolved configuration.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// 17 significant digits: round-trips f64 exactly, keeping refinement
/// studies byte-reproducible.
pub fn fmt(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// Returns the bare file name: manifests list outputs relative to their
/// own directory so reruns in different directories stay byte-identical.
pub fn write_csv(dir: &Path, name: &str, header: &str, rows: &[Vec<f64>]) -> Result<String> {
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|&x| fmt(x)).collect();
        text.push_str(&line.join(","));
        text.push('\n');
    }
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(name.to_string())
}

#[derive(Serialize)]
pub struct Manifest<C: Serialize, E: Serialize> {
    pub command: &'static str,
    pub config: C,
    pub outputs: Vec<String>,
    pub extra: E,
}

pub fn write_manifest<C: Serialize, E: Serialize>(
    dir: &Path,
    manifest: &Manifest<C, E>,
) -> Result<PathBuf> {
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}
