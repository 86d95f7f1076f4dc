//! Output plumbing: formats, float rendering, the JSON provenance
//! envelope, and file writing.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

/// Fixed-width scientific rendering; every CSV number goes through this so
/// that identical runs produce identical bytes.
pub fn fmt_float(v: f64) -> String {
    format!("{:.12e}", v)
}

/// Cell for a σ value that may be undefined (k at or above |B|).
pub fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(v) => fmt_float(v),
        None => "undefined".to_string(),
    }
}

/// Wall-clock stage timings for the JSON provenance block.
#[derive(Debug, Default, Serialize)]
pub struct Timings {
    pub stages: Vec<(String, f64)>,
}

impl Timings {
    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.stages.push((stage.to_string(), start.elapsed().as_secs_f64() * 1e3));
        out
    }
}

#[derive(Debug, Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    command: &'a str,
    versions: Versions,
    config: &'a C,
    timings_ms: &'a Timings,
    results: &'a R,
}

#[derive(Debug, Serialize)]
struct Versions {
    core: &'static str,
    cli: &'static str,
}

/// Full-provenance JSON: command, versions, config echo, timings, results.
pub fn json_envelope<C: Serialize, R: Serialize>(
    command: &str,
    config: &C,
    timings: &Timings,
    results: &R,
) -> anyhow::Result<String> {
    let envelope = Envelope {
        command,
        versions: Versions {
            core: steklov_core::VERSION,
            cli: env!("CARGO_PKG_VERSION"),
        },
        config,
        timings_ms: timings,
        results,
    };
    let mut text = serde_json::to_string_pretty(&envelope).context("serializing results")?;
    text.push('\n');
    Ok(text)
}

pub fn write_file(out_dir: &Path, name: &str, contents: &str) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let path = out_dir.join(name);
    std::fs::write(&path, contents)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_rendering_is_fixed_width_scientific() {
        assert_eq!(fmt_float(0.0), "0.000000000000e0");
        assert_eq!(fmt_float(1.5), "1.500000000000e0");
        assert_eq!(fmt_opt(None), "undefined");
    }

    #[test]
    fn envelope_carries_config_and_versions() {
        let timings = Timings::default();
        let text = json_envelope("demo", &serde_json::json!({"p": 2}), &timings, &17).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["command"], "demo");
        assert_eq!(doc["config"]["p"], 2);
        assert_eq!(doc["results"], 17);
        assert!(doc["versions"]["core"].is_string());
    }
}
