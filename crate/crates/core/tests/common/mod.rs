//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lhgeom::ModelParams;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn p0_config() -> PathBuf {
    manifest_dir().join("configs/p0.json")
}

pub fn golden_dir() -> PathBuf {
    manifest_dir().join("tests/golden")
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_lhgeom")
}

pub fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

/// Rates uniform in [0, 1), `r` uniform in (0, 1].
pub fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    let mut rate = || rng.gen_range(0.0..1.0);
    let p = ModelParams {
        beta_s: rate(),
        beta_a: rate(),
        beta_h: rate(),
        sigma: rate(),
        r: 0.0,
        gamma_s: rate(),
        gamma_a: rate(),
        gamma_h: rate(),
        phi_s: rate(),
        delta_s: rate(),
        delta_h: rate(),
    };
    ModelParams {
        r: 1.0 - rng.gen_range(0.0..1.0),
        ..p
    }
}

/// Components uniform in (0, 1e5].
pub fn random_state(rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..6).map(|_| 1e5 - rng.gen_range(0.0..1e5)).collect()
}

/// Compares two text outputs token by token: numbers within a relative
/// tolerance, everything else exactly.
pub fn texts_match(actual: &str, expected: &str, rel: f64) -> Result<(), String> {
    let split = |s: &str| -> Vec<String> {
        s.split(|c: char| c.is_whitespace() || ",:[]{}\"".contains(c))
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect()
    };
    let a = split(actual);
    let e = split(expected);
    if a.len() != e.len() {
        return Err(format!("token count {} != {}", a.len(), e.len()));
    }
    for (i, (x, y)) in a.iter().zip(&e).enumerate() {
        match (x.parse::<f64>(), y.parse::<f64>()) {
            (Ok(u), Ok(v)) => {
                if (u - v).abs() > rel * (1.0 + v.abs()) {
                    return Err(format!("token {i}: {u} vs {v}"));
                }
            }
            _ => {
                if x != y {
                    return Err(format!("token {i}: `{x}` vs `{y}`"));
                }
            }
        }
    }
    Ok(())
}

/// Golden cases: file name and the CLI arguments producing it on stdout.
/// The `{config}` placeholder is replaced by the fixture config path.
pub const GOLDEN_CASES: &[(&str, &[&str])] = &[
    ("simulate.csv", &["simulate", "--config", "{config}", "--t1", "5", "--dt", "0.5", "--with-geometry"]),
    ("simulate_adaptive.csv", &["simulate", "--config", "{config}", "--t1", "5", "--dt", "0.5", "--adaptive"]),
    ("geometry.json", &["geometry", "--config", "{config}"]),
    ("geometry_y_zero.json", &["geometry", "--config", "{config}", "--y", "zero"]),
    ("stability.csv", &["stability", "--config", "{config}", "--t1", "5", "--dt", "0.5"]),
    ("validate.txt", &["validate", "--config", "{config}"]),
];

pub fn expand(args: &[&str], config: &Path) -> Vec<String> {
    let c = config.display().to_string();
    args.iter().map(|a| a.replace("{config}", &c)).collect()
}

/// Runs a golden case, returning stdout. Regenerates the file when
/// `UPDATE_GOLDEN` is set.
pub fn golden_check(name: &str, args: &[&str]) -> Result<(), String> {
    let expanded = expand(args, &p0_config());
    let refs: Vec<&str> = expanded.iter().map(String::as_str).collect();
    let out = run(&refs);
    if !out.status.success() {
        return Err(format!("{name}: exit {:?}", out.status.code()));
    }
    let actual = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    let path = golden_dir().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &actual).map_err(|e| e.to_string())?;
    }
    let expected = std::fs::read_to_string(&path).map_err(|e| format!("{name}: {e}"))?;
    texts_match(&actual, &expected, 1e-9).map_err(|e| format!("{name}: {e}"))
}
