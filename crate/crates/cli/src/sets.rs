//! Shared flags for sampling sets and test-function ensembles.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use bandsamp::geometry::{density_1d, jittered_set, OffsetMode, SamplingSet1D, StarNorm};
use bandsamp::harness::Ensemble;
use bandsamp::io::{self, SetRecord};

use crate::error::{usage, CliError, CliResult};
use crate::output::write_to;

/// Largest number of generated points per axis.
const MAX_POINTS_PER_AXIS: f64 = 4.0e6;

#[derive(Debug, Clone, Args, Serialize)]
pub struct EnsembleArgs {
    /// Seed of the sampling set and the test-function ensemble.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Number of random test functions.
    #[arg(long, default_value_t = 50)]
    pub n_functions: usize,

    /// Kernels per test function.
    #[arg(long, default_value_t = 8)]
    pub kernels: usize,

    /// Allow sets above the density bound; such runs report no verdict.
    #[arg(long)]
    pub exploratory: bool,

    /// Directory for replay files of functions that break the sandwich
    /// (defaults to the output directory).
    #[arg(long)]
    pub replay_dir: Option<PathBuf>,
}

impl EnsembleArgs {
    pub fn ensemble(&self) -> Ensemble {
        Ensemble { n_functions: self.n_functions, j: self.kernels, seed: self.seed }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Set1dArgs {
    /// Target covering radius; uses spacing δ/0.7 with jitter 0.2·spacing.
    #[arg(long, conflicts_with_all = ["spacing", "set"])]
    pub delta: Option<f64>,

    /// Spacing of the jittered lattice.
    #[arg(long, conflicts_with = "set")]
    pub spacing: Option<f64>,

    /// Uniform jitter amplitude, below spacing/2.
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,

    /// Half-length of the sampling window.
    #[arg(long, default_value_t = 1000.0)]
    pub half_length: f64,

    /// Read the sampling set from a file instead of generating it.
    #[arg(long)]
    pub set: Option<PathBuf>,

    /// Write the sampling set used to a file.
    #[arg(long)]
    pub set_out: Option<PathBuf>,
}

pub fn half_count(half_length: f64, spacing: f64) -> CliResult<usize> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return usage(format!("spacing must be positive, got {spacing}"));
    }
    if !(half_length > 0.0) || !half_length.is_finite() {
        return usage(format!("--half-length must be positive, got {half_length}"));
    }
    let n = (half_length / spacing).ceil();
    if 2.0 * n + 1.0 > MAX_POINTS_PER_AXIS {
        return usage(format!("{} points per axis exceed the limit {MAX_POINTS_PER_AXIS}", 2.0 * n + 1.0));
    }
    Ok(n as usize)
}

pub fn load_set(path: &Path) -> CliResult<SetRecord> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    Ok(io::read_set(&text)?)
}

pub fn save_set(path: Option<&PathBuf>, set: &SetRecord) -> CliResult<()> {
    match path {
        Some(p) => write_to(Some(p), &io::write_set(set)),
        None => Ok(()),
    }
}

impl Set1dArgs {
    /// The generated or loaded set and a description of how it was obtained.
    pub fn resolve(&self, seed: u64) -> CliResult<(SetRecord, Value)> {
        if let Some(path) = &self.set {
            let rec = load_set(path)?;
            return Ok((rec, json!({"source": path})));
        }
        let (spacing, jitter) = match (self.delta, self.spacing) {
            (Some(d), _) => {
                if !(d > 0.0) {
                    return usage(format!("--delta must be positive, got {d}"));
                }
                (d / 0.7, 0.2 * d / 0.7)
            }
            (None, Some(s)) => (s, self.jitter),
            (None, None) => return usage("one of --delta, --spacing or --set is required"),
        };
        let n = half_count(self.half_length, spacing)?;
        let set = jittered_set(spacing, jitter, n, seed)?;
        let info = json!({
            "source": "jittered",
            "spacing": spacing,
            "jitter": jitter,
            "half_count": n,
            "seed": seed,
        });
        Ok((SetRecord::OneD(set), info))
    }

    pub fn resolve_1d(&self, seed: u64) -> CliResult<(SamplingSet1D, Value)> {
        match self.resolve(seed)? {
            (SetRecord::OneD(s), mut info) => {
                info["delta"] = json!(density_1d(&s)?);
                info["n_points"] = json!(s.len());
                Ok((s, info))
            }
            _ => usage("expected a [set1d] record"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OffsetKind {
    /// Alternating signs at equispaced magnitudes.
    Equispaced,
    /// Uniform draws seeded by `--seed`.
    Random,
}

impl OffsetKind {
    pub fn mode(self, seed: u64) -> OffsetMode {
        match self {
            OffsetKind::Equispaced => OffsetMode::Equispaced,
            OffsetKind::Random => OffsetMode::Random { seed },
        }
    }
}

/// Parses `l2`, `l1.5`, `lq:3` or `linf`.
pub fn parse_norm(s: &str) -> CliResult<StarNorm> {
    let t = s.trim().to_ascii_lowercase();
    if t == "linf" {
        return Ok(StarNorm::LInf);
    }
    let q = t.strip_prefix("lq:").or_else(|| t.strip_prefix('l')).and_then(|q| q.parse::<f64>().ok());
    match q {
        Some(q) if q >= 1.0 && q.is_finite() => Ok(StarNorm::Lq(q)),
        _ => usage(format!("cannot parse norm {s:?}; expected l<q> with q ≥ 1 or linf")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms_parse() {
        assert_eq!(parse_norm("linf").unwrap(), StarNorm::LInf);
        assert_eq!(parse_norm("l2").unwrap(), StarNorm::Lq(2.0));
        assert_eq!(parse_norm("lq:1.5").unwrap(), StarNorm::Lq(1.5));
        assert!(parse_norm("l0.5").is_err());
        assert!(parse_norm("max").is_err());
    }

    #[test]
    fn half_count_covers_the_window() {
        assert_eq!(half_count(10.0, 3.0).unwrap(), 4);
        assert!(half_count(10.0, 0.0).is_err());
        assert!(half_count(1e9, 1e-3).is_err());
    }

    #[test]
    fn delta_flag_sets_spacing_and_jitter() {
        let a = Set1dArgs {
            delta: Some(0.7),
            spacing: None,
            jitter: 0.0,
            half_length: 10.0,
            set: None,
            set_out: None,
        };
        let (set, info) = a.resolve_1d(1).unwrap();
        assert!((info["spacing"].as_f64().unwrap() - 1.0).abs() < 1e-15);
        assert!((info["jitter"].as_f64().unwrap() - 0.2).abs() < 1e-15);
        assert!(density_1d(&set).unwrap() <= 0.7 + 1e-12);
    }
}
