//! `sweep`: ratio envelopes against δ, τ or ε as CSV for plotting.

use std::f64::consts::PI;

use clap::{Args, Subcommand};
use serde_json::json;

use bandsamp::bunched::tau_limit_check;
use bandsamp::constants::{density_limit_1d, perturb_bound};
use bandsamp::geometry::{jittered_set, BunchedSet, OffsetMode};
use bandsamp::harness::{perturb_experiment, uniform_grid_bounds, verify_frame_1d, FrameReport};
use bandsamp::kernel::Domain;
use bandsamp::tables::parse_fraction;

use crate::error::{usage, CliResult};
use crate::output::{aligned, emit, json_document, num, Csv, Format, OutputArgs, RunConfig};
use crate::sets::{half_count, EnsembleArgs};

#[derive(Debug, Subcommand)]
pub enum SweepCmd {
    /// Univariate frame ratios as δ grows towards the density limit.
    Delta(DeltaSweep),
    /// Divided-difference sums as the bunch width shrinks.
    Tau(TauSweep),
    /// Perturbed-grid ratios as ε grows towards its bound.
    Epsilon(EpsilonSweep),
}

#[derive(Debug, Args)]
pub struct DeltaSweep {
    #[arg(long = "W", default_value_t = 1.0)]
    pub w: f64,
    #[arg(long, default_value_t = 0)]
    pub k: u32,
    /// First δ as a fraction of the density limit 1/(c_{k+1} W).
    #[arg(long, default_value_t = 0.05)]
    pub from: f64,
    /// Last δ as a fraction of the density limit.
    #[arg(long, default_value_t = 0.9)]
    pub to: f64,
    #[arg(long, default_value_t = 8)]
    pub steps: usize,
    #[arg(long, default_value_t = 1000.0)]
    pub half_length: f64,
    #[command(flatten)]
    pub ens: EnsembleArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TauSweep {
    #[arg(long = "W", default_value_t = 1.0)]
    pub w: f64,
    #[arg(long, default_value_t = 2)]
    pub s: usize,
    /// Covering radius of the bunch centers (spacing δ/0.7, jitter 0.2·spacing).
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    /// Relative bunch widths, comma separated; fractions accepted.
    #[arg(long, default_value = "1,1/4,1/16,1/64,1/256,1/1024")]
    pub taus: String,
    #[arg(long, default_value_t = 200.0)]
    pub half_length: f64,
    #[command(flatten)]
    pub ens: EnsembleArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EpsilonSweep {
    #[arg(long = "W", default_value_t = 1.0)]
    pub w: f64,
    #[arg(long, default_value_t = 0)]
    pub k: u32,
    #[arg(long, default_value_t = 5)]
    pub steps: usize,
    /// Largest ε as a fraction of the perturbation bound.
    #[arg(long, default_value_t = 0.9)]
    pub max_fraction: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub half_length: f64,
    #[command(flatten)]
    pub ens: EnsembleArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

fn grid(from: f64, to: f64, steps: usize) -> CliResult<Vec<f64>> {
    if steps == 0 {
        return usage("--steps must be at least 1");
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    Ok((0..steps).map(|i| from + (to - from) * i as f64 / (steps - 1) as f64).collect())
}

fn verdict(r: &FrameReport) -> &'static str {
    if !r.admissible {
        "none"
    } else if r.passed() {
        "pass"
    } else {
        "fail"
    }
}

const ENVELOPE_HEADER: [&str; 8] =
    ["param", "delta", "a_theory", "b_theory", "min_ratio", "max_ratio", "tail_bound", "verdict"];

fn envelope_row(param: f64, r: &FrameReport) -> Vec<String> {
    vec![
        num(param),
        num(r.config.delta),
        num(r.a_theory),
        num(r.b_theory),
        num(r.min_ratio()),
        num(r.max_ratio()),
        num(r.tail_bound),
        verdict(r).into(),
    ]
}

fn render(config: &RunConfig, header: &[&str], rows: Vec<Vec<String>>) -> CliResult<String> {
    Ok(match config.format {
        Format::Csv => {
            let mut csv = Csv::new(header);
            for r in rows {
                csv.row(r);
            }
            config.comment_line()? + &csv.finish()
        }
        Format::Text => {
            let mut t = vec![header.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
            t.extend(rows);
            config.comment_line()? + &aligned(&t)
        }
        Format::Json => {
            let objs: Vec<serde_json::Map<String, serde_json::Value>> = rows
                .into_iter()
                .map(|r| header.iter().zip(r).map(|(h, v)| (h.to_string(), json!(v))).collect())
                .collect();
            json_document(config, "rows", objs)?
        }
    })
}

pub fn run(cmd: &SweepCmd) -> CliResult<i32> {
    match cmd {
        SweepCmd::Delta(a) => {
            let limit = density_limit_1d(a.k)? / a.w;
            let fracs = grid(a.from, a.to, a.steps)?;
            if fracs.iter().any(|&f| !(f > 0.0)) {
                return usage("δ fractions must be positive");
            }
            let mut rows = Vec::new();
            for &frac in &fracs {
                let spacing = frac * limit / 0.7;
                let n = half_count(a.half_length, spacing)?;
                let set = jittered_set(spacing, 0.2 * spacing, n, a.ens.seed)?;
                let r = verify_frame_1d(a.w, a.k, &set, &a.ens.ensemble(), a.ens.exploratory)?;
                rows.push(envelope_row(frac, &r));
            }
            let params = json!({
                "W": a.w, "k": a.k, "param": "delta / density limit", "density_limit": limit,
                "fractions": fracs, "half_length": a.half_length, "seed": a.ens.seed,
                "n_functions": a.ens.n_functions, "kernels": a.ens.kernels,
            });
            let config = RunConfig::new("sweep delta", &a.out, "sweep_delta", params);
            emit(&config, &render(&config, &ENVELOPE_HEADER, rows)?)?;
        }
        SweepCmd::Tau(a) => {
            let taus: Vec<f64> = a.taus.split(',').map(parse_fraction).collect::<bandsamp::Result<_>>()?;
            if !(a.delta > 0.0) {
                return usage("--delta must be positive");
            }
            let spacing = a.delta / 0.7;
            let n = half_count(a.half_length, spacing)?;
            let centers = jittered_set(spacing, 0.2 * spacing, n, a.ens.seed)?;
            BunchedSet::generate(centers.clone(), a.s, 1.0, OffsetMode::Equispaced)?;
            let domain = Domain::interval(a.w)?;
            let ensemble = a.ens.ensemble();
            let window = [centers.window()];
            let mut rows = Vec::new();
            for i in 0..a.ens.n_functions {
                let f = ensemble.function(domain, &window, i)?;
                let rep = tau_limit_check(&f, &centers, a.s, &taus)?;
                for row in &rep.rows {
                    rows.push(vec![
                        i.to_string(),
                        num(row.tau),
                        num(row.sum),
                        num(rep.limit),
                        num(row.deviation),
                        row.confluent.to_string(),
                    ]);
                }
            }
            let params = json!({
                "W": a.w, "s": a.s, "delta": a.delta, "taus": a.taus, "spacing": spacing,
                "half_count": n, "seed": a.ens.seed, "n_functions": a.ens.n_functions, "kernels": a.ens.kernels,
            });
            let config = RunConfig::new("sweep tau", &a.out, "sweep_tau", params);
            let header = ["function", "tau", "sum", "limit", "deviation", "confluent"];
            emit(&config, &render(&config, &header, rows)?)?;
        }
        SweepCmd::Epsilon(a) => {
            let spacing = (a.k + 1) as f64 * PI / a.w;
            let base = uniform_grid_bounds(a.k, a.w, spacing)?;
            let bound = perturb_bound(base.lower, base.upper, a.w, 1.0)?;
            if !(a.max_fraction >= 0.0 && a.max_fraction < 1.0) {
                return usage("--max-fraction must lie in [0, 1)");
            }
            let fracs = grid(0.0, a.max_fraction, a.steps)?;
            let n = half_count(a.half_length, spacing)?;
            let mut rows = Vec::new();
            for &frac in &fracs {
                let r = perturb_experiment(a.w, a.k, n, frac * bound, a.ens.seed, &a.ens.ensemble())?;
                let mut row = envelope_row(frac * bound, &r);
                row.insert(0, num(frac));
                rows.push(row);
            }
            let params = json!({
                "W": a.w, "k": a.k, "param": "epsilon", "perturb_bound": bound, "fractions": fracs,
                "half_count": n, "seed": a.ens.seed, "n_functions": a.ens.n_functions, "kernels": a.ens.kernels,
            });
            let config = RunConfig::new("sweep epsilon", &a.out, "sweep_epsilon", params);
            let mut header = vec!["fraction"];
            header.extend(ENVELOPE_HEADER);
            header[1] = "epsilon";
            emit(&config, &render(&config, &header, rows)?)?;
        }
    }
    Ok(0)
}
