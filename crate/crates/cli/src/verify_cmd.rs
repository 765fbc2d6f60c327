//! `verify`: frame and fusion-frame sandwich experiments.

use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use bandsamp::bunched::{verify_bunched, BunchedKind};
use bandsamp::geometry::{density_nd, BunchedSet, SamplingSetND};
use bandsamp::harness::{perturb_experiment, verify_frame_1d, verify_frame_nd, verify_uniform_grid, FrameReport};
use bandsamp::io::{self, Replay, SetRecord};
use bandsamp::kernel::Domain;
use bandsamp::tables::parse_fraction;

use crate::error::{usage, CliResult};
use crate::output::{aligned, emit, json_document, num, write_to, Csv, Format, OutputArgs, RunConfig};
use crate::sets::{half_count, load_set, parse_norm, save_set, EnsembleArgs, OffsetKind, Set1dArgs};

#[derive(Debug, Subcommand)]
pub enum VerifyCmd {
    /// Univariate derivative frame with Voronoi weights.
    Frame1d(Frame1dArgs),
    /// Multivariate derivative frame on a jittered lattice.
    Framend(FrameNdArgs),
    /// Fusion frame of bunch interpolants.
    Fusion(BunchArgs),
    /// Divided-difference frame of bunches.
    Divdiff(BunchArgs),
    /// Fusion and divided-difference frames of the same bunches.
    Bunched(BunchArgs),
    /// Randomly perturbed grid `(k+1)πn/W + U(−ε, ε)`.
    Perturb(PerturbArgs),
    /// Uniform grid against its exact frame bounds.
    Uniform(UniformArgs),
}

#[derive(Debug, Args)]
pub struct Frame1dArgs {
    /// Band limit, `Ω = [−W, W]`.
    #[arg(long = "W", default_value_t = 1.0)]
    pub w: f64,
    /// Highest derivative order.
    #[arg(long, default_value_t = 0)]
    pub k: u32,
    #[command(flatten)]
    pub set: Set1dArgs,
    #[command(flatten)]
    pub ens: EnsembleArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    /// `[−W, W]^d`.
    Cube,
    /// Disc of radius `W` (d = 2).
    Ball,
}

#[derive(Debug, Args)]
pub struct FrameNdArgs {
    #[arg(long, value_enum, default_value_t = DomainKind::Cube)]
    pub domain: DomainKind,
    /// Half-width of the cube or radius of the ball.
    #[arg(long = "W", default_value_t = 1.0)]
    pub w: f64,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 0)]
    pub k: u32,
    /// Lattice spacing.
    #[arg(long, required_unless_present = "set")]
    pub spacing: Option<f64>,
    /// Uniform jitter per coordinate, below spacing/2.
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    /// Half-length of the window along each axis.
    #[arg(long, default_value_t = 16.0)]
    pub half_length: f64,
    /// Voronoi grid cells per unit length (default 8 per spacing).
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Norm `|·|_*`: `l<q>` or `linf`.
    #[arg(long, default_value = "l2")]
    pub norm: String,
    /// Read the sampling set from a file.
    #[arg(long, conflicts_with = "spacing")]
    pub set: Option<PathBuf>,
    /// Write the sampling set used to a file.
    #[arg(long)]
    pub set_out: Option<PathBuf>,
    #[command(flatten)]
    pub ens: EnsembleArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BunchArgs {
    #[arg(long = "W", default_value_t = 1.0)]
    pub w: f64,
    /// Extra points per bunch.
    #[arg(long, default_value_t = 1)]
    pub s: usize,
    /// Relative bunch width in (0, 1]; fractions such as `1/4` are accepted.
    #[arg(long, default_value = "1")]
    pub tau: String,
    #[arg(long, value_enum, default_value_t = OffsetKind::Equispaced)]
    pub offsets: OffsetKind,
    #[command(flatten)]
    pub set: Set1dArgs,
    #[command(flatten)]
    pub ens: EnsembleArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    #[arg(long = "W", default_value_t = 1.0)]
    pub w: f64,
    #[arg(long, default_value_t = 0)]
    pub k: u32,
    /// Jitter amplitude ε.
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub half_length: f64,
    #[command(flatten)]
    pub ens: EnsembleArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct UniformArgs {
    #[arg(long = "W", default_value_t = 1.0)]
    pub w: f64,
    #[arg(long, default_value_t = 0)]
    pub k: u32,
    /// Grid spacing (default π/W).
    #[arg(long)]
    pub spacing: Option<f64>,
    #[arg(long, default_value_t = 1000.0)]
    pub half_length: f64,
    #[command(flatten)]
    pub ens: EnsembleArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Reports of one invocation plus what is needed to replay violations.
struct Outcome {
    reports: Vec<FrameReport>,
    set: Option<SetRecord>,
}

fn ensemble_json(ens: &EnsembleArgs) -> Value {
    json!({
        "seed": ens.seed,
        "n_functions": ens.n_functions,
        "kernels": ens.kernels,
        "exploratory": ens.exploratory,
    })
}

pub fn run(cmd: &VerifyCmd) -> CliResult<i32> {
    let (name, ens, out, params, outcome) = match cmd {
        VerifyCmd::Frame1d(a) => {
            let (set, info) = a.set.resolve_1d(a.ens.seed)?;
            save_set(a.set.set_out.as_ref(), &SetRecord::OneD(set.clone()))?;
            let report = verify_frame_1d(a.w, a.k, &set, &a.ens.ensemble(), a.ens.exploratory)?;
            let params = json!({"W": a.w, "k": a.k, "set": info, "ensemble": ensemble_json(&a.ens)});
            ("frame1d", &a.ens, &a.out, params, Outcome { reports: vec![report], set: Some(SetRecord::OneD(set)) })
        }
        VerifyCmd::Framend(a) => {
            let domain = match a.domain {
                DomainKind::Cube => Domain::cube(a.w, a.d)?,
                DomainKind::Ball => Domain::ball(a.w, a.d)?,
            };
            let norm = parse_norm(&a.norm)?;
            let (set, info) = match (&a.set, a.spacing) {
                (Some(path), _) => match load_set(path)? {
                    SetRecord::ND(s) => match a.resolution {
                        Some(r) => (s.with_resolution(r)?, json!({"source": path, "resolution": r})),
                        None => {
                            let r = s.grid_resolution;
                            (s, json!({"source": path, "resolution": r}))
                        }
                    },
                    _ => return usage("expected a [setnd] record"),
                },
                (None, Some(spacing)) => {
                    let n = half_count(a.half_length, spacing)?;
                    let res = a.resolution.unwrap_or((8.0 / spacing).ceil() as usize);
                    let s = SamplingSetND::jittered_lattice(a.d, spacing, a.jitter, n, norm, res, a.ens.seed)?;
                    let info = json!({
                        "source": "jittered_lattice",
                        "spacing": spacing,
                        "jitter": a.jitter,
                        "half_count": n,
                        "resolution": res,
                        "norm": a.norm,
                        "seed": a.ens.seed,
                    });
                    (s, info)
                }
                (None, None) => return usage("one of --spacing or --set is required"),
            };
            let mut info = info;
            let est = density_nd(&set);
            info["delta_grid"] = json!(est.delta);
            info["delta_uncertainty"] = json!(est.uncertainty);
            info["n_points"] = json!(set.len());
            save_set(a.set_out.as_ref(), &SetRecord::ND(set.clone()))?;
            let report = verify_frame_nd(domain, a.k, &set, &a.ens.ensemble(), a.ens.exploratory)?;
            let params = json!({"domain": domain, "k": a.k, "set": info, "ensemble": ensemble_json(&a.ens)});
            ("framend", &a.ens, &a.out, params, Outcome { reports: vec![report], set: Some(SetRecord::ND(set)) })
        }
        VerifyCmd::Fusion(a) => bunched(a, &[BunchedKind::Fusion], "fusion")?,
        VerifyCmd::Divdiff(a) => bunched(a, &[BunchedKind::DividedDiff], "divdiff")?,
        VerifyCmd::Bunched(a) => bunched(a, &[BunchedKind::Fusion, BunchedKind::DividedDiff], "bunched")?,
        VerifyCmd::Perturb(a) => {
            let spacing = (a.k + 1) as f64 * PI / a.w;
            let n = half_count(a.half_length, spacing)?;
            let report = perturb_experiment(a.w, a.k, n, a.epsilon, a.ens.seed, &a.ens.ensemble())?;
            let params = json!({
                "W": a.w,
                "k": a.k,
                "epsilon": a.epsilon,
                "spacing": spacing,
                "half_count": n,
                "ensemble": ensemble_json(&a.ens),
            });
            ("perturb", &a.ens, &a.out, params, Outcome { reports: vec![report], set: None })
        }
        VerifyCmd::Uniform(a) => {
            let spacing = a.spacing.unwrap_or(PI / a.w);
            let n = half_count(a.half_length, spacing)?;
            let report = verify_uniform_grid(a.w, a.k, spacing, n, &a.ens.ensemble())?;
            let set = bandsamp::geometry::SamplingSet1D::uniform(spacing, n)?;
            let params =
                json!({"W": a.w, "k": a.k, "spacing": spacing, "half_count": n, "ensemble": ensemble_json(&a.ens)});
            ("uniform", &a.ens, &a.out, params, Outcome { reports: vec![report], set: Some(SetRecord::OneD(set)) })
        }
    };
    let config = RunConfig::new(&format!("verify {name}"), out, &format!("verify_{name}"), params);
    emit(&config, &render(&config, &outcome.reports)?)?;
    write_replays(ens, out, &outcome)?;
    let mut failed = false;
    for r in &outcome.reports {
        let verdict = verdict(r);
        failed |= verdict == "fail";
        eprintln!(
            "{}: ratios in [{:.6}, {:.6}], bounds [{:.6}, {:.6}], tail ≤ {:.3e}: {verdict}",
            r.config.experiment,
            r.min_ratio(),
            r.max_ratio(),
            r.a_theory,
            r.b_theory,
            r.tail_bound
        );
    }
    Ok(if failed { 1 } else { 0 })
}

type Prepared<'a> = (&'static str, &'a EnsembleArgs, &'a OutputArgs, Value, Outcome);

fn bunched<'a>(a: &'a BunchArgs, kinds: &[BunchedKind], name: &'static str) -> CliResult<Prepared<'a>> {
    let tau = parse_fraction(&a.tau)?;
    let (rec, mut info) = a.set.resolve(a.ens.seed)?;
    let set = match rec {
        SetRecord::Bunched(b) => b,
        SetRecord::OneD(centers) => BunchedSet::generate(centers, a.s, tau, a.offsets.mode(a.ens.seed))?,
        SetRecord::ND(_) => return usage("bunched experiments need a [set1d] or [bunched] record"),
    };
    info["delta"] = json!(set.delta);
    info["n_centers"] = json!(set.len());
    info["s"] = json!(set.s());
    info["tau"] = json!(set.tau);
    let rec = SetRecord::Bunched(set);
    save_set(a.set.set_out.as_ref(), &rec)?;
    let SetRecord::Bunched(set) = &rec else { unreachable!() };
    let reports = kinds
        .iter()
        .map(|&kind| verify_bunched(a.w, set, kind, &a.ens.ensemble(), a.ens.exploratory))
        .collect::<bandsamp::Result<Vec<_>>>()?;
    let params = json!({
        "W": a.w,
        "tau": a.tau,
        "offsets": a.offsets,
        "set": info,
        "ensemble": ensemble_json(&a.ens),
    });
    Ok((name, &a.ens, &a.out, params, Outcome { reports, set: Some(rec) }))
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

fn opt(v: Option<impl ToString>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

fn render(config: &RunConfig, reports: &[FrameReport]) -> CliResult<String> {
    Ok(match config.format {
        Format::Json => json_document(config, "reports", reports)?,
        Format::Csv => {
            let mut csv = Csv::new(&[
                "experiment",
                "k",
                "s",
                "tau",
                "epsilon",
                "n_points",
                "delta",
                "a_theory",
                "b_theory",
                "min_ratio",
                "max_ratio",
                "tail_bound",
                "admissible",
                "lower_pass",
                "upper_pass",
                "verdict",
                "violations",
            ]);
            for r in reports {
                let c = &r.config;
                csv.row([
                    c.experiment.clone(),
                    c.k.to_string(),
                    opt(c.s),
                    opt(c.tau),
                    opt(c.epsilon),
                    c.n_points.to_string(),
                    num(c.delta),
                    num(r.a_theory),
                    num(r.b_theory),
                    num(r.min_ratio()),
                    num(r.max_ratio()),
                    num(r.tail_bound),
                    r.admissible.to_string(),
                    r.lower_pass.to_string(),
                    r.upper_pass.to_string(),
                    verdict(r).into(),
                    r.violations.len().to_string(),
                ]);
            }
            config.comment_line()? + &csv.finish()
        }
        Format::Text => {
            let mut body = config.comment_line()?;
            for r in reports {
                let c = &r.config;
                let rows = vec![
                    vec!["experiment".to_string(), c.experiment.clone()],
                    vec!["points".into(), c.n_points.to_string()],
                    vec!["delta".into(), format!("{:.6}", c.delta)],
                    vec!["bounds".into(), format!("[{:.6}, {:.6}]", r.a_theory, r.b_theory)],
                    vec!["ratios".into(), format!("[{:.6}, {:.6}]", r.min_ratio(), r.max_ratio())],
                    vec!["tail".into(), format!("{:.3e}", r.tail_bound)],
                    vec!["verdict".into(), verdict(r).into()],
                ];
                body.push_str(&aligned(&rows));
                body.push('\n');
            }
            body
        }
    })
}

fn write_replays(ens: &EnsembleArgs, out: &OutputArgs, outcome: &Outcome) -> CliResult<()> {
    let Some(dir) = ens.replay_dir.as_ref().or(out.out_dir.as_ref()) else {
        return Ok(());
    };
    let Some(set) = &outcome.set else {
        return Ok(());
    };
    for r in outcome.reports.iter().filter(|r| r.admissible) {
        for v in &r.violations {
            let path = dir.join(format!("{}_f{}.replay", r.config.experiment, v.index));
            let replay = Replay { function: v.function.clone(), set: set.clone() };
            write_to(Some(&path), &io::write_replay(&replay))?;
            eprintln!("replay written to {}", path.display());
        }
    }
    Ok(())
}
