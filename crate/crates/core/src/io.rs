//! Plain-text formats for sampling sets, bunched sets and test functions.
//!
//! Each record opens with a `[kind]` header, followed by `key value…` lines
//! and one data row per line. `#` starts a comment. Reals are written in
//! shortest round-trip form, so writing and reading back is lossless.
//!
//! ```text
//! [set1d]
//! window -10.5 10.5
//! -10
//! ...
//!
//! [setnd]
//! dim 2
//! norm lq 2            # or: norm linf
//! resolution 16
//! window -5.5 5.5      # one line per axis
//! window -5.5 5.5
//! 0.1 -0.3             # one point per line
//!
//! [bunched]
//! window -10.5 10.5
//! tau 0.25
//! -10 0.05 -0.05       # center, then its s offsets
//!
//! [testfn]
//! domain interval 1    # or: box W d, ball rho d
//! 0.37 1.5             # coefficient, then center coordinates
//! ```
//!
//! A replay file is a test function record followed by one set record.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{BunchedSet, SamplingSet1D, SamplingSetND, StarNorm};
use crate::kernel::{Domain, TestFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SetRecord {
    OneD(SamplingSet1D),
    ND(SamplingSetND),
    Bunched(BunchedSet),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replay {
    pub function: TestFunction,
    pub set: SetRecord,
}

fn row(out: &mut String, vals: impl IntoIterator<Item = f64>) {
    let line: Vec<String> = vals.into_iter().map(|v| v.to_string()).collect();
    out.push_str(&line.join(" "));
    out.push('\n');
}

pub fn write_set_1d(set: &SamplingSet1D) -> String {
    let (a, b) = set.window();
    let mut out = format!("[set1d]\nwindow {a} {b}\n");
    for &x in set.points() {
        row(&mut out, [x]);
    }
    out
}

pub fn write_set_nd(set: &SamplingSetND) -> String {
    let mut out = format!("[setnd]\ndim {}\n", set.dim());
    match set.star_norm {
        StarNorm::LInf => out.push_str("norm linf\n"),
        StarNorm::Lq(q) => {
            let _ = writeln!(out, "norm lq {q}");
        }
    }
    let _ = writeln!(out, "resolution {}", set.grid_resolution);
    for &(a, b) in set.window() {
        let _ = writeln!(out, "window {a} {b}");
    }
    for p in set.points() {
        row(&mut out, p.iter().copied());
    }
    out
}

pub fn write_bunched(set: &BunchedSet) -> String {
    let (a, b) = set.centers().window();
    let mut out = format!("[bunched]\nwindow {a} {b}\ntau {}\n", set.tau);
    for (&x, o) in set.centers().points().iter().zip(set.offsets()) {
        row(&mut out, std::iter::once(x).chain(o.iter().copied()));
    }
    out
}

pub fn write_test_function(f: &TestFunction) -> String {
    let domain = match f.domain {
        Domain::Interval { w } => format!("interval {w}"),
        Domain::Box { w, d } => format!("box {w} {d}"),
        Domain::Ball { rho, d } => format!("ball {rho} {d}"),
    };
    let mut out = format!("[testfn]\ndomain {domain}\n");
    for (c, y) in f.coeffs.iter().zip(&f.centers) {
        row(&mut out, std::iter::once(*c).chain(y.iter().copied()));
    }
    out
}

pub fn write_set(set: &SetRecord) -> String {
    match set {
        SetRecord::OneD(s) => write_set_1d(s),
        SetRecord::ND(s) => write_set_nd(s),
        SetRecord::Bunched(s) => write_bunched(s),
    }
}

pub fn write_replay(r: &Replay) -> String {
    format!("{}\n{}", write_test_function(&r.function), write_set(&r.set))
}

/// One `[kind]` block: keyed lines and numeric rows, with 1-based line numbers.
struct Block {
    kind: String,
    keyed: Vec<(usize, String, Vec<String>)>,
    rows: Vec<(usize, Vec<f64>)>,
}

impl Block {
    fn get(&self, key: &str) -> Result<&[String]> {
        self.keyed
            .iter()
            .find(|(_, k, _)| k == key)
            .map(|(_, _, v)| v.as_slice())
            .ok_or_else(|| Error::InvalidInput(format!("[{}] block is missing `{key}`", self.kind)))
    }

    fn all(&self, key: &str) -> Vec<&[String]> {
        self.keyed.iter().filter(|(_, k, _)| k == key).map(|(_, _, v)| v.as_slice()).collect()
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::InvalidInput(format!("line {line}: cannot parse {s:?}")))
}

fn blocks(text: &str) -> Result<Vec<Block>> {
    let mut out: Vec<Block> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(kind) = body.strip_prefix('[').and_then(|b| b.strip_suffix(']')) {
            out.push(Block { kind: kind.trim().to_string(), keyed: Vec::new(), rows: Vec::new() });
            continue;
        }
        let Some(block) = out.last_mut() else {
            return invalid(format!("line {line}: data before any [kind] header"));
        };
        let tokens: Vec<&str> = body.split_whitespace().collect();
        if tokens[0].chars().next().is_some_and(|c| c.is_ascii_alphabetic()) && tokens[0].parse::<f64>().is_err() {
            block.keyed.push((line, tokens[0].to_string(), tokens[1..].iter().map(|s| s.to_string()).collect()));
        } else {
            let vals = tokens.iter().map(|t| parse_num(t, line)).collect::<Result<Vec<f64>>>()?;
            block.rows.push((line, vals));
        }
    }
    Ok(out)
}

fn pair(v: &[String]) -> Result<(f64, f64)> {
    if v.len() != 2 {
        return invalid("window needs two values");
    }
    Ok((parse_num(&v[0], 0)?, parse_num(&v[1], 0)?))
}

fn set_1d_from(b: &Block) -> Result<SamplingSet1D> {
    let window = pair(b.get("window")?)?;
    let points = b
        .rows
        .iter()
        .map(|(line, r)| match r.as_slice() {
            [x] => Ok(*x),
            _ => invalid(format!("line {line}: expected one value")),
        })
        .collect::<Result<Vec<_>>>()?;
    SamplingSet1D::new(points, window)
}

fn set_nd_from(b: &Block) -> Result<SamplingSetND> {
    let d: usize = parse_num(&b.get("dim")?[0], 0)?;
    let norm = match b.get("norm")? {
        [n] if n == "linf" => StarNorm::LInf,
        [n, q] if n == "lq" => StarNorm::Lq(parse_num(q, 0)?),
        other => return invalid(format!("unknown norm {other:?}")),
    };
    let resolution: usize = parse_num(&b.get("resolution")?[0], 0)?;
    let window = b.all("window").into_iter().map(pair).collect::<Result<Vec<_>>>()?;
    if window.len() != d {
        return invalid(format!("{} window lines for dimension {d}", window.len()));
    }
    let points = b
        .rows
        .iter()
        .map(|(line, r)| {
            if r.len() != d {
                return invalid(format!("line {line}: expected {d} coordinates"));
            }
            Ok(r.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    SamplingSetND::new(points, window, norm, resolution)
}

fn bunched_from(b: &Block) -> Result<BunchedSet> {
    let window = pair(b.get("window")?)?;
    let tau: f64 = parse_num(&b.get("tau")?[0], 0)?;
    let mut centers = Vec::new();
    let mut offsets = Vec::new();
    for (line, r) in &b.rows {
        let Some((&x, o)) = r.split_first() else {
            return invalid(format!("line {line}: empty bunch"));
        };
        centers.push(x);
        offsets.push(o.to_vec());
    }
    BunchedSet::from_parts(SamplingSet1D::new(centers, window)?, offsets, tau)
}

fn test_function_from(b: &Block) -> Result<TestFunction> {
    let spec = b.get("domain")?;
    let domain = match spec {
        [k, w] if k == "interval" => Domain::interval(parse_num(w, 0)?)?,
        [k, w, d] if k == "box" => Domain::cube(parse_num(w, 0)?, parse_num(d, 0)?)?,
        [k, r, d] if k == "ball" => Domain::ball(parse_num(r, 0)?, parse_num(d, 0)?)?,
        other => return invalid(format!("unknown domain {other:?}")),
    };
    let d = domain.dim();
    let mut coeffs = Vec::new();
    let mut centers = Vec::new();
    for (line, r) in &b.rows {
        if r.len() != d + 1 {
            return invalid(format!("line {line}: expected a coefficient and {d} coordinates"));
        }
        coeffs.push(r[0]);
        centers.push(r[1..].to_vec());
    }
    TestFunction::new(domain, centers, coeffs)
}

fn set_from(b: &Block) -> Result<SetRecord> {
    match b.kind.as_str() {
        "set1d" => Ok(SetRecord::OneD(set_1d_from(b)?)),
        "setnd" => Ok(SetRecord::ND(set_nd_from(b)?)),
        "bunched" => Ok(SetRecord::Bunched(bunched_from(b)?)),
        other => invalid(format!("[{other}] is not a set record")),
    }
}

fn single(text: &str, kind: &str) -> Result<Block> {
    let mut bs = blocks(text)?;
    match bs.len() {
        1 if bs[0].kind == kind => Ok(bs.remove(0)),
        _ => invalid(format!("expected exactly one [{kind}] record")),
    }
}

pub fn read_set_1d(text: &str) -> Result<SamplingSet1D> {
    set_1d_from(&single(text, "set1d")?)
}

pub fn read_set_nd(text: &str) -> Result<SamplingSetND> {
    set_nd_from(&single(text, "setnd")?)
}

pub fn read_bunched(text: &str) -> Result<BunchedSet> {
    bunched_from(&single(text, "bunched")?)
}

pub fn read_test_function(text: &str) -> Result<TestFunction> {
    test_function_from(&single(text, "testfn")?)
}

/// Reads any single set record.
pub fn read_set(text: &str) -> Result<SetRecord> {
    let bs = blocks(text)?;
    match bs.as_slice() {
        [b] => set_from(b),
        _ => invalid("expected exactly one set record"),
    }
}

pub fn read_replay(text: &str) -> Result<Replay> {
    let bs = blocks(text)?;
    match bs.as_slice() {
        [f, s] if f.kind == "testfn" => Ok(Replay { function: test_function_from(f)?, set: set_from(s)? }),
        _ => invalid("a replay file holds one [testfn] record followed by one set record"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{jittered_set, OffsetMode};
    use crate::kernel::random_test_function;

    #[test]
    fn set_1d_round_trip() {
        let s = jittered_set(1.0, 0.3, 8, 5).unwrap();
        assert_eq!(read_set_1d(&write_set_1d(&s)).unwrap(), s);
    }

    #[test]
    fn set_nd_round_trip() {
        let s = SamplingSetND::jittered_lattice(2, 1.0, 0.2, 3, StarNorm::Lq(2.0), 8, 11).unwrap();
        assert_eq!(read_set_nd(&write_set_nd(&s)).unwrap(), s);
        let s = SamplingSetND::lattice(2, 1.0, 2, StarNorm::LInf, 4).unwrap();
        assert_eq!(read_set_nd(&write_set_nd(&s)).unwrap(), s);
    }

    #[test]
    fn bunched_round_trip() {
        let c = SamplingSet1D::uniform(1.0, 5).unwrap();
        let b = BunchedSet::generate(c, 3, 0.25, OffsetMode::Random { seed: 3 }).unwrap();
        assert_eq!(read_bunched(&write_bunched(&b)).unwrap(), b);
    }

    #[test]
    fn replay_round_trip() {
        let f = random_test_function(Domain::interval(1.0).unwrap(), 4, &[(-3.0, 3.0)], 1.0, 9).unwrap();
        let set = SetRecord::OneD(SamplingSet1D::uniform(0.5, 6).unwrap());
        let r = Replay { function: f, set };
        assert_eq!(read_replay(&write_replay(&r)).unwrap(), r);
    }

    #[test]
    fn rejects_malformed() {
        assert!(read_set_1d("window 0 1\n0.5\n").is_err());
        assert!(read_set_1d("[set1d]\nwindow 0 1\n0.5 0.6\n").is_err());
        assert!(read_test_function("[testfn]\ndomain torus 1\n").is_err());
        assert!(read_bunched("[bunched]\nwindow -1 1\ntau 0.5\n0 0.9\n").is_err());
    }
}
