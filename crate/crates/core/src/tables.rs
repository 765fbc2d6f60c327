//! Embedded published reference values, table generation and per-cell
//! comparison.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bunched::bunched_constant;
use crate::constants::{constant_c, Branch, DensityConstant};
use crate::error::{invalid, Error, Result};
use crate::wirtinger::{wirtinger, WirtingerResult};

/// Tolerance for agreement with four-decimal published values.
pub const REFERENCE_TOL: f64 = 5e-5;

const TABLE1: &str = include_str!("../data/table1.csv");
const TABLE2: &str = include_str!("../data/table2.csv");
const TABLE3B: &str = include_str!("../data/table3b.csv");
const TABLE4: &str = include_str!("../data/table4.csv");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Cell {
    pub k: u32,
    pub d: u32,
    pub value: f64,
    pub branch: Branch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table2Row {
    pub k: u32,
    pub c_k: f64,
    pub inv_c_k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table3bRow {
    pub k: u32,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table4Cell {
    pub s: u32,
    pub tau_label: String,
    pub tau: f64,
    pub value: f64,
}

/// Data rows of an embedded CSV: comments and the header are skipped.
fn rows(src: &'static str) -> impl Iterator<Item = Vec<&'static str>> {
    src.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::trim).collect())
}

fn num<T: std::str::FromStr>(s: &str) -> T {
    s.parse().unwrap_or_else(|_| panic!("malformed embedded table entry {s:?}"))
}

pub fn table1_reference() -> Vec<Table1Cell> {
    rows(TABLE1)
        .map(|r| Table1Cell {
            k: num(r[0]),
            d: num(r[1]),
            value: num(r[2]),
            branch: if r[3] == "G" { Branch::G } else { Branch::H },
        })
        .collect()
}

pub fn table2_reference() -> Vec<Table2Row> {
    rows(TABLE2).map(|r| Table2Row { k: num(r[0]), c_k: num(r[1]), inv_c_k: num(r[2]) }).collect()
}

pub fn table3b_reference() -> Vec<Table3bRow> {
    rows(TABLE3B).map(|r| Table3bRow { k: num(r[0]), value: num(r[1]) }).collect()
}

pub fn table4_reference() -> Vec<Table4Cell> {
    rows(TABLE4)
        .map(|r| Table4Cell {
            s: num(r[0]),
            tau_label: r[1].to_string(),
            tau: parse_fraction(r[1]).expect("embedded tau"),
            value: num(r[2]),
        })
        .collect()
}

/// Parses `0.25`, `1/4` or `1`.
pub fn parse_fraction(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("cannot parse {s:?} as a number or fraction"));
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0.0 {
                return Err(bad());
            }
            p / q
        }
        None => s.parse().map_err(|_| bad())?,
    };
    if !v.is_finite() {
        return Err(bad());
    }
    Ok(v)
}

/// Rounds to `decimals` places with ties to even.
pub fn round_half_even(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (x * scale).round_ties_even() / scale
}

/// Four-decimal rendering with ties to even.
pub fn fmt4(x: f64) -> String {
    format!("{:.4}", round_half_even(x, 4))
}

pub fn table_c(ks: &[u32], ds: &[u32]) -> Result<Vec<DensityConstant>> {
    let cells: Vec<(u32, u32)> = ds.iter().flat_map(|&d| ks.iter().map(move |&k| (k, d))).collect();
    cells.par_iter().map(|&(k, d)| constant_c(k, d)).collect()
}

pub fn table_wirtinger(ks: &[u32]) -> Result<Vec<WirtingerResult>> {
    ks.par_iter().map(|&k| wirtinger(k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BunchedCell {
    pub s: u32,
    pub tau_label: String,
    pub tau: f64,
    pub value: f64,
}

pub fn table_bunched(ss: &[u32], taus: &[(String, f64)]) -> Result<Vec<BunchedCell>> {
    let cells: Vec<(u32, &(String, f64))> = taus.iter().flat_map(|t| ss.iter().map(move |&s| (s, t))).collect();
    cells
        .par_iter()
        .map(|&(s, (label, tau))| {
            Ok(BunchedCell { s, tau_label: label.clone(), tau: *tau, value: bunched_constant(s, *tau)? })
        })
        .collect()
}

/// One compared cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub table: String,
    pub cell: String,
    pub computed: f64,
    pub reference: f64,
    pub deviation: f64,
    pub rounded_match: bool,
    pub branch_match: Option<bool>,
}

impl Comparison {
    fn new(table: &str, cell: String, computed: f64, reference: f64, branch_match: Option<bool>) -> Self {
        Self {
            table: table.into(),
            cell,
            computed,
            reference,
            deviation: (computed - reference).abs(),
            rounded_match: fmt4(computed) == format!("{reference:.4}"),
            branch_match,
        }
    }

    pub fn passed(&self) -> bool {
        self.deviation <= REFERENCE_TOL && self.branch_match.unwrap_or(true)
    }
}

pub fn compare_table1() -> Result<Vec<Comparison>> {
    table1_reference()
        .par_iter()
        .map(|c| {
            let got = constant_c(c.k, c.d)?;
            Ok(Comparison::new(
                "1",
                format!("C({},{})", c.k, c.d),
                got.value,
                c.value,
                Some(got.branch == c.branch),
            ))
        })
        .collect()
}

pub fn compare_table2() -> Result<Vec<Comparison>> {
    let mut out = Vec::new();
    for r in table2_reference() {
        let w = wirtinger(r.k)?;
        out.push(Comparison::new("2", format!("c_{}", r.k), w.c_k, r.c_k, None));
        out.push(Comparison::new("2", format!("1/c_{}", r.k), w.tau_1, r.inv_c_k, None));
    }
    Ok(out)
}

pub fn compare_table3b() -> Result<Vec<Comparison>> {
    table3b_reference()
        .into_iter()
        .map(|r| Ok(Comparison::new("3b", format!("C({})", r.k), wirtinger(r.k + 1)?.tau_1, r.value, None)))
        .collect()
}

pub fn compare_table4() -> Result<Vec<Comparison>> {
    table4_reference()
        .par_iter()
        .map(|c| {
            Ok(Comparison::new(
                "4",
                format!("H~({},{})", c.s, c.tau_label),
                bunched_constant(c.s, c.tau)?,
                c.value,
                None,
            ))
        })
        .collect()
}

/// Tables `1`, `2`, `3b` and `4`, in that order.
pub fn compare_all() -> Result<Vec<Comparison>> {
    let mut out = compare_table1()?;
    out.extend(compare_table2()?);
    out.extend(compare_table3b()?);
    out.extend(compare_table4()?);
    Ok(out)
}

/// Parses `a..b` (inclusive), `a,b,c` or a single value.
pub fn parse_range(s: &str) -> Result<Vec<u32>> {
    let bad = || Error::InvalidInput(format!("cannot parse {s:?} as a range"));
    if let Some((a, b)) = s.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if b < a {
            return invalid(format!("empty range {s:?}"));
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_tables_are_complete() {
        let t1 = table1_reference();
        assert_eq!(t1.len(), 19 * 5);
        assert!(t1.iter().any(|c| c.k == 26 && c.d == 5 && c.value == 8.1636 && c.branch == Branch::G));
        assert_eq!(table2_reference().len(), 10);
        assert_eq!(table3b_reference().len(), 10);
        let t4 = table4_reference();
        assert_eq!(t4.len(), 50);
        assert!(t4.iter().any(|c| c.s == 9 && c.tau == 1.0 / 16.0 && c.value == 3.6099));
    }

    #[test]
    fn fractions() {
        assert_eq!(parse_fraction("1/16").unwrap(), 0.0625);
        assert_eq!(parse_fraction(" 0.25 ").unwrap(), 0.25);
        assert_eq!(parse_fraction("1").unwrap(), 1.0);
        assert!(parse_fraction("1/0").is_err());
        assert!(parse_fraction("x").is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0..3").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_range("1,4,9").unwrap(), vec![1, 4, 9]);
        assert!(parse_range("3..1").is_err());
    }

    #[test]
    fn ties_go_to_even() {
        assert_eq!(round_half_even(0.125, 2), 0.12);
        assert_eq!(round_half_even(0.375, 2), 0.38);
        assert_eq!(fmt4(1.57075), "1.5708");
    }
}
