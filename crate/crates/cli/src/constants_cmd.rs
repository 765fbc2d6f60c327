//! `constants`: density, Wirtinger and bunched constant tables.

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::json;

use bandsamp::constants::{Branch, DensityConstant};
use bandsamp::tables::{self, Comparison, REFERENCE_TOL};

use crate::error::{usage, CliResult};
use crate::output::{aligned, emit, json_document, num, Csv, Format, OutputArgs, RunConfig};

const MAX_K: u32 = 26;
const MAX_D: u32 = 8;
const MAX_S: u32 = 20;
const DEFAULT_TAUS: &str = "1,1/2,1/4,1/8,1/16";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    /// `C(k,d)` with the attaining branch.
    #[value(name = "C", alias = "c")]
    #[serde(rename = "C")]
    C,
    /// `c_k` and `1/c_k`.
    Wirtinger,
    /// `H̃_{s,τ}(1)`.
    Bunched,
}

#[derive(Debug, Clone, Args)]
pub struct ConstantsArgs {
    #[arg(long, value_enum, default_value_t = TableKind::C)]
    pub table: TableKind,

    /// Derivative orders, `a..b` or `a,b,c` (default 0..26, or 1..10 for wirtinger).
    #[arg(long)]
    pub k: Option<String>,

    /// Dimensions for the C table.
    #[arg(long, default_value = "1..5")]
    pub d: String,

    /// Bunch sizes for the bunched table.
    #[arg(long, default_value = "0..9")]
    pub s: String,

    /// Relative bunch widths; fractions such as `1/16` are accepted.
    #[arg(long, default_value = DEFAULT_TAUS)]
    pub tau: String,

    /// Decimals of the printed values (round half to even).
    #[arg(long, default_value_t = 4)]
    pub digits: i32,

    /// Compare against the embedded published values instead of printing the
    /// table; exits 1 if any cell deviates beyond 5e-5.
    #[arg(long)]
    pub compare_paper: bool,

    #[command(flatten)]
    pub out: OutputArgs,
}

fn checked_range(flag: &str, spec: &str, max: u32) -> CliResult<Vec<u32>> {
    let v = tables::parse_range(spec)?;
    if let Some(bad) = v.iter().find(|&&x| x > max) {
        return usage(format!("--{flag} {bad} exceeds the supported maximum {max}"));
    }
    Ok(v)
}

fn taus(spec: &str) -> CliResult<Vec<(String, f64)>> {
    spec.split(',')
        .map(|t| {
            let v = tables::parse_fraction(t)?;
            if !(v > 0.0 && v <= 1.0) {
                return usage(format!("--tau {t} must lie in (0, 1]"));
            }
            Ok((t.trim().to_string(), v))
        })
        .collect()
}

fn rounded(x: f64, digits: i32) -> String {
    format!("{:.*}", digits.max(0) as usize, tables::round_half_even(x, digits))
}

fn branch_label(b: Branch) -> &'static str {
    match b {
        Branch::H => "H",
        Branch::G => "G",
    }
}

/// Returns the process exit code.
pub fn run(args: &ConstantsArgs) -> CliResult<i32> {
    if args.compare_paper {
        return compare(args);
    }
    let digits = args.digits;
    match args.table {
        TableKind::C => {
            let ks = checked_range("k", args.k.as_deref().unwrap_or("0..26"), MAX_K)?;
            let ds = checked_range("d", &args.d, MAX_D)?;
            if ds.contains(&0) {
                return usage("--d must be at least 1");
            }
            let config = RunConfig::new(
                "constants",
                &args.out,
                "table_C",
                json!({"table": "C", "k": ks, "d": ds, "digits": digits}),
            );
            let cells = tables::table_c(&ks, &ds)?;
            let body = match args.out.format {
                Format::Json => json_document(&config, "cells", &cells)?,
                Format::Csv => {
                    let mut csv = Csv::new(&["k", "d", "C", "branch"]);
                    for c in &cells {
                        csv.row([c.k.to_string(), c.d.to_string(), rounded(c.value, digits), branch_label(c.branch).into()]);
                    }
                    config.comment_line()? + &csv.finish()
                }
                Format::Text => config.comment_line()? + &c_text(&cells, &ks, &ds, digits),
            };
            emit(&config, &body)?;
        }
        TableKind::Wirtinger => {
            let ks = checked_range("k", args.k.as_deref().unwrap_or("1..10"), MAX_K)?;
            if ks.contains(&0) {
                return usage("--k must be at least 1 for the wirtinger table");
            }
            let config =
                RunConfig::new("constants", &args.out, "table_wirtinger", json!({"table": "wirtinger", "k": ks, "digits": digits}));
            let rows = tables::table_wirtinger(&ks)?;
            let body = match args.out.format {
                Format::Json => json_document(&config, "rows", &rows)?,
                Format::Csv => {
                    let mut csv = Csv::new(&["k", "c_k", "inv_c_k", "residual"]);
                    for r in &rows {
                        csv.row([r.k.to_string(), rounded(r.c_k, digits), rounded(r.tau_1, digits), format!("{:.3e}", r.residual)]);
                    }
                    config.comment_line()? + &csv.finish()
                }
                Format::Text => {
                    let mut t = vec![vec!["k".to_string(), "c_k".into(), "1/c_k".into(), "residual".into()]];
                    for r in &rows {
                        t.push(vec![r.k.to_string(), rounded(r.c_k, digits), rounded(r.tau_1, digits), format!("{:.3e}", r.residual)]);
                    }
                    config.comment_line()? + &aligned(&t)
                }
            };
            emit(&config, &body)?;
        }
        TableKind::Bunched => {
            let ss = checked_range("s", &args.s, MAX_S)?;
            let ts = taus(&args.tau)?;
            let labels: Vec<&str> = ts.iter().map(|t| t.0.as_str()).collect();
            let config = RunConfig::new(
                "constants",
                &args.out,
                "table_bunched",
                json!({"table": "bunched", "s": ss, "tau": labels, "digits": digits}),
            );
            let cells = tables::table_bunched(&ss, &ts)?;
            let body = match args.out.format {
                Format::Json => json_document(&config, "cells", &cells)?,
                Format::Csv => {
                    let mut csv = Csv::new(&["s", "tau", "H"]);
                    for c in &cells {
                        csv.row([c.s.to_string(), c.tau_label.clone(), rounded(c.value, digits)]);
                    }
                    config.comment_line()? + &csv.finish()
                }
                Format::Text => {
                    let mut t = vec![std::iter::once("s \\ tau".to_string()).chain(labels.iter().map(|l| l.to_string())).collect()];
                    for &s in &ss {
                        let mut row = vec![s.to_string()];
                        for (label, _) in &ts {
                            let c = cells.iter().find(|c| c.s == s && &c.tau_label == label).expect("computed cell");
                            row.push(rounded(c.value, digits));
                        }
                        t.push(row);
                    }
                    config.comment_line()? + &aligned(&t)
                }
            };
            emit(&config, &body)?;
        }
    }
    Ok(0)
}

fn c_text(cells: &[DensityConstant], ks: &[u32], ds: &[u32], digits: i32) -> String {
    let mut t = vec![std::iter::once("k \\ d".to_string()).chain(ds.iter().map(|d| d.to_string())).collect::<Vec<_>>()];
    for &k in ks {
        let mut row = vec![k.to_string()];
        for &d in ds {
            let c = cells.iter().find(|c| c.k == k && c.d == d).expect("computed cell");
            let mark = if c.branch == Branch::G { "*" } else { "" };
            row.push(format!("{}{mark}", rounded(c.value, digits)));
        }
        t.push(row);
    }
    format!("# * marks cells attained by the G branch\n{}", aligned(&t))
}

fn compare(args: &ConstantsArgs) -> CliResult<i32> {
    let (stem, tables_used, cmp): (&str, &[&str], Vec<Comparison>) = match args.table {
        TableKind::C => ("compare_C", &["1"], tables::compare_table1()?),
        TableKind::Wirtinger => {
            let mut v = tables::compare_table2()?;
            v.extend(tables::compare_table3b()?);
            ("compare_wirtinger", &["2", "3b"], v)
        }
        TableKind::Bunched => ("compare_bunched", &["4"], tables::compare_table4()?),
    };
    let config = RunConfig::new(
        "constants --compare-paper",
        &args.out,
        stem,
        json!({"table": args.table, "reference_tables": tables_used, "tolerance": REFERENCE_TOL}),
    );
    let failures: Vec<&Comparison> = cmp.iter().filter(|c| !c.passed()).collect();
    let body = match args.out.format {
        Format::Json => json_document(&config, "comparisons", &cmp)?,
        Format::Csv => {
            let mut csv =
                Csv::new(&["table", "cell", "computed", "reference", "deviation", "rounded_match", "branch_match", "pass"]);
            for c in &cmp {
                csv.row([
                    c.table.clone(),
                    c.cell.clone(),
                    num(c.computed),
                    num(c.reference),
                    format!("{:.3e}", c.deviation),
                    c.rounded_match.to_string(),
                    c.branch_match.map_or(String::new(), |b| b.to_string()),
                    c.passed().to_string(),
                ]);
            }
            config.comment_line()? + &csv.finish()
        }
        Format::Text => {
            let mut t = vec![["table", "cell", "computed", "reference", "deviation", "status"].map(String::from).to_vec()];
            for c in &cmp {
                t.push(vec![
                    c.table.clone(),
                    c.cell.clone(),
                    format!("{:.6}", c.computed),
                    num(c.reference),
                    format!("{:.3e}", c.deviation),
                    if c.passed() { "ok" } else { "DEVIATES" }.into(),
                ]);
            }
            config.comment_line()? + &aligned(&t)
        }
    };
    emit(&config, &body)?;
    eprintln!("{} of {} cells within {REFERENCE_TOL:e}", cmp.len() - failures.len(), cmp.len());
    for f in &failures {
        eprintln!(
            "  table {} {}: computed {:.6}, published {}, deviation {:.2e}",
            f.table, f.cell, f.computed, f.reference, f.deviation
        );
    }
    Ok(if failures.is_empty() { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_half_to_even() {
        assert_eq!(rounded(0.12345, 4), "0.1234");
        assert_eq!(rounded(1.5, 0), "2");
        assert_eq!(rounded(2.5, 0), "2");
    }

    #[test]
    fn tau_lists_accept_fractions_and_reject_out_of_range() {
        let t = taus("1, 1/2,0.25").unwrap();
        assert_eq!(t.iter().map(|x| x.1).collect::<Vec<_>>(), [1.0, 0.5, 0.25]);
        assert!(taus("2").is_err());
        assert!(taus("0").is_err());
    }

    #[test]
    fn ranges_are_capped() {
        assert_eq!(checked_range("s", "0..20", MAX_S).unwrap().len(), 21);
        assert!(checked_range("d", "9", MAX_D).is_err());
    }
}
