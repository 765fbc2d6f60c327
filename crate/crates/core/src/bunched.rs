//! Bunched sampling: per-cell interpolation from `s + 1` nearby samples,
//! the resulting fusion frame and divided-difference frame, and their
//! density constants.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{invert_increasing, ln_factorial, FrameBounds};
use crate::error::{invalid, Error, Result};
use crate::geometry::{bunched_weights, weights_1d, BunchedSet, OffsetMode, SamplingSet1D, WeightTable};
use crate::harness::{frame_sum, tail_fraction, Ensemble, FrameReport, RunEcho, Violation};
use crate::kernel::{Domain, TestFunction};
use crate::multi_index::factorial_u;
use crate::quadrature::GaussLegendre;

/// Bunch width below which divided differences are replaced by their
/// confluent limit `f^{(m)}(x_{n,0})/m!`.
pub const CONFLUENT_WIDTH: f64 = 1e-5;

/// Triangular divided-difference table; `table[m][i] = D_{x_i,…,x_{i+m}} f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DividedDiffTable {
    points: Vec<f64>,
    table: Vec<Vec<f64>>,
}

impl DividedDiffTable {
    pub fn new(points: &[f64], values: &[f64]) -> Result<Self> {
        if points.is_empty() || points.len() != values.len() {
            return invalid(format!("{} points but {} values", points.len(), values.len()));
        }
        for i in 0..points.len() {
            for j in 0..i {
                if points[i] == points[j] {
                    return invalid(format!("coincident interpolation points at {}", points[i]));
                }
            }
        }
        let mut table = vec![values.to_vec()];
        for m in 1..points.len() {
            let prev = &table[m - 1];
            let row = (0..points.len() - m)
                .map(|i| (prev[i + 1] - prev[i]) / (points[i + m] - points[i]))
                .collect();
            table.push(row);
        }
        Ok(Self { points: points.to_vec(), table })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.table
    }

    /// Newton coefficients `D_{x_0,…,x_m} f`, `m = 0..=s`.
    pub fn coefficients(&self) -> Vec<f64> {
        self.table.iter().map(|row| row[0]).collect()
    }

    /// Interpolant in Newton form, by Horner's scheme.
    pub fn newton_eval(&self, x: f64) -> f64 {
        newton_eval(&self.points, &self.coefficients(), x)
    }
}

pub fn newton_eval(points: &[f64], coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for m in (0..coeffs.len()).rev() {
        acc = acc * (x - points[m]) + coeffs[m];
    }
    acc
}

/// Interpolant in Lagrange form `Σ_m f(x_m) L_m(x)`.
pub fn lagrange_eval(points: &[f64], values: &[f64], x: f64) -> f64 {
    points
        .iter()
        .zip(values)
        .enumerate()
        .map(|(m, (&xm, &v))| {
            let l: f64 = points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != m)
                .map(|(_, &xj)| (x - xj) / (xm - xj))
                .product();
            v * l
        })
        .sum()
}

/// `h̃_{s,τ}(z) = (1+τ)^s z^{s+1}/(s+1)! · (1 + 4z/π)`.
pub fn eval_h_tilde(s: u32, tau: f64, z: f64) -> f64 {
    let log = s as f64 * (1.0 + tau).ln() + (s + 1) as f64 * z.ln() - ln_factorial(s + 1);
    log.exp() * (1.0 + 4.0 * z / PI)
}

/// `H̃_{s,τ}(1)`, the bunched density constant.
pub fn bunched_constant(s: u32, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    invert_increasing("H̃_{s,τ}", 1.0, |z| Ok(eval_h_tilde(s, tau, z)))
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau <= 1.0) {
        return invalid(format!("tau must lie in (0, 1], got {tau}"));
    }
    Ok(())
}

fn q_value(s: u32, tau: f64, delta: f64, m_omega: f64) -> f64 {
    eval_h_tilde(s, tau, delta * m_omega)
}

/// Fusion-frame bounds `(1 ∓ q)²`, `q = h̃_{s,τ}(δ m_Ω)`.
pub fn fusion_bounds(s: u32, tau: f64, delta: f64, m_omega: f64) -> Result<FrameBounds> {
    check_tau(tau)?;
    let q = q_value(s, tau, delta, m_omega);
    let admissible = q < 1.0;
    Ok(FrameBounds { lower: if admissible { (1.0 - q).powi(2) } else { 0.0 }, upper: (1.0 + q).powi(2), admissible })
}

/// Divided-difference frame bounds
/// `A ≥ e^{−1}(1 − q)²`, `B ≤ (1 + 2(1+τ)δm_Ω/π)² e^{((1+τ)δm_Ω)²}/(1+τ)²`.
pub fn divided_diff_bounds(s: u32, tau: f64, delta: f64, m_omega: f64) -> Result<FrameBounds> {
    check_tau(tau)?;
    let q = q_value(s, tau, delta, m_omega);
    let y = (1.0 + tau) * delta * m_omega;
    let upper = (1.0 + 2.0 * y / PI).powi(2) * (y * y).exp() / (1.0 + tau).powi(2);
    let admissible = q < 1.0;
    Ok(FrameBounds { lower: if admissible { (1.0 - q).powi(2) / std::f64::consts::E } else { 0.0 }, upper, admissible })
}

/// Newton form of the interpolant of `f` on bunch `n`, restricted to `V_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BunchProjection {
    pub n: usize,
    pub points: Vec<f64>,
    pub coeffs: Vec<f64>,
    pub cell: (f64, f64),
}

impl BunchProjection {
    pub fn new(f: &TestFunction, set: &BunchedSet, n: usize) -> Result<Self> {
        let points = set.bunch(n);
        let values = points.iter().map(|&x| f.eval(&[x])).collect::<Result<Vec<_>>>()?;
        let coeffs = DividedDiffTable::new(&points, &values)?.coefficients();
        Ok(Self { n, points, coeffs, cell: set.centers().cell(n) })
    }

    /// `p_n(f)(x)·𝟙_{V_n}(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.cell.0 || x > self.cell.1 {
            0.0
        } else {
            newton_eval(&self.points, &self.coeffs, x)
        }
    }

    /// `‖P_n f‖² = ∫_{V_n} |p_n f|²`, exact Gauss–Legendre.
    pub fn norm_squared(&self) -> f64 {
        let gl = GaussLegendre::exact_for_degree(2 * (self.points.len() - 1));
        gl.integrate(self.cell.0, self.cell.1, |x| {
            let v = newton_eval(&self.points, &self.coeffs, x);
            v * v
        })
    }
}

/// `Σ_n ‖P_n f‖²`.
pub fn fusion_frame_sum(f: &TestFunction, set: &BunchedSet) -> Result<f64> {
    check_1d(f)?;
    (0..set.len()).map(|n| Ok(BunchProjection::new(f, set, n)?.norm_squared())).sum()
}

fn check_1d(f: &TestFunction) -> Result<()> {
    if f.dim() != 1 {
        return invalid("bunched sampling is univariate");
    }
    Ok(())
}

/// `D_{x_{n,0},…,x_{n,m}} f` for `m = 0..=s`, switching to the confluent limit
/// when the bunch is narrower than [`CONFLUENT_WIDTH`]. The flag reports the
/// switch.
pub fn bunch_divided_differences(f: &TestFunction, points: &[f64]) -> Result<(Vec<f64>, bool)> {
    let x0 = points[0];
    let width = points.iter().fold(0.0f64, |m, x| m.max((x - x0).abs()));
    if points.len() > 1 && width < CONFLUENT_WIDTH {
        let d = (0..points.len())
            .map(|m| Ok(f.deriv(&[m as u32], &[x0])? / factorial_u(m as u32)))
            .collect::<Result<Vec<_>>>()?;
        return Ok((d, true));
    }
    let values = points.iter().map(|&x| f.eval(&[x])).collect::<Result<Vec<_>>>()?;
    Ok((DividedDiffTable::new(points, &values)?.coefficients(), false))
}

/// `Σ_n Σ_{m≤s} μ_{n,m} |D_{x_{n,0},…,x_{n,m}} f|²` and whether any bunch used
/// the confluent fallback.
pub fn divided_diff_frame_sum(f: &TestFunction, set: &BunchedSet, weights: &WeightTable) -> Result<(f64, bool)> {
    check_1d(f)?;
    if weights.mu.len() != set.len() {
        return invalid("weight table does not match the bunched set");
    }
    let mut total = 0.0;
    let mut confluent = false;
    for n in 0..set.len() {
        let (d, c) = bunch_divided_differences(f, &set.bunch(n))?;
        confluent |= c;
        total += weights.mu[n].iter().zip(&d).map(|(mu, v)| mu * v * v).sum::<f64>();
    }
    Ok((total, confluent))
}

/// Hermite (bunched + derivative) density margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombinedDensity {
    /// `(1+τ)^{s(k+1)}(δm_Ω)^{(s+1)(k+1)}/((s+1)(k+1))! · (1 + 4δm_Ω/π)`.
    pub margin: f64,
    pub admissible: bool,
    /// The same expression with `(s+1)!(k+1)!` in the denominator.
    pub margin_split_factorial: f64,
}

/// Density condition for bunched sampling with `k` derivatives at each point.
///
/// The factorial follows the Hermite remainder
/// `f^{((s+1)(k+1))}(ξ)/((s+1)(k+1))! · Π(x − x_{n,m})^{k+1}`; the variant
/// with `(s+1)!(k+1)!` is reported alongside.
pub fn combined_density_check(s: u32, k: u32, tau: f64, delta: f64, m_omega: f64) -> Result<CombinedDensity> {
    check_tau(tau)?;
    if !(delta > 0.0) || !(m_omega > 0.0) {
        return invalid("delta and m_omega must be positive");
    }
    let y = delta * m_omega;
    let n = (s + 1) * (k + 1);
    let log_core = (s * (k + 1)) as f64 * (1.0 + tau).ln() + n as f64 * y.ln();
    let factor = 1.0 + 4.0 * y / PI;
    let margin = (log_core - ln_factorial(n)).exp() * factor;
    let split = (log_core - ln_factorial(s + 1) - ln_factorial(k + 1)).exp() * factor;
    Ok(CombinedDensity { margin, admissible: margin < 1.0, margin_split_factorial: split })
}

/// Largest admissible `δ m_Ω` of [`combined_density_check`].
pub fn combined_density_limit(s: u32, k: u32, tau: f64) -> Result<f64> {
    invert_increasing("combined density", 1.0, |z| Ok(combined_density_check(s, k, tau, z, 1.0)?.margin))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauLimitRow {
    pub tau: f64,
    pub sum: f64,
    pub deviation: f64,
    pub confluent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauLimitReport {
    /// `Σ_n Σ_{m≤s} (1/m!) ∫_{V_n}(x − x_{n,0})^{2m} dx · |f^{(m)}(x_{n,0})|²`.
    pub limit: f64,
    pub rows: Vec<TauLimitRow>,
}

/// Divided-difference frame sums for shrinking bunch widths `τδ` against their
/// `τ → 0` limit, the univariate derivative frame sum with `k = s`.
pub fn tau_limit_check(f: &TestFunction, centers: &SamplingSet1D, s: usize, taus: &[f64]) -> Result<TauLimitReport> {
    check_1d(f)?;
    let points: Vec<Vec<f64>> = centers.points().iter().map(|&x| vec![x]).collect();
    let limit = frame_sum(f, &points, &weights_1d(centers, s as u32))?;
    let rows = taus
        .iter()
        .map(|&tau| {
            let set = BunchedSet::generate(centers.clone(), s, tau, OffsetMode::Equispaced)?;
            let (sum, confluent) = divided_diff_frame_sum(f, &set, &bunched_weights(&set))?;
            Ok(TauLimitRow { tau, sum, deviation: (sum - limit).abs(), confluent })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TauLimitReport { limit, rows })
}

/// Which bunched frame sum a verification run checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BunchedKind {
    Fusion,
    DividedDiff,
}

/// Runs the ensemble against the fusion or divided-difference bounds.
pub fn verify_bunched(
    w: f64,
    set: &BunchedSet,
    kind: BunchedKind,
    ensemble: &Ensemble,
    exploratory: bool,
) -> Result<FrameReport> {
    let domain = Domain::interval(w)?;
    let s = set.s();
    let delta = set.delta;
    let bounds = match kind {
        BunchedKind::Fusion => fusion_bounds(s as u32, set.tau, delta, w)?,
        BunchedKind::DividedDiff => divided_diff_bounds(s as u32, set.tau, delta, w)?,
    };
    if !bounds.admissible && !exploratory {
        return Err(Error::Precondition(format!(
            "δ = {delta:.6} is not below H̃_{{{s},{}}}(1)/m_Ω = {:.6}",
            set.tau,
            bunched_constant(s as u32, set.tau)? / w
        )));
    }
    let weights = bunched_weights(set);
    let window = [set.centers().window()];
    let reach = (1.0 + set.tau) * delta;
    let inner = [(window[0].0 + 2.0 * reach, window[0].1 - 2.0 * reach)];
    let orders: Vec<Vec<u32>> = (0..=s as u32).map(|m| vec![m]).collect();
    let results = (0..ensemble.n_functions)
        .into_par_iter()
        .map(|i| {
            let f = ensemble.function(domain, &window, i)?;
            let ratio = match kind {
                BunchedKind::Fusion => fusion_frame_sum(&f, set)?,
                BunchedKind::DividedDiff => divided_diff_frame_sum(&f, set, &weights)?.0,
            };
            let tf = tail_fraction(&f, &orders, &inner, reach)?;
            Ok((f, ratio, tf))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut lower_pass = true;
    let mut upper_pass = true;
    let mut violations = Vec::new();
    for (i, (f, ratio, tol)) in results.iter().enumerate() {
        let (lo, up) = bounds.ratio_in(*ratio, *tol);
        lower_pass &= lo;
        upper_pass &= up;
        if !(lo && up) && violations.len() < 5 {
            violations.push(Violation { index: i, ratio: *ratio, tail_tol: *tol, function: f.clone() });
        }
    }
    let tail_tols: Vec<f64> = results.iter().map(|r| r.2).collect();
    Ok(FrameReport {
        config: RunEcho {
            experiment: match kind {
                BunchedKind::Fusion => "fusion".into(),
                BunchedKind::DividedDiff => "divdiff".into(),
            },
            domain,
            k: 0,
            d: 1,
            delta,
            m_omega: w,
            b: 1.0,
            window: window.to_vec(),
            n_points: set.len() * (s + 1),
            ensemble: *ensemble,
            epsilon: None,
            s: Some(s),
            tau: Some(set.tau),
            exploratory,
        },
        ratios: results.iter().map(|r| r.1).collect(),
        tail_bound: tail_tols.iter().copied().fold(0.0, f64::max),
        tail_tols,
        a_theory: bounds.lower,
        b_theory: bounds.upper,
        lower_pass,
        upper_pass,
        admissible: bounds.admissible,
        violations,
    })
}
