//! Optimal higher-order Wirtinger constants.
//!
//! `c_k` is the smallest constant with `‖g‖ ≤ c_k^k ‖g^{(k)}‖` on `[0,1]` for all
//! `g` vanishing with its first `k−1` derivatives at `0`. Equivalently
//! `c_k = (λ_1^{(k)})^{−1/(2k)}` for the first eigenvalue of
//! `(−1)^k g^{(2k)} = λ g`, and `1/c_k` is the first positive root `τ_1` of the
//! boundary-condition determinant `D(τ)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest order supported by the determinant root finder.
pub const MAX_K: u32 = 12;

const SCAN_START: f64 = 0.05;
const SCAN_STEP: f64 = 1e-3;
const SIGMA_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenMatrixSpec {
    pub k: u32,
    pub tau: f64,
}

impl EigenMatrixSpec {
    /// `z = e^{iπ/k}`.
    pub fn z_root(&self) -> Complex64 {
        Complex64::from_polar(1.0, PI / self.k as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WirtingerResult {
    pub k: u32,
    pub tau_1: f64,
    pub c_k: f64,
    /// `|D(τ_1)|` relative to `|D|` at the start of the scan, with rows scaled
    /// by their power of `τ`.
    pub residual: f64,
}

/// The `2k×2k` boundary-condition matrix: row `r < k` holds `(i z^s τ)^r`,
/// row `k + r` holds `(i z^s τ)^{k+r} e^{i z^s τ}`, column `s = 0..2k−1`.
pub fn build_matrix(k: u32, tau: f64) -> Result<DMatrix<Complex64>> {
    check_k_tau(k, tau)?;
    Ok(assemble(k, tau, false))
}

fn check_k_tau(k: u32, tau: f64) -> Result<()> {
    if k == 0 {
        return invalid("Wirtinger order k must be ≥ 1");
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return invalid(format!("tau must be positive and finite, got {tau}"));
    }
    Ok(())
}

/// With `scaled`, row `j` is divided by `τ^j`, which removes the
/// `τ^{k(2k−1)}` prefactor of the determinant.
fn assemble(k: u32, tau: f64, scaled: bool) -> DMatrix<Complex64> {
    let n = 2 * k as usize;
    let i = Complex64::i();
    let spec = EigenMatrixSpec { k, tau };
    let z = spec.z_root();
    let scale = if scaled { 1.0 } else { tau };
    DMatrix::from_fn(n, n, |row, s| {
        let root = i * z.powu(s as u32);
        let base = (root * scale).powu(row as u32);
        if row < k as usize {
            base
        } else {
            base * (root * tau).exp()
        }
    })
}

/// `D(τ) = det build_matrix(k, τ)`.
pub fn determinant(k: u32, tau: f64) -> Result<Complex64> {
    Ok(build_matrix(k, tau)?.determinant())
}

/// `D(τ)/τ^{k(2k−1)}`, nonzero at `τ → 0`.
pub fn scaled_determinant(k: u32, tau: f64) -> Result<Complex64> {
    check_k_tau(k, tau)?;
    Ok(assemble(k, tau, true).determinant())
}

fn smallest_singular_value(k: u32, tau: f64) -> f64 {
    let mut m = assemble(k, tau, true);
    for mut row in m.row_iter_mut() {
        let norm = row.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        row.iter_mut().for_each(|c| *c /= norm);
    }
    m.singular_values().min()
}

/// First positive root of `D` and `c_k = 1/τ_1`.
///
/// The smallest singular value of the row-normalised matrix is scanned on a
/// `1e−3` grid over `[0.05, 2 + 2k]`; at each local minimum below threshold
/// the real functional `Re(e^{−iθ} D(τ)/τ^{k(2k−1)})` (with `θ` the phase at
/// the scan start) is tested for a sign change and bisected to `1e−10`.
pub fn det_first_root(k: u32) -> Result<WirtingerResult> {
    if k == 0 || k > MAX_K {
        return invalid(format!("det_first_root supports 1 ≤ k ≤ {MAX_K}, got {k}"));
    }
    if k == 1 {
        let tau_1 = PI / 2.0;
        return Ok(WirtingerResult { k, tau_1, c_k: 1.0 / tau_1, residual: 0.0 });
    }
    let reference = assemble(k, SCAN_START, true).determinant();
    let ref_scale = reference.norm();
    let phase = reference.conj() / ref_scale;
    let f = |tau: f64| (phase * assemble(k, tau, true).determinant()).re;

    let hi = 2.0 + 2.0 * k as f64;
    let steps = ((hi - SCAN_START) / SCAN_STEP).round() as usize;
    let tau_at = |j: usize| SCAN_START + j as f64 * SCAN_STEP;
    let mut sig = [
        smallest_singular_value(k, tau_at(0)),
        smallest_singular_value(k, tau_at(1)),
        0.0,
    ];
    for j in 1..steps {
        sig[2] = smallest_singular_value(k, tau_at(j + 1));
        let local_min = sig[1] <= sig[0] && sig[1] <= sig[2];
        if local_min && sig[1] < SIGMA_THRESHOLD {
            let (mut lo, mut up) = (tau_at(j - 1), tau_at(j + 1));
            let (f_lo, f_up) = (f(lo), f(up));
            if f_lo.signum() != f_up.signum() {
                let lo_sign = f_lo.signum();
                while up - lo > 1e-10 {
                    let mid = 0.5 * (lo + up);
                    if f(mid).signum() == lo_sign {
                        lo = mid;
                    } else {
                        up = mid;
                    }
                }
                let tau_1 = 0.5 * (lo + up);
                let residual = assemble(k, tau_1, true).determinant().norm() / ref_scale;
                return Ok(WirtingerResult { k, tau_1, c_k: 1.0 / tau_1, residual });
            }
        }
        sig[0] = sig[1];
        sig[1] = sig[2];
    }
    Err(Error::Numerical(format!(
        "no root of the Wirtinger determinant for k = {k} in [{SCAN_START}, {hi}]"
    )))
}

fn cache() -> &'static [OnceLock<WirtingerResult>; MAX_K as usize] {
    static CACHE: OnceLock<[OnceLock<WirtingerResult>; MAX_K as usize]> = OnceLock::new();
    CACHE.get_or_init(|| std::array::from_fn(|_| OnceLock::new()))
}

/// Cached [`det_first_root`].
pub fn wirtinger(k: u32) -> Result<WirtingerResult> {
    if k == 0 || k > MAX_K {
        return Err(Error::Unsupported(format!(
            "Wirtinger constants are available for 1 ≤ k ≤ {MAX_K}, got {k}"
        )));
    }
    let slot = &cache()[k as usize - 1];
    if let Some(r) = slot.get() {
        return Ok(*r);
    }
    let r = det_first_root(k)?;
    Ok(*slot.get_or_init(|| r))
}

/// `c_k`, cached.
pub fn wirtinger_constant(k: u32) -> Result<f64> {
    Ok(wirtinger(k)?.c_k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollocationEstimate {
    pub k: u32,
    pub n_points: usize,
    /// Smallest eigenvalue `λ_1^{(k)}` of the discrete problem.
    pub lambda_1: f64,
    /// `λ_1^{−1/(2k)}`.
    pub c_k: f64,
}

/// Independent estimate of `c_k` from a discretisation of the eigenproblem.
///
/// The inverse of the differential operator with the stated boundary
/// conditions is `V^k (V^k)^*`, `V` the Volterra integration from `0`; the
/// `k`-fold integration kernel `(x−y)_+^{k−1}/(k−1)!` is integrated exactly
/// over `n_points` cells and collocated at the midpoints. `λ_1 = 1/σ_max²`.
pub fn collocation_oracle(k: u32, n_points: usize) -> Result<CollocationEstimate> {
    if k == 0 || k > 6 {
        return invalid(format!("collocation oracle supports 1 ≤ k ≤ 6, got {k}"));
    }
    if n_points < 200 {
        return invalid(format!("collocation oracle needs n_points ≥ 200, got {n_points}"));
    }
    let n = n_points;
    let h = 1.0 / n as f64;
    let kf: f64 = (1..=k).map(|j| j as f64).product();
    let ramp = |t: f64| if t > 0.0 { t.powi(k as i32) } else { 0.0 };
    let m = DMatrix::from_fn(n, n, |i, j| {
        let x = (i as f64 + 0.5) * h;
        let (a, b) = (j as f64 * h, (j + 1) as f64 * h);
        (ramp(x - a) - ramp(x - b)) / kf
    });
    if (0..n).any(|i| m[(i, i)] == 0.0) {
        return Err(Error::Numerical("collocation matrix is singular".into()));
    }
    // the L² operator norm of the discrete map is the spectral norm of M
    let sigma = m.singular_values().max();
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Numerical(format!("collocation spectral norm is {sigma}")));
    }
    let lambda_1 = 1.0 / (sigma * sigma);
    Ok(CollocationEstimate { k, n_points, lambda_1, c_k: lambda_1.powf(-0.5 / k as f64) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub intercept: f64,
    pub slope: f64,
}

/// Least-squares line through `(k, 1/c_k)` for `k_min ≤ k ≤ k_max`.
pub fn slope_regression(k_min: u32, k_max: u32) -> Result<SlopeFit> {
    if k_min == 0 || k_max < k_min + 4 {
        return invalid(format!("slope regression needs 1 ≤ k_min and k_max ≥ k_min + 4, got [{k_min}, {k_max}]"));
    }
    let pts = (k_min..=k_max)
        .map(|k| Ok((k as f64, wirtinger(k)?.tau_1)))
        .collect::<Result<Vec<_>>>()?;
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(SlopeFit { intercept: my - slope * mx, slope })
}
