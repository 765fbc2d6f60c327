//! Density constants and closed-form frame bounds for derivative sampling.
//!
//! The special functions here are
//!
//! * `R_k(z) = e^z − Σ_{r≤k} z^r / r!`
//! * `σ*_d(z) = (z + √(z(d+z))) / d`
//! * `h_k(z) = e^z R_k(z)`
//! * `g_{k,d}(z) = (1 + 2σ*_d(z))^{d/2} e^{z/σ*_d(z)} R_k(z)`
//!
//! together with their inverses `H_k`, `G_{k,d}` and the density constant
//! `C(k,d) = max{H_k(1), G_{k,d}(1)}`. A sampling set with density `δ`
//! (measured in a norm `|·|_*` with `|x|_2 ≤ b|x|_*`) yields a weighted
//! derivative frame whenever `δ < C(k,d) / (m_Ω b)`.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::wirtinger;

/// Largest argument for which `exp` stays finite.
const EXP_LIMIT: f64 = 709.0;

/// Query parameters shared by the constant evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantQuery {
    pub k: u32,
    pub d: u32,
    pub w: f64,
    pub s: u32,
}

impl ConstantQuery {
    pub fn new(k: u32, d: u32) -> Self {
        Self { k, d, w: 1.0, s: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return invalid("dimension d must be ≥ 1");
        }
        if !(self.w > 0.0) || !self.w.is_finite() {
            return invalid(format!("w must be positive and finite, got {}", self.w));
        }
        Ok(())
    }
}

/// Inputs of the closed-form bound formulas.
///
/// `a` (the lower norm-equivalence constant `a|x|_* ≤ |x|_2`) never enters any
/// bound and is therefore not carried.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub delta: f64,
    pub m_omega: f64,
    pub b: f64,
}

impl BoundInputs {
    pub fn new(delta: f64, m_omega: f64, b: f64) -> Result<Self> {
        for (name, v) in [("delta", delta), ("m_omega", m_omega), ("b", b)] {
            if !(v > 0.0) || !v.is_finite() {
                return invalid(format!("{name} must be positive and finite, got {v}"));
            }
        }
        Ok(Self { delta, m_omega, b })
    }

    /// The dimensionless product `m_Ω b δ`.
    pub fn x(&self) -> f64 {
        self.m_omega * self.b * self.delta
    }
}

/// `R_k(z) = e^z − Σ_{r=0}^{k} z^r/r!`.
///
/// For `z ≥ k` the direct form is used; below that the partial sum is close
/// to `e^z` and the tail `Σ_{r>k} z^r/r!` is summed instead.
pub fn eval_r_k(k: u32, z: f64) -> Result<f64> {
    ensure_finite("z", z)?;
    if z < 0.0 {
        return invalid(format!("R_k requires z ≥ 0, got {z}"));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z > EXP_LIMIT {
        return Err(Error::Overflow { what: "R_k", z });
    }
    if z >= k as f64 {
        let mut term = 1.0;
        let mut partial = 1.0;
        for r in 1..=k {
            term *= z / r as f64;
            partial += term;
        }
        Ok(z.exp() - partial)
    } else {
        Ok(tail_series(k, z))
    }
}

fn tail_series(k: u32, z: f64) -> f64 {
    // first term z^{k+1}/(k+1)! built in log space to dodge under/overflow
    let log_first = (k + 1) as f64 * z.ln() - ln_factorial(k + 1);
    let mut term = log_first.exp();
    let mut sum = term;
    let mut r = k + 1;
    loop {
        r += 1;
        term *= z / r as f64;
        sum += term;
        if term < 1e-18 * sum || r > k + 10_000 {
            break;
        }
    }
    sum
}

pub(crate) fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|j| (j as f64).ln()).sum()
}

/// `σ*_d(z) = (z + √(z(d+z)))/d`, the minimiser of the covering-number bound.
pub fn eval_sigma_star(d: u32, z: f64) -> Result<f64> {
    ensure_finite("z", z)?;
    if d == 0 {
        return invalid("dimension d must be ≥ 1");
    }
    if z <= 0.0 {
        return invalid(format!("σ*_d requires z > 0, got {z}"));
    }
    let d = d as f64;
    Ok((z + (z * (d + z)).sqrt()) / d)
}

/// `h_k(z) = e^z R_k(z)`.
pub fn eval_h_k(k: u32, z: f64) -> Result<f64> {
    let r = eval_r_k(k, z)?;
    let v = z.exp() * r;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow { what: "h_k", z })
    }
}

/// `g_{k,d}(z) = (1 + 2σ*_d(z))^{d/2} e^{z/σ*_d(z)} R_k(z)`.
pub fn eval_g_kd(k: u32, d: u32, z: f64) -> Result<f64> {
    let r = eval_r_k(k, z)?;
    let sigma = eval_sigma_star(d, z)?;
    let v = (1.0 + 2.0 * sigma).powf(d as f64 / 2.0) * (z / sigma).exp() * r;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow { what: "g_{k,d}", z })
    }
}

/// Solves `f(z) = w` for a strictly increasing `f` on `(0, ∞)` with `f(0⁺) = 0`.
///
/// The bracket starts at `[1e-8, 1]`; `hi` doubles and `lo` halves until the
/// sign changes, then bisection runs to f64 resolution (at most 200 steps).
pub fn invert_increasing<F>(what: &str, w: f64, f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(w > 0.0) || !w.is_finite() {
        return invalid(format!("{what}: w must be positive and finite, got {w}"));
    }
    let mut lo = 1e-8;
    let mut hi = 1.0;
    let mut expansions = 0;
    while f(lo)? > w {
        hi = lo;
        lo *= 0.5;
        expansions += 1;
        if expansions > 2000 || lo == 0.0 {
            return Err(Error::Bracket { what: what.into(), lo, hi });
        }
    }
    loop {
        match f(hi) {
            Ok(v) if v >= w => break,
            Ok(_) => {
                lo = hi;
                hi *= 2.0;
            }
            Err(Error::Overflow { .. }) => break,
            Err(e) => return Err(e),
        }
        expansions += 1;
        if expansions > 2000 || !hi.is_finite() {
            return Err(Error::Bracket { what: what.into(), lo, hi });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let below = match f(mid) {
            Ok(v) => v < w,
            Err(Error::Overflow { .. }) => false,
            Err(e) => return Err(e),
        };
        if below {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `H_k(w)`: the `z` with `h_k(z) = w`.
pub fn inverse_h_k(k: u32, w: f64) -> Result<f64> {
    invert_increasing("H_k", w, |z| eval_h_k(k, z))
}

/// `G_{k,d}(w)`: the `z` with `g_{k,d}(z) = w`.
pub fn inverse_g_kd(k: u32, d: u32, w: f64) -> Result<f64> {
    if d == 0 {
        return invalid("dimension d must be ≥ 1");
    }
    invert_increasing("G_{k,d}", w, |z| eval_g_kd(k, d, z))
}

/// Which inverse attains the maximum in `C(k,d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    H,
    G,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::H => f.write_str("H"),
            Branch::G => f.write_str("G"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityConstant {
    pub k: u32,
    pub d: u32,
    pub value: f64,
    pub branch: Branch,
    pub h_inverse: f64,
    pub g_inverse: f64,
}

/// `C(k,d) = max{H_k(1), G_{k,d}(1)}` and the branch attaining it.
pub fn constant_c(k: u32, d: u32) -> Result<DensityConstant> {
    let h_inverse = inverse_h_k(k, 1.0)?;
    let g_inverse = inverse_g_kd(k, d, 1.0)?;
    let (value, branch) = if g_inverse > h_inverse {
        (g_inverse, Branch::G)
    } else {
        (h_inverse, Branch::H)
    };
    Ok(DensityConstant { k, d, value, branch, h_inverse, g_inverse })
}

/// Lower and upper frame bounds together with an admissibility verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
    /// `false` when the density condition of the bound fails; `lower` is then
    /// reported as 0 and carries no guarantee.
    pub admissible: bool,
}

impl FrameBounds {
    /// Lower and upper verdicts for `ratio` with an absolute slack `tail`
    /// on each side, i.e. `A(1 − tail/A) ≤ ratio ≤ B(1 + tail/B)`.
    pub fn ratio_in(&self, ratio: f64, tail: f64) -> (bool, bool) {
        (ratio >= self.lower - tail, ratio <= self.upper + tail)
    }
}

fn min_h_g(k: u32, d: u32, x: f64) -> Result<f64> {
    let sat = |r: Result<f64>| match r {
        Ok(v) => Ok(v),
        Err(Error::Overflow { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    };
    Ok(sat(eval_h_k(k, x))?.min(sat(eval_g_kd(k, d, x))?))
}

/// Bounds of the multivariate derivative frame with Voronoi-moment weights:
/// `A ≥ e^{−d}(1 − min{h_k(x), g_{k,d}(x)})²`, `B ≤ exp(2x + x²)`, `x = m_Ω b δ`.
///
/// The density condition is strict; `x` with `min{h, g}(x) ≥ 1` is reported as
/// inadmissible.
pub fn frame_bounds_dd(k: u32, d: u32, inputs: BoundInputs) -> Result<FrameBounds> {
    if d == 0 {
        return invalid("dimension d must be ≥ 1");
    }
    let x = inputs.x();
    let q = min_h_g(k, d, x)?;
    let upper = (2.0 * x + x * x).exp();
    if q < 1.0 && x < constant_c(k, d)?.value {
        Ok(FrameBounds { lower: (-(d as f64)).exp() * (1.0 - q).powi(2), upper, admissible: true })
    } else {
        Ok(FrameBounds { lower: 0.0, upper, admissible: false })
    }
}

/// Univariate bounds from the higher-order Wirtinger inequality:
/// `A ≥ e^{−1}(1 − (c_{k+1} δ m_Ω)^{k+1})²`, `B ≤ (1 + 2δm_Ω/π)² e^{(δm_Ω)²}`,
/// valid for `δ < 1/(c_{k+1} m_Ω)`.
pub fn frame_bounds_1d(k: u32, delta: f64, m_omega: f64) -> Result<FrameBounds> {
    BoundInputs::new(delta, m_omega, 1.0)?;
    let c = wirtinger::wirtinger_constant(k + 1)?;
    let y = delta * m_omega;
    let q = (c * y).powi(k as i32 + 1);
    let upper = (1.0 + 2.0 * y / PI).powi(2) * (y * y).exp();
    if q < 1.0 {
        Ok(FrameBounds { lower: (1.0 - q).powi(2) / E, upper, admissible: true })
    } else {
        Ok(FrameBounds { lower: 0.0, upper, admissible: false })
    }
}

/// Largest admissible `δ m_Ω` for the univariate theorem, `1/c_{k+1}`.
pub fn density_limit_1d(k: u32) -> Result<f64> {
    Ok(1.0 / wirtinger::wirtinger_constant(k + 1)?)
}

/// One row of the large-`k` slope table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeRow {
    pub k: u32,
    pub h_slope: f64,
    pub g_slope: f64,
    pub c_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSlopes {
    pub d: u32,
    pub rows: Vec<SlopeRow>,
    /// Limit of `H_k(1)/(k+1)`, equal to `W(1/e)`.
    pub h_limit: f64,
    /// Limit of `G_{k,d}(1)/(k+1)` and of `C(k,d)/(k+1)`, equal to `1/e`.
    pub g_limit: f64,
}

/// `H_k(1)/(k+1)`, `G_{k,d}(1)/(k+1)` and `C(k,d)/(k+1)` for `k = 0..=k_max`.
pub fn asymptotic_slopes(k_max: u32, d: u32) -> Result<AsymptoticSlopes> {
    if k_max < 50 {
        return invalid(format!("asymptotic table needs k_max ≥ 50, got {k_max}"));
    }
    let rows = (0..=k_max)
        .map(|k| {
            let c = constant_c(k, d)?;
            let n = (k + 1) as f64;
            Ok(SlopeRow {
                k,
                h_slope: c.h_inverse / n,
                g_slope: c.g_inverse / n,
                c_slope: c.value / n,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AsymptoticSlopes { d, rows, h_limit: lambert_w_inv_e(), g_limit: 1.0 / E })
}

/// Principal branch of Lambert W at `1/e`, by Newton iteration on
/// `w e^w − 1/e` from `w = 0.25`.
pub fn lambert_w_inv_e() -> f64 {
    let target = 1.0 / E;
    let mut w: f64 = 0.25;
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - target;
        let step = f / (ew * (1.0 + w));
        w -= step;
        if step.abs() < 1e-14 {
            break;
        }
    }
    w
}

/// Bounds for line-by-line (space × time) sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TensorBounds {
    pub lower: f64,
    pub upper: f64,
    pub temporal_lower: f64,
    pub temporal_upper: f64,
    pub spatial: FrameBounds,
    pub admissible: bool,
}

/// Input of [`tensor_bounds`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TensorInputs {
    pub k: u32,
    /// Total dimension (space + time), `d ≥ 2`.
    pub d: u32,
    pub delta_t: f64,
    pub m_omega_t: f64,
    pub delta_z: f64,
    pub m_omega_z: f64,
    pub b: f64,
}

/// Frame bounds `(1 ∓ 2δ_t m_t/π)² A_z`, `(1 + 2δ_t m_t/π)² B_z`.
///
/// For `d = 2` the spatial factor uses the Wirtinger constants; for `d ≥ 3`
/// the multivariate formula with dimension `d`.
pub fn tensor_bounds(p: TensorInputs) -> Result<TensorBounds> {
    if p.d < 2 {
        return invalid(format!("line-by-line sampling needs d ≥ 2, got {}", p.d));
    }
    for (name, v) in [
        ("delta_t", p.delta_t),
        ("m_omega_t", p.m_omega_t),
        ("delta_z", p.delta_z),
        ("m_omega_z", p.m_omega_z),
        ("b", p.b),
    ] {
        if !(v >= 0.0) || !v.is_finite() {
            return invalid(format!("{name} must be nonnegative and finite, got {v}"));
        }
    }
    let t = 2.0 * p.delta_t * p.m_omega_t / PI;
    let temporal_lower = if t < 1.0 { (1.0 - t).powi(2) } else { 0.0 };
    let temporal_upper = (1.0 + t).powi(2);
    let spatial = if p.d == 2 {
        let c = wirtinger::wirtinger_constant(p.k + 1)?;
        let y = p.m_omega_z * p.delta_z;
        let q = (c * y).powi(p.k as i32 + 1);
        let upper = (1.0 + 2.0 * y / PI).powi(2) * (y * y).exp();
        if q < 1.0 {
            FrameBounds { lower: (1.0 - q).powi(2) / E, upper, admissible: true }
        } else {
            FrameBounds { lower: 0.0, upper, admissible: false }
        }
    } else {
        let x = p.m_omega_z * p.b * p.delta_z;
        let q = if x > 0.0 { min_h_g(p.k, p.d, x)? } else { 0.0 };
        let upper = (2.0 * x + x * x).exp();
        if q < 1.0 {
            FrameBounds {
                lower: (-(p.d as f64)).exp() * (1.0 - q).powi(2),
                upper,
                admissible: true,
            }
        } else {
            FrameBounds { lower: 0.0, upper, admissible: false }
        }
    };
    let admissible = t < 1.0 && spatial.admissible;
    Ok(TensorBounds {
        lower: if admissible { temporal_lower * spatial.lower } else { 0.0 },
        upper: temporal_upper * spatial.upper,
        temporal_lower,
        temporal_upper,
        spatial,
        admissible,
    })
}

/// Largest perturbation `ε < log(1 + √(A/B)) / (m_Ω b)` preserving a frame
/// with bounds `A ≤ B`.
pub fn perturb_bound(a: f64, b_upper: f64, m_omega: f64, b: f64) -> Result<f64> {
    check_ab(a, b_upper)?;
    BoundInputs::new(1.0, m_omega, b)?;
    Ok((1.0 + (a / b_upper).sqrt()).ln() / (m_omega * b))
}

/// Bounds of the perturbed set:
/// `Ã ≥ (√A − √B(e^{m_Ω b ε} − 1))²`, `B̃ ≤ B e^{2 m_Ω b ε}`.
pub fn perturbed_bounds(a: f64, b_upper: f64, m_omega: f64, b: f64, eps: f64) -> Result<FrameBounds> {
    check_ab(a, b_upper)?;
    BoundInputs::new(1.0, m_omega, b)?;
    if !(eps >= 0.0) || !eps.is_finite() {
        return invalid(format!("epsilon must be nonnegative and finite, got {eps}"));
    }
    if eps == 0.0 {
        return Ok(FrameBounds { lower: a, upper: b_upper, admissible: true });
    }
    let grow = (m_omega * b * eps).exp();
    let root = a.sqrt() - b_upper.sqrt() * (grow - 1.0);
    let upper = b_upper * grow * grow;
    if root > 0.0 {
        Ok(FrameBounds { lower: root * root, upper, admissible: true })
    } else {
        Ok(FrameBounds { lower: 0.0, upper, admissible: false })
    }
}

fn check_ab(a: f64, b_upper: f64) -> Result<()> {
    if !(a > 0.0) || !b_upper.is_finite() {
        return invalid(format!("frame bounds must satisfy 0 < A ≤ B, got A={a}, B={b_upper}"));
    }
    if a > b_upper {
        return invalid(format!("frame bounds must satisfy A ≤ B, got A={a} > B={b_upper}"));
    }
    Ok(())
}
