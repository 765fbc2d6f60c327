//! The reproducing kernel `Φ_Ω(x) = (2π)^{−d} ∫_Ω e^{iω·x} dω` of the
//! Paley–Wiener space `B(Ω)` and finite kernel combinations used as test
//! functions.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::multi_index::{factorial, factorial_u, multi_indices, order};
use crate::quadrature::GaussLegendre;

/// Default bound on `|α|₁` accepted by the derivative routines.
pub const DEFAULT_K_MAX: u32 = 10;

/// Compact, origin-symmetric frequency support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    /// `[−W, W]`.
    Interval { w: f64 },
    /// `[−W, W]^d`.
    Box { w: f64, d: usize },
    /// Euclidean disc of radius `ρ` in the plane.
    Ball { rho: f64, d: usize },
}

impl Domain {
    pub fn interval(w: f64) -> Result<Self> {
        check_positive("W", w)?;
        Ok(Domain::Interval { w })
    }

    pub fn cube(w: f64, d: usize) -> Result<Self> {
        check_positive("W", w)?;
        if d == 0 {
            return invalid("box dimension must be ≥ 1");
        }
        Ok(Domain::Box { w, d })
    }

    pub fn ball(rho: f64, d: usize) -> Result<Self> {
        check_positive("rho", rho)?;
        if d != 2 {
            return Err(Error::Unsupported(format!("ball kernel is implemented for d = 2 only, got d = {d}")));
        }
        Ok(Domain::Ball { rho, d })
    }

    pub fn dim(&self) -> usize {
        match *self {
            Domain::Interval { .. } => 1,
            Domain::Box { d, .. } | Domain::Ball { d, .. } => d,
        }
    }

    /// `m_Ω = max_{ω∈Ω} |ω|₂`.
    pub fn m_omega(&self) -> f64 {
        match *self {
            Domain::Interval { w } => w,
            Domain::Box { w, d } => w * (d as f64).sqrt(),
            Domain::Ball { rho, .. } => rho,
        }
    }

    /// Radius of the smallest ball containing `Ω`.
    pub fn r(&self) -> f64 {
        self.m_omega()
    }

    /// Per-axis extents `ω̄` of the Bernstein inequality `‖D^α f‖ ≤ ω̄^α ‖f‖`.
    pub fn bar_omega(&self) -> Vec<f64> {
        match *self {
            Domain::Interval { w } => vec![w],
            Domain::Box { w, d } => vec![w; d],
            Domain::Ball { rho, d } => vec![rho; d],
        }
    }

    /// Image of `Ω` under `ω ↦ ω/c`.
    pub fn dilated(&self, c: f64) -> Self {
        match *self {
            Domain::Interval { w } => Domain::Interval { w: w / c },
            Domain::Box { w, d } => Domain::Box { w: w / c, d },
            Domain::Ball { rho, d } => Domain::Ball { rho: rho / c, d },
        }
    }

    /// `Φ_Ω(x)`.
    pub fn kernel_eval(&self, x: &[f64]) -> Result<f64> {
        let zero = vec![0; x.len()];
        self.kernel_deriv(&zero, x)
    }

    /// `D^α Φ_Ω(x)` from analytic formulas.
    pub fn kernel_deriv(&self, alpha: &[u32], x: &[f64]) -> Result<f64> {
        let d = self.dim();
        if x.len() != d || alpha.len() != d {
            return invalid(format!("expected {d}-dimensional point and multi-index"));
        }
        Ok(self.deriv_unchecked(alpha, x))
    }

    fn deriv_unchecked(&self, alpha: &[u32], x: &[f64]) -> f64 {
        match *self {
            Domain::Interval { w } => interval_deriv(w, alpha[0], x[0]),
            Domain::Box { w, .. } => alpha.iter().zip(x).map(|(&a, &xi)| interval_deriv(w, a, xi)).product(),
            Domain::Ball { rho, .. } => disc_deriv(rho, alpha, x),
        }
    }

    /// `(2π)^{−d}|Ω|`, the value `Φ_Ω(0)`.
    pub fn phi_zero(&self) -> f64 {
        match *self {
            Domain::Interval { w } => w / PI,
            Domain::Box { w, d } => (w / PI).powi(d as i32),
            Domain::Ball { rho, .. } => rho * rho / (4.0 * PI),
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return invalid(format!("{name} must be positive and finite, got {v}"));
    }
    Ok(())
}

fn gl64() -> &'static GaussLegendre {
    static GL: OnceLock<GaussLegendre> = OnceLock::new();
    GL.get_or_init(|| GaussLegendre::new(64))
}

/// `n`-th derivative of `sin u / u`.
///
/// Uses the forward recurrence `u f^{(n)} + n f^{(n−1)} = sin(u + nπ/2)` when
/// `|u|` dominates `n`, otherwise `f^{(n)}(u) = ∫₀¹ tⁿ cos(ut + nπ/2) dt`.
pub fn sinc_deriv(n: u32, u: f64) -> f64 {
    if n == 0 && u.abs() < 1e-4 {
        let u2 = u * u;
        return 1.0 - u2 / 6.0 * (1.0 - u2 / 20.0 * (1.0 - u2 / 42.0 * (1.0 - u2 / 72.0)));
    }
    if n == 0 {
        return u.sin() / u;
    }
    if u == 0.0 {
        // f^{(2m)}(0) = (−1)^m/(2m+1)
        return if n % 2 == 1 { 0.0 } else { (-1f64).powi(n as i32 / 2) / (n + 1) as f64 };
    }
    if u.abs() > 2.0 * n as f64 + 2.0 {
        sinc_deriv_recurrence(n, u)
    } else {
        sinc_deriv_integral(n, u)
    }
}

fn sinc_deriv_recurrence(n: u32, u: f64) -> f64 {
    let mut f = u.sin() / u;
    for j in 1..=n {
        f = ((u + j as f64 * PI / 2.0).sin() - j as f64 * f) / u;
    }
    f
}

fn sinc_deriv_integral(n: u32, u: f64) -> f64 {
    let shift = n as f64 * PI / 2.0;
    gl64().integrate(0.0, 1.0, |t| t.powi(n as i32) * (u * t + shift).cos())
}

/// `Φ^{(n)}(x)` for `Ω = [−W, W]`: `(W/π) Wⁿ f^{(n)}(Wx)`, `f(u) = sin u/u`.
pub fn interval_deriv(w: f64, n: u32, x: f64) -> f64 {
    w / PI * w.powi(n as i32) * sinc_deriv(n, w * x)
}

/// Even envelope of `|Φ^{(n)}|` for `Ω = [−W, W]`, nonincreasing in `|x|`:
/// `(W^{n+1}/π) min{1/(n+1), Σ_{m≤n} n!/(n−m)! |Wx|^{−m−1}}`.
pub fn interval_envelope(w: f64, n: u32, x: f64) -> f64 {
    let v = (w * x).abs();
    let mut series = 0.0;
    let mut falling = 1.0;
    for m in 0..=n {
        series += falling / v.powi(m as i32 + 1);
        falling *= (n - m) as f64;
    }
    w.powi(n as i32 + 1) / PI * series.min(1.0 / (n + 1) as f64)
}

/// Constant `K` with `e(x) ≤ K/|x|` once `|Wx| ≥ 1`.
fn envelope_far_constant(w: f64, n: u32) -> f64 {
    w.powi(n as i32) / PI * (0..=n).map(|m| (n - m + 1..=n).map(f64::from).product::<f64>()).sum::<f64>()
}

const ENVELOPE_REACH: f64 = 1e7;

/// Panels `[a, a + s_0], …` growing geometrically once past `smooth_from`,
/// until `ENVELOPE_REACH/W` beyond `a`.
fn outward_panels(a: f64, dir: f64, w: f64, smooth_from: f64) -> Vec<(f64, f64)> {
    let step = 0.5 / w;
    let mut out = Vec::new();
    let mut d = 0.0;
    while d < smooth_from {
        out.push((d, d + step));
        d += step;
    }
    let mut h = step.max(0.25 * d);
    while d < ENVELOPE_REACH / w {
        out.push((d, d + h));
        d += h;
        h *= 1.3;
    }
    out.into_iter()
        .map(|(p, q)| if dir > 0.0 { (a + p, a + q) } else { (a - q, a - p) })
        .collect()
}

/// `∫_{ℝ∖[lo, hi]} e(x − y_j) e(x − y_k) dx` for all pairs, and the common
/// Cauchy–Schwarz bound `∫_ℝ e² ≥ ∫_ℝ e(x − y_j) e(x − y_k) dx`;
/// `e` = [`interval_envelope`].
fn envelope_gram(w: f64, n: u32, ys: &[f64], lo: f64, hi: f64) -> (Vec<f64>, f64) {
    let j = ys.len();
    let gl = GaussLegendre::new(20);
    // past the switch between the two envelope branches
    let pad = (10.0 + 2.0 * n as f64) / w;
    let far = envelope_far_constant(w, n);
    let ymin = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let ymax = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = vec![0.0; j * j];
    let sides = [(hi, 1.0, (ymax + pad - hi).max(0.0)), (lo, -1.0, (lo - ymin + pad).max(0.0))];
    for (edge, dir, smooth_from) in sides {
        for (a, b) in outward_panels(edge, dir, w, smooth_from) {
            for (x, wt) in gl.mapped(a, b) {
                let e: Vec<f64> = ys.iter().map(|y| interval_envelope(w, n, x - y)).collect();
                for p in 0..j {
                    for q in 0..j {
                        out[p * j + q] += wt * e[p] * e[q];
                    }
                }
            }
        }
        // remainder past the last panel, where e ≤ K/|x − y|
        let dist = ENVELOPE_REACH / w - (ymax - ymin).abs() - (hi - lo).abs();
        for v in out.iter_mut() {
            *v += far * far / dist.max(1.0 / w);
        }
    }
    let full = 2.0
        * outward_panels(0.0, 1.0, w, pad)
            .into_iter()
            .map(|(a, b)| gl.integrate(a, b, |u| interval_envelope(w, n, u).powi(2)))
            .sum::<f64>()
        + 2.0 * far * far * w / ENVELOPE_REACH;
    (out, full)
}

/// Disc kernel by polar quadrature of
/// `(2π)^{−2} ∫_{|ω|≤ρ} Re[(iω)^α e^{iω·x}] dω`.
fn disc_deriv(rho: f64, alpha: &[u32], x: &[f64]) -> f64 {
    let a = order(alpha);
    let rx = rho * (x[0] * x[0] + x[1] * x[1]).sqrt();
    let n_theta = 32 + 2 * (rx.ceil() as usize) + 2 * a as usize;
    let panels = 1 + (rx / 4.0).ceil() as usize;
    let gl = GaussLegendre::new(24);
    let shift = a as f64 * PI / 2.0;
    let dtheta = 2.0 * PI / n_theta as f64;
    let trig: Vec<(f64, f64)> = (0..n_theta).map(|j| (j as f64 * dtheta).sin_cos()).collect();
    let radial = gl.integrate_panels(0.0, rho, panels, |r| {
        let mut s = 0.0;
        for &(sn, cs) in &trig {
            let (w1, w2) = (r * cs, r * sn);
            let mono = w1.powi(alpha[0] as i32) * w2.powi(alpha[1] as i32);
            s += mono * ((w1 * x[0] + w2 * x[1]) + shift).cos();
        }
        s * dtheta * r
    });
    radial / (4.0 * PI * PI)
}

/// `f = Σ_j c_j Φ_Ω(· − y_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub domain: Domain,
    pub centers: Vec<Vec<f64>>,
    pub coeffs: Vec<f64>,
}

impl TestFunction {
    pub fn new(domain: Domain, centers: Vec<Vec<f64>>, coeffs: Vec<f64>) -> Result<Self> {
        if centers.len() != coeffs.len() {
            return invalid(format!("{} centers but {} coefficients", centers.len(), coeffs.len()));
        }
        if centers.iter().any(|c| c.len() != domain.dim()) {
            return invalid(format!("centers must be {}-dimensional", domain.dim()));
        }
        if centers.iter().flatten().chain(&coeffs).any(|v| !v.is_finite()) {
            return invalid("centers and coefficients must be finite");
        }
        Ok(Self { domain, centers, coeffs })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let zero = vec![0; self.dim()];
        self.deriv(&zero, x)
    }

    /// `D^α f(x)`.
    pub fn deriv(&self, alpha: &[u32], x: &[f64]) -> Result<f64> {
        let d = self.dim();
        if x.len() != d || alpha.len() != d {
            return invalid(format!("expected {d}-dimensional point and multi-index"));
        }
        check_order(order(alpha))?;
        let mut diff = vec![0.0; d];
        Ok(self
            .centers
            .iter()
            .zip(&self.coeffs)
            .map(|(y, c)| {
                for i in 0..d {
                    diff[i] = x[i] - y[i];
                }
                c * self.domain.deriv_unchecked(alpha, &diff)
            })
            .sum())
    }

    /// `D^α f(x)` for every `|α|₁ ≤ k`, in the order of [`multi_indices`].
    pub fn eval_derivatives_at(&self, x: &[f64], k: u32) -> Result<Vec<f64>> {
        multi_indices(self.dim(), k).iter().map(|a| self.deriv(a, x)).collect()
    }

    /// `‖f‖² = Σ c_i c_j Φ_Ω(y_i − y_j)`.
    pub fn norm_squared(&self) -> Result<f64> {
        let zero = vec![0; self.dim()];
        self.deriv_norm_squared_alpha(&zero)
    }

    /// `‖D^α f‖² = (−1)^{|α|} Σ c_i c_j D^{2α}Φ_Ω(y_i − y_j)`.
    pub fn deriv_norm_squared_alpha(&self, alpha: &[u32]) -> Result<f64> {
        if alpha.len() != self.dim() {
            return invalid(format!("multi-index must have {} entries", self.dim()));
        }
        let doubled: Vec<u32> = alpha.iter().map(|a| 2 * a).collect();
        check_order(order(&doubled))?;
        let sign = if order(alpha).is_multiple_of(2) { 1.0 } else { -1.0 };
        let d = self.dim();
        let mut diff = vec![0.0; d];
        let mut q = 0.0;
        for (yi, ci) in self.centers.iter().zip(&self.coeffs) {
            for (yj, cj) in self.centers.iter().zip(&self.coeffs) {
                for k in 0..d {
                    diff[k] = yi[k] - yj[k];
                }
                q += ci * cj * self.domain.deriv_unchecked(&doubled, &diff);
            }
        }
        clamp_quadratic(sign * q)
    }

    /// `Σ_{|α|=l} (l!/α!) ‖D^α f‖² = ∫ |ω|^{2l} |f̂|²`; in one dimension `‖f^{(l)}‖²`.
    pub fn deriv_norm_squared(&self, l: u32) -> Result<f64> {
        let lf = factorial_u(l);
        multi_indices(self.dim(), l)
            .iter()
            .filter(|a| order(a) == l)
            .map(|a| Ok(lf / factorial(a) * self.deriv_norm_squared_alpha(a)?))
            .sum()
    }

    /// `∫_window |D^α f|²` for interval and box domains, by the separable
    /// structure of the kernel and Gauss–Legendre panels along each axis.
    pub fn windowed_deriv_norm_squared(&self, alpha: &[u32], window: &[(f64, f64)]) -> Result<f64> {
        let w = match self.domain {
            Domain::Interval { w } | Domain::Box { w, .. } => w,
            Domain::Ball { .. } => {
                return Err(Error::Unsupported("windowed norms need a separable kernel".into()))
            }
        };
        let d = self.dim();
        if window.len() != d || alpha.len() != d {
            return invalid(format!("window and multi-index must have {d} axes"));
        }
        check_order(order(alpha))?;
        let j = self.len();
        let gl = GaussLegendre::new(20);
        let mut prod = vec![1.0; j * j];
        for ax in 0..d {
            let (lo, hi) = window[ax];
            if !(hi > lo) {
                return Ok(0.0);
            }
            let panels = 4 + ((hi - lo) * w / 2.0).ceil() as usize;
            let a = alpha[ax];
            let nodes: Vec<(f64, f64)> = (0..panels)
                .flat_map(|p| {
                    let h = (hi - lo) / panels as f64;
                    let (pa, pb) = (lo + p as f64 * h, lo + (p + 1) as f64 * h);
                    gl.mapped(pa, pb).collect::<Vec<_>>()
                })
                .collect();
            let vals: Vec<Vec<f64>> = self
                .centers
                .iter()
                .map(|y| nodes.iter().map(|(x, _)| interval_deriv(w, a, x - y[ax])).collect())
                .collect();
            for i in 0..j {
                for k in 0..j {
                    let s: f64 = nodes.iter().enumerate().map(|(n, (_, wt))| wt * vals[i][n] * vals[k][n]).sum();
                    prod[i * j + k] *= s;
                }
            }
        }
        let mut q = 0.0;
        for i in 0..j {
            for k in 0..j {
                q += self.coeffs[i] * self.coeffs[k] * prod[i * j + k];
            }
        }
        clamp_quadratic(q)
    }

    /// Upper bound on `∫_{ℝ^d∖window} |D^α f|²` from the kernel envelope
    /// [`interval_envelope`], for interval and box domains.
    pub fn envelope_mass_outside(&self, alpha: &[u32], window: &[(f64, f64)]) -> Result<f64> {
        let w = match self.domain {
            Domain::Interval { w } | Domain::Box { w, .. } => w,
            Domain::Ball { .. } => {
                return Err(Error::Unsupported("kernel envelopes need a separable kernel".into()))
            }
        };
        let d = self.dim();
        if window.len() != d || alpha.len() != d {
            return invalid(format!("window and multi-index must have {d} axes"));
        }
        check_order(order(alpha))?;
        let j = self.len();
        let grams: Vec<(Vec<f64>, f64)> = (0..d)
            .map(|ax| {
                let ys: Vec<f64> = self.centers.iter().map(|y| y[ax]).collect();
                envelope_gram(w, alpha[ax], &ys, window[ax].0, window[ax].1)
            })
            .collect();
        let mut total = 0.0;
        for p in 0..j {
            for q in 0..j {
                let i = p * j + q;
                // union bound over the axes along which x leaves the window
                let mut term = 0.0;
                for a in 0..d {
                    term += grams[a].0[i] * (0..d).filter(|&b| b != a).map(|b| grams[b].1).product::<f64>();
                }
                total += (self.coeffs[p] * self.coeffs[q]).abs() * term;
            }
        }
        Ok(total)
    }

    /// Rescales the coefficients so that `‖f‖ = 1`.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_squared()?.sqrt();
        if !(n > 0.0) {
            return Err(Error::Numerical("cannot normalise a function of zero norm".into()));
        }
        Ok(Self { coeffs: self.coeffs.iter().map(|c| c / n).collect(), ..self.clone() })
    }

    /// `x ↦ f(x/c)` scaled by `c^{−d/2}`, a unitary dilation onto `B(Ω/c)`.
    pub fn dilated(&self, c: f64) -> Self {
        let d = self.dim() as f64;
        // Φ_{Ω/c}(x) = c^{−d} Φ_Ω(x/c)
        let scale = c.powf(d / 2.0);
        Self {
            domain: self.domain.dilated(c),
            centers: self.centers.iter().map(|y| y.iter().map(|v| c * v).collect()).collect(),
            coeffs: self.coeffs.iter().map(|a| a * scale).collect(),
        }
    }
}

fn check_order(n: u32) -> Result<()> {
    if n > 2 * DEFAULT_K_MAX {
        return invalid(format!("derivative order {n} exceeds {}", 2 * DEFAULT_K_MAX));
    }
    Ok(())
}

fn clamp_quadratic(q: f64) -> Result<f64> {
    if q >= 0.0 {
        Ok(q)
    } else if q > -1e-10 {
        Ok(0.0)
    } else {
        Err(Error::Numerical(format!("Gram quadratic form is negative ({q:e}); kernel inconsistency")))
    }
}

/// `J` kernels with centers uniform in `center_window` and coefficients
/// `coeff_scale · N(0,1)`, deterministic per seed.
pub fn random_test_function(
    domain: Domain,
    j: usize,
    center_window: &[(f64, f64)],
    coeff_scale: f64,
    seed: u64,
) -> Result<TestFunction> {
    if j == 0 {
        return invalid("a test function needs J ≥ 1 kernels");
    }
    if center_window.len() != domain.dim() {
        return invalid(format!("center window must have {} axes", domain.dim()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = (0..j)
        .map(|_| {
            center_window
                .iter()
                .map(|&(lo, hi)| if hi > lo { rng.random_range(lo..hi) } else { lo })
                .collect()
        })
        .collect();
    let coeffs = (0..j).map(|_| coeff_scale * rng.sample::<f64, _>(StandardNormal)).collect();
    TestFunction::new(domain, centers, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_dominates_derivatives() {
        for n in 0..=6 {
            let mut prev = f64::INFINITY;
            for i in 0..4000 {
                let x = i as f64 * 0.01;
                let e = interval_envelope(1.3, n, x);
                assert!(interval_deriv(1.3, n, x).abs() <= e * (1.0 + 1e-12) + 1e-15, "n={n} x={x}");
                assert!(e <= prev);
                prev = e;
            }
        }
    }

    #[test]
    fn envelope_mass_bounds_true_tail() {
        for (domain, win) in [
            (Domain::interval(1.0).unwrap(), vec![(-20.0, 20.0)]),
            (Domain::cube(1.0, 2).unwrap(), vec![(-8.0, 8.0), (-8.0, 8.0)]),
        ] {
            let d = domain.dim();
            let f = random_test_function(domain, 5, &vec![(-4.0, 4.0); d], 1.0, 4).unwrap();
            for a in 0..3 {
                let alpha = vec![a; d];
                let truth = f.deriv_norm_squared_alpha(&alpha).unwrap()
                    - f.windowed_deriv_norm_squared(&alpha, &win).unwrap();
                let env = f.envelope_mass_outside(&alpha, &win).unwrap();
                assert!(env >= truth && env.is_finite(), "{a}: {env} vs {truth}");
            }
        }
    }

    #[test]
    fn interval_values() {
        let d = Domain::interval(1.0).unwrap();
        assert!((d.kernel_eval(&[0.0]).unwrap() - 1.0 / PI).abs() < 1e-16);
        assert!(d.kernel_eval(&[PI]).unwrap().abs() < 1e-16);
        assert!((d.kernel_eval(&[1e-6]).unwrap() - (1e-6f64).sin() / (PI * 1e-6)).abs() < 1e-16);
    }

    #[test]
    fn sinc_deriv_branches_agree() {
        // recurrence and integral forms around the switch point
        for n in 1..=20u32 {
            for du in [0.0, 0.5, 3.0] {
                let u = 2.0 * n as f64 + 2.0 + du;
                let a = sinc_deriv_recurrence(n, u);
                let b = sinc_deriv_integral(n, u);
                assert!((a - b).abs() < 1e-13, "n={n} u={u}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn sinc_deriv_at_zero() {
        // f^{(2m)}(0) = (−1)^m/(2m+1), odd derivatives vanish
        for n in 0..=10u32 {
            let want = if n % 2 == 1 { 0.0 } else { (-1f64).powi(n as i32 / 2) / (n + 1) as f64 };
            assert!((sinc_deriv(n, 0.0) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn box_derivative_vs_finite_difference() {
        let d = Domain::cube(1.3, 2).unwrap();
        let h = 1e-5;
        for &(x, y) in &[(0.3, -1.2), (2.7, 0.4), (-5.1, 3.3)] {
            let fd = (d.kernel_eval(&[x + h, y]).unwrap() - d.kernel_eval(&[x - h, y]).unwrap()) / (2.0 * h);
            assert!((d.kernel_deriv(&[1, 0], &[x, y]).unwrap() - fd).abs() < 1e-6);
        }
    }

    #[test]
    fn disc_kernel_matches_bessel_series() {
        // Φ(x) = ρ J_1(ρ|x|)/(2π|x|), J_1 from its power series
        let rho = 1.5;
        let d = Domain::ball(rho, 2).unwrap();
        for &(x, y) in &[(0.0, 0.0), (0.7, 0.2), (2.0, -3.0)] {
            let r: f64 = f64::hypot(x, y);
            let u = rho * r;
            let want = if r == 0.0 {
                rho * rho / (4.0 * PI)
            } else {
                let mut term = u / 2.0;
                let mut j1 = term;
                for m in 1..40 {
                    term *= -(u * u / 4.0) / (m as f64 * (m + 1) as f64);
                    j1 += term;
                }
                rho * j1 / (2.0 * PI * r)
            };
            assert!((d.kernel_eval(&[x, y]).unwrap() - want).abs() < 1e-12, "({x},{y})");
        }
        assert!(matches!(Domain::ball(1.0, 3), Err(Error::Unsupported(_))));
    }

    #[test]
    fn disc_derivative_vs_finite_difference() {
        let d = Domain::ball(1.0, 2).unwrap();
        let h = 1e-4;
        let (x, y) = (0.8, -0.3);
        let fd = (d.kernel_eval(&[x, y + h]).unwrap() - d.kernel_eval(&[x, y - h]).unwrap()) / (2.0 * h);
        assert!((d.kernel_deriv(&[0, 1], &[x, y]).unwrap() - fd).abs() < 1e-7);
    }

    #[test]
    fn norm_examples() {
        let d = Domain::interval(1.0).unwrap();
        let one = TestFunction::new(d, vec![vec![0.3]], vec![1.0]).unwrap();
        assert!((one.norm_squared().unwrap() - 1.0 / PI).abs() < 1e-16);
        let two = TestFunction::new(d, vec![vec![0.0], vec![PI]], vec![1.0, 1.0]).unwrap();
        assert!((two.norm_squared().unwrap() - 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn derivative_norm_matches_fourier_side() {
        // ‖Φ^{(l)}‖² = (1/2π)∫_{−W}^{W} ω^{2l} dω = W^{2l+1}/(π(2l+1))
        let w = 1.7;
        let f = TestFunction::new(Domain::interval(w).unwrap(), vec![vec![0.0]], vec![1.0]).unwrap();
        for l in 0..=4 {
            let want = w.powi(2 * l as i32 + 1) / (PI * (2 * l + 1) as f64);
            assert!((f.deriv_norm_squared(l).unwrap() - want).abs() < 1e-12 * want.max(1.0));
        }
    }

    #[test]
    fn odd_derivatives_vanish_at_center() {
        let d = Domain::cube(1.0, 2).unwrap();
        assert_eq!(d.kernel_deriv(&[1, 0], &[0.0, 0.0]).unwrap(), 0.0);
        assert!(Domain::interval(2.0).unwrap().kernel_deriv(&[3], &[0.0]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn windowed_norm_tends_to_full_norm() {
        let f = random_test_function(Domain::interval(1.0).unwrap(), 4, &[(-2.0, 2.0)], 1.0, 3).unwrap();
        let full = f.deriv_norm_squared_alpha(&[1]).unwrap();
        let l = 400.0;
        let inner = f.windowed_deriv_norm_squared(&[1], &[(-l, l)]).unwrap();
        assert!(inner <= full + 1e-12);
        // |Φ'(x)| ≤ 1/(π|x|) + 1/(π x²) for W = 1, centers within 2 of the origin
        let c1: f64 = f.coeffs.iter().map(|c| c.abs()).sum();
        let a = l - 2.0;
        let envelope = 2.0 * c1 * c1 / (PI * PI) * (1.0 / a + 1.0 / (a * a) + 1.0 / (3.0 * a * a * a));
        assert!(full - inner <= envelope, "{} > {envelope}", full - inner);
    }

    #[test]
    fn random_function_is_deterministic() {
        let d = Domain::cube(1.0, 2).unwrap();
        let a = random_test_function(d, 8, &[(-1.0, 1.0), (-1.0, 1.0)], 1.0, 5).unwrap();
        let b = random_test_function(d, 8, &[(-1.0, 1.0), (-1.0, 1.0)], 1.0, 5).unwrap();
        assert_eq!(a, b);
        assert!(random_test_function(d, 0, &[(-1.0, 1.0), (-1.0, 1.0)], 1.0, 5).is_err());
    }

    #[test]
    fn dilation_is_unitary() {
        let f = random_test_function(Domain::interval(1.0).unwrap(), 5, &[(-3.0, 3.0)], 1.0, 8).unwrap();
        let g = f.dilated(2.5);
        assert!((f.norm_squared().unwrap() - g.norm_squared().unwrap()).abs() < 1e-12);
        let x = 0.77;
        let lhs = g.eval(&[2.5 * x]).unwrap();
        let rhs = f.eval(&[x]).unwrap() / 2.5f64.sqrt();
        assert!((lhs - rhs).abs() < 1e-13);
    }
}
