//! Empirical verification of weighted derivative frame inequalities
//! `A‖f‖² ≤ Σ_n Σ_{|α|≤k} μ_{n,α} |D^α f(x_n)|² ≤ B‖f‖²` on finite windows.
//!
//! Sums over a finite window miss the samples outside it. Each test function
//! is normalised to `‖f‖ = 1`, its centers are drawn from the middle half of
//! the window, and the missing part is budgeted by
//!
//! `tail_tol = B · Σ_α (bδ)^{2|α|}/α! · (‖D^α f‖² − ∫_inner |D^α f|²)`
//!
//! with `inner` the window shrunk by `2bδ` (plus the perturbation radius).
//! A function passes when `A(1 − tail_tol) ≤ ratio ≤ B(1 + tail_tol)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{self, FrameBounds};
use crate::error::{invalid, Error, Result};
use crate::geometry::{density_1d, density_nd, weights_1d, weights_nd, SamplingSet1D, SamplingSetND, WeightTable};
use crate::kernel::{random_test_function, Domain, TestFunction};
use crate::multi_index::{factorial, factorial_u, order};

/// Random test-function ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub n_functions: usize,
    /// Kernels per function.
    pub j: usize,
    pub seed: u64,
}

impl Default for Ensemble {
    fn default() -> Self {
        Self { n_functions: 50, j: 8, seed: 0 }
    }
}

impl Ensemble {
    /// Function `i` of the ensemble, normalised, centers in the middle half
    /// of `window`.
    pub fn function(&self, domain: Domain, window: &[(f64, f64)], i: usize) -> Result<TestFunction> {
        let middle: Vec<(f64, f64)> = window
            .iter()
            .map(|&(lo, hi)| {
                let q = 0.25 * (hi - lo);
                (lo + q, hi - q)
            })
            .collect();
        let seed = self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64);
        random_test_function(domain, self.j, &middle, 1.0, seed)?.normalized()
    }
}

/// Resolved parameters of a harness run, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEcho {
    pub experiment: String,
    pub domain: Domain,
    pub k: u32,
    pub d: usize,
    pub delta: f64,
    pub m_omega: f64,
    pub b: f64,
    pub window: Vec<(f64, f64)>,
    pub n_points: usize,
    pub ensemble: Ensemble,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub exploratory: bool,
}

/// A function that violated the sandwich, kept for replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub index: usize,
    pub ratio: f64,
    pub tail_tol: f64,
    pub function: TestFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub config: RunEcho,
    pub ratios: Vec<f64>,
    /// Per-function bound on the truncated part of the normalised sum; the
    /// verdict is `A − tail ≤ ratio ≤ B + tail`.
    pub tail_tols: Vec<f64>,
    pub a_theory: f64,
    pub b_theory: f64,
    /// Largest per-function tail.
    pub tail_bound: f64,
    pub lower_pass: bool,
    pub upper_pass: bool,
    /// `false` for exploratory runs above the density bound; no verdict is
    /// claimed then.
    pub admissible: bool,
    pub violations: Vec<Violation>,
}

impl FrameReport {
    pub fn passed(&self) -> bool {
        self.lower_pass && self.upper_pass
    }

    pub fn min_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `Σ_n Σ_α μ_{n,α} |D^α f(x_n)|²`.
pub fn frame_sum(f: &TestFunction, points: &[Vec<f64>], weights: &WeightTable) -> Result<f64> {
    if points.len() != weights.mu.len() {
        return invalid(format!("{} points but {} weight rows", points.len(), weights.mu.len()));
    }
    let mut total = 0.0;
    for (x, row) in points.iter().zip(&weights.mu) {
        for (alpha, mu) in weights.multi_indices.iter().zip(row) {
            let v = f.deriv(alpha, x)?;
            total += mu * v * v;
        }
    }
    Ok(total)
}

/// Relative weighted missing mass
/// `Σ_α w_α M_α(f)/‖f‖²`, `w_α = (bδ)^{2|α|}/α!`, where `M_α` bounds
/// `∫_{outside inner} |D^α f|²` through the kernel envelope. The envelope
/// rather than `|D^α f|` itself is needed because samples of an oscillating
/// tail need not average like the integral.
pub fn tail_fraction(
    f: &TestFunction,
    multi_indices: &[Vec<u32>],
    inner: &[(f64, f64)],
    b_delta: f64,
) -> Result<f64> {
    let norm = f.norm_squared()?;
    let mut s = 0.0;
    for alpha in multi_indices {
        let w = b_delta.powi(2 * order(alpha) as i32) / factorial(alpha);
        s += w * f.envelope_mass_outside(alpha, inner)?;
    }
    Ok(s / norm)
}

fn shrink(window: &[(f64, f64)], by: f64) -> Vec<(f64, f64)> {
    window
        .iter()
        .map(|&(lo, hi)| {
            let mid = 0.5 * (lo + hi);
            ((lo + by).min(mid), (hi - by).max(mid))
        })
        .collect()
}

/// A finite weighted sampling configuration.
pub struct Discretization<'a> {
    pub domain: Domain,
    pub points: &'a [Vec<f64>],
    pub weights: &'a WeightTable,
    pub window: &'a [(f64, f64)],
    pub delta: f64,
    pub b: f64,
}

/// Runs the ensemble against fixed bounds.
pub fn sandwich(
    disc: &Discretization<'_>,
    bounds: FrameBounds,
    ensemble: &Ensemble,
    margin: f64,
    mut echo: RunEcho,
) -> Result<FrameReport> {
    if ensemble.n_functions == 0 {
        return invalid("ensemble needs at least one function");
    }
    let inner = shrink(disc.window, 2.0 * disc.b * disc.delta + margin);
    let results = (0..ensemble.n_functions)
        .into_par_iter()
        .map(|i| {
            let f = ensemble.function(disc.domain, disc.window, i)?;
            let ratio = frame_sum(&f, disc.points, disc.weights)?;
            let tf = tail_fraction(&f, &disc.weights.multi_indices, &inner, disc.b * disc.delta)?;
            Ok((f, ratio, tf))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut lower_pass = true;
    let mut upper_pass = true;
    let mut violations = Vec::new();
    for (i, (f, ratio, tol)) in results.iter().enumerate() {
        let (lo_ok, up_ok) = bounds.ratio_in(*ratio, *tol);
        lower_pass &= lo_ok;
        upper_pass &= up_ok;
        if !(lo_ok && up_ok) && violations.len() < 5 {
            violations.push(Violation { index: i, ratio: *ratio, tail_tol: *tol, function: f.clone() });
        }
    }
    echo.n_points = disc.points.len();
    let tail_tols: Vec<f64> = results.iter().map(|r| r.2).collect();
    Ok(FrameReport {
        config: echo,
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

fn points_1d(set: &SamplingSet1D) -> Vec<Vec<f64>> {
    set.points().iter().map(|&x| vec![x]).collect()
}

/// Univariate derivative frame with Voronoi weights against the
/// Wirtinger-based bounds (`δ m_Ω < 1/c_{k+1}`).
pub fn verify_frame_1d(
    w: f64,
    k: u32,
    set: &SamplingSet1D,
    ensemble: &Ensemble,
    exploratory: bool,
) -> Result<FrameReport> {
    let domain = Domain::interval(w)?;
    let delta = density_1d(set)?;
    let bounds = constants::frame_bounds_1d(k, delta, w)?;
    if !bounds.admissible && !exploratory {
        return Err(Error::Precondition(format!(
            "δ·m_Ω = {:.6} is not below 1/c_{} = {:.6}; the univariate bound gives no lower frame bound",
            delta * w,
            k + 1,
            constants::density_limit_1d(k)?
        )));
    }
    let weights = weights_1d(set, k);
    let points = points_1d(set);
    let window = [set.window()];
    let disc = Discretization { domain, points: &points, weights: &weights, window: &window, delta, b: 1.0 };
    let echo = echo("frame1d", domain, k, delta, 1.0, &window, ensemble, exploratory);
    sandwich(&disc, bounds, ensemble, 0.0, echo)
}

/// Multivariate derivative frame with grid Voronoi weights against the
/// `C(k,d)` bounds. The grid density estimate is inflated by its uncertainty.
pub fn verify_frame_nd(
    domain: Domain,
    k: u32,
    set: &SamplingSetND,
    ensemble: &Ensemble,
    exploratory: bool,
) -> Result<FrameReport> {
    let d = set.dim();
    if domain.dim() != d {
        return invalid(format!("domain dimension {} ≠ set dimension {d}", domain.dim()));
    }
    let est = density_nd(set);
    let delta = est.delta + est.uncertainty;
    let b = set.star_norm.b(d);
    let inputs = constants::BoundInputs::new(delta, domain.m_omega(), b)?;
    let bounds = constants::frame_bounds_dd(k, d as u32, inputs)?;
    if !bounds.admissible && !exploratory {
        return Err(Error::Precondition(format!(
            "m_Ω·b·δ = {:.6} is not below C({k},{d}) = {:.6}",
            inputs.x(),
            constants::constant_c(k, d as u32)?.value
        )));
    }
    let weights = weights_nd(set, k);
    if weights.coarse {
        return Err(Error::Precondition(
            "grid resolution resolves some Voronoi cell with fewer than 4 cells per axis".into(),
        ));
    }
    let echo = echo("framend", domain, k, delta, b, set.window(), ensemble, exploratory);
    let disc = Discretization { domain, points: set.points(), weights: &weights, window: set.window(), delta, b };
    sandwich(&disc, bounds, ensemble, 0.0, echo)
}

#[allow(clippy::too_many_arguments)]
fn echo(
    experiment: &str,
    domain: Domain,
    k: u32,
    delta: f64,
    b: f64,
    window: &[(f64, f64)],
    ensemble: &Ensemble,
    exploratory: bool,
) -> RunEcho {
    RunEcho {
        experiment: experiment.into(),
        domain,
        k,
        d: domain.dim(),
        delta,
        m_omega: domain.m_omega(),
        b,
        window: window.to_vec(),
        n_points: 0,
        ensemble: *ensemble,
        epsilon: None,
        s: None,
        tau: None,
        exploratory,
    }
}

/// Exact frame bounds of `{T n}` with uniform weights
/// `μ_l = 2(T/2)^{2l+1}/(l!(2l+1))` for `Ω = [−W, W]`.
///
/// With `P = 2π/T`, the frame operator acts on the aliases `f̂(ω + jP)` by the
/// matrix `T^{−1} Σ_l μ_l v_l v_lᵀ`, `v_l[j] = (ω + jP)^l`; the bounds are the
/// extreme eigenvalues over `ω`.
pub fn uniform_grid_bounds(k: u32, w: f64, spacing: f64) -> Result<FrameBounds> {
    if !(w > 0.0) || !(spacing > 0.0) {
        return invalid("W and spacing must be positive");
    }
    if spacing * w > (k + 1) as f64 * PI * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "spacing {spacing} exceeds (k+1)π/W = {}; the grid is not a set of sampling",
            (k + 1) as f64 * PI / w
        )));
    }
    let p = 2.0 * PI / spacing;
    let mu: Vec<f64> = (0..=k)
        .map(|l| 2.0 * (spacing / 2.0).powi(2 * l as i32 + 1) / (factorial_u(l) * (2 * l + 1) as f64))
        .collect();
    let extremes = |omega: f64| -> (f64, f64) {
        let freqs: Vec<f64> = (0..)
            .map(|j| omega + j as f64 * p)
            .take_while(|v| *v < w - 1e-12 * w)
            .collect();
        let n = freqs.len();
        let m = DMatrix::from_fn(n, n, |a, b| {
            mu.iter()
                .enumerate()
                .map(|(l, m)| m * (freqs[a] * freqs[b]).powi(l as i32))
                .sum::<f64>()
                / spacing
        });
        let e = SymmetricEigen::new(m).eigenvalues;
        (e.min(), e.max())
    };
    let lo = -w;
    // one period [−W, −W + P) of the alias pattern
    let hi = (-w + p).min(w) - 1e-9 * p;
    let n_grid = 2000;
    let grid: Vec<f64> = (0..=n_grid).map(|i| lo + (hi - lo) * i as f64 / n_grid as f64).collect();
    let vals: Vec<(f64, f64)> = grid.iter().map(|&o| extremes(o)).collect();
    let step = (hi - lo) / n_grid as f64;
    let (imin, _) = vals.iter().enumerate().fold((0, f64::INFINITY), |b, (i, v)| if v.0 < b.1 { (i, v.0) } else { b });
    let (imax, _) =
        vals.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, v)| if v.1 > b.1 { (i, v.1) } else { b });
    let a = golden(grid[imin] - step, grid[imin] + step, lo, hi, |o| extremes(o).0).min(vals[imin].0);
    let b = -golden(grid[imax] - step, grid[imax] + step, lo, hi, |o| -extremes(o).1).min(-vals[imax].1);
    Ok(FrameBounds { lower: a, upper: b, admissible: a > 0.0 })
}

/// Minimum of `f` on `[a, b] ∩ [lo, hi]` by golden-section search.
fn golden<F: Fn(f64) -> f64>(a: f64, b: f64, lo: f64, hi: f64, f: F) -> f64 {
    let (mut a, mut b) = (a.max(lo), b.min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    fc.min(fd).min(f(a)).min(f(b))
}

/// Uniform grid `x_n = n·T`, `|n| ≤ half_count`, with its exact bounds.
pub fn verify_uniform_grid(
    w: f64,
    k: u32,
    spacing: f64,
    half_count: usize,
    ensemble: &Ensemble,
) -> Result<FrameReport> {
    let set = SamplingSet1D::uniform(spacing, half_count)?;
    let bounds = uniform_grid_bounds(k, w, spacing)?;
    let domain = Domain::interval(w)?;
    let delta = 0.5 * spacing;
    let weights = weights_1d(&set, k);
    let points = points_1d(&set);
    let window = [set.window()];
    let disc = Discretization { domain, points: &points, weights: &weights, window: &window, delta, b: 1.0 };
    let echo = echo("uniform", domain, k, delta, 1.0, &window, ensemble, false);
    sandwich(&disc, bounds, ensemble, 0.0, echo)
}

/// Perturbed grid `x̃_n = (k+1)πn/W + U(−ε, ε)` sampled with the base grid's
/// weights, checked against `Ã`, `B̃` built from the exact bounds of the base.
pub fn perturb_experiment(
    w: f64,
    k: u32,
    half_count: usize,
    epsilon: f64,
    seed: u64,
    ensemble: &Ensemble,
) -> Result<FrameReport> {
    let spacing = (k + 1) as f64 * PI / w;
    let base = SamplingSet1D::uniform(spacing, half_count)?;
    let base_bounds = uniform_grid_bounds(k, w, spacing)?;
    let limit = constants::perturb_bound(base_bounds.lower, base_bounds.upper, w, 1.0)?;
    if !(epsilon >= 0.0) || epsilon >= limit {
        return Err(Error::Precondition(format!(
            "ε = {epsilon} is not in [0, log(1+√(A/B))/(m_Ω b)) = [0, {limit:.6})"
        )));
    }
    let bounds = constants::perturbed_bounds(base_bounds.lower, base_bounds.upper, w, 1.0, epsilon)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = base
        .points()
        .iter()
        .map(|&x| vec![if epsilon > 0.0 { x + rng.random_range(-epsilon..=epsilon) } else { x }])
        .collect();
    let weights = weights_1d(&base, k);
    let domain = Domain::interval(w)?;
    let window = [base.window()];
    let delta = 0.5 * spacing;
    let disc = Discretization { domain, points: &points, weights: &weights, window: &window, delta, b: 1.0 };
    let mut echo = echo("perturb", domain, k, delta, 1.0, &window, ensemble, false);
    echo.epsilon = Some(epsilon);
    sandwich(&disc, bounds, ensemble, epsilon, echo)
}

/// Outcome of [`check_upper_lemma`] for one function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperLemmaReport {
    pub ratio: f64,
    /// `exp(2bδr)`.
    pub radius_bound: f64,
    /// `(1 + 2σ*)^d exp(2bδm_Ω/σ*)`, `σ* = σ*_d(bδm_Ω)`.
    pub covering_bound: f64,
    pub tail_tol: f64,
    pub radius_holds: bool,
    pub covering_holds: bool,
}

/// Checks both `k = 0` upper bounds `Σ μ_n |f(x_n)|² ≤ exp(2bδr)‖f‖²` and the
/// covering-number bound on one (normalised) function.
pub fn check_upper_lemma(f: &TestFunction, disc: &Discretization<'_>) -> Result<UpperLemmaReport> {
    let f = f.normalized()?;
    let d = f.dim() as u32;
    let zero_only = WeightTable {
        multi_indices: vec![vec![0; d as usize]],
        mu: disc.weights.mu.iter().map(|r| vec![r[0]]).collect(),
        coarse: disc.weights.coarse,
    };
    let ratio = frame_sum(&f, disc.points, &zero_only)?;
    let x = disc.b * disc.delta * disc.domain.m_omega();
    let radius_bound = (2.0 * disc.b * disc.delta * disc.domain.r()).exp();
    let sigma = constants::eval_sigma_star(d, x)?;
    let covering_bound = (1.0 + 2.0 * sigma).powi(d as i32) * (2.0 * x / sigma).exp();
    let inner = shrink(disc.window, 2.0 * disc.b * disc.delta);
    let tf = tail_fraction(&f, &zero_only.multi_indices, &inner, disc.b * disc.delta)?;
    Ok(UpperLemmaReport {
        ratio,
        radius_bound,
        covering_bound,
        tail_tol: tf,
        radius_holds: ratio <= radius_bound + tf,
        covering_holds: ratio <= covering_bound + tf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::jittered_set;

    #[test]
    fn zero_function_has_zero_sum() {
        let set = SamplingSet1D::uniform(1.0, 3).unwrap();
        let f = TestFunction::new(Domain::interval(1.0).unwrap(), vec![vec![0.0]], vec![0.0]).unwrap();
        let w = weights_1d(&set, 2);
        assert_eq!(frame_sum(&f, &points_1d(&set), &w).unwrap(), 0.0);
    }

    #[test]
    fn nyquist_grid_bounds_are_one() {
        let fb = uniform_grid_bounds(0, 1.0, PI).unwrap();
        assert!((fb.lower - 1.0).abs() < 1e-12 && (fb.upper - 1.0).abs() < 1e-12);
        assert!(uniform_grid_bounds(0, 1.0, 1.01 * PI).is_err());
    }

    #[test]
    fn uniform_bounds_k1_by_hand() {
        // k = 1, T = 2π, W = 1: two aliases ω, ω + 1 with ω ∈ [−1, 0]
        let fb = uniform_grid_bounds(1, 1.0, 2.0 * PI).unwrap();
        let (mu0, mu1) = (2.0 * PI, 2.0 * PI.powi(3) / 3.0);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..=20000 {
            let o = -1.0 + i as f64 / 20000.0;
            let (a, b) = (o, o + 1.0);
            let m11 = (mu0 + mu1 * a * a) / (2.0 * PI);
            let m22 = (mu0 + mu1 * b * b) / (2.0 * PI);
            let m12 = (mu0 + mu1 * a * b) / (2.0 * PI);
            let tr = m11 + m22;
            let disc = ((m11 - m22).powi(2) + 4.0 * m12 * m12).sqrt();
            lo = lo.min(0.5 * (tr - disc));
            hi = hi.max(0.5 * (tr + disc));
        }
        assert!((fb.lower - lo).abs() < 1e-8, "{} vs {lo}", fb.lower);
        assert!((fb.upper - hi).abs() < 1e-8, "{} vs {hi}", fb.upper);
    }

    #[test]
    fn jittered_run_passes() {
        let set = jittered_set(1.0, 0.2, 40, 7).unwrap();
        let ens = Ensemble { n_functions: 10, j: 4, seed: 1 };
        let r = verify_frame_1d(1.0, 1, &set, &ens, false).unwrap();
        assert!(r.passed(), "{:?}", (r.min_ratio(), r.max_ratio(), r.a_theory, r.b_theory));
        assert_eq!(r.ratios.len(), 10);
    }

    #[test]
    fn above_bound_refused_unless_exploratory() {
        let set = jittered_set(4.0, 0.0, 10, 0).unwrap();
        let ens = Ensemble { n_functions: 2, j: 2, seed: 1 };
        assert!(matches!(verify_frame_1d(1.0, 0, &set, &ens, false), Err(Error::Precondition(_))));
        let r = verify_frame_1d(1.0, 0, &set, &ens, true).unwrap();
        assert!(!r.admissible);
    }

    #[test]
    fn perturb_refuses_large_epsilon() {
        let ens = Ensemble { n_functions: 2, j: 2, seed: 1 };
        assert!(perturb_experiment(1.0, 0, 10, 0.7, 0, &ens).is_err());
    }
}
