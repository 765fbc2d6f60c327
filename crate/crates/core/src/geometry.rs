//! Sampling sets, densities, Voronoi cells and Voronoi moment weights.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Result};
use crate::multi_index::{factorial, factorial_u, multi_indices};
use crate::quadrature::GaussLegendre;

/// Ordered points in a window `[lo, hi]`; Voronoi cells are clipped to the
/// window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingSet1D {
    points: Vec<f64>,
    window: (f64, f64),
}

impl SamplingSet1D {
    pub fn new(points: Vec<f64>, window: (f64, f64)) -> Result<Self> {
        if points.is_empty() {
            return invalid("sampling set is empty");
        }
        ensure_finite("window start", window.0)?;
        ensure_finite("window end", window.1)?;
        for (i, &p) in points.iter().enumerate() {
            ensure_finite("sampling point", p)?;
            if i > 0 && p <= points[i - 1] {
                return invalid(format!("points must be strictly increasing (index {i})"));
            }
        }
        if points[0] < window.0 || points[points.len() - 1] > window.1 {
            return invalid(format!(
                "points [{}, {}] leave the window [{}, {}]",
                points[0],
                points[points.len() - 1],
                window.0,
                window.1
            ));
        }
        Ok(Self { points, window })
    }

    /// Uniform grid `x_n = n·spacing` for `|n| ≤ N` with window
    /// `[−(N+½)spacing, (N+½)spacing]`.
    pub fn uniform(spacing: f64, half_count: usize) -> Result<Self> {
        jittered_set(spacing, 0.0, half_count, 0)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `z_0 = lo, z_n = (x_{n−1} + x_n)/2, z_N = hi`; cell `n` is `[z_n, z_{n+1}]`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut z = Vec::with_capacity(self.points.len() + 1);
        z.push(self.window.0);
        z.extend(self.points.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        z.push(self.window.1);
        z
    }

    pub fn cell(&self, n: usize) -> (f64, f64) {
        let lo = if n == 0 { self.window.0 } else { 0.5 * (self.points[n - 1] + self.points[n]) };
        let hi = if n + 1 == self.points.len() {
            self.window.1
        } else {
            0.5 * (self.points[n] + self.points[n + 1])
        };
        (lo, hi)
    }

    /// Image under `x ↦ c x`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return invalid(format!("scale must be positive, got {c}"));
        }
        Self::new(self.points.iter().map(|x| c * x).collect(), (c * self.window.0, c * self.window.1))
    }
}

/// Largest distance from a window point to the nearest sampling point.
pub fn density_1d(set: &SamplingSet1D) -> Result<f64> {
    if set.len() < 2 {
        return invalid(format!("density needs at least 2 points, got {}", set.len()));
    }
    let p = set.points();
    let (lo, hi) = set.window();
    let half_gap = p.windows(2).map(|w| 0.5 * (w[1] - w[0])).fold(0.0, f64::max);
    Ok(half_gap.max(p[0] - lo).max(hi - p[p.len() - 1]))
}

/// Points `n·spacing + U(−jitter, jitter)` for `|n| ≤ half_count`, window
/// `[−(N+½)spacing, (N+½)spacing]`, deterministic per seed.
pub fn jittered_set(spacing: f64, jitter: f64, half_count: usize, seed: u64) -> Result<SamplingSet1D> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return invalid(format!("spacing must be positive and finite, got {spacing}"));
    }
    if !(jitter >= 0.0) || jitter >= 0.5 * spacing {
        return invalid(format!(
            "jitter amplitude {jitter} must lie in [0, spacing/2) = [0, {}) to preserve ordering",
            0.5 * spacing
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = half_count as i64;
    let points = (-n..=n)
        .map(|j| {
            let shift = if jitter > 0.0 { rng.random_range(-jitter..jitter) } else { 0.0 };
            j as f64 * spacing + shift
        })
        .collect();
    let edge = (n as f64 + 0.5) * spacing;
    SamplingSet1D::new(points, (-edge, edge))
}

/// Voronoi moments `μ_{n,α}` indexed by point and multi-index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    pub multi_indices: Vec<Vec<u32>>,
    /// `mu[n][i]` belongs to point `n` and `multi_indices[i]`.
    pub mu: Vec<Vec<f64>>,
    /// Set when the grid resolves some cell with fewer than 4 grid cells per axis.
    pub coarse: bool,
}

impl WeightTable {
    pub fn order(&self) -> u32 {
        self.multi_indices.iter().map(|a| a.iter().sum::<u32>()).max().unwrap_or(0)
    }
}

/// `μ_{n,l} = ((z_{n+1}−x_n)^{2l+1} − (z_n−x_n)^{2l+1}) / (l!(2l+1))`, `l ≤ k`.
pub fn weights_1d(set: &SamplingSet1D, k: u32) -> WeightTable {
    let z = set.breakpoints();
    let mu = set
        .points()
        .iter()
        .enumerate()
        .map(|(n, &x)| {
            (0..=k)
                .map(|l| {
                    let p = 2 * l as i32 + 1;
                    ((z[n + 1] - x).powi(p) - (z[n] - x).powi(p)) / (factorial_u(l) * p as f64)
                })
                .collect()
        })
        .collect();
    WeightTable { multi_indices: (0..=k).map(|l| vec![l]).collect(), mu, coarse: false }
}

/// The norm `|·|_*` used for densities and Voronoi cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StarNorm {
    /// `ℓ_q`, `1 ≤ q < ∞`.
    Lq(f64),
    LInf,
}

impl StarNorm {
    pub fn norm(&self, v: &[f64]) -> f64 {
        match *self {
            StarNorm::LInf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            StarNorm::Lq(2.0) => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            StarNorm::Lq(q) => v.iter().map(|x| x.abs().powf(q)).sum::<f64>().powf(1.0 / q),
        }
    }

    /// Smallest `b` with `|x|_2 ≤ b |x|_*` in dimension `d`.
    pub fn b(&self, d: usize) -> f64 {
        match *self {
            StarNorm::LInf => (d as f64).sqrt(),
            StarNorm::Lq(q) if q <= 2.0 => 1.0,
            StarNorm::Lq(q) => (d as f64).powf(0.5 - 1.0 / q),
        }
    }

    /// Largest `a` with `a |x|_* ≤ |x|_2`.
    pub fn a(&self, d: usize) -> f64 {
        match *self {
            StarNorm::LInf => 1.0,
            StarNorm::Lq(q) if q >= 2.0 => 1.0,
            StarNorm::Lq(q) => (d as f64).powf(0.5 - 1.0 / q),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            StarNorm::Lq(q) if !(q >= 1.0) || !q.is_finite() => {
                invalid(format!("ℓ_q norm needs 1 ≤ q < ∞, got {q}"))
            }
            _ => Ok(()),
        }
    }
}

/// A point cloud in a box window, with a `|·|_*` norm and a grid used to
/// resolve Voronoi cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingSetND {
    points: Vec<Vec<f64>>,
    window: Vec<(f64, f64)>,
    pub star_norm: StarNorm,
    /// Grid cells per unit length along each axis.
    pub grid_resolution: usize,
}

impl SamplingSetND {
    pub fn new(
        points: Vec<Vec<f64>>,
        window: Vec<(f64, f64)>,
        star_norm: StarNorm,
        grid_resolution: usize,
    ) -> Result<Self> {
        star_norm.validate()?;
        let d = window.len();
        if d == 0 {
            return invalid("window must have at least one axis");
        }
        if grid_resolution == 0 {
            return invalid("grid resolution must be positive");
        }
        if points.is_empty() {
            return invalid("sampling set is empty");
        }
        for &(lo, hi) in &window {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return invalid(format!("window axis [{lo}, {hi}] is not a finite interval"));
            }
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != d {
                return invalid(format!("point {i} has dimension {}, expected {d}", p.len()));
            }
            for (x, &(lo, hi)) in p.iter().zip(&window) {
                ensure_finite("sampling point", *x)?;
                if *x < lo || *x > hi {
                    return invalid(format!("point {i} lies outside the window"));
                }
            }
        }
        let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return invalid("sampling points must be pairwise distinct");
        }
        Ok(Self { points, window, star_norm, grid_resolution })
    }

    /// Integer lattice `spacing·ℤ^d` restricted to `|n_i| ≤ half_count`, window
    /// extended by half a spacing.
    pub fn lattice(
        d: usize,
        spacing: f64,
        half_count: usize,
        star_norm: StarNorm,
        grid_resolution: usize,
    ) -> Result<Self> {
        let n = half_count as i64;
        let side: Vec<f64> = (-n..=n).map(|j| j as f64 * spacing).collect();
        let mut points = vec![vec![]];
        for _ in 0..d {
            points = points
                .into_iter()
                .flat_map(|p: Vec<f64>| {
                    side.iter().map(move |&x| {
                        let mut q = p.clone();
                        q.push(x);
                        q
                    })
                })
                .collect();
        }
        let edge = (n as f64 + 0.5) * spacing;
        Self::new(points, vec![(-edge, edge); d], star_norm, grid_resolution)
    }

    /// Lattice points each displaced uniformly in `[−jitter, jitter]^d`.
    pub fn jittered_lattice(
        d: usize,
        spacing: f64,
        jitter: f64,
        half_count: usize,
        star_norm: StarNorm,
        grid_resolution: usize,
        seed: u64,
    ) -> Result<Self> {
        if !(jitter >= 0.0) || jitter >= 0.5 * spacing {
            return invalid(format!("jitter {jitter} must lie in [0, spacing/2)"));
        }
        let base = Self::lattice(d, spacing, half_count, star_norm, grid_resolution)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = base
            .points
            .iter()
            .map(|p| {
                p.iter()
                    .map(|x| if jitter > 0.0 { x + rng.random_range(-jitter..jitter) } else { *x })
                    .collect()
            })
            .collect();
        Self::new(points, base.window, star_norm, grid_resolution)
    }

    pub fn dim(&self) -> usize {
        self.window.len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn window(&self) -> &[(f64, f64)] {
        &self.window
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn with_resolution(&self, grid_resolution: usize) -> Result<Self> {
        Self::new(self.points.clone(), self.window.clone(), self.star_norm, grid_resolution)
    }

    /// Image under `x ↦ c x`; the grid resolution is rescaled so the grid
    /// maps onto itself when `c·resolution` is an integer.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return invalid(format!("scale must be positive, got {c}"));
        }
        let res = ((self.grid_resolution as f64) / c).round().max(1.0) as usize;
        Self::new(
            self.points.iter().map(|p| p.iter().map(|x| c * x).collect()).collect(),
            self.window.iter().map(|&(a, b)| (c * a, c * b)).collect(),
            self.star_norm,
            res,
        )
    }

    fn grid(&self) -> Grid {
        let counts: Vec<usize> = self
            .window
            .iter()
            .map(|&(lo, hi)| (((hi - lo) * self.grid_resolution as f64).round() as usize).max(1))
            .collect();
        let steps = self.window.iter().zip(&counts).map(|(&(lo, hi), &n)| (hi - lo) / n as f64).collect();
        Grid { origin: self.window.iter().map(|w| w.0).collect(), steps, counts }
    }

    /// For every grid cell (row-major, last axis fastest) the nearest point
    /// index and its `|·|_*` distance.
    fn assign(&self) -> (Grid, Vec<(usize, f64)>) {
        let grid = self.grid();
        let buckets = Buckets::new(self);
        let total: usize = grid.counts.iter().product();
        let assigned = (0..total)
            .into_par_iter()
            .map(|flat| {
                let mid = grid.midpoint(flat);
                buckets.nearest(self, &mid)
            })
            .collect();
        (grid, assigned)
    }
}

struct Grid {
    origin: Vec<f64>,
    steps: Vec<f64>,
    counts: Vec<usize>,
}

impl Grid {
    fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.counts.len()];
        for ax in (0..self.counts.len()).rev() {
            idx[ax] = flat % self.counts[ax];
            flat /= self.counts[ax];
        }
        idx
    }

    fn midpoint(&self, flat: usize) -> Vec<f64> {
        self.unflatten(flat)
            .iter()
            .enumerate()
            .map(|(ax, &i)| self.origin[ax] + (i as f64 + 0.5) * self.steps[ax])
            .collect()
    }

    fn cell_volume(&self) -> f64 {
        self.steps.iter().product()
    }
}

/// Uniform bucket grid over the window for nearest-point queries.
struct Buckets {
    origin: Vec<f64>,
    size: f64,
    counts: Vec<usize>,
    cells: Vec<Vec<usize>>,
}

impl Buckets {
    fn new(set: &SamplingSetND) -> Self {
        let d = set.dim();
        let volume: f64 = set.window.iter().map(|(a, b)| b - a).product();
        let size = (volume / set.len() as f64).powf(1.0 / d as f64);
        let counts: Vec<usize> =
            set.window.iter().map(|&(a, b)| (((b - a) / size).ceil() as usize).max(1)).collect();
        let total: usize = counts.iter().product();
        let mut cells = vec![Vec::new(); total];
        let origin: Vec<f64> = set.window.iter().map(|w| w.0).collect();
        let mut b = Self { origin, size, counts, cells: Vec::new() };
        for (i, p) in set.points.iter().enumerate() {
            cells[b.flat(&b.coords(p))].push(i);
        }
        b.cells = cells;
        b
    }

    fn coords(&self, p: &[f64]) -> Vec<usize> {
        p.iter()
            .zip(&self.origin)
            .zip(&self.counts)
            .map(|((x, o), &n)| (((x - o) / self.size).floor().max(0.0) as usize).min(n - 1))
            .collect()
    }

    fn flat(&self, c: &[usize]) -> usize {
        c.iter().zip(&self.counts).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    /// Nearest point, ties to the lowest index; rings of buckets are searched
    /// outward until no closer point can exist.
    fn nearest(&self, set: &SamplingSetND, x: &[f64]) -> (usize, f64) {
        let centre = self.coords(x);
        let d = centre.len();
        let max_ring = self.counts.iter().copied().max().unwrap_or(1);
        let mut best = (usize::MAX, f64::INFINITY);
        let mut diff = vec![0.0; d];
        for ring in 0..=max_ring {
            // every point in ring r has sup-distance ≥ (r−1)·size ≤ any ℓ_q distance
            if ring >= 1 && (ring - 1) as f64 * self.size > best.1 {
                break;
            }
            self.for_ring(&centre, ring, |cell| {
                for &i in &self.cells[cell] {
                    for (k, dk) in diff.iter_mut().enumerate() {
                        *dk = set.points[i][k] - x[k];
                    }
                    let dist = set.star_norm.norm(&diff);
                    if dist < best.1 || (dist == best.1 && i < best.0) {
                        best = (i, dist);
                    }
                }
            });
        }
        best
    }

    fn for_ring<F: FnMut(usize)>(&self, centre: &[usize], ring: usize, mut visit: F) {
        let d = centre.len();
        let r = ring as i64;
        let lo: Vec<i64> = centre.iter().map(|&c| c as i64 - r).collect();
        let span = 2 * r + 1;
        let total = (span as usize).pow(d as u32);
        let mut coord = vec![0usize; d];
        'cells: for flat in 0..total {
            let mut f = flat;
            let mut on_shell = false;
            for ax in (0..d).rev() {
                let off = (f % span as usize) as i64;
                f /= span as usize;
                let c = lo[ax] + off;
                if c < 0 || c >= self.counts[ax] as i64 {
                    continue 'cells;
                }
                if off == 0 || off == span - 1 {
                    on_shell = true;
                }
                coord[ax] = c as usize;
            }
            if on_shell || ring == 0 {
                visit(self.flat(&coord));
            }
        }
    }
}

/// Density on the grid together with its discretisation uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub delta: f64,
    /// Half the grid-cell diagonal in `|·|_*`.
    pub uncertainty: f64,
}

/// Maximum over grid midpoints of the `|·|_*` distance to the nearest point.
pub fn density_nd(set: &SamplingSetND) -> DensityEstimate {
    let (grid, assigned) = set.assign();
    let delta = assigned.iter().fold(0.0f64, |m, a| m.max(a.1));
    let half: Vec<f64> = grid.steps.iter().map(|s| 0.5 * s).collect();
    DensityEstimate { delta, uncertainty: set.star_norm.norm(&half) }
}

/// `μ_{n,α} ≈ (1/α!) Σ_{grid cells in V_n} (x_cell − x_n)^{2α} · vol` for
/// `|α|₁ ≤ k`.
pub fn weights_nd(set: &SamplingSetND, k: u32) -> WeightTable {
    let d = set.dim();
    let alphas = multi_indices(d, k);
    let inv_fact: Vec<f64> = alphas.iter().map(|a| 1.0 / factorial(a)).collect();
    let (grid, assigned) = set.assign();
    let vol = grid.cell_volume();
    let mut mu = vec![vec![0.0; alphas.len()]; set.len()];
    let mut extent = vec![vec![(usize::MAX, 0usize); d]; set.len()];
    let max_pow = 2 * k as usize;
    let mut pows = vec![vec![1.0; max_pow + 1]; d];
    for (flat, &(n, _)) in assigned.iter().enumerate() {
        let idx = grid.unflatten(flat);
        for ax in 0..d {
            let t = grid.origin[ax] + (idx[ax] as f64 + 0.5) * grid.steps[ax] - set.points[n][ax];
            for p in 1..=max_pow {
                pows[ax][p] = pows[ax][p - 1] * t;
            }
            let e = &mut extent[n][ax];
            e.0 = e.0.min(idx[ax]);
            e.1 = e.1.max(idx[ax]);
        }
        for (i, a) in alphas.iter().enumerate() {
            let mut term = vol;
            for (ax, &ai) in a.iter().enumerate() {
                term *= pows[ax][2 * ai as usize];
            }
            mu[n][i] += term;
        }
    }
    for row in &mut mu {
        for (m, f) in row.iter_mut().zip(&inv_fact) {
            *m *= f;
        }
    }
    let coarse = extent.iter().any(|e| e.iter().any(|&(lo, hi)| lo == usize::MAX || hi + 1 - lo < 4));
    WeightTable { multi_indices: alphas, mu, coarse }
}

/// How the `s` offsets of each bunch are placed inside `[−h_n, h_n]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OffsetMode {
    /// Alternating signs, magnitudes `h_n·⌈m/2⌉/⌈s/2⌉`.
    Equispaced,
    /// Independent uniform draws in `[−h_n, h_n]`.
    Random { seed: u64 },
}

/// Bunches `x_{n,0} = c_n`, `x_{n,m} = c_n + o_{n,m}` with `|o_{n,m}| ≤ h_n ≤ τδ`
/// and `[c_n − h_n, c_n + h_n] ⊆ V_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BunchedSet {
    centers: SamplingSet1D,
    offsets: Vec<Vec<f64>>,
    h_n: Vec<f64>,
    pub tau: f64,
    pub delta: f64,
}

impl BunchedSet {
    /// Bunches of `s` extra points around every center with half-width
    /// `h_n = min(τδ, distance from the center to its cell boundary)`.
    pub fn generate(centers: SamplingSet1D, s: usize, tau: f64, mode: OffsetMode) -> Result<Self> {
        if !(tau > 0.0 && tau <= 1.0) {
            return invalid(format!("tau must lie in (0, 1], got {tau}"));
        }
        let delta = density_1d(&centers)?;
        let mut rng = match mode {
            OffsetMode::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
            OffsetMode::Equispaced => None,
        };
        let half = s.div_ceil(2).max(1) as f64;
        let mut offsets = Vec::with_capacity(centers.len());
        let mut h_n = Vec::with_capacity(centers.len());
        for (n, &x) in centers.points().iter().enumerate() {
            let (lo, hi) = centers.cell(n);
            let h = (tau * delta).min(x - lo).min(hi - x);
            if s > 0 && !(h > 0.0) {
                return invalid(format!("center {n} sits on its cell boundary, no room for a bunch"));
            }
            let o: Vec<f64> = match rng.as_mut() {
                None => (1..=s)
                    .map(|m| {
                        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
                        sign * h * m.div_ceil(2) as f64 / half
                    })
                    .collect(),
                Some(r) => (0..s).map(|_| r.random_range(-h..=h)).collect(),
            };
            offsets.push(o);
            h_n.push(h);
        }
        Self::from_parts(centers, offsets, tau)
    }

    /// Validates explicit offsets; configurations leaving `V_n` are rejected.
    pub fn from_parts(centers: SamplingSet1D, offsets: Vec<Vec<f64>>, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau <= 1.0) {
            return invalid(format!("tau must lie in (0, 1], got {tau}"));
        }
        if offsets.len() != centers.len() {
            return invalid(format!("{} offset rows for {} centers", offsets.len(), centers.len()));
        }
        let s = offsets.first().map_or(0, Vec::len);
        let delta = density_1d(&centers)?;
        let h = tau * delta;
        let mut h_n = Vec::with_capacity(centers.len());
        for (n, (o, &x)) in offsets.iter().zip(centers.points()).enumerate() {
            if o.len() != s {
                return invalid(format!("bunch {n} has {} offsets, expected {s}", o.len()));
            }
            let (lo, hi) = centers.cell(n);
            let width = o.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let tol = 1e-12 * (1.0 + x.abs());
            if width > h + tol || x - width < lo - tol || x + width > hi + tol {
                return invalid(format!(
                    "bunch {n} spans [{}, {}], outside [{}, {}] ∩ V_n",
                    x - width,
                    x + width,
                    (x - h).max(lo),
                    (x + h).min(hi)
                ));
            }
            let mut all: Vec<f64> = std::iter::once(0.0).chain(o.iter().copied()).collect();
            all.sort_by(|a, b| a.partial_cmp(b).expect("finite offsets"));
            if all.windows(2).any(|w| w[0] == w[1]) {
                return invalid(format!("bunch {n} has coincident points"));
            }
            h_n.push(width);
        }
        Ok(Self { centers, offsets, h_n, tau, delta })
    }

    pub fn centers(&self) -> &SamplingSet1D {
        &self.centers
    }

    pub fn offsets(&self) -> &[Vec<f64>] {
        &self.offsets
    }

    /// Realised half-width of each bunch.
    pub fn h_n(&self) -> &[f64] {
        &self.h_n
    }

    /// `h = τδ`.
    pub fn h(&self) -> f64 {
        self.tau * self.delta
    }

    pub fn s(&self) -> usize {
        self.offsets.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// `x_{n,0}, …, x_{n,s}` in bunch order.
    pub fn bunch(&self, n: usize) -> Vec<f64> {
        let x = self.centers.points()[n];
        std::iter::once(x).chain(self.offsets[n].iter().map(|o| x + o)).collect()
    }
}

/// `μ_{n,m} = m! ∫_{V_n} |N_{n,m}|²` with `N_{n,m}(x) = Π_{j<m}(x − x_{n,j})`.
pub fn bunched_weights(set: &BunchedSet) -> WeightTable {
    let s = set.s();
    let gl = GaussLegendre::exact_for_degree(2 * s);
    let mu = (0..set.len())
        .map(|n| {
            let pts = set.bunch(n);
            let (lo, hi) = set.centers().cell(n);
            (0..=s)
                .map(|m| {
                    let integral = gl.integrate(lo, hi, |x| {
                        let p: f64 = pts[..m].iter().map(|xj| x - xj).product();
                        p * p
                    });
                    factorial_u(m as u32) * integral
                })
                .collect()
        })
        .collect();
    WeightTable { multi_indices: (0..=s as u32).map(|m| vec![m]).collect(), mu, coarse: false }
}
