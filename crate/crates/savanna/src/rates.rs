//! Birth/death response functions and the heterogeneous coefficient field.
//!
//! A response function maps a neighborhood occupancy fraction `u ∈ [0,1]` to
//! an event rate. Responses are kept in binomial-mixture form
//!
//! ```text
//! G(u) = lambda * sum_{j=1..m} p_j * C(m,j) * u^j * (1-u)^(m-j),   p_0 = 0,
//! ```
//!
//! which is exactly the form the lattice sampler realizes by drawing `m`
//! neighbors and accepting the flip with probability `p_j` when `j` of them
//! are in the triggering state. `p_0 = 0` makes the all-empty configuration
//! inert, so `G(0) = 0` holds structurally, not just numerically.

use crate::error::{Error, Result};

/// Default mixture degree used when approximating power-law responses.
pub const DEFAULT_DEGREE: usize = 60;

/// A rate response in binomial-mixture form.
#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinRate {
    lambda: f64,
    probs: Vec<f64>,
    /// c_j = lambda * p_j * C(m, j), j = 0..=m (c_0 = 0).
    coef: Vec<f64>,
}

impl BernsteinRate {
    /// Build a response from its rate constant and acceptance probabilities
    /// `p_1..p_m`.
    pub fn new(lambda: f64, probs: Vec<f64>) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
        }
        if probs.is_empty() {
            return Err(Error::invalid("at least one acceptance probability required"));
        }
        for (j, &p) in probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("p_{} = {p} outside [0,1]", j + 1)));
            }
        }
        let m = probs.len();
        let mut coef = vec![0.0; m + 1];
        let mut binom = 1.0; // C(m, j), updated multiplicatively
        for j in 1..=m {
            binom *= (m - j + 1) as f64 / j as f64;
            coef[j] = lambda * probs[j - 1] * binom;
        }
        Ok(Self { lambda, probs, coef })
    }

    /// Mixture degree m (the number of neighbors the sampler draws).
    pub fn degree(&self) -> usize {
        self.probs.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Acceptance probability `p_j` for `j = 0..=m`.
    pub fn accept_prob(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.probs[j - 1]
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Evaluate the response at `u ∈ [0,1]`.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::invalid(format!("u = {u} outside [0,1]")));
        }
        Ok(self.eval_in01(u))
    }

    /// Evaluation without the domain check; callers guarantee `u ∈ [0,1]`.
    ///
    /// All mixture terms are nonnegative, so the two-sided Horner form below
    /// has no cancellation; the split at 1/2 keeps the power ratio ≤ 1.
    pub(crate) fn eval_in01(&self, u: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&u));
        let m = self.probs.len();
        let v = 1.0 - u;
        if u <= 0.5 {
            // G = v^m * (c_1 r + c_2 r^2 + ... + c_m r^m), r = u/v <= 1
            let r = u / v;
            let mut acc = 0.0;
            for j in (1..=m).rev() {
                acc = (acc + self.coef[j]) * r;
            }
            acc * v.powi(m as i32)
        } else {
            // G = u^m * (c_m + c_{m-1} s + ... + c_1 s^{m-1}), s = v/u < 1
            let s = v / u;
            let mut acc = 0.0;
            for j in 1..=m {
                acc = acc * s + self.coef[j];
            }
            acc * u.powi(m as i32)
        }
    }

    /// Per-capita response `G(u)/u`, extended to `u = 0` by its limit
    /// `lambda * m * p_1` (the removable singularity is filled analytically,
    /// never by numerical division).
    pub fn per_capita(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::invalid(format!("u = {u} outside [0,1]")));
        }
        Ok(self.per_capita_in01(u))
    }

    pub(crate) fn per_capita_in01(&self, u: f64) -> f64 {
        if u == 0.0 {
            self.coef[1]
        } else {
            self.eval_in01(u) / u
        }
    }

    /// Fit a mixture of degree `m` to a continuous `f: [0,1] -> [0,∞)` with
    /// `f(0) = 0` by sampling at `k/m`. The rate constant is the largest
    /// sample so that every acceptance probability lands in [0,1]; the
    /// sup-norm error vanishes as `m` grows.
    pub fn fit<F: Fn(f64) -> f64>(f: F, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("degree must be at least 1"));
        }
        let at_zero = f(0.0);
        if at_zero.abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "f(0) = {at_zero} but the mixture forces a zero response at 0"
            )));
        }
        let samples: Vec<f64> = (1..=m).map(|k| f(k as f64 / m as f64)).collect();
        if let Some(bad) = samples.iter().find(|s| !s.is_finite() || **s < 0.0) {
            return Err(Error::invalid(format!("f produced a bad sample {bad}")));
        }
        let lambda = samples.iter().cloned().fold(0.0_f64, f64::max);
        if lambda > 0.0 {
            let probs = samples.iter().map(|s| (s / lambda).min(1.0)).collect();
            Self::new(lambda, probs)
        } else {
            // f vanishes on the sample grid; keep a valid (inert) response.
            Self::new(1.0, vec![0.0; m])
        }
    }
}

/// Power-law response pair: births respond as `u^alpha`, deaths as `u^beta`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PowerLawSpec {
    pub alpha: f64,
    pub beta: f64,
}

impl PowerLawSpec {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) || !(beta > 0.0) {
            return Err(Error::invalid(format!(
                "power exponents must be positive, got alpha = {alpha}, beta = {beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// Mixture approximations of `u^alpha` (births) and `u^beta` (deaths).
    pub fn to_rates(&self, m: usize) -> Result<(BernsteinRate, BernsteinRate)> {
        let alpha = self.alpha;
        let beta = self.beta;
        let g = BernsteinRate::fit(|u| u.powf(alpha), m)?;
        let h = BernsteinRate::fit(|u| u.powf(beta), m)?;
        Ok((g, h))
    }
}

/// Result of the unimodality screen on the balance ratio
/// `r(u) = (G(u)/u) / (H(1-u)/(1-u))`.
///
/// Unimodality of `r` is what guarantees at most two interior fixed points
/// of the mean-field flow for every coefficient ratio.
#[derive(Debug, Clone, Copy)]
pub struct Unimodality {
    pub is_unimodal: bool,
    /// Grid location of the ratio's maximum.
    pub argmax: f64,
    /// Ratio value at the maximum (may be infinite at an endpoint).
    pub max_value: f64,
}

/// Evaluate the balance ratio on a grid of spacing `grid_step` and decide
/// whether it is non-decreasing then non-increasing (up to a 1e-12 relative
/// tolerance on each step).
///
/// A vanishing death response in the interior makes the ratio undefined and
/// is reported as an error; at the endpoints a positive/zero split is
/// resolved to +inf, and a 0/0 endpoint is skipped.
pub fn check_unimodal(g: &BernsteinRate, h: &BernsteinRate, grid_step: f64) -> Result<Unimodality> {
    if !(grid_step > 0.0 && grid_step <= 0.01) {
        return Err(Error::invalid(format!(
            "grid_step must lie in (0, 0.01], got {grid_step}"
        )));
    }
    let n = (1.0 / grid_step).ceil() as usize;
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let u = if i == n { 1.0 } else { i as f64 * grid_step };
        let num = g.per_capita_in01(u);
        let den = h.per_capita_in01(1.0 - u);
        if den == 0.0 {
            if i > 0 && i < n {
                return Err(Error::runtime(format!(
                    "death response vanishes at interior point 1-u = {}",
                    1.0 - u
                )));
            }
            if num > 0.0 {
                points.push((u, f64::INFINITY));
            }
            // 0/0 endpoint carries no information; skip it.
            continue;
        }
        points.push((u, num / den));
    }

    let mut seen_down = false;
    let mut is_unimodal = true;
    let (mut argmax, mut max_value) = points[0];
    for w in points.windows(2) {
        let (_, a) = w[0];
        let (ub, b) = w[1];
        if b > max_value || (b == max_value && max_value.is_infinite() && argmax == 0.0) {
            argmax = ub;
            max_value = b;
        }
        let step = if a.is_infinite() && b.is_infinite() {
            0.0
        } else {
            b - a
        };
        let tol = 1e-12 * a.abs().max(b.abs()).max(1.0);
        if step.is_nan() {
            continue;
        }
        if step > tol {
            if seen_down {
                is_unimodal = false;
            }
        } else if step < -tol {
            seen_down = true;
        }
    }
    Ok(Unimodality { is_unimodal, argmax, max_value })
}

/// Continental-scale coefficient pair `(a, b)` sampled on an `n x n` grid
/// over the unit torus, with periodic bilinear interpolation between cell
/// centers. All samples must be strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct HeterogeneityField {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl HeterogeneityField {
    /// Row-major samples at cell centers `((i+0.5)/n, (j+0.5)/n)`.
    pub fn from_samples(n: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if n == 0 || a.len() != n * n || b.len() != n * n {
            return Err(Error::invalid(format!(
                "expected {n}x{n} samples, got a: {}, b: {}",
                a.len(),
                b.len()
            )));
        }
        for v in a.iter().chain(b.iter()) {
            if !(*v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("field samples must be positive, got {v}")));
            }
        }
        Ok(Self { n, a, b })
    }

    pub fn constant(a: f64, b: f64) -> Result<Self> {
        Self::from_samples(1, vec![a], vec![b])
    }

    /// Two vertical stripes: `(a0, b0)` on `y1 < 1/2`, `(a1, b1)` on the rest.
    pub fn two_stripe(n: usize, (a0, b0): (f64, f64), (a1, b1): (f64, f64)) -> Result<Self> {
        let mut a = Vec::with_capacity(n * n);
        let mut b = Vec::with_capacity(n * n);
        for _j in 0..n {
            for i in 0..n {
                let left = (i as f64 + 0.5) / (n as f64) < 0.5;
                a.push(if left { a0 } else { a1 });
                b.push(if left { b0 } else { b1 });
            }
        }
        Self::from_samples(n, a, b)
    }

    /// Smooth periodic ramp of `a` along the first coordinate, constant `b`.
    pub fn gradient(n: usize, a_min: f64, a_max: f64, b: f64) -> Result<Self> {
        let mut a = Vec::with_capacity(n * n);
        for _j in 0..n {
            for i in 0..n {
                let y1 = (i as f64 + 0.5) / n as f64;
                let ramp = 0.5 - 0.5 * (std::f64::consts::TAU * y1).cos();
                a.push(a_min + (a_max - a_min) * ramp);
            }
        }
        Self::from_samples(n, a, vec![b; n * n])
    }

    /// Load `a` and `b` from plain-text matrix files (`n` lines of `n`
    /// positive decimals each, row-major).
    pub fn from_files(a_path: &std::path::Path, b_path: &std::path::Path) -> Result<Self> {
        let (na, a) = read_matrix(a_path)?;
        let (nb, b) = read_matrix(b_path)?;
        if na != nb {
            return Err(Error::invalid(format!(
                "field files disagree on resolution: {na} vs {nb}"
            )));
        }
        Self::from_samples(na, a, b)
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    /// Samples at cell `(i, j)`, i horizontal.
    pub fn sample(&self, i: usize, j: usize) -> (f64, f64) {
        (self.a[j * self.n + i], self.b[j * self.n + i])
    }

    /// Interpolated `(a, b)` at a point of the unit torus. Any finite input
    /// is wrapped, so interpolation is exactly periodic.
    pub fn at(&self, y: (f64, f64)) -> (f64, f64) {
        let n = self.n;
        let lerp = |grid: &[f64]| {
            // Shift so samples sit at integer coordinates, then wrap.
            let x = (y.0 * n as f64 - 0.5).rem_euclid(n as f64);
            let z = (y.1 * n as f64 - 0.5).rem_euclid(n as f64);
            let i0 = x.floor() as usize % n;
            let j0 = z.floor() as usize % n;
            let i1 = (i0 + 1) % n;
            let j1 = (j0 + 1) % n;
            let fx = x - x.floor();
            let fz = z - z.floor();
            let v00 = grid[j0 * n + i0];
            let v10 = grid[j0 * n + i1];
            let v01 = grid[j1 * n + i0];
            let v11 = grid[j1 * n + i1];
            (1.0 - fz) * ((1.0 - fx) * v00 + fx * v10) + fz * ((1.0 - fx) * v01 + fx * v11)
        };
        (lerp(&self.a), lerp(&self.b))
    }

    /// Largest `a` and `b` anywhere on the torus (bilinear interpolation
    /// never exceeds the sample range).
    pub fn max_samples(&self) -> (f64, f64) {
        let max = |g: &[f64]| g.iter().cloned().fold(f64::MIN, f64::max);
        (max(&self.a), max(&self.b))
    }
}

fn read_matrix(path: &std::path::Path) -> Result<(usize, Vec<f64>)> {
    let text = std::fs::read_to_string(path)?;
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|e| Error::invalid(format!("{}: bad number {tok}: {e}", path.display())))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::invalid(format!(
            "{}: expected a square matrix, got {} rows",
            path.display(),
            n
        )));
    }
    Ok((n, rows.into_iter().flatten().collect()))
}
