//! Periodic scalar fields on the continental torus and the unit-disk
//! averaging kernel used by the nonlocal reaction term.

use crate::error::{Error, Result};
use rayon::prelude::*;

/// A grid function `u ∈ [0,1]` on the torus of side `side`, sampled at cell
/// centers `((i+0.5)h, (j+0.5)h)` with spacing `h = side / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    side: f64,
    n: usize,
    h: f64,
    pub values: Vec<f64>,
    pub time: f64,
}

impl ScalarField {
    pub fn new(side: f64, h: f64) -> Result<Self> {
        if !(side > 0.0 && h > 0.0) {
            return Err(Error::invalid(format!("side {side} and spacing {h} must be positive")));
        }
        let n_real = side / h;
        let n = n_real.round();
        if (n_real - n).abs() > 1e-9 || n < 1.0 {
            return Err(Error::invalid(format!(
                "side {side} is not an integer multiple of spacing {h}"
            )));
        }
        let n = n as usize;
        Ok(Self { side, n, h, values: vec![0.0; n * n], time: 0.0 })
    }

    pub fn constant(side: f64, h: f64, value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::invalid(format!("value {value} outside [0,1]")));
        }
        let mut f = Self::new(side, h)?;
        f.values.fill(value);
        Ok(f)
    }

    /// Fill from a function of the cell-center position.
    pub fn from_fn(side: f64, h: f64, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut field = Self::new(side, h)?;
        let n = field.n;
        for j in 0..n {
            for i in 0..n {
                let v = f((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::invalid(format!("initial value {v} outside [0,1]")));
                }
                field.values[j * n + i] = v;
            }
        }
        Ok(field)
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn cells_per_side(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[j * self.n + i] = v;
    }

    /// Center of cell `(i, j)`.
    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) * self.h, (j as f64 + 0.5) * self.h)
    }

    /// Bilinear periodic interpolation at an arbitrary torus point.
    pub fn interp(&self, x: f64, y: f64) -> f64 {
        let n = self.n;
        let fx = (x / self.h - 0.5).rem_euclid(n as f64);
        let fy = (y / self.h - 0.5).rem_euclid(n as f64);
        let i0 = fx.floor() as usize % n;
        let j0 = fy.floor() as usize % n;
        let i1 = (i0 + 1) % n;
        let j1 = (j0 + 1) % n;
        let ax = fx - fx.floor();
        let ay = fy - fy.floor();
        let v00 = self.values[j0 * n + i0];
        let v10 = self.values[j0 * n + i1];
        let v01 = self.values[j1 * n + i0];
        let v11 = self.values[j1 * n + i1];
        (1.0 - ay) * ((1.0 - ax) * v00 + ax * v10) + ay * ((1.0 - ax) * v01 + ax * v11)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Largest absolute difference to another field on the same grid.
    pub fn sup_distance(&self, other: &ScalarField) -> f64 {
        assert_eq!(self.n, other.n, "grids differ");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Integer cell offsets whose centers lie within Euclidean distance 1,
/// weighted uniformly. The offset set is symmetric under all eight lattice
/// symmetries by construction, and averaging divides by the exact count so
/// the weights sum to one in exact arithmetic.
#[derive(Debug, Clone)]
pub struct DiskKernel {
    radius_cells: i64,
    /// Squared-cell-count limit: offsets satisfy di^2 + dj^2 <= limit.
    limit: i64,
    /// Half-width of each row: for dj in -r..=r, cells di in -w..=w belong.
    row_halfwidth: Vec<i64>,
    count: u64,
}

impl DiskKernel {
    /// Build the kernel for grid spacing `h` (interaction radius 1).
    pub fn for_spacing(h: f64) -> Result<Self> {
        if !(h > 0.0 && h <= 1.0) {
            return Err(Error::invalid(format!(
                "kernel spacing must lie in (0, 1], got {h}"
            )));
        }
        // Nudge before truncating so exact boundary cells stay included when
        // 1/h^2 is an integer up to roundoff.
        let limit = (1.0 / (h * h) + 1e-9).floor() as i64;
        let r = (limit as f64).sqrt().floor() as i64;
        let mut row_halfwidth = Vec::with_capacity((2 * r + 1) as usize);
        let mut count = 0u64;
        for dj in -r..=r {
            let rem = limit - dj * dj;
            let w = (rem as f64).sqrt().floor() as i64;
            // Guard against sqrt roundoff at perfect squares.
            let w = if (w + 1) * (w + 1) <= rem { w + 1 } else { w };
            row_halfwidth.push(w);
            count += (2 * w + 1) as u64;
        }
        Ok(Self { radius_cells: r, limit, row_halfwidth, count })
    }

    pub fn radius_cells(&self) -> i64 {
        self.radius_cells
    }

    /// Number of cells in the disk (the center cell included).
    pub fn count(&self) -> u64 {
        self.count
    }

    /// Uniform weight of each member cell.
    pub fn weight(&self) -> f64 {
        1.0 / self.count as f64
    }

    pub fn contains(&self, di: i64, dj: i64) -> bool {
        di * di + dj * dj <= self.limit
    }

    /// Column counts projected onto one axis: entry `w + di` is the number
    /// of rows the offset column `di` passes through. Used by the
    /// transverse-invariant one-dimensional reduction.
    pub fn projected_counts(&self) -> Vec<u64> {
        let r = self.radius_cells;
        let mut counts = vec![0u64; (2 * r + 1) as usize];
        for (row, &w) in self.row_halfwidth.iter().enumerate() {
            let _ = row;
            for di in -w..=w {
                counts[(di + r) as usize] += 1;
            }
        }
        counts
    }

    /// Disk average of a periodic field: `ubar(x) = mean of u over D(x, 1)`.
    ///
    /// Computed as `u(x) + mean(u(x+d) - K) - (u(x) - K)` with the global
    /// shift `K = u[0]`, so a constant field is reproduced bit-exactly; the
    /// result is clamped to [0,1] to absorb the last-digit roundoff.
    pub fn average(&self, u: &ScalarField) -> ScalarField {
        let n = u.n;
        let shift = u.values[0];
        // Per-row prefix sums of the shifted field; prefix[j][n] is the row total.
        let prefix: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let mut p = Vec::with_capacity(n + 1);
                p.push(0.0);
                let mut acc = 0.0;
                for i in 0..n {
                    acc += u.values[j * n + i] - shift;
                    p.push(acc);
                }
                p
            })
            .collect();

        let r = self.radius_cells;
        let count = self.count as f64;
        let mut out = u.clone();
        out.values
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(j, row_out)| {
                for (i, slot) in row_out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (k, &w) in self.row_halfwidth.iter().enumerate() {
                        let dj = k as i64 - r;
                        let row = &prefix[(j as i64 + dj).rem_euclid(n as i64) as usize];
                        acc += circular_window_sum(row, i as i64 - w, (2 * w + 1) as usize, n);
                    }
                    let center = u.values[j * n + i];
                    let avg = center + (acc - count * (center - shift)) / count;
                    *slot = avg.clamp(0.0, 1.0);
                }
            });
        out
    }
}

/// Sum of `len` consecutive entries of a circular row starting at `start`
/// (may be negative; windows longer than the row wrap and revisit cells).
fn circular_window_sum(prefix: &[f64], start: i64, len: usize, n: usize) -> f64 {
    let total = prefix[n];
    let full_wraps = (len / n) as f64;
    let rem = len % n;
    let mut acc = full_wraps * total;
    if rem > 0 {
        let s = start.rem_euclid(n as i64) as usize;
        let e = s + rem;
        if e <= n {
            acc += prefix[e] - prefix[s];
        } else {
            acc += (total - prefix[s]) + prefix[e - n];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_counts_match_enumeration() {
        for h in [0.5, 0.2, 0.1, 0.05, 0.07] {
            let k = DiskKernel::for_spacing(h).unwrap();
            // Direct enumeration oracle.
            let limit = (1.0 / (h * h) + 1e-9).floor() as i64;
            let r = 2 + (1.0 / h) as i64;
            let mut count = 0u64;
            for di in -r..=r {
                for dj in -r..=r {
                    if di * di + dj * dj <= limit {
                        count += 1;
                    }
                }
            }
            assert_eq!(k.count(), count, "h = {h}");
        }
    }

    #[test]
    fn kernel_is_symmetric() {
        let k = DiskKernel::for_spacing(0.1).unwrap();
        let r = k.radius_cells();
        for di in -r..=r {
            for dj in -r..=r {
                let c = k.contains(di, dj);
                assert_eq!(c, k.contains(-di, dj));
                assert_eq!(c, k.contains(di, -dj));
                assert_eq!(c, k.contains(dj, di));
            }
        }
    }

    #[test]
    fn average_preserves_constants_exactly() {
        let k = DiskKernel::for_spacing(0.05).unwrap();
        for c in [0.1, 0.3, 1.0 / 3.0, 0.9999] {
            let u = ScalarField::constant(4.0, 0.05, c).unwrap();
            let avg = k.average(&u);
            for v in avg.values {
                assert_eq!(v, c, "constant {c} not preserved");
            }
        }
    }

    #[test]
    fn average_of_impulse_reads_center_weight() {
        let k = DiskKernel::for_spacing(0.1).unwrap();
        let mut u = ScalarField::new(4.0, 0.1).unwrap();
        u.set(17, 23, 1.0);
        let avg = k.average(&u);
        assert!((avg.get(17, 23) - k.weight()).abs() < 1e-15);
        // Far away the impulse is invisible.
        assert_eq!(avg.get(0, 0), 0.0);
    }

    #[test]
    fn average_of_half_plane_near_half_at_interface() {
        let h = 0.05;
        let k = DiskKernel::for_spacing(h).unwrap();
        let u = ScalarField::from_fn(4.0, h, |x, _| if x < 2.0 { 1.0 } else { 0.0 }).unwrap();
        let avg = k.average(&u);
        let n = u.cells_per_side();
        // Last column of ones: i = n/2 - 1.
        let v = avg.get(n / 2 - 1, 7);
        assert!((v - 0.5).abs() <= h, "interface average {v}");
    }

    #[test]
    fn average_wraps_periodically() {
        let h = 0.1;
        let k = DiskKernel::for_spacing(h).unwrap();
        let u = ScalarField::from_fn(3.0, h, |x, _| if x < 0.5 { 0.8 } else { 0.1 }).unwrap();
        let avg = k.average(&u);
        let n = u.cells_per_side();
        // The stripe influences cells across the seam symmetrically: the
        // column just left of the seam equals its mirror right of the stripe.
        for j in 0..n {
            let left_of_seam = avg.get(n - 1, j);
            let mirror = avg.get(5, j);
            assert!((left_of_seam - mirror).abs() < 1e-12);
        }
    }

    #[test]
    fn small_torus_multiwrap_is_finite_and_bounded() {
        // Torus smaller than the kernel diameter: offsets revisit cells.
        let k = DiskKernel::for_spacing(0.05).unwrap();
        let u = ScalarField::from_fn(1.0, 0.05, |x, y| 0.5 + 0.4 * ((x + y) * 3.0).sin() * 0.5)
            .unwrap();
        let avg = k.average(&u);
        for v in avg.values {
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn rejects_non_divisible_side() {
        assert!(ScalarField::new(4.0, 0.3).is_err());
    }

    #[test]
    fn projected_counts_sum_to_disk() {
        let k = DiskKernel::for_spacing(0.05).unwrap();
        let total: u64 = k.projected_counts().iter().sum();
        assert_eq!(total, k.count());
    }
}
