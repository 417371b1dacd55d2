//! End-to-end heterogeneous experiments: partition the torus by the
//! coefficient ratio against the critical value, seed compliant initial
//! conditions, run the lattice, and score per-region densities and
//! boundary stability.

use crate::error::{Error, Result};
use crate::front::bistable_triple;
use crate::grid::{DiskKernel, ScalarField};
use crate::ide::Coefficients;
use crate::lattice::{InitialCondition, LatticeState, Snapshot};
use crate::meanfield;
use crate::rates::{BernsteinRate, HeterogeneityField};

/// Classification of a coarse cell by its coefficient ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionLabel {
    /// `a/b > theta1 + delta`: the occupied state is the invader.
    Forest,
    /// `a/b < theta1 - delta`: the vacant state is the invader.
    Grass,
    /// `|a/b - theta1| <= delta`: excluded from scoring.
    Band,
}

/// Connected component of one label.
#[derive(Debug, Clone)]
pub struct Component {
    pub id: usize,
    pub label: RegionLabel,
    pub cell_count: usize,
    /// Mean coefficient ratio over the component's cells.
    pub mean_ratio: f64,
}

/// Label, component id, and extracted boundary polylines on a coarse grid
/// over the torus.
#[derive(Debug, Clone)]
pub struct RegionMap {
    pub side: f64,
    pub resolution: usize,
    pub labels: Vec<RegionLabel>,
    /// Component id per cell; band cells carry `usize::MAX`.
    pub component_of: Vec<usize>,
    pub components: Vec<Component>,
    /// Polylines tracing `a/b = theta1`, in continental coordinates.
    pub boundaries: Vec<Vec<(f64, f64)>>,
}

impl RegionMap {
    pub fn label(&self, i: usize, j: usize) -> RegionLabel {
        self.labels[j * self.resolution + i]
    }

    /// Cell index containing a continental point.
    pub fn cell_of(&self, x: f64, y: f64) -> (usize, usize) {
        let n = self.resolution as f64;
        let i = ((x / self.side * n).floor() as i64).rem_euclid(self.resolution as i64) as usize;
        let j = ((y / self.side * n).floor() as i64).rem_euclid(self.resolution as i64) as usize;
        (i, j)
    }
}

/// Partition the torus of side `side` into forest/grass/band cells on a
/// `resolution^2` grid, extract 4-connected components (with wrap), and
/// trace the `a/b = theta1` level set.
pub fn region_partition(
    field: &HeterogeneityField,
    theta1: f64,
    delta: f64,
    resolution: usize,
    side: f64,
) -> Result<RegionMap> {
    if resolution < 2 {
        return Err(Error::invalid("region resolution must be at least 2"));
    }
    if !(delta >= 0.0) || !(theta1 > 0.0) {
        return Err(Error::invalid("need theta1 > 0 and delta >= 0"));
    }
    let n = resolution;
    let mut labels = Vec::with_capacity(n * n);
    let mut ratios = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let y = ((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64);
            let (a, b) = field.at(y);
            let ratio = a / b;
            ratios.push(ratio);
            labels.push(if ratio > theta1 + delta {
                RegionLabel::Forest
            } else if ratio < theta1 - delta {
                RegionLabel::Grass
            } else {
                RegionLabel::Band
            });
        }
    }

    // 4-connected components with torus wrap; band cells stay unassigned.
    let mut component_of = vec![usize::MAX; n * n];
    let mut components = Vec::new();
    for start in 0..n * n {
        if labels[start] == RegionLabel::Band || component_of[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        let label = labels[start];
        let mut stack = vec![start];
        component_of[start] = id;
        let mut cells = 0usize;
        let mut ratio_sum = 0.0;
        while let Some(idx) = stack.pop() {
            cells += 1;
            ratio_sum += ratios[idx];
            let (i, j) = (idx % n, idx / n);
            for (di, dj) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
                let ni = (i as i64 + di).rem_euclid(n as i64) as usize;
                let nj = (j as i64 + dj).rem_euclid(n as i64) as usize;
                let nidx = nj * n + ni;
                if labels[nidx] == label && component_of[nidx] == usize::MAX {
                    component_of[nidx] = id;
                    stack.push(nidx);
                }
            }
        }
        components.push(Component {
            id,
            label,
            cell_count: cells,
            mean_ratio: ratio_sum / cells as f64,
        });
    }

    let boundaries = trace_level_set(&ratios, n, side, theta1);
    Ok(RegionMap { side, resolution: n, labels, component_of, components, boundaries })
}

/// Marching squares over the periodic cell-center grid: segments of the
/// level set `value = level`, chained into polylines.
pub(crate) fn trace_level_set(
    values: &[f64],
    n: usize,
    side: f64,
    level: f64,
) -> Vec<Vec<(f64, f64)>> {
    let h = side / n as f64;
    let at = |i: usize, j: usize| values[(j % n) * n + (i % n)];
    let center = |i: usize| (i as f64 + 0.5) * h;
    let key = |p: (f64, f64)| -> (i64, i64) {
        ((p.0 / side * 1e7).round() as i64, (p.1 / side * 1e7).round() as i64)
    };

    let mut segments: Vec<((f64, f64), (f64, f64))> = Vec::new();
    for j in 0..n {
        for i in 0..n {
            // Dual cell with corners at the centers of (i,j), (i+1,j),
            // (i+1,j+1), (i,j+1).
            let v = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            let code = v.iter().enumerate().fold(0usize, |acc, (k, x)| {
                acc | (usize::from(*x > level) << k)
            });
            if code == 0 || code == 15 {
                continue;
            }
            let x0 = center(i);
            let y0 = center(j);
            let lerp = |a: f64, b: f64| ((level - a) / (b - a)).clamp(0.0, 1.0);
            // Edges: 0 bottom, 1 right, 2 top, 3 left.
            let edge_point = |e: usize| -> (f64, f64) {
                match e {
                    0 => (x0 + h * lerp(v[0], v[1]), y0),
                    1 => (x0 + h, y0 + h * lerp(v[1], v[2])),
                    2 => (x0 + h * lerp(v[3], v[2]), y0 + h),
                    _ => (x0, y0 + h * lerp(v[0], v[3])),
                }
            };
            let wrap = |p: (f64, f64)| (p.0.rem_euclid(side), p.1.rem_euclid(side));
            let mut emit = |e1: usize, e2: usize| {
                segments.push((wrap(edge_point(e1)), wrap(edge_point(e2))));
            };
            match code {
                1 => emit(3, 0),
                2 => emit(0, 1),
                3 => emit(3, 1),
                4 => emit(1, 2),
                5 => {
                    if 0.25 * (v[0] + v[1] + v[2] + v[3]) > level {
                        emit(3, 2);
                        emit(0, 1);
                    } else {
                        emit(3, 0);
                        emit(1, 2);
                    }
                }
                6 => emit(0, 2),
                7 => emit(3, 2),
                8 => emit(2, 3),
                9 => emit(0, 2),
                10 => {
                    if 0.25 * (v[0] + v[1] + v[2] + v[3]) > level {
                        emit(0, 3);
                        emit(1, 2);
                    } else {
                        emit(0, 1);
                        emit(2, 3);
                    }
                }
                11 => emit(1, 2),
                12 => emit(1, 3),
                13 => emit(0, 1),
                14 => emit(0, 3),
                _ => {}
            }
        }
    }

    // Chain segments into polylines by endpoint matching.
    let mut adjacency: std::collections::HashMap<(i64, i64), Vec<usize>> =
        std::collections::HashMap::new();
    for (idx, (a, b)) in segments.iter().enumerate() {
        adjacency.entry(key(*a)).or_default().push(idx);
        adjacency.entry(key(*b)).or_default().push(idx);
    }
    let mut used = vec![false; segments.len()];
    let mut polylines = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (a, b) = segments[start];
        let mut line = vec![a, b];
        for dir in 0..2 {
            loop {
                let end = *line.last().unwrap();
                let Some(cands) = adjacency.get(&key(end)) else { break };
                let Some(idx) = cands.iter().find(|i| !used[**i]).copied() else { break };
                used[idx] = true;
                let (p, q) = segments[idx];
                line.push(if key(p) == key(end) { q } else { p });
            }
            if dir == 0 {
                line.reverse();
            }
        }
        polylines.push(line);
    }
    polylines
}

/// Seeding densities and square sizes for the compliant initial condition.
#[derive(Debug, Clone)]
pub struct SeedSpec {
    /// Bernoulli density on the forest seed squares (kept above the
    /// threshold state of every forest region).
    pub forest_density: f64,
    /// Bernoulli density on the grass seed squares.
    pub grass_density: f64,
    /// Forest square half-width in continental units.
    pub forest_half_width: f64,
    /// Grass square half-width.
    pub grass_half_width: f64,
    /// Bernoulli density everywhere else.
    pub background: f64,
}

/// Where a component's seed square landed.
#[derive(Debug, Clone)]
pub struct PlacedSeed {
    pub component: usize,
    pub center: (f64, f64),
    pub half_width: f64,
}

#[derive(Debug, Clone)]
pub struct SeededInitial {
    /// Per-site success probabilities for the product initial measure.
    pub profile: ScalarField,
    pub placed: Vec<PlacedSeed>,
}

/// Build the seeded initial condition: one square per forest component at
/// `forest_density`, one per grass component at `grass_density`, Bernoulli
/// background elsewhere. A component too small to contain its square is an
/// error naming the component.
pub fn build_h3_initial(regions: &RegionMap, spec: &SeedSpec) -> Result<SeededInitial> {
    let n = regions.resolution;
    let cell = regions.side / n as f64;
    let mut profile = ScalarField::from_fn(regions.side, cell, |_, _| spec.background)?;
    let mut placed = Vec::new();

    for comp in &regions.components {
        let (density, half_width) = match comp.label {
            RegionLabel::Forest => (spec.forest_density, spec.forest_half_width),
            RegionLabel::Grass => (spec.grass_density, spec.grass_half_width),
            RegionLabel::Band => continue,
        };
        let span = (2.0 * half_width / cell).ceil() as usize;
        if span == 0 || span > n {
            return Err(Error::invalid(format!(
                "component {} cannot host a seed square of side {}",
                comp.id,
                2.0 * half_width
            )));
        }
        let mut found = None;
        'search: for j0 in 0..n {
            'pos: for i0 in 0..n {
                for dj in 0..span {
                    for di in 0..span {
                        let idx = ((j0 + dj) % n) * n + (i0 + di) % n;
                        if regions.component_of[idx] != comp.id {
                            continue 'pos;
                        }
                    }
                }
                found = Some((i0, j0));
                break 'search;
            }
        }
        let Some((i0, j0)) = found else {
            return Err(Error::invalid(format!(
                "component {} ({} cells, {:?}) has no inscribed square of side {}",
                comp.id,
                comp.cell_count,
                comp.label,
                2.0 * half_width
            )));
        };
        for dj in 0..span {
            for di in 0..span {
                profile.set((i0 + di) % n, (j0 + dj) % n, density);
            }
        }
        placed.push(PlacedSeed {
            component: comp.id,
            center: (
                ((i0 as f64 + span as f64 / 2.0) * cell).rem_euclid(regions.side),
                ((j0 as f64 + span as f64 / 2.0) * cell).rem_euclid(regions.side),
            ),
            half_width,
        });
    }
    Ok(SeededInitial { profile, placed })
}

/// Density target for one scored component.
#[derive(Debug, Clone)]
pub struct RegionTarget {
    pub component: usize,
    pub label: RegionLabel,
    /// Upper attracting state for forest components (0 for grass).
    pub v2: f64,
}

/// Attracting states per component from the mean-field flow at the
/// component's mean ratio.
pub fn region_targets(
    regions: &RegionMap,
    g: &BernsteinRate,
    h: &BernsteinRate,
) -> Result<Vec<RegionTarget>> {
    let mut out = Vec::new();
    for comp in &regions.components {
        let v2 = match comp.label {
            RegionLabel::Forest => {
                let report = meanfield::fixed_points(g, h, comp.mean_ratio, 1.0)?;
                match bistable_triple(&report) {
                    Some((_, _, high)) => high,
                    None => report
                        .points
                        .iter()
                        .rev()
                        .find(|p| p.stability == meanfield::Stability::Stable)
                        .map(|p| p.u)
                        .unwrap_or(1.0),
                }
            }
            _ => 0.0,
        };
        out.push(RegionTarget { component: comp.id, label: comp.label, v2 });
    }
    Ok(out)
}

/// Per-component occupied fractions at the sampled times plus pass/fail.
#[derive(Debug, Clone)]
pub struct HeteroReport {
    pub times: Vec<f64>,
    pub targets: Vec<RegionTarget>,
    /// `fractions[k][c]`: occupied fraction of component `c` at time `k`.
    pub fractions: Vec<Vec<f64>>,
    pub pass: bool,
    pub violations: Vec<String>,
}

/// Score snapshots against the region targets: forest components within
/// `eps` of their upper state, grass components at or below `eps`, at
/// every sampled time. Band cells are not scored.
pub fn score_snapshots(
    snapshots: &[Snapshot],
    dispersal: u32,
    regions: &RegionMap,
    targets: &[RegionTarget],
    eps: f64,
) -> HeteroReport {
    let n_comp = regions.components.len();
    let mut times = Vec::with_capacity(snapshots.len());
    let mut fractions = Vec::with_capacity(snapshots.len());
    let mut violations = Vec::new();
    let mut pass = true;

    for snap in snapshots {
        times.push(snap.time);
        let mut occ = vec![0u64; n_comp];
        let mut tot = vec![0u64; n_comp];
        let sites = snap.sites_per_side();
        for j in 0..sites {
            for i in 0..sites {
                let (ci, cj) =
                    regions.cell_of(i as f64 / dispersal as f64, j as f64 / dispersal as f64);
                let comp = regions.component_of[cj * regions.resolution + ci];
                if comp == usize::MAX {
                    continue;
                }
                tot[comp] += 1;
                if snap.get(i, j) {
                    occ[comp] += 1;
                }
            }
        }
        let fracs: Vec<f64> = occ
            .iter()
            .zip(&tot)
            .map(|(o, t)| if *t == 0 { 0.0 } else { *o as f64 / *t as f64 })
            .collect();
        for target in targets {
            let f = fracs[target.component];
            match target.label {
                RegionLabel::Forest => {
                    if (f - target.v2).abs() > eps {
                        pass = false;
                        violations.push(format!(
                            "t = {:.2}: forest component {} at {:.3}, target {:.3} +- {eps}",
                            snap.time, target.component, f, target.v2
                        ));
                    }
                }
                RegionLabel::Grass => {
                    if f > eps {
                        pass = false;
                        violations.push(format!(
                            "t = {:.2}: grass component {} at {:.3} > {eps}",
                            snap.time, target.component, f
                        ));
                    }
                }
                RegionLabel::Band => {}
            }
        }
        fractions.push(fracs);
    }
    HeteroReport { times, targets: targets.to_vec(), fractions, pass, violations }
}

/// Full heterogeneous pipeline for one seed: partition, seed, simulate,
/// score. Returns the report, the snapshots (for boundary analysis), and
/// the region map.
#[allow(clippy::too_many_arguments)]
pub fn run_hetero(
    field: &HeterogeneityField,
    g: &BernsteinRate,
    h: &BernsteinRate,
    dispersal: u32,
    side_units: u32,
    theta1: f64,
    delta: f64,
    seed_spec: &SeedSpec,
    eps: f64,
    t0: f64,
    t_cap: f64,
    samples: usize,
    resolution: usize,
    seed: u64,
) -> Result<(HeteroReport, Vec<Snapshot>, RegionMap)> {
    if !(t_cap > t0) {
        return Err(Error::invalid("need t_cap > t0"));
    }
    let regions = region_partition(field, theta1, delta, resolution, side_units as f64)?;
    let seeded = build_h3_initial(&regions, seed_spec)?;
    let targets = region_targets(&regions, g, h)?;
    let coeffs = Coefficients::Field(field.clone());
    let mut st = LatticeState::new(
        dispersal,
        side_units,
        g.clone(),
        h.clone(),
        &coeffs,
        &InitialCondition::Profile(seeded.profile),
        seed,
    )?;
    let times: Vec<f64> = (0..samples)
        .map(|k| t0 + (t_cap - t0) * k as f64 / (samples.max(2) - 1) as f64)
        .collect();
    let snaps = st.run(t_cap, &times)?;
    let report = score_snapshots(&snaps, dispersal, &regions, &targets, eps);
    Ok((report, snaps, regions))
}

/// Interface displacement of a snapshot sequence against the predicted
/// region boundaries.
#[derive(Debug, Clone)]
pub struct BoundarySeries {
    pub times: Vec<f64>,
    /// Symmetric Hausdorff distance between the empirical interface and
    /// the predicted boundary; `None` when no interface exists.
    pub hausdorff: Vec<Option<f64>>,
    /// Mean distance of empirical interface points to the prediction.
    pub mean_displacement: Vec<Option<f64>>,
    /// Least-squares slope of the mean displacement over `t >= t0`.
    pub drift_slope: Option<f64>,
    pub drift_se: Option<f64>,
    /// |slope| within two standard errors of zero.
    pub no_drift: bool,
    /// Every post-`t0` Hausdorff distance inside the allowed band.
    pub within_band: bool,
}

pub(crate) fn torus_dist(a: (f64, f64), b: (f64, f64), side: f64) -> f64 {
    let dx = (a.0 - b.0).rem_euclid(side);
    let dy = (a.1 - b.1).rem_euclid(side);
    let dx = dx.min(side - dx);
    let dy = dy.min(side - dy);
    (dx * dx + dy * dy).sqrt()
}

fn point_set_stats(a: &[(f64, f64)], b: &[(f64, f64)], side: f64) -> (f64, f64) {
    let nearest = |p: (f64, f64), set: &[(f64, f64)]| -> f64 {
        set.iter().map(|q| torus_dist(p, *q, side)).fold(f64::INFINITY, f64::min)
    };
    let d_ab: Vec<f64> = a.iter().map(|p| nearest(*p, b)).collect();
    let d_ba: Vec<f64> = b.iter().map(|p| nearest(*p, a)).collect();
    let hausdorff = d_ab
        .iter()
        .chain(&d_ba)
        .fold(0.0_f64, |acc, d| acc.max(*d));
    let mean = d_ab.iter().sum::<f64>() / d_ab.len() as f64;
    (hausdorff, mean)
}

fn polyline_points(lines: &[Vec<(f64, f64)>]) -> Vec<(f64, f64)> {
    lines.iter().flatten().copied().collect()
}

/// Track the empirical interface of lattice snapshots — the disk-smoothed
/// density's crossing of `level` — against the predicted boundary. `band`
/// is the allowed Hausdorff distance after the transient.
pub fn boundary_stability(
    snapshots: &[Snapshot],
    dispersal: u32,
    regions: &RegionMap,
    level: f64,
    t0: f64,
    band: f64,
) -> Result<BoundarySeries> {
    if regions.boundaries.is_empty() {
        return Err(Error::runtime("no boundary: the partition has a single region"));
    }
    let predicted_full = polyline_points(&regions.boundaries);
    let pstep = (predicted_full.len() / 400).max(1);
    let predicted: Vec<_> = predicted_full.into_iter().step_by(pstep).collect();
    let spacing = 1.0 / dispersal as f64;
    let kernel = DiskKernel::for_spacing(spacing)?;

    let mut times = Vec::new();
    let mut hausdorff = Vec::new();
    let mut mean_disp = Vec::new();
    for snap in snapshots {
        let n = snap.sites_per_side();
        let mut density = ScalarField::new(regions.side, spacing)?;
        for j in 0..n {
            for i in 0..n {
                density.set(i, j, f64::from(u8::from(snap.get(i, j))));
            }
        }
        let smoothed = kernel.average(&density);
        let lines = trace_level_set(&smoothed.values, n, regions.side, level);
        let pts = polyline_points(&lines);
        times.push(snap.time);
        if pts.is_empty() {
            hausdorff.push(None);
            mean_disp.push(None);
        } else {
            let step = (pts.len() / 400).max(1);
            let pts: Vec<_> = pts.into_iter().step_by(step).collect();
            let (hd, mean) = point_set_stats(&pts, &predicted, regions.side);
            hausdorff.push(Some(hd));
            mean_disp.push(Some(mean));
        }
    }

    let samples: Vec<(f64, f64)> = times
        .iter()
        .zip(&mean_disp)
        .filter_map(|(t, d)| d.map(|d| (*t, d)))
        .filter(|(t, _)| *t >= t0)
        .collect();
    let (drift_slope, drift_se) = if samples.len() >= 3 {
        let n = samples.len() as f64;
        let mt = samples.iter().map(|p| p.0).sum::<f64>() / n;
        let md = samples.iter().map(|p| p.1).sum::<f64>() / n;
        let mut cov = 0.0;
        let mut var = 0.0;
        for (t, d) in &samples {
            cov += (t - mt) * (d - md);
            var += (t - mt) * (t - mt);
        }
        let slope = cov / var;
        let mut sse = 0.0;
        for (t, d) in &samples {
            let fit = md + slope * (t - mt);
            sse += (d - fit) * (d - fit);
        }
        let se = (sse / (n - 2.0).max(1.0) / var).sqrt();
        (Some(slope), Some(se))
    } else {
        (None, None)
    };
    let no_drift = match (drift_slope, drift_se) {
        (Some(s), Some(se)) => s.abs() <= 2.0 * se.max(1e-12),
        _ => false,
    };
    let within_band = times
        .iter()
        .zip(&hausdorff)
        .filter(|(t, _)| **t >= t0)
        .all(|(_, h)| h.map(|h| h <= band).unwrap_or(false));

    Ok(BoundarySeries {
        times,
        hausdorff,
        mean_displacement: mean_disp,
        drift_slope,
        drift_se,
        no_drift,
        within_band,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_forest_field_is_one_component() {
        let f = HeterogeneityField::constant(10.0, 1.0).unwrap();
        let map = region_partition(&f, 6.5, 0.3, 16, 4.0).unwrap();
        assert_eq!(map.components.len(), 1);
        assert_eq!(map.components[0].label, RegionLabel::Forest);
        assert_eq!(map.components[0].cell_count, 16 * 16);
        assert!(map.boundaries.is_empty());
    }

    #[test]
    fn two_stripe_field_has_two_components_and_two_seams() {
        let f = HeterogeneityField::two_stripe(16, (3.0, 1.0), (13.0, 1.0)).unwrap();
        let map = region_partition(&f, 6.5, 0.5, 32, 4.0).unwrap();
        let forest = map.components.iter().filter(|c| c.label == RegionLabel::Forest).count();
        let grass = map.components.iter().filter(|c| c.label == RegionLabel::Grass).count();
        assert_eq!((forest, grass), (1, 1), "components: {:?}", map.components);
        assert_eq!(map.boundaries.len(), 2, "expected two seam boundaries");
    }

    #[test]
    fn radial_bump_gives_one_closed_boundary() {
        let n = 24;
        let mut a = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                let x = (i as f64 + 0.5) / n as f64 - 0.5;
                let y = (j as f64 + 0.5) / n as f64 - 0.5;
                a.push(3.0 + 10.0 * (-(x * x + y * y) * 20.0).exp());
            }
        }
        let f = HeterogeneityField::from_samples(n, a, vec![1.0; n * n]).unwrap();
        let map = region_partition(&f, 6.5, 0.3, 48, 4.0).unwrap();
        assert_eq!(map.boundaries.len(), 1, "expected one closed curve");
        let line = &map.boundaries[0];
        let first = line.first().unwrap();
        let last = line.last().unwrap();
        assert!(torus_dist(*first, *last, 4.0) < 1e-6, "curve not closed");
    }

    #[test]
    fn labels_depend_on_ratio_only() {
        let f1 = HeterogeneityField::two_stripe(8, (3.0, 1.0), (13.0, 1.0)).unwrap();
        let f2 = HeterogeneityField::two_stripe(8, (9.0, 3.0), (39.0, 3.0)).unwrap();
        let m1 = region_partition(&f1, 6.5, 0.3, 16, 4.0).unwrap();
        let m2 = region_partition(&f2, 6.5, 0.3, 16, 4.0).unwrap();
        assert_eq!(m1.labels, m2.labels);
    }

    #[test]
    fn band_regions_nest_with_delta() {
        let f = HeterogeneityField::gradient(16, 2.0, 12.0, 1.0).unwrap();
        let narrow = region_partition(&f, 6.5, 0.2, 32, 4.0).unwrap();
        let wide = region_partition(&f, 6.5, 1.0, 32, 4.0).unwrap();
        for (a, b) in narrow.labels.iter().zip(&wide.labels) {
            if *b == RegionLabel::Forest {
                assert_eq!(*a, RegionLabel::Forest, "forest(delta') not nested");
            }
            if *b == RegionLabel::Grass {
                assert_eq!(*a, RegionLabel::Grass, "grass(delta') not nested");
            }
        }
    }

    #[test]
    fn seed_placement_and_too_small_component() {
        let f = HeterogeneityField::two_stripe(16, (3.0, 1.0), (13.0, 1.0)).unwrap();
        let map = region_partition(&f, 6.5, 0.5, 32, 4.0).unwrap();
        let spec = SeedSpec {
            forest_density: 0.9,
            grass_density: 0.0,
            forest_half_width: 0.5,
            grass_half_width: 0.5,
            background: 0.0,
        };
        let seeded = build_h3_initial(&map, &spec).unwrap();
        assert_eq!(seeded.placed.len(), 2);

        // A square wider than the stripe cannot fit.
        let too_big = SeedSpec { forest_half_width: 1.5, ..spec };
        let err = build_h3_initial(&map, &too_big).unwrap_err();
        assert!(err.to_string().contains("component"), "{err}");
    }

    #[test]
    fn homogeneous_field_reports_no_boundary() {
        let f = HeterogeneityField::constant(10.0, 1.0).unwrap();
        let map = region_partition(&f, 6.5, 0.3, 16, 2.0).unwrap();
        let snaps: Vec<Snapshot> = Vec::new();
        let err = boundary_stability(&snaps, 10, &map, 0.5, 0.0, 2.0).unwrap_err();
        assert!(err.to_string().contains("no boundary"), "{err}");
    }
}
