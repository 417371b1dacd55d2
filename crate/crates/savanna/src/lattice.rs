//! Exact event-driven simulation of the two-type lattice model on the
//! two-scale torus: `(LM)^2` sites at spacing `1/L`, coefficients varying
//! on the continental scale `M`.
//!
//! Every site carries two constant-rate clocks, `lambda_G A(x)` for birth
//! attempts and `lambda_H B(x)` for death attempts. When a clock fires the
//! sampler draws `J` (resp. `K`) distinct neighbors from the dispersal
//! disk, counts how many are in the triggering state, and flips the site
//! with the mixture's acceptance probability — provided the site is in the
//! flippable state. Clock rates never depend on the configuration, so the
//! total event rate is constant, site selection is a static alias-table
//! draw, and each event costs O(J) work regardless of the disk size.

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::ide::Coefficients;
use crate::rates::BernsteinRate;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Hard cap on the site count; larger requests are rejected with a sizing
/// hint instead of exhausting memory.
pub const MAX_SITES: usize = 1 << 26;

/// Integer site offsets of the dispersal disk: `0 < dx^2 + dy^2 <= L^2`.
#[derive(Debug, Clone)]
pub struct NeighborOffsets {
    offsets: Vec<(i32, i32)>,
}

impl NeighborOffsets {
    pub fn offsets(&self) -> &[(i32, i32)] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }
}

/// Enumerate the dispersal-disk offsets for scale `L` (origin excluded).
pub fn build_neighborhood(dispersal: u32) -> NeighborOffsets {
    let l = dispersal as i64;
    let r2 = l * l;
    let mut offsets = Vec::new();
    for dy in -l..=l {
        for dx in -l..=l {
            let d2 = dx * dx + dy * dy;
            if d2 > 0 && d2 <= r2 {
                offsets.push((dx as i32, dy as i32));
            }
        }
    }
    NeighborOffsets { offsets }
}

/// Initial occupancy specification.
#[derive(Debug, Clone)]
pub enum InitialCondition {
    /// Independent Bernoulli(p) at every site.
    Bernoulli(f64),
    /// Bernoulli(inside) on the square `center + (-half_width, half_width)^2`
    /// (continental units), Bernoulli(outside) elsewhere.
    Plateau { inside: f64, outside: f64, center: (f64, f64), half_width: f64 },
    /// Independent Bernoulli with per-site probability interpolated from a
    /// continental-scale profile.
    Profile(ScalarField),
    /// Explicit occupancy bits, row-major, length `(LM)^2`.
    Bits(Vec<bool>),
}

/// One saved configuration: a packed bitmap plus its time stamp.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    n: usize,
    bits: Vec<u64>,
}

impl Snapshot {
    pub fn sites_per_side(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        let idx = j * self.n + i;
        self.bits[idx >> 6] >> (idx & 63) & 1 == 1
    }

    pub fn occupied(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn density(&self) -> f64 {
        self.occupied() as f64 / (self.n * self.n) as f64
    }

    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    /// Occupied fraction over an axis-aligned site rectangle (wrapping).
    pub fn density_in(&self, i0: i64, j0: i64, w: usize, h: usize) -> f64 {
        let n = self.n as i64;
        let mut count = 0u64;
        for dj in 0..h as i64 {
            let j = (j0 + dj).rem_euclid(n) as usize;
            for di in 0..w as i64 {
                let i = (i0 + di).rem_euclid(n) as usize;
                if self.get(i, j) {
                    count += 1;
                }
            }
        }
        count as f64 / (w * h) as f64
    }
}

/// Per-tile occupied fractions on the coarse grid used for hydrodynamic
/// comparisons and block renormalization.
#[derive(Debug, Clone)]
pub struct CoarseDensity {
    pub gamma: f64,
    /// Tile side in sites.
    pub tile_sites: usize,
    pub tiles_per_side: usize,
    /// Row-major tile fractions.
    pub fractions: Vec<f64>,
    /// True when the tile side had to be snapped away from
    /// `round(L^(1-gamma))` to divide the torus side.
    pub snapped: bool,
}

impl CoarseDensity {
    pub fn fraction(&self, ti: usize, tj: usize) -> f64 {
        self.fractions[tj * self.tiles_per_side + ti]
    }
}

/// Static alias table for O(1) discrete sampling with fixed weights.
struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<u32>,
}

impl AliasTable {
    fn new(weights: &[f64]) -> Self {
        let n = weights.len();
        let total: f64 = weights.iter().sum();
        let scale = n as f64 / total;
        let mut prob: Vec<f64> = weights.iter().map(|w| w * scale).collect();
        let mut alias = vec![0u32; n];
        let mut small: Vec<u32> = Vec::new();
        let mut large: Vec<u32> = Vec::new();
        for (i, p) in prob.iter().enumerate() {
            if *p < 1.0 {
                small.push(i as u32);
            } else {
                large.push(i as u32);
            }
        }
        while let (Some(s), Some(l)) = (small.last().copied(), large.last().copied()) {
            small.pop();
            alias[s as usize] = l;
            prob[l as usize] -= 1.0 - prob[s as usize];
            if prob[l as usize] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Whatever remains in either list has probability 1 up to roundoff.
        Self { prob, alias }
    }

    #[inline]
    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let i = rng.gen_range(0..self.prob.len());
        if rng.gen::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i] as usize
        }
    }
}

impl std::fmt::Debug for LatticeState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LatticeState")
            .field("dispersal", &self.dispersal)
            .field("side_units", &self.side_units)
            .field("time", &self.time)
            .field("events", &self.events)
            .field("flips", &self.flips)
            .field("seed", &self.seed)
            .finish_non_exhaustive()
    }
}

enum SiteRates {
    /// One clock pair shared by every site.
    Homogeneous { birth: f64, death: f64 },
    /// Per-site clock pairs with a static alias table for selection.
    PerSite { birth: Vec<f64>, death: Vec<f64>, table: AliasTable },
}

/// Occupancy of the fine torus plus everything the event loop needs.
pub struct LatticeState {
    dispersal: u32,
    side_units: u32,
    n: usize,
    bits: Vec<u64>,
    occupied: u64,
    rates: SiteRates,
    total_rate: f64,
    neighborhood: NeighborOffsets,
    /// Partial Fisher-Yates arena over neighborhood indices.
    arena: Vec<u32>,
    g: BernsteinRate,
    h: BernsteinRate,
    time: f64,
    pending_jump: Option<f64>,
    events: u64,
    flips: u64,
    seed: u64,
    rng: ChaCha8Rng,
}

impl LatticeState {
    pub fn new(
        dispersal: u32,
        side_units: u32,
        g: BernsteinRate,
        h: BernsteinRate,
        coeffs: &Coefficients,
        init: &InitialCondition,
        seed: u64,
    ) -> Result<Self> {
        if dispersal < 1 || side_units < 1 {
            return Err(Error::invalid("dispersal scale and torus side must be at least 1"));
        }
        let n = dispersal as usize * side_units as usize;
        let sites = n * n;
        if sites > MAX_SITES {
            return Err(Error::invalid(format!(
                "{n}x{n} sites exceed the {MAX_SITES}-site cap; keep L*M at or below {}",
                (MAX_SITES as f64).sqrt() as usize
            )));
        }
        let neighborhood = build_neighborhood(dispersal);
        if g.degree() > neighborhood.len() || h.degree() > neighborhood.len() {
            return Err(Error::invalid(format!(
                "mixture degree {} exceeds the {}-site dispersal disk; increase L",
                g.degree().max(h.degree()),
                neighborhood.len()
            )));
        }

        let scale = (dispersal as f64) * (side_units as f64);
        let rates = match coeffs {
            Coefficients::Constant { a, b } => {
                SiteRates::Homogeneous { birth: g.lambda() * a, death: h.lambda() * b }
            }
            Coefficients::Field(field) => {
                let mut birth = Vec::with_capacity(sites);
                let mut death = Vec::with_capacity(sites);
                for j in 0..n {
                    for i in 0..n {
                        let (a, b) = field.at((i as f64 / scale, j as f64 / scale));
                        birth.push(g.lambda() * a);
                        death.push(h.lambda() * b);
                    }
                }
                let weights: Vec<f64> = birth.iter().zip(&death).map(|(b, d)| b + d).collect();
                let table = AliasTable::new(&weights);
                SiteRates::PerSite { birth, death, table }
            }
        };

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bits = vec![0u64; sites.div_ceil(64)];
        let mut occupied = 0u64;
        {
            let mut set = |bits: &mut Vec<u64>, idx: usize| {
                bits[idx >> 6] |= 1 << (idx & 63);
                occupied += 1;
            };
            match init {
                InitialCondition::Bernoulli(p) => {
                    if !(0.0..=1.0).contains(p) {
                        return Err(Error::invalid(format!("Bernoulli({p}) outside [0,1]")));
                    }
                    for idx in 0..sites {
                        if rng.gen::<f64>() < *p {
                            set(&mut bits, idx);
                        }
                    }
                }
                InitialCondition::Plateau { inside, outside, center, half_width } => {
                    for v in [inside, outside] {
                        if !(0.0..=1.0).contains(v) {
                            return Err(Error::invalid(format!(
                                "plateau density {v} outside [0,1]"
                            )));
                        }
                    }
                    let m = side_units as f64;
                    for j in 0..n {
                        for i in 0..n {
                            let x = i as f64 / dispersal as f64;
                            let y = j as f64 / dispersal as f64;
                            let dx = wrap_dist(x - center.0, m);
                            let dy = wrap_dist(y - center.1, m);
                            let p = if dx.abs() < *half_width && dy.abs() < *half_width {
                                *inside
                            } else {
                                *outside
                            };
                            if rng.gen::<f64>() < p {
                                set(&mut bits, j * n + i);
                            }
                        }
                    }
                }
                InitialCondition::Profile(profile) => {
                    for j in 0..n {
                        for i in 0..n {
                            let p = profile
                                .interp(i as f64 / dispersal as f64, j as f64 / dispersal as f64)
                                .clamp(0.0, 1.0);
                            if rng.gen::<f64>() < p {
                                set(&mut bits, j * n + i);
                            }
                        }
                    }
                }
                InitialCondition::Bits(list) => {
                    if list.len() != sites {
                        return Err(Error::invalid(format!(
                            "bitmap has {} sites, lattice needs {sites}",
                            list.len()
                        )));
                    }
                    for (idx, &b) in list.iter().enumerate() {
                        if b {
                            set(&mut bits, idx);
                        }
                    }
                }
            }
        }

        let total_rate = match &rates {
            SiteRates::Homogeneous { birth, death } => (birth + death) * sites as f64,
            SiteRates::PerSite { birth, death, .. } => {
                birth.iter().sum::<f64>() + death.iter().sum::<f64>()
            }
        };
        let arena: Vec<u32> = (0..neighborhood.len() as u32).collect();
        Ok(Self {
            dispersal,
            side_units,
            n,
            bits,
            occupied,
            rates,
            total_rate,
            neighborhood,
            arena,
            g,
            h,
            time: 0.0,
            pending_jump: None,
            events: 0,
            flips: 0,
            seed,
            rng,
        })
    }

    pub fn dispersal(&self) -> u32 {
        self.dispersal
    }

    pub fn side_units(&self) -> u32 {
        self.side_units
    }

    pub fn sites_per_side(&self) -> usize {
        self.n
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn flips(&self) -> u64 {
        self.flips
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn density(&self) -> f64 {
        self.occupied as f64 / (self.n * self.n) as f64
    }

    /// Incrementally maintained total clock rate.
    pub fn total_rate(&self) -> f64 {
        self.total_rate
    }

    /// Total clock rate resummed from scratch.
    pub fn recompute_total_rate(&self) -> f64 {
        match &self.rates {
            SiteRates::Homogeneous { birth, death } => (birth + death) * (self.n * self.n) as f64,
            SiteRates::PerSite { birth, death, .. } => {
                birth.iter().sum::<f64>() + death.iter().sum::<f64>()
            }
        }
    }

    #[inline]
    fn is_occupied(&self, idx: usize) -> bool {
        self.bits[idx >> 6] >> (idx & 63) & 1 == 1
    }

    #[inline]
    fn wrap(&self, v: i64) -> usize {
        v.rem_euclid(self.n as i64) as usize
    }

    /// Count how many of `draws` distinct random neighbors of `(i, j)` are
    /// in state `target`. Distinctness comes from a partial Fisher-Yates
    /// pass over the offset arena; the arena is left permuted, which does
    /// not bias later draws.
    #[inline]
    fn sample_neighbors(&mut self, i: usize, j: usize, draws: usize, target: bool) -> usize {
        let len = self.arena.len();
        let mut hits = 0;
        for t in 0..draws {
            let r = self.rng.gen_range(t..len);
            self.arena.swap(t, r);
            let (dx, dy) = self.neighborhood.offsets[self.arena[t] as usize];
            let ni = self.wrap(i as i64 + dx as i64);
            let nj = self.wrap(j as i64 + dy as i64);
            if self.is_occupied(nj * self.n + ni) == target {
                hits += 1;
            }
        }
        hits
    }

    fn next_jump(&mut self) -> f64 {
        if self.pending_jump.is_none() {
            // 1 - U lies in (0, 1], keeping the log finite.
            let u: f64 = self.rng.gen();
            self.pending_jump = Some(self.time + -(1.0 - u).ln() / self.total_rate);
        }
        self.pending_jump.unwrap()
    }

    /// Advance by exactly one clock firing.
    pub fn step(&mut self) {
        self.time = self.next_jump();
        self.pending_jump = None;
        self.events += 1;
        self.fire_event();
    }

    fn fire_event(&mut self) {
        let sites = self.n * self.n;
        let (idx, birth_clock) = match &self.rates {
            SiteRates::Homogeneous { birth, death } => {
                let idx = self.rng.gen_range(0..sites);
                let p_birth = birth / (birth + death);
                (idx, self.rng.gen::<f64>() < p_birth)
            }
            SiteRates::PerSite { birth, death, table } => {
                let idx = table.sample(&mut self.rng);
                let p_birth = birth[idx] / (birth[idx] + death[idx]);
                (idx, self.rng.gen::<f64>() < p_birth)
            }
        };

        let occupied = self.is_occupied(idx);
        if birth_clock == occupied {
            // A birth clock on an occupied site (or a death clock on a
            // vacant one) can never flip; the marks would be discarded.
            return;
        }
        let (i, j) = (idx % self.n, idx / self.n);
        let accept = if birth_clock {
            let hits = self.sample_neighbors(i, j, self.g.degree(), true);
            self.g.accept_prob(hits)
        } else {
            let hits = self.sample_neighbors(i, j, self.h.degree(), false);
            self.h.accept_prob(hits)
        };
        if accept > 0.0 && self.rng.gen::<f64>() < accept {
            self.bits[idx >> 6] ^= 1 << (idx & 63);
            if birth_clock {
                self.occupied += 1;
            } else {
                self.occupied -= 1;
            }
            self.flips += 1;
        }
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot { time: self.time, n: self.n, bits: self.bits.clone() }
    }

    /// Run until the clock passes `t_end`, saving the configuration at each
    /// requested time (the state is right-continuous between events, so a
    /// snapshot at `t` is the configuration after the last event at or
    /// before `t`).
    pub fn run(&mut self, t_end: f64, snapshot_times: &[f64]) -> Result<Vec<Snapshot>> {
        if !(t_end >= 0.0) {
            return Err(Error::invalid(format!("t_end = {t_end} must be nonnegative")));
        }
        let mut times: Vec<f64> = snapshot_times.to_vec();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut snaps = Vec::with_capacity(times.len());
        let mut pending = times.into_iter().peekable();
        loop {
            while let Some(&t) = pending.peek() {
                if t <= t_end && (self.time >= t || self.next_jump() > t) {
                    let mut s = self.snapshot();
                    s.time = t;
                    snaps.push(s);
                    pending.next();
                } else {
                    break;
                }
            }
            if self.time >= t_end {
                break;
            }
            let jump = self.next_jump();
            self.pending_jump = None;
            if jump > t_end {
                // The waiting time is memoryless, so restarting the clock
                // at t_end leaves the law unchanged.
                self.time = t_end;
            } else {
                self.time = jump;
                self.events += 1;
                self.fire_event();
            }
        }
        Ok(snaps)
    }
}

fn wrap_dist(d: f64, period: f64) -> f64 {
    let mut r = d % period;
    if r > period / 2.0 {
        r -= period;
    } else if r < -period / 2.0 {
        r += period;
    }
    r
}

/// Tile the torus with squares of side `L^(1-gamma)` sites (snapped to the
/// nearest divisor of the torus side) and report per-tile occupied
/// fractions. The tiling is anchored at the origin site.
pub fn coarse_density(snap: &Snapshot, dispersal: u32, gamma: f64) -> Result<CoarseDensity> {
    if !(gamma > 0.0 && gamma <= 0.25) {
        return Err(Error::invalid(format!("gamma = {gamma} outside (0, 1/4]")));
    }
    let n = snap.n;
    let target = (dispersal as f64).powf(1.0 - gamma);
    let ideal = target.round().max(1.0) as usize;
    let mut tile = 1;
    let mut best = f64::INFINITY;
    for s in 1..=n {
        if n % s == 0 {
            let gap = (s as f64 - target).abs();
            if gap < best {
                best = gap;
                tile = s;
            }
        }
    }
    let snapped = tile != ideal;
    let tiles = n / tile;
    let mut fractions = vec![0.0; tiles * tiles];
    for tj in 0..tiles {
        for ti in 0..tiles {
            let mut count = 0u64;
            for j in tj * tile..(tj + 1) * tile {
                for i in ti * tile..(ti + 1) * tile {
                    if snap.get(i, j) {
                        count += 1;
                    }
                }
            }
            fractions[tj * tiles + ti] = count as f64 / (tile * tile) as f64;
        }
    }
    Ok(CoarseDensity { gamma, tile_sites: tile, tiles_per_side: tiles, fractions, snapped })
}

/// One renormalized layer: wetness of every block on the period-`2N` grid.
#[derive(Debug, Clone)]
pub struct WetLayer {
    pub time: f64,
    pub blocks_per_side: usize,
    pub wet: Vec<bool>,
}

impl WetLayer {
    pub fn is_wet(&self, bi: usize, bj: usize) -> bool {
        self.wet[bj * self.blocks_per_side + bi]
    }

    pub fn wet_count(&self) -> usize {
        self.wet.iter().filter(|w| **w).count()
    }
}

/// Classify every block `(2Ni, 2Nj) + [-N, N)^2` (shifted by `origin`, all
/// continental units) as wet when every coarse tile fully inside it has
/// occupied fraction at least `v2 - 2 delta`.
pub fn wet_sites(
    snap: &Snapshot,
    dispersal: u32,
    gamma: f64,
    block_half_width: f64,
    v2: f64,
    delta: f64,
    origin: (f64, f64),
) -> Result<WetLayer> {
    let n = snap.n as i64;
    let block_sites = (block_half_width * dispersal as f64).round() as i64;
    if block_sites < 1 {
        return Err(Error::invalid("block half-width shorter than one site"));
    }
    let period = 2 * block_sites;
    if n % period != 0 {
        return Err(Error::invalid(format!(
            "torus side {n} sites is not a multiple of the block period {period}"
        )));
    }
    let coarse = coarse_density(snap, dispersal, gamma)?;
    let tile = coarse.tile_sites as i64;
    if tile > period {
        return Err(Error::invalid(format!(
            "coarse tile ({tile} sites) larger than the block period ({period} sites)"
        )));
    }
    let threshold = v2 - 2.0 * delta;
    let blocks = (n / period) as usize;
    let ox = (origin.0 * dispersal as f64).round() as i64;
    let oy = (origin.1 * dispersal as f64).round() as i64;
    let tiles = coarse.tiles_per_side as i64;

    let mut wet = vec![false; blocks * blocks];
    for bj in 0..blocks as i64 {
        for bi in 0..blocks as i64 {
            let lo_x = ox + bi * period - block_sites;
            let lo_y = oy + bj * period - block_sites;
            let first_tx = lo_x.div_euclid(tile) + i64::from(lo_x.rem_euclid(tile) != 0);
            let first_ty = lo_y.div_euclid(tile) + i64::from(lo_y.rem_euclid(tile) != 0);
            let count_t = period / tile;
            let mut all_wet = true;
            'scan: for tj in first_ty..=first_ty + count_t {
                for ti in first_tx..=first_tx + count_t {
                    // Keep only tiles fully inside the block.
                    if ti * tile < lo_x
                        || (ti + 1) * tile > lo_x + period
                        || tj * tile < lo_y
                        || (tj + 1) * tile > lo_y + period
                    {
                        continue;
                    }
                    let f = coarse
                        .fraction(ti.rem_euclid(tiles) as usize, tj.rem_euclid(tiles) as usize);
                    if f < threshold {
                        all_wet = false;
                        break 'scan;
                    }
                }
            }
            wet[(bj as usize) * blocks + bi as usize] = all_wet;
        }
    }
    Ok(WetLayer { time: snap.time, blocks_per_side: blocks, wet })
}
