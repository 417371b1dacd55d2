//! Command-line entry point: one subcommand per experiment family, all
//! config-driven, seeded, and reproducible. Every run writes a manifest
//! next to its outputs; feeding that manifest back through `--config`
//! reproduces the CSV outputs byte for byte.

use crate::config::{FieldSpec, InitSpec, ModelSpec, StripSpec};
use crate::error::{Error, Result};
use crate::front::{self, FrontParams};
use crate::grid::ScalarField;
use crate::ide::{Coefficients, IdeSolver};
use crate::lattice::LatticeState;
use crate::output::{self, Csv, Manifest};
use crate::{blocks, dual, hetero, meanfield};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "savanna",
    version,
    about = "Two-type stochastic spatial dynamics: simulation and analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// JSON config (a bare config object or an emitted manifest).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Base RNG seed; replicas use seed, seed+1, ...
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Independent seeded replicas, fanned out across workers.
    #[arg(long, default_value_t = 1)]
    pub replicas: usize,
}

#[derive(Subcommand)]
pub enum Command {
    /// Mean-field analysis: case, threshold ratio, fixed points, sweeps.
    Meanfield {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
        /// Sweep "lo:hi:steps" writing a (theta, v1, v2) table.
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Integrate the nonlocal dynamics, writing graymap snapshots.
    Ide {
        #[command(flatten)]
        common: Common,
    },
    /// Measure a traveling-front speed on the strip reduction.
    FrontSpeed {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Bisect the coefficient ratio where the front speed changes sign.
    Theta1 {
        #[command(flatten)]
        common: Common,
    },
    /// Exact lattice simulation with bitmap snapshots.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Influence-set collision statistics over dispersal scales.
    Dual {
        #[command(flatten)]
        common: Common,
    },
    /// Oriented-percolation survival times on a strip.
    Percolation {
        #[command(flatten)]
        common: Common,
    },
    /// Density persistence across torus sizes.
    Survival {
        #[command(flatten)]
        common: Common,
    },
    /// Heterogeneous pipeline: regions, seeds, simulation, scoring.
    Hetero {
        #[command(flatten)]
        common: Common,
    },
}

// ---------------------------------------------------------------------------
// Per-command configs (serde round-trips through the manifest).
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeanfieldConfig {
    pub model: ModelSpec,
    pub theta: f64,
    #[serde(default)]
    pub sweep: Option<(f64, f64, usize)>,
}

impl Default for MeanfieldConfig {
    fn default() -> Self {
        Self { model: ModelSpec::power(3.0, 0.5), theta: 5.0, sweep: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdeConfig {
    pub model: ModelSpec,
    pub field: FieldSpec,
    pub side: f64,
    pub spacing: f64,
    pub t_end: f64,
    pub snapshots: Vec<f64>,
    pub init: InitSpec,
}

impl Default for IdeConfig {
    fn default() -> Self {
        Self {
            model: ModelSpec::power(3.0, 0.5),
            field: FieldSpec::Constant { a: 7.0, b: 1.0 },
            side: 4.0,
            spacing: 0.05,
            t_end: 10.0,
            snapshots: vec![0.0, 2.0, 5.0, 10.0],
            init: InitSpec::Plateau {
                inside: 0.9,
                outside: 0.0,
                center: (2.0, 2.0),
                half_width: 1.0,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrontSpeedConfig {
    pub model: ModelSpec,
    pub theta: f64,
    #[serde(default)]
    pub strip: StripSpec,
}

impl Default for FrontSpeedConfig {
    fn default() -> Self {
        Self {
            model: ModelSpec::power(3.0, 0.5),
            theta: 2.0 * front::POWER_MODEL_THETA1,
            strip: StripSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Theta1Config {
    pub model: ModelSpec,
    pub bracket: (f64, f64),
    pub tol: f64,
    #[serde(default)]
    pub strip: StripSpec,
}

impl Default for Theta1Config {
    fn default() -> Self {
        Self {
            model: ModelSpec::power(3.0, 0.5),
            bracket: (6.0, 7.0),
            tol: 1e-3,
            strip: StripSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub model: ModelSpec,
    pub field: FieldSpec,
    /// Dispersal scale L (sites per interaction radius).
    pub dispersal: u32,
    /// Torus side M in continental units.
    pub side: u32,
    pub t_end: f64,
    pub snapshots: Vec<f64>,
    pub init: InitSpec,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

fn default_gamma() -> f64 {
    0.25
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            model: ModelSpec::power(3.0, 0.5),
            field: FieldSpec::Constant { a: 7.0, b: 1.0 },
            dispersal: 20,
            side: 4,
            t_end: 10.0,
            snapshots: vec![0.0, 5.0, 10.0],
            init: InitSpec::Bernoulli { p: 0.9 },
            gamma: 0.25,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualConfig {
    pub model: ModelSpec,
    pub dispersals: Vec<u32>,
    pub side: u32,
    pub t: f64,
    pub reps: usize,
    #[serde(default)]
    pub pair_distance: Option<i64>,
}

impl Default for DualConfig {
    fn default() -> Self {
        Self {
            model: ModelSpec::Bernstein {
                g: crate::config::RateSpec { lambda: 1.0, probs: vec![0.0, 1.0] },
                h: crate::config::RateSpec { lambda: 1.0, probs: vec![1.0] },
            },
            dispersals: vec![10, 20, 40, 80],
            side: 2,
            t: 2.0,
            reps: 4000,
            pair_distance: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PercolationConfig {
    pub widths: Vec<usize>,
    pub open_prob: f64,
    #[serde(default = "default_m")]
    pub dependence_range: usize,
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    pub reps: usize,
    #[serde(default)]
    pub full_row_start: bool,
}

fn default_m() -> usize {
    1
}
fn default_horizon() -> u64 {
    1_000_000
}

impl Default for PercolationConfig {
    fn default() -> Self {
        Self {
            widths: vec![10, 20, 40],
            open_prob: 0.95,
            dependence_range: 1,
            horizon: 1_000_000,
            reps: 500,
            full_row_start: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurvivalConfig {
    pub model: ModelSpec,
    pub theta: f64,
    pub sides: Vec<u32>,
    pub dispersal: u32,
    pub init: InitSpec,
    /// Density target; derived from the flow's upper state when absent.
    #[serde(default)]
    pub target: Option<f64>,
    pub eps: f64,
    pub t0: f64,
    pub t_cap: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub reps: usize,
}

fn default_samples() -> usize {
    8
}

impl Default for SurvivalConfig {
    fn default() -> Self {
        Self {
            model: ModelSpec::power(3.0, 0.5),
            theta: 7.0,
            sides: vec![2, 4],
            dispersal: 20,
            init: InitSpec::Bernoulli { p: 0.95 },
            target: None,
            eps: 0.1,
            t0: 5.0,
            t_cap: 25.0,
            samples: 8,
            reps: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeteroConfig {
    pub model: ModelSpec,
    pub field: FieldSpec,
    pub dispersal: u32,
    pub side: u32,
    #[serde(default = "default_theta1")]
    pub theta1: f64,
    pub delta: f64,
    pub eps: f64,
    pub t0: f64,
    pub t_cap: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    pub forest_seed_density: f64,
    #[serde(default)]
    pub grass_seed_density: f64,
    pub forest_seed_half_width: f64,
    pub grass_seed_half_width: f64,
    #[serde(default)]
    pub background: f64,
    /// Allowed interface band in interaction radii.
    #[serde(default = "default_band")]
    pub band: f64,
}

fn default_theta1() -> f64 {
    front::POWER_MODEL_THETA1
}
fn default_resolution() -> usize {
    32
}
fn default_band() -> f64 {
    2.0
}

impl Default for HeteroConfig {
    fn default() -> Self {
        let t1 = front::POWER_MODEL_THETA1;
        Self {
            model: ModelSpec::power(3.0, 0.5),
            // Four field cells per side give the two plateaus one-unit
            // transition ramps: the coefficient field is continental-scale
            // smooth, and the delta band can exclude the interface zone.
            field: FieldSpec::TwoStripe {
                a_left: 0.5 * t1,
                b_left: 1.0,
                a_right: 2.0 * t1,
                b_right: 1.0,
                n: 4,
            },
            dispersal: 20,
            side: 4,
            theta1: t1,
            delta: 3.2,
            eps: 0.1,
            t0: 30.0,
            t_cap: 60.0,
            samples: 7,
            resolution: 32,
            forest_seed_density: 1.0,
            grass_seed_density: 0.0,
            forest_seed_half_width: 0.8,
            grass_seed_half_width: 0.5,
            background: 0.35,
            band: 2.0,
        }
    }
}

// ---------------------------------------------------------------------------
// Dispatch.
// ---------------------------------------------------------------------------

/// Run the parsed command; the exit status is 0 on success, 2 on invalid
/// input, 3 on runtime failure.
pub fn dispatch(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Meanfield { common, alpha, beta, theta, sweep } => {
            run_command(common, "meanfield", move |mut cfg: MeanfieldConfig, _| {
                if let (Some(a), Some(b)) = (alpha, beta) {
                    cfg.model = ModelSpec::power(a, b);
                }
                if let Some(t) = theta {
                    cfg.theta = t;
                }
                if let Some(s) = &sweep {
                    cfg.sweep = Some(parse_sweep(s)?);
                }
                Ok(cfg)
            }, run_meanfield)
        }
        Command::Ide { common } => run_command(common, "ide", keep, run_ide),
        Command::FrontSpeed { common, theta } => {
            run_command(common, "front-speed", move |mut cfg: FrontSpeedConfig, _| {
                if let Some(t) = theta {
                    cfg.theta = t;
                }
                Ok(cfg)
            }, run_front_speed)
        }
        Command::Theta1 { common } => run_command(common, "theta1", keep, run_theta1),
        Command::Simulate { common } => run_command(common, "simulate", keep, run_simulate),
        Command::Dual { common } => run_command(common, "dual", keep, run_dual),
        Command::Percolation { common } => {
            run_command(common, "percolation", keep, run_percolation)
        }
        Command::Survival { common } => run_command(common, "survival", keep, run_survival),
        Command::Hetero { common } => run_command(common, "hetero", keep, run_hetero_cmd),
    };
    match outcome {
        Ok(()) => 0,
        Err(Error::Invalid(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            3
        }
    }
}

fn keep<C>(cfg: C, _: &Common) -> Result<C> {
    Ok(cfg)
}

fn parse_sweep(text: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::invalid("sweep must be lo:hi:steps"));
    }
    let lo = parts[0].parse().map_err(|_| Error::invalid("bad sweep lo"))?;
    let hi = parts[1].parse().map_err(|_| Error::invalid("bad sweep hi"))?;
    let steps = parts[2].parse().map_err(|_| Error::invalid("bad sweep steps"))?;
    Ok((lo, hi, steps))
}

/// Shared runner: resolve the config (file, overrides), fan out replicas,
/// write the manifest.
fn run_command<C, F, R>(common: Common, name: &str, override_fn: F, runner: R) -> Result<()>
where
    C: DeserializeOwned + Serialize + Default + Clone + Send + Sync,
    F: FnOnce(C, &Common) -> Result<C>,
    R: Fn(&C, u64, &Path) -> Result<Vec<String>> + Send + Sync,
{
    let started = std::time::Instant::now();
    let (mut cfg, manifest_seed) = match &common.config {
        Some(path) => {
            let (value, seed) = output::read_config_or_manifest(path)?;
            let cfg: C = serde_json::from_value(value)
                .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
            (cfg, seed)
        }
        None => (C::default(), None),
    };
    cfg = override_fn(cfg, &common)?;
    let seed = common.seed.or(manifest_seed).unwrap_or(1);
    if common.replicas == 0 {
        return Err(Error::invalid("at least one replica required"));
    }

    std::fs::create_dir_all(&common.out)?;
    let mut outputs: Vec<String> = Vec::new();
    if common.replicas == 1 {
        outputs.extend(runner(&cfg, seed, &common.out)?);
    } else {
        use rayon::prelude::*;
        let results: Vec<Result<Vec<String>>> = (0..common.replicas)
            .into_par_iter()
            .map(|r| {
                let dir = common.out.join(format!("replica-{r}"));
                std::fs::create_dir_all(&dir)?;
                let files = runner(&cfg, seed + r as u64, &dir)?;
                Ok(files
                    .into_iter()
                    .map(|f| format!("replica-{r}/{f}"))
                    .collect())
            })
            .collect();
        for r in results {
            outputs.extend(r?);
        }
    }

    let manifest = Manifest {
        command: name.to_string(),
        seed,
        config: serde_json::to_value(&cfg)
            .map_err(|e| Error::runtime(format!("config serialization: {e}")))?,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_seconds: started.elapsed().as_secs_f64(),
        outputs,
    };
    output::write_manifest(&common.out, &manifest)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Runners (one per subcommand); each returns the files it wrote.
// ---------------------------------------------------------------------------

fn run_meanfield(cfg: &MeanfieldConfig, _seed: u64, out: &Path) -> Result<Vec<String>> {
    let (g, h) = cfg.model.build()?;
    let report = meanfield::fixed_points(&g, &h, cfg.theta, 1.0)?;
    let interior: Vec<String> = report
        .interior()
        .map(|p| format!("{:.6} ({:?})", p.u, p.stability))
        .collect();
    println!(
        "meanfield: theta = {}, case {:?}, w = {:.6}, theta0 = {}, interior = [{}]",
        cfg.theta,
        report.case_label,
        report.w,
        report.theta0.map(|t| format!("{t:.6}")).unwrap_or_else(|| "n/a".into()),
        interior.join(", ")
    );
    let mut outputs = vec!["fixed_points.csv".to_string()];
    let mut csv = Csv::create(&out.join("fixed_points.csv"), "u,stability,residual")?;
    for p in &report.points {
        csv.row(&[
            output::num(p.u),
            format!("{:?}", p.stability),
            output::num(p.residual),
        ])?;
    }
    csv.finish()?;

    if let Some((lo, hi, steps)) = cfg.sweep {
        let mut csv = Csv::create(&out.join("sweep.csv"), "theta,v1,v2")?;
        for k in 0..steps {
            let theta = lo + (hi - lo) * k as f64 / (steps.max(2) - 1) as f64;
            let (v1, v2) = match meanfield::fixed_points(&g, &h, theta, 1.0)?.interior_pair() {
                Some((v1, v2)) => (output::num(v1), output::num(v2)),
                None => (String::new(), String::new()),
            };
            csv.row(&[output::num(theta), v1, v2])?;
        }
        csv.finish()?;
        outputs.push("sweep.csv".to_string());
    }
    Ok(outputs)
}

fn ide_initial(init: &InitSpec, side: f64, spacing: f64) -> Result<ScalarField> {
    match init {
        InitSpec::Bernoulli { p } => ScalarField::constant(side, spacing, *p),
        InitSpec::Plateau { inside, outside, center, half_width } => {
            ScalarField::from_fn(side, spacing, |x, y| {
                let dx = (x - center.0).rem_euclid(side);
                let dx = dx.min(side - dx);
                let dy = (y - center.1).rem_euclid(side);
                let dy = dy.min(side - dy);
                if dx < *half_width && dy < *half_width {
                    *inside
                } else {
                    *outside
                }
            })
        }
        InitSpec::Bitmap { .. } => {
            Err(Error::invalid("bitmap initial conditions are for the lattice only"))
        }
    }
}

fn run_ide(cfg: &IdeConfig, _seed: u64, out: &Path) -> Result<Vec<String>> {
    let (g, h) = cfg.model.build()?;
    let coeffs = match cfg.field.as_constants() {
        Some((a, b)) => Coefficients::Constant { a, b },
        None => Coefficients::Field(cfg.field.build()?),
    };
    let u0 = ide_initial(&cfg.init, cfg.side, cfg.spacing)?;
    let solver = IdeSolver::new(&u0, &coeffs, g, h)?;
    let mut times = cfg.snapshots.clone();
    times.retain(|t| *t <= cfg.t_end + 1e-12);
    let snaps = solver.run_snapshots(&u0, &times, solver.max_step())?;

    let mut outputs = vec!["density.csv".to_string()];
    let mut csv = Csv::create(&out.join("density.csv"), "t,mean,min,max")?;
    for snap in &snaps {
        csv.row(&[
            output::num(snap.time),
            output::num(snap.mean()),
            output::num(snap.min()),
            output::num(snap.max()),
        ])?;
        let name = format!("u_t{:.3}.pgm", snap.time);
        output::write_pgm(&out.join(&name), snap)?;
        outputs.push(name);
    }
    csv.finish()?;
    println!(
        "ide: {} snapshots to t = {}, final mean {:.4}",
        snaps.len(),
        cfg.t_end,
        snaps.last().map(|s| s.mean()).unwrap_or(0.0)
    );
    Ok(outputs)
}

fn run_front_speed(cfg: &FrontSpeedConfig, _seed: u64, out: &Path) -> Result<Vec<String>> {
    let (g, h) = cfg.model.build()?;
    let params: FrontParams = cfg.strip.to_params();
    let trace = front::front_speed(&g, &h, cfg.theta, 1.0, &params)?;
    println!(
        "front-speed: theta = {}, rho = {:+.5}, fit residual {:.2e}, level {:.4}",
        cfg.theta, trace.speed, trace.residual, trace.level
    );
    let mut csv = Csv::create(&out.join("front_trace.csv"), "t,x,residual")?;
    let burn = params.burn_in_frac * params.t_window;
    let intercept = {
        // Reconstruct the fit intercept for per-sample residuals.
        let pairs: Vec<(f64, f64)> = trace
            .times
            .iter()
            .zip(&trace.positions)
            .filter(|(t, _)| **t >= burn)
            .map(|(t, x)| (*t, *x))
            .collect();
        let n = pairs.len() as f64;
        let mt = pairs.iter().map(|p| p.0).sum::<f64>() / n;
        let mx = pairs.iter().map(|p| p.1).sum::<f64>() / n;
        mx - trace.speed * mt
    };
    for (t, x) in trace.times.iter().zip(&trace.positions) {
        csv.row(&[
            output::num(*t),
            output::num(*x),
            output::num(x - (intercept + trace.speed * t)),
        ])?;
    }
    csv.finish()?;
    Ok(vec!["front_trace.csv".to_string()])
}

fn run_theta1(cfg: &Theta1Config, _seed: u64, out: &Path) -> Result<Vec<String>> {
    let (g, h) = cfg.model.build()?;
    let params = cfg.strip.to_params();
    let res = front::theta1_bisect(&g, &h, cfg.bracket.0, cfg.bracket.1, cfg.tol, &params)?;
    println!(
        "theta1: {} +- {} (bracket [{}, {}], {} speed evaluations)",
        res.theta1,
        cfg.tol,
        cfg.bracket.0,
        cfg.bracket.1,
        res.evaluations.len()
    );
    let mut csv = Csv::create(&out.join("theta1_evals.csv"), "theta,rho")?;
    for (theta, rho) in &res.evaluations {
        csv.row(&[output::num(*theta), output::num(*rho)])?;
    }
    csv.finish()?;
    Ok(vec!["theta1_evals.csv".to_string()])
}

fn run_simulate(cfg: &SimulateConfig, seed: u64, out: &Path) -> Result<Vec<String>> {
    let (g, h) = cfg.model.build()?;
    let coeffs = match cfg.field.as_constants() {
        Some((a, b)) => Coefficients::Constant { a, b },
        None => Coefficients::Field(cfg.field.build()?),
    };
    let init = cfg.init.build()?;
    let mut st = LatticeState::new(cfg.dispersal, cfg.side, g, h, &coeffs, &init, seed)?;
    let mut times = cfg.snapshots.clone();
    times.retain(|t| *t <= cfg.t_end + 1e-12);
    let snaps = st.run(cfg.t_end, &times)?;

    let mut outputs = vec!["density.csv".to_string(), "events.csv".to_string()];
    let mut density = Csv::create(&out.join("density.csv"), "t,density")?;
    for snap in &snaps {
        density.row(&[output::num(snap.time), output::num(snap.density())])?;
        let name = format!("sites_t{:.3}.pbm", snap.time);
        output::write_pbm(&out.join(&name), snap)?;
        outputs.push(name);
    }
    density.finish()?;
    let mut events = Csv::create(&out.join("events.csv"), "t,events,flips")?;
    events.row(&[
        output::num(st.time()),
        st.events().to_string(),
        st.flips().to_string(),
    ])?;
    events.finish()?;
    println!(
        "simulate: L = {}, M = {}, t = {:.2}, {} events, {} flips, final density {:.4}",
        cfg.dispersal,
        cfg.side,
        st.time(),
        st.events(),
        st.flips(),
        st.density()
    );
    Ok(outputs)
}

fn run_dual(cfg: &DualConfig, seed: u64, out: &Path) -> Result<Vec<String>> {
    let (g, h) = cfg.model.build()?;
    let coeffs = Coefficients::Constant { a: 1.0, b: 1.0 };
    let ests = dual::collision_probability(
        &cfg.dispersals,
        cfg.side,
        cfg.t,
        &g,
        &h,
        &coeffs,
        cfg.pair_distance,
        cfg.reps,
        seed,
    )?;
    let mut csv = Csv::create(
        &out.join("collisions.csv"),
        "L,t,reps,p_collision,ci_lo,ci_hi,mean_size,p_collision_budget,p_cross,se_size,truncated",
    )?;
    for e in &ests {
        csv.row(&[
            e.dispersal.to_string(),
            output::num(e.t),
            e.reps.to_string(),
            output::num(e.p_collision),
            output::num(e.ci.0),
            output::num(e.ci.1),
            output::num(e.mean_size),
            output::num(e.p_collision_budget),
            output::num(e.p_cross),
            output::num(e.se_size),
            e.truncated_runs.to_string(),
        ])?;
    }
    csv.finish()?;
    if ests.len() >= 2 {
        let pts: Vec<(f64, f64)> =
            ests.iter().map(|e| (e.dispersal as f64, e.p_collision)).collect();
        let slope = dual::log_log_slope(&pts, 0.5 / cfg.reps as f64);
        println!("dual: log-log collision slope {slope:.3} over {:?}", cfg.dispersals);
    }
    Ok(vec!["collisions.csv".to_string()])
}

fn run_percolation(cfg: &PercolationConfig, seed: u64, out: &Path) -> Result<Vec<String>> {
    let mut csv = Csv::create(
        &out.join("survival.csv"),
        "width,p,m,median_survival,censored_fraction",
    )?;
    for &width in &cfg.widths {
        let op = blocks::OpConfig {
            width,
            open_prob: cfg.open_prob,
            dependence_range: cfg.dependence_range,
            horizon: cfg.horizon,
            start: if cfg.full_row_start {
                blocks::OpStart::FullRow
            } else {
                blocks::OpStart::Single
            },
        };
        let mut samples = blocks::op_simulate(&op, cfg.reps, seed)?;
        samples.sort_unstable();
        let median = samples[samples.len() / 2];
        let censored =
            samples.iter().filter(|&&t| t >= cfg.horizon).count() as f64 / cfg.reps as f64;
        println!(
            "percolation: width {width}, median {median}{}, censored {censored:.2}",
            if median >= cfg.horizon { " (censored)" } else { "" }
        );
        csv.row(&[
            width.to_string(),
            output::num(cfg.open_prob),
            cfg.dependence_range.to_string(),
            median.to_string(),
            output::num(censored),
        ])?;
    }
    csv.finish()?;
    Ok(vec!["survival.csv".to_string()])
}

fn run_survival(cfg: &SurvivalConfig, seed: u64, out: &Path) -> Result<Vec<String>> {
    let (g, h) = cfg.model.build()?;
    let target = match cfg.target {
        Some(t) => t,
        None => {
            let report = meanfield::fixed_points(&g, &h, cfg.theta, 1.0)?;
            front::bistable_triple(&report)
                .map(|(_, _, high)| high)
                .ok_or_else(|| Error::invalid("no bistable pair; pass an explicit target"))?
        }
    };
    let init = cfg.init.build()?;
    let rows = blocks::survival_scaling(
        &g,
        &h,
        cfg.theta,
        &cfg.sides,
        cfg.dispersal,
        &init,
        target,
        cfg.eps,
        cfg.t0,
        cfg.t_cap,
        cfg.samples,
        cfg.reps,
        seed,
    )?;
    let mut csv = Csv::create(
        &out.join("persistence.csv"),
        "M,persistence_fraction,extinct_fraction,reps",
    )?;
    for row in &rows {
        println!(
            "survival: M = {}, persistence {:.2}, extinction {:.2}",
            row.side_units, row.persistence_fraction, row.extinct_fraction
        );
        csv.row(&[
            row.side_units.to_string(),
            output::num(row.persistence_fraction),
            output::num(row.extinct_fraction),
            row.reps.to_string(),
        ])?;
    }
    csv.finish()?;
    Ok(vec!["persistence.csv".to_string()])
}

fn run_hetero_cmd(cfg: &HeteroConfig, seed: u64, out: &Path) -> Result<Vec<String>> {
    let (g, h) = cfg.model.build()?;
    let field = cfg.field.build()?;
    let seed_spec = hetero::SeedSpec {
        forest_density: cfg.forest_seed_density,
        grass_density: cfg.grass_seed_density,
        forest_half_width: cfg.forest_seed_half_width,
        grass_half_width: cfg.grass_seed_half_width,
        background: cfg.background,
    };
    let (report, snaps, regions) = hetero::run_hetero(
        &field,
        &g,
        &h,
        cfg.dispersal,
        cfg.side,
        cfg.theta1,
        cfg.delta,
        &seed_spec,
        cfg.eps,
        cfg.t0,
        cfg.t_cap,
        cfg.samples,
        cfg.resolution,
        seed,
    )?;

    let mut outputs = vec!["regions.csv".to_string()];
    let mut csv = Csv::create(&out.join("regions.csv"), "t,component,label,fraction,target")?;
    for (k, t) in report.times.iter().enumerate() {
        for target in &report.targets {
            csv.row(&[
                output::num(*t),
                target.component.to_string(),
                format!("{:?}", target.label),
                output::num(report.fractions[k][target.component]),
                output::num(target.v2),
            ])?;
        }
    }
    csv.finish()?;

    // Boundary displacement against the predicted curves, when they exist.
    let level = {
        // Midpoint level from the forest side's threshold pair (falls back
        // to 1/2 when the triple is unavailable).
        let forest_ratio = regions
            .components
            .iter()
            .filter(|c| c.label == hetero::RegionLabel::Forest)
            .map(|c| c.mean_ratio)
            .fold(f64::NAN, f64::max);
        if forest_ratio.is_finite() {
            let rep = meanfield::fixed_points(&g, &h, forest_ratio, 1.0)?;
            front::bistable_triple(&rep).map(|(_, m, hi)| 0.5 * (m + hi)).unwrap_or(0.5)
        } else {
            0.5
        }
    };
    match hetero::boundary_stability(&snaps, cfg.dispersal, &regions, level, cfg.t0, cfg.band) {
        Ok(series) => {
            let mut csv =
                Csv::create(&out.join("boundary.csv"), "t,hausdorff,mean_displacement")?;
            for (k, t) in series.times.iter().enumerate() {
                csv.row(&[
                    output::num(*t),
                    series.hausdorff[k].map(output::num).unwrap_or_default(),
                    series.mean_displacement[k].map(output::num).unwrap_or_default(),
                ])?;
            }
            csv.finish()?;
            outputs.push("boundary.csv".to_string());
            println!(
                "hetero: boundary drift slope {} (se {}), within band: {}",
                series.drift_slope.map(output::num).unwrap_or_else(|| "n/a".into()),
                series.drift_se.map(output::num).unwrap_or_else(|| "n/a".into()),
                series.within_band
            );
        }
        Err(e) => println!("hetero: boundary analysis skipped: {e}"),
    }

    // Snapshot images with the predicted boundary overlaid.
    let spacing = 1.0 / cfg.dispersal as f64;
    let overlay: Vec<(usize, usize)> = regions
        .boundaries
        .iter()
        .flatten()
        .map(|(x, y)| {
            (
                ((x / spacing) as usize).min(snaps[0].sites_per_side() - 1),
                ((y / spacing) as usize).min(snaps[0].sites_per_side() - 1),
            )
        })
        .collect();
    for snap in &snaps {
        let n = snap.sites_per_side();
        let mut field_img = ScalarField::new(cfg.side as f64, spacing)?;
        for j in 0..n {
            for i in 0..n {
                field_img.set(i, j, f64::from(u8::from(snap.get(i, j))));
            }
        }
        let name = format!("sites_t{:.3}.pgm", snap.time);
        output::write_pgm_with_overlay(&out.join(&name), &field_img, &overlay)?;
        outputs.push(name);
    }

    println!(
        "hetero: pass = {} over t in [{}, {}] ({} sampled times); persistence checked on this \
         bounded window only — exponential-in-area horizons are far beyond desk scale",
        report.pass, cfg.t0, cfg.t_cap, report.times.len()
    );
    for v in report.violations.iter().take(5) {
        println!("  violation: {v}");
    }
    Ok(outputs)
}
