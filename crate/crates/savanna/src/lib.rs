//! Two-type (grass/forest) stochastic spatial dynamics and its limits.
//!
//! The crate simulates a lattice model on a two-scale torus in which sites
//! flip between grass and forest at rates driven by the occupancy of a
//! dispersal-radius neighborhood, with coefficients varying on a
//! continental scale. Around the simulator it provides the analysis
//! toolchain the model's theory rests on:
//!
//! - [`rates`] — binomial-mixture rate responses, power-law families, and
//!   the heterogeneous coefficient field;
//! - [`meanfield`] — the well-mixed limit: case classification, fixed
//!   points, the bistability threshold, trajectories;
//! - [`grid`] / [`ide`] — the nonlocal (disk-average) dynamics the lattice
//!   converges to at large dispersal scale;
//! - [`front`] — traveling-front speeds and the critical coefficient ratio
//!   where the invading type changes;
//! - [`lattice`] — the exact event-driven simulator and coarse-grained
//!   densities;
//! - [`dual`] — backward influence sets, collision statistics, and the
//!   pathwise duality audit;
//! - [`blocks`] — renormalized wet blocks, oriented-percolation survival,
//!   and the snake embedding;
//! - [`hetero`] — end-to-end heterogeneous experiments: region partition,
//!   seeded initial conditions, region-density and boundary-stability
//!   reports.
//!
//! Every experiment is reproducible from a seed and a config; see the
//! `examples/` directory for one runnable entry point per capability and
//! the `savanna` binary for the config-driven command line.

pub mod blocks;
pub mod cli;
pub mod config;
pub mod dual;
pub mod error;
pub mod front;
pub mod grid;
pub mod hetero;
pub mod hydro;
pub mod ide;
pub mod lattice;
pub mod meanfield;
pub mod output;
pub mod rates;

pub use error::{Error, Result};
