//! Serializable run configurations: model, field, and initial-condition
//! specifications shared by the command line and the manifests.

use crate::error::{Error, Result};
use crate::front::FrontParams;
use crate::lattice::InitialCondition;
use crate::rates::{BernsteinRate, HeterogeneityField, PowerLawSpec, DEFAULT_DEGREE};
use serde::{Deserialize, Serialize};

fn default_degree() -> usize {
    DEFAULT_DEGREE
}

/// One rate response in mixture form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateSpec {
    pub lambda: f64,
    pub probs: Vec<f64>,
}

impl RateSpec {
    pub fn build(&self) -> Result<BernsteinRate> {
        BernsteinRate::new(self.lambda, self.probs.clone())
    }
}

/// The model: either the power-law pair `(u^alpha, u^beta)` approximated at
/// degree `m`, or two explicit mixtures.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    Power {
        alpha: f64,
        beta: f64,
        #[serde(default = "default_degree")]
        m: usize,
    },
    Bernstein { g: RateSpec, h: RateSpec },
}

impl ModelSpec {
    pub fn build(&self) -> Result<(BernsteinRate, BernsteinRate)> {
        match self {
            ModelSpec::Power { alpha, beta, m } => {
                PowerLawSpec::new(*alpha, *beta)?.to_rates(*m)
            }
            ModelSpec::Bernstein { g, h } => Ok((g.build()?, h.build()?)),
        }
    }

    pub fn power(alpha: f64, beta: f64) -> Self {
        ModelSpec::Power { alpha, beta, m: DEFAULT_DEGREE }
    }
}

/// Coefficient field: named presets or plain-text sample matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FieldSpec {
    Constant {
        a: f64,
        b: f64,
    },
    TwoStripe {
        a_left: f64,
        b_left: f64,
        a_right: f64,
        b_right: f64,
        #[serde(default = "default_field_res")]
        n: usize,
    },
    Gradient {
        a_min: f64,
        a_max: f64,
        b: f64,
        #[serde(default = "default_field_res")]
        n: usize,
    },
    Files {
        a: std::path::PathBuf,
        b: std::path::PathBuf,
    },
}

fn default_field_res() -> usize {
    16
}

impl FieldSpec {
    pub fn build(&self) -> Result<HeterogeneityField> {
        match self {
            FieldSpec::Constant { a, b } => HeterogeneityField::constant(*a, *b),
            FieldSpec::TwoStripe { a_left, b_left, a_right, b_right, n } => {
                HeterogeneityField::two_stripe(*n, (*a_left, *b_left), (*a_right, *b_right))
            }
            FieldSpec::Gradient { a_min, a_max, b, n } => {
                HeterogeneityField::gradient(*n, *a_min, *a_max, *b)
            }
            FieldSpec::Files { a, b } => HeterogeneityField::from_files(a, b),
        }
    }

    /// Whether the field is a single constant pair (keeps the lattice in
    /// its homogeneous fast path).
    pub fn as_constants(&self) -> Option<(f64, f64)> {
        match self {
            FieldSpec::Constant { a, b } => Some((*a, *b)),
            _ => None,
        }
    }
}

/// Initial occupancy specification.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitSpec {
    Bernoulli {
        p: f64,
    },
    Plateau {
        inside: f64,
        outside: f64,
        center: (f64, f64),
        half_width: f64,
    },
    /// Portable bitmap (P1/P4) with one bit per site.
    Bitmap {
        path: std::path::PathBuf,
    },
}

impl InitSpec {
    pub fn build(&self) -> Result<InitialCondition> {
        match self {
            InitSpec::Bernoulli { p } => Ok(InitialCondition::Bernoulli(*p)),
            InitSpec::Plateau { inside, outside, center, half_width } => {
                Ok(InitialCondition::Plateau {
                    inside: *inside,
                    outside: *outside,
                    center: *center,
                    half_width: *half_width,
                })
            }
            InitSpec::Bitmap { path } => {
                let (w, h, bits) = crate::output::read_pbm(path)?;
                if w != h {
                    return Err(Error::invalid(format!("bitmap {w}x{h} is not square")));
                }
                Ok(InitialCondition::Bits(bits))
            }
        }
    }
}

/// Strip geometry knobs shared by the speed commands.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StripSpec {
    #[serde(default = "default_domain_len")]
    pub domain_len: f64,
    #[serde(default = "default_spacing")]
    pub spacing: f64,
    #[serde(default = "default_window")]
    pub t_window: f64,
}

fn default_domain_len() -> f64 {
    40.0
}
fn default_spacing() -> f64 {
    0.05
}
fn default_window() -> f64 {
    16.0
}

impl Default for StripSpec {
    fn default() -> Self {
        Self {
            domain_len: default_domain_len(),
            spacing: default_spacing(),
            t_window: default_window(),
        }
    }
}

impl StripSpec {
    pub fn to_params(&self) -> FrontParams {
        FrontParams {
            domain_len: self.domain_len,
            spacing: self.spacing,
            t_window: self.t_window,
            ..FrontParams::default()
        }
    }
}
