//! Constructive Floor-ReLU approximation networks with exact evaluation.
//!
//! The crate builds networks whose hidden neurons apply either `max(0, x)` or
//! `⌊x⌋`, with every weight an exact dyadic rational:
//!
//! * [`dyadic`] and [`real`]: exact scalars and certified real enclosures.
//! * [`network`]: the layered IR, exact and binary64 evaluators, combinators.
//! * [`bits`]: bit-extraction gadgets and the point fitter.
//! * [`construct`]: the four-step approximant for a continuous target and the
//!   width/depth reparameterization, each paired with a [`construct::Certificate`].
//! * [`bounds`]: closed-form error-rate calculators.
//! * [`verify`]: oracles and sup-error measurement.
//! * [`target`], [`modulus`] and [`io`]: builtin targets, moduli of
//!   continuity, and JSON/CSV file formats.

pub mod bits;
pub mod bounds;
pub mod construct;
pub mod dyadic;
pub mod io;
pub mod modulus;
pub mod network;
pub mod real;
pub mod target;
pub mod verify;

pub use dyadic::{round_up_dyadic, BitString, Dyadic, Rounding};
pub use network::{ActivationKind, Affine, AuditReport, Layer, Network};
pub use real::{Interval, RealValue};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("cannot parse {0:?}")]
    Parse(String),
    #[error("{0} is not a dyadic rational")]
    NotDyadic(String),
    #[error("non-finite binary64 value {0}")]
    NonFinite(f64),
    #[error("negative value {0} where a nonnegative one is required")]
    Negative(String),
    #[error("bit string must have at least one bit")]
    EmptyBitString,
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("nonnegativity obligation violated at layer {layer}, neuron {neuron} (pre-activation {value})")]
    Obligation {
        layer: usize,
        neuron: usize,
        value: String,
    },
    #[error("NaN produced at layer {layer}, neuron {neuron}")]
    NaN { layer: usize, neuron: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported parameter: {0}")]
    Unsupported(String),
    #[error("modulus evaluation failed: {0}")]
    Modulus(String),
    #[error("precision shortfall: {0}")]
    Precision(String),
    #[error("unknown target {0:?}")]
    UnknownTarget(String),
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
