//! Coherent-control simulation of quantum-dot ensembles: Bloch-vector
//! dynamics under ultrashort pulse sequences, closed-form revival
//! envelopes, virtual Ramsey and echo scans, a reduced propagation map and
//! the fits that turn contrast traces into T₂ and T₂*.
//!
//! Units: delays and periods in fs, T₁/T₂ in ps, energies in meV.

// NaN must fail parameter checks, so `!(x > 0.0)` is deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod bloch;
pub mod error;
pub mod experiments;
pub mod fitting;
pub mod presets;
pub mod propagate;
pub mod types;
pub mod units;

pub use error::{Error, Result};
pub use types::{
    BlochState, ContrastEnvelope, Envelope, EnsembleSpec, FitResult, FringeTrace, ModeSpec, PulseSpec,
};
