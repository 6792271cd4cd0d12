//! Decoherence analysis and quantum-memory simulation for rare-earth-ion
//! spectroscopy.
//!
//! The crate has four parts:
//!
//! - [`quantities`]: canonical units and the handful of physical constants
//!   everything else relies on.
//! - [`models`]: closed-form model functions (stretched-exponential echo
//!   decay, linewidth vs temperature/field, Lorentzian lineshape,
//!   double-exponential hole decay, AFC recall efficiency), each with
//!   analytic partial derivatives.
//! - [`fitting`]: a deterministic Levenberg-Marquardt engine with box
//!   bounds, parameter freezing, and covariance-based uncertainties.
//! - [`afc`]: a linear-response simulation of atomic-frequency-comb storage:
//!   comb construction, causal transfer function via a discrete
//!   Kramers-Kronig phase, pulse propagation, and echo detection.
//!
//! Everything exchanges values in the canonical units documented in
//! [`quantities`]: microseconds, kilohertz, gigahertz, kelvin, tesla.
//! All randomness is explicitly seeded (see [`synth`]); identical inputs
//! produce bit-identical results.

pub mod afc;
pub mod checks;
pub mod error;
pub mod fitting;
pub mod models;
pub mod par;
pub mod quantities;
pub mod synth;

pub use error::{Error, Result};
pub use fitting::{lm_fit, Dataset, FitOptions, FitResult};
