//! Resolution limits of binary spatial-mode demultiplexing (SPADE) for
//! estimating the separation of two incoherent point sources.
//!
//! The crate computes Fisher information for photon counting, homodyne and
//! heterodyne detection of the first derivative mode `v1 ∝ u'`, with dark
//! counts or shot noise, and compares it with direct imaging and the quantum
//! limit `n_s/σ²`. Monte Carlo experiments check the bounds against an actual
//! estimator.

pub mod counting;
pub mod direct_imaging;
pub mod error;
pub mod integrate;
pub mod measurement;
pub mod montecarlo;
pub mod overlap;
pub mod psf;
pub mod quadrature;
pub mod resolution;
pub mod roots;
pub mod spline;

pub use error::{Error, Result};
pub use measurement::MeasurementModel;
pub use psf::{ModePair, PsfKind, TransferFunction};
