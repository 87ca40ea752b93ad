//! Sampling and interpolation of bandlimited graph signals by successive
//! local aggregation.
//!
//! A graph signal that is sparse in the eigenbasis of a graph-shift operator
//! can be recovered from observations taken at a single node: the node's own
//! value followed by the values it sees after successive applications of the
//! shift. This crate implements that sampling scheme end to end:
//!
//! * [`spectral`] — shift operators, eigendecomposition, graph Fourier
//!   transform, Vandermonde blocks of eigenvalue powers;
//! * [`sampling`] — selection and aggregation sampling, noiseless
//!   interpolation, recovery-condition checks, admissible selection plans;
//! * [`noisy`] — noise-model covariances, best linear unbiased interpolation,
//!   error covariances and metrics, sampling-set design;
//! * [`sparse`] — joint recovery and frequency-support identification when
//!   the active frequencies are unknown;
//! * [`spaceshift`] — the generalized sampler over arbitrary (node, shift)
//!   pairs that contains both selection and aggregation sampling;
//! * [`graphs_io`] — graph generation and ingestion, CSV/JSON persistence.

pub mod error;
pub mod graphs_io;
pub mod linalg;
pub mod noisy;
pub mod rng;
pub mod sampling;
pub mod sparse;
pub mod spaceshift;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
