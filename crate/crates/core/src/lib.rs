//! Quasicyclic principal component analysis (QPCA).
//!
//! Decomposes datasets of cyclostationary frames into families of
//! shift-orthonormal principal pulses by solving independent PCA problems on
//! the cosets of the discrete frequency domain. Besides the decomposition
//! itself, the crate provides classical complex PCA, synthetic modulated
//! data generation, symbol-rate estimation, and band-limited resampling for
//! fractional-rate recordings.

pub mod error;
pub mod estimate;
pub mod pca;
pub mod qpca;
pub mod resample;
pub mod signal;
pub mod synth;

pub use error::{Error, Result};
pub use qpca::{qpca, PhasePolicy, QpcaConfig, QpcaResult};
pub use signal::{Dataset, Signal, Spectrum};
