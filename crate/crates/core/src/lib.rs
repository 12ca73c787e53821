//! Spatial-wideband uplink channel simulation for mmWave cell-free massive MIMO.
//!
//! The crate builds frequency-selective channel responses for users served by
//! distributed multi-antenna access points, where both the per-AP propagation
//! distance and the intra-array spacing produce frequency-dependent phases
//! (beam squint). On top of the channel model it provides:
//!
//! - [`beamsquint`]: virtual-angle (DFT) spectra and a peak-drift squint metric,
//! - [`ofdm`]: per-subcarrier delay budgets, the minimum cyclic-prefix bound and a
//!   time-domain OFDM simulator that measures the residual ISI,
//! - [`correlation`]: Monte-Carlo spatial correlation matrices split into intra-AP
//!   (micro) blocks and an inter-AP (macro) matrix.
//!
//! Randomness is confined to [`scenario::PathGenerator`] and the simulators, all of
//! which take explicit seeds; see [`rng`] for the substream scheme.

pub mod beamsquint;
pub mod channel;
pub mod config;
pub mod correlation;
mod error;
pub mod export;
pub mod ofdm;
pub mod phase;
pub mod rng;
pub mod scenario;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
