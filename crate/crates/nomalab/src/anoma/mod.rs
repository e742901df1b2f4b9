//! Symbol-asynchronous NOMA.
//!
//! When users transmit with staggered symbol timing, a bank of matched
//! filters sampled at each user's own phase turns the waveform channel into
//! a stacked linear model `y = A s + n` whose signal blocks and noise
//! correlation are both built from the pulse autocorrelation function
//! ([`pulse`], [`model`]). On that model the crate evaluates Gaussian
//! achievable rates under successive decoding ([`rates`]) and runs linear
//! multi-user detectors plus the eigenbasis precoder that diagonalizes the
//! sampled correlation ([`detect`]).
//!
//! The punchline this module exists to reproduce: with timing offsets the
//! per-branch rates depend on the decoding order, and both orders beat the
//! synchronous sum rate, because each user's own sampling branch sees the
//! interferer through a correlation that is strictly inside the unit ball.

pub mod detect;
pub mod model;
pub mod pulse;
pub mod rates;

pub use detect::{linear_detect, tnoma_precoder, LinearDetector};
pub use model::{correlation_block, StackedModel};
pub use pulse::PulseShape;
pub use rates::{gaussian_rates, RateNormalization};

use thiserror::Error;

/// Errors raised across the asynchronous-NOMA pipeline.
#[derive(Debug, Error)]
pub enum AnomaError {
    #[error("roll-off {rolloff} outside [0, 1]")]
    InvalidRolloff { rolloff: f64 },
    #[error("delay {delay} at user {index} outside [0, 1)")]
    InvalidDelay { delay: f64, index: usize },
    #[error("at least one user is required")]
    NoUsers,
    #[error("frame length must be at least 1")]
    EmptyFrame,
    #[error("expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("power {power} at user {index} is negative or not finite")]
    InvalidPower { power: f64, index: usize },
    #[error("noise power {sigma2} is not positive and finite")]
    InvalidNoisePower { sigma2: f64 },
    #[error("decoding order is not a permutation of 0..{users}")]
    NotAPermutation { users: usize },
    #[error("observation matrix rank {rank} cannot zero-force {needed} unknowns")]
    RankDeficient { rank: usize, needed: usize },
    #[error("matrix is not symmetric (max asymmetry {max_asymmetry:.3e})")]
    NotSymmetric { max_asymmetry: f64 },
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
}
