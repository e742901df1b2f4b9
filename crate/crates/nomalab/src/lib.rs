//! Link-level building blocks for non-orthogonal multiple access studies.
//!
//! The crate covers the parts of a multi-user link that sit between
//! information theory and waveforms:
//!
//! * [`constellation`]: standard PSK/QAM alphabets, Gray labelling, and the
//!   superimposed constellations produced by power-domain superposition coding.
//! * [`link`]: single-carrier transmit/receive helpers, successive
//!   interference cancellation and joint maximum-likelihood detection.
//! * [`anoma`]: symbol-asynchronous NOMA. Builds the stacked linear model
//!   induced by root-raised-cosine matched filtering at user-aligned sampling
//!   phases, evaluates Gaussian achievable rates on it, and runs linear
//!   multi-user detectors.
//! * [`rates`]: closed-form rate expressions for downlink NOMA, the two-user
//!   multiple-access region, and rate-splitting multiple access in both link
//!   directions.
//! * [`tcm`]: trellis-coded modulation, tensor-product (joint) trellises and
//!   trellis-coded NOMA with joint or successive decoding.
//! * [`cdnoma`]: code-domain NOMA with low-density signatures and MMSE
//!   multi-user detection.
//! * [`sim`]: a deterministic Monte Carlo bit-error-rate engine with
//!   reproducible parallel execution.
//!
//! Complex samples are `num_complex::Complex64` throughout, re-exported here
//! as [`Complex64`]. Noise powers are total complex variances: a noise power
//! of `sigma2` means each real dimension carries variance `sigma2 / 2`.

pub mod anoma;
pub mod cdnoma;
pub mod constellation;
pub mod link;
pub mod rates;
pub mod sim;
pub mod tcm;

pub use num_complex::Complex64;
