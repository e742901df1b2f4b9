//! Root-raised-cosine pulse autocorrelation.
//!
//! With root-raised-cosine shaping at the transmitter and its matched
//! filter at the receiver, the end-to-end pulse is the raised cosine and
//! every inter-symbol, inter-user coupling coefficient is a sample of its
//! autocorrelation `g`. Time is measured in symbol periods throughout.

use super::AnomaError;

/// A root-raised-cosine pulse, described by its roll-off factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseShape {
    rolloff: f64,
}

impl PulseShape {
    /// Roll-off (excess bandwidth) factor in `[0, 1]`.
    pub fn new(rolloff: f64) -> Result<Self, AnomaError> {
        if !(0.0..=1.0).contains(&rolloff) || !rolloff.is_finite() {
            return Err(AnomaError::InvalidRolloff { rolloff });
        }
        Ok(Self { rolloff })
    }

    pub fn rolloff(&self) -> f64 {
        self.rolloff
    }

    /// Occupied (two-sided) bandwidth in units of the symbol rate.
    pub fn bandwidth_expansion(&self) -> f64 {
        1.0 + self.rolloff
    }

    /// The raised-cosine autocorrelation `g(t)` at lag `t` symbol periods:
    ///
    /// `g(t) = sinc(t) cos(pi b t) / (1 - (2 b t)^2)`
    ///
    /// with normalized `sinc`. The removable singularity at `|2 b t| = 1` is
    /// filled with its limit, evaluated through a series-safe form so the
    /// function stays smooth in a neighbourhood of the singular lag.
    /// `g(0) = 1` and `g(k) = 0` at nonzero integers (Nyquist property).
    pub fn autocorrelation(&self, t: f64) -> f64 {
        let b = self.rolloff;
        let a = t.abs();
        let u = 2.0 * b * a;
        // Near |2bt| = 1 write cos(pi b t) = -sin(pi b (a - a0)) with
        // a0 = 1/(2b) and cancel the root of the denominator analytically.
        if (u - 1.0).abs() < 1e-6 {
            let delta = a - 1.0 / (2.0 * b);
            let factor = sinc(b * delta) * std::f64::consts::PI / (2.0 * (1.0 + u));
            return sinc(a) * factor;
        }
        sinc(a) * (std::f64::consts::PI * b * a).cos() / (1.0 - u * u)
    }
}

impl Default for PulseShape {
    /// Roll-off 0.5, the working point used throughout the examples.
    fn default() -> Self {
        Self { rolloff: 0.5 }
    }
}

/// Normalized sinc, `sin(pi x) / (pi x)` with `sinc(0) = 1`.
fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}
