//! Trellis-coded NOMA: two coded users superimposed on one channel.
//!
//! Both users encode independently; the channel adds their symbol streams
//! with a power split and a relative constellation rotation (default pi/8)
//! that keeps the composite alphabet unambiguous. Receivers either run
//! Viterbi on the tensor-product trellis and decode both users at once
//! ([`joint_viterbi`]), or decode the stronger user first, cancel it, and
//! decode the weaker one ([`sic_tcm_decode`]). Frames are terminated:
//! encoders steer back to state 0 and decoders exploit the known start and
//! end states.

use num_complex::Complex64;
use rand::Rng;

use super::viterbi::viterbi_path;
use super::{ProductTrellis, TcmError, Trellis};
use crate::link::awgn;

/// Parameters of a two-user trellis-coded superposition link.
#[derive(Debug, Clone)]
pub struct TcNomaConfig {
    /// Transmit power of user 1 (usually the weaker share).
    pub power1: f64,
    /// Transmit power of user 2.
    pub power2: f64,
    /// Phase rotation applied to user 2's constellation.
    pub rotation: f64,
    /// Channel gain per receiver.
    pub gains: Vec<Complex64>,
    /// Total complex noise variance per received sample.
    pub noise_power: f64,
}

impl TcNomaConfig {
    /// The rotation that keeps two superimposed 8-PSK rings maximally
    /// separated: half the ring spacing.
    pub const DEFAULT_ROTATION: f64 = std::f64::consts::PI / 8.0;

    /// A config with the default pi/8 rotation.
    pub fn new(
        power1: f64,
        power2: f64,
        gains: Vec<Complex64>,
        noise_power: f64,
    ) -> Result<Self, TcmError> {
        let cfg = Self {
            power1,
            power2,
            rotation: Self::DEFAULT_ROTATION,
            gains,
            noise_power,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), TcmError> {
        for &p in &[self.power1, self.power2] {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(TcmError::InvalidPower { power: p });
            }
        }
        if !(self.noise_power >= 0.0 && self.noise_power.is_finite()) {
            return Err(TcmError::InvalidNoisePower { sigma2: self.noise_power });
        }
        if self.gains.is_empty() {
            return Err(TcmError::NoReceivers);
        }
        Ok(())
    }

    /// Amplitude applied to user 1 symbols.
    fn amplitude1(&self) -> Complex64 {
        Complex64::new(self.power1.sqrt(), 0.0)
    }

    /// Amplitude (including rotation) applied to user 2 symbols.
    fn amplitude2(&self) -> Complex64 {
        Complex64::from_polar(self.power2.sqrt(), self.rotation)
    }
}

/// One transmitted TC-NOMA frame: the noisy samples seen by each receiver
/// plus the ground-truth coded symbol streams.
#[derive(Debug, Clone)]
pub struct TcNomaTransmission {
    /// `received[k][n]`: sample `n` at receiver `k`.
    pub received: Vec<Vec<Complex64>>,
    /// Symbol indices actually sent by user 1 (payload plus termination).
    pub symbols1: Vec<usize>,
    /// Symbol indices actually sent by user 2.
    pub symbols2: Vec<usize>,
    /// Trellis steps carrying payload; the remainder is termination tail.
    pub payload_steps: usize,
}

/// Encodes payload bits, steers to state 0, and idles there until the frame
/// spans exactly `total_steps` transitions.
///
/// `total_steps` must leave room for the steering sequence, so
/// `payload steps + max_steering_len()` always works.
pub fn encode_terminated(
    trellis: &Trellis,
    bits: &[u8],
    total_steps: usize,
) -> Result<Vec<usize>, TcmError> {
    let (mut symbols, end) = trellis.encode(bits, 0)?;
    let mut state = end;
    for input in trellis.steering_inputs(end)? {
        let edge = trellis.edge(state, input);
        symbols.push(edge.symbol);
        state = edge.next_state;
    }
    let idle = trellis
        .edges(0)
        .iter()
        .find(|e| e.next_state == 0)
        .ok_or(TcmError::NoIdleEdge)?;
    while symbols.len() < total_steps {
        symbols.push(idle.symbol);
    }
    debug_assert_eq!(symbols.len(), total_steps);
    Ok(symbols)
}

/// Encodes both users' payloads into terminated frames, superimposes them
/// with the configured powers and rotation, and delivers a noisy copy to
/// every receiver.
///
/// Both payloads must span the same number of trellis steps. The frame is
/// extended by a shared termination tail (the worst-case steering length of
/// either code), so `received[k].len() = payload_steps + tail`.
pub fn tcnoma_transmit<R: Rng + ?Sized>(
    t1: &Trellis,
    t2: &Trellis,
    cfg: &TcNomaConfig,
    bits1: &[u8],
    bits2: &[u8],
    rng: &mut R,
) -> Result<TcNomaTransmission, TcmError> {
    cfg.validate()?;
    let b1 = t1.input_bits() as usize;
    let b2 = t2.input_bits() as usize;
    if !bits1.len().is_multiple_of(b1) {
        return Err(TcmError::BitsNotMultiple { len: bits1.len(), input_bits: t1.input_bits() });
    }
    if !bits2.len().is_multiple_of(b2) {
        return Err(TcmError::BitsNotMultiple { len: bits2.len(), input_bits: t2.input_bits() });
    }
    let steps1 = bits1.len() / b1;
    let steps2 = bits2.len() / b2;
    if steps1 != steps2 {
        return Err(TcmError::PayloadMismatch { steps1, steps2 });
    }
    let tail = t1.max_steering_len()?.max(t2.max_steering_len()?);
    let total = steps1 + tail;
    let symbols1 = encode_terminated(t1, bits1, total)?;
    let symbols2 = encode_terminated(t2, bits2, total)?;
    let a1 = cfg.amplitude1();
    let a2 = cfg.amplitude2();
    let composite: Vec<Complex64> = symbols1
        .iter()
        .zip(&symbols2)
        .map(|(&i1, &i2)| {
            a1 * t1.constellation().symbols()[i1] + a2 * t2.constellation().symbols()[i2]
        })
        .collect();
    let received = cfg
        .gains
        .iter()
        .map(|&h| {
            composite
                .iter()
                .map(|&x| {
                    let noise = if cfg.noise_power > 0.0 {
                        awgn(cfg.noise_power, rng)
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    h * x + noise
                })
                .collect()
        })
        .collect();
    Ok(TcNomaTransmission { received, symbols1, symbols2, payload_steps: steps1 })
}

fn bits_from_inputs(inputs: impl Iterator<Item = u32>, width: u8) -> Vec<u8> {
    let mut bits = Vec::new();
    for input in inputs {
        for i in (0..width).rev() {
            bits.push(((input >> i) & 1) as u8);
        }
    }
    bits
}

/// Joint maximum-likelihood sequence detection of both users on the
/// tensor-product trellis.
///
/// `y` is one receiver's terminated frame and `h` that receiver's gain.
/// Returns the decoded bit streams of user 1 and user 2, termination
/// included (the caller keeps the payload prefix). This is the optimum
/// two-user decoder for the superimposed coded signal, at `r1 r2` states of
/// complexity.
pub fn joint_viterbi(
    product: &ProductTrellis,
    y: &[Complex64],
    h: Complex64,
    cfg: &TcNomaConfig,
) -> (Vec<u8>, Vec<u8>) {
    let (c1, c2) = product.constellations();
    let a1 = h * cfg.amplitude1();
    let a2 = h * cfg.amplitude2();
    // Composite point per symbol pair, indexed sym1 * M2 + sym2.
    let m2 = c2.order();
    let table: Vec<Complex64> = (0..c1.order() * m2)
        .map(|i| a1 * c1.symbols()[i / m2] + a2 * c2.symbols()[i % m2])
        .collect();
    let (path, _) = viterbi_path(product, y.len(), 0, 0, |step, state, edge| {
        let (s1, s2) = product.edges(state)[edge].symbols;
        (y[step] - table[s1 * m2 + s2]).norm_sqr()
    });
    let (b1, b2) = product.component_input_bits();
    // Edge indices equal input values by construction.
    let inputs: Vec<(u32, u32)> =
        path.iter().map(|&e| product.split_input(e as u32)).collect();
    (
        bits_from_inputs(inputs.iter().map(|&(u1, _)| u1), b1),
        bits_from_inputs(inputs.iter().map(|&(_, u2)| u2), b2),
    )
}

/// Single-user Viterbi on a terminated frame: picks the coded sequence
/// minimizing `sum |y[n] - scale * symbol|^2` and returns its input bits.
pub fn viterbi_decode(trellis: &Trellis, y: &[Complex64], scale: Complex64) -> Vec<u8> {
    let symbols = trellis.constellation().symbols();
    let (path, _) = viterbi_path(trellis, y.len(), 0, 0, |step, state, edge| {
        (y[step] - scale * symbols[trellis.edges(state)[edge].symbol]).norm_sqr()
    });
    bits_from_inputs(path.iter().map(|&e| e as u32), trellis.input_bits())
}

/// Successive decoding: the stronger user is decoded treating the weaker as
/// noise, re-encoded, cancelled, then the weaker user is decoded clean.
///
/// "Stronger" means larger configured power; ties go to user 2 (the
/// conventional high-power share in a two-user split). Returns the decoded
/// bit streams of user 1 and user 2, termination included. Ambiguity at
/// equal powers and zero rotation makes stage one unreliable even without
/// noise, which is the failure mode joint decoding avoids.
pub fn sic_tcm_decode(
    t1: &Trellis,
    t2: &Trellis,
    y: &[Complex64],
    h: Complex64,
    cfg: &TcNomaConfig,
) -> (Vec<u8>, Vec<u8>) {
    let a1 = h * cfg.amplitude1();
    let a2 = h * cfg.amplitude2();
    let user2_first = cfg.power2 >= cfg.power1;
    let (t_first, a_first, t_second, a_second) = if user2_first {
        (t2, a2, t1, a1)
    } else {
        (t1, a1, t2, a2)
    };
    let bits_first = viterbi_decode(t_first, y, a_first);
    let (symbols_first, _) = t_first
        .encode(&bits_first, 0)
        .expect("decoder output is a valid path");
    let residual: Vec<Complex64> = y
        .iter()
        .zip(&symbols_first)
        .map(|(&s, &idx)| s - a_first * t_first.constellation().symbols()[idx])
        .collect();
    let bits_second = viterbi_decode(t_second, &residual, a_second);
    if user2_first {
        (bits_second, bits_first)
    } else {
        (bits_first, bits_second)
    }
}
