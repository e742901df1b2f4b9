//! Ready-made links for the BER engine: single-user baselines, two-user
//! superposition with SIC or joint ML detection, trellis-coded variants,
//! and overloaded code-domain spreading.
//!
//! Each scenario documents how it maps the sweep's SNR axis to a noise
//! power; transmit powers are normalized at construction so the axis keeps
//! its meaning across scenarios.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Scenario, TrialCount};
use crate::cdnoma::{lds_spread, mmse_mud, SignatureMatrix};
use crate::constellation::{Constellation, ConstellationKind, PowerSplit, SuperConstellation};
use crate::link::{awgn, ml_detect, sic_detect, transmit};
use crate::tcm::{
    encode_terminated, joint_viterbi, sic_tcm_decode, tcnoma_transmit, tensor_product,
    viterbi_decode, ProductTrellis, TcNomaConfig, TcmError, Trellis,
};

fn linear(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn random_bits(n: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    (0..n).map(|_| u8::from(rng.random::<bool>())).collect()
}

fn count_bit_errors(sent: &[u8], decoded: &[u8]) -> u64 {
    sent.iter().zip(decoded).filter(|(a, b)| a != b).count() as u64
}

/// Gray-labelled QPSK over AWGN, the textbook baseline.
///
/// The SNR axis is Eb/N0 in dB: with unit symbol energy and 2 bits per
/// symbol, the noise power is `0.5 * 10^(-x/10)`, which makes the measured
/// curve comparable to [`super::qpsk_awgn_reference`] point by point.
pub struct QpskAwgnScenario {
    qpsk: Constellation,
}

impl QpskAwgnScenario {
    pub fn new() -> Self {
        Self {
            qpsk: Constellation::standard(ConstellationKind::Psk, 4)
                .expect("QPSK is a supported standard constellation"),
        }
    }
}

impl Default for QpskAwgnScenario {
    fn default() -> Self {
        Self::new()
    }
}

impl Scenario for QpskAwgnScenario {
    fn num_users(&self) -> usize {
        1
    }

    fn run_trial(&self, snr_db: f64, rng: &mut ChaCha8Rng) -> Vec<TrialCount> {
        let sigma2 = 0.5 / linear(snr_db);
        let sent = rng.random_range(0..self.qpsk.order());
        let y = transmit(self.qpsk.symbols()[sent], one(), sigma2, rng);
        let decided = self.qpsk.nearest(y);
        let errors = self.qpsk.labels()[sent].hamming_distance(&self.qpsk.labels()[decided]);
        vec![TrialCount { errors: u64::from(errors), bits: 2 }]
    }
}

/// Which receiver the two-user superposition scenario runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairDetector {
    /// Decode the coarse user first, cancel it, then the fine user.
    Sic,
    /// Jointly pick the nearest composite point.
    Ml,
}

/// Two uncoded users superimposed with a power split, decoded per symbol.
///
/// The SNR axis sets the noise power to `10^(-x/10)`; the transmit side
/// keeps whatever total power the split carries, so keep it at 1 when the
/// axis should read as composite symbol energy over noise. User 0 of the
/// counts is the fine (`alpha`) user.
pub struct NomaPairScenario {
    fine: Constellation,
    coarse: Constellation,
    composite: SuperConstellation,
    split: PowerSplit,
    gain: Complex64,
    detector: PairDetector,
}

impl NomaPairScenario {
    pub fn new(
        fine: Constellation,
        coarse: Constellation,
        split: PowerSplit,
        gain: Complex64,
        detector: PairDetector,
    ) -> Self {
        let composite = SuperConstellation::superimpose(&fine, &coarse, split);
        Self { fine, coarse, composite, split, gain, detector }
    }
}

impl Scenario for NomaPairScenario {
    fn num_users(&self) -> usize {
        2
    }

    fn run_trial(&self, snr_db: f64, rng: &mut ChaCha8Rng) -> Vec<TrialCount> {
        let sigma2 = 1.0 / linear(snr_db);
        let m2 = self.coarse.order();
        let i1 = rng.random_range(0..self.fine.order());
        let i2 = rng.random_range(0..m2);
        let x = self.composite.points()[i1 * m2 + i2].value;
        let y = transmit(x, self.gain, sigma2, rng);
        let decision = match self.detector {
            PairDetector::Sic => {
                sic_detect(y, self.gain, &self.fine, &self.coarse, self.split)
            }
            PairDetector::Ml => ml_detect(y, self.gain, &self.composite),
        };
        let e1 = self.fine.labels()[i1].hamming_distance(&decision.label1);
        let e2 = self.coarse.labels()[i2].hamming_distance(&decision.label2);
        vec![
            TrialCount { errors: u64::from(e1), bits: u64::from(self.fine.bits_per_symbol()) },
            TrialCount { errors: u64::from(e2), bits: u64::from(self.coarse.bits_per_symbol()) },
        ]
    }
}

/// A single trellis-coded user over AWGN, one terminated frame per trial.
///
/// Symbols leave at unit energy, so the SNR axis is symbol energy over
/// noise and the noise power is `10^(-x/10)`. Only payload bits are
/// counted; the termination tail is overhead the decoder knows about.
pub struct TcmScenario {
    trellis: Trellis,
    payload_steps: usize,
    total_steps: usize,
}

impl TcmScenario {
    pub fn new(trellis: Trellis, payload_steps: usize) -> Result<Self, TcmError> {
        let total_steps = payload_steps + trellis.max_steering_len()?;
        Ok(Self { trellis, payload_steps, total_steps })
    }
}

impl Scenario for TcmScenario {
    fn num_users(&self) -> usize {
        1
    }

    fn run_trial(&self, snr_db: f64, rng: &mut ChaCha8Rng) -> Vec<TrialCount> {
        let sigma2 = 1.0 / linear(snr_db);
        let payload_bits = self.payload_steps * self.trellis.input_bits() as usize;
        let bits = random_bits(payload_bits, rng);
        let symbols = encode_terminated(&self.trellis, &bits, self.total_steps)
            .expect("frame length fits the payload and tail");
        let y: Vec<Complex64> = symbols
            .iter()
            .map(|&s| transmit(self.trellis.constellation().symbols()[s], one(), sigma2, rng))
            .collect();
        let decoded = viterbi_decode(&self.trellis, &y, one());
        vec![TrialCount {
            errors: count_bit_errors(&bits, &decoded[..payload_bits]),
            bits: payload_bits as u64,
        }]
    }
}

/// Receiver choice for the trellis-coded superposition scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TcDecoder {
    /// Viterbi on the tensor-product trellis, both users at once.
    Joint,
    /// Decode the stronger user, cancel, decode the weaker.
    Sic,
}

/// Two trellis-coded users superimposed, one terminated frame per trial.
///
/// The SNR axis sets the noise power to `10^(-x/10)` at the configured
/// receiver gain (1 unless overridden), so it reads as composite symbol
/// energy over noise when `power1 + power2 = 1` and `|gain| = 1`. User 2's
/// constellation carries the configured rotation (pi/8 by default).
pub struct TcNomaScenario {
    t1: Trellis,
    t2: Trellis,
    product: Option<ProductTrellis>,
    power1: f64,
    power2: f64,
    rotation: f64,
    gain: Complex64,
    payload_steps: usize,
    decoder: TcDecoder,
}

impl TcNomaScenario {
    pub fn new(
        t1: Trellis,
        t2: Trellis,
        power1: f64,
        power2: f64,
        payload_steps: usize,
        decoder: TcDecoder,
    ) -> Self {
        let product = matches!(decoder, TcDecoder::Joint).then(|| tensor_product(&t1, &t2));
        Self {
            t1,
            t2,
            product,
            power1,
            power2,
            rotation: TcNomaConfig::DEFAULT_ROTATION,
            gain: one(),
            payload_steps,
            decoder,
        }
    }

    pub fn with_rotation(mut self, rotation: f64) -> Self {
        self.rotation = rotation;
        self
    }

    pub fn with_gain(mut self, gain: Complex64) -> Self {
        self.gain = gain;
        self
    }
}

impl Scenario for TcNomaScenario {
    fn num_users(&self) -> usize {
        2
    }

    fn run_trial(&self, snr_db: f64, rng: &mut ChaCha8Rng) -> Vec<TrialCount> {
        let cfg = TcNomaConfig {
            power1: self.power1,
            power2: self.power2,
            rotation: self.rotation,
            gains: vec![self.gain],
            noise_power: 1.0 / linear(snr_db),
        };
        let n1 = self.payload_steps * self.t1.input_bits() as usize;
        let n2 = self.payload_steps * self.t2.input_bits() as usize;
        let bits1 = random_bits(n1, rng);
        let bits2 = random_bits(n2, rng);
        let tx = tcnoma_transmit(&self.t1, &self.t2, &cfg, &bits1, &bits2, rng)
            .expect("scenario frames are aligned by construction");
        let y = &tx.received[0];
        let (d1, d2) = match self.decoder {
            TcDecoder::Joint => joint_viterbi(
                self.product.as_ref().expect("joint decoder builds the product"),
                y,
                cfg.gains[0],
                &cfg,
            ),
            TcDecoder::Sic => sic_tcm_decode(&self.t1, &self.t2, y, cfg.gains[0], &cfg),
        };
        vec![
            TrialCount { errors: count_bit_errors(&bits1, &d1[..n1]), bits: n1 as u64 },
            TrialCount { errors: count_bit_errors(&bits2, &d2[..n2]), bits: n2 as u64 },
        ]
    }
}

/// QPSK users separated by sparse signatures and a linear MMSE detector,
/// one spread vector per trial.
///
/// Per-user transmit power is 1 (normalize the matrix columns if users
/// should not gain energy from occupying several resources). The SNR axis
/// sets the per-resource noise power to `10^(-x/10)`.
pub struct LdsScenario {
    matrix: SignatureMatrix,
    qpsk: Constellation,
    gains: Vec<Complex64>,
    powers: Vec<f64>,
}

impl LdsScenario {
    pub fn new(matrix: SignatureMatrix) -> Self {
        let users = matrix.num_users();
        Self {
            matrix,
            qpsk: Constellation::standard(ConstellationKind::Psk, 4)
                .expect("QPSK is a supported standard constellation"),
            gains: vec![one(); users],
            powers: vec![1.0; users],
        }
    }
}

impl Scenario for LdsScenario {
    fn num_users(&self) -> usize {
        self.matrix.num_users()
    }

    fn run_trial(&self, snr_db: f64, rng: &mut ChaCha8Rng) -> Vec<TrialCount> {
        let sigma2 = 1.0 / linear(snr_db);
        let users = self.matrix.num_users();
        let sent: Vec<usize> =
            (0..users).map(|_| rng.random_range(0..self.qpsk.order())).collect();
        let x: Vec<Complex64> = sent.iter().map(|&i| self.qpsk.symbols()[i]).collect();
        let mut y = lds_spread(&x, &self.matrix, &self.gains)
            .expect("symbol count matches the signature matrix");
        for value in &mut y {
            *value += awgn(sigma2, rng);
        }
        let estimates = mmse_mud(&y, &self.matrix, &self.gains, &self.powers, sigma2)
            .expect("covariance is regularized by the noise power");
        sent.iter()
            .zip(&estimates)
            .map(|(&i, &est)| {
                let decided = self.qpsk.nearest(est);
                let errors =
                    self.qpsk.labels()[i].hamming_distance(&self.qpsk.labels()[decided]);
                TrialCount { errors: u64::from(errors), bits: 2 }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{qpsk_awgn_reference, run_ber, SimConfig};

    fn sweep(grid: &[f64], max_trials: u64, target: u64, seed: u64) -> SimConfig {
        SimConfig {
            snr_grid_db: grid.to_vec(),
            max_trials,
            target_errors: target,
            master_seed: seed,
        }
    }

    #[test]
    fn qpsk_measurement_agrees_with_the_closed_form() {
        let curve =
            run_ber(&QpskAwgnScenario::new(), &sweep(&[4.0], 1_000_000, 300, 7)).unwrap();
        let user = &curve.points[0].users[0];
        let expect = qpsk_awgn_reference(4.0);
        assert!(
            (user.ber - expect).abs() <= 3.0 * user.ci95,
            "measured {} vs reference {expect} with ci {}",
            user.ber,
            user.ci95
        );
    }

    #[test]
    fn superposed_pair_is_error_free_at_high_snr() {
        let qpsk = || Constellation::standard(ConstellationKind::Psk, 4).unwrap();
        let split = PowerSplit::new(0.2, 1.0).unwrap();
        for detector in [PairDetector::Sic, PairDetector::Ml] {
            let scenario = NomaPairScenario::new(qpsk(), qpsk(), split, one(), detector);
            let curve = run_ber(&scenario, &sweep(&[60.0], 200, 1, 3)).unwrap();
            let point = &curve.points[0];
            assert_eq!(point.trials, 200, "{detector:?} errored at 60 dB");
            assert!(point.users.iter().all(|u| u.errors == 0));
        }
    }

    #[test]
    fn joint_detection_never_loses_to_sic_on_shared_noise() {
        let qpsk = || Constellation::standard(ConstellationKind::Psk, 4).unwrap();
        let split = PowerSplit::new(0.2, 1.0).unwrap();
        // Same master seed: both runs see identical symbols and noise.
        let config = sweep(&[10.0], 1_000_000, 150, 11);
        let ml = run_ber(
            &NomaPairScenario::new(qpsk(), qpsk(), split, one(), PairDetector::Ml),
            &config,
        )
        .unwrap();
        let sic = run_ber(
            &NomaPairScenario::new(qpsk(), qpsk(), split, one(), PairDetector::Sic),
            &config,
        )
        .unwrap();
        for user in 0..2 {
            let ml_errors = ml.points[0].users[user].errors as f64
                / ml.points[0].users[user].bits as f64;
            let sic_errors = sic.points[0].users[user].errors as f64
                / sic.points[0].users[user].bits as f64;
            assert!(
                ml_errors <= sic_errors,
                "user {user}: ML {ml_errors} vs SIC {sic_errors}"
            );
        }
    }

    #[test]
    fn coded_frames_decode_cleanly_without_noise() {
        let scenario = TcmScenario::new(Trellis::ungerboeck_4state_8psk(), 40).unwrap();
        let curve = run_ber(&scenario, &sweep(&[50.0], 30, 1, 5)).unwrap();
        assert_eq!(curve.points[0].users[0].errors, 0);
        assert_eq!(curve.points[0].users[0].bits, 30 * 80);
    }

    #[test]
    fn coded_superposition_scenarios_are_clean_at_high_snr() {
        let code = Trellis::ungerboeck_4state_8psk;
        for decoder in [TcDecoder::Joint, TcDecoder::Sic] {
            let scenario = TcNomaScenario::new(code(), code(), 0.2, 0.8, 20, decoder);
            let curve = run_ber(&scenario, &sweep(&[55.0], 20, 1, 9)).unwrap();
            let point = &curve.points[0];
            assert!(
                point.users.iter().all(|u| u.errors == 0),
                "{decoder:?} errored at 55 dB"
            );
        }
    }

    #[test]
    fn overloaded_spreading_has_a_floor_but_beats_guessing() {
        let scenario = LdsScenario::new(SignatureMatrix::lds_6x9().normalized_columns());
        let curve = run_ber(&scenario, &sweep(&[10.0], 20_000, 100, 13)).unwrap();
        let point = &curve.points[0];
        for (user, u) in point.users.iter().enumerate() {
            assert!(u.ber > 1e-3, "user {user} implausibly clean in overload: {}", u.ber);
            assert!(u.ber < 0.5, "user {user} worse than guessing: {}", u.ber);
        }
    }
}
