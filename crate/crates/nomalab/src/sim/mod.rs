//! Monte Carlo bit-error-rate engine.
//!
//! A [`Scenario`] simulates one independent trial and reports, per user, how
//! many bits went over the air and how many came back wrong. [`run_ber`]
//! sweeps an SNR grid, running trials in parallel batches but folding the
//! counts in trial order, so a run stops at exactly the same trial no matter
//! how many threads participate. Every trial seeds its own random stream
//! from `(master seed, SNR index, trial index)`, which makes whole curves
//! reproducible bit for bit.

mod scenarios;

pub use scenarios::{
    LdsScenario, NomaPairScenario, PairDetector, QpskAwgnScenario, TcDecoder, TcNomaScenario,
    TcmScenario,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::io::{self, Write};
use thiserror::Error;

/// How many trials each parallel batch schedules before the sequential fold
/// checks the stopping rule again. Larger batches amortize thread startup;
/// anything computed past the stopping trial is discarded, never counted.
const BATCH: u64 = 256;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("the SNR grid is empty")]
    EmptyGrid,
    #[error("max_trials must be at least 1")]
    ZeroTrials,
    #[error("target_errors must be at least 1")]
    ZeroTargetErrors,
}

/// Stopping rule and reproducibility knobs for a BER sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// SNR points to sweep, in dB. Each scenario documents how it maps this
    /// axis to a noise power.
    pub snr_grid_db: Vec<f64>,
    /// Hard cap on trials per SNR point.
    pub max_trials: u64,
    /// A point stops early once every user has collected this many errors.
    pub target_errors: u64,
    /// Seed of the whole sweep; trials derive their streams from it.
    pub master_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            snr_grid_db: Vec::new(),
            max_trials: 10_000_000,
            target_errors: 100,
            master_seed: 1,
        }
    }
}

/// Error and bit counts from one trial (or accumulated over many).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrialCount {
    pub errors: u64,
    pub bits: u64,
}

/// One user's measured error rate at one SNR point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserBer {
    pub errors: u64,
    pub bits: u64,
    /// `errors / bits`, 0 when no bits were counted.
    pub ber: f64,
    /// Half-width of the 95% normal-approximation confidence interval.
    pub ci95: f64,
}

impl UserBer {
    fn from_count(count: TrialCount) -> Self {
        if count.bits == 0 {
            return Self { errors: count.errors, bits: 0, ber: 0.0, ci95: 0.0 };
        }
        let p = count.errors as f64 / count.bits as f64;
        let ci95 = 1.96 * (p * (1.0 - p) / count.bits as f64).sqrt();
        Self { errors: count.errors, bits: count.bits, ber: p, ci95 }
    }
}

/// One SNR point of a finished sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub trials: u64,
    pub users: Vec<UserBer>,
}

/// A finished BER sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub points: Vec<BerPoint>,
}

impl BerCurve {
    /// Writes `snr_db,user,ber,errors,trials,ci95` rows, one per user per
    /// SNR point.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "snr_db,user,ber,errors,trials,ci95")?;
        for point in &self.points {
            for (user, u) in point.users.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    point.snr_db, user, u.ber, u.errors, point.trials, u.ci95
                )?;
            }
        }
        Ok(())
    }
}

/// A link whose bit error rate is worth measuring.
///
/// Implementations must be pure functions of `(snr_db, rng)`: all randomness
/// comes from the passed generator, so the engine can replay any trial.
pub trait Scenario: Sync {
    fn num_users(&self) -> usize;

    /// Simulates one independent trial and returns one count per user.
    fn run_trial(&self, snr_db: f64, rng: &mut ChaCha8Rng) -> Vec<TrialCount>;
}

/// The random stream of one trial, derived from the sweep seed and the
/// trial's coordinates with a splitmix64 absorb-and-advance chain.
pub fn trial_rng(master_seed: u64, snr_index: usize, trial_index: u64) -> ChaCha8Rng {
    let mut state = master_seed;
    splitmix64(&mut state);
    state ^= snr_index as u64;
    splitmix64(&mut state);
    state ^= trial_index;
    let key = splitmix64(&mut state);
    ChaCha8Rng::seed_from_u64(key)
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sweeps the SNR grid, stopping each point once every user reaches the
/// error target or the trial cap is hit.
///
/// Trials run in parallel batches, but counts are folded strictly in trial
/// order and the stopping rule is checked after every single trial, so the
/// result is independent of thread count and scheduling.
pub fn run_ber<S: Scenario + ?Sized>(
    scenario: &S,
    config: &SimConfig,
) -> Result<BerCurve, SimError> {
    if config.snr_grid_db.is_empty() {
        return Err(SimError::EmptyGrid);
    }
    if config.max_trials == 0 {
        return Err(SimError::ZeroTrials);
    }
    if config.target_errors == 0 {
        return Err(SimError::ZeroTargetErrors);
    }
    let users = scenario.num_users();
    let done =
        |totals: &[TrialCount]| totals.iter().all(|c| c.errors >= config.target_errors);
    let mut points = Vec::with_capacity(config.snr_grid_db.len());
    for (snr_index, &snr_db) in config.snr_grid_db.iter().enumerate() {
        let mut totals = vec![TrialCount::default(); users];
        let mut trials = 0u64;
        while trials < config.max_trials && !done(&totals) {
            let batch = BATCH.min(config.max_trials - trials);
            let results: Vec<Vec<TrialCount>> = (0..batch)
                .into_par_iter()
                .map(|offset| {
                    let mut rng = trial_rng(config.master_seed, snr_index, trials + offset);
                    let counts = scenario.run_trial(snr_db, &mut rng);
                    assert_eq!(
                        counts.len(),
                        users,
                        "scenario returned counts for a different user number"
                    );
                    counts
                })
                .collect();
            for counts in results {
                for (total, count) in totals.iter_mut().zip(&counts) {
                    total.errors += count.errors;
                    total.bits += count.bits;
                }
                trials += 1;
                if done(&totals) {
                    break;
                }
            }
        }
        points.push(BerPoint {
            snr_db,
            trials,
            users: totals.into_iter().map(UserBer::from_count).collect(),
        });
    }
    Ok(BerCurve { points })
}

/// Exact bit error rate of Gray-labelled QPSK on the AWGN channel:
/// `erfc(sqrt(Eb/N0)) / 2` at the given Eb/N0 in dB.
pub fn qpsk_awgn_reference(ebn0_db: f64) -> f64 {
    let ebn0 = 10f64.powf(ebn0_db / 10.0);
    0.5 * libm::erfc(ebn0.sqrt())
}
