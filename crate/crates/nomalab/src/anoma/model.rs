//! The stacked linear model induced by asynchronous matched filtering.
//!
//! Each distinct sampling phase (one per user, shared phases merged) is a
//! "branch" of matched-filter outputs. Over a frame of `N` symbols, user
//! `l`'s contribution to branch `b` is an `N x N` Toeplitz block of pulse
//! autocorrelation samples, and the matched-filter noise across branches is
//! correlated with the same block structure. Stacking branches gives
//!
//! `y = A s + n`, `cov(n) = sigma2 R`
//!
//! with `A` holding gain- and power-scaled signal blocks and `R` the
//! branch-to-branch correlation (identity diagonal blocks). Everything the
//! rate and detection code needs is derived from this one structure.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::pulse::PulseShape;
use super::AnomaError;

/// The `N x N` coupling block for a transmitter offset `tau` symbol periods
/// after the sampling phase: entry `(n, m)` is `g(tau + (m - n))`.
///
/// `tau = 0` yields the identity exactly (Nyquist property, special-cased so
/// synchronous models collapse without 1e-16 residue). The general block is
/// Toeplitz but not symmetric; transposition mirrors the offset:
/// `B(tau)^T = B(-tau)`.
pub fn correlation_block(pulse: &PulseShape, tau: f64, n: usize) -> DMatrix<f64> {
    if tau == 0.0 {
        return DMatrix::identity(n, n);
    }
    // Toeplitz: precompute g(tau + d) for d in -(n-1)..=(n-1).
    let offsets: Vec<f64> =
        (-(n as i64 - 1)..=(n as i64 - 1)).map(|d| pulse.autocorrelation(tau + d as f64)).collect();
    DMatrix::from_fn(n, n, |r, c| offsets[(c as i64 - r as i64 + n as i64 - 1) as usize])
}

/// A multi-user, multi-branch observation model over one frame.
#[derive(Debug, Clone)]
pub struct StackedModel {
    frame_len: usize,
    pulse: PulseShape,
    powers: Vec<f64>,
    delays: Vec<f64>,
    /// Effective scalar gain seen at each branch from each user.
    branch_gains: Vec<Vec<Complex64>>,
    /// Sampling phase of each branch.
    branch_delays: Vec<f64>,
    /// Branch aligned with each user's own symbol timing.
    branch_of_user: Vec<usize>,
}

impl StackedModel {
    /// Uplink virtual-MIMO model: one receiver, one sampling branch per
    /// distinct user delay, user `l` reaching every branch with gain
    /// `gains[l]` and transmit power `powers[l]`.
    ///
    /// Users sharing the same delay share one branch (their blocks are
    /// identical, and keeping duplicates would make the stacked noise
    /// correlation singular). With all delays equal this collapses to the
    /// synchronous one-branch model.
    pub fn virtual_mimo(
        gains: &[Complex64],
        powers: &[f64],
        delays: &[f64],
        pulse: PulseShape,
        frame_len: usize,
    ) -> Result<Self, AnomaError> {
        let users = gains.len();
        // All users see identical per-branch gain rows, so branches merge on
        // delay alone.
        let rows = vec![gains.to_vec(); users];
        Self::build(rows, powers, delays, pulse, frame_len)
    }

    /// Downlink beamformed model: receiver `k` (row `k` of `channels`)
    /// observes stream `l` through the scalar `h_k^H w_l`, where `w_l` is
    /// column `l` of `beams`. Stream powers are carried by the beam norms.
    ///
    /// Branch `k` is receiver `k`'s own matched-filter output sampled at
    /// `delays[k]`. With a single antenna and unit beams this reduces to
    /// [`StackedModel::virtual_mimo`] with unit powers.
    pub fn beamformed(
        channels: &DMatrix<Complex64>,
        beams: &DMatrix<Complex64>,
        delays: &[f64],
        pulse: PulseShape,
        frame_len: usize,
    ) -> Result<Self, AnomaError> {
        let users = channels.nrows();
        if beams.ncols() != users {
            return Err(AnomaError::LengthMismatch { expected: users, found: beams.ncols() });
        }
        if beams.nrows() != channels.ncols() {
            return Err(AnomaError::LengthMismatch {
                expected: channels.ncols(),
                found: beams.nrows(),
            });
        }
        // Row k of `channels` is h_k^H, so entry (k, l) of the product is
        // the scalar coupling h_k^H w_l.
        let coupling = channels * beams;
        let rows: Vec<Vec<Complex64>> =
            (0..users).map(|k| (0..users).map(|l| coupling[(k, l)]).collect()).collect();
        let powers = vec![1.0; users];
        Self::build(rows, &powers, delays, pulse, frame_len)
    }

    fn build(
        gain_rows: Vec<Vec<Complex64>>,
        powers: &[f64],
        delays: &[f64],
        pulse: PulseShape,
        frame_len: usize,
    ) -> Result<Self, AnomaError> {
        let users = gain_rows.len();
        if users == 0 {
            return Err(AnomaError::NoUsers);
        }
        if frame_len == 0 {
            return Err(AnomaError::EmptyFrame);
        }
        if powers.len() != users {
            return Err(AnomaError::LengthMismatch { expected: users, found: powers.len() });
        }
        if delays.len() != users {
            return Err(AnomaError::LengthMismatch { expected: users, found: delays.len() });
        }
        for (index, &power) in powers.iter().enumerate() {
            if !(power >= 0.0 && power.is_finite()) {
                return Err(AnomaError::InvalidPower { power, index });
            }
        }
        for (index, &delay) in delays.iter().enumerate() {
            if !(0.0..1.0).contains(&delay) {
                return Err(AnomaError::InvalidDelay { delay, index });
            }
        }
        // Merge branches that are observationally identical: same sampling
        // phase and same gain row. Duplicates add no information and make
        // the stacked noise covariance singular.
        let mut branch_delays: Vec<f64> = Vec::new();
        let mut branch_gains: Vec<Vec<Complex64>> = Vec::new();
        let mut branch_of_user = Vec::with_capacity(users);
        for k in 0..users {
            let existing = branch_delays
                .iter()
                .zip(&branch_gains)
                .position(|(&d, g)| d == delays[k] && g == &gain_rows[k]);
            match existing {
                Some(b) => branch_of_user.push(b),
                None => {
                    branch_delays.push(delays[k]);
                    branch_gains.push(gain_rows[k].clone());
                    branch_of_user.push(branch_gains.len() - 1);
                }
            }
        }
        Ok(Self {
            frame_len,
            pulse,
            powers: powers.to_vec(),
            delays: delays.to_vec(),
            branch_gains,
            branch_delays,
            branch_of_user,
        })
    }

    pub fn num_users(&self) -> usize {
        self.powers.len()
    }

    pub fn num_branches(&self) -> usize {
        self.branch_delays.len()
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn pulse(&self) -> &PulseShape {
        &self.pulse
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn delays(&self) -> &[f64] {
        &self.delays
    }

    pub fn branch_delays(&self) -> &[f64] {
        &self.branch_delays
    }

    /// The branch sampled at user `user`'s own symbol timing.
    pub fn branch_of_user(&self, user: usize) -> usize {
        self.branch_of_user[user]
    }

    /// Effective scalar gain from user `user` into branch `branch`.
    pub fn gain(&self, branch: usize, user: usize) -> Complex64 {
        self.branch_gains[branch][user]
    }

    /// The Toeplitz coupling block from user `user` into branch `branch`
    /// (unit gain, unit power).
    pub fn signal_block(&self, branch: usize, user: usize) -> DMatrix<f64> {
        correlation_block(
            &self.pulse,
            self.delays[user] - self.branch_delays[branch],
            self.frame_len,
        )
    }

    /// The full `(B N) x (K N)` observation matrix: block `(b, l)` is
    /// `gain(b, l) sqrt(powers[l])` times [`StackedModel::signal_block`].
    pub fn observation_matrix(&self) -> DMatrix<Complex64> {
        let n = self.frame_len;
        let (b_cnt, k_cnt) = (self.num_branches(), self.num_users());
        let mut a = DMatrix::zeros(b_cnt * n, k_cnt * n);
        for b in 0..b_cnt {
            for l in 0..k_cnt {
                let scale = self.branch_gains[b][l] * self.powers[l].sqrt();
                let block = self.signal_block(b, l);
                for r in 0..n {
                    for c in 0..n {
                        a[(b * n + r, l * n + c)] = scale * block[(r, c)];
                    }
                }
            }
        }
        a
    }

    /// The `(B N) x (B N)` noise correlation across branches: block
    /// `(b, b')` couples branch `b` to branch `b'` through
    /// `g(tau_{b'} - tau_b + k)` samples. Diagonal blocks are identity;
    /// the whole matrix is symmetric positive semidefinite.
    pub fn correlation_full(&self) -> DMatrix<f64> {
        let n = self.frame_len;
        let b_cnt = self.num_branches();
        let mut full = DMatrix::zeros(b_cnt * n, b_cnt * n);
        for b in 0..b_cnt {
            for b2 in 0..b_cnt {
                let block = correlation_block(
                    &self.pulse,
                    self.branch_delays[b2] - self.branch_delays[b],
                    n,
                );
                for r in 0..n {
                    for c in 0..n {
                        full[(b * n + r, b2 * n + c)] = block[(r, c)];
                    }
                }
            }
        }
        full
    }

    /// `sigma2` times [`StackedModel::correlation_full`].
    pub fn noise_covariance(&self, sigma2: f64) -> DMatrix<f64> {
        self.correlation_full() * sigma2
    }

    /// Passes per-user symbol frames through the model: `A s` plus noise
    /// with covariance `sigma2 R`. `symbols[l]` must hold `frame_len`
    /// unit-power symbols for user `l`; `sigma2 = 0` gives the noiseless
    /// stacked observation.
    pub fn transmit<Rg: Rng + ?Sized>(
        &self,
        symbols: &[DVector<Complex64>],
        sigma2: f64,
        rng: &mut Rg,
    ) -> Result<DVector<Complex64>, AnomaError> {
        let n = self.frame_len;
        if symbols.len() != self.num_users() {
            return Err(AnomaError::LengthMismatch {
                expected: self.num_users(),
                found: symbols.len(),
            });
        }
        for s in symbols {
            if s.len() != n {
                return Err(AnomaError::LengthMismatch { expected: n, found: s.len() });
            }
        }
        if !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return Err(AnomaError::InvalidNoisePower { sigma2 });
        }
        let mut stacked = DVector::zeros(self.num_users() * n);
        for (l, s) in symbols.iter().enumerate() {
            stacked.rows_mut(l * n, n).copy_from(s);
        }
        let mut y = self.observation_matrix() * stacked;
        if sigma2 > 0.0 {
            // Colored noise: factor R = U diag(lambda) U^T (clamping tiny
            // negative eigenvalues) and color a white complex normal draw.
            let eig = self.correlation_full().symmetric_eigen();
            let mut white = DVector::zeros(y.len());
            for i in 0..y.len() {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let scale = (sigma2 * eig.eigenvalues[i].max(0.0) / 2.0).sqrt();
                white[i] = Complex64::new(scale * re, scale * im);
            }
            let colored = eig.eigenvectors.map(|v| Complex64::new(v, 0.0)) * white;
            y += colored;
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_offset_block_is_exact_identity() {
        let p = PulseShape::new(0.5).unwrap();
        let b = correlation_block(&p, 0.0, 5);
        assert_eq!(b, DMatrix::identity(5, 5));
    }

    #[test]
    fn half_offset_block_entries_match_direct_evaluation() {
        let p = PulseShape::new(0.5).unwrap();
        let b = correlation_block(&p, 0.5, 3);
        for r in 0..3 {
            for c in 0..3 {
                let expect = p.autocorrelation(0.5 + (c as f64 - r as f64));
                assert_relative_eq!(b[(r, c)], expect, epsilon = 1e-15);
            }
        }
        // Toeplitz structure.
        assert_eq!(b[(0, 0)], b[(1, 1)]);
        assert_eq!(b[(0, 1)], b[(1, 2)]);
        assert_relative_eq!(b[(0, 0)], 0.60021, epsilon = 1e-4);
    }

    #[test]
    fn block_transpose_mirrors_the_offset() {
        let p = PulseShape::new(0.3).unwrap();
        let fwd = correlation_block(&p, 0.4, 6);
        let bwd = correlation_block(&p, -0.4, 6);
        assert_relative_eq!((fwd.transpose() - bwd).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn single_synchronous_user_is_scaled_identity() {
        let p = PulseShape::default();
        let m =
            StackedModel::virtual_mimo(&[c(0.8, 0.6)], &[4.0], &[0.0], p, 3).unwrap();
        assert_eq!(m.num_branches(), 1);
        let a = m.observation_matrix();
        for r in 0..3 {
            for col in 0..3 {
                let expect = if r == col { c(1.6, 1.2) } else { c(0.0, 0.0) };
                assert!((a[(r, col)] - expect).norm() < 1e-14);
            }
        }
        assert_eq!(m.correlation_full(), DMatrix::identity(3, 3));
    }

    #[test]
    fn equal_delays_collapse_to_one_branch() {
        let p = PulseShape::default();
        let m = StackedModel::virtual_mimo(
            &[c(1.0, 0.0), c(0.5, 0.0)],
            &[1.0, 2.0],
            &[0.25, 0.25],
            p,
            4,
        )
        .unwrap();
        assert_eq!(m.num_branches(), 1);
        assert_eq!(m.branch_of_user(0), 0);
        assert_eq!(m.branch_of_user(1), 0);
        // One branch of 4 samples observing 8 unknowns.
        let a = m.observation_matrix();
        assert_eq!((a.nrows(), a.ncols()), (4, 8));
        assert_eq!(m.correlation_full(), DMatrix::identity(4, 4));
    }

    #[test]
    fn two_branch_noise_correlation_structure() {
        let p = PulseShape::new(0.5).unwrap();
        let m = StackedModel::virtual_mimo(
            &[c(1.0, 0.0), c(1.0, 0.0)],
            &[1.0, 1.0],
            &[0.0, 0.5],
            p,
            4,
        )
        .unwrap();
        assert_eq!(m.num_branches(), 2);
        let r = m.correlation_full();
        assert_eq!(r.nrows(), 8);
        // Diagonal blocks: identity.
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(r[(i, j)], expect, epsilon = 1e-14);
                assert_relative_eq!(r[(4 + i, 4 + j)], expect, epsilon = 1e-14);
            }
        }
        // Off-diagonal blocks mirror each other.
        let g = |t: f64| p.autocorrelation(t);
        assert_relative_eq!(r[(0, 4)], g(0.5), epsilon = 1e-14);
        assert_relative_eq!(r[(0, 5)], g(1.5), epsilon = 1e-14);
        assert_relative_eq!(r[(4, 0)], g(-0.5), epsilon = 1e-14);
        assert_relative_eq!((r.clone() - r.transpose()).norm(), 0.0, epsilon = 1e-12);
        // Whole matrix positive semidefinite.
        let eig = r.symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&l| l > -1e-9));
    }

    #[test]
    fn observation_blocks_scale_with_gain_and_power() {
        let p = PulseShape::new(0.5).unwrap();
        let m = StackedModel::virtual_mimo(
            &[c(0.0, 1.0), c(2.0, 0.0)],
            &[4.0, 0.25],
            &[0.0, 0.5],
            p,
            2,
        )
        .unwrap();
        let a = m.observation_matrix();
        // Branch 0 (phase 0), user 0: gain j, amplitude 2, tau = 0: 2j I.
        assert!((a[(0, 0)] - c(0.0, 2.0)).norm() < 1e-14);
        assert!((a[(1, 0)] - c(0.0, 0.0)).norm() < 1e-14);
        // Branch 0, user 1: gain 2, amplitude 0.5, tau = 0.5.
        let g = |t: f64| p.autocorrelation(t);
        assert!((a[(0, 2)] - c(g(0.5), 0.0)).norm() < 1e-12);
        assert!((a[(0, 3)] - c(g(1.5), 0.0)).norm() < 1e-12);
        // Branch 1 (phase 0.5), user 0: tau = -0.5.
        assert!((a[(2, 0)] - c(0.0, 2.0 * g(-0.5))).norm() < 1e-12);
    }

    #[test]
    fn beamformed_single_antenna_matches_virtual_mimo() {
        let p = PulseShape::new(0.5).unwrap();
        let h = DMatrix::from_row_slice(2, 1, &[c(0.9, 0.1), c(0.4, -0.7)]);
        let w = DMatrix::from_row_slice(1, 2, &[c(1.0, 0.0), c(1.0, 0.0)]);
        let bf = StackedModel::beamformed(&h, &w, &[0.0, 0.5], p, 3).unwrap();
        // Receiver k hears stream l with gain h_k * 1, like a virtual MIMO
        // model where the branch gain row equals the channel row.
        assert_eq!(bf.num_branches(), 2);
        assert!((bf.gain(0, 0) - c(0.9, 0.1)).norm() < 1e-15);
        assert!((bf.gain(0, 1) - c(0.9, 0.1)).norm() < 1e-15);
        assert!((bf.gain(1, 0) - c(0.4, -0.7)).norm() < 1e-15);
    }

    #[test]
    fn beamformed_orthogonal_beams_decouple() {
        let p = PulseShape::new(0.5).unwrap();
        // Two antennas; h_k^H rows picked orthogonal to the other beam.
        let h = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]);
        let w = DMatrix::from_row_slice(2, 2, &[c(3.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        let bf = StackedModel::beamformed(&h, &w, &[0.0, 0.5], p, 2).unwrap();
        // Cross gains vanish, so cross blocks of A vanish.
        assert_eq!(bf.gain(0, 1), c(0.0, 0.0));
        assert_eq!(bf.gain(1, 0), c(0.0, 0.0));
        let a = bf.observation_matrix();
        for r in 0..2 {
            for col in 2..4 {
                assert_eq!(a[(r, col)], c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn beamformed_random_case_matches_direct_assembly() {
        let p = PulseShape::new(0.35).unwrap();
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[c(0.3, -0.2), c(1.1, 0.4), c(-0.6, 0.9), c(0.2, 0.1)],
        );
        let w = DMatrix::from_row_slice(
            2,
            2,
            &[c(0.7, 0.2), c(-0.3, 0.5), c(0.1, -0.9), c(0.8, 0.0)],
        );
        let delays = [0.1, 0.7];
        let n = 3;
        let bf = StackedModel::beamformed(&h, &w, &delays, p, n).unwrap();
        let a = bf.observation_matrix();
        for k in 0..2 {
            for l in 0..2 {
                let gain: Complex64 =
                    (0..2).map(|mi| h[(k, mi)] * w[(mi, l)]).sum();
                for r in 0..n {
                    for col in 0..n {
                        let expect =
                            gain * p.autocorrelation(delays[l] - delays[k] + (col as f64 - r as f64));
                        assert!((a[(k * n + r, l * n + col)] - expect).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn transmit_without_noise_is_matrix_apply() {
        let p = PulseShape::new(0.5).unwrap();
        let m = StackedModel::virtual_mimo(
            &[c(1.0, 0.0), c(0.6, 0.3)],
            &[2.0, 1.0],
            &[0.0, 0.4],
            p,
            3,
        )
        .unwrap();
        let s1 = DVector::from_row_slice(&[c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0)]);
        let s2 = DVector::from_row_slice(&[c(0.0, -1.0), c(1.0, 0.0), c(-1.0, 0.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y = m.transmit(&[s1.clone(), s2.clone()], 0.0, &mut rng).unwrap();
        let mut stacked = DVector::zeros(6);
        stacked.rows_mut(0, 3).copy_from(&s1);
        stacked.rows_mut(3, 3).copy_from(&s2);
        let direct = m.observation_matrix() * stacked;
        assert!((y - direct).norm() < 1e-13);
    }

    #[test]
    fn transmitted_noise_has_requested_covariance() {
        let p = PulseShape::new(0.5).unwrap();
        let m = StackedModel::virtual_mimo(
            &[c(1.0, 0.0), c(1.0, 0.0)],
            &[1.0, 1.0],
            &[0.0, 0.5],
            p,
            2,
        )
        .unwrap();
        let zeros = vec![DVector::zeros(2), DVector::zeros(2)];
        let sigma2 = 0.7;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let dim = 4;
        let mut acc = DMatrix::<f64>::zeros(dim, dim);
        let trials = 20_000;
        for _ in 0..trials {
            let y = m.transmit(&zeros, sigma2, &mut rng).unwrap();
            for i in 0..dim {
                for j in 0..dim {
                    acc[(i, j)] += (y[i] * y[j].conj()).re;
                }
            }
        }
        let emp = acc / trials as f64;
        let expect = m.noise_covariance(sigma2);
        for i in 0..dim {
            for j in 0..dim {
                assert!(
                    (emp[(i, j)] - expect[(i, j)]).abs() < 0.05,
                    "cov({i},{j}) = {} vs {}",
                    emp[(i, j)],
                    expect[(i, j)]
                );
            }
        }
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let p = PulseShape::default();
        let g = [c(1.0, 0.0)];
        assert!(StackedModel::virtual_mimo(&[], &[], &[], p, 4).is_err());
        assert!(StackedModel::virtual_mimo(&g, &[1.0], &[1.0], p, 4).is_err());
        assert!(StackedModel::virtual_mimo(&g, &[1.0], &[-0.1], p, 4).is_err());
        assert!(StackedModel::virtual_mimo(&g, &[-1.0], &[0.0], p, 4).is_err());
        assert!(StackedModel::virtual_mimo(&g, &[1.0], &[0.0], p, 0).is_err());
        assert!(StackedModel::virtual_mimo(&g, &[1.0, 2.0], &[0.0], p, 4).is_err());
    }
}
