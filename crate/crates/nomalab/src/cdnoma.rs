//! Code-domain multiple access: sparse signature matrices, low-density
//! spreading, and linear multi-user detection.
//!
//! Users are told apart by signatures instead of power levels: each user's
//! symbol is repeated on a small subset of resource elements, chosen so any
//! two users collide on at most one resource. [`SignatureMatrix::lds_6x9`]
//! is the bundled example (9 users on 6 resources, overload 1.5);
//! [`SignatureMatrix::validate`] audits an arbitrary matrix, [`lds_spread`]
//! maps symbols onto resources, and [`mmse_mud`] separates the users again
//! with a linear minimum mean-square-error filter.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CdnomaError {
    #[error("signature matrix must have at least one resource and one user")]
    EmptyMatrix,
    #[error("user {user} has an all-zero signature column")]
    ZeroColumn { user: usize },
    #[error("row {row} has {found} entries, expected {expected}")]
    RaggedRow { row: usize, found: usize, expected: usize },
    #[error("cannot parse entry at row {row}, column {col}: {text:?}")]
    BadEntry { row: usize, col: usize, text: String },
    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("power {power} of user {user} is negative or not finite")]
    InvalidPower { user: usize, power: f64 },
    #[error("noise power {sigma2} is negative or not finite")]
    InvalidNoisePower { sigma2: f64 },
    #[error("received covariance is singular; increase the noise power")]
    SingularCovariance,
}

/// A resources-by-users signature matrix.
///
/// Entry `(n, k)` is user `k`'s spreading value on resource `n`: 0/1 for
/// plain occupancy mapping, or complex for sequence-based signatures. Every
/// user must touch at least one resource.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureMatrix {
    entries: DMatrix<Complex64>,
}

/// Structural audit of a signature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureReport {
    /// Nonzero entries per column: how many resources each user occupies.
    pub col_weights: Vec<usize>,
    /// Nonzero entries per row: how many users share each resource.
    pub row_weights: Vec<usize>,
    /// Largest number of resources any two users have in common. Low-density
    /// designs keep this at 1; a value of 2 or more marks dense collisions.
    pub max_pair_overlap: usize,
    /// Users per resource, `K / N`. Above 1 the system is overloaded.
    pub overload: f64,
}

impl SignatureMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self, CdnomaError> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(CdnomaError::EmptyMatrix);
        }
        for user in 0..entries.ncols() {
            if entries.column(user).iter().all(|e| e.norm_sqr() == 0.0) {
                return Err(CdnomaError::ZeroColumn { user });
            }
        }
        Ok(Self { entries })
    }

    /// A 6-resource, 9-user low-density occupancy example.
    ///
    /// Every user occupies exactly two resources, every resource carries
    /// exactly three users, and no two users share more than one resource,
    /// so the overload factor is 9/6 = 1.5 while pairwise collisions stay
    /// minimal.
    pub fn lds_6x9() -> Self {
        let rows: [[u8; 9]; 6] = [
            [0, 1, 0, 0, 1, 0, 1, 0, 0],
            [1, 0, 0, 0, 0, 1, 1, 0, 0],
            [0, 1, 0, 1, 0, 0, 0, 1, 0],
            [0, 0, 1, 0, 1, 0, 0, 0, 1],
            [1, 0, 0, 1, 0, 0, 0, 0, 1],
            [0, 0, 1, 0, 0, 1, 0, 1, 0],
        ];
        let entries = DMatrix::from_fn(6, 9, |r, c| Complex64::new(f64::from(rows[r][c]), 0.0));
        Self::new(entries).expect("the bundled matrix has no zero column")
    }

    /// Orthogonal signatures: one dedicated resource per user.
    pub fn identity(n: usize) -> Result<Self, CdnomaError> {
        Self::new(DMatrix::identity(n, n))
    }

    /// Parses comma-separated rows, one line per resource. Entries are real
    /// (`1`, `-0.5`) or complex in `a+bi` form (`0.7+0.7i`, `1i`).
    pub fn from_csv(text: &str) -> Result<Self, CdnomaError> {
        let mut rows: Vec<Vec<Complex64>> = Vec::new();
        for (row, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut values = Vec::new();
            for (col, field) in line.split(',').enumerate() {
                let field = field.trim();
                let value = field
                    .parse::<f64>()
                    .map(|re| Complex64::new(re, 0.0))
                    .or_else(|_| field.parse::<Complex64>())
                    .map_err(|_| CdnomaError::BadEntry {
                        row,
                        col,
                        text: field.to_string(),
                    })?;
                values.push(value);
            }
            if let Some(first) = rows.first() {
                if values.len() != first.len() {
                    return Err(CdnomaError::RaggedRow {
                        row,
                        found: values.len(),
                        expected: first.len(),
                    });
                }
            }
            rows.push(values);
        }
        if rows.is_empty() {
            return Err(CdnomaError::EmptyMatrix);
        }
        let entries =
            DMatrix::from_fn(rows.len(), rows[0].len(), |r, c| rows[r][c]);
        Self::new(entries)
    }

    /// The same signatures scaled so every column has unit energy, which
    /// keeps per-user transmit power independent of how many resources the
    /// user occupies.
    pub fn normalized_columns(&self) -> Self {
        let mut entries = self.entries.clone();
        for mut col in entries.column_iter_mut() {
            let norm = col.norm();
            if norm > 0.0 {
                col /= Complex64::new(norm, 0.0);
            }
        }
        Self { entries }
    }

    pub fn num_resources(&self) -> usize {
        self.entries.nrows()
    }

    pub fn num_users(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Resource indices user `k` occupies.
    fn support(&self, user: usize) -> Vec<usize> {
        self.entries
            .column(user)
            .iter()
            .enumerate()
            .filter(|(_, e)| e.norm_sqr() > 0.0)
            .map(|(n, _)| n)
            .collect()
    }

    /// Audits weights, pairwise collisions, and overload.
    pub fn validate(&self) -> SignatureReport {
        let supports: Vec<Vec<usize>> =
            (0..self.num_users()).map(|k| self.support(k)).collect();
        let col_weights: Vec<usize> = supports.iter().map(Vec::len).collect();
        let row_weights: Vec<usize> = (0..self.num_resources())
            .map(|n| {
                self.entries
                    .row(n)
                    .iter()
                    .filter(|e| e.norm_sqr() > 0.0)
                    .count()
            })
            .collect();
        let mut max_pair_overlap = 0;
        for i in 0..supports.len() {
            for j in i + 1..supports.len() {
                let overlap = supports[i]
                    .iter()
                    .filter(|n| supports[j].contains(n))
                    .count();
                max_pair_overlap = max_pair_overlap.max(overlap);
            }
        }
        SignatureReport {
            col_weights,
            row_weights,
            max_pair_overlap,
            overload: self.num_users() as f64 / self.num_resources() as f64,
        }
    }

    /// The signature matrix with each user's channel gain folded in:
    /// column `k` scaled by `gains[k]`.
    fn effective(&self, gains: &[Complex64]) -> Result<DMatrix<Complex64>, CdnomaError> {
        if gains.len() != self.num_users() {
            return Err(CdnomaError::LengthMismatch {
                expected: self.num_users(),
                found: gains.len(),
            });
        }
        let mut a = self.entries.clone();
        for (k, mut col) in a.column_iter_mut().enumerate() {
            col *= gains[k];
        }
        Ok(a)
    }
}

/// Spreads one symbol per user onto the resources: resource `n` carries
/// `sum_k m[n,k] h_k x_k`.
pub fn lds_spread(
    symbols: &[Complex64],
    matrix: &SignatureMatrix,
    gains: &[Complex64],
) -> Result<Vec<Complex64>, CdnomaError> {
    if symbols.len() != matrix.num_users() {
        return Err(CdnomaError::LengthMismatch {
            expected: matrix.num_users(),
            found: symbols.len(),
        });
    }
    let a = matrix.effective(gains)?;
    let x = DVector::from_column_slice(symbols);
    Ok((a * x).iter().copied().collect())
}

/// Linear MMSE multi-user detection on one spread vector.
///
/// With `A` the gain-scaled signature matrix and `P` the diagonal of
/// transmit powers, returns `x_hat = P A^H (A P A^H + sigma2 I)^{-1} y`.
/// As `sigma2` shrinks this approaches the least-squares separator when the
/// signatures span the users; in overload (more users than resources) a
/// residual interference floor remains by construction.
pub fn mmse_mud(
    y: &[Complex64],
    matrix: &SignatureMatrix,
    gains: &[Complex64],
    powers: &[f64],
    sigma2: f64,
) -> Result<Vec<Complex64>, CdnomaError> {
    if y.len() != matrix.num_resources() {
        return Err(CdnomaError::LengthMismatch {
            expected: matrix.num_resources(),
            found: y.len(),
        });
    }
    if powers.len() != matrix.num_users() {
        return Err(CdnomaError::LengthMismatch {
            expected: matrix.num_users(),
            found: powers.len(),
        });
    }
    for (user, &power) in powers.iter().enumerate() {
        if !(power >= 0.0 && power.is_finite()) {
            return Err(CdnomaError::InvalidPower { user, power });
        }
    }
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(CdnomaError::InvalidNoisePower { sigma2 });
    }
    let a = matrix.effective(gains)?;
    // A P A^H built as (A sqrt(P)) (A sqrt(P))^H to stay exactly hermitian.
    let mut a_sqrt = a.clone();
    for (k, mut col) in a_sqrt.column_iter_mut().enumerate() {
        col *= Complex64::new(powers[k].sqrt(), 0.0);
    }
    let n = matrix.num_resources();
    let mut cov = &a_sqrt * a_sqrt.adjoint();
    for i in 0..n {
        cov[(i, i)] += Complex64::new(sigma2, 0.0);
    }
    let chol = cov.cholesky().ok_or(CdnomaError::SingularCovariance)?;
    let filtered = chol.solve(&DVector::from_column_slice(y));
    let mut x_hat = a.adjoint() * filtered;
    for (k, value) in x_hat.iter_mut().enumerate() {
        *value *= Complex64::new(powers[k], 0.0);
    }
    Ok(x_hat.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::prelude::IndexedRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ones(n: usize) -> Vec<Complex64> {
        vec![c(1.0, 0.0); n]
    }

    #[test]
    fn bundled_matrix_is_a_regular_low_density_design() {
        let report = SignatureMatrix::lds_6x9().validate();
        assert_eq!(report.col_weights, vec![2; 9]);
        assert_eq!(report.row_weights, vec![3; 6]);
        assert_eq!(report.max_pair_overlap, 1);
        assert!((report.overload - 1.5).abs() < 1e-15);
    }

    #[test]
    fn identity_signatures_are_orthogonal() {
        let report = SignatureMatrix::identity(4).unwrap().validate();
        assert_eq!(report.col_weights, vec![1; 4]);
        assert_eq!(report.row_weights, vec![1; 4]);
        assert_eq!(report.max_pair_overlap, 0);
        assert!((report.overload - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dense_signatures_are_reported_as_such() {
        let all_ones = SignatureMatrix::new(DMatrix::from_element(2, 2, c(1.0, 0.0))).unwrap();
        assert_eq!(all_ones.validate().max_pair_overlap, 2);
    }

    #[test]
    fn construction_rejects_silent_users_and_empty_matrices() {
        let mut entries = DMatrix::from_element(3, 2, c(1.0, 0.0));
        entries.column_mut(1).fill(c(0.0, 0.0));
        assert!(matches!(
            SignatureMatrix::new(entries),
            Err(CdnomaError::ZeroColumn { user: 1 })
        ));
        assert!(matches!(
            SignatureMatrix::new(DMatrix::zeros(0, 3)),
            Err(CdnomaError::EmptyMatrix)
        ));
    }

    #[test]
    fn csv_round_trip_with_complex_entries() {
        let text = "1, 0, 0.5+0.5i\n0, 1, 0.5-0.5i\n";
        let m = SignatureMatrix::from_csv(text).unwrap();
        assert_eq!(m.num_resources(), 2);
        assert_eq!(m.num_users(), 3);
        assert_eq!(m.entries()[(0, 2)], c(0.5, 0.5));
        assert_eq!(m.entries()[(1, 2)], c(0.5, -0.5));
        assert!(matches!(
            SignatureMatrix::from_csv("1, x\n"),
            Err(CdnomaError::BadEntry { row: 0, col: 1, .. })
        ));
        assert!(matches!(
            SignatureMatrix::from_csv("1, 0\n1\n"),
            Err(CdnomaError::RaggedRow { row: 1, .. })
        ));
    }

    #[test]
    fn column_normalization_keeps_the_audit_and_fixes_energy() {
        let m = SignatureMatrix::lds_6x9();
        let n = m.normalized_columns();
        assert_eq!(n.validate(), m.validate());
        for k in 0..n.num_users() {
            assert!((n.entries().column(k).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_spreading_passes_symbols_through_their_own_resource() {
        let m = SignatureMatrix::identity(3).unwrap();
        let x = [c(1.0, -1.0), c(0.0, 2.0), c(-0.5, 0.0)];
        let h = [c(1.0, 0.0), c(0.0, 1.0), c(2.0, 0.0)];
        let y = lds_spread(&x, &m, &h).unwrap();
        for k in 0..3 {
            assert!((y[k] - h[k] * x[k]).norm() < 1e-15);
        }
    }

    #[test]
    fn spreading_is_linear_in_the_symbols() {
        let m = SignatureMatrix::lds_6x9();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let vec9 = |rng: &mut ChaCha8Rng| -> Vec<Complex64> {
            (0..9)
                .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect()
        };
        let x = vec9(&mut rng);
        let z = vec9(&mut rng);
        let h = vec9(&mut rng);
        let (a, b) = (c(0.7, -0.3), c(-1.2, 0.4));
        let mixed: Vec<Complex64> =
            x.iter().zip(&z).map(|(&xi, &zi)| a * xi + b * zi).collect();
        let left = lds_spread(&mixed, &m, &h).unwrap();
        let yx = lds_spread(&x, &m, &h).unwrap();
        let yz = lds_spread(&z, &m, &h).unwrap();
        for n in 0..6 {
            assert!((left[n] - (a * yx[n] + b * yz[n])).norm() < 1e-12);
        }
    }

    #[test]
    fn mmse_reduces_to_wiener_scaling_for_orthogonal_signatures() {
        let m = SignatureMatrix::identity(4).unwrap();
        // Unit-modulus gains so |h|^2 = 1 and the filter is P/(P + sigma2).
        let h: Vec<Complex64> =
            (0..4).map(|k| Complex64::from_polar(1.0, 0.4 * k as f64)).collect();
        let y = [c(0.3, 0.1), c(-1.0, 0.5), c(0.0, -0.2), c(0.8, 0.8)];
        let power = 2.0;
        let sigma2 = 0.5;
        let x_hat = mmse_mud(&y, &m, &h, &[power; 4], sigma2).unwrap();
        for k in 0..4 {
            let expect = (power / (power + sigma2)) * (y[k] / h[k]);
            assert!((x_hat[k] - expect).norm() < 1e-12, "user {k}");
        }
    }

    #[test]
    fn mmse_approaches_least_squares_as_noise_vanishes() {
        let entries = DMatrix::from_row_slice(
            3,
            3,
            &[
                c(1.0, 0.0), c(0.5, 0.5), c(0.0, -1.0),
                c(0.0, 1.0), c(1.0, 0.0), c(0.3, 0.0),
                c(0.2, 0.0), c(0.0, 0.4), c(1.0, 0.0),
            ],
        );
        let m = SignatureMatrix::new(entries.clone()).unwrap();
        let x = DVector::from_column_slice(&[c(1.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)]);
        let y: Vec<Complex64> = (&entries * &x).iter().copied().collect();
        let x_hat = mmse_mud(&y, &m, &ones(3), &[1.0; 3], 1e-12).unwrap();
        for k in 0..3 {
            assert!((x_hat[k] - x[k]).norm() < 1e-5, "user {k}: {}", x_hat[k]);
        }
    }

    #[test]
    fn mmse_rejects_bad_shapes_and_parameters() {
        let m = SignatureMatrix::lds_6x9();
        let y = ones(6);
        assert!(matches!(
            mmse_mud(&ones(5), &m, &ones(9), &[1.0; 9], 0.1),
            Err(CdnomaError::LengthMismatch { expected: 6, found: 5 })
        ));
        assert!(matches!(
            mmse_mud(&y, &m, &ones(8), &[1.0; 9], 0.1),
            Err(CdnomaError::LengthMismatch { expected: 9, found: 8 })
        ));
        assert!(matches!(
            mmse_mud(&y, &m, &ones(9), &[1.0; 8], 0.1),
            Err(CdnomaError::LengthMismatch { expected: 9, found: 8 })
        ));
        assert!(matches!(
            mmse_mud(&y, &m, &ones(9), &[-1.0; 9], 0.1),
            Err(CdnomaError::InvalidPower { user: 0, .. })
        ));
        assert!(matches!(
            mmse_mud(&y, &m, &ones(9), &[1.0; 9], -0.1),
            Err(CdnomaError::InvalidNoisePower { .. })
        ));
    }

    /// Hard-slices a QPSK estimate to the nearest of the four unit points.
    fn slice_qpsk(v: Complex64) -> Complex64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        c(if v.re >= 0.0 { s } else { -s }, if v.im >= 0.0 { s } else { -s })
    }

    #[test]
    fn overloaded_detection_sits_between_random_guessing_and_orthogonal() {
        let lds = SignatureMatrix::lds_6x9();
        let orth = SignatureMatrix::identity(9).unwrap();
        let sigma2 = 0.1; // 10 dB above unit symbol power
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let alphabet = [c(s, s), c(s, -s), c(-s, s), c(-s, -s)];
        let trials = 3000;
        let mut errors_lds = 0usize;
        let mut errors_orth = 0usize;
        for _ in 0..trials {
            let x: Vec<Complex64> =
                (0..9).map(|_| *alphabet.choose(&mut rng).unwrap()).collect();
            for (matrix, errors) in
                [(&lds, &mut errors_lds), (&orth, &mut errors_orth)]
            {
                let mut y = lds_spread(&x, matrix, &ones(9)).unwrap();
                for v in &mut y {
                    *v += crate::link::awgn(sigma2, &mut rng);
                }
                let x_hat = mmse_mud(&y, matrix, &ones(9), &[1.0; 9], sigma2).unwrap();
                *errors += x_hat
                    .iter()
                    .zip(&x)
                    .filter(|(&est, &sent)| (slice_qpsk(est) - sent).norm() > 1e-9)
                    .count();
            }
        }
        let ser_lds = errors_lds as f64 / (9 * trials) as f64;
        let ser_orth = errors_orth as f64 / (9 * trials) as f64;
        assert!(ser_lds < 0.75, "overloaded MMSE no better than guessing: {ser_lds}");
        assert!(
            ser_orth < ser_lds,
            "orthogonal baseline {ser_orth} should beat overloaded {ser_lds}"
        );
        assert!(ser_orth < 0.02, "orthogonal QPSK at 10 dB should be clean: {ser_orth}");
    }

    proptest! {
        /// Relabeling users permutes column weights and leaves every other
        /// audit figure unchanged.
        #[test]
        fn audit_is_invariant_under_user_relabeling(seed in 0u64..1000) {
            let m = SignatureMatrix::lds_6x9();
            let mut order: Vec<usize> = (0..9).collect();
            // Fisher-Yates with a seeded generator keeps the case reproducible.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in (1..9).rev() {
                let j = rng.random_range(0..=i);
                order.swap(i, j);
            }
            let permuted = SignatureMatrix::new(DMatrix::from_fn(6, 9, |r, c| {
                m.entries()[(r, order[c])]
            })).unwrap();
            let base = m.validate();
            let shuffled = permuted.validate();
            let expected_cols: Vec<usize> =
                order.iter().map(|&k| base.col_weights[k]).collect();
            prop_assert_eq!(&shuffled.col_weights, &expected_cols);
            prop_assert_eq!(shuffled.row_weights, base.row_weights);
            prop_assert_eq!(shuffled.max_pair_overlap, base.max_pair_overlap);
            prop_assert!((shuffled.overload - base.overload).abs() < 1e-15);
        }
    }
}
