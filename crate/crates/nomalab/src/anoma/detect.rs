//! Linear multi-user detection on the stacked model, plus the eigenbasis
//! precoder that orthogonalizes a sampled correlation matrix.
//!
//! The stacked noise is colored (`cov = sigma2 R`), so both detectors first
//! whiten: eigendecompose `R`, drop the numerical null space, and map the
//! observation into `r` coordinates with white unit noise. Zero forcing then
//! pseudo-inverts the whitened observation matrix (erroring out when the
//! symbols are not identifiable), while MMSE applies the Wiener filter for
//! unit-power symbol priors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::model::StackedModel;
use super::AnomaError;

/// Relative eigenvalue / singular value cutoff for numerical rank decisions.
const RANK_TOL: f64 = 1e-10;

/// Linear multi-user detector choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearDetector {
    /// Interference-free but noise-enhancing; requires full column rank.
    ZeroForcing,
    /// Wiener filter balancing interference and noise for unit-power
    /// symbols; defined at any rank and converging to zero forcing as
    /// `sigma2` vanishes (when zero forcing exists).
    Mmse,
}

/// Recovers per-user symbol frames from one stacked observation `y`.
///
/// Returns one length-`N` soft estimate vector per user. Zero forcing fails
/// with [`AnomaError::RankDeficient`] when the whitened observation matrix
/// cannot separate all `K N` symbols, which happens whenever the delay
/// pattern and roll-off leave the stacked correlation short of full rank
/// (narrow pulses with few branches), so callers can fall back to MMSE.
pub fn linear_detect(
    model: &StackedModel,
    y: &DVector<Complex64>,
    sigma2: f64,
    method: LinearDetector,
) -> Result<Vec<DVector<Complex64>>, AnomaError> {
    let n = model.frame_len();
    let users = model.num_users();
    let dim = model.num_branches() * n;
    if y.len() != dim {
        return Err(AnomaError::LengthMismatch { expected: dim, found: y.len() });
    }
    let need_positive = matches!(method, LinearDetector::Mmse);
    if !sigma2.is_finite() || sigma2 < 0.0 || (need_positive && sigma2 == 0.0) {
        return Err(AnomaError::InvalidNoisePower { sigma2 });
    }

    // Whiten against the branch correlation: keep eigenpairs above the
    // relative cutoff and scale to unit noise per retained coordinate.
    let eig = model.correlation_full().symmetric_eigen();
    let max_eig = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let kept: Vec<usize> = (0..dim)
        .filter(|&i| eig.eigenvalues[i] > max_eig * RANK_TOL)
        .collect();
    let rank = kept.len();
    let mut whitener = DMatrix::<Complex64>::zeros(rank, dim);
    for (row, &i) in kept.iter().enumerate() {
        let scale = 1.0 / eig.eigenvalues[i].sqrt();
        for col in 0..dim {
            whitener[(row, col)] = Complex64::new(scale * eig.eigenvectors[(col, i)], 0.0);
        }
    }
    let observed = &whitener * model.observation_matrix();
    let y_white = &whitener * y;

    let stacked = match method {
        LinearDetector::ZeroForcing => {
            let svd = observed.clone().svd(true, true);
            let s_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
            let svd_rank = svd.rank(s_max * RANK_TOL);
            if svd_rank < users * n {
                return Err(AnomaError::RankDeficient { rank: svd_rank, needed: users * n });
            }
            svd.solve(&y_white, s_max * RANK_TOL)
                .map_err(|_| AnomaError::RankDeficient { rank: svd_rank, needed: users * n })?
        }
        LinearDetector::Mmse => {
            // x = B^H (B B^H + sigma2 I)^{-1} y_white, Gram side kept at
            // rank x rank so the factorization is always positive definite.
            let gram = &observed * observed.adjoint()
                + DMatrix::<Complex64>::identity(rank, rank) * Complex64::new(sigma2, 0.0);
            let chol = gram
                .cholesky()
                .ok_or(AnomaError::RankDeficient { rank, needed: rank })?;
            observed.adjoint() * chol.solve(&y_white)
        }
    };

    Ok((0..users).map(|l| stacked.rows(l * n, n).into_owned()).collect())
}

/// Eigenbasis precoder for a sampled symmetric correlation matrix.
///
/// Returns `(basis, eigenvalues)` with orthonormal columns sorted by
/// descending eigenvalue, so `r = basis * diag(eigenvalues) * basis^T`.
/// Signalling along the basis columns turns the correlated channel into
/// parallel subchannels with the eigenvalues as per-dimension gains; the
/// trailing (near-zero) eigenvalues expose dimensions the pulse and delays
/// cannot carry.
pub fn tnoma_precoder(r: &DMatrix<f64>) -> Result<(DMatrix<f64>, DVector<f64>), AnomaError> {
    if r.nrows() != r.ncols() {
        return Err(AnomaError::NotSquare { rows: r.nrows(), cols: r.ncols() });
    }
    let max_asymmetry = (r - r.transpose()).iter().cloned().map(f64::abs).fold(0.0, f64::max);
    if max_asymmetry > 1e-9 {
        return Err(AnomaError::NotSymmetric { max_asymmetry });
    }
    let sym = (r + r.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let n = r.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let basis = DMatrix::from_fn(n, n, |row, col| eig.eigenvectors[(row, idx[col])]);
    let eigenvalues = DVector::from_iterator(n, idx.iter().map(|&i| eig.eigenvalues[i]));
    Ok((basis, eigenvalues))
}
