//! Gaussian achievable rates on the stacked asynchronous model.
//!
//! Decoding proceeds user by user in a given order. The stage for user `u`
//! works on `u`'s own sampling branch: already-decoded users are cancelled,
//! not-yet-decoded users act as colored Gaussian interference shaped by
//! their coupling blocks, and the rate is a log-det ratio over the frame,
//!
//! `I_u = log2 det(K_noise + P_u |g_bu|^2 B_bu B_bu^T) - log2 det(K_noise)`
//!
//! with `K_noise = sigma2 I + sum_later P_l |g_bl|^2 B_bl B_bl^T`. With all
//! delays equal the blocks are identities and every stage collapses to the
//! familiar `log2(1 + SINR)` of synchronous SIC, which is the cross-check
//! oracle used by the tests. With distinct delays the off-branch couplings
//! shrink the interference (its Gram eigenvalues drop below 1) and the sum
//! rate moves above the synchronous value, by an amount that depends on the
//! decoding order.

use nalgebra::DMatrix;

use super::model::StackedModel;
use super::AnomaError;

/// How a frame log-det converts to a reported rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateNormalization {
    /// Bits per complex symbol: divide by the frame length. Synchronous
    /// models reproduce `log2(1 + SINR)` exactly in this convention.
    ComplexPerSymbol,
    /// Bits per second per Hertz of occupied real bandwidth: divide by
    /// `2 N (1 + rolloff)`, accounting for the excess bandwidth of the
    /// pulse. This is the convention rate-versus-rolloff plots use.
    RealBandwidthNormalized,
}

/// Per-user achievable rates under successive decoding in `order`
/// (first entry decoded first). Returns rates indexed by user, not by
/// decoding position.
pub fn gaussian_rates(
    model: &StackedModel,
    order: &[usize],
    sigma2: f64,
    normalization: RateNormalization,
) -> Result<Vec<f64>, AnomaError> {
    let users = model.num_users();
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(AnomaError::InvalidNoisePower { sigma2 });
    }
    let mut seen = vec![false; users];
    if order.len() != users || order.iter().any(|&u| u >= users || std::mem::replace(&mut seen[u], true)) {
        return Err(AnomaError::NotAPermutation { users });
    }
    let n = model.frame_len();
    let scale = match normalization {
        RateNormalization::ComplexPerSymbol => 1.0 / n as f64,
        RateNormalization::RealBandwidthNormalized => {
            1.0 / (2.0 * n as f64 * model.pulse().bandwidth_expansion())
        }
    };
    let mut rates = vec![0.0; users];
    for (stage, &user) in order.iter().enumerate() {
        let branch = model.branch_of_user(user);
        let mut noise = DMatrix::<f64>::identity(n, n) * sigma2;
        for &later in &order[stage + 1..] {
            add_gram(&mut noise, model, branch, later);
        }
        let noise_logdet = logdet2_spd(&noise)?;
        add_gram(&mut noise, model, branch, user);
        let signal_logdet = logdet2_spd(&noise)?;
        rates[user] = scale * (signal_logdet - noise_logdet);
    }
    Ok(rates)
}

/// Adds `P_l |g_bl|^2 B_bl B_bl^T` to `acc`.
fn add_gram(acc: &mut DMatrix<f64>, model: &StackedModel, branch: usize, user: usize) {
    let weight = model.powers()[user] * model.gain(branch, user).norm_sqr();
    if weight == 0.0 {
        return;
    }
    let block = model.signal_block(branch, user);
    let gram = &block * block.transpose();
    acc.zip_apply(&gram, |a, g| *a += weight * g);
}

/// `log2 det` of a symmetric positive definite matrix via Cholesky.
///
/// The inputs here are `sigma2 I` plus Gram matrices, hence positive
/// definite by construction; if rounding still defeats the factorization,
/// a relative ridge is added once and the event reported on stderr.
fn logdet2_spd(m: &DMatrix<f64>) -> Result<f64, AnomaError> {
    let sym = (m + m.transpose()) * 0.5;
    if let Some(chol) = sym.clone().cholesky() {
        return Ok(chol_logdet2(&chol));
    }
    let ridge = 1e-12 * sym.trace().abs().max(1.0) / sym.nrows() as f64;
    eprintln!("warning: covariance required a ridge of {ridge:.3e} to factor");
    let bumped = sym + DMatrix::identity(m.nrows(), m.ncols()) * ridge;
    bumped
        .cholesky()
        .map(|c| chol_logdet2(&c))
        .ok_or(AnomaError::RankDeficient { rank: 0, needed: m.nrows() })
}

fn chol_logdet2(chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>) -> f64 {
    2.0 * chol.l_dirty().diagonal().iter().map(|d| d.log2()).sum::<f64>()
}
