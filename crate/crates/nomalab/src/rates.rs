//! Closed-form achievable rates: downlink NOMA with SIC, the two-user
//! multiple-access region, rate-splitting multiple access (downlink and
//! uplink), and modulation-and-coding spectral efficiency.
//!
//! All rates are in bits per complex channel use. Noise powers are total
//! complex variances. Channel strengths enter either as squared magnitudes
//! (`g_sq`) for scalar links or as complex vectors for multi-antenna links.

use nalgebra::DVector;
use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by rate computations.
#[derive(Debug, Error)]
pub enum RatesError {
    #[error("powers and gains have different lengths ({powers} vs {gains})")]
    LengthMismatch { powers: usize, gains: usize },
    #[error("at least one user is required")]
    NoUsers,
    #[error("channel gains must be sorted non-increasing for the SIC order (index {index})")]
    GainsNotSorted { index: usize },
    #[error("noise power {sigma2} is not positive and finite")]
    InvalidNoisePower { sigma2: f64 },
    #[error("power {power} at index {index} is negative or not finite")]
    InvalidPower { power: f64, index: usize },
    #[error("vector at index {index} has dimension {found}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, found: usize },
    #[error("common-rate shares must be non-negative and sum to 1 (sum {sum})")]
    InvalidShares { sum: f64 },
    #[error("stream {0:?} appears {1} times in the decoding order, expected exactly once")]
    BadDecodingOrder(UplinkStream, usize),
    #[error("modulation order {order} is not a power of two >= 2")]
    BadModulationOrder { order: u32 },
    #[error("code rate {num}/{den} is not in (0, 1]")]
    BadCodeRate { num: u32, den: u32 },
}

/// Per-user rates plus their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePoint {
    pub per_user: Vec<f64>,
    pub sum: f64,
}

impl RatePoint {
    pub fn new(per_user: Vec<f64>) -> Self {
        let sum = per_user.iter().sum();
        Self { per_user, sum }
    }
}

fn check_sigma2(sigma2: f64) -> Result<(), RatesError> {
    if sigma2 > 0.0 && sigma2.is_finite() {
        Ok(())
    } else {
        Err(RatesError::InvalidNoisePower { sigma2 })
    }
}

fn check_powers(powers: &[f64]) -> Result<(), RatesError> {
    for (index, &power) in powers.iter().enumerate() {
        if !(power >= 0.0 && power.is_finite()) {
            return Err(RatesError::InvalidPower { power, index });
        }
    }
    Ok(())
}

/// Downlink power-domain NOMA throughput per user under SIC.
///
/// Users are indexed by decreasing channel strength: `gains_sq[0]` is the
/// strongest user. Every receiver decodes and cancels all weaker users'
/// signals first, so user `k` sees residual interference only from the
/// stronger users `0..k`:
///
/// `R_k = log2(1 + P_k g_k / (g_k * sum_{l<k} P_l + sigma2))`.
///
/// `gains_sq` must be non-increasing; pass the users pre-sorted.
pub fn noma_downlink_rates(
    powers: &[f64],
    gains_sq: &[f64],
    sigma2: f64,
) -> Result<RatePoint, RatesError> {
    if powers.len() != gains_sq.len() {
        return Err(RatesError::LengthMismatch { powers: powers.len(), gains: gains_sq.len() });
    }
    if powers.is_empty() {
        return Err(RatesError::NoUsers);
    }
    check_sigma2(sigma2)?;
    check_powers(powers)?;
    check_powers(gains_sq)?;
    for i in 1..gains_sq.len() {
        if gains_sq[i] > gains_sq[i - 1] {
            return Err(RatesError::GainsNotSorted { index: i });
        }
    }
    let mut per_user = Vec::with_capacity(powers.len());
    let mut stronger_power = 0.0;
    for (k, (&p, &g)) in powers.iter().zip(gains_sq).enumerate() {
        let _ = k;
        let rate = (1.0 + p * g / (g * stronger_power + sigma2)).log2();
        per_user.push(rate);
        stronger_power += p;
    }
    Ok(RatePoint::new(per_user))
}

/// The two corner points of the two-user Gaussian multiple-access region.
///
/// Returns `(vertex_a, vertex_b)`. At vertex A user 1 is decoded last and
/// gets its single-user rate; at vertex B user 2 does. Both vertices share
/// the same sum rate `log2(1 + (P1 g1 + P2 g2) / sigma2)`.
pub fn mac_region_vertices(
    p1: f64,
    p2: f64,
    g1_sq: f64,
    g2_sq: f64,
    sigma2: f64,
) -> Result<(RatePoint, RatePoint), RatesError> {
    check_sigma2(sigma2)?;
    check_powers(&[p1, p2, g1_sq, g2_sq])?;
    let s1 = p1 * g1_sq;
    let s2 = p2 * g2_sq;
    let vertex_a = RatePoint::new(vec![
        (1.0 + s1 / sigma2).log2(),
        (1.0 + s2 / (s1 + sigma2)).log2(),
    ]);
    let vertex_b = RatePoint::new(vec![
        (1.0 + s1 / (s2 + sigma2)).log2(),
        (1.0 + s2 / sigma2).log2(),
    ]);
    Ok((vertex_a, vertex_b))
}

/// Spectral efficiency of a modulation-and-coding pair: `r * log2(M)` for
/// modulation order `M` and code rate `r = r_num / r_den`.
pub fn mcs_spectral_efficiency(m: u32, r_num: u32, r_den: u32) -> Result<f64, RatesError> {
    if m < 2 || !m.is_power_of_two() {
        return Err(RatesError::BadModulationOrder { order: m });
    }
    if r_den == 0 || r_num == 0 || r_num > r_den {
        return Err(RatesError::BadCodeRate { num: r_num, den: r_den });
    }
    let bits = m.trailing_zeros() as f64;
    Ok(bits * r_num as f64 / r_den as f64)
}

/// A downlink rate-splitting configuration: one common stream plus one
/// private stream per user, all launched from an `M`-antenna transmitter.
///
/// Precoders carry their own power; channels and precoders are length-`M`
/// complex vectors.
#[derive(Debug, Clone)]
pub struct RsmaDownlink {
    channels: Vec<DVector<Complex64>>,
    common_precoder: DVector<Complex64>,
    private_precoders: Vec<DVector<Complex64>>,
    /// Fraction of the common rate credited to each user; sums to 1.
    common_shares: Vec<f64>,
    sigma2: f64,
}

impl RsmaDownlink {
    pub fn new(
        channels: Vec<DVector<Complex64>>,
        common_precoder: DVector<Complex64>,
        private_precoders: Vec<DVector<Complex64>>,
        common_shares: Vec<f64>,
        sigma2: f64,
    ) -> Result<Self, RatesError> {
        if channels.is_empty() {
            return Err(RatesError::NoUsers);
        }
        if private_precoders.len() != channels.len() {
            return Err(RatesError::LengthMismatch {
                powers: private_precoders.len(),
                gains: channels.len(),
            });
        }
        if common_shares.len() != channels.len() {
            return Err(RatesError::LengthMismatch {
                powers: common_shares.len(),
                gains: channels.len(),
            });
        }
        check_sigma2(sigma2)?;
        let m = common_precoder.len();
        for (index, v) in channels.iter().chain(&private_precoders).enumerate() {
            if v.len() != m {
                return Err(RatesError::DimensionMismatch {
                    index,
                    expected: m,
                    found: v.len(),
                });
            }
        }
        let sum: f64 = common_shares.iter().sum();
        if common_shares.iter().any(|&c| c < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(RatesError::InvalidShares { sum });
        }
        Ok(Self { channels, common_precoder, private_precoders, common_shares, sigma2 })
    }

    pub fn num_users(&self) -> usize {
        self.channels.len()
    }
}

/// Downlink RSMA rates: the shared common rate, each user's private rate,
/// and the resulting per-user totals.
#[derive(Debug, Clone)]
pub struct RsmaDownlinkRates {
    /// `min_k` of the per-user common-stream rates; decodable by everyone.
    pub common_rate: f64,
    /// Private rate of each user after the common stream is cancelled.
    pub private: Vec<f64>,
    /// `private[k] + common_shares[k] * common_rate`.
    pub totals: Vec<f64>,
}

/// Achievable downlink RSMA rates with SIC of the common stream.
///
/// User `k` first decodes the common stream with every private stream
/// (including its own) as interference, cancels it, then decodes its private
/// stream with only the other users' private streams as interference. The
/// common rate is the minimum over users so all of them can decode it.
pub fn rsma_downlink_rates(cfg: &RsmaDownlink) -> RsmaDownlinkRates {
    let k_users = cfg.num_users();
    let mut common_rate = f64::INFINITY;
    let mut private = Vec::with_capacity(k_users);
    for k in 0..k_users {
        let h = &cfg.channels[k];
        let cross = |v: &DVector<Complex64>| h.dotc(v).norm_sqr();
        let all_private: f64 = cfg.private_precoders.iter().map(&cross).sum();
        let own = cross(&cfg.private_precoders[k]);
        let common_power = cross(&cfg.common_precoder);
        let r_kc = (1.0 + common_power / (all_private + cfg.sigma2)).log2();
        common_rate = common_rate.min(r_kc);
        private.push((1.0 + own / (all_private - own + cfg.sigma2)).log2());
    }
    let totals = private
        .iter()
        .zip(&cfg.common_shares)
        .map(|(p, c)| p + c * common_rate)
        .collect();
    RsmaDownlinkRates { common_rate, private, totals }
}

/// Identifies one uplink stream: `part` 0 or 1 of a splitting user, or the
/// single stream (`part` 0) of the last, unsplit user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UplinkStream {
    pub user: usize,
    pub part: u8,
}

/// An uplink rate-splitting configuration.
///
/// Users `0..K-1` split their transmission into two streams with powers
/// `split_powers[k] = (q_k, p_k - q_k)`; the last user `K-1` sends a single
/// stream with power `last_power`. The receiver decodes all `2K - 1` streams
/// successively in `order`, applying per-stream receive filters (matched
/// filters by default).
#[derive(Debug, Clone)]
pub struct RsmaUplink {
    channels: Vec<DVector<Complex64>>,
    split_powers: Vec<(f64, f64)>,
    last_power: f64,
    order: Vec<UplinkStream>,
    filters: Vec<DVector<Complex64>>,
    sigma2: f64,
}

impl RsmaUplink {
    /// Builds a configuration with matched filters `h_k / |h_k|` for every
    /// stream of user `k`.
    pub fn with_matched_filters(
        channels: Vec<DVector<Complex64>>,
        split_powers: Vec<(f64, f64)>,
        last_power: f64,
        order: Vec<UplinkStream>,
        sigma2: f64,
    ) -> Result<Self, RatesError> {
        if channels.is_empty() {
            return Err(RatesError::NoUsers);
        }
        let filters = channels
            .iter()
            .map(|h| {
                let n = h.norm();
                if n > 0.0 {
                    h / Complex64::new(n, 0.0)
                } else {
                    h.clone()
                }
            })
            .collect();
        Self::new(channels, split_powers, last_power, order, filters, sigma2)
    }

    /// Builds a configuration with explicit per-user receive filters.
    pub fn new(
        channels: Vec<DVector<Complex64>>,
        split_powers: Vec<(f64, f64)>,
        last_power: f64,
        order: Vec<UplinkStream>,
        filters: Vec<DVector<Complex64>>,
        sigma2: f64,
    ) -> Result<Self, RatesError> {
        let k_users = channels.len();
        if k_users == 0 {
            return Err(RatesError::NoUsers);
        }
        if split_powers.len() != k_users - 1 {
            return Err(RatesError::LengthMismatch {
                powers: split_powers.len(),
                gains: k_users - 1,
            });
        }
        if filters.len() != k_users {
            return Err(RatesError::LengthMismatch { powers: filters.len(), gains: k_users });
        }
        check_sigma2(sigma2)?;
        let m = channels[0].len();
        for (index, v) in channels.iter().chain(&filters).enumerate() {
            if v.len() != m {
                return Err(RatesError::DimensionMismatch {
                    index,
                    expected: m,
                    found: v.len(),
                });
            }
        }
        for (index, &(q, rest)) in split_powers.iter().enumerate() {
            check_powers(&[q, rest]).map_err(|_| RatesError::InvalidPower {
                power: if q < 0.0 { q } else { rest },
                index,
            })?;
        }
        check_powers(&[last_power])?;
        // The decoding order must name every stream exactly once.
        let mut expected: Vec<UplinkStream> = Vec::new();
        for user in 0..k_users - 1 {
            expected.push(UplinkStream { user, part: 0 });
            expected.push(UplinkStream { user, part: 1 });
        }
        expected.push(UplinkStream { user: k_users - 1, part: 0 });
        for &s in &expected {
            let count = order.iter().filter(|&&o| o == s).count();
            if count != 1 {
                return Err(RatesError::BadDecodingOrder(s, count));
            }
        }
        if order.len() != expected.len() {
            let extra = *order.iter().find(|o| !expected.contains(o)).unwrap();
            return Err(RatesError::BadDecodingOrder(extra, 0));
        }
        Ok(Self { channels, split_powers, last_power, order, filters, sigma2 })
    }

    fn stream_power(&self, s: UplinkStream) -> f64 {
        if s.user + 1 == self.channels.len() {
            self.last_power
        } else if s.part == 0 {
            self.split_powers[s.user].0
        } else {
            self.split_powers[s.user].1
        }
    }
}

/// Uplink RSMA per-user rates under successive decoding.
///
/// Stream `i` of user `u`, decoded at position `t`, sees the not yet decoded
/// streams as interference through user `u`'s receive filter `w`:
///
/// `R_i = log2(1 + P_i |w^H h_u|^2 / (sum_later P_j |w^H h_{u(j)}|^2 + sigma2 |w|^2))`.
///
/// A user's rate is the sum over its streams. Splitting plus ordering sweeps
/// the whole dominant face of the multiple-access region, which is what
/// makes uplink RSMA reach non-corner points without time sharing.
pub fn rsma_uplink_rates(cfg: &RsmaUplink) -> RatePoint {
    let k_users = cfg.channels.len();
    let mut per_user = vec![0.0; k_users];
    for (t, &stream) in cfg.order.iter().enumerate() {
        let w = &cfg.filters[stream.user];
        let p = cfg.stream_power(stream);
        let signal = p * w.dotc(&cfg.channels[stream.user]).norm_sqr();
        let mut interference = 0.0;
        for &later in &cfg.order[t + 1..] {
            interference +=
                cfg.stream_power(later) * w.dotc(&cfg.channels[later.user]).norm_sqr();
        }
        let noise = cfg.sigma2 * w.norm_squared();
        per_user[stream.user] += (1.0 + signal / (interference + noise)).log2();
    }
    RatePoint::new(per_user)
}

/// Sweeps the two-user uplink split `q` from 0 to `p1` on a uniform grid.
///
/// User 1 splits into powers `(q, p1 - q)` decoded first and last; user 2's
/// single stream sits in between. Returns `(q, rates)` per grid point. The
/// sum rate is constant (chain rule of mutual information); the endpoints
/// reproduce the two corners of [`mac_region_vertices`].
pub fn rsma_uplink_split_sweep(
    p1: f64,
    p2: f64,
    g1_sq: f64,
    g2_sq: f64,
    sigma2: f64,
    grid: usize,
) -> Result<Vec<(f64, RatePoint)>, RatesError> {
    check_sigma2(sigma2)?;
    check_powers(&[p1, p2, g1_sq, g2_sq])?;
    let channels = vec![
        DVector::from_element(1, Complex64::new(g1_sq.sqrt(), 0.0)),
        DVector::from_element(1, Complex64::new(g2_sq.sqrt(), 0.0)),
    ];
    let order = vec![
        UplinkStream { user: 0, part: 0 },
        UplinkStream { user: 1, part: 0 },
        UplinkStream { user: 0, part: 1 },
    ];
    let steps = grid.max(2);
    let mut points = Vec::with_capacity(steps);
    for i in 0..steps {
        // Pin the last grid point to p1 itself: rounding in the interpolation
        // can push q a few ulps past p1, which would make the remainder
        // negative and fail power validation.
        let q = if i + 1 == steps {
            p1
        } else {
            p1 * i as f64 / (steps - 1) as f64
        };
        let cfg = RsmaUplink::with_matched_filters(
            channels.clone(),
            vec![(q, (p1 - q).max(0.0))],
            p2,
            order.clone(),
            sigma2,
        )?;
        points.push((q, rsma_uplink_rates(&cfg)));
    }
    Ok(points)
}
