//! C ABI over the nomalab library.
//!
//! Conventions, chosen so any language with a C FFI can bind without help:
//!
//! * Constellations travel as opaque handles created and destroyed here;
//!   everything else is flat `double`/`size_t` arrays the caller allocates.
//! * Every fallible call returns an [`NlStatus`] and writes results through
//!   out pointers only on `Ok`. [`nl_status_message`] renders codes as text.
//! * Complex arrays are split into separate real and imaginary arrays.
//! * Panics never cross the boundary; they surface as `NlStatus::Panic`.
//!
//! The matching header lives in `include/nomalab.h` and is regenerated by
//! the build script.

use core::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;

use nomalab::anoma::{gaussian_rates, AnomaError, PulseShape, RateNormalization, StackedModel};
use nomalab::cdnoma::SignatureMatrix;
use nomalab::constellation::{Constellation, ConstellationKind, PowerSplit, SuperConstellation};
use nomalab::rates::{mac_region_vertices, mcs_spectral_efficiency, noma_downlink_rates};
use nomalab::sim::qpsk_awgn_reference;
use nomalab::tcm::Trellis;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlStatus {
    /// Success; out parameters are filled in.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Arguments were structurally or numerically invalid.
    InvalidArgument = 2,
    /// A numerical routine failed on otherwise valid input.
    NumericalFailure = 3,
    /// The library panicked; state may be inconsistent, report a bug.
    Panic = 4,
}

/// An opaque signal constellation.
pub struct NlConstellation {
    inner: Constellation,
}

/// An opaque two-user superimposed constellation.
pub struct NlSuperConstellation {
    inner: SuperConstellation,
}

fn guarded<F: FnOnce() -> NlStatus>(body: F) -> NlStatus {
    catch_unwind(AssertUnwindSafe(body)).unwrap_or(NlStatus::Panic)
}

fn anoma_status(error: AnomaError) -> NlStatus {
    match error {
        AnomaError::RankDeficient { .. } => NlStatus::NumericalFailure,
        _ => NlStatus::InvalidArgument,
    }
}

/// Renders a status code (the numeric value of [`NlStatus`]) as a static,
/// NUL-terminated string.
#[no_mangle]
pub extern "C" fn nl_status_message(status: u32) -> *const c_char {
    let text: &'static [u8] = match status {
        0 => b"ok\0",
        1 => b"null pointer argument\0",
        2 => b"invalid argument\0",
        3 => b"numerical failure\0",
        4 => b"panic inside the library\0",
        _ => b"unknown status code\0",
    };
    text.as_ptr() as *const c_char
}

/// Creates a standard constellation. `kind` is 0 for PSK, 1 for QAM;
/// `order` must be a supported power of two. On success `*out` owns the
/// handle; release it with [`nl_constellation_free`].
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nl_constellation_standard(
    kind: u32,
    order: usize,
    out: *mut *mut NlConstellation,
) -> NlStatus {
    if out.is_null() {
        return NlStatus::NullPointer;
    }
    guarded(|| {
        let kind = match kind {
            0 => ConstellationKind::Psk,
            1 => ConstellationKind::Qam,
            _ => return NlStatus::InvalidArgument,
        };
        match Constellation::standard(kind, order) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(NlConstellation { inner }));
                NlStatus::Ok
            }
            Err(_) => NlStatus::InvalidArgument,
        }
    })
}

/// Creates a rotated copy of a constellation (`theta` in radians).
///
/// # Safety
/// `constellation` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nl_constellation_rotated(
    constellation: *const NlConstellation,
    theta: f64,
    out: *mut *mut NlConstellation,
) -> NlStatus {
    if constellation.is_null() || out.is_null() {
        return NlStatus::NullPointer;
    }
    guarded(|| {
        let inner = (*constellation).inner.rotated(theta);
        *out = Box::into_raw(Box::new(NlConstellation { inner }));
        NlStatus::Ok
    })
}

/// Writes the number of points of a constellation.
///
/// # Safety
/// `constellation` must be a live handle and `order` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nl_constellation_order(
    constellation: *const NlConstellation,
    order: *mut usize,
) -> NlStatus {
    if constellation.is_null() || order.is_null() {
        return NlStatus::NullPointer;
    }
    *order = (*constellation).inner.order();
    NlStatus::Ok
}

/// Releases a constellation handle; null is ignored.
///
/// # Safety
/// `constellation` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nl_constellation_free(constellation: *mut NlConstellation) {
    if !constellation.is_null() {
        drop(Box::from_raw(constellation));
    }
}

/// Superimposes two constellations with power share `alpha` on the first
/// and total power `power`. On success `*out` owns the handle; release it
/// with [`nl_super_constellation_free`].
///
/// # Safety
/// `first` and `second` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nl_super_constellation_new(
    first: *const NlConstellation,
    second: *const NlConstellation,
    alpha: f64,
    power: f64,
    out: *mut *mut NlSuperConstellation,
) -> NlStatus {
    if first.is_null() || second.is_null() || out.is_null() {
        return NlStatus::NullPointer;
    }
    guarded(|| {
        let split = match PowerSplit::new(alpha, power) {
            Ok(split) => split,
            Err(_) => return NlStatus::InvalidArgument,
        };
        let inner =
            SuperConstellation::superimpose(&(*first).inner, &(*second).inner, split);
        *out = Box::into_raw(Box::new(NlSuperConstellation { inner }));
        NlStatus::Ok
    })
}

/// Writes the number of composite points (the product of the two orders).
///
/// # Safety
/// `sc` must be a live handle and `len` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nl_super_constellation_len(
    sc: *const NlSuperConstellation,
    len: *mut usize,
) -> NlStatus {
    if sc.is_null() || len.is_null() {
        return NlStatus::NullPointer;
    }
    *len = (*sc).inner.len();
    NlStatus::Ok
}

/// Writes how many composite points are pairwise distinct under tolerance
/// `tol`.
///
/// # Safety
/// `sc` must be a live handle and `count` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nl_super_constellation_distinct_count(
    sc: *const NlSuperConstellation,
    tol: f64,
    count: *mut usize,
) -> NlStatus {
    if sc.is_null() || count.is_null() {
        return NlStatus::NullPointer;
    }
    guarded(|| {
        *count = (*sc).inner.distinct_count(tol);
        NlStatus::Ok
    })
}

/// Writes the minimum distance between two composite points.
///
/// # Safety
/// `sc` must be a live handle and `distance` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nl_super_constellation_min_distance(
    sc: *const NlSuperConstellation,
    distance: *mut f64,
) -> NlStatus {
    if sc.is_null() || distance.is_null() {
        return NlStatus::NullPointer;
    }
    guarded(|| {
        *distance = (*sc).inner.min_distance();
        NlStatus::Ok
    })
}

/// Writes composite point `index` as a real/imaginary pair.
///
/// # Safety
/// `sc` must be a live handle; `re` and `im` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nl_super_constellation_point(
    sc: *const NlSuperConstellation,
    index: usize,
    re: *mut f64,
    im: *mut f64,
) -> NlStatus {
    if sc.is_null() || re.is_null() || im.is_null() {
        return NlStatus::NullPointer;
    }
    guarded(|| {
        let points = (*sc).inner.points();
        let Some(point) = points.get(index) else {
            return NlStatus::InvalidArgument;
        };
        *re = point.value.re;
        *im = point.value.im;
        NlStatus::Ok
    })
}

/// Releases a super-constellation handle; null is ignored.
///
/// # Safety
/// `sc` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nl_super_constellation_free(sc: *mut NlSuperConstellation) {
    if !sc.is_null() {
        drop(Box::from_raw(sc));
    }
}

/// Downlink superposition-coding rates. `powers` and `gains_sq` hold
/// `users` entries, gains sorted non-increasing; per-user rates land in
/// `per_user` (`users` entries) and their total in `sum`.
///
/// # Safety
/// All pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn nl_noma_downlink_rates(
    powers: *const f64,
    gains_sq: *const f64,
    users: usize,
    sigma2: f64,
    per_user: *mut f64,
    sum: *mut f64,
) -> NlStatus {
    if powers.is_null() || gains_sq.is_null() || per_user.is_null() || sum.is_null() {
        return NlStatus::NullPointer;
    }
    guarded(|| {
        let powers = std::slice::from_raw_parts(powers, users);
        let gains_sq = std::slice::from_raw_parts(gains_sq, users);
        match noma_downlink_rates(powers, gains_sq, sigma2) {
            Ok(point) => {
                std::slice::from_raw_parts_mut(per_user, users)
                    .copy_from_slice(&point.per_user);
                *sum = point.sum;
                NlStatus::Ok
            }
            Err(_) => NlStatus::InvalidArgument,
        }
    })
}

/// The two corner points of the two-user multiple-access region. Each
/// output holds `[rate_1, rate_2, sum]`; at vertex A user 1 is decoded
/// last (interference free), at vertex B user 2 is.
///
/// # Safety
/// `vertex_a` and `vertex_b` must each hold three doubles.
#[no_mangle]
pub unsafe extern "C" fn nl_mac_vertices(
    p1: f64,
    p2: f64,
    g1_sq: f64,
    g2_sq: f64,
    sigma2: f64,
    vertex_a: *mut f64,
    vertex_b: *mut f64,
) -> NlStatus {
    if vertex_a.is_null() || vertex_b.is_null() {
        return NlStatus::NullPointer;
    }
    guarded(|| match mac_region_vertices(p1, p2, g1_sq, g2_sq, sigma2) {
        Ok((a, b)) => {
            for (out, point) in [(vertex_a, &a), (vertex_b, &b)] {
                let out = std::slice::from_raw_parts_mut(out, 3);
                out[0] = point.per_user[0];
                out[1] = point.per_user[1];
                out[2] = point.sum;
            }
            NlStatus::Ok
        }
        Err(_) => NlStatus::InvalidArgument,
    })
}

/// Spectral efficiency of a modulation-and-coding entry: `log2(m)` times
/// code rate `r_num / r_den`, for constellation size `m`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nl_mcs_spectral_efficiency(
    m: u32,
    r_num: u32,
    r_den: u32,
    out: *mut f64,
) -> NlStatus {
    if out.is_null() {
        return NlStatus::NullPointer;
    }
    guarded(|| match mcs_spectral_efficiency(m, r_num, r_den) {
        Ok(value) => {
            *out = value;
            NlStatus::Ok
        }
        Err(_) => NlStatus::InvalidArgument,
    })
}

/// Gaussian achievable rates of a symbol-offset uplink under successive
/// decoding. Arrays `gains_re`, `gains_im`, `powers`, `delays` and `order`
/// hold `users` entries; `order` lists user indices, first decoded first.
/// `normalization` is 0 for bits per Hz of real bandwidth, 1 for bits per
/// complex symbol. Per-user rates (indexed by user) land in `per_user`.
///
/// # Safety
/// All pointers must be valid for `users` entries.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn nl_anoma_gaussian_rates(
    gains_re: *const f64,
    gains_im: *const f64,
    powers: *const f64,
    delays: *const f64,
    users: usize,
    rolloff: f64,
    frame_len: usize,
    order: *const usize,
    sigma2: f64,
    normalization: u32,
    per_user: *mut f64,
) -> NlStatus {
    if gains_re.is_null()
        || gains_im.is_null()
        || powers.is_null()
        || delays.is_null()
        || order.is_null()
        || per_user.is_null()
    {
        return NlStatus::NullPointer;
    }
    guarded(|| {
        let normalization = match normalization {
            0 => RateNormalization::RealBandwidthNormalized,
            1 => RateNormalization::ComplexPerSymbol,
            _ => return NlStatus::InvalidArgument,
        };
        let pulse = match PulseShape::new(rolloff) {
            Ok(pulse) => pulse,
            Err(_) => return NlStatus::InvalidArgument,
        };
        let re = std::slice::from_raw_parts(gains_re, users);
        let im = std::slice::from_raw_parts(gains_im, users);
        let gains: Vec<Complex64> = re
            .iter()
            .zip(im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        let powers = std::slice::from_raw_parts(powers, users);
        let delays = std::slice::from_raw_parts(delays, users);
        let order = std::slice::from_raw_parts(order, users);
        let model = match StackedModel::virtual_mimo(&gains, powers, delays, pulse, frame_len) {
            Ok(model) => model,
            Err(_) => return NlStatus::InvalidArgument,
        };
        match gaussian_rates(&model, order, sigma2, normalization) {
            Ok(rates) => {
                std::slice::from_raw_parts_mut(per_user, users).copy_from_slice(&rates);
                NlStatus::Ok
            }
            Err(error) => anoma_status(error),
        }
    })
}

/// Squared free Euclidean distance of the bundled 4-state trellis code
/// over 8-PSK.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nl_tcm_free_distance_4state_8psk(out: *mut f64) -> NlStatus {
    if out.is_null() {
        return NlStatus::NullPointer;
    }
    guarded(|| {
        *out = Trellis::ungerboeck_4state_8psk().free_distance();
        NlStatus::Ok
    })
}

/// Audits the bundled 6 x 9 low-density signature matrix. `col_weights`
/// receives 9 entries, `row_weights` 6; `max_overlap` the largest number
/// of resources shared by any two users and `overload` the user-to-resource
/// ratio.
///
/// # Safety
/// `col_weights` must hold 9 entries, `row_weights` 6; the scalar pointers
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn nl_lds_6x9_audit(
    col_weights: *mut usize,
    row_weights: *mut usize,
    max_overlap: *mut usize,
    overload: *mut f64,
) -> NlStatus {
    if col_weights.is_null() || row_weights.is_null() || max_overlap.is_null() || overload.is_null()
    {
        return NlStatus::NullPointer;
    }
    guarded(|| {
        let report = SignatureMatrix::lds_6x9().validate();
        std::slice::from_raw_parts_mut(col_weights, report.col_weights.len())
            .copy_from_slice(&report.col_weights);
        std::slice::from_raw_parts_mut(row_weights, report.row_weights.len())
            .copy_from_slice(&report.row_weights);
        *max_overlap = report.max_pair_overlap;
        *overload = report.overload;
        NlStatus::Ok
    })
}

/// Exact bit error rate of Gray-mapped QPSK over AWGN at `ebn0_db`
/// (`0.5 * erfc(sqrt(Eb/N0))`). Total function, no failure modes.
#[no_mangle]
pub extern "C" fn nl_qpsk_awgn_reference(ebn0_db: f64) -> f64 {
    qpsk_awgn_reference(ebn0_db)
}
