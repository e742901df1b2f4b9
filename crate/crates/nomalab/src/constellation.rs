//! Signal constellations and power-domain superposition.
//!
//! A [`Constellation`] is a unit-mean-power alphabet together with a bit
//! label per symbol. [`Constellation::standard`] builds the usual suspects
//! (BPSK, Gray PSK, Gray rectangular/square QAM). Two constellations combined
//! through [`SuperConstellation::superimpose`] model superposition coding:
//! the composite alphabet `sqrt(alpha P) s1 + sqrt((1 - alpha) P) s2` seen by
//! every receiver in a two-user power-domain NOMA link. Whether that
//! composite stays bijective (all `M1 * M2` points distinct) or collapses
//! onto fewer points is exactly what [`SuperConstellation::distinct_count`]
//! measures.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

/// Errors raised while constructing or combining constellations.
#[derive(Debug, Error)]
pub enum ConstellationError {
    /// The (kind, order) pair is not one of the supported standard alphabets.
    #[error("unsupported order {order} for {kind} constellation")]
    UnsupportedOrder { kind: ConstellationKind, order: usize },
    /// The symbol list and label list disagree in length.
    #[error("constellation has {symbols} symbols but {labels} labels")]
    SizeMismatch { symbols: usize, labels: usize },
    /// Constellation sizes must be powers of two so labels are whole bits.
    #[error("constellation order {order} is not a power of two (or is < 2)")]
    NotPowerOfTwo { order: usize },
    /// A label's bit length does not match log2 of the constellation order.
    #[error("label {label} has {found} bits, expected {expected}")]
    LabelLength { label: Label, expected: u8, found: u8 },
    /// Two symbols carry the same bit label.
    #[error("duplicate label {label}")]
    DuplicateLabel { label: Label },
    /// Mean symbol power must be 1 (unit average energy convention).
    #[error("mean symbol power is {mean_power}, expected 1 within 1e-12")]
    NotNormalized { mean_power: f64 },
    /// Power split fraction outside [0, 1].
    #[error("power split alpha {alpha} outside [0, 1]")]
    InvalidAlpha { alpha: f64 },
    /// Total power must be positive and finite.
    #[error("total power {power} is not positive and finite")]
    InvalidPower { power: f64 },
}

/// A fixed-width bit string, stored MSB first. Up to 32 bits.
///
/// The width is part of the value: `Label::new(0b01, 2)` and
/// `Label::new(0b001, 3)` are different labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    value: u32,
    len: u8,
}

impl Label {
    /// A label holding the low `len` bits of `value`.
    ///
    /// # Panics
    /// If `len > 32` or `value` has bits set above `len`.
    pub fn new(value: u32, len: u8) -> Self {
        assert!(len <= 32, "label length {len} exceeds 32 bits");
        assert!(
            len == 32 || value >> len == 0,
            "label value {value:#b} wider than {len} bits"
        );
        Self { value, len }
    }

    /// The raw value with the first bit of the label as the most significant.
    pub fn value(&self) -> u32 {
        self.value
    }

    /// Number of bits in the label.
    pub fn len(&self) -> u8 {
        self.len
    }

    /// True for the width-zero label (used as a neutral element for `concat`).
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bits from most to least significant, each 0 or 1.
    pub fn bits(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len).rev().map(move |i| ((self.value >> i) & 1) as u8)
    }

    /// `self` followed by `other`.
    ///
    /// # Panics
    /// If the combined width exceeds 32 bits.
    pub fn concat(&self, other: &Label) -> Label {
        let len = self.len + other.len;
        assert!(len <= 32, "concatenated label would be {len} bits");
        Label { value: (self.value << other.len) | other.value, len }
    }

    /// Number of positions at which the two labels differ.
    ///
    /// # Panics
    /// If the labels have different widths.
    pub fn hamming_distance(&self, other: &Label) -> u32 {
        assert_eq!(self.len, other.len, "labels of different width");
        (self.value ^ other.value).count_ones()
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Families of standard constellations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstellationKind {
    Bpsk,
    Psk,
    Qam,
}

impl fmt::Display for ConstellationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstellationKind::Bpsk => write!(f, "BPSK"),
            ConstellationKind::Psk => write!(f, "PSK"),
            ConstellationKind::Qam => write!(f, "QAM"),
        }
    }
}

impl FromStr for ConstellationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bpsk" => Ok(ConstellationKind::Bpsk),
            "psk" => Ok(ConstellationKind::Psk),
            "qam" => Ok(ConstellationKind::Qam),
            other => Err(format!("unknown constellation kind '{other}'")),
        }
    }
}

/// Binary-reflected Gray code of `i`.
fn gray(i: u32) -> u32 {
    i ^ (i >> 1)
}

/// A labelled, unit-mean-power complex alphabet.
#[derive(Debug, Clone)]
pub struct Constellation {
    name: String,
    symbols: Vec<Complex64>,
    labels: Vec<Label>,
}

impl Constellation {
    /// Builds a constellation from explicit symbols and labels.
    ///
    /// Enforces the crate conventions: the order is a power of two (>= 2),
    /// every label is `log2(order)` bits, labels are distinct, and the mean
    /// symbol power is 1 within 1e-12.
    pub fn new(
        name: impl Into<String>,
        symbols: Vec<Complex64>,
        labels: Vec<Label>,
    ) -> Result<Self, ConstellationError> {
        if symbols.len() != labels.len() {
            return Err(ConstellationError::SizeMismatch {
                symbols: symbols.len(),
                labels: labels.len(),
            });
        }
        let order = symbols.len();
        if order < 2 || !order.is_power_of_two() {
            return Err(ConstellationError::NotPowerOfTwo { order });
        }
        let bits = order.trailing_zeros() as u8;
        let mut seen = vec![false; order];
        for &label in &labels {
            if label.len() != bits {
                return Err(ConstellationError::LabelLength {
                    label,
                    expected: bits,
                    found: label.len(),
                });
            }
            let v = label.value() as usize;
            if seen[v] {
                return Err(ConstellationError::DuplicateLabel { label });
            }
            seen[v] = true;
        }
        let mean_power = symbols.iter().map(|s| s.norm_sqr()).sum::<f64>() / order as f64;
        if (mean_power - 1.0).abs() > 1e-12 {
            return Err(ConstellationError::NotNormalized { mean_power });
        }
        Ok(Self { name: name.into(), symbols, labels })
    }

    /// Builds one of the standard alphabets.
    ///
    /// Supported orders: BPSK {2}, PSK {4, 8, 16}, QAM {4, 8, 16, 64, 256,
    /// 1024}. PSK of order 4 is placed on the diagonals (matching 4-QAM);
    /// larger PSK rings start at angle 0. 8-QAM is the rectangular 4x2 grid.
    /// All QAM labels are Gray per axis (in-phase bits first), so nearest
    /// neighbours differ in exactly one bit.
    pub fn standard(kind: ConstellationKind, order: usize) -> Result<Self, ConstellationError> {
        match (kind, order) {
            (ConstellationKind::Bpsk, 2) => {
                let symbols = vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
                let labels = vec![Label::new(0, 1), Label::new(1, 1)];
                Constellation::new("BPSK", symbols, labels)
            }
            (ConstellationKind::Psk, m @ (4 | 8 | 16)) => {
                let offset = if m == 4 { std::f64::consts::FRAC_PI_4 } else { 0.0 };
                let bits = m.trailing_zeros() as u8;
                let mut symbols: Vec<Complex64> = Vec::with_capacity(m);
                let mut labels = Vec::with_capacity(m);
                for i in 0..m {
                    // The second half ring is the exact negation of the first:
                    // independent from_polar calls leave antipodal points a few
                    // ulps apart, which would stop sign-symmetric superpositions
                    // from cancelling exactly.
                    let point = if i < m / 2 {
                        let theta = offset + 2.0 * std::f64::consts::PI * i as f64 / m as f64;
                        Complex64::from_polar(1.0, theta)
                    } else {
                        -symbols[i - m / 2]
                    };
                    symbols.push(point);
                    labels.push(Label::new(gray(i as u32), bits));
                }
                Constellation::new(format!("{m}-PSK"), symbols, labels)
            }
            (ConstellationKind::Qam, m @ (4 | 8 | 16 | 64 | 256 | 1024)) => {
                // Rectangular grid: `cols x rows` with odd-integer coordinates,
                // scaled to unit mean power. Square when the bit count is
                // even, twice as wide as tall when odd (8-QAM is 4x2).
                let bits = m.trailing_zeros() as u8;
                let col_bits = bits.div_ceil(2) as u32;
                let row_bits = bits as u32 - col_bits;
                let cols = 1u32 << col_bits;
                let rows = 1u32 << row_bits;
                let axis_power = |n: u32| ((n * n - 1) as f64) / 3.0;
                let scale = 1.0 / (axis_power(cols) + axis_power(rows)).sqrt();
                let level = |idx: u32, n: u32| (2.0 * idx as f64 - (n - 1) as f64) * scale;
                let mut symbols = Vec::with_capacity(m);
                let mut labels = Vec::with_capacity(m);
                for i in 0..cols {
                    for q in 0..rows {
                        symbols.push(Complex64::new(level(i, cols), level(q, rows)));
                        let lab = (gray(i) << row_bits) | gray(q);
                        labels.push(Label::new(lab, bits));
                    }
                }
                Constellation::new(format!("{m}-QAM"), symbols, labels)
            }
            (kind, order) => Err(ConstellationError::UnsupportedOrder { kind, order }),
        }
    }

    /// A copy of this constellation rotated by `theta` radians.
    ///
    /// Rotation preserves energies and pairwise distances, so the result is
    /// valid whenever the source is.
    pub fn rotated(&self, theta: f64) -> Constellation {
        let rot = Complex64::from_polar(1.0, theta);
        Constellation {
            name: format!("{} rot {:.4}", self.name, theta),
            symbols: self.symbols.iter().map(|s| s * rot).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Human-readable name, e.g. `16-QAM`.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of symbols.
    pub fn order(&self) -> usize {
        self.symbols.len()
    }

    /// Bits carried per symbol.
    pub fn bits_per_symbol(&self) -> u8 {
        self.symbols.len().trailing_zeros() as u8
    }

    pub fn symbols(&self) -> &[Complex64] {
        &self.symbols
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Index of the symbol whose label has the given raw value.
    pub fn index_of_value(&self, value: u32) -> Option<usize> {
        self.labels.iter().position(|l| l.value() == value)
    }

    /// Index of the symbol closest to `y` in Euclidean distance.
    ///
    /// Ties resolve to the lowest index (strict-improvement scan).
    pub fn nearest(&self, y: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, s) in self.symbols.iter().enumerate() {
            let d = (y - s).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Smallest distance between two distinct symbols.
    pub fn min_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.symbols.len() {
            for j in (i + 1)..self.symbols.len() {
                best = best.min((self.symbols[i] - self.symbols[j]).norm());
            }
        }
        best
    }

    /// Writes `re,im,label` rows (with header) for plotting.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "re,im,label")?;
        for (s, l) in self.symbols.iter().zip(&self.labels) {
            writeln!(w, "{:.12e},{:.12e},{}", s.re, s.im, l)?;
        }
        Ok(())
    }
}

/// How total power `total_power` splits between two superimposed users:
/// user 1 gets `alpha`, user 2 gets `1 - alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit {
    alpha: f64,
    total_power: f64,
}

impl PowerSplit {
    pub fn new(alpha: f64, total_power: f64) -> Result<Self, ConstellationError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(ConstellationError::InvalidAlpha { alpha });
        }
        if !(total_power > 0.0 && total_power.is_finite()) {
            return Err(ConstellationError::InvalidPower { power: total_power });
        }
        Ok(Self { alpha, total_power })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn total_power(&self) -> f64 {
        self.total_power
    }

    /// Power allocated to user 1, `alpha * total`.
    pub fn user1_power(&self) -> f64 {
        self.alpha * self.total_power
    }

    /// Power allocated to user 2, `(1 - alpha) * total`.
    pub fn user2_power(&self) -> f64 {
        (1.0 - self.alpha) * self.total_power
    }

    /// Amplitude scaling applied to user 1 symbols.
    pub fn user1_amplitude(&self) -> f64 {
        self.user1_power().sqrt()
    }

    /// Amplitude scaling applied to user 2 symbols.
    pub fn user2_amplitude(&self) -> f64 {
        self.user2_power().sqrt()
    }
}

/// One composite symbol of a superimposed constellation.
#[derive(Debug, Clone, Copy)]
pub struct SuperPoint {
    /// The transmitted composite value.
    pub value: Complex64,
    /// Label of the user 1 component symbol.
    pub label1: Label,
    /// Label of the user 2 component symbol.
    pub label2: Label,
}

/// The composite alphabet produced by superposition coding.
///
/// Point `i1 * M2 + i2` is `sqrt(alpha P) s1[i1] + sqrt((1 - alpha) P) s2[i2]`,
/// so the user 1 index varies slowest.
#[derive(Debug, Clone)]
pub struct SuperConstellation {
    points: Vec<SuperPoint>,
    split: PowerSplit,
    order1: usize,
    order2: usize,
}

impl SuperConstellation {
    /// Superimposes `c1` (power share `alpha`) on `c2` (share `1 - alpha`).
    pub fn superimpose(c1: &Constellation, c2: &Constellation, split: PowerSplit) -> Self {
        let a1 = split.user1_amplitude();
        let a2 = split.user2_amplitude();
        let mut points = Vec::with_capacity(c1.order() * c2.order());
        for (s1, l1) in c1.symbols().iter().zip(c1.labels()) {
            for (s2, l2) in c2.symbols().iter().zip(c2.labels()) {
                points.push(SuperPoint { value: a1 * s1 + a2 * s2, label1: *l1, label2: *l2 });
            }
        }
        Self { points, split, order1: c1.order(), order2: c2.order() }
    }

    pub fn points(&self) -> &[SuperPoint] {
        &self.points
    }

    /// Number of composite points, `M1 * M2` (including coincident ones).
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn split(&self) -> PowerSplit {
        self.split
    }

    /// Orders of the two component constellations.
    pub fn component_orders(&self) -> (usize, usize) {
        (self.order1, self.order2)
    }

    /// Average power of the composite alphabet.
    pub fn mean_power(&self) -> f64 {
        self.points.iter().map(|p| p.value.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }

    /// Number of geometrically distinct points.
    ///
    /// Points closer than `tol` are merged, and merging is transitive: a
    /// chain of near-coincident points counts once even if its endpoints are
    /// farther than `tol` apart. With `tol = 0` only exact duplicates merge.
    pub fn distinct_count(&self, tol: f64) -> usize {
        let n = self.points.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if (self.points[i].value - self.points[j].value).norm() <= tol {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri] = rj;
                    }
                }
            }
        }
        (0..n).filter(|&i| find(&mut parent, i) == i).count()
    }

    /// Smallest distance between two distinct composite points.
    ///
    /// Exactly coincident points are skipped; 0 only when points overlap
    /// approximately but not exactly. Governs the high-SNR error floor of
    /// joint detection.
    pub fn min_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                let d = (self.points[i].value - self.points[j].value).norm();
                if d > 0.0 {
                    best = best.min(d);
                }
            }
        }
        if best.is_finite() {
            best
        } else {
            0.0
        }
    }

    /// Writes `re,im,label1,label2` rows (with header).
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "re,im,label1,label2")?;
        for p in &self.points {
            writeln!(w, "{:.12e},{:.12e},{},{}", p.value.re, p.value.im, p.label1, p.label2)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn qpsk() -> Constellation {
        Constellation::standard(ConstellationKind::Psk, 4).unwrap()
    }

    #[test]
    fn bpsk_is_antipodal() {
        let c = Constellation::standard(ConstellationKind::Bpsk, 2).unwrap();
        assert_eq!(c.order(), 2);
        assert_eq!(c.symbols()[0], Complex64::new(1.0, 0.0));
        assert_eq!(c.symbols()[1], Complex64::new(-1.0, 0.0));
        assert_eq!(c.labels()[0].to_string(), "0");
        assert_eq!(c.labels()[1].to_string(), "1");
    }

    #[test]
    fn qpsk_points_sit_on_diagonals() {
        let c = qpsk();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect = [(s, s), (-s, s), (-s, -s), (s, -s)];
        for (sym, (re, im)) in c.symbols().iter().zip(expect) {
            assert_relative_eq!(sym.re, re, epsilon = 1e-15);
            assert_relative_eq!(sym.im, im, epsilon = 1e-15);
        }
        // Gray ring: adjacent labels differ in one bit.
        for i in 0..4 {
            let a = c.labels()[i];
            let b = c.labels()[(i + 1) % 4];
            assert_eq!(a.hamming_distance(&b), 1);
        }
    }

    #[test]
    fn eight_psk_distances_match_ring_geometry() {
        let c = Constellation::standard(ConstellationKind::Psk, 8).unwrap();
        let d01 = (c.symbols()[0] - c.symbols()[1]).norm_sqr();
        assert_relative_eq!(d01, 2.0 - 2.0 * (std::f64::consts::PI / 4.0).cos(), epsilon = 1e-12);
        assert_relative_eq!(c.min_distance(), d01.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn all_standard_orders_have_unit_mean_power() {
        let cases = [
            (ConstellationKind::Bpsk, vec![2]),
            (ConstellationKind::Psk, vec![4, 8, 16]),
            (ConstellationKind::Qam, vec![4, 8, 16, 64, 256, 1024]),
        ];
        for (kind, orders) in cases {
            for m in orders {
                let c = Constellation::standard(kind, m).unwrap();
                let p = c.symbols().iter().map(|s| s.norm_sqr()).sum::<f64>() / m as f64;
                assert_relative_eq!(p, 1.0, epsilon = 1e-12);
                assert_eq!(c.order(), m);
            }
        }
    }

    #[test]
    fn sixteen_qam_scale_matches_direct_summation() {
        // Mean power of the unscaled 4x4 odd-integer grid, summed longhand.
        let mut acc = 0.0;
        for re in [-3.0f64, -1.0, 1.0, 3.0] {
            for im in [-3.0f64, -1.0, 1.0, 3.0] {
                acc += re * re + im * im;
            }
        }
        let unscaled = acc / 16.0;
        assert_relative_eq!(unscaled, 10.0, epsilon = 1e-12);
        let c = Constellation::standard(ConstellationKind::Qam, 16).unwrap();
        let corner = c.symbols().iter().map(|s| s.re.abs().max(s.im.abs())).fold(0.0, f64::max);
        assert_relative_eq!(corner, 3.0 / 10.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn eight_qam_is_rectangular_four_by_two() {
        let c = Constellation::standard(ConstellationKind::Qam, 8).unwrap();
        let s = 1.0 / 6.0f64.sqrt();
        let mut res: Vec<i64> = c.symbols().iter().map(|p| (p.re / s).round() as i64).collect();
        let mut ims: Vec<i64> = c.symbols().iter().map(|p| (p.im / s).round() as i64).collect();
        res.sort_unstable();
        res.dedup();
        ims.sort_unstable();
        ims.dedup();
        assert_eq!(res, vec![-3, -1, 1, 3]);
        assert_eq!(ims, vec![-1, 1]);
    }

    #[test]
    fn qam_nearest_neighbours_are_gray() {
        let c = Constellation::standard(ConstellationKind::Qam, 64).unwrap();
        let dmin = c.min_distance();
        for i in 0..c.order() {
            for j in (i + 1)..c.order() {
                let d = (c.symbols()[i] - c.symbols()[j]).norm();
                if d < dmin * 1.0001 {
                    assert_eq!(c.labels()[i].hamming_distance(&c.labels()[j]), 1);
                }
            }
        }
    }

    #[test]
    fn unsupported_orders_are_rejected() {
        assert!(Constellation::standard(ConstellationKind::Psk, 32).is_err());
        assert!(Constellation::standard(ConstellationKind::Qam, 32).is_err());
        assert!(Constellation::standard(ConstellationKind::Bpsk, 4).is_err());
        assert!(Constellation::standard(ConstellationKind::Qam, 12).is_err());
    }

    #[test]
    fn new_rejects_bad_inputs() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let sym = |re, im| Complex64::new(re, im);
        // Mean power 2 instead of 1.
        let bad = Constellation::new(
            "x",
            vec![sym(1.0, 1.0), sym(-1.0, -1.0)],
            vec![Label::new(0, 1), Label::new(1, 1)],
        );
        assert!(matches!(bad, Err(ConstellationError::NotNormalized { .. })));
        // Duplicate label.
        let bad = Constellation::new(
            "x",
            vec![sym(s, s), sym(-s, -s)],
            vec![Label::new(1, 1), Label::new(1, 1)],
        );
        assert!(matches!(bad, Err(ConstellationError::DuplicateLabel { .. })));
        // Not a power of two.
        let bad = Constellation::new(
            "x",
            vec![sym(1.0, 0.0), sym(-0.5, 0.86), sym(-0.5, -0.86)],
            vec![Label::new(0, 2), Label::new(1, 2), Label::new(2, 2)],
        );
        assert!(matches!(bad, Err(ConstellationError::NotPowerOfTwo { .. })));
    }

    #[test]
    fn rotation_by_zero_is_identity() {
        let c = qpsk();
        let r = c.rotated(0.0);
        for (a, b) in c.symbols().iter().zip(r.symbols()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rotation_by_half_pi_permutes_qpsk() {
        let c = qpsk();
        let r = c.rotated(std::f64::consts::FRAC_PI_2);
        // Each rotated symbol coincides with some original symbol.
        for rs in r.symbols() {
            let hit = c.symbols().iter().any(|cs| (cs - rs).norm() < 1e-12);
            assert!(hit, "rotated QPSK point {rs} not on the original grid");
        }
    }

    #[test]
    fn rotation_preserves_distances() {
        let c = Constellation::standard(ConstellationKind::Qam, 16).unwrap();
        let r = c.rotated(0.7318);
        assert_relative_eq!(c.min_distance(), r.min_distance(), epsilon = 1e-12);
    }

    #[test]
    fn superimpose_orders_points_user1_major() {
        let split = PowerSplit::new(0.2, 1.0).unwrap();
        let c = qpsk();
        let sc = SuperConstellation::superimpose(&c, &c, split);
        assert_eq!(sc.len(), 16);
        let a1 = 0.2f64.sqrt();
        let a2 = 0.8f64.sqrt();
        for i1 in 0..4 {
            for i2 in 0..4 {
                let p = sc.points()[i1 * 4 + i2];
                let expect = a1 * c.symbols()[i1] + a2 * c.symbols()[i2];
                assert!((p.value - expect).norm() < 1e-15);
                assert_eq!(p.label1, c.labels()[i1]);
                assert_eq!(p.label2, c.labels()[i2]);
            }
        }
    }

    #[test]
    fn qpsk_on_qpsk_is_bijective_away_from_half_split() {
        let c = qpsk();
        let sc = SuperConstellation::superimpose(&c, &c, PowerSplit::new(0.2, 1.0).unwrap());
        assert_eq!(sc.distinct_count(1e-9), 16);
        assert!(sc.min_distance() > 1e-6);
    }

    #[test]
    fn qpsk_on_qpsk_collapses_at_half_split() {
        let c = qpsk();
        let sc = SuperConstellation::superimpose(&c, &c, PowerSplit::new(0.5, 1.0).unwrap());
        // Equal powers fold the 16 nominal points onto a 3x3 lattice.
        assert_eq!(sc.distinct_count(1e-9), 9);
    }

    #[test]
    fn psk_on_rect_qam_equal_power_stays_bijective() {
        let psk = qpsk();
        let qam8 = Constellation::standard(ConstellationKind::Qam, 8).unwrap();
        let sc = SuperConstellation::superimpose(&psk, &qam8, PowerSplit::new(0.5, 1.0).unwrap());
        assert_eq!(sc.len(), 32);
        assert_eq!(sc.distinct_count(1e-9), 32);
    }

    #[test]
    fn energy_is_conserved_for_zero_mean_components() {
        let c1 = qpsk();
        let c2 = Constellation::standard(ConstellationKind::Qam, 16).unwrap();
        for &(alpha, p) in &[(0.2, 1.0), (0.5, 3.0), (0.85, 0.4)] {
            let sc =
                SuperConstellation::superimpose(&c1, &c2, PowerSplit::new(alpha, p).unwrap());
            assert_relative_eq!(sc.mean_power(), p, epsilon = 1e-12);
        }
    }

    #[test]
    fn distinct_count_with_zero_tol_merges_exact_duplicates_only() {
        let c = qpsk();
        let sc = SuperConstellation::superimpose(&c, &c, PowerSplit::new(0.5, 1.0).unwrap());
        // The alpha = 0.5 collapse is exact in floating point for QPSK:
        // sqrt(0.5)(s1 + s2) hits the same bit patterns.
        assert_eq!(sc.distinct_count(0.0), 9);
        let sc = SuperConstellation::superimpose(&c, &c, PowerSplit::new(0.2, 1.0).unwrap());
        assert_eq!(sc.distinct_count(0.0), 16);
    }

    #[test]
    fn huge_tol_merges_everything() {
        let c = qpsk();
        let sc = SuperConstellation::superimpose(&c, &c, PowerSplit::new(0.2, 1.0).unwrap());
        assert_eq!(sc.distinct_count(100.0), 1);
    }

    #[test]
    fn min_distance_skips_exact_overlaps() {
        let c = qpsk();
        let sc = SuperConstellation::superimpose(&c, &c, PowerSplit::new(0.5, 1.0).unwrap());
        // The collapsed alphabet is a 3x3 lattice with pitch 1.
        assert_relative_eq!(sc.min_distance(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn invalid_splits_are_rejected() {
        assert!(PowerSplit::new(-0.1, 1.0).is_err());
        assert!(PowerSplit::new(1.1, 1.0).is_err());
        assert!(PowerSplit::new(0.5, 0.0).is_err());
        assert!(PowerSplit::new(0.5, f64::NAN).is_err());
        assert!(PowerSplit::new(0.5, f64::INFINITY).is_err());
    }

    #[test]
    fn csv_round_trip_shape() {
        let c = qpsk();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "re,im,label");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].ends_with(",00"));

        let sc = SuperConstellation::superimpose(&c, &c, PowerSplit::new(0.2, 1.0).unwrap());
        let mut buf = Vec::new();
        sc.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 17);
        assert!(text.starts_with("re,im,label1,label2\n"));
    }

    #[test]
    fn label_concat_and_bits() {
        let a = Label::new(0b10, 2);
        let b = Label::new(0b011, 3);
        let c = a.concat(&b);
        assert_eq!(c.len(), 5);
        assert_eq!(c.to_string(), "10011");
        assert_eq!(c.bits().collect::<Vec<_>>(), vec![1, 0, 0, 1, 1]);
    }
}
