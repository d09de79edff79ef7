//! Exact rational geometry in `ℝⁿ`.
//!
//! Every predicate in this module is decided by comparing exact rational
//! quantities; distances are handled through their squares so no square roots
//! are ever taken.  Where a square root is genuinely needed (Lebesgue margins,
//! arc-length surrogates) the dyadic rounding helpers return certified one-
//! sided bounds computed with integer square roots.
//!
//! Open boxes are the basic regions.  A [`DilatedRegion`] is an open box
//! fattened by an open Euclidean ball of dyadic radius; the containment tests
//! on dilated regions are the certificates used by the chain machinery.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar, always in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Builds `n / d` exactly.  Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Builds the integer `n` as a rational.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `2^-k` as an exact rational.
pub fn pow2_neg(k: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k)
}

/// `4^-k = (2^-k)²` as an exact rational.
pub fn pow4_neg(k: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << (2 * k))
}

/// `2^k` as an exact rational.
pub fn pow2(k: u32) -> Rational {
    Rational::from_integer(BigInt::one() << k)
}

/// A dyadic precision exponent: the value `k` stands for the scale `2^-k`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct DyadicExp(pub u32);

impl DyadicExp {
    /// The scale `2^-k` itself.
    pub fn scale(self) -> Rational {
        pow2_neg(self.0)
    }

    /// The squared scale `4^-k`.
    pub fn scale_sq(self) -> Rational {
        pow4_neg(self.0)
    }
}

/// A point of `ℝⁿ` with exact rational coordinates, `n ≥ 1`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RationalPoint {
    coords: Vec<Rational>,
}

impl RationalPoint {
    /// Wraps coordinates.  Panics on an empty coordinate list.
    pub fn new(coords: Vec<Rational>) -> Self {
        assert!(!coords.is_empty(), "points need at least one coordinate");
        RationalPoint { coords }
    }

    /// Convenience constructor from integer pairs `n/d`.
    pub fn from_fracs(fracs: &[(i64, i64)]) -> Self {
        Self::new(fracs.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    /// Convenience constructor from integers.
    pub fn from_ints(ints: &[i64]) -> Self {
        Self::new(ints.iter().map(|&n| rat_int(n)).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coord(&self, i: usize) -> &Rational {
        &self.coords[i]
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }
}

/// An open axis-aligned box `∏ (lo_i, hi_i)` with `lo_i < hi_i` exactly.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RationalBox {
    lo: Vec<Rational>,
    hi: Vec<Rational>,
}

impl RationalBox {
    /// Validates `lo.len() == hi.len() ≥ 1` and `lo_i < hi_i` for every axis.
    pub fn new(lo: Vec<Rational>, hi: Vec<Rational>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::invalid("box", "sides must be nonempty and of equal dimension"));
        }
        for (l, h) in lo.iter().zip(&hi) {
            if l >= h {
                return Err(Error::invalid("box", format!("side ({l}, {h}) is empty")));
            }
        }
        Ok(RationalBox { lo, hi })
    }

    /// Convenience constructor from integer fractions `(n, d)` per corner.
    pub fn from_fracs(lo: &[(i64, i64)], hi: &[(i64, i64)]) -> Self {
        Self::new(
            lo.iter().map(|&(n, d)| rat(n, d)).collect(),
            hi.iter().map(|&(n, d)| rat(n, d)).collect(),
        )
        .expect("literal box must be nonempty")
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[Rational] {
        &self.lo
    }

    pub fn hi(&self) -> &[Rational] {
        &self.hi
    }

    /// Side length on axis `i`.
    pub fn side(&self, i: usize) -> Rational {
        &self.hi[i] - &self.lo[i]
    }

    /// The exact center point.
    pub fn center(&self) -> RationalPoint {
        let half = rat(1, 2);
        RationalPoint::new(
            self.lo.iter().zip(&self.hi).map(|(l, h)| (l + h) * &half).collect(),
        )
    }

    /// Squared diameter of the box, `Σ (hi_i − lo_i)²`.
    pub fn diam_sq(&self) -> Rational {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| {
                let d = h - l;
                &d * &d
            })
            .sum()
    }

    /// All `2ⁿ` corner points of the closure.
    pub fn corners(&self) -> Vec<RationalPoint> {
        let n = self.dim();
        let mut out = Vec::with_capacity(1 << n);
        for mask in 0u32..(1 << n) {
            let coords = (0..n)
                .map(|i| if mask & (1 << i) != 0 { self.hi[i].clone() } else { self.lo[i].clone() })
                .collect();
            out.push(RationalPoint::new(coords));
        }
        out
    }

    /// Strict interior membership: `lo_i < p_i < hi_i` on every axis.
    pub fn contains_point(&self, p: &RationalPoint) -> bool {
        assert_eq!(self.dim(), p.dim(), "dimension mismatch");
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(p.coords())
            .all(|((l, h), c)| l < c && c < h)
    }

    /// Closure membership: `lo_i ≤ p_i ≤ hi_i` on every axis.
    pub fn closure_contains_point(&self, p: &RationalPoint) -> bool {
        assert_eq!(self.dim(), p.dim(), "dimension mismatch");
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(p.coords())
            .all(|((l, h), c)| l <= c && c <= h)
    }

    /// Containment of open boxes: `other ⊆ self` (coordinatewise `≤`).
    pub fn contains_box(&self, other: &RationalBox) -> bool {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(other.lo.iter().zip(&other.hi))
            .all(|((l, h), (ol, oh))| l <= ol && oh <= h)
    }

    /// Containment of the *closure* of `other` in the open box `self`
    /// (coordinatewise strict).
    pub fn contains_closure(&self, other: &RationalBox) -> bool {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(other.lo.iter().zip(&other.hi))
            .all(|((l, h), (ol, oh))| l < ol && oh < h)
    }

    /// Nonemptiness of the open intersection `self ∩ other`.
    pub fn meets_box(&self, other: &RationalBox) -> bool {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(other.lo.iter().zip(&other.hi))
            .all(|((l, h), (ol, oh))| l < oh && ol < h)
    }

    /// The open intersection, if nonempty.
    pub fn intersection(&self, other: &RationalBox) -> Option<RationalBox> {
        if !self.meets_box(other) {
            return None;
        }
        let lo = self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(b).clone()).collect();
        let hi = self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(b).clone()).collect();
        Some(RationalBox::new(lo, hi).expect("meeting boxes have nonempty intersection"))
    }

    /// Smallest box containing `self` expanded by `pad` on every side.
    pub fn pad(&self, pad: &Rational) -> RationalBox {
        assert!(pad.is_positive(), "padding must be positive");
        RationalBox {
            lo: self.lo.iter().map(|l| l - pad).collect(),
            hi: self.hi.iter().map(|h| h + pad).collect(),
        }
    }
}

/// An open box dilated by an open Euclidean ball: `B_{2^-m}(base)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DilatedRegion {
    pub base: RationalBox,
    pub radius: DyadicExp,
}

impl DilatedRegion {
    pub fn new(base: RationalBox, radius: DyadicExp) -> Self {
        DilatedRegion { base, radius }
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Closed bounding box of the region: the base expanded by the radius on
    /// every axis.  The projection of the dilation onto each axis is exactly
    /// the dilated interval, so this box is tight.
    pub fn bounding_box(&self) -> RationalBox {
        self.base.pad(&self.radius.scale())
    }
}

/// Result of locating a point approximation against a dilated region.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PointLocation {
    /// The whole approximation box lies inside the open region.
    Inside,
    /// The closed approximation box misses the closed region.
    Outside,
    /// The approximation is too coarse to decide.
    Unknown,
}

/// Squared Euclidean distance `Σ (p_i − q_i)²`.
pub fn dist_sq(p: &RationalPoint, q: &RationalPoint) -> Rational {
    assert_eq!(p.dim(), q.dim(), "dimension mismatch");
    p.coords()
        .iter()
        .zip(q.coords())
        .map(|(a, b)| {
            let d = a - b;
            &d * &d
        })
        .sum()
}

/// Squared distance between the closures of two boxes:
/// `Σ max(0, lo_i(S) − hi_i(R), lo_i(R) − hi_i(S))²`.
pub fn box_gap_sq(r: &RationalBox, s: &RationalBox) -> Rational {
    assert_eq!(r.dim(), s.dim(), "dimension mismatch");
    let mut acc = Rational::zero();
    for i in 0..r.dim() {
        let a = &s.lo()[i] - &r.hi()[i];
        let b = &r.lo()[i] - &s.hi()[i];
        let g = if a.is_positive() {
            a
        } else if b.is_positive() {
            b
        } else {
            continue;
        };
        acc += &g * &g;
    }
    acc
}

/// Squared distance from a point to the closure of a box.
pub fn point_box_gap_sq(p: &RationalPoint, r: &RationalBox) -> Rational {
    assert_eq!(p.dim(), r.dim(), "dimension mismatch");
    let mut acc = Rational::zero();
    for i in 0..r.dim() {
        let c = p.coord(i);
        let g = if c < &r.lo()[i] {
            &r.lo()[i] - c
        } else if c > &r.hi()[i] {
            c - &r.hi()[i]
        } else {
            continue;
        };
        acc += &g * &g;
    }
    acc
}

/// Squared distance from a point to the farthest point of a box closure.
/// Attained at a corner; computed per axis as `max(|p_i − lo_i|, |p_i − hi_i|)`.
pub fn point_box_span_sq(p: &RationalPoint, r: &RationalBox) -> Rational {
    assert_eq!(p.dim(), r.dim(), "dimension mismatch");
    let mut acc = Rational::zero();
    for i in 0..r.dim() {
        let a = (p.coord(i) - &r.lo()[i]).abs();
        let b = (p.coord(i) - &r.hi()[i]).abs();
        let g = a.max(b);
        acc += &g * &g;
    }
    acc
}

/// Squared maximal distance between the closures of two boxes:
/// `Σ max(hi_i(R) − lo_i(S), hi_i(S) − lo_i(R))²`.
///
/// `box_span_sq(r, r)` is the squared diameter of `r`.
pub fn box_span_sq(r: &RationalBox, s: &RationalBox) -> Rational {
    assert_eq!(r.dim(), s.dim(), "dimension mismatch");
    let mut acc = Rational::zero();
    for i in 0..r.dim() {
        let a = &r.hi()[i] - &s.lo()[i];
        let b = &s.hi()[i] - &r.lo()[i];
        let g = a.max(b);
        acc += &g * &g;
    }
    acc
}

/// Decides whether two dilated regions intersect.
///
/// Balls dilate boxes along shortest segments, so the regions meet exactly
/// when the squared gap of the bases is below the squared sum of the radii.
/// This test is sound and complete.
pub fn dilations_intersect(v: &DilatedRegion, w: &DilatedRegion) -> bool {
    assert_eq!(v.dim(), w.dim(), "dimension mismatch");
    let sum = v.radius.scale() + w.radius.scale();
    box_gap_sq(&v.base, &w.base) < &sum * &sum
}

/// Decides whether the closure of a dilated region lies inside an open box.
///
/// The projection of the closed dilation onto axis `i` is exactly
/// `[lo_i − r, hi_i + r]`, and a set is contained in an open box exactly when
/// all its projections are, so this test is sound and complete.
pub fn closure_dilation_in_box(v: &DilatedRegion, q: &RationalBox) -> bool {
    assert_eq!(v.dim(), q.dim(), "dimension mismatch");
    let r = v.radius.scale();
    for i in 0..v.dim() {
        if !(&q.lo()[i] < &(&v.base.lo()[i] - &r)) || !(&(&v.base.hi()[i] + &r) < &q.hi()[i]) {
            return false;
        }
    }
    true
}

/// Certifies `closure(V) ⊆ W` for dilated regions `V`, `W`.
///
/// Sound but conservative: requires `radius(V) < radius(W)` and every corner
/// of `V.base` within Euclidean distance `< radius(W) − radius(V)` of the
/// closure of `W.base`.  The distance to a convex set is convex, so the corner
/// maximum bounds the whole base, and the triangle inequality absorbs the
/// dilation of `V`.
pub fn closure_dilation_in_dilation(v: &DilatedRegion, w: &DilatedRegion) -> bool {
    assert_eq!(v.dim(), w.dim(), "dimension mismatch");
    let margin = w.radius.scale() - v.radius.scale();
    if !margin.is_positive() {
        return false;
    }
    let margin_sq = &margin * &margin;
    v.base.corners().iter().all(|c| point_box_gap_sq(c, &w.base) < margin_sq)
}

/// Locates a point, known only up to an approximation box, against a dilated
/// region.  `Inside` and `Outside` are certificates; `Unknown` means the
/// approximation is too coarse.
pub fn locate_point(approx: &RationalBox, v: &DilatedRegion) -> PointLocation {
    assert_eq!(approx.dim(), v.dim(), "dimension mismatch");
    let r_sq = v.radius.scale_sq();
    // Inside: every corner of the approximation closure is strictly within
    // the dilation radius of the base closure (corner max bounds the box).
    if approx.corners().iter().all(|c| point_box_gap_sq(c, &v.base) < r_sq) {
        return PointLocation::Inside;
    }
    // Outside: the box closure misses the region closure.
    if box_gap_sq(approx, &v.base) > r_sq {
        return PointLocation::Outside;
    }
    PointLocation::Unknown
}

/// Exact squared distance from `p` to the closed segment `[a, b]`.
///
/// The squared distance along the segment is a convex quadratic in the
/// parameter, minimized at the clamped orthogonal projection, which has
/// rational coordinates.
pub fn point_segment_dist_sq(p: &RationalPoint, a: &RationalPoint, b: &RationalPoint) -> Rational {
    assert_eq!(p.dim(), a.dim(), "dimension mismatch");
    assert_eq!(p.dim(), b.dim(), "dimension mismatch");
    let len_sq = dist_sq(a, b);
    if len_sq.is_zero() {
        return dist_sq(p, a);
    }
    // t* = <p − a, b − a> / |b − a|², clamped to [0, 1].
    let mut dot = Rational::zero();
    for i in 0..p.dim() {
        dot += (p.coord(i) - a.coord(i)) * (b.coord(i) - a.coord(i));
    }
    let t = (dot / len_sq).max(Rational::zero()).min(Rational::one());
    let foot = RationalPoint::new(
        (0..p.dim())
            .map(|i| a.coord(i) + &t * (b.coord(i) - a.coord(i)))
            .collect(),
    );
    dist_sq(p, &foot)
}

/// Conservative `f64` bounds `lo ≤ x ≤ hi` on a rational, for use as a
/// pre-filter in front of exact comparisons.  The conversion is widened by
/// two ulps on each side, which absorbs any rounding direction; non-finite
/// conversions collapse to the trivial bounds.
pub fn f64_bounds(x: &Rational) -> (f64, f64) {
    let v = match x.to_f64() {
        Some(v) if v.is_finite() => v,
        _ => return (f64::NEG_INFINITY, f64::INFINITY),
    };
    (v.next_down().next_down(), v.next_up().next_up())
}

/// Floor of a rational as a big integer.
pub fn rational_floor(x: &Rational) -> BigInt {
    x.numer().div_floor(x.denom())
}

/// Ceiling of a rational as a big integer.
pub fn rational_ceil(x: &Rational) -> BigInt {
    x.numer().div_ceil(x.denom())
}

fn int_sqrt_floor(n: &BigInt) -> BigInt {
    assert!(!n.is_negative(), "negative radicand");
    n.sqrt()
}

/// Largest dyadic `t/2^precision` with `t/2^precision ≤ √x`; requires `x ≥ 0`.
pub fn dyadic_sqrt_lb(x: &Rational, precision: u32) -> Rational {
    assert!(!x.is_negative(), "negative radicand");
    // t = floor(√(x · 4^p)) = floor(√(num · 4^p / den)); use floor division
    // before the integer root, then correct: floor sqrt of a floor may
    // overshoot by at most... it cannot overshoot: floor(√floor(y)) ≤ √y.
    let scaled = (x.numer() << (2 * precision)) / x.denom();
    let t = int_sqrt_floor(&scaled);
    // Guard against the floor-division loss: t must satisfy t² ≤ x·4^p.
    let mut t = t;
    while &(&t * &t) * x.denom() > (x.numer() << (2 * precision)) {
        t -= 1;
    }
    Rational::new(t, BigInt::one() << precision)
}

/// Smallest dyadic `t/2^precision` with `√x ≤ t/2^precision`; requires `x ≥ 0`.
pub fn dyadic_sqrt_ub(x: &Rational, precision: u32) -> Rational {
    assert!(!x.is_negative(), "negative radicand");
    let mut t = int_sqrt_floor(&((x.numer() << (2 * precision)) / x.denom()));
    // Increase until t² ≥ x·4^p.
    while &(&t * &t) * x.denom() < (x.numer() << (2 * precision)) {
        t += 1;
    }
    Rational::new(t, BigInt::one() << precision)
}

/// A closed box with possibly degenerate sides (`lo_i ≤ hi_i`), used only by
/// the exact box-subtraction routine.
#[derive(Clone, Debug)]
struct ClosedBox {
    lo: Vec<Rational>,
    hi: Vec<Rational>,
}

/// Decides whether the closed box `[lo, hi]` is covered by the union of the
/// open boxes `cutters`, by exact subtraction.  Degenerate (measure-zero)
/// remainder slabs are kept, so the decision is exact.
pub fn closed_box_covered(lo: &[Rational], hi: &[Rational], cutters: &[RationalBox]) -> bool {
    assert_eq!(lo.len(), hi.len(), "dimension mismatch");
    assert!(lo.iter().zip(hi).all(|(l, h)| l <= h), "closed box must be nonempty");
    let mut remainder = vec![ClosedBox { lo: lo.to_vec(), hi: hi.to_vec() }];
    for cut in cutters {
        assert_eq!(cut.dim(), lo.len(), "dimension mismatch");
        let mut next = Vec::new();
        for b in remainder {
            subtract_open_box(&b, cut, &mut next);
        }
        remainder = next;
        if remainder.is_empty() {
            return true;
        }
    }
    remainder.is_empty()
}

/// Splits `b \ cut` into closed pieces appended to `out`.
fn subtract_open_box(b: &ClosedBox, cut: &RationalBox, out: &mut Vec<ClosedBox>) {
    let n = b.lo.len();
    // If the closed box misses the open cutter entirely, keep it whole.
    let overlaps = (0..n).all(|i| b.lo[i] < cut.hi()[i] && cut.lo()[i] < b.hi[i]);
    if !overlaps {
        out.push(b.clone());
        return;
    }
    // Peel slabs axis by axis; `core` tracks the part still overlapping the
    // cutter on all processed axes.
    let mut core = b.clone();
    for i in 0..n {
        if core.lo[i] <= cut.lo()[i] {
            // Left slab: x_i ≤ cut.lo (closed; outside the open cutter).
            let mut slab = core.clone();
            slab.hi[i] = cut.lo()[i].clone();
            out.push(slab);
        }
        if cut.hi()[i] <= core.hi[i] {
            // Right slab: x_i ≥ cut.hi.
            let mut slab = core.clone();
            slab.lo[i] = cut.hi()[i].clone();
            out.push(slab);
        }
        core.lo[i] = core.lo[i].clone().max(cut.lo()[i].clone());
        core.hi[i] = core.hi[i].clone().min(cut.hi()[i].clone());
        if core.lo[i] > core.hi[i] {
            // Nothing of the box actually lies strictly inside on this axis.
            return;
        }
    }
    // `core` now satisfies cut.lo ≤ x ≤ cut.hi on every axis; the strictly
    // interior part vanishes, but faces touching the cutter boundary survive.
    for i in 0..n {
        if core.lo[i] == cut.lo()[i] {
            let mut face = core.clone();
            face.hi[i] = face.lo[i].clone();
            out.push(face);
        }
        if core.hi[i] == cut.hi()[i] {
            let mut face = core.clone();
            face.lo[i] = face.hi[i].clone();
            out.push(face);
        }
    }
}

/// Certifies `closure(V) ⊆ ⋃ boxes` for a dilated region `V`.
///
/// Conservative: tests the closed bounding box of the region, which includes
/// the corner areas outside the rounded dilation.
pub fn region_closure_in_union(v: &DilatedRegion, boxes: &[RationalBox]) -> bool {
    let bb = v.bounding_box();
    closed_box_covered(bb.lo(), bb.hi(), boxes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(coords: &[(i64, i64)]) -> RationalPoint {
        RationalPoint::from_fracs(coords)
    }

    #[test]
    fn dist_sq_examples() {
        assert_eq!(dist_sq(&pt(&[(0, 1), (0, 1)]), &pt(&[(3, 1), (4, 1)])), rat_int(25));
        assert_eq!(dist_sq(&pt(&[(1, 2)]), &pt(&[(1, 3)])), rat(1, 36));
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn dist_sq_dimension_mismatch_panics() {
        dist_sq(&pt(&[(0, 1)]), &pt(&[(0, 1), (0, 1)]));
    }

    #[test]
    fn gap_and_span_examples() {
        let r = RationalBox::from_fracs(&[(0, 1), (0, 1)], &[(1, 1), (1, 1)]);
        let s = RationalBox::from_fracs(&[(2, 1), (2, 1)], &[(3, 1), (3, 1)]);
        assert_eq!(box_gap_sq(&r, &s), rat_int(2));
        assert_eq!(box_span_sq(&r, &s), rat_int(18));
        // Touching boxes have zero gap.
        let t = RationalBox::from_fracs(&[(1, 1), (0, 1)], &[(2, 1), (1, 1)]);
        assert_eq!(box_gap_sq(&r, &t), rat_int(0));
        assert_eq!(box_span_sq(&r, &t), rat_int(5));
        // Span of a box against itself is its squared diameter.
        assert_eq!(box_span_sq(&r, &r), rat_int(2));
        assert_eq!(r.diam_sq(), rat_int(2));
    }

    #[test]
    fn dilations_intersect_example() {
        // Bases at gap 1/2; radii 1/4 + 1/8 = 3/8 < 1/2: disjoint.
        let v = DilatedRegion::new(
            RationalBox::from_fracs(&[(0, 1), (0, 1)], &[(1, 1), (1, 1)]),
            DyadicExp(2),
        );
        let w = DilatedRegion::new(
            RationalBox::from_fracs(&[(3, 2), (0, 1)], &[(2, 1), (1, 1)]),
            DyadicExp(3),
        );
        assert!(!dilations_intersect(&v, &w));
        // Radii 1/4 + 1/4 = 1/2: still disjoint (strict); 1/4 + 1/2 meets.
        let w2 = DilatedRegion::new(w.base.clone(), DyadicExp(2));
        assert!(!dilations_intersect(&v, &w2));
        let w3 = DilatedRegion::new(w.base.clone(), DyadicExp(1));
        assert!(dilations_intersect(&v, &w3));
    }

    #[test]
    fn closure_dilation_in_box_is_per_coordinate() {
        let v = DilatedRegion::new(
            RationalBox::from_fracs(&[(1, 4), (1, 4)], &[(3, 4), (3, 4)]),
            DyadicExp(3),
        );
        let q = RationalBox::from_fracs(&[(0, 1), (0, 1)], &[(1, 1), (1, 1)]);
        assert!(closure_dilation_in_box(&v, &q));
        // Radius 1/4 makes the dilation touch the boundary: rejected.
        let v2 = DilatedRegion::new(v.base.clone(), DyadicExp(2));
        assert!(!closure_dilation_in_box(&v2, &q));
    }

    #[test]
    fn closure_dilation_in_dilation_examples() {
        let v = DilatedRegion::new(
            RationalBox::from_fracs(&[(3, 8), (3, 8)], &[(5, 8), (5, 8)]),
            DyadicExp(4),
        );
        let w = DilatedRegion::new(
            RationalBox::from_fracs(&[(0, 1), (0, 1)], &[(1, 1), (1, 1)]),
            DyadicExp(1),
        );
        assert!(closure_dilation_in_dilation(&v, &w));
        // A region never certifies inside itself: zero margin.
        assert!(!closure_dilation_in_dilation(&w, &w));
    }

    #[test]
    fn locate_point_cases() {
        let v = DilatedRegion::new(
            RationalBox::from_fracs(&[(0, 1), (0, 1)], &[(1, 1), (1, 1)]),
            DyadicExp(2),
        );
        let inside = RationalBox::from_fracs(&[(1, 4), (1, 4)], &[(1, 2), (1, 2)]);
        assert_eq!(locate_point(&inside, &v), PointLocation::Inside);
        let outside = RationalBox::from_fracs(&[(2, 1), (2, 1)], &[(3, 1), (3, 1)]);
        assert_eq!(locate_point(&outside, &v), PointLocation::Outside);
        // Straddles the region boundary.
        let straddle = RationalBox::from_fracs(&[(1, 1), (0, 1)], &[(3, 2), (1, 1)]);
        assert_eq!(locate_point(&straddle, &v), PointLocation::Unknown);
    }

    #[test]
    fn point_segment_examples() {
        let a = pt(&[(0, 1), (0, 1)]);
        let b = pt(&[(1, 1), (0, 1)]);
        assert_eq!(point_segment_dist_sq(&pt(&[(1, 2), (1, 2)]), &a, &b), rat(1, 4));
        assert_eq!(point_segment_dist_sq(&pt(&[(2, 1), (0, 1)]), &a, &b), rat_int(1));
        assert_eq!(point_segment_dist_sq(&pt(&[(1, 3), (0, 1)]), &a, &b), rat_int(0));
        // Degenerate segment.
        assert_eq!(point_segment_dist_sq(&pt(&[(1, 1), (1, 1)]), &a, &a), rat_int(2));
    }

    #[test]
    fn sqrt_bounds_bracket() {
        for (n, d) in [(2i64, 1i64), (3, 4), (7, 5), (1, 3), (0, 1), (169, 4)] {
            let x = rat(n, d);
            for p in [0u32, 3, 10, 20] {
                let lb = dyadic_sqrt_lb(&x, p);
                let ub = dyadic_sqrt_ub(&x, p);
                assert!(&lb * &lb <= x, "lb² ≤ x failed for {n}/{d} at {p}");
                assert!(&ub * &ub >= x, "ub² ≥ x failed for {n}/{d} at {p}");
                assert!(&ub - &lb <= pow2_neg(p) * rat_int(2));
            }
        }
        // Exact squares at sufficient precision are tight.
        assert_eq!(dyadic_sqrt_lb(&rat_int(169), 4), rat_int(13));
        assert_eq!(dyadic_sqrt_ub(&rat_int(169), 4), rat_int(13));
    }

    #[test]
    fn box_subtraction_covers() {
        // [0,1]² covered by two overlapping open boxes.
        let lo = vec![rat_int(0), rat_int(0)];
        let hi = vec![rat_int(1), rat_int(1)];
        let a = RationalBox::from_fracs(&[(-1, 1), (-1, 1)], &[(3, 5), (2, 1)]);
        let b = RationalBox::from_fracs(&[(1, 2), (-1, 1)], &[(2, 1), (2, 1)]);
        assert!(closed_box_covered(&lo, &hi, &[a.clone(), b.clone()]));
        // Touching instead of overlapping leaves the seam uncovered.
        let a2 = RationalBox::from_fracs(&[(-1, 1), (-1, 1)], &[(1, 2), (2, 1)]);
        assert!(!closed_box_covered(&lo, &hi, &[a2, b.clone()]));
        // A single cutter that only reaches the boundary fails.
        let c = RationalBox::from_fracs(&[(0, 1), (0, 1)], &[(1, 1), (1, 1)]);
        assert!(!closed_box_covered(&lo, &hi, &[c]));
        // Degenerate query boxes work (a face).
        assert!(closed_box_covered(
            &[rat_int(0), rat_int(0)],
            &[rat_int(1), rat_int(0)],
            &[a, b]
        ));
    }

    #[test]
    fn region_closure_in_union_conservative() {
        let v = DilatedRegion::new(
            RationalBox::from_fracs(&[(1, 4), (1, 4)], &[(1, 2), (1, 2)]),
            DyadicExp(3),
        );
        let u = RationalBox::from_fracs(&[(0, 1), (0, 1)], &[(1, 1), (1, 1)]);
        assert!(region_closure_in_union(&v, &[u]));
        let roomy = RationalBox::from_fracs(&[(1, 16), (1, 16)], &[(11, 16), (11, 16)]);
        assert!(region_closure_in_union(&v, &[roomy]));
        // The bounding box is [1/8, 5/8]²; the open box with the same corners
        // leaves the boundary uncovered, so the conservative test rejects it.
        let tight = RationalBox::from_fracs(&[(1, 8), (1, 8)], &[(5, 8), (5, 8)]);
        assert!(!region_closure_in_union(&v, &[tight]));
    }
}
