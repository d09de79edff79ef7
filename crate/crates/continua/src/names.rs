//! Stream-style names for points, compact sets, and continuous functions.
//!
//! A name is an infinite stream of finite approximations.  Points are named
//! by shrinking rational boxes that contain them, compact sets by minimal
//! finite covers, and continuous functions on `[0, 1]` by polygonal curves
//! forming a fast Cauchy sequence in the uniform metric.  Streams are
//! deterministic (same constructor arguments, same stream) and single
//! consumer; pulled values are immutable.
//!
//! Candidate boxes come from the dyadic grid family
//! `∏ (a_i 2^-d, b_i 2^-d)`, enumerated by increasing depth and then
//! lexicographically.  Point names emit, per depth, the width-2 windows of
//! the grid that contain the point; these form a cofinal subfamily of all
//! rational boxes containing it (arbitrarily fine boxes appear at every
//! scale), which is all any consumer of a point name relies on.

use std::collections::VecDeque;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::catalog::TestContinuum;
use crate::error::{Error, Result};
use crate::geometry::{
    dist_sq, dyadic_sqrt_ub, point_segment_dist_sq, pow2, pow2_neg, rational_ceil, rational_floor,
    DyadicExp, Rational, RationalBox, RationalPoint,
};

/// The dyadic grid box `∏ (a_i 2^-d, (a_i + width) 2^-d)`.
pub fn dyadic_window(cell: &[BigInt], depth: u32, width: u64) -> RationalBox {
    assert!(width > 0, "window width must be positive");
    let den = BigInt::one() << depth;
    let w = BigInt::from(width);
    RationalBox::new(
        cell.iter().map(|a| Rational::new(a.clone(), den.clone())).collect(),
        cell.iter().map(|a| Rational::new(a + &w, den.clone())).collect(),
    )
    .expect("dyadic windows are nonempty")
}

/// Per-axis choices of `a` such that `q_i ∈ (a 2^-d, (a+2) 2^-d)`: one choice
/// when `q_i` lies on the depth-`d` grid, two otherwise.
fn window_shifts(q: &Rational, depth: u32) -> Vec<BigInt> {
    let scaled = q * pow2(depth);
    let fl = rational_floor(&scaled);
    if scaled == Rational::from_integer(fl.clone()) {
        vec![fl - 1]
    } else {
        vec![&fl - 1, fl]
    }
}

/// All width-2 windows at `depth` containing `q`, in lexicographic order of
/// the shift choices.  Between 1 and `2ⁿ` windows.
pub fn windows_containing(q: &RationalPoint, depth: u32) -> Vec<RationalBox> {
    let choices: Vec<Vec<BigInt>> = q.coords().iter().map(|c| window_shifts(c, depth)).collect();
    let mut cells = vec![Vec::new()];
    for axis in &choices {
        let mut next = Vec::new();
        for prefix in &cells {
            for a in axis {
                let mut cell = prefix.clone();
                cell.push(a.clone());
                next.push(cell);
            }
        }
        cells = next;
    }
    cells.iter().map(|cell| dyadic_window(cell, depth, 2)).collect()
}

/// A stream name of a point: every pulled box contains the point, and boxes
/// of squared diameter below any `4^-k` eventually appear.
pub struct PointName {
    dim: usize,
    stream: Box<dyn FnMut() -> Result<RationalBox> + Send>,
}

impl std::fmt::Debug for PointName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PointName").field("dim", &self.dim).finish_non_exhaustive()
    }
}

impl PointName {
    /// Wraps a raw stream.  The caller is responsible for the name contract.
    pub fn new(dim: usize, stream: impl FnMut() -> Result<RationalBox> + Send + 'static) -> Self {
        assert!(dim >= 1, "points need at least one coordinate");
        PointName { dim, stream: Box::new(stream) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Pulls the next approximation box.
    pub fn pull(&mut self) -> Result<RationalBox> {
        let b = (self.stream)()?;
        assert_eq!(b.dim(), self.dim, "stream emitted a box of the wrong dimension");
        Ok(b)
    }

    /// Pulls until a box with squared diameter `< 4^-k` appears and returns
    /// it.
    pub fn approx(&mut self, k: DyadicExp) -> Result<RationalBox> {
        loop {
            let b = self.pull()?;
            if b.diam_sq() < k.scale_sq() {
                return Ok(b);
            }
        }
    }
}

/// The canonical name of a rational point: per depth `d = 0, 1, 2, …` it
/// emits the width-2 dyadic windows containing the point, in lexicographic
/// order.
pub fn point_from_rational(q: &RationalPoint) -> PointName {
    let q = q.clone();
    let mut depth = 0u32;
    let mut pending: VecDeque<RationalBox> = VecDeque::new();
    PointName::new(q.dim(), move || {
        if pending.is_empty() {
            pending.extend(windows_containing(&q, depth));
            depth += 1;
        }
        Ok(pending.pop_front().expect("windows_containing is never empty"))
    })
}

/// A finite cover of a compact set by rational boxes.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cover {
    boxes: Vec<RationalBox>,
}

impl Cover {
    /// Validates nonemptiness and equal dimensions.
    pub fn new(boxes: Vec<RationalBox>) -> Result<Self> {
        if boxes.is_empty() {
            return Err(Error::invalid("cover", "must contain at least one box"));
        }
        let d = boxes[0].dim();
        if boxes.iter().any(|b| b.dim() != d) {
            return Err(Error::invalid("cover", "boxes must share one dimension"));
        }
        Ok(Cover { boxes })
    }

    pub fn dim(&self) -> usize {
        self.boxes[0].dim()
    }

    pub fn boxes(&self) -> &[RationalBox] {
        &self.boxes
    }

    /// Exact maximum of the squared box diameters.
    pub fn max_diam_sq(&self) -> Rational {
        self.boxes.iter().map(RationalBox::diam_sq).max().expect("cover is nonempty")
    }

    /// Exact decision of `max_i diam(box_i) < 2^-k`.
    pub fn all_diam_lt(&self, k: DyadicExp) -> bool {
        self.max_diam_sq() < k.scale_sq()
    }
}

/// A stream name of a compact set: minimal covers, eventually arbitrarily
/// fine.  Catalog-backed names carry their oracle so downstream searches can
/// decide set predicates exactly instead of replaying cover prefixes.
pub struct CompactName {
    dim: usize,
    oracle: Option<TestContinuum>,
    stream: Box<dyn FnMut() -> Result<Cover> + Send>,
}

impl std::fmt::Debug for CompactName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CompactName")
            .field("dim", &self.dim)
            .field("oracle", &self.oracle.is_some())
            .finish_non_exhaustive()
    }
}

impl CompactName {
    pub fn new(dim: usize, stream: impl FnMut() -> Result<Cover> + Send + 'static) -> Self {
        assert!(dim >= 1, "sets need at least one coordinate");
        CompactName { dim, oracle: None, stream: Box::new(stream) }
    }

    /// Attaches the test continuum the stream was built from.
    pub fn with_oracle(mut self, oracle: TestContinuum) -> Self {
        assert_eq!(oracle.dim(), self.dim, "oracle dimension mismatch");
        self.oracle = Some(oracle);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn oracle(&self) -> Option<&TestContinuum> {
        self.oracle.as_ref()
    }

    /// Pulls the next minimal cover.
    pub fn next_cover(&mut self) -> Result<Cover> {
        let c = (self.stream)()?;
        assert_eq!(c.dim(), self.dim, "stream emitted a cover of the wrong dimension");
        Ok(c)
    }

    /// Pulls until a cover with all box diameters `< 2^-k` appears.
    pub fn cover_finer_than(&mut self, k: DyadicExp) -> Result<Cover> {
        loop {
            let c = self.next_cover()?;
            if c.all_diam_lt(k) {
                return Ok(c);
            }
        }
    }
}

/// A replayable view of a point name.  Names are single consumer, so
/// constructions that feed one point into several searches tee the stream:
/// pulled boxes are cached behind a lock and every handle replays the same
/// prefix from the start.
#[derive(Clone)]
pub struct SharedPoint {
    dim: usize,
    state: Arc<Mutex<(PointName, Vec<RationalBox>)>>,
}

impl SharedPoint {
    pub fn new(name: PointName) -> Self {
        let dim = name.dim();
        SharedPoint { dim, state: Arc::new(Mutex::new((name, Vec::new()))) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// A fresh handle consuming the shared stream from its beginning.
    pub fn handle(&self) -> PointName {
        let state = Arc::clone(&self.state);
        let mut cursor = 0usize;
        PointName::new(self.dim, move || {
            let mut guard = state.lock().expect("shared point stream poisoned");
            let (source, cache) = &mut *guard;
            if cursor == cache.len() {
                let b = source.pull()?;
                cache.push(b);
            }
            let b = cache[cursor].clone();
            cursor += 1;
            Ok(b)
        })
    }
}

/// A replayable view of a compact-set name; see [`SharedPoint`].  The
/// oracle, when present, is propagated to every handle.
#[derive(Clone)]
pub struct SharedCompact {
    dim: usize,
    oracle: Option<TestContinuum>,
    state: Arc<Mutex<(CompactName, Vec<Cover>)>>,
}

impl SharedCompact {
    pub fn new(name: CompactName) -> Self {
        let dim = name.dim();
        let oracle = name.oracle().cloned();
        SharedCompact { dim, oracle, state: Arc::new(Mutex::new((name, Vec::new()))) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn oracle(&self) -> Option<&TestContinuum> {
        self.oracle.as_ref()
    }

    /// A fresh handle consuming the shared stream from its beginning.
    pub fn handle(&self) -> CompactName {
        let state = Arc::clone(&self.state);
        let mut cursor = 0usize;
        let name = CompactName::new(self.dim, move || {
            let mut guard = state.lock().expect("shared compact stream poisoned");
            let (source, cache) = &mut *guard;
            if cursor == cache.len() {
                let c = source.next_cover()?;
                cache.push(c);
            }
            let c = cache[cursor].clone();
            cursor += 1;
            Ok(c)
        });
        match &self.oracle {
            Some(o) => name.with_oracle(o.clone()),
            None => name,
        }
    }
}

/// A piecewise-linear curve `[0, 1] → ℝⁿ` with rational breakpoints
/// `0 = t₀ < … < t_k = 1` and rational vertices.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolygonalCurve {
    breakpoints: Vec<Rational>,
    vertices: Vec<RationalPoint>,
}

impl PolygonalCurve {
    pub fn new(breakpoints: Vec<Rational>, vertices: Vec<RationalPoint>) -> Result<Self> {
        if breakpoints.len() != vertices.len() {
            return Err(Error::invalid("curve", "breakpoint and vertex counts differ"));
        }
        if breakpoints.len() < 2 {
            return Err(Error::invalid("curve", "need at least two breakpoints"));
        }
        if breakpoints[0] != Rational::zero() {
            return Err(Error::invalid("curve", "first breakpoint must be 0"));
        }
        if *breakpoints.last().expect("nonempty") != Rational::one() {
            return Err(Error::invalid("curve", "last breakpoint must be 1"));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("curve", "breakpoints must strictly increase"));
        }
        let d = vertices[0].dim();
        if vertices.iter().any(|v| v.dim() != d) {
            return Err(Error::invalid("curve", "vertices must share one dimension"));
        }
        Ok(PolygonalCurve { breakpoints, vertices })
    }

    /// The segment from `a` to `b` parametrized over `[0, 1]`.
    pub fn segment(a: RationalPoint, b: RationalPoint) -> Self {
        Self::new(vec![Rational::zero(), Rational::one()], vec![a, b])
            .expect("two-point curve is valid")
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].dim()
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn vertices(&self) -> &[RationalPoint] {
        &self.vertices
    }

    /// Exact evaluation: on `[t_j, t_{j+1}]` the value is
    /// `q_j + (t − t_j)/(t_{j+1} − t_j) · (q_{j+1} − q_j)`.
    pub fn eval(&self, t: &Rational) -> Result<RationalPoint> {
        if t < &Rational::zero() || t > &Rational::one() {
            return Err(Error::invalid("parameter", format!("{t} outside [0, 1]")));
        }
        let j = match self.breakpoints.iter().rposition(|b| b <= t) {
            Some(j) if j + 1 == self.breakpoints.len() => j - 1,
            Some(j) => j,
            None => unreachable!("breakpoints start at 0 ≤ t"),
        };
        let (t0, t1) = (&self.breakpoints[j], &self.breakpoints[j + 1]);
        let lambda = (t - t0) / (t1 - t0);
        let (q0, q1) = (&self.vertices[j], &self.vertices[j + 1]);
        Ok(RationalPoint::new(
            (0..self.dim())
                .map(|i| q0.coord(i) + &lambda * (q1.coord(i) - q0.coord(i)))
                .collect(),
        ))
    }

    /// Exact squared distance from `p` to the curve's image.
    pub fn image_dist_sq(&self, p: &RationalPoint) -> Rational {
        self.vertices
            .windows(2)
            .map(|w| point_segment_dist_sq(p, &w[0], &w[1]))
            .min()
            .expect("curve has at least one segment")
    }

    /// Exact maximum squared slope over the segments:
    /// `max_j |q_{j+1} − q_j|² / (t_{j+1} − t_j)²`.
    pub fn max_slope_sq(&self) -> Rational {
        (0..self.vertices.len() - 1)
            .map(|j| {
                let num = dist_sq(&self.vertices[j], &self.vertices[j + 1]);
                let dt = &self.breakpoints[j + 1] - &self.breakpoints[j];
                num / (&dt * &dt)
            })
            .max()
            .expect("curve has at least one segment")
    }

    /// Exact squared diameter of the image, attained at a vertex pair.
    pub fn image_diam_sq(&self) -> Rational {
        let mut best = Rational::zero();
        for i in 0..self.vertices.len() {
            for j in i + 1..self.vertices.len() {
                let d = dist_sq(&self.vertices[i], &self.vertices[j]);
                if d > best {
                    best = d;
                }
            }
        }
        best
    }
}

/// Exact squared uniform distance `max_t d(F(t), G(t))²`.
///
/// On each interval between consecutive points of the merged breakpoint set
/// both curves are affine, so the squared distance is a convex quadratic and
/// the maximum is attained at a merged breakpoint.
pub fn poly_dmax_sq(f: &PolygonalCurve, g: &PolygonalCurve) -> Rational {
    assert_eq!(f.dim(), g.dim(), "dimension mismatch");
    let mut ts: Vec<Rational> = f.breakpoints().iter().chain(g.breakpoints()).cloned().collect();
    ts.sort();
    ts.dedup();
    ts.iter()
        .map(|t| {
            let p = f.eval(t).expect("merged breakpoints lie in [0, 1]");
            let q = g.eval(t).expect("merged breakpoints lie in [0, 1]");
            dist_sq(&p, &q)
        })
        .max()
        .expect("breakpoint set is nonempty")
}

/// Certifies that the images of `f` and `g` are within Hausdorff distance
/// `< eps`.  Sound and conservative: each curve is sampled at spacing
/// `≤ eps/8` along its segments and every sample is required to lie within
/// `15/16 · eps` of the other image, which bounds the true suprema by `eps`.
/// `false` means "not certified", not a refutation.
pub fn polyline_hausdorff_lt(f: &PolygonalCurve, g: &PolygonalCurve, eps: &Rational) -> bool {
    assert_eq!(f.dim(), g.dim(), "dimension mismatch");
    assert!(eps.is_positive(), "threshold must be positive");
    let threshold = eps * crate::geometry::rat(15, 16);
    let threshold_sq = &threshold * &threshold;
    let step = eps / crate::geometry::rat_int(8);
    let one_sided = |a: &PolygonalCurve, b: &PolygonalCurve| -> bool {
        for w in a.vertices().windows(2) {
            let len_ub = dyadic_sqrt_ub(&dist_sq(&w[0], &w[1]), 16);
            let pieces = rational_ceil(&(len_ub / &step)).max(BigInt::one());
            let pieces_r = Rational::from_integer(pieces.clone());
            let mut i = BigInt::zero();
            while i <= pieces {
                let lambda = Rational::new(i.clone(), BigInt::one()) / &pieces_r;
                let sample = RationalPoint::new(
                    (0..a.dim())
                        .map(|c| w[0].coord(c) + &lambda * (w[1].coord(c) - w[0].coord(c)))
                        .collect(),
                );
                if b.image_dist_sq(&sample) >= threshold_sq {
                    return false;
                }
                i += 1;
            }
        }
        true
    };
    one_sided(f, g) && one_sided(g, f)
}

/// A stream name of a continuous `h : [0, 1] → ℝⁿ`: polygonal curves
/// `F₀, F₁, …` with `d_max(F_t, F_s) ≤ 2^-t` for `s ≥ t`.  The pulled prefix
/// is cached so approximants can be addressed by index.
pub struct FunctionName {
    dim: usize,
    stream: Box<dyn FnMut() -> Result<PolygonalCurve> + Send>,
    pulled: Vec<PolygonalCurve>,
}

impl std::fmt::Debug for FunctionName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FunctionName")
            .field("dim", &self.dim)
            .field("pulled", &self.pulled.len())
            .finish_non_exhaustive()
    }
}

impl FunctionName {
    pub fn new(dim: usize, stream: impl FnMut() -> Result<PolygonalCurve> + Send + 'static) -> Self {
        assert!(dim >= 1, "curves need at least one coordinate");
        FunctionName { dim, stream: Box::new(stream), pulled: Vec::new() }
    }

    /// The name all of whose approximants equal `f` (names `f` itself).
    pub fn constant_stream(f: PolygonalCurve) -> Self {
        let dim = f.dim();
        Self::new(dim, move || Ok(f.clone()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Returns `F_j`, pulling and caching as needed.
    pub fn approximant(&mut self, j: usize) -> Result<&PolygonalCurve> {
        while self.pulled.len() <= j {
            let f = (self.stream)()?;
            assert_eq!(f.dim(), self.dim, "stream emitted a curve of the wrong dimension");
            self.pulled.push(f);
        }
        Ok(&self.pulled[j])
    }

    /// Exactly checks the Cauchy condition `poly_dmax_sq(F_t, F_s) ≤ 4^-t`
    /// for all `t ≤ s ≤ upto` on the pulled prefix.
    pub fn check_cauchy_prefix(&mut self, upto: usize) -> Result<bool> {
        self.approximant(upto)?;
        for t in 0..=upto {
            for s in t..=upto {
                if poly_dmax_sq(&self.pulled[t], &self.pulled[s]) > crate::geometry::pow4_neg(t as u32)
                {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Smallest `p` with `n < 4^p`: the dyadic padding order needed so a cube of
/// ℓ∞ radius `2^-(k+p)` has Euclidean diameter `< 2^-k` in dimension `n`.
pub fn pad_order(n: usize) -> u32 {
    let mut p = 0u32;
    while BigInt::from(n) >= (BigInt::one() << (2 * p)) {
        p += 1;
    }
    p
}

/// Evaluates a named function at a named parameter to precision `2^-k`:
/// returns a rational box of diameter `< 2^-k` containing `h(t)`.
///
/// With `p = pad_order(n)`, pulls `F_j` for `j = k + p + 3` (so the uniform
/// error is `≤ 2^-(k+p+3)`), narrows the parameter until `F_j` varies less
/// than `2^-(k+p+3)` over the parameter box (exact slope bound), and pads the
/// value at the box center by `2^-(k+p+1)` per coordinate.  The two error
/// terms sum below the padding, and the padded cube has diameter
/// `√n · 2^-(k+p) < 2^-k`.
pub fn func_eval(h: &mut FunctionName, t: &mut PointName, k: DyadicExp) -> Result<RationalBox> {
    assert_eq!(t.dim(), 1, "parameter names must be one-dimensional");
    let p = pad_order(h.dim());
    let j = k.0 + p + 3;
    let var_bound = pow2_neg(k.0 + p + 3);
    let pad = pow2_neg(k.0 + p + 1);
    let slope_ub = {
        let fj = h.approximant(j as usize)?;
        dyadic_sqrt_ub(&fj.max_slope_sq(), j + 8)
    };
    // Narrow t until the curve provably varies below var_bound over the box.
    let mut depth = DyadicExp(0);
    let (lo, hi) = loop {
        let b = t.approx(depth)?;
        let lo = b.lo()[0].clone().max(Rational::zero());
        let hi = b.hi()[0].clone().min(Rational::one());
        if lo > hi {
            return Err(Error::invalid("parameter name", "box disjoint from [0, 1]"));
        }
        if &slope_ub * (&hi - &lo) < var_bound {
            break (lo, hi);
        }
        depth = DyadicExp(depth.0 + 1);
    };
    let center = (&lo + &hi) * crate::geometry::rat(1, 2);
    let value = h.approximant(j as usize)?.eval(&center)?;
    RationalBox::new(
        value.coords().iter().map(|c| c - &pad).collect(),
        value.coords().iter().map(|c| c + &pad).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rat, rat_int};

    fn pt2(x: (i64, i64), y: (i64, i64)) -> RationalPoint {
        RationalPoint::from_fracs(&[x, y])
    }

    #[test]
    fn point_stream_contains_point() {
        for q in [pt2((1, 3), (1, 3)), pt2((0, 1), (0, 1)), pt2((-7, 4), (22, 7))] {
            let mut name = point_from_rational(&q);
            for _ in 0..40 {
                let b = name.pull().unwrap();
                assert!(b.contains_point(&q), "{b:?} misses {q:?}");
            }
        }
    }

    #[test]
    fn point_stream_deterministic() {
        let q = pt2((1, 3), (2, 5));
        let mut a = point_from_rational(&q);
        let mut b = point_from_rational(&q);
        for _ in 0..30 {
            assert_eq!(a.pull().unwrap(), b.pull().unwrap());
        }
    }

    #[test]
    fn point_fairness_schedule_frozen() {
        // Origin sits on every grid line, so each depth contributes exactly
        // one window; the first box with diam < 2^-5 is the depth-7 window,
        // the 8th pull.  Frozen as a regression constant.
        let mut name = point_from_rational(&pt2((0, 1), (0, 1)));
        let target = DyadicExp(5).scale_sq();
        let mut pulls = 0u32;
        loop {
            let b = name.pull().unwrap();
            pulls += 1;
            if b.diam_sq() < target {
                break;
            }
        }
        assert_eq!(pulls, 8);
    }

    #[test]
    fn point_approx_contract() {
        let q = pt2((1, 2), (0, 1));
        let mut name = point_from_rational(&q);
        let mut previous: Vec<RationalBox> = Vec::new();
        for k in 0..8u32 {
            let b = name.approx(DyadicExp(k)).unwrap();
            assert!(b.contains_point(&q));
            assert!(b.diam_sq() < DyadicExp(k).scale_sq());
            // All approximations contain the point, hence pairwise overlap.
            for older in &previous {
                assert!(older.meets_box(&b));
            }
            previous.push(b);
        }
    }

    #[test]
    fn cover_validation() {
        assert!(Cover::new(vec![]).is_err());
        let b2 = RationalBox::from_fracs(&[(0, 1), (0, 1)], &[(1, 1), (1, 1)]);
        let b1 = RationalBox::from_fracs(&[(0, 1)], &[(1, 1)]);
        assert!(Cover::new(vec![b2.clone(), b1]).is_err());
        let c = Cover::new(vec![b2]).unwrap();
        assert_eq!(c.max_diam_sq(), rat_int(2));
        assert!(c.all_diam_lt(DyadicExp(0)) == false);
    }

    #[test]
    fn poly_eval_examples() {
        let f = PolygonalCurve::segment(pt2((0, 1), (0, 1)), pt2((1, 1), (0, 1)));
        assert_eq!(f.eval(&rat(1, 2)).unwrap(), pt2((1, 2), (0, 1)));
        assert_eq!(f.eval(&rat_int(0)).unwrap(), pt2((0, 1), (0, 1)));
        assert_eq!(f.eval(&rat_int(1)).unwrap(), pt2((1, 1), (0, 1)));
        let g = PolygonalCurve::new(
            vec![rat_int(0), rat(1, 2), rat_int(1)],
            vec![pt2((0, 1), (0, 1)), pt2((1, 1), (0, 1)), pt2((1, 1), (1, 1))],
        )
        .unwrap();
        assert_eq!(g.eval(&rat(3, 4)).unwrap(), pt2((1, 1), (1, 2)));
        assert!(f.eval(&rat(3, 2)).is_err());
        assert!(f.eval(&rat(-1, 2)).is_err());
    }

    #[test]
    fn curve_validation() {
        let a = pt2((0, 1), (0, 1));
        let b = pt2((1, 1), (0, 1));
        assert!(PolygonalCurve::new(vec![rat_int(0)], vec![a.clone()]).is_err());
        assert!(
            PolygonalCurve::new(vec![rat_int(0), rat(1, 2)], vec![a.clone(), b.clone()]).is_err()
        );
        assert!(PolygonalCurve::new(
            vec![rat_int(0), rat(1, 2), rat(1, 2), rat_int(1)],
            vec![a.clone(), b.clone(), a.clone(), b.clone()]
        )
        .is_err());
    }

    #[test]
    fn dmax_examples() {
        let f = PolygonalCurve::segment(pt2((0, 1), (0, 1)), pt2((1, 1), (0, 1)));
        assert_eq!(poly_dmax_sq(&f, &f), rat_int(0));
        let shifted = PolygonalCurve::segment(pt2((0, 1), (1, 1)), pt2((1, 1), (1, 1)));
        assert_eq!(poly_dmax_sq(&f, &shifted), rat_int(1));
        let g = PolygonalCurve::new(
            vec![rat_int(0), rat(1, 2), rat_int(1)],
            vec![pt2((0, 1), (0, 1)), pt2((1, 1), (0, 1)), pt2((1, 1), (1, 1))],
        )
        .unwrap();
        // Attained at t = 1: d((1,0),(1,1)) = 1.
        assert_eq!(poly_dmax_sq(&f, &g), rat_int(1));
    }

    #[test]
    fn slope_and_image_helpers() {
        let g = PolygonalCurve::new(
            vec![rat_int(0), rat(1, 2), rat_int(1)],
            vec![pt2((0, 1), (0, 1)), pt2((1, 1), (0, 1)), pt2((1, 1), (1, 1))],
        )
        .unwrap();
        assert_eq!(g.max_slope_sq(), rat_int(4));
        assert_eq!(g.image_dist_sq(&pt2((1, 2), (1, 2))), rat(1, 4));
        assert_eq!(g.image_dist_sq(&pt2((1, 1), (1, 1))), rat_int(0));
        assert_eq!(g.image_diam_sq(), rat_int(2));
    }

    #[test]
    fn hausdorff_certificate() {
        let f = PolygonalCurve::segment(pt2((0, 1), (0, 1)), pt2((1, 1), (0, 1)));
        let g = PolygonalCurve::segment(pt2((0, 1), (1, 100)), pt2((1, 1), (1, 100)));
        assert!(polyline_hausdorff_lt(&f, &f, &rat(1, 64)));
        assert!(polyline_hausdorff_lt(&f, &g, &rat(1, 8)));
        assert!(polyline_hausdorff_lt(&f, &g, &rat(1, 64)));
        // True distance 1/100 exceeds 1/128: must not certify.
        assert!(!polyline_hausdorff_lt(&f, &g, &rat(1, 128)));
    }

    #[test]
    fn function_name_cauchy() {
        // F_j = segment curve perturbed upward by 2^-(j+1): a valid fast
        // Cauchy sequence since |F_t - F_s| = 2^-(t+1) - 2^-(s+1) < 2^-t.
        let mut level = 0u32;
        let mut h = FunctionName::new(2, move || {
            let y = pow2_neg(level + 1);
            level += 1;
            Ok(PolygonalCurve::segment(
                RationalPoint::new(vec![rat_int(0), y.clone()]),
                RationalPoint::new(vec![rat_int(1), y]),
            ))
        });
        assert!(h.check_cauchy_prefix(5).unwrap());
        // A jump of size 1 between F_2 and F_3 violates the condition.
        let mut level = 0u32;
        let mut bad = FunctionName::new(2, move || {
            let y = if level >= 3 { rat_int(1) } else { rat_int(0) };
            level += 1;
            Ok(PolygonalCurve::segment(
                RationalPoint::new(vec![rat_int(0), y.clone()]),
                RationalPoint::new(vec![rat_int(1), y]),
            ))
        });
        assert!(!bad.check_cauchy_prefix(5).unwrap());
    }

    #[test]
    fn pad_orders() {
        assert_eq!(pad_order(1), 1);
        assert_eq!(pad_order(2), 1);
        assert_eq!(pad_order(3), 1);
        assert_eq!(pad_order(4), 2);
    }

    #[test]
    fn func_eval_contract() {
        let diag = PolygonalCurve::segment(pt2((0, 1), (0, 1)), pt2((1, 1), (0, 1)));
        let mut h = FunctionName::constant_stream(diag);
        let target = pt2((1, 2), (0, 1));
        for k in [0u32, 2, 4, 6] {
            let mut t = point_from_rational(&RationalPoint::from_fracs(&[(1, 2)]));
            let b = func_eval(&mut h, &mut t, DyadicExp(k)).unwrap();
            assert!(b.contains_point(&target), "k={k}");
            assert!(b.diam_sq() < DyadicExp(k).scale_sq(), "k={k}");
        }
        // Endpoint evaluation hits the first vertex.
        let mut t0 = point_from_rational(&RationalPoint::from_fracs(&[(0, 1)]));
        let b = func_eval(&mut h, &mut t0, DyadicExp(3)).unwrap();
        assert!(b.contains_point(&pt2((0, 1), (0, 1))));
        // Constant curve: zero slope, coarse parameter boxes suffice.
        let constant = PolygonalCurve::segment(pt2((2, 1), (3, 1)), pt2((2, 1), (3, 1)));
        let mut hc = FunctionName::constant_stream(constant);
        let mut t = point_from_rational(&RationalPoint::from_fracs(&[(1, 3)]));
        let b = func_eval(&mut hc, &mut t, DyadicExp(5)).unwrap();
        assert!(b.contains_point(&pt2((2, 1), (3, 1))));
    }
}
