//! Conversions among local connectivity data.
//!
//! An LC function bounds how far one must look so that nearby points of a
//! continuum connect within a small neighborhood; a ULAC function `g`
//! strengthens this to arcs: points within `2^-g(k)` are joined by an arc of
//! diameter below `2^-k`.  This module converts between the two roles (via
//! the Lebesgue number lemma in one direction, by retagging in the other)
//! and builds the strong witnesses on top: `sulac_arc` produces a named arc
//! between close points inside a freshly constructed region `R₀`, and
//! `ac_arc` does the same inside a caller-supplied open region.  Both
//! delegate the actual parametrization to the chain-tower machinery.

use std::sync::{Arc, Mutex};

use num_traits::One;

use crate::arcs::{
    assemble_witnessing, build_tower, cells_containing_box, probe_boxes, tower_to_name,
    walk_beads, walk_schedule, BeadSpace, Cell,
};
use crate::catalog::{LcFunction, Provenance};
use crate::chains::{Budget, CoverIndex};
use crate::error::{Error, Result};
use crate::geometry::{
    box_gap_sq, closure_dilation_in_box, locate_point, pow2_neg, pow4_neg, rat_int,
    region_closure_in_union, DilatedRegion, DyadicExp, PointLocation, Rational, RationalBox,
};
use crate::lebesgue::lebesgue_number_indexed;
use crate::memo::{monotonized, MemoFn};
use crate::names::{CompactName, FunctionName, PointName, SharedCompact, SharedPoint};

/// A uniform local arcwise connectivity function `k ↦ g(k)`: distinct set
/// points within `2^-g(k)` are joined inside the set by an arc of diameter
/// below `2^-k`.
pub struct UlacFunction {
    g: MemoFn,
    provenance: Provenance,
}

impl UlacFunction {
    pub fn identity() -> Self {
        UlacFunction { g: MemoFn::identity(), provenance: Provenance::Analytic }
    }

    /// Wraps an explicit closed form, trusted by the caller.
    pub fn from_formula(g: impl Fn(u32) -> u32 + Send + 'static) -> Self {
        UlacFunction { g: MemoFn::from_formula(g), provenance: Provenance::Analytic }
    }

    /// Pins an initial segment from a table, extended by `+1` per step.
    pub fn from_table(table: Vec<u32>, provenance: Provenance) -> Self {
        UlacFunction { g: MemoFn::from_table(table), provenance }
    }

    /// Rewraps with a caller-supplied memo rule.
    pub fn from_rule(
        rule: impl FnMut(u32) -> Result<u32> + Send + 'static,
        provenance: Provenance,
    ) -> Self {
        UlacFunction { g: MemoFn::new(rule), provenance }
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn eval(&mut self, k: u32) -> Result<u32> {
        self.g.eval(k)
    }

    /// Consumes and rewraps as `k ↦ max(g(0), …, g(k), k)`; pointwise
    /// increase preserves ULAC validity.
    pub fn monotonized(self) -> Self {
        UlacFunction { g: monotonized(self.g), provenance: self.provenance }
    }
}

/// The dimensional constants of the strong witness construction.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SulacConstants {
    pub n: usize,
    pub n1: u32,
    pub n0: u32,
}

/// The minimal `N1` with `n · (2^-N1)² < 1`, and `N0 = N1 + 3`.
pub fn sulac_constants(n: usize) -> SulacConstants {
    assert!(n >= 1, "dimension must be positive");
    let nr = rat_int(n as i64);
    let mut n1 = 0u32;
    while &nr * pow4_neg(n1) >= Rational::one() {
        n1 += 1;
    }
    SulacConstants { n, n1, n0: n1 + 3 }
}

/// A nonempty open region of ℝⁿ, represented as a finite union of open
/// rational boxes.
#[derive(Clone, Debug)]
pub struct OpenRegion {
    boxes: Vec<RationalBox>,
}

impl OpenRegion {
    pub fn new(boxes: Vec<RationalBox>) -> Result<Self> {
        if boxes.is_empty() {
            return Err(Error::invalid("open region", "needs at least one box"));
        }
        let dim = boxes[0].dim();
        if boxes.iter().any(|b| b.dim() != dim) {
            return Err(Error::invalid("open region", "boxes must share a dimension"));
        }
        Ok(OpenRegion { boxes })
    }

    pub fn boxes(&self) -> &[RationalBox] {
        &self.boxes
    }

    pub fn dim(&self) -> usize {
        self.boxes[0].dim()
    }
}

/// One value of a ULAC function derived from an LC function, on a shared
/// cover index: pulls a minimal cover with all diameters below `2^-f(k+1)`
/// and returns its Lebesgue number `L`.  Points within `2^-L` then share a
/// cover box, whose small diameter puts them in one local component and
/// hence on one arc of diameter below `2^-k`.
pub fn ulac_from_lc_indexed(
    x: &mut CoverIndex,
    f: &mut LcFunction,
    k: u32,
    b: &mut Budget,
) -> Result<u32> {
    let bound = DyadicExp(f.eval(k + 1)?);
    let mut t = 0usize;
    let cover = loop {
        let c = x.cover(t, b)?;
        if c.all_diam_lt(bound) {
            break c.clone();
        }
        t += 1;
    };
    lebesgue_number_indexed(x, &cover, b)
}

/// See [`ulac_from_lc_indexed`]; this wrapper owns the set name.
pub fn ulac_from_lc(x: CompactName, mut f: LcFunction, k: u32, b: Budget) -> Result<u32> {
    let mut index = CoverIndex::new(x);
    let mut budget = b;
    ulac_from_lc_indexed(&mut index, &mut f, k, &mut budget)
}

/// A memoized ULAC function backed by [`ulac_from_lc_indexed`] over one set
/// name and budget.
pub fn ulac_function(x: CompactName, f: LcFunction, b: Budget) -> UlacFunction {
    let provenance = f.provenance();
    let state = Arc::new(Mutex::new((CoverIndex::new(x), f, b)));
    UlacFunction::from_rule(
        move |k| {
            let mut s = state.lock().expect("ulac state poisoned");
            let (index, f, b) = &mut *s;
            ulac_from_lc_indexed(index, f, k, b)
        },
        provenance,
    )
}

/// Every ULAC function is an LC function: retags the same values.
pub fn lc_from_ulac(g: UlacFunction) -> LcFunction {
    let provenance = g.provenance();
    let mut g = g;
    LcFunction::from_rule(move |k| g.eval(k), provenance)
}

/// The region `R₀` around two endpoint windows: per coordinate, faces sit
/// `2^-(k+N0) + 2^-(k+N0+2)` beyond the windows' extremes, so each window
/// keeps margin `≥ 2^-(k+N0)` from every face while the true points keep
/// margin below `2^-(k+N0-1)`.
fn assemble_r0(xb: &RationalBox, yb: &RationalBox, k: u32, n0: u32) -> RationalBox {
    let margin = pow2_neg(k + n0) + pow2_neg(k + n0 + 2);
    let n = xb.dim();
    let lo: Vec<Rational> = (0..n)
        .map(|a| xb.lo()[a].clone().min(yb.lo()[a].clone()) - &margin)
        .collect();
    let hi: Vec<Rational> = (0..n)
        .map(|a| xb.hi()[a].clone().max(yb.hi()[a].clone()) + &margin)
        .collect();
    RationalBox::new(lo, hi).expect("margins keep the region nonempty")
}

/// A witnessing chain from `x` to `y` through the set, each bead's region
/// confined by `confine`, with endpoint windows certified inside the
/// terminal regions.  Bumps the dilation exponent from `m0` until the
/// search succeeds.
fn omega_chain(
    covers: &mut CoverIndex,
    oracle: Option<crate::catalog::TestContinuum>,
    f: &mut LcFunction,
    x: &SharedPoint,
    y: &SharedPoint,
    m0: u32,
    confine: impl Fn(&DilatedRegion) -> bool,
    b: &mut Budget,
) -> Result<crate::chains::WitnessingChain> {
    let dim = covers.dim();
    let mut m = m0;
    loop {
        b.charge("witnessing search")?;
        let (d, _, _) = walk_schedule(f, m, dim)?;
        let probe = match &oracle {
            Some(_) => Vec::new(),
            None => probe_boxes(covers, d, b)?,
        };
        let mut space = BeadSpace::new(dim, d, oracle.clone(), probe);
        let radius = DyadicExp(m);
        let xw = x.handle().approx(DyadicExp(d + 2))?;
        let yw = y.handle().approx(DyadicExp(d + 2))?;
        let starts = cells_containing_box(&xw, d);
        let targets: std::collections::HashSet<Cell> =
            cells_containing_box(&yw, d).into_iter().collect();
        let walk = walk_beads(
            &mut space,
            &starts,
            |c| targets.contains(c),
            |w| confine(&DilatedRegion::new(w.clone(), radius)),
            None,
            b,
        )?;
        let walk = match walk {
            Some(w) => w,
            None => {
                m += 1;
                continue;
            }
        };
        let chain = assemble_witnessing(&walk, &space, radius)?;
        // Endpoint certificates: the approximation windows locate strictly
        // inside the terminal regions.
        let first = DilatedRegion::new(chain.box_at(0).clone(), radius);
        let last = DilatedRegion::new(chain.box_at(chain.len() - 1).clone(), radius);
        if locate_point(&xw, &first) != PointLocation::Inside
            || locate_point(&yw, &last) != PointLocation::Inside
        {
            m += 1;
            continue;
        }
        return Ok(chain);
    }
}

/// The strong witness arc: for `x, y` with `d(x, y) < 2^-f(k)` where
/// `f(k) = g(k + N0)`, a named parametrization of an arc from `x` to `y` of
/// diameter below `2^-k`.
///
/// The search is optimistic: it refines the endpoint names until the
/// assembled region `R₀` has diameter below `2^-k`, reports the
/// distinguished separation error only when the names prove
/// `d(x, y) ≥ 2^-f(k)`, and otherwise keeps refining.  The witnessing chain
/// is confined to `R₀`, so every tower level and the resulting arc stay
/// inside it.
pub fn sulac_arc(
    x_set: CompactName,
    g: UlacFunction,
    k: u32,
    x: PointName,
    y: PointName,
    b: Budget,
) -> Result<FunctionName> {
    let dim = x_set.dim();
    if x.dim() != dim || y.dim() != dim {
        return Err(Error::invalid("sulac arc", "points must match the set dimension"));
    }
    let consts = sulac_constants(dim);
    let n0 = consts.n0;
    let g = Arc::new(Mutex::new(g.monotonized()));
    let mut f = {
        let gg = Arc::clone(&g);
        LcFunction::from_rule(
            move |k2| gg.lock().expect("ulac lock poisoned").eval(k2 + n0),
            Provenance::Analytic,
        )
    };
    let shared = SharedCompact::new(x_set);
    let oracle = shared.handle().oracle().cloned();
    let xs = SharedPoint::new(x);
    let ys = SharedPoint::new(y);
    let mut budget = b;
    let threshold = f.eval(k)?;
    // Refine until R₀ is small enough, erroring only on proven separation.
    let mut prec = k + n0 + 2;
    let r0 = loop {
        budget.charge("region search")?;
        let xb = xs.handle().approx(DyadicExp(prec))?;
        let yb = ys.handle().approx(DyadicExp(prec))?;
        let r0 = assemble_r0(&xb, &yb, k, n0);
        if r0.diam_sq() < DyadicExp(k).scale_sq() {
            break r0;
        }
        if box_gap_sq(&xb, &yb) >= pow4_neg(threshold) {
            return Err(Error::SeparatedPoints { threshold });
        }
        prec += 1;
    };
    let mut covers = CoverIndex::new(shared.handle());
    let omega = omega_chain(
        &mut covers,
        oracle,
        &mut f,
        &xs,
        &ys,
        k + n0 + 2,
        |v| closure_dilation_in_box(v, &r0),
        &mut budget,
    )?;
    let tower = build_tower(
        shared.handle(),
        f,
        omega,
        xs.handle(),
        ys.handle(),
        Budget::new(budget.remaining()),
    )?;
    Ok(tower_to_name(tower))
}

/// The arcwise connectivity operator: a named arc from `x` to `y` inside
/// `U ∩ X`, for endpoints in one connected component of `U ∩ X`.  The
/// witnessing chain's region closures are certified inside the box union of
/// `U`, and the tower refines through it.
pub fn ac_arc(
    x_set: CompactName,
    f: LcFunction,
    u: OpenRegion,
    x: PointName,
    y: PointName,
    b: Budget,
) -> Result<FunctionName> {
    let dim = x_set.dim();
    if u.dim() != dim || x.dim() != dim || y.dim() != dim {
        return Err(Error::invalid("ac arc", "region and points must match the set"));
    }
    let shared = SharedCompact::new(x_set);
    let oracle = shared.handle().oracle().cloned();
    let xs = SharedPoint::new(x);
    let ys = SharedPoint::new(y);
    let mut budget = b;
    let mut f = f.monotonized();
    let mut covers = CoverIndex::new(shared.handle());
    let omega = omega_chain(
        &mut covers,
        oracle,
        &mut f,
        &xs,
        &ys,
        1,
        |v| region_closure_in_union(v, u.boxes()),
        &mut budget,
    )?;
    let tower = build_tower(
        shared.handle(),
        f,
        omega,
        xs.handle(),
        ys.handle(),
        Budget::new(budget.remaining()),
    )?;
    Ok(tower_to_name(tower))
}

/// A SULAC witness: the ULAC function `g` together with the arc builder
/// over one shared set name.
pub struct SulacWitness {
    set: SharedCompact,
    g: Arc<Mutex<UlacFunction>>,
}

impl SulacWitness {
    pub fn new(x_set: CompactName, g: UlacFunction) -> Self {
        SulacWitness { set: SharedCompact::new(x_set), g: Arc::new(Mutex::new(g)) }
    }

    /// One value of `g`.
    pub fn modulus(&self, k: u32) -> Result<u32> {
        self.g.lock().expect("ulac lock poisoned").eval(k)
    }

    /// The arc between two named points at scale `k`; see [`sulac_arc`].
    pub fn arc(&self, k: u32, x: PointName, y: PointName, b: Budget) -> Result<FunctionName> {
        let gg = Arc::clone(&self.g);
        let handle = UlacFunction::from_rule(
            move |k2| gg.lock().expect("ulac lock poisoned").eval(k2),
            self.g.lock().expect("ulac lock poisoned").provenance(),
        );
        sulac_arc(self.set.handle(), handle, k, x, y, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::fixtures::{l_polyline, segment, u_polyline};
    use crate::catalog::{compact_name, lc_check_sampled};
    use crate::geometry::{dist_sq, rat, RationalPoint};
    use crate::names::{point_from_rational, PolygonalCurve};
    use num_traits::Zero;

    fn pt2(x: (i64, i64), y: (i64, i64)) -> RationalPoint {
        RationalPoint::from_fracs(&[x, y])
    }

    #[test]
    fn monotonize_examples() {
        let mut c = LcFunction::from_table(vec![3], Provenance::Analytic).monotonized();
        let got: Vec<u32> = (0..6).map(|k| c.eval(k).unwrap()).collect();
        assert_eq!(got, vec![3, 3, 3, 3, 4, 5]);
        let mut id = UlacFunction::identity().monotonized();
        for k in 0..6 {
            assert_eq!(id.eval(k).unwrap(), k);
        }
        let mut t = UlacFunction::from_table(vec![5, 1, 7], Provenance::Analytic).monotonized();
        assert_eq!(t.eval(0).unwrap(), 5);
        assert_eq!(t.eval(1).unwrap(), 5);
        assert_eq!(t.eval(2).unwrap(), 7);
    }

    #[test]
    fn sulac_constants_examples() {
        assert_eq!(sulac_constants(1), SulacConstants { n: 1, n1: 1, n0: 4 });
        assert_eq!(sulac_constants(2), SulacConstants { n: 2, n1: 1, n0: 4 });
        assert_eq!(sulac_constants(4), SulacConstants { n: 4, n1: 2, n0: 5 });
        for n in 1..=20usize {
            let c = sulac_constants(n);
            let nr = rat_int(n as i64);
            assert!(&nr * pow4_neg(c.n1) < Rational::one());
            assert!(&nr * pow4_neg(c.n1 - 1) >= Rational::one());
            assert_eq!(c.n0, c.n1 + 3);
        }
    }

    #[test]
    fn open_region_validation() {
        assert!(OpenRegion::new(Vec::new()).is_err());
        let b1 = RationalBox::from_fracs(&[(0, 1)], &[(1, 1)]);
        let b2 = RationalBox::from_fracs(&[(0, 1), (0, 1)], &[(1, 1), (1, 1)]);
        assert!(OpenRegion::new(vec![b1.clone(), b2.clone()]).is_err());
        let u = OpenRegion::new(vec![b2]).unwrap();
        assert_eq!(u.dim(), 2);
        assert_eq!(u.boxes().len(), 1);
    }

    #[test]
    fn ulac_from_lc_on_segment() {
        for k in 1..=3u32 {
            let g = ulac_from_lc(
                compact_name(&segment()),
                LcFunction::identity(),
                k,
                Budget::new(1_000_000),
            )
            .unwrap();
            // On a segment the unique arc's diameter equals the distance,
            // so validity reduces to g(k) ≥ k.
            assert!(g >= k, "k={k} gave {g}");
        }
    }

    #[test]
    fn ulac_from_lc_on_u_polyline() {
        let shape = u_polyline();
        let f = LcFunction::derived(&shape, 6).unwrap();
        let g = ulac_from_lc(compact_name(&shape), f, 2, Budget::new(5_000_000)).unwrap();
        // Sampled pairs within 2^-g(2) are joined by tree paths of diameter
        // below 1/4.
        let samples = shape.sample_connected(5).unwrap();
        let bound = pow4_neg(g);
        let quarter_sq = rat(1, 16);
        let mut checked = 0usize;
        for (i, p) in samples.points.iter().enumerate() {
            for q in samples.points.iter().skip(i + 1) {
                if dist_sq(p, q) < bound {
                    let arc = shape.unique_arc(p, q).unwrap();
                    assert!(arc.image_diam_sq() < quarter_sq);
                    checked += 1;
                }
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn ulac_function_is_increasing_after_monotonize() {
        let mut g = ulac_function(
            compact_name(&segment()),
            LcFunction::identity(),
            Budget::new(5_000_000),
        )
        .monotonized();
        let mut prev = 0;
        for k in 0..4u32 {
            let v = g.eval(k).unwrap();
            assert!(v >= prev && v >= k);
            prev = v;
        }
    }

    #[test]
    fn lc_from_ulac_retags() {
        let mut lc = lc_from_ulac(UlacFunction::identity());
        for k in 0..6 {
            assert_eq!(lc.eval(k).unwrap(), k);
        }
        let mut t = lc_from_ulac(UlacFunction::from_table(vec![2, 4, 6], Provenance::Analytic));
        assert_eq!(t.eval(1).unwrap(), 4);
        // Retagged segment ULAC values pass the sampled LC verifier.
        let mut g = lc_from_ulac(ulac_function(
            compact_name(&segment()),
            LcFunction::identity(),
            Budget::new(5_000_000),
        ));
        let samples = segment().sample_connected(9).unwrap();
        for k in 1..=2u32 {
            let gk = g.eval(k).unwrap();
            assert!(lc_check_sampled(&samples, k, gk).unwrap());
        }
    }

    #[test]
    fn r0_margins() {
        let xb = RationalBox::from_fracs(&[(3, 8), (-1, 64)], &[(25, 64), (1, 64)]);
        let yb = RationalBox::from_fracs(&[(7, 16), (-1, 64)], &[(29, 64), (1, 64)]);
        let k = 2;
        let n0 = sulac_constants(2).n0;
        let r0 = assemble_r0(&xb, &yb, k, n0);
        assert!(r0.diam_sq() < DyadicExp(k).scale_sq());
        let margin = pow2_neg(k + n0);
        for a in 0..2 {
            for w in [&xb, &yb] {
                assert!(&w.lo()[a] - &r0.lo()[a] >= margin);
                assert!(&r0.hi()[a] - &w.hi()[a] >= margin);
            }
        }
    }

    #[test]
    fn sulac_arc_close_points_on_segment() {
        let g = ulac_function(
            compact_name(&segment()),
            LcFunction::identity(),
            Budget::new(10_000_000),
        );
        let mut h = sulac_arc(
            compact_name(&segment()),
            g,
            2,
            point_from_rational(&pt2((3, 8), (0, 1))),
            point_from_rational(&pt2((7, 16), (0, 1))),
            Budget::new(200_000_000),
        )
        .unwrap();
        assert!(h.check_cauchy_prefix(3).unwrap());
        // The true subarc is the subsegment from 3/8 to 7/16.
        let truth = PolygonalCurve::segment(pt2((3, 8), (0, 1)), pt2((7, 16), (0, 1)));
        let f3 = h.approximant(3).unwrap();
        assert!(crate::names::polyline_hausdorff_lt(f3, &truth, &rat(3, 8)));
        // Endpoints at t = 0 and t = 1.
        let f4 = h.approximant(4).unwrap().clone();
        let at0 = f4.eval(&Rational::zero()).unwrap();
        let at1 = f4.eval(&Rational::one()).unwrap();
        assert!(dist_sq(&at0, &pt2((3, 8), (0, 1))) < pow4_neg(4));
        assert!(dist_sq(&at1, &pt2((7, 16), (0, 1))) < pow4_neg(4));
    }

    #[test]
    fn sulac_arc_separated_points_error() {
        let g = ulac_function(
            compact_name(&segment()),
            LcFunction::identity(),
            Budget::new(10_000_000),
        );
        let got = sulac_arc(
            compact_name(&segment()),
            g,
            2,
            point_from_rational(&pt2((0, 1), (0, 1))),
            point_from_rational(&pt2((1, 1), (0, 1))),
            Budget::new(10_000_000),
        );
        assert!(matches!(got, Err(Error::SeparatedPoints { .. })));
    }

    #[test]
    fn ac_arc_on_segment() {
        let u = OpenRegion::new(vec![RationalBox::from_fracs(
            &[(-1, 1), (-1, 1)],
            &[(2, 1), (1, 1)],
        )])
        .unwrap();
        let mut h = ac_arc(
            compact_name(&segment()),
            LcFunction::identity(),
            u,
            point_from_rational(&pt2((0, 1), (0, 1))),
            point_from_rational(&pt2((1, 1), (0, 1))),
            Budget::new(200_000_000),
        )
        .unwrap();
        let f3 = h.approximant(3).unwrap().clone();
        let truth = segment();
        for i in 0..=8i64 {
            let p = f3.eval(&rat(i, 8)).unwrap();
            // Within 2^-3 of the limit arc, which lies on the segment.
            assert!(truth.dist_to_set_sq(&p).unwrap() < pow4_neg(2));
        }
        assert!(dist_sq(&f3.eval(&Rational::zero()).unwrap(), &pt2((0, 1), (0, 1))) < pow4_neg(3));
        assert!(dist_sq(&f3.eval(&Rational::one()).unwrap(), &pt2((1, 1), (0, 1))) < pow4_neg(3));
    }

    #[test]
    fn ac_arc_on_l_polyline() {
        let u = OpenRegion::new(vec![RationalBox::from_fracs(
            &[(-1, 1), (-1, 1)],
            &[(2, 1), (2, 1)],
        )])
        .unwrap();
        let mut h = ac_arc(
            compact_name(&l_polyline()),
            LcFunction::identity(),
            u,
            point_from_rational(&pt2((0, 1), (0, 1))),
            point_from_rational(&pt2((1, 1), (1, 1))),
            Budget::new(400_000_000),
        )
        .unwrap();
        assert!(h.check_cauchy_prefix(3).unwrap());
        let truth = PolygonalCurve::new(
            vec![Rational::zero(), rat(1, 2), Rational::one()],
            vec![pt2((0, 1), (0, 1)), pt2((1, 1), (0, 1)), pt2((1, 1), (1, 1))],
        )
        .unwrap();
        let f3 = h.approximant(3).unwrap();
        assert!(crate::names::polyline_hausdorff_lt(f3, &truth, &rat(1, 4)));
    }

    #[test]
    fn sulac_witness_builds_arcs() {
        let g = ulac_function(
            compact_name(&segment()),
            LcFunction::identity(),
            Budget::new(10_000_000),
        );
        let w = SulacWitness::new(compact_name(&segment()), g);
        assert!(w.modulus(2).unwrap() >= 2);
        let mut h = w
            .arc(
                3,
                point_from_rational(&pt2((1, 2), (0, 1))),
                point_from_rational(&pt2((17, 32), (0, 1))),
                Budget::new(200_000_000),
            )
            .unwrap();
        let f2 = h.approximant(2).unwrap().clone();
        let at0 = f2.eval(&Rational::zero()).unwrap();
        assert!(dist_sq(&at0, &pt2((1, 2), (0, 1))) < pow4_neg(2));
    }
}
