//! The computable Lebesgue number lemma.
//!
//! Given a compact set's name and a finite open cover `C`, pull minimal
//! covers off the name until one is found each of whose boxes, dilated by
//! its own diameter, fits inside a single `C`-box.  If the boxes of that
//! pulled cover have diameters at least `δ`, then any two points of the set
//! closer than `δ` lie in a common `C`-box: one of them lies in some pulled
//! box `S`, the other then lies in the diameter-dilation of `S`, and that
//! dilation fits in one `C`-box.  The returned exponent `L` satisfies
//! `2^-L < min diam(S_i)`, so `2^-L` is a Lebesgue number of the cover.
//!
//! Compactness guarantees termination on any covered set, but the search
//! is budgeted so failure stays observable.

use crate::chains::{Budget, CoverIndex};
use crate::error::Result;
use crate::geometry::{dyadic_sqrt_ub, pow4_neg, Rational, RationalBox};
use crate::names::{CompactName, Cover};

/// Fractional dyadic bits used when rounding a box diameter upward to a
/// rational dilation radius.  The rounding slack only shrinks the fitting
/// margin; soundness never depends on it.
const DIAM_BITS: u32 = 24;

/// Whether the `delta`-dilation of `s` fits inside `r`, tested per
/// coordinate.  The Euclidean dilation is contained in the coordinatewise
/// expansion, so the test is sound for it, and exact for boxes.
fn dilation_fits(s: &RationalBox, delta: &Rational, r: &RationalBox) -> bool {
    (0..s.dim()).all(|a| {
        &s.lo()[a] - delta >= r.lo()[a] && &s.hi()[a] + delta <= r.hi()[a]
    })
}

/// The Lebesgue exponent search on an already-indexed name; see
/// [`lebesgue_number`].
pub fn lebesgue_number_indexed(x: &mut CoverIndex, c: &Cover, b: &mut Budget) -> Result<u32> {
    let mut t = 0usize;
    loop {
        let pulled = x.cover(t, b)?.clone();
        let mut all_fit = true;
        let mut min_diam_sq: Option<Rational> = None;
        for s in pulled.boxes() {
            b.charge("lebesgue fit")?;
            let diam_sq = s.diam_sq();
            let delta = dyadic_sqrt_ub(&diam_sq, DIAM_BITS);
            if !c.boxes().iter().any(|r| dilation_fits(s, &delta, r)) {
                all_fit = false;
                break;
            }
            if min_diam_sq.as_ref().is_none_or(|m| &diam_sq < m) {
                min_diam_sq = Some(diam_sq);
            }
        }
        if all_fit {
            // Least L with 4^-L < min diam², hence 2^-L < min diam.
            let min_sq = min_diam_sq.expect("covers are nonempty");
            let mut l = 0u32;
            while pow4_neg(l) >= min_sq {
                l += 1;
            }
            return Ok(l);
        }
        t += 1;
    }
}

/// Computes a Lebesgue exponent `L` for the finite open cover `c` of the
/// set named by `x`: any two points of the set at distance below `2^-L`
/// lie together in some box of `c`.  The caller guarantees that `c` covers
/// the set; the search then terminates by compactness, budget permitting.
pub fn lebesgue_number(x: CompactName, c: &Cover, b: &mut Budget) -> Result<u32> {
    lebesgue_number_indexed(&mut CoverIndex::new(x), c, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::compact_name;
    use crate::catalog::fixtures::{segment, u_polyline};
    use crate::error::Error;
    use crate::geometry::{pow2_neg, rat, RationalBox, RationalPoint};

    fn boxes2(lo: (i64, i64, i64, i64), hi: (i64, i64, i64, i64)) -> RationalBox {
        RationalBox::from_fracs(&[(lo.0, lo.1), (lo.2, lo.3)], &[(hi.0, hi.1), (hi.2, hi.3)])
    }

    fn segment_cover() -> Cover {
        Cover::new(vec![
            boxes2((-1, 4, -1, 4), (5, 8, 1, 4)),
            boxes2((3, 8, -1, 4), (5, 4, 1, 4)),
        ])
        .unwrap()
    }

    #[test]
    fn single_box_cover_is_immediate() {
        let c = Cover::new(vec![boxes2((-4, 1, -4, 1), (4, 1, 4, 1))]).unwrap();
        let mut b = Budget::new(1000);
        let l = lebesgue_number(compact_name(&segment()), &c, &mut b).unwrap();
        // The very first pulled cover fits: 1 pull + its boxes + fit steps.
        let first_cover_len = compact_name(&segment()).next_cover().unwrap().boxes().len() as u64;
        assert_eq!(b.steps_used(), 1 + 2 * first_cover_len);
        // Validity spot check: close points share the single box.
        let p = RationalPoint::from_fracs(&[(1, 3), (0, 1)]);
        let q = RationalPoint::from_fracs(&[(1, 3), (0, 1)]);
        assert!(c.boxes()[0].contains_point(&p) && c.boxes()[0].contains_point(&q));
        assert!(l < 10, "single-box covers yield small exponents");
    }

    #[test]
    fn segment_two_box_cover() {
        let c = segment_cover();
        let mut b = Budget::new(10_000);
        let l = lebesgue_number(compact_name(&segment()), &c, &mut b).unwrap();
        assert_eq!(l, 4);
        // Grid oracle: every pair of 2^-(L+3) grid points on the segment
        // within 2^-L shares a cover box.
        let step = pow2_neg(l + 3);
        let n = 1 << (l + 3);
        for i in 0..=n {
            for j in i..=n {
                let d = rat(j - i, 1) * &step;
                if &d * &d >= pow4_neg(l) {
                    continue;
                }
                let p = RationalPoint::new(vec![rat(i, 1) * &step, rat(0, 1)]);
                let q = RationalPoint::new(vec![rat(j, 1) * &step, rat(0, 1)]);
                assert!(
                    c.boxes()
                        .iter()
                        .any(|r| r.contains_point(&p) && r.contains_point(&q)),
                    "grid pair {i},{j} shares no cover box"
                );
            }
        }
    }

    #[test]
    fn separating_pair_bounds_the_exponent() {
        let c = segment_cover();
        // 7/20 and 13/20 lie in no common box: 7/20 < 3/8 and 13/20 > 5/8.
        let p = RationalPoint::from_fracs(&[(7, 20), (0, 1)]);
        let q = RationalPoint::from_fracs(&[(13, 20), (0, 1)]);
        assert!(!c
            .boxes()
            .iter()
            .any(|r| r.contains_point(&p) && r.contains_point(&q)));
        let mut b = Budget::new(10_000);
        let l = lebesgue_number(compact_name(&segment()), &c, &mut b).unwrap();
        // Their distance 3/10 must then be at least 2^-L, forcing L ≥ 2.
        assert!(pow2_neg(l) <= rat(3, 10));
        assert!(l >= 2);
    }

    #[test]
    fn budget_exhaustion_reported() {
        let c = segment_cover();
        let mut b = Budget::new(5);
        assert!(matches!(
            lebesgue_number(compact_name(&segment()), &c, &mut b),
            Err(Error::BudgetExhausted { .. })
        ));
    }

    /// Samples close pairs on a set and asserts the Lebesgue property for
    /// exponent `l`: any sampled pair within `2^-l` shares a cover box.
    fn assert_lebesgue_property(
        set: &crate::catalog::TestContinuum,
        c: &Cover,
        l: u32,
        pairs: usize,
        seed: u64,
    ) {
        use rand::{Rng, SeedableRng};
        let samples = set.sample_connected(l + 4).unwrap();
        let pts = &samples.points;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let bound = pow4_neg(l);
        let mut checked = 0usize;
        while checked < pairs {
            let i = rng.gen_range(0..pts.len());
            // Nearby sample indices give nearby points; far pairs are
            // filtered by the exact distance test below.
            let spread = 1 << (l + 2);
            let j = rng.gen_range(i.saturating_sub(spread)..(i + spread).min(pts.len() - 1) + 1);
            let d = crate::geometry::dist_sq(&pts[i], &pts[j]);
            if d >= bound {
                continue;
            }
            checked += 1;
            assert!(
                c.boxes()
                    .iter()
                    .any(|r| r.contains_point(&pts[i]) && r.contains_point(&pts[j])),
                "pair at dist² {d} shares no cover box for L = {l}"
            );
        }
    }

    #[test]
    fn validity_on_sampled_pairs() {
        let c = segment_cover();
        let mut b = Budget::new(10_000);
        let l = lebesgue_number(compact_name(&segment()), &c, &mut b).unwrap();
        assert_lebesgue_property(&segment(), &c, l, 10_000, 41);
        // Monotone robustness: L + 1 keeps the property.
        assert_lebesgue_property(&segment(), &c, l + 1, 10_000, 42);
    }

    #[test]
    fn validity_on_u_polyline() {
        // Three overlapping strips covering the U shape: bottom bar, the
        // joining segment at x = 1, and the top bar.
        let c = Cover::new(vec![
            boxes2((-1, 8, -1, 4), (9, 8, 5, 16)),
            boxes2((11, 16, -1, 8), (5, 4, 9, 8)),
            boxes2((-1, 8, 11, 16), (9, 8, 5, 4)),
        ])
        .unwrap();
        let mut b = Budget::new(100_000);
        let l = lebesgue_number(compact_name(&u_polyline()), &c, &mut b).unwrap();
        assert_lebesgue_property(&u_polyline(), &c, l, 2_000, 43);
        assert_lebesgue_property(&u_polyline(), &c, l + 1, 2_000, 44);
    }
}
