//! Witnessing chains, arc chains, and their enumeration engines.
//!
//! A witnessing chain `(m, R₁, …, R_k)` strings together small rational
//! boxes whose consecutive intersections meet the set; dilating each box by
//! `2^-m` yields the open region `V_ω` that provably bounds a connected
//! subset of the continuum.  Arc chains group witnessing chains into links
//! whose `V`-regions form a simple chain.  Both carry their certificates
//! (boxes witnessing the required nonempty intersections) so that checking
//! is cheap and enumeration is exactly a search for certificates.
//!
//! The enumerators draw candidate boxes from the covers pulled off a
//! compact-set name: every box of a minimal cover intersects the set, which
//! is precisely the certified vocabulary available computably.  Chains are
//! emitted in deterministic weight stages (weight = dilation exponent +
//! cover stage + box count), so identical inputs yield identical streams.

use std::collections::BTreeSet;
use std::collections::VecDeque;

use num_bigint::BigInt;
use num_traits::Signed;

use crate::catalog::{LcFunction, TestContinuum};
use crate::error::{Error, Result};
use crate::exec::map_batch;
use crate::geometry::{
    box_span_sq, dilations_intersect, closure_dilation_in_dilation, f64_bounds, pow2_neg,
    pow4_neg, DilatedRegion, DyadicExp, Rational, RationalBox,
};
use crate::names::{CompactName, Cover};

/// A step allowance making search failure observable: every candidate
/// inspected and every cover pulled costs one step.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Budget {
    max_steps: u64,
    steps_used: u64,
}

impl Budget {
    pub fn new(max_steps: u64) -> Self {
        Budget { max_steps, steps_used: 0 }
    }

    /// Spends one step, failing when the allowance is gone.
    pub fn charge(&mut self, stage: &'static str) -> Result<()> {
        self.charge_many(1, stage)
    }

    /// Spends `n` steps at once; cover pulls charge their box count, so a
    /// budget bounds the total work of ever-deeper pulls.
    pub fn charge_many(&mut self, n: u64, stage: &'static str) -> Result<()> {
        if self.max_steps - self.steps_used < n {
            self.steps_used = self.max_steps;
            return Err(Error::BudgetExhausted { stage });
        }
        self.steps_used += n;
        Ok(())
    }

    pub fn steps_used(&self) -> u64 {
        self.steps_used
    }

    pub fn remaining(&self) -> u64 {
        self.max_steps - self.steps_used
    }
}

/// A compact-set name with its pulled covers retained, so that boxes of any
/// stage stay addressable and `S ∩ X ≠ ∅` can be certified by finding a
/// cover box inside `S` (minimality puts a point of the set in every box).
pub struct CoverIndex {
    name: CompactName,
    pulled: Vec<Cover>,
}

impl CoverIndex {
    pub fn new(name: CompactName) -> Self {
        CoverIndex { name, pulled: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.name.dim()
    }

    /// The cover at pull index `t`, pulling forward as needed.  Each pull
    /// charges one step per cover box, so deep pulls are budget-bounded.
    pub fn cover(&mut self, t: usize, b: &mut Budget) -> Result<&Cover> {
        while self.pulled.len() <= t {
            b.charge("cover pull")?;
            let c = self.name.next_cover()?;
            let cost = c.boxes().len() as u64;
            // Store before charging: the name stream has advanced, so the
            // pull index must stay aligned even on exhaustion.
            self.pulled.push(c);
            b.charge_many(cost, "cover pull")?;
        }
        Ok(&self.pulled[t])
    }

    /// Certifies `S ∩ X ≠ ∅` by locating a cover box contained in `S`.
    /// Sound by minimality; complete for any box with a set point in its
    /// interior, since deep cover boxes around that point shrink into `S`.
    pub fn certify_box_hits(&mut self, s: &RationalBox, b: &mut Budget) -> Result<()> {
        let mut t = 0;
        loop {
            if self
                .cover(t, b)?
                .boxes()
                .iter()
                .any(|c| s.contains_box(c) || s == c)
            {
                return Ok(());
            }
            b.charge("hit certificate")?;
            t += 1;
        }
    }
}

/// How chain checkers see the continuum: an exact oracle, or a name whose
/// covers certify intersections semi-decidably.
pub enum SetAccess {
    Oracle(TestContinuum),
    Name(CoverIndex),
}

impl SetAccess {
    pub fn dim(&self) -> usize {
        match self {
            SetAccess::Oracle(x) => x.dim(),
            SetAccess::Name(c) => c.dim(),
        }
    }

    /// Decides or certifies `S ∩ X ≠ ∅` for an open box `S`.  The oracle
    /// answers exactly; a name can only confirm (within budget), so `false`
    /// never comes back in name mode.
    fn box_hits(&mut self, s: &RationalBox, b: &mut Budget) -> Result<bool> {
        match self {
            SetAccess::Oracle(x) => Ok(x.box_hits_set(s)),
            SetAccess::Name(c) => c.certify_box_hits(s, b).map(|()| true),
        }
    }
}

/// A witnessing chain `(m, R₁, …, R_k)` with its link certificates.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WitnessingChain {
    m: DyadicExp,
    boxes: Vec<RationalBox>,
    link_certs: Vec<RationalBox>,
}

impl WitnessingChain {
    /// Builds a chain candidate.  `link_certs` is either empty (intersection
    /// conditions left to an oracle) or one box per consecutive pair.
    pub fn new(
        m: DyadicExp,
        boxes: Vec<RationalBox>,
        link_certs: Vec<RationalBox>,
    ) -> Result<Self> {
        if boxes.is_empty() {
            return Err(Error::invalid("witnessing chain", "needs at least one box"));
        }
        let d = boxes[0].dim();
        if boxes.iter().chain(&link_certs).any(|b| b.dim() != d) {
            return Err(Error::invalid("witnessing chain", "boxes must share one dimension"));
        }
        if !link_certs.is_empty() && link_certs.len() + 1 != boxes.len() {
            return Err(Error::invalid(
                "witnessing chain",
                "need one certificate per consecutive pair",
            ));
        }
        Ok(WitnessingChain { m, boxes, link_certs })
    }

    pub fn m_exp(&self) -> DyadicExp {
        self.m
    }

    /// The number of boxes `k_ω`.
    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The box `R_{ω, j}`, zero-indexed.
    pub fn box_at(&self, j: usize) -> &RationalBox {
        &self.boxes[j]
    }

    pub fn boxes(&self) -> &[RationalBox] {
        &self.boxes
    }

    pub fn link_certs(&self) -> &[RationalBox] {
        &self.link_certs
    }

    pub fn dim(&self) -> usize {
        self.boxes[0].dim()
    }

    /// The dilated regions whose union is `V_ω`.
    pub fn v_regions(&self) -> Vec<DilatedRegion> {
        self.boxes
            .iter()
            .map(|b| DilatedRegion { base: b.clone(), radius: self.m })
            .collect()
    }

    fn key(&self) -> ChainKey {
        let mut coords = Vec::new();
        for b in &self.boxes {
            for c in b.lo().iter().chain(b.hi()) {
                coords.push((c.numer().clone(), c.denom().clone()));
            }
        }
        (self.m.0, self.boxes.len(), coords)
    }
}

type ChainKey = (u32, usize, Vec<(BigInt, BigInt)>);

/// An arc chain: links that are witnessing chains, with join certificates.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ArcChain {
    links: Vec<WitnessingChain>,
    join_certs: Vec<RationalBox>,
}

impl ArcChain {
    /// Builds an arc chain candidate.  `join_certs` is either empty or one
    /// box per consecutive link pair.
    pub fn new(links: Vec<WitnessingChain>, join_certs: Vec<RationalBox>) -> Result<Self> {
        if links.is_empty() {
            return Err(Error::invalid("arc chain", "needs at least one link"));
        }
        let d = links[0].dim();
        if links.iter().any(|l| l.dim() != d) || join_certs.iter().any(|c| c.dim() != d) {
            return Err(Error::invalid("arc chain", "links must share one dimension"));
        }
        if !join_certs.is_empty() && join_certs.len() + 1 != links.len() {
            return Err(Error::invalid("arc chain", "need one certificate per link pair"));
        }
        Ok(ArcChain { links, join_certs })
    }

    /// The number of links `l_𝔭`.
    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The link `ω_{𝔭, j}`, zero-indexed.
    pub fn link(&self, j: usize) -> &WitnessingChain {
        &self.links[j]
    }

    pub fn links(&self) -> &[WitnessingChain] {
        &self.links
    }

    pub fn join_certs(&self) -> &[RationalBox] {
        &self.join_certs
    }

    pub fn dim(&self) -> usize {
        self.links[0].dim()
    }

    /// The dilated regions whose union is `V_{𝔭, j}`, zero-indexed.
    pub fn v_regions(&self, j: usize) -> Vec<DilatedRegion> {
        self.links[j].v_regions()
    }

    fn key(&self) -> (Vec<ChainKey>, usize) {
        (self.links.iter().map(|l| l.key()).collect(), self.links.len())
    }
}

/// The block boundaries `0 = t₀ < t₁ < … < t_l = k` of a "narrowly goes
/// straight through" assignment; every block has length at least two, as
/// the tower construction requires.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ThroughMap {
    bounds: Vec<usize>,
}

impl ThroughMap {
    pub fn new(bounds: Vec<usize>) -> Result<Self> {
        if bounds.first() != Some(&0) || bounds.len() < 2 {
            return Err(Error::invalid("through map", "bounds must start at zero"));
        }
        if bounds.windows(2).any(|w| w[0] + 2 > w[1]) {
            return Err(Error::invalid("through map", "blocks need length at least two"));
        }
        Ok(ThroughMap { bounds })
    }

    pub fn bounds(&self) -> &[usize] {
        &self.bounds
    }

    /// The number of blocks (the coarse chain's length).
    pub fn blocks(&self) -> usize {
        self.bounds.len() - 1
    }

    /// Fine-link index range of block `i` (zero-indexed, half-open).
    pub fn block(&self, i: usize) -> std::ops::Range<usize> {
        self.bounds[i]..self.bounds[i + 1]
    }
}

/// Checks the witnessing chain conditions: every box diameter below
/// `2^-f(m)`, and every consecutive box intersection meeting the set,
/// decided by the oracle or certified by the chain's own link certificates
/// against pulled covers.
pub fn check_witnessing(
    w: &WitnessingChain,
    f: &mut LcFunction,
    x: &mut SetAccess,
    b: &mut Budget,
) -> Result<bool> {
    let bound = pow4_neg(f.eval(w.m_exp().0)?);
    if w.boxes().iter().any(|r| r.diam_sq() >= bound) {
        return Ok(false);
    }
    if w.len() == 1 {
        return Ok(true);
    }
    let oracle_mode = matches!(x, SetAccess::Oracle(_));
    if !oracle_mode && w.link_certs().is_empty() {
        return Ok(false);
    }
    for i in 0..w.len() - 1 {
        let overlap = match w.box_at(i).intersection(w.box_at(i + 1)) {
            Some(o) => o,
            None => return Ok(false),
        };
        if oracle_mode {
            if !x.box_hits(&overlap, b)? {
                return Ok(false);
            }
        } else {
            let cert = &w.link_certs()[i];
            if !(overlap.contains_box(cert) || overlap == *cert) {
                return Ok(false);
            }
            x.box_hits(cert, b)?;
        }
    }
    Ok(true)
}

/// Whether the unions of two lists of dilated regions intersect: exact,
/// since a union meets a union exactly when some pair of members does.  The
/// reversed outer scan meets chain-shaped data, where consecutive links
/// touch end-to-start.
fn v_unions_intersect(a: &[DilatedRegion], b: &[DilatedRegion]) -> bool {
    a.iter().rev().any(|r| b.iter().any(|s| dilations_intersect(r, s)))
}

/// Checks the arc chain conditions: each link is a witnessing chain, the
/// `V`-regions form a simple chain (exactly), and every join meets the set.
pub fn check_arc_chain(
    p: &ArcChain,
    f: &mut LcFunction,
    x: &mut SetAccess,
    b: &mut Budget,
) -> Result<bool> {
    for link in p.links() {
        if !check_witnessing(link, f, x, b)? {
            return Ok(false);
        }
    }
    let regions: Vec<Vec<DilatedRegion>> = (0..p.len()).map(|j| p.v_regions(j)).collect();
    let bounds: Vec<LinkBounds> = regions.iter().map(|r| LinkBounds::new(r)).collect();
    for i in 0..p.len() {
        for j in i..p.len() {
            let should = j - i <= 1;
            if !should && bounds[i].certainly_apart(&bounds[j]) {
                continue;
            }
            if v_unions_intersect(&regions[i], &regions[j]) != should {
                return Ok(false);
            }
        }
    }
    if p.len() == 1 {
        return Ok(true);
    }
    let oracle_mode = matches!(x, SetAccess::Oracle(_));
    if !oracle_mode && p.join_certs().is_empty() {
        return Ok(false);
    }
    for i in 0..p.len() - 1 {
        let last = p.link(i).box_at(p.link(i).len() - 1);
        let first = p.link(i + 1).box_at(0);
        let overlap = match last.intersection(first) {
            Some(o) => o,
            None => return Ok(false),
        };
        if oracle_mode {
            if !x.box_hits(&overlap, b)? {
                return Ok(false);
            }
        } else {
            let cert = &p.join_certs()[i];
            if !(overlap.contains_box(cert) || overlap == *cert) {
                return Ok(false);
            }
            x.box_hits(cert, b)?;
        }
    }
    Ok(true)
}

/// Certifies that the fine arc chain narrowly goes straight through the
/// coarse one: blocks of consecutive fine links, each of length at least
/// two, with every fine region's closure certified inside the block's
/// coarse `V` (per-region corner test; sound, not complete).  Returns the
/// lexicographically least block map, or `None` when no assignment is
/// certified.
pub fn goes_straight_through(fine: &ArcChain, coarse: &ArcChain) -> Option<ThroughMap> {
    let k = fine.len();
    let l = coarse.len();
    if k < 2 * l {
        return None;
    }
    let fine_regions: Vec<Vec<DilatedRegion>> = (0..k).map(|j| fine.v_regions(j)).collect();
    let coarse_regions: Vec<Vec<DilatedRegion>> = (0..l).map(|i| coarse.v_regions(i)).collect();
    // A fit forces the fine link's expanded bounding box inside the coarse
    // link's on every axis, so conservative float bounds on those boxes
    // screen out most pairs before the exact corner tests run.
    let fine_bounds: Vec<LinkBounds> = fine_regions.iter().map(|r| LinkBounds::new(r)).collect();
    let coarse_bounds: Vec<LinkBounds> =
        coarse_regions.iter().map(|r| LinkBounds::new(r)).collect();
    // Per-region base-box float bounds: region containment needs
    // `s.lo − margin < r.lo` and `r.hi < s.hi + margin` per axis, so a
    // conservative check skips most exact corner tests.  The fitting coarse
    // region also advances with the fine one, so a moving hint finds it in
    // near-constant time.
    let screen_of = |links: &[Vec<DilatedRegion>]| -> Vec<Vec<Vec<(f64, f64, f64, f64)>>> {
        links
            .iter()
            .map(|regs| {
                regs.iter()
                    .map(|r| {
                        (0..r.dim())
                            .map(|a| {
                                let (llb, lub) = f64_bounds(&r.base.lo()[a]);
                                let (hlb, hub) = f64_bounds(&r.base.hi()[a]);
                                (llb, lub, hlb, hub)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    };
    let fine_screens = screen_of(&fine_regions);
    let coarse_screens = screen_of(&coarse_regions);
    let margin_ub = (f64_bounds(&coarse_regions[0][0].radius.scale()).1
        - f64_bounds(&fine_regions[0][0].radius.scale()).0)
        .next_up();
    // fits_cols[i]: sorted fine indices j such that every region of fine
    // link j is certified inside some region of coarse link i.
    let cols: Vec<usize> = (0..l).collect();
    let fits_cols: Vec<Vec<usize>> = map_batch(&cols, |&i| {
        let cr = &coarse_regions[i];
        let cb = &coarse_bounds[i];
        let cs = &coarse_screens[i];
        (0..k)
            .filter(|&j| {
                if !fine_bounds[j].may_fit_in(cb) {
                    return false;
                }
                let cl = cr.len();
                let mut hint = 0usize;
                'fine: for (r, rs) in fine_regions[j].iter().zip(&fine_screens[j]) {
                    for sidx in (hint..cl).chain(0..hint) {
                        let plausible = rs.iter().zip(&cs[sidx]).all(|(rf, sf)| {
                            sf.0 - rf.1 < margin_ub && rf.2 - sf.3 < margin_ub
                        });
                        if plausible && closure_dilation_in_dilation(r, &cr[sidx]) {
                            hint = sidx;
                            continue 'fine;
                        }
                    }
                    return false;
                }
                true
            })
            .collect()
    });
    // feasible_cols[i]: sorted fine indices j from which links j.. can fill
    // coarse links i.. in blocks of length ≥ 2.  A block j..j+c fits coarse
    // link i exactly when c stays within j's maximal run [a, b] of
    // consecutive fitting indices, so j is feasible when the next column
    // has an element in [j + 2, b + 1]; the largest such element bounds j
    // from above, making each run contribute one contiguous range.
    let mut feas_cols: Vec<Vec<usize>> = vec![Vec::new(); l + 1];
    feas_cols[l] = vec![k];
    for i in (0..l).rev() {
        let col = &fits_cols[i];
        let next = &feas_cols[i + 1];
        let mut feas = Vec::new();
        let mut p = 0;
        while p < col.len() {
            let mut q = p;
            while q + 1 < col.len() && col[q + 1] == col[q] + 1 {
                q += 1;
            }
            let (a, b) = (col[p], col[q]);
            p = q + 1;
            if b == 0 {
                continue;
            }
            let pos = next.partition_point(|&x| x <= b + 1);
            if pos == 0 || next[pos - 1] < a + 2 {
                continue;
            }
            let hi = (next[pos - 1] - 2).min(b - 1);
            feas.extend(a..=hi);
        }
        feas_cols[i] = feas;
    }
    if feas_cols[0].binary_search(&0).is_err() {
        return None;
    }
    // Greedy shortest-first blocks give the lexicographically least bounds:
    // the smallest continuation in the next column within the current run.
    let mut bounds = vec![0usize];
    let (mut j, mut i) = (0usize, 0usize);
    while i < l {
        let col = &fits_cols[i];
        let next = &feas_cols[i + 1];
        let p = col.binary_search(&j).expect("feasibility guarantees a fitting run");
        // Within a run, value − position is constant; it is non-decreasing
        // in the position, so the run's end is found by binary search.
        let key = col[p] - p;
        let (mut lo, mut hi) = (p, col.len() - 1);
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if col[mid] - mid == key {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let b = col[lo];
        let pos = next.partition_point(|&x| x < j + 2);
        debug_assert!(pos < next.len() && next[pos] <= b + 1, "feasibility guaranteed a block");
        j = next[pos];
        i += 1;
        bounds.push(j);
    }
    Some(ThroughMap { bounds })
}

/// Conservative float bounds on the expanded bounding box of a union of
/// dilated regions: per axis, two-sided bounds on `min (lo − r)` and
/// `max (hi + r)`.
struct LinkBounds {
    lo_lb: Vec<f64>,
    lo_ub: Vec<f64>,
    hi_lb: Vec<f64>,
    hi_ub: Vec<f64>,
}

impl LinkBounds {
    fn new(regions: &[DilatedRegion]) -> Self {
        let n = regions[0].dim();
        let mut out = LinkBounds {
            lo_lb: vec![f64::INFINITY; n],
            lo_ub: vec![f64::INFINITY; n],
            hi_lb: vec![f64::NEG_INFINITY; n],
            hi_ub: vec![f64::NEG_INFINITY; n],
        };
        for r in regions {
            let rad = r.radius.scale();
            for a in 0..n {
                let (llb, lub) = f64_bounds(&(&r.base.lo()[a] - &rad));
                let (hlb, hub) = f64_bounds(&(&r.base.hi()[a] + &rad));
                out.lo_lb[a] = out.lo_lb[a].min(llb);
                out.lo_ub[a] = out.lo_ub[a].min(lub);
                out.hi_lb[a] = out.hi_lb[a].max(hlb);
                out.hi_ub[a] = out.hi_ub[a].max(hub);
            }
        }
        out
    }

    /// False only when the expanded boxes certainly fail nesting on some
    /// axis, which rules out any region-by-region fit.
    fn may_fit_in(&self, outer: &LinkBounds) -> bool {
        self.lo_ub
            .iter()
            .zip(&outer.lo_lb)
            .all(|(f, c)| c <= f)
            && self.hi_lb.iter().zip(&outer.hi_ub).all(|(f, c)| f <= c)
    }

    /// True only when the expanded boxes are certainly separated on some
    /// axis, which rules out any region-pair intersection: the axis gap of
    /// the bases then strictly exceeds the sum of the radii.
    fn certainly_apart(&self, other: &LinkBounds) -> bool {
        self.lo_lb.iter().zip(&other.hi_ub).any(|(l, h)| l > h)
            || other.lo_lb.iter().zip(&self.hi_ub).any(|(l, h)| l > h)
    }
}

/// Exactly decides `max_j diam(V_{𝔭,j}) < 2^-k`.  The supremum distance
/// over a union of dilated boxes is the largest box-pair span plus both
/// radii; a region always spans at least twice its radius, whence the
/// guard.
pub fn chain_diam_lt(p: &ArcChain, k: DyadicExp) -> bool {
    for link in p.links() {
        // diam(V) < 2^-k ⟺ span + 2·2^-m < 2^-k on the largest pair.
        let threshold = pow2_neg(k.0) - Rational::from_integer(2.into()) * pow2_neg(link.m_exp().0);
        if !threshold.is_positive() {
            return false;
        }
        let threshold_sq = &threshold * &threshold;
        // Every pair's span is at most the diagonal of the link's bounding
        // box, so a small box certifies the link without the pair loop.
        let mut lo = link.box_at(0).lo().to_vec();
        let mut hi = link.box_at(0).hi().to_vec();
        for idx in 1..link.len() {
            let b = link.box_at(idx);
            for (acc, v) in lo.iter_mut().zip(b.lo()) {
                if *v < *acc {
                    *acc = v.clone();
                }
            }
            for (acc, v) in hi.iter_mut().zip(b.hi()) {
                if *v > *acc {
                    *acc = v.clone();
                }
            }
        }
        let diag_sq: Rational = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| {
                let d = h - l;
                &d * &d
            })
            .sum();
        if diag_sq < threshold_sq {
            continue;
        }
        for i in 0..link.len() {
            for j in i..link.len() {
                if box_span_sq(link.box_at(i), link.box_at(j)) >= threshold_sq {
                    return false;
                }
            }
        }
    }
    true
}

/// Fair deterministic stream of witnessing chains drawn from a name's
/// covers.  Stage `w` emits, in order of dilation exponent `m`, cover pull
/// index `t`, and then lexicographic walk order, every chain with
/// `m + t + k = w` whose `k` boxes are cover-`t` boxes below the diameter
/// bound, consecutive boxes overlapping with a cover-`t+1` certificate box
/// inside the overlap.
pub struct WitnessingEnum<'f> {
    covers: CoverIndex,
    f: &'f mut LcFunction,
    budget: Budget,
    stage: u32,
    pending: VecDeque<WitnessingChain>,
    seen: BTreeSet<ChainKey>,
}

/// See [`WitnessingEnum`]; this is the stream constructor.
pub fn enum_witnessing(x: CompactName, f: &mut LcFunction, b: Budget) -> WitnessingEnum<'_> {
    WitnessingEnum {
        covers: CoverIndex::new(x),
        f,
        budget: b,
        stage: 1,
        pending: VecDeque::new(),
        seen: BTreeSet::new(),
    }
}

impl WitnessingEnum<'_> {
    /// The next chain; `Err(BudgetExhausted)` is the end-of-stream marker.
    pub fn next_chain(&mut self) -> Result<WitnessingChain> {
        loop {
            if let Some(c) = self.pending.pop_front() {
                return Ok(c);
            }
            let stage = self.stage;
            self.stage += 1;
            let mut emitted = generate_witness_stage(
                &mut self.covers,
                self.f,
                &mut self.budget,
                stage,
                &mut self.seen,
            )?;
            self.pending.append(&mut emitted);
        }
    }

    pub fn steps_used(&self) -> u64 {
        self.budget.steps_used()
    }
}

/// The walk vocabulary at one `(m, t)` slot: filtered cover boxes and the
/// certified adjacency between them.
struct Vocabulary {
    boxes: Vec<RationalBox>,
    // adjacency[i] = (j, certificate) pairs, ascending in j.
    adjacency: Vec<Vec<(usize, RationalBox)>>,
}

fn build_vocabulary(
    covers: &mut CoverIndex,
    budget: &mut Budget,
    t: usize,
    diam_bound: &Rational,
) -> Result<Vocabulary> {
    let boxes: Vec<RationalBox> = covers
        .cover(t, budget)?
        .boxes()
        .iter()
        .filter(|b| &b.diam_sq() < diam_bound)
        .cloned()
        .collect();
    let finer = covers.cover(t + 1, budget)?.clone();
    let mut adjacency: Vec<Vec<(usize, RationalBox)>> = vec![Vec::new(); boxes.len()];
    for i in 0..boxes.len() {
        for j in i..boxes.len() {
            let overlap = match boxes[i].intersection(&boxes[j]) {
                Some(o) => o,
                None => continue,
            };
            let cert = finer
                .boxes()
                .iter()
                .find(|s| overlap.contains_box(s) || overlap == **s);
            if let Some(cert) = cert {
                adjacency[i].push((j, cert.clone()));
                if i != j {
                    adjacency[j].push((i, cert.clone()));
                }
            }
        }
    }
    for adj in &mut adjacency {
        adj.sort_by_key(|(j, _)| *j);
    }
    Ok(Vocabulary { boxes, adjacency })
}

/// Emits every walk of length `k` through the vocabulary, in lexicographic
/// order of visited indices, invoking `emit` with the index path.
fn walk_vocabulary(
    vocab: &Vocabulary,
    k: usize,
    budget: &mut Budget,
    emit: &mut impl FnMut(&[usize], &[RationalBox], &mut Budget) -> Result<()>,
) -> Result<()> {
    let mut path: Vec<usize> = Vec::new();
    let mut certs: Vec<RationalBox> = Vec::new();
    // Recursive lexicographic depth-first walk enumeration.
    fn extend(
        vocab: &Vocabulary,
        k: usize,
        budget: &mut Budget,
        path: &mut Vec<usize>,
        certs: &mut Vec<RationalBox>,
        emit: &mut impl FnMut(&[usize], &[RationalBox], &mut Budget) -> Result<()>,
    ) -> Result<()> {
        if path.len() == k {
            return emit(path, certs, budget);
        }
        let candidates: Vec<(usize, Option<RationalBox>)> = match path.last() {
            None => (0..vocab.boxes.len()).map(|i| (i, None)).collect(),
            Some(&last) => vocab.adjacency[last]
                .iter()
                .map(|(j, c)| (*j, Some(c.clone())))
                .collect(),
        };
        for (next, cert) in candidates {
            budget.charge("witness walk")?;
            path.push(next);
            if let Some(c) = cert {
                certs.push(c);
            }
            extend(vocab, k, budget, path, certs, emit)?;
            if path.len() > 1 {
                certs.pop();
            }
            path.pop();
        }
        Ok(())
    }
    extend(vocab, k, budget, &mut path, &mut certs, emit)
}

fn generate_witness_stage(
    covers: &mut CoverIndex,
    f: &mut LcFunction,
    budget: &mut Budget,
    stage: u32,
    seen: &mut BTreeSet<ChainKey>,
) -> Result<VecDeque<WitnessingChain>> {
    let mut out = VecDeque::new();
    for m in 0..stage {
        for t in 0..(stage - m) {
            let k = (stage - m - t) as usize;
            let bound = pow4_neg(f.eval(m)?);
            let vocab = build_vocabulary(covers, budget, t as usize, &bound)?;
            if vocab.boxes.is_empty() {
                continue;
            }
            walk_vocabulary(&vocab, k, budget, &mut |path, certs, _| {
                let chain = WitnessingChain::new(
                    DyadicExp(m),
                    path.iter().map(|&i| vocab.boxes[i].clone()).collect(),
                    certs.to_vec(),
                )?;
                if seen.insert(chain.key()) {
                    out.push_back(chain);
                }
                Ok(())
            })?;
        }
    }
    Ok(out)
}

/// Fair deterministic stream of arc chains: every walk from the witnessing
/// stages, split at every composition into consecutive runs (stage weight =
/// walk weight + number of links), filtered by the exact simple-chain test
/// on the `V`-regions.  Join certificates are the walk's own step
/// certificates at the split boundaries.
pub struct ArcChainEnum<'f> {
    covers: CoverIndex,
    f: &'f mut LcFunction,
    budget: Budget,
    stage: u32,
    pending: VecDeque<ArcChain>,
    seen: BTreeSet<(Vec<ChainKey>, usize)>,
}

/// See [`ArcChainEnum`]; this is the stream constructor.
pub fn enum_arc_chains(x: CompactName, f: &mut LcFunction, b: Budget) -> ArcChainEnum<'_> {
    ArcChainEnum {
        covers: CoverIndex::new(x),
        f,
        budget: b,
        stage: 2,
        pending: VecDeque::new(),
        seen: BTreeSet::new(),
    }
}

impl ArcChainEnum<'_> {
    /// The next arc chain; `Err(BudgetExhausted)` is the end-of-stream
    /// marker.
    pub fn next_chain(&mut self) -> Result<ArcChain> {
        loop {
            if let Some(c) = self.pending.pop_front() {
                return Ok(c);
            }
            let stage = self.stage;
            self.stage += 1;
            let mut emitted = self.generate_stage(stage)?;
            self.pending.append(&mut emitted);
        }
    }

    pub fn steps_used(&self) -> u64 {
        self.budget.steps_used()
    }

    fn generate_stage(&mut self, stage: u32) -> Result<VecDeque<ArcChain>> {
        let mut out = VecDeque::new();
        for l in 1..stage {
            let w = stage - l;
            for m in 0..w {
                for t in 0..(w - m) {
                    let k = (w - m - t) as usize;
                    if k < l as usize {
                        continue;
                    }
                    let bound = pow4_neg(self.f.eval(m)?);
                    let vocab =
                        build_vocabulary(&mut self.covers, &mut self.budget, t as usize, &bound)?;
                    if vocab.boxes.is_empty() {
                        continue;
                    }
                    let seen = &mut self.seen;
                    walk_vocabulary(&vocab, k, &mut self.budget, &mut |path, certs, b| {
                        for split in compositions(k, l as usize) {
                            b.charge("arc split")?;
                            if let Some(chain) =
                                assemble_arc(&vocab, path, certs, &split, DyadicExp(m))?
                            {
                                if seen.insert(chain.key()) {
                                    out.push_back(chain);
                                }
                            }
                        }
                        Ok(())
                    })?;
                }
            }
        }
        Ok(out)
    }
}

/// All compositions of `k` into `l` positive parts, lexicographically.
fn compositions(k: usize, l: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, slots: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            prefix.push(rest);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 1..=(rest - slots + 1) {
            prefix.push(first);
            go(rest - first, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k >= l && l >= 1 {
        go(k, l, &mut Vec::new(), &mut out);
    }
    out
}

/// Builds the split arc chain when its `V`-regions form a simple chain.
fn assemble_arc(
    vocab: &Vocabulary,
    path: &[usize],
    certs: &[RationalBox],
    split: &[usize],
    m: DyadicExp,
) -> Result<Option<ArcChain>> {
    let mut links = Vec::with_capacity(split.len());
    let mut joins = Vec::new();
    let mut start = 0usize;
    for (li, &len) in split.iter().enumerate() {
        let boxes: Vec<RationalBox> =
            path[start..start + len].iter().map(|&i| vocab.boxes[i].clone()).collect();
        let link_certs = if len >= 2 {
            certs[start..start + len - 1].to_vec()
        } else {
            Vec::new()
        };
        links.push(WitnessingChain::new(m, boxes, link_certs)?);
        if li + 1 < split.len() {
            joins.push(certs[start + len - 1].clone());
        }
        start += len;
    }
    let chain = ArcChain::new(links, joins)?;
    let regions: Vec<Vec<DilatedRegion>> =
        (0..chain.len()).map(|j| chain.v_regions(j)).collect();
    for i in 0..chain.len() {
        for j in i..chain.len() {
            let should = j - i <= 1;
            if v_unions_intersect(&regions[i], &regions[j]) != should {
                return Ok(None);
            }
        }
    }
    Ok(Some(chain))
}
