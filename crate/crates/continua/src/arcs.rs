//! Arc parametrization from chain towers.
//!
//! A chain tower stacks arc chains 𝔭₀, 𝔭₁, …, each narrowly going straight
//! through its predecessor with strictly shrinking diameter.  The through
//! maps subdivide `[0, 1]` into nested closed-interval families; following a
//! parameter down the tower evaluates the limit parametrization `h`.  On top
//! of the tower sit the derived computations: a δ_C function name for `h`,
//! moduli of continuity in both directions, a local connectivity function
//! and a compact-set name for the image, endpoint recovery from a bare set
//! name, and the full set-name-to-parametrization pipeline.
//!
//! Levels are found, not constructed: a goal-directed self-avoiding walk
//! over dyadic grid beads proposes a candidate chain, which is then admitted
//! only by the public checkers (diameter, straight-through map, endpoint
//! certificates).  The classical refinement proof guarantees such chains
//! exist, so the budgeted search is a sound semi-decision procedure.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::catalog::{LcFunction, Provenance, TestContinuum};
use crate::chains::{
    chain_diam_lt, goes_straight_through, ArcChain, Budget, CoverIndex, ThroughMap,
    WitnessingChain,
};
use crate::error::{Error, Result};
use crate::geometry::{
    box_gap_sq, closure_dilation_in_dilation, dyadic_sqrt_lb, dyadic_sqrt_ub, f64_bounds,
    locate_point, pow2, pow2_neg, pow4_neg, rat_int, rational_ceil, rational_floor,
    DilatedRegion, DyadicExp, PointLocation, Rational, RationalBox, RationalPoint,
};
use crate::memo::MemoFn;
use crate::names::{
    dyadic_window, pad_order, CompactName, FunctionName, PointName, PolygonalCurve,
    SharedCompact, SharedPoint,
};

/// A nonempty closed rational interval `[lo, hi]` with `lo < hi`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ClosedInterval {
    lo: Rational,
    hi: Rational,
}

impl ClosedInterval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo >= hi {
            return Err(Error::invalid("interval", "must have positive length"));
        }
        Ok(ClosedInterval { lo, hi })
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn len(&self) -> Rational {
        &self.hi - &self.lo
    }

    /// Closed intersection nonempty.
    pub fn meets(&self, lo: &Rational, hi: &Rational) -> bool {
        &self.lo <= hi && lo <= &self.hi
    }

    pub fn contains(&self, t: &Rational) -> bool {
        &self.lo <= t && t <= &self.hi
    }
}

/// The `position`-th of `d` equal closed subintervals of `parent`
/// (1-indexed): `[a + (position−1)/d · (b−a), a + position/d · (b−a)]`.
pub fn subinterval(parent: &ClosedInterval, d: usize, position: usize) -> Result<ClosedInterval> {
    if d == 0 || position == 0 || position > d {
        return Err(Error::invalid("subinterval", "position must lie in 1..=d"));
    }
    let width = parent.len() / rat_int(d as i64);
    let lo = parent.lo() + &width * rat_int(position as i64 - 1);
    let hi = parent.lo() + &width * rat_int(position as i64);
    ClosedInterval::new(lo, hi)
}

/// The interval families of a tower's materialized levels: level `j` tiles
/// `[0, 1]` with one closed interval per link of chain `𝔭_j`, adjacent
/// intervals sharing exactly one endpoint.
#[derive(Clone, Debug)]
pub struct IntervalFamily {
    levels: Vec<Vec<ClosedInterval>>,
}

impl IntervalFamily {
    /// Number of materialized levels (including level 0).
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, j: usize) -> &[ClosedInterval] {
        &self.levels[j]
    }
}

// ---------------------------------------------------------------------------
// Bead walks: goal-directed searches over width-2 dyadic windows.

pub(crate) type Cell = Vec<i64>;

/// Hit evidence for a window: `None` = misses (oracle) or not certified
/// (name mode); `Some(None)` = hits by oracle; `Some(Some(c))` = hits with
/// cover-box certificate `c` inside the window.
pub(crate) type HitInfo = Option<Option<RationalBox>>;

/// The bead vocabulary at one depth: hit tests for windows and window
/// overlaps, decided by the oracle or certified by probe cover boxes, with
/// memoized verdicts so each geometric test is charged once.
pub(crate) struct BeadSpace {
    dim: usize,
    depth: u32,
    oracle: Option<TestContinuum>,
    probe: Vec<RationalBox>,
    bead_cache: HashMap<Cell, HitInfo>,
    edge_cache: HashMap<(Cell, Cell), HitInfo>,
}

impl BeadSpace {
    pub(crate) fn new(
        dim: usize,
        depth: u32,
        oracle: Option<TestContinuum>,
        probe: Vec<RationalBox>,
    ) -> Self {
        BeadSpace {
            dim,
            depth,
            oracle,
            probe,
            bead_cache: HashMap::new(),
            edge_cache: HashMap::new(),
        }
    }

    /// The width-2 window anchored at `c`.
    pub(crate) fn window(&self, c: &Cell) -> RationalBox {
        let coords: Vec<BigInt> = c.iter().map(|&v| BigInt::from(v)).collect();
        dyadic_window(&coords, self.depth, 2)
    }

    fn test(&self, w: &RationalBox) -> HitInfo {
        match &self.oracle {
            Some(x) => {
                if x.box_hits_set(w) {
                    Some(None)
                } else {
                    None
                }
            }
            None => self
                .probe
                .iter()
                .find(|q| w.contains_box(q))
                .map(|q| Some(q.clone())),
        }
    }

    /// Hit test for the bead at `c`.
    pub(crate) fn bead(&mut self, c: &Cell, b: &mut Budget) -> Result<HitInfo> {
        if let Some(h) = self.bead_cache.get(c) {
            return Ok(h.clone());
        }
        b.charge("bead test")?;
        let h = self.test(&self.window(c));
        self.bead_cache.insert(c.clone(), h.clone());
        Ok(h)
    }

    /// Hit test for the overlap of two adjacent beads.
    pub(crate) fn edge(&mut self, a: &Cell, c: &Cell, b: &mut Budget) -> Result<HitInfo> {
        let key = if a <= c { (a.clone(), c.clone()) } else { (c.clone(), a.clone()) };
        if let Some(h) = self.edge_cache.get(&key) {
            return Ok(h.clone());
        }
        b.charge("edge test")?;
        let overlap = self
            .window(a)
            .intersection(&self.window(c))
            .expect("adjacent beads overlap");
        let h = self.test(&overlap);
        self.edge_cache.insert(key, h.clone());
        Ok(h)
    }
}

/// Pulls covers until one has all diameters `< 2^-(depth+2)` and returns its
/// boxes: the certificate vocabulary for beads at `depth`.
pub(crate) fn probe_boxes(
    covers: &mut CoverIndex,
    depth: u32,
    b: &mut Budget,
) -> Result<Vec<RationalBox>> {
    let bound = DyadicExp(depth + 2).scale_sq();
    let mut t = 0usize;
    loop {
        let c = covers.cover(t, b)?;
        if c.max_diam_sq() < bound {
            return Ok(c.boxes().to_vec());
        }
        t += 1;
    }
}

/// The `2n` unit steps in lexicographic order.
fn unit_dirs(n: usize) -> Vec<Cell> {
    let mut v = Vec::with_capacity(2 * n);
    for a in 0..n {
        let mut d = vec![0i64; n];
        d[a] = -1;
        v.push(d);
        let mut u = vec![0i64; n];
        u[a] = 1;
        v.push(u);
    }
    v.sort();
    v
}

fn cheby(a: &Cell, b: &Cell) -> i64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).max().unwrap_or(0)
}

/// All cells of `{lo..=hi}` ranges in lexicographic order.
fn lex_product(ranges: &[(i64, i64)]) -> Vec<Cell> {
    if ranges.iter().any(|&(lo, hi)| lo > hi) {
        return Vec::new();
    }
    let mut out = vec![Vec::new()];
    for &(lo, hi) in ranges {
        let mut next = Vec::new();
        for prefix in &out {
            for v in lo..=hi {
                let mut cell = prefix.clone();
                cell.push(v);
                next.push(cell);
            }
        }
        out = next;
    }
    out
}

/// Anchors of all width-2 windows at `depth` whose closure contains `w`, in
/// lexicographic order.  Empty when `w` is too wide or misaligned.
pub(crate) fn cells_containing_box(w: &RationalBox, depth: u32) -> Vec<Cell> {
    let scale = pow2(depth);
    let ranges: Vec<(i64, i64)> = (0..w.dim())
        .map(|a| {
            let lo = rational_floor(&(&w.lo()[a] * &scale))
                .to_i64()
                .expect("walk searches stay at desk scale");
            let hi = rational_ceil(&(&w.hi()[a] * &scale))
                .to_i64()
                .expect("walk searches stay at desk scale");
            (hi - 2, lo)
        })
        .collect();
    lex_product(&ranges)
}

/// A successful walk: beads and one hit certificate per step (certificates
/// are `None` exactly in oracle mode).
pub(crate) struct WalkFound {
    pub(crate) cells: Vec<Cell>,
    pub(crate) certs: Vec<Option<RationalBox>>,
}

/// Depth-first, self-avoiding, goal-directed walk from one of `starts` to a
/// target bead.  Steps are unit moves in lexicographic order; every bead and
/// every step overlap must hit the set; `confine` filters bead windows;
/// `separation = (link_len, sep)` additionally keeps each bead at Chebyshev
/// distance `≥ sep` from all beads two or more `link_len`-blocks back, which
/// makes the assembled chain simple by construction.  Returns the first walk
/// found, deterministically, or `None` when the space is exhausted.
pub(crate) fn walk_beads(
    space: &mut BeadSpace,
    starts: &[Cell],
    mut is_target: impl FnMut(&Cell) -> bool,
    confine: impl Fn(&RationalBox) -> bool,
    separation: Option<(usize, i64)>,
    budget: &mut Budget,
) -> Result<Option<WalkFound>> {
    let dirs = unit_dirs(space.dim);
    // Joint bead-hit and confinement verdicts, computed once per cell: the
    // walk revisits candidates from many tips.
    let mut allowed: HashMap<Cell, bool> = HashMap::new();
    let mut admit = |space: &mut BeadSpace, c: &Cell, budget: &mut Budget| -> Result<bool> {
        if let Some(&v) = allowed.get(c) {
            return Ok(v);
        }
        let v = space.bead(c, budget)?.is_some() && confine(&space.window(c));
        allowed.insert(c.clone(), v);
        Ok(v)
    };
    for start in starts {
        if !admit(&mut *space, start, budget)? {
            continue;
        }
        let mut path: Vec<Cell> = vec![start.clone()];
        let mut certs: Vec<Option<RationalBox>> = Vec::new();
        let mut tried: Vec<usize> = vec![0];
        let mut visited: HashSet<Cell> = HashSet::from([start.clone()]);
        let mut buckets: HashMap<Cell, Vec<usize>> = HashMap::new();
        let bucket_key = |c: &Cell, sep: i64| -> Cell {
            c.iter().map(|v| v.div_euclid(sep)).collect()
        };
        if let Some((_, sep)) = separation {
            buckets.insert(bucket_key(start, sep), vec![0]);
        }
        if is_target(start) {
            return Ok(Some(WalkFound { cells: path, certs }));
        }
        loop {
            let next_dir = *tried.last().expect("stack mirrors path");
            if next_dir >= dirs.len() {
                // Exhausted this tip: backtrack.
                let dead = path.pop().expect("stack mirrors path");
                tried.pop();
                certs.pop();
                visited.remove(&dead);
                if let Some((_, sep)) = separation {
                    let key = bucket_key(&dead, sep);
                    let list = buckets.get_mut(&key).expect("bucket holds its bead");
                    list.pop();
                    if list.is_empty() {
                        buckets.remove(&key);
                    }
                }
                if path.is_empty() {
                    break;
                }
                continue;
            }
            *tried.last_mut().expect("stack mirrors path") += 1;
            let tip = path.last().expect("path is nonempty").clone();
            let cand: Cell = tip.iter().zip(&dirs[next_dir]).map(|(a, d)| a + d).collect();
            if visited.contains(&cand) {
                continue;
            }
            if let Some((link_len, sep)) = separation {
                let q = path.len();
                let cand_link = q / link_len;
                if cand_link >= 2 {
                    // Beads of links ≤ cand_link − 2 sit at positions below
                    // this cutoff and must stay `sep` away.
                    let cutoff = (cand_link - 1) * link_len;
                    let key = bucket_key(&cand, sep);
                    let mut ok = true;
                    'nearby: for offset in lex_product(&vec![(-1, 1); space.dim]) {
                        let nb: Cell = key.iter().zip(&offset).map(|(a, d)| a + d).collect();
                        if let Some(list) = buckets.get(&nb) {
                            for &pos in list {
                                if pos < cutoff && cheby(&path[pos], &cand) < sep {
                                    ok = false;
                                    break 'nearby;
                                }
                            }
                        }
                    }
                    if !ok {
                        continue;
                    }
                }
            }
            if !admit(&mut *space, &cand, budget)? {
                continue;
            }
            let step = match space.edge(&tip, &cand, budget)? {
                Some(cert) => cert,
                None => continue,
            };
            if let Some((_, sep)) = separation {
                buckets.entry(bucket_key(&cand, sep)).or_default().push(path.len());
            }
            visited.insert(cand.clone());
            path.push(cand.clone());
            certs.push(step);
            tried.push(0);
            if is_target(&cand) {
                return Ok(Some(WalkFound { cells: path, certs }));
            }
        }
    }
    Ok(None)
}

/// Packs a walk into a single witnessing chain.
pub(crate) fn assemble_witnessing(
    walk: &WalkFound,
    space: &BeadSpace,
    m: DyadicExp,
) -> Result<WitnessingChain> {
    let boxes: Vec<RationalBox> = walk.cells.iter().map(|c| space.window(c)).collect();
    let name_mode = space.oracle.is_none();
    let certs: Vec<RationalBox> = if name_mode {
        walk.certs
            .iter()
            .map(|c| c.clone().expect("name-mode steps carry certificates"))
            .collect()
    } else {
        Vec::new()
    };
    WitnessingChain::new(m, boxes, certs)
}

/// Packs a walk into an arc chain: blocks of `link_len` beads, with a short
/// tail (under half a link) merged into the preceding block.
fn assemble_arc_chain(
    walk: &WalkFound,
    space: &BeadSpace,
    m: DyadicExp,
    link_len: usize,
) -> Result<ArcChain> {
    let total = walk.cells.len();
    let full = total / link_len;
    let mut cuts: Vec<usize> = (0..=full).map(|i| i * link_len).collect();
    if total % link_len != 0 {
        cuts.push(total);
    }
    if cuts.len() >= 3 {
        let tail = cuts[cuts.len() - 1] - cuts[cuts.len() - 2];
        if 2 * tail < link_len {
            cuts.remove(cuts.len() - 2);
        }
    }
    let name_mode = space.oracle.is_none();
    let mut links = Vec::with_capacity(cuts.len() - 1);
    let mut joins = Vec::new();
    for w in cuts.windows(2) {
        let boxes: Vec<RationalBox> =
            walk.cells[w[0]..w[1]].iter().map(|c| space.window(c)).collect();
        let certs: Vec<RationalBox> = if name_mode {
            walk.certs[w[0]..w[1] - 1]
                .iter()
                .map(|c| c.clone().expect("name-mode steps carry certificates"))
                .collect()
        } else {
            Vec::new()
        };
        links.push(WitnessingChain::new(m, boxes, certs)?);
    }
    if name_mode {
        for &cut in &cuts[1..cuts.len() - 1] {
            joins.push(
                walk.certs[cut - 1].clone().expect("name-mode steps carry certificates"),
            );
        }
    }
    ArcChain::new(links, joins)
}

/// The walk schedule at dilation `m`: bead depth `d`, link length, and the
/// separation distance in cells.
///
/// `d = max(f(m+2), m) + pad_order(n) + 2` makes bead unions small enough
/// that consecutive certified set points are `2^-f(m+2)`-close, so the arc
/// between them stays in the `2^-(m+2)` tube around the beads; that margin
/// is what lets the next level's region closures certify inside this one's.
/// `sep = 2 + 2^(d−m+1)` cells of Chebyshev distance keep regions of links
/// two apart disjoint (gap `≥ 2·2^-m` exactly), and `link_len = 2·sep` steps
/// per link guarantee that consecutive links reach the separation even on
/// diagonal staircases, where Chebyshev distance grows at half the step
/// rate.
pub(crate) fn walk_schedule(
    f: &mut LcFunction,
    m: u32,
    dim: usize,
) -> Result<(u32, usize, i64)> {
    let d = f.eval(m + 2)?.max(m) + pad_order(dim) + 2;
    if d - m > 40 {
        return Err(Error::invalid(
            "walk schedule",
            "local connectivity bound too far above the dilation scale",
        ));
    }
    let sep: i64 = 2 + (1i64 << (d - m + 1));
    let link_len = 2 * sep as usize;
    Ok((d, link_len, sep))
}

// ---------------------------------------------------------------------------
// Chain towers.

/// How tower searches see the continuum: an exact oracle when the name
/// carries one, plus the cover stream for certificates.
struct TowerAccess {
    oracle: Option<TestContinuum>,
    covers: CoverIndex,
}

impl TowerAccess {
    fn space(&mut self, depth: u32, b: &mut Budget) -> Result<BeadSpace> {
        let dim = self.covers.dim();
        let probe = match &self.oracle {
            Some(_) => Vec::new(),
            None => probe_boxes(&mut self.covers, depth, b)?,
        };
        Ok(BeadSpace::new(dim, depth, self.oracle.clone(), probe))
    }
}

/// A lazily extended tower of arc chains `𝔭₀, 𝔭₁, …` with certified through
/// maps, interval families, per-level endpoint certificates, and exact
/// per-level diameter exponents.
pub struct ChainTower {
    access: TowerAccess,
    f: LcFunction,
    x: SharedPoint,
    y: SharedPoint,
    levels: Vec<ArcChain>,
    maps: Vec<ThroughMap>,
    intervals: Vec<Vec<ClosedInterval>>,
    x_certs: Vec<RationalBox>,
    y_certs: Vec<RationalBox>,
    /// Largest `c` with `diam(𝔭_j) < 2^-c` verified, `-1` when even `c = 0`
    /// fails.
    diam_exp: Vec<i64>,
    budget: Budget,
}

/// An index over one level's regions for fast fits-in-tube lookups: beads
/// bucketed by their coarse grid cell.
struct TubeIndex {
    depth: u32,
    regions: Vec<DilatedRegion>,
    // Per-region per-axis `(lo lower bound, hi upper bound)` floats for the
    // conservative containment screen.
    screen: Vec<Vec<(f64, f64)>>,
    region_m: u32,
    buckets: HashMap<Cell, Vec<usize>>,
    bucket_cells: i64,
}

impl TubeIndex {
    fn new(chain: &ArcChain, depth: u32) -> Self {
        let m = chain.link(0).m_exp().0;
        // A fitting region's base lies within `2^-m` plus window sizes of
        // the coarse bead; one bucket of this many cells plus the adjacent
        // ring covers every candidate.
        let bucket_cells: i64 = (1i64 << (depth.saturating_sub(m).min(40) + 1)) + 4;
        let mut regions = Vec::new();
        for j in 0..chain.len() {
            regions.extend(chain.v_regions(j));
        }
        let scale = pow2(depth);
        let mut buckets: HashMap<Cell, Vec<usize>> = HashMap::new();
        for (i, r) in regions.iter().enumerate() {
            let key: Cell = (0..r.dim())
                .map(|a| {
                    rational_floor(&(&r.base.lo()[a] * &scale))
                        .to_i64()
                        .expect("tower coordinates fit i64")
                        .div_euclid(bucket_cells)
                })
                .collect();
            buckets.entry(key).or_default().push(i);
        }
        let screen = regions
            .iter()
            .map(|r| {
                (0..r.dim())
                    .map(|a| (f64_bounds(&r.base.lo()[a]).0, f64_bounds(&r.base.hi()[a]).1))
                    .collect()
            })
            .collect();
        TubeIndex { depth, regions, screen, region_m: m, buckets, bucket_cells }
    }

    /// Whether some coarse region certifiably contains the closure of `v`.
    fn fits(&self, v: &DilatedRegion) -> bool {
        let scale = pow2(self.depth);
        let key: Cell = (0..v.dim())
            .map(|a| {
                rational_floor(&(&v.base.lo()[a] * &scale))
                    .to_i64()
                    .expect("tower coordinates fit i64")
                    .div_euclid(self.bucket_cells)
            })
            .collect();
        // Containment requires `s.lo − margin < v.lo` and `v.hi < s.hi +
        // margin` on every axis; certain violations skip the exact test.
        let v_lo_ub: Vec<f64> = (0..v.dim()).map(|a| f64_bounds(&v.base.lo()[a]).1).collect();
        let v_hi_lb: Vec<f64> = (0..v.dim()).map(|a| f64_bounds(&v.base.hi()[a]).0).collect();
        let margin_ub = (2f64.powi(-(self.region_m as i32))
            - f64_bounds(&v.radius.scale()).0)
            .next_up();
        for offset in lex_product(&vec![(-1, 1); v.dim()]) {
            let nb: Cell = key.iter().zip(&offset).map(|(a, d)| a + d).collect();
            if let Some(list) = self.buckets.get(&nb) {
                for &i in list {
                    let sc = &self.screen[i];
                    let plausible = (0..v.dim()).all(|a| {
                        sc[a].0 - v_lo_ub[a] < margin_ub && v_hi_lb[a] - sc[a].1 < margin_ub
                    });
                    if plausible && closure_dilation_in_dilation(v, &self.regions[i]) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// Starts a tower over the witnessing chain `w` from `x` to `y`: level 0 is
/// the one-link arc chain `(ω)`.  Levels beyond 0 are found on demand.
pub fn build_tower(
    x_set: CompactName,
    f: LcFunction,
    w: WitnessingChain,
    x: PointName,
    y: PointName,
    b: Budget,
) -> Result<ChainTower> {
    let dim = x_set.dim();
    if w.dim() != dim || x.dim() != dim || y.dim() != dim {
        return Err(Error::invalid("tower", "set, chain, and endpoints must share a dimension"));
    }
    let oracle = x_set.oracle().cloned();
    let mut tower = ChainTower {
        access: TowerAccess { oracle, covers: CoverIndex::new(x_set) },
        f,
        x: SharedPoint::new(x),
        y: SharedPoint::new(y),
        levels: vec![ArcChain::new(vec![w], Vec::new())?],
        maps: Vec::new(),
        intervals: vec![vec![ClosedInterval::new(Rational::zero(), Rational::one())?]],
        x_certs: Vec::new(),
        y_certs: Vec::new(),
        diam_exp: Vec::new(),
        budget: b,
    };
    tower.diam_exp.push(measure_diam_exp(&tower.levels[0], -1));
    let (xc, yc) = tower.endpoint_certs(0)?;
    tower.x_certs.push(xc);
    tower.y_certs.push(yc);
    Ok(tower)
}

/// Largest `c ≥ 0` with `diam < 2^-c` certified, scanning up from
/// `max(floor, 0)`; `-1` when the diameter is not even below `1`.
fn measure_diam_exp(chain: &ArcChain, floor: i64) -> i64 {
    let mut c = floor.max(0) as u32;
    if !chain_diam_lt(chain, DyadicExp(c)) {
        return -1;
    }
    while chain_diam_lt(chain, DyadicExp(c + 1)) {
        c += 1;
    }
    c as i64
}

impl ChainTower {
    pub fn dim(&self) -> usize {
        self.access.covers.dim()
    }

    /// Levels materialized so far, including level 0.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, j: usize) -> &ArcChain {
        &self.levels[j]
    }

    /// The through map sending level `j+1` into level `j`.
    pub fn map(&self, j: usize) -> &ThroughMap {
        &self.maps[j]
    }

    pub fn intervals(&self, j: usize) -> &[ClosedInterval] {
        &self.intervals[j]
    }

    /// The endpoint certificate boxes `(R, S)` of level `j`: `x ∈ R` with
    /// `R̄ ⊆ V_{𝔭_j,1}` and `y ∈ S` with `S̄ ⊆ V_{𝔭_j,l_j}`.
    pub fn endpoint_boxes(&self, j: usize) -> (&RationalBox, &RationalBox) {
        (&self.x_certs[j], &self.y_certs[j])
    }

    /// Largest verified `c` with `diam(𝔭_j) < 2^-c` (`-1`: not below `1`).
    pub fn diam_exponent(&self, j: usize) -> i64 {
        self.diam_exp[j]
    }

    pub fn steps_used(&self) -> u64 {
        self.budget.steps_used()
    }

    /// A snapshot of the materialized interval families.
    pub fn interval_family(&self) -> IntervalFamily {
        IntervalFamily { levels: self.intervals.clone() }
    }

    /// Ensures levels `0..=level` exist.
    pub fn materialize(&mut self, level: usize) -> Result<()> {
        while self.levels.len() <= level {
            self.search_level()?;
        }
        Ok(())
    }

    /// Ensures some level has verified diameter `< 2^-target`.
    fn materialize_diam(&mut self, target: i64) -> Result<usize> {
        loop {
            if let Some(j) = self.diam_exp.iter().position(|&de| de >= target) {
                return Ok(j);
            }
            self.search_level()?;
        }
    }

    /// Certificate boxes for `x` in the first and `y` in the last region of
    /// level `j`: approximation windows of the endpoint names, refined until
    /// they locate strictly inside.
    fn endpoint_certs(&mut self, j: usize) -> Result<(RationalBox, RationalBox)> {
        let chain = self.levels[j].clone();
        let first = chain.v_regions(0);
        let last = chain.v_regions(chain.len() - 1);
        let find = |name: &SharedPoint,
                    regions: &[DilatedRegion],
                    b: &mut Budget|
         -> Result<RationalBox> {
            let mut handle = name.handle();
            let mut k = regions[0].radius.0 + 2;
            loop {
                b.charge("endpoint certificate")?;
                let w = handle.approx(DyadicExp(k))?;
                if regions.iter().any(|r| locate_point(&w, r) == PointLocation::Inside) {
                    return Ok(w);
                }
                if regions.iter().all(|r| locate_point(&w, r) == PointLocation::Outside) {
                    return Err(Error::invalid(
                        "tower",
                        "endpoint name locates outside its terminal region",
                    ));
                }
                k += 1;
            }
        };
        let xc = find(&self.x, &first, &mut self.budget)?;
        let yc = find(&self.y, &last, &mut self.budget)?;
        Ok((xc, yc))
    }

    /// Finds the next level: an arc chain through the current top with half
    /// the diameter exponent target, certified by the public checkers.
    fn search_level(&mut self) -> Result<()> {
        let lvl = self.levels.len();
        let prev = self.levels[lvl - 1].clone();
        let prev_links = prev.len();
        let prev_m = prev.link(0).m_exp().0;
        let need_de = (lvl as i64) - 1;
        let mut m = prev_m + 1;
        let dim = self.dim();
        loop {
            self.budget.charge("tower level")?;
            let (d, link_len, sep) = walk_schedule(&mut self.f, m, dim)?;
            let mut space = self.access.space(d, &mut self.budget)?;
            let tube = TubeIndex::new(&prev, d);
            let radius = DyadicExp(m);
            let xw = self.x.handle().approx(DyadicExp(d + 2))?;
            let yw = self.y.handle().approx(DyadicExp(d + 2))?;
            let starts = cells_containing_box(&xw, d);
            let targets: HashSet<Cell> = cells_containing_box(&yw, d).into_iter().collect();
            let confine = |w: &RationalBox| {
                tube.fits(&DilatedRegion::new(w.clone(), radius))
            };
            let walk = walk_beads(
                &mut space,
                &starts,
                |c| targets.contains(c),
                confine,
                Some((link_len, sep)),
                &mut self.budget,
            )?;
            let walk = match walk {
                Some(w) if w.cells.len() >= 2 * prev_links * link_len => w,
                _ => {
                    m += 1;
                    continue;
                }
            };
            let chain = assemble_arc_chain(&walk, &space, radius, link_len)?;
            if chain.len() < 2 * prev_links
                || need_de >= 0 && !chain_diam_lt(&chain, DyadicExp(need_de as u32))
            {
                m += 1;
                continue;
            }
            let map = match goes_straight_through(&chain, &prev) {
                Some(map) => map,
                None => {
                    m += 1;
                    continue;
                }
            };
            let de = measure_diam_exp(&chain, need_de);
            let fine = subdivide(&self.intervals[lvl - 1], &map)?;
            self.levels.push(chain);
            self.maps.push(map);
            self.intervals.push(fine);
            self.diam_exp.push(de);
            let (xc, yc) = self.endpoint_certs(lvl)?;
            self.x_certs.push(xc);
            self.y_certs.push(yc);
            return Ok(());
        }
    }

    /// The union level for precision `2^-k`: the first level whose certified
    /// diameter makes a two-link union's padded bounding box smaller than
    /// `2^-k`.
    fn eval_level(&mut self, k: DyadicExp) -> Result<usize> {
        let p = pad_order(self.dim()) as i64;
        self.materialize_diam(k.0 as i64 + p + 3)
    }

    /// The box around the union of regions of links whose intervals at level
    /// `q` meet `[lo, hi]`, padded by `δ`; `None` when more than two links
    /// are involved (parameter window still too wide).
    fn union_box(
        &self,
        q: usize,
        lo: &Rational,
        hi: &Rational,
        delta: &Rational,
    ) -> Option<RationalBox> {
        let ivs = &self.intervals[q];
        let a = ivs.partition_point(|iv| iv.hi() < lo);
        let b = ivs.partition_point(|iv| iv.lo() <= hi);
        if a >= b || b - a > 2 {
            return None;
        }
        let n = self.dim();
        let mut blo: Vec<Rational> = Vec::new();
        let mut bhi: Vec<Rational> = Vec::new();
        for i in a..b {
            for r in self.levels[q].v_regions(i) {
                let rad = r.radius.scale();
                for axis in 0..n {
                    let l = &r.base.lo()[axis] - &rad;
                    let h = &r.base.hi()[axis] + &rad;
                    if blo.len() <= axis {
                        blo.push(l);
                        bhi.push(h);
                    } else {
                        if l < blo[axis] {
                            blo[axis] = l;
                        }
                        if h > bhi[axis] {
                            bhi[axis] = h;
                        }
                    }
                }
            }
        }
        let lo_pad: Vec<Rational> = blo.iter().map(|v| v - delta).collect();
        let hi_pad: Vec<Rational> = bhi.iter().map(|v| v + delta).collect();
        Some(RationalBox::new(lo_pad, hi_pad).expect("region unions are nonempty"))
    }

    /// Exact evaluation at a rational parameter: the padded bounding box of
    /// the one or two links owning `t` at the precision-selected level.
    fn eval_at_rational(&mut self, t: &Rational, k: DyadicExp) -> Result<RationalBox> {
        if t < &Rational::zero() || t > &Rational::one() {
            return Err(Error::invalid("parameter", "outside [0, 1]"));
        }
        let q = self.eval_level(k)?;
        let delta = pow2_neg(k.0 + pad_order(self.dim()) + 3);
        Ok(self
            .union_box(q, t, t, &delta)
            .expect("a point meets at most two tiling intervals"))
    }
}

/// Evaluates the tower's limit parametrization at a named parameter:
/// returns a box of diameter `< 2^-k` containing `h(t)`.
///
/// The parameter window is pulled until it meets at most two adjacent
/// intervals of the selected level; the union of their links' regions then
/// has a bounding box below the target, padded to an open box so it contains
/// the limit point even on the boundary.
pub fn eval_tower(t: &mut ChainTower, tparam: &mut PointName, k: DyadicExp) -> Result<RationalBox> {
    if tparam.dim() != 1 {
        return Err(Error::invalid("parameter name", "must be one-dimensional"));
    }
    let q = t.eval_level(k)?;
    let delta = pow2_neg(k.0 + pad_order(t.dim()) + 3);
    loop {
        t.budget.charge("tower eval")?;
        let w = tparam.pull()?;
        let lo = w.lo()[0].clone().max(Rational::zero());
        let hi = w.hi()[0].clone().min(Rational::one());
        if lo > hi {
            return Err(Error::invalid("parameter name", "box disjoint from [0, 1]"));
        }
        if let Some(b) = t.union_box(q, &lo, &hi, &delta) {
            if b.diam_sq() < k.scale_sq() {
                return Ok(b);
            }
        }
    }
}

/// Subdivides each interval of the coarse family by its block length.
fn subdivide(coarse: &[ClosedInterval], map: &ThroughMap) -> Result<Vec<ClosedInterval>> {
    if coarse.len() != map.blocks() {
        return Err(Error::invalid("interval family", "map blocks must match the level"));
    }
    let mut out = Vec::new();
    for (i, parent) in coarse.iter().enumerate() {
        let d = map.block(i).len();
        for position in 1..=d {
            out.push(subinterval(parent, d, position)?);
        }
    }
    Ok(out)
}

/// Extracts a δ_C function name of the limit parametrization `h`.
///
/// `F_j` evaluates the tower at precision `2^-(j+2)` on a dyadic grid finer
/// than the interval family of the first level with certified diameter
/// `< 2^-(j+3)`: between adjacent grid points `h` then drifts less than
/// `2^-(j+2)`, so `d_max(F_j, h) ≤ 2^-(j+3) + 2^-(j+2) < 2^-(j+1)` and the
/// Cauchy condition `d_max(F_t, F_s) ≤ 2^-t` follows.
pub fn tower_to_name(t: ChainTower) -> FunctionName {
    let dim = t.dim();
    let mut tower = t;
    let mut j = 0usize;
    FunctionName::new(dim, move || {
        let share = tower.materialize_diam(j as i64 + 3)?;
        let minlen = tower.intervals[share]
            .iter()
            .map(ClosedInterval::len)
            .min()
            .expect("families are nonempty");
        let mut depth = 0u32;
        while pow2_neg(depth) >= minlen {
            depth += 1;
        }
        let prec = DyadicExp(j as u32 + 2);
        let steps = 1u64 << depth;
        let mut breakpoints = Vec::with_capacity(steps as usize + 1);
        let mut vertices = Vec::with_capacity(steps as usize + 1);
        for i in 0..=steps {
            let ti = Rational::new(BigInt::from(i), BigInt::one() << depth);
            let b = tower.eval_at_rational(&ti, prec)?;
            breakpoints.push(ti);
            vertices.push(b.center());
        }
        j += 1;
        PolygonalCurve::new(breakpoints, vertices)
    })
}

// ---------------------------------------------------------------------------
// Moduli of continuity.

/// A function name behind a lock, so the modulus computations and their
/// composition can pull approximants from one shared stream.
pub type SharedFunction = Arc<Mutex<FunctionName>>;

pub fn share_function(h: FunctionName) -> SharedFunction {
    Arc::new(Mutex::new(h))
}

/// A memoized modulus `k ↦ m(k)` with witnessed validity.
pub struct ModulusOfContinuity {
    map: MemoFn,
}

impl ModulusOfContinuity {
    pub fn eval(&mut self, k: u32) -> Result<u32> {
        self.map.eval(k)
    }
}

/// A modulus of continuity for the named `h`, from a shared handle: `m(k)`
/// is the least `m` with `2^-m · Λ' < 2^-(k+1)`, where `Λ'` is a dyadic
/// upper bound on the maximal slope of `F_{k+2}`.  Validity:
/// `d(h(s), h(t)) ≤ 2·2^-(k+2) + Λ'·|s−t| < 2^-k` when `|s−t| ≤ 2^-m(k)`.
pub fn modulus_of_shared(h: &SharedFunction) -> ModulusOfContinuity {
    let hh = Arc::clone(h);
    ModulusOfContinuity {
        map: MemoFn::new(move |k| {
            let mut name = hh.lock().expect("shared function poisoned");
            let lam = {
                let f = name.approximant(k as usize + 2)?;
                dyadic_sqrt_ub(&f.max_slope_sq(), k + 8)
            };
            let target = pow2_neg(k + 1);
            let mut m = 0u32;
            while &lam * pow2_neg(m) >= target {
                m += 1;
            }
            Ok(m)
        }),
    }
}

/// See [`modulus_of_shared`]; this wrapper owns the name.
pub fn modulus_of(h: FunctionName) -> ModulusOfContinuity {
    modulus_of_shared(&share_function(h))
}

/// Conservative float lower bound on the squared gap between two boxes given
/// per-axis `(lo_lb, lo_ub, hi_lb, hi_ub)` bounds.
fn gap_sq_lb(a: &[(f64, f64, f64, f64)], b: &[(f64, f64, f64, f64)]) -> f64 {
    let mut sum = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let g = (x.0 - y.3).max(y.0 - x.3).max(0.0);
        sum = (sum + (g * g).next_down()).next_down();
    }
    sum
}

/// Exact minimum of `|A(α) − B(β)|²` over `(α, β) ∈ [0,1]²` with
/// `tb0 + β·db − ta0 − α·da ≥ gap`; `None` when the region is empty.  The
/// minimum of the convex quadratic over the clipped polygon is attained at
/// the interior critical point or on an edge, both found exactly.
#[allow(clippy::too_many_arguments)]
fn min_pair_sq(
    a0: &RationalPoint,
    a1: &RationalPoint,
    b0: &RationalPoint,
    b1: &RationalPoint,
    ta0: &Rational,
    da: &Rational,
    tb0: &Rational,
    db: &Rational,
    gap: &Rational,
) -> Option<Rational> {
    let n = a0.dim();
    let u: Vec<Rational> = (0..n).map(|i| a1.coord(i) - a0.coord(i)).collect();
    let v: Vec<Rational> = (0..n).map(|i| b1.coord(i) - b0.coord(i)).collect();
    let w: Vec<Rational> = (0..n).map(|i| a0.coord(i) - b0.coord(i)).collect();
    let dot = |x: &[Rational], y: &[Rational]| -> Rational {
        x.iter().zip(y).map(|(p, q)| p * q).sum()
    };
    let c0 = gap - (tb0 - ta0);
    let inside = |al: &Rational, be: &Rational| -> bool { db * be - da * al >= c0 };
    // Clip the unit square by the half-plane.
    let square = [
        (Rational::zero(), Rational::zero()),
        (Rational::one(), Rational::zero()),
        (Rational::one(), Rational::one()),
        (Rational::zero(), Rational::one()),
    ];
    let mut poly: Vec<(Rational, Rational)> = Vec::new();
    for i in 0..4 {
        let p = &square[i];
        let q = &square[(i + 1) % 4];
        let pin = inside(&p.0, &p.1);
        let qin = inside(&q.0, &q.1);
        if pin {
            poly.push(p.clone());
        }
        if pin != qin {
            // The edge value of db·β − da·α is affine; solve for the crossing.
            let fp = db * &p.1 - da * &p.0;
            let fq = db * &q.1 - da * &q.0;
            let tau = (&c0 - &fp) / (&fq - &fp);
            poly.push((&p.0 + &tau * (&q.0 - &p.0), &p.1 + &tau * (&q.1 - &p.1)));
        }
    }
    if poly.is_empty() {
        return None;
    }
    let eval = |al: &Rational, be: &Rational| -> Rational {
        (0..n)
            .map(|i| {
                let c = &w[i] + al * &u[i] - be * &v[i];
                &c * &c
            })
            .sum()
    };
    let mut best: Option<Rational> = None;
    let mut consider = |val: Rational| {
        if best.as_ref().map(|b| &val < b).unwrap_or(true) {
            best = Some(val);
        }
    };
    // Interior critical point of the quadratic.
    let uu = dot(&u, &u);
    let vv = dot(&v, &v);
    let uv = dot(&u, &v);
    let uw = dot(&u, &w);
    let vw = dot(&v, &w);
    let det = &uu * &vv - &uv * &uv;
    if det.is_positive() {
        let al = (-&uw * &vv + &uv * &vw) / &det;
        let be = (&uu * &vw - &uv * &uw) / &det;
        let zero = Rational::zero();
        let one = Rational::one();
        if al >= zero && al <= one && be >= zero && be <= one && inside(&al, &be) {
            consider(eval(&al, &be));
        }
    }
    // Edge minima: one clamped 1D quadratic per polygon edge.
    let len = poly.len();
    for i in 0..len {
        let (p, q) = (&poly[i], &poly[(i + 1) % len]);
        let dal = &q.0 - &p.0;
        let dbe = &q.1 - &p.1;
        let c: Vec<Rational> =
            (0..n).map(|i2| &w[i2] + &p.0 * &u[i2] - &p.1 * &v[i2]).collect();
        let mvec: Vec<Rational> =
            (0..n).map(|i2| &dal * &u[i2] - &dbe * &v[i2]).collect();
        let mm = dot(&mvec, &mvec);
        let sigma = if mm.is_zero() {
            Rational::zero()
        } else {
            (-dot(&c, &mvec) / &mm).max(Rational::zero()).min(Rational::one())
        };
        let val: Rational = (0..n)
            .map(|i2| {
                let e = &c[i2] + &sigma * &mvec[i2];
                &e * &e
            })
            .sum();
        consider(val);
    }
    best
}

/// Exact minimum of `|F(s) − F(t)|²` over `t − s ≥ gap` for a polygonal
/// curve, by per-segment-pair quadratic minimization with a conservative
/// float screen.  `None` when no parameter pair is that far apart.
fn min_separation_sq(f: &PolygonalCurve, gap: &Rational, b: &mut Budget) -> Result<Option<Rational>> {
    let segs = f.vertices().len() - 1;
    let bp = f.breakpoints();
    let vs = f.vertices();
    let n = f.dim();
    // Per-segment conservative float bounding boxes.
    let bounds: Vec<Vec<(f64, f64, f64, f64)>> = (0..segs)
        .map(|i| {
            (0..n)
                .map(|a| {
                    let (l0, u0) = f64_bounds(vs[i].coord(a));
                    let (l1, u1) = f64_bounds(vs[i + 1].coord(a));
                    (l0.min(l1), u0.min(u1), l0.max(l1), u0.max(u1))
                })
                .collect()
        })
        .collect();
    let mut best: Option<Rational> = None;
    let mut best_ub = f64::INFINITY;
    for i in 0..segs {
        b.charge("separation scan")?;
        for j in i..segs {
            // Parameter pairs with t − s ≥ gap need the later segment to
            // reach at least `gap` beyond the earlier one's start.
            if &bp[j + 1] - &bp[i] < *gap {
                continue;
            }
            if best.is_some() && gap_sq_lb(&bounds[i], &bounds[j]) > best_ub {
                continue;
            }
            let da = &bp[i + 1] - &bp[i];
            let db = &bp[j + 1] - &bp[j];
            if let Some(val) = min_pair_sq(
                &vs[i], &vs[i + 1], &vs[j], &vs[j + 1], &bp[i], &da, &bp[j], &db, gap,
            ) {
                if best.as_ref().map(|b2| &val < b2).unwrap_or(true) {
                    best_ub = f64_bounds(&val).1;
                    best = Some(val);
                }
            }
        }
    }
    Ok(best)
}

/// An inverse modulus of continuity for an injective named curve, from a
/// shared handle: `m₁(k)` is the least `L` with `2^-L ≤ μ`, where `μ` is a
/// certified positive lower bound on `d(h(s), h(t))` over `|s−t| ≥ 2^-k`,
/// obtained by exact minimization on an approximant minus its slack; then
/// `d(h(s), h(t)) < 2^-m₁(k)` forces `|s−t| < 2^-k`.  Approximant levels are
/// raised until the bound is positive, so non-injective names exhaust the
/// budget instead of answering.
pub fn inverse_modulus_shared(h: &SharedFunction, b: Budget) -> ModulusOfContinuity {
    let hh = Arc::clone(h);
    let budget = Arc::new(Mutex::new(b));
    ModulusOfContinuity {
        map: MemoFn::new(move |k| {
            let mut name = hh.lock().expect("shared function poisoned");
            let mut bud = budget.lock().expect("budget lock poisoned");
            let gap = pow2_neg(k);
            let mut j = k as usize + 2;
            loop {
                bud.charge("inverse modulus")?;
                let min_sq = {
                    let f = name.approximant(j)?;
                    min_separation_sq(f, &gap, &mut bud)?
                };
                let min_sq = min_sq.ok_or_else(|| {
                    Error::invalid("inverse modulus", "no parameter pair is 2^-k apart")
                })?;
                let mu = dyadic_sqrt_lb(&min_sq, j as u32 + 6)
                    - rat_int(2) * pow2_neg(j as u32);
                if mu.is_positive() {
                    let mut level = 0u32;
                    while pow2_neg(level) > mu {
                        level += 1;
                    }
                    return Ok(level);
                }
                j += 1;
            }
        }),
    }
}

/// See [`inverse_modulus_shared`]; this wrapper owns the name.
pub fn inverse_modulus(h: FunctionName, b: Budget) -> ModulusOfContinuity {
    inverse_modulus_shared(&share_function(h), b)
}

/// A local connectivity function for the image of an arc parametrization:
/// `k ↦ m₁(m(k))`.  Points of the image within `2^-m₁(m(k))` have parameters
/// within `2^-m(k)`, and the parameter subarc between them stays within
/// `2^-k` of both ends.
pub fn lc_from_param(h: FunctionName, b: Budget) -> LcFunction {
    let shared = share_function(h);
    let mut m = modulus_of_shared(&shared);
    let mut m1 = inverse_modulus_shared(&shared, b);
    LcFunction::from_rule(
        move |k| {
            let mk = m.eval(k)?;
            m1.eval(mk)
        },
        Provenance::Analytic,
    )
}

/// A compact-set name of the image of the named curve.
///
/// Stage `j` covers the approximant `F_{j+1+pad_order(n)}` by hitting dyadic
/// windows, each padded by slightly more than the approximation slack `σ`:
/// points of the image are within `σ` of the approximant and land inside
/// some padded window (covering), while each kept window touches the
/// approximant at a parameter whose true curve point lies in the padded box
/// (minimality).  Depths are chosen so padded diameters stay below `2^-j`.
pub fn compact_from_param(h: FunctionName) -> CompactName {
    let dim = h.dim();
    let p = pad_order(dim);
    let mut name = h;
    let mut j = 0u32;
    CompactName::new(dim, move || {
        let t = (j + 1 + p) as usize;
        let f = name.approximant(t)?.clone();
        let sigma = pow2_neg(t as u32);
        let pad = &sigma * (Rational::one() + pow4_neg(p + 2));
        let npts = rat_int(dim as i64);
        let mut depth = 1u32;
        loop {
            let w = pow2_neg(depth - 1) + rat_int(2) * &pad;
            if &npts * &w * &w < pow4_neg(j) {
                break;
            }
            depth += 1;
        }
        let mut verts: Vec<RationalPoint> = Vec::new();
        for v in f.vertices() {
            if verts.last() != Some(v) {
                verts.push(v.clone());
            }
        }
        let poly = TestContinuum::path(verts)?;
        let windows = crate::catalog::hitting_windows(&poly, depth);
        j += 1;
        crate::names::Cover::new(windows.iter().map(|w| w.pad(&pad)).collect())
    })
}

// ---------------------------------------------------------------------------
// Endpoint recovery.

/// Round state shared by the two endpoint names: per refinement round, one
/// disjoint localizing box for each endpoint.
struct EndpointEngine {
    covers: CoverIndex,
    oracle: Option<TestContinuum>,
    f: LcFunction,
    budget: Budget,
    rounds: Vec<(RationalBox, RationalBox)>,
    next_k: u32,
}

/// A covering chain's localizer data: the closed bounding box of the union
/// of region closures near one chain end.
struct Localizer {
    lo: Vec<Rational>,
    hi: Vec<Rational>,
}

impl Localizer {
    fn diam_sq(&self) -> Rational {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| {
                let d = h - l;
                &d * &d
            })
            .sum()
    }

    fn within(&self, b: &RationalBox) -> bool {
        self.lo.iter().zip(b.lo()).all(|(v, c)| c <= v)
            && self.hi.iter().zip(b.hi()).all(|(v, c)| v <= c)
    }

    fn padded(&self, delta: &Rational) -> RationalBox {
        RationalBox::new(
            self.lo.iter().map(|v| v - delta).collect(),
            self.hi.iter().map(|v| v + delta).collect(),
        )
        .expect("localizers are nonempty")
    }
}

/// The union bounding box of link regions whose closed distance to the
/// terminal link `end` is below `2^-k`, tested exactly per box pair.
fn localizer(chain: &ArcChain, end: usize, k: u32) -> Localizer {
    let n = chain.dim();
    let end_link = chain.link(end);
    let r_end = end_link.m_exp().scale();
    let mut lo: Vec<Rational> = Vec::new();
    let mut hi: Vec<Rational> = Vec::new();
    for i in 0..chain.len() {
        let link = chain.link(i);
        let r_i = link.m_exp().scale();
        let reach = pow2_neg(k) + &r_end + &r_i;
        let reach_sq = &reach * &reach;
        let near = end_link.boxes().iter().any(|a| {
            link.boxes().iter().any(|c| box_gap_sq(a, c) < reach_sq)
        });
        if !near {
            continue;
        }
        for c in link.boxes() {
            for axis in 0..n {
                let l = &c.lo()[axis] - &r_i;
                let h = &c.hi()[axis] + &r_i;
                if lo.len() <= axis {
                    lo.push(l);
                    hi.push(h);
                } else {
                    if l < lo[axis] {
                        lo[axis] = l;
                    }
                    if h > hi[axis] {
                        hi[axis] = h;
                    }
                }
            }
        }
    }
    Localizer { lo, hi }
}

impl EndpointEngine {
    /// Breadth-first distances over certified beads from `seed`; returns the
    /// farthest bead, smallest in lexicographic order among ties.
    fn bfs_farthest(&mut self, space: &mut BeadSpace, seed: &Cell) -> Result<Cell> {
        let dirs = unit_dirs(space.dim);
        let mut dist: HashMap<Cell, u64> = HashMap::from([(seed.clone(), 0)]);
        let mut queue: VecDeque<Cell> = VecDeque::from([seed.clone()]);
        let mut far = (0u64, seed.clone());
        while let Some(cur) = queue.pop_front() {
            let d = dist[&cur];
            if d > far.0 || (d == far.0 && cur < far.1) {
                far = (d, cur.clone());
            }
            for dir in &dirs {
                let nb: Cell = cur.iter().zip(dir).map(|(a, s)| a + s).collect();
                if dist.contains_key(&nb) {
                    continue;
                }
                if space.bead(&nb, &mut self.budget)?.is_none() {
                    continue;
                }
                if space.edge(&cur, &nb, &mut self.budget)?.is_none() {
                    continue;
                }
                dist.insert(nb.clone(), d + 1);
                queue.push_back(nb);
            }
        }
        Ok(far.1)
    }

    /// A simple arc chain covering the set with diameter `< 2^-g`, found by
    /// a double-sweep walk between the two farthest beads.
    fn covering_chain(&mut self, g: u32) -> Result<ArcChain> {
        let dim = self.covers.dim();
        let mut m = g + 3;
        loop {
            self.budget.charge("covering chain")?;
            let (d, link_len, sep) = walk_schedule(&mut self.f, m, dim)?;
            let probe = probe_boxes(&mut self.covers, d, &mut self.budget)?;
            let mut space = BeadSpace::new(dim, d, self.oracle.clone(), probe.clone());
            // Deterministic seed: the first certified bead around the first
            // probe box's low corner.
            let anchor = RationalBox::new(probe[0].lo().to_vec(), probe[0].hi().to_vec())
                .expect("probe boxes are nonempty");
            let mut seed = None;
            for c in cells_containing_box(&anchor, d) {
                if space.bead(&c, &mut self.budget)?.is_some() {
                    seed = Some(c);
                    break;
                }
            }
            let seed = match seed {
                Some(s) => s,
                None => {
                    m += 1;
                    continue;
                }
            };
            let b1 = self.bfs_farthest(&mut space, &seed)?;
            let b2 = self.bfs_farthest(&mut space, &b1)?;
            let walk = walk_beads(
                &mut space,
                &[b1],
                |c| *c == b2,
                |_| true,
                Some((link_len, sep)),
                &mut self.budget,
            )?;
            let walk = match walk {
                Some(w) if w.cells.len() >= 2 * link_len => w,
                _ => {
                    m += 1;
                    continue;
                }
            };
            let chain = assemble_arc_chain(&walk, &space, DyadicExp(m), link_len)?;
            if !chain_diam_lt(&chain, DyadicExp(g)) {
                m += 1;
                continue;
            }
            // Covering certificate: every probe cover box certifiably inside
            // some region (max over box corners of the distance to the base
            // stays below the dilation radius).
            let mut regions: Vec<DilatedRegion> = Vec::new();
            for i in 0..chain.len() {
                regions.extend(chain.v_regions(i));
            }
            let tube = TubeIndex::new(&chain, d);
            let covered = probe.iter().all(|q| {
                let key: Cell = (0..dim)
                    .map(|a| {
                        rational_floor(&(&q.lo()[a] * pow2(d)))
                            .to_i64()
                            .expect("desk scale")
                            .div_euclid(tube.bucket_cells)
                    })
                    .collect();
                lex_product(&vec![(-1, 1); dim]).into_iter().any(|offset| {
                    let nb: Cell = key.iter().zip(&offset).map(|(a, s)| a + s).collect();
                    tube.buckets.get(&nb).is_some_and(|list| {
                        list.iter().any(|&ri| {
                            let reg = &tube.regions[ri];
                            let r_sq = reg.radius.scale_sq();
                            q.corners().iter().all(|corner| {
                                crate::geometry::point_box_gap_sq(corner, &reg.base) < r_sq
                            })
                        })
                    })
                })
            });
            if !covered {
                m += 1;
                continue;
            }
            let _ = regions;
            return Ok(chain);
        }
    }

    fn ensure_round(&mut self, i: usize) -> Result<()> {
        while self.rounds.len() <= i {
            self.advance()?;
        }
        Ok(())
    }

    /// Finds the next refinement round: a covering chain whose two terminal
    /// localizers are disjoint, consistent with the previous round's labels,
    /// and small per the stated tolerance.
    fn advance(&mut self) -> Result<()> {
        let n = self.covers.dim() as i64;
        loop {
            let k = self.next_k;
            self.next_k += 1;
            self.budget.charge("endpoint round")?;
            let g = crate::connectivity::ulac_from_lc_indexed(
                &mut self.covers,
                &mut self.f,
                k,
                &mut self.budget,
            )?;
            let chain = self.covering_chain(g)?;
            let t1 = localizer(&chain, 0, k);
            let t2 = localizer(&chain, chain.len() - 1, k);
            // Localizer tolerance: diam(T_j) < 2^(-k+3), tested in squared
            // form as diam² · 4^k < 64.
            let four_k = pow2(2 * k);
            if t1.diam_sq() * &four_k >= rat_int(64) || t2.diam_sq() * &four_k >= rat_int(64)
            {
                continue;
            }
            let delta = pow2_neg(k + 5);
            let r1 = t1.padded(&delta);
            let r2 = t2.padded(&delta);
            let gap = box_gap_sq(&r1, &r2);
            if !gap.is_positive() {
                continue;
            }
            // Initial separation per the proof constant √n·2^(-k+2) <
            // d(x,y)/2, in squared form 64n·4^-k < gap².
            if self.rounds.is_empty() && rat_int(64) * rat_int(n) >= &gap * &four_k {
                continue;
            }
            let (r1, r2) = match self.rounds.last() {
                None => (r1, r2),
                Some((p1, p2)) => {
                    if t1.within(p1) && t2.within(p2) {
                        (r1, r2)
                    } else if t1.within(p2) && t2.within(p1) {
                        (r2, r1)
                    } else {
                        continue;
                    }
                }
            };
            self.rounds.push((r1, r2));
            return Ok(());
        }
    }
}

/// Recovers the two endpoints of a named arc: per refinement round the
/// covering chain's terminal localizers yield disjoint boxes, one around
/// each endpoint; matched across rounds by containment, they form two point
/// names.
pub fn endpoints(a: CompactName, f: LcFunction, b: Budget) -> Result<(PointName, PointName)> {
    let dim = a.dim();
    let oracle = a.oracle().cloned();
    let engine = Arc::new(Mutex::new(EndpointEngine {
        covers: CoverIndex::new(a),
        oracle,
        f,
        budget: b,
        rounds: Vec::new(),
        next_k: 1,
    }));
    let make = |side: usize| -> PointName {
        let eng = Arc::clone(&engine);
        let mut i = 0usize;
        PointName::new(dim, move || {
            let mut e = eng.lock().expect("endpoint engine poisoned");
            e.ensure_round(i)?;
            let b = if side == 0 { e.rounds[i].0.clone() } else { e.rounds[i].1.clone() };
            i += 1;
            Ok(b)
        })
    };
    Ok((make(0), make(1)))
}

/// Forks a local connectivity function into two handles over one memo.
pub(crate) fn fork_lc(f: LcFunction) -> (LcFunction, LcFunction) {
    let provenance = f.provenance();
    let cell = Arc::new(Mutex::new(f));
    let mk = |cell: Arc<Mutex<LcFunction>>| {
        LcFunction::from_rule(
            move |k| cell.lock().expect("shared modulus poisoned").eval(k),
            provenance,
        )
    };
    (mk(Arc::clone(&cell)), mk(cell))
}

/// Parametrizes a named arc: recovers its endpoints, then runs the
/// arcwise-connectivity construction inside a bounding region of the set.
pub fn parametrize_arc(a: CompactName, f: LcFunction, b: Budget) -> Result<FunctionName> {
    let shared = SharedCompact::new(a);
    let (f_end, f_arc) = fork_lc(f);
    let half = b.remaining() / 2;
    let (x, y) = endpoints(shared.handle(), f_end, Budget::new(half))?;
    let mut probe = shared.handle();
    let first = probe.next_cover()?;
    let n = first.dim();
    let one = Rational::one();
    let mut lo: Vec<Rational> = first.boxes()[0].lo().to_vec();
    let mut hi: Vec<Rational> = first.boxes()[0].hi().to_vec();
    for bx in first.boxes() {
        for a2 in 0..n {
            if bx.lo()[a2] < lo[a2] {
                lo[a2] = bx.lo()[a2].clone();
            }
            if bx.hi()[a2] > hi[a2] {
                hi[a2] = bx.hi()[a2].clone();
            }
        }
    }
    let u = crate::connectivity::OpenRegion::new(vec![RationalBox::new(
        lo.iter().map(|v| v - &one).collect(),
        hi.iter().map(|v| v + &one).collect(),
    )?])?;
    crate::connectivity::ac_arc(shared.handle(), f_arc, u, x, y, Budget::new(b.remaining() - half))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::fixtures::{l_polyline, segment};
    use crate::catalog::{compact_name, lc_check_sampled};
    use crate::chains::{check_arc_chain, SetAccess};
    use crate::geometry::{dilations_intersect, dist_sq, rat};
    use crate::names::point_from_rational;

    fn pt2(x: (i64, i64), y: (i64, i64)) -> RationalPoint {
        RationalPoint::from_fracs(&[x, y])
    }

    fn iv(lo: (i64, i64), hi: (i64, i64)) -> ClosedInterval {
        ClosedInterval::new(rat(lo.0, lo.1), rat(hi.0, hi.1)).unwrap()
    }

    /// A witnessing chain of depth-3 beads along the segment at `m = 1`.
    fn seg_witness() -> WitnessingChain {
        let boxes: Vec<RationalBox> = (-1..=7)
            .map(|a| {
                RationalBox::from_fracs(&[(a, 8), (-1, 8)], &[(a + 2, 8), (1, 8)])
            })
            .collect();
        WitnessingChain::new(DyadicExp(1), boxes, Vec::new()).unwrap()
    }

    fn seg_tower(steps: u64) -> ChainTower {
        build_tower(
            compact_name(&segment()),
            LcFunction::identity(),
            seg_witness(),
            point_from_rational(&pt2((0, 1), (0, 1))),
            point_from_rational(&pt2((1, 1), (0, 1))),
            Budget::new(steps),
        )
        .unwrap()
    }

    /// A witnessing chain of depth-3 beads along the right-angle polyline
    /// (0,0)→(1,0)→(1,1) at `m = 1`.
    fn l_witness() -> WitnessingChain {
        let mut boxes: Vec<RationalBox> = (-1..=7)
            .map(|a| {
                RationalBox::from_fracs(&[(a, 8), (-1, 8)], &[(a + 2, 8), (1, 8)])
            })
            .collect();
        for bb in (0..=7).map(|a| {
            RationalBox::from_fracs(&[(7, 8), (a, 8)], &[(9, 8), (a + 2, 8)])
        }) {
            boxes.push(bb);
        }
        WitnessingChain::new(DyadicExp(1), boxes, Vec::new()).unwrap()
    }

    fn l_tower(steps: u64) -> ChainTower {
        build_tower(
            compact_name(&l_polyline()),
            LcFunction::identity(),
            l_witness(),
            point_from_rational(&pt2((0, 1), (0, 1))),
            point_from_rational(&pt2((1, 1), (1, 1))),
            Budget::new(steps),
        )
        .unwrap()
    }

    #[test]
    fn subinterval_examples() {
        let unit = iv((0, 1), (1, 1));
        assert_eq!(subinterval(&unit, 2, 1).unwrap(), iv((0, 1), (1, 2)));
        assert_eq!(subinterval(&unit, 3, 2).unwrap(), iv((1, 3), (2, 3)));
        let half = iv((1, 2), (3, 4));
        assert_eq!(subinterval(&half, 2, 2).unwrap(), iv((5, 8), (3, 4)));
        assert!(subinterval(&unit, 2, 0).is_err());
        assert!(subinterval(&unit, 2, 3).is_err());
    }

    #[test]
    fn tower_level_one_within_frozen_budget() {
        let mut t = seg_tower(1_000_000);
        t.materialize(1).unwrap();
        // Frozen schedule constant for the level-1 search on the segment.
        assert_eq!(t.steps_used(), 3597);
    }

    #[test]
    fn tower_levels_pass_invariant_checks() {
        let mut t = seg_tower(50_000_000);
        t.materialize(4).unwrap();
        let mut f = LcFunction::identity();
        let mut x = SetAccess::Oracle(segment());
        let mut b = Budget::new(10_000_000);
        for j in 1..=4usize {
            let chain = t.level(j).clone();
            assert!(check_arc_chain(&chain, &mut f, &mut x, &mut b).unwrap(), "level {j}");
            // Diameter strictly below 2^-(j-1).
            assert!(chain_diam_lt(&chain, DyadicExp((j - 1) as u32)));
            assert!(t.diam_exponent(j) >= (j - 1) as i64);
            // The stored map is exactly what the public search certifies.
            let again = goes_straight_through(&chain, t.level(j - 1)).unwrap();
            assert_eq!(&again, t.map(j - 1));
            // Endpoint certificates locate strictly inside the terminal
            // regions.
            let (r, s) = t.endpoint_boxes(j);
            assert!(chain
                .v_regions(0)
                .iter()
                .any(|v| locate_point(r, v) == PointLocation::Inside));
            assert!(chain
                .v_regions(chain.len() - 1)
                .iter()
                .any(|v| locate_point(s, v) == PointLocation::Inside));
        }
    }

    #[test]
    fn interval_family_tiles_and_nests() {
        let mut t = seg_tower(50_000_000);
        t.materialize(4).unwrap();
        let fam = t.interval_family();
        assert_eq!(fam.depth(), 5);
        for j in 0..=4usize {
            let ivs = fam.level(j);
            assert_eq!(ivs.len(), t.level(j).len());
            assert_eq!(ivs[0].lo(), &Rational::zero());
            assert_eq!(ivs[ivs.len() - 1].hi(), &Rational::one());
            for w in ivs.windows(2) {
                // Adjacent intervals share exactly one endpoint.
                assert_eq!(w[0].hi(), w[1].lo());
            }
        }
        // Nesting: each fine link's region closure certifies inside some
        // region of the coarse link owning its interval.
        for j in 0..4usize {
            let map = t.map(j);
            let fine = t.level(j + 1);
            let coarse = t.level(j);
            for i2 in 0..coarse.len() {
                for i1 in map.block(i2) {
                    let cr = coarse.v_regions(i2);
                    for v in fine.v_regions(i1) {
                        assert!(cr.iter().any(|s| closure_dilation_in_dilation(&v, s)));
                    }
                }
            }
        }
    }

    #[test]
    fn confining_unions_shrink_and_separate() {
        let mut t = seg_tower(50_000_000);
        t.materialize(4).unwrap();
        // Shrinkage: for sampled dyadic t, the union of regions of the one
        // or two intervals containing t at level j has diameter below
        // 2^(2-j): two overlapping links, each certified under 2^(1-j).
        for j in 1..=4usize {
            let ivs = t.intervals(j);
            for num in 0..=16i64 {
                let tt = rat(num, 16);
                let owners: Vec<usize> = (0..ivs.len())
                    .filter(|&i| ivs[i].contains(&tt))
                    .collect();
                assert!(!owners.is_empty() && owners.len() <= 2);
                let regions: Vec<DilatedRegion> = owners
                    .iter()
                    .flat_map(|&i| t.level(j).v_regions(i))
                    .collect();
                let bound = pow2_neg(j as u32 - 1) * rat_int(2);
                for a in &regions {
                    for bx in &regions {
                        let span = crate::geometry::box_span_sq(&a.base, &bx.base);
                        let reach = a.radius.scale() + bx.radius.scale();
                        // span + radii < bound ⟺ span² < (bound − radii)².
                        let slack = &bound - &reach;
                        assert!(slack.is_positive());
                        assert!(span < &slack * &slack);
                    }
                }
            }
        }
        // Injectivity at grid scale: intervals three apart confine to
        // disjoint unions, and on the segment the evaluation boxes separate.
        let q = 3usize;
        let ivs = t.intervals(q).to_vec();
        let minlen = ivs.iter().map(ClosedInterval::len).min().unwrap();
        let three = rat_int(3);
        for i in (0..ivs.len().saturating_sub(3)).step_by(2) {
            let s = (ivs[i].lo() + ivs[i].hi()) * rat(1, 2);
            let u = (ivs[i + 3].lo() + ivs[i + 3].hi()) * rat(1, 2);
            assert!(&u - &s >= &three * &minlen);
            let rs: Vec<DilatedRegion> = t.level(q).v_regions(i);
            let ru: Vec<DilatedRegion> = t.level(q).v_regions(i + 3);
            for a in &rs {
                for b in &ru {
                    assert!(!dilations_intersect(a, b));
                }
            }
            let prec = DyadicExp((q as u32) - 1);
            let bs = t.eval_at_rational(&s, prec).unwrap();
            let bu = t.eval_at_rational(&u, prec).unwrap();
            assert!(box_gap_sq(&bs, &bu).is_positive(), "interval {i}");
        }
    }

    #[test]
    fn eval_tower_examples() {
        let mut t = seg_tower(50_000_000);
        let x = pt2((0, 1), (0, 1));
        let y = pt2((1, 1), (0, 1));
        let mut t0 = point_from_rational(&RationalPoint::from_fracs(&[(0, 1)]));
        let b0 = eval_tower(&mut t, &mut t0, DyadicExp(2)).unwrap();
        assert!(b0.contains_point(&x));
        assert!(b0.diam_sq() < DyadicExp(2).scale_sq());
        let mut t1 = point_from_rational(&RationalPoint::from_fracs(&[(1, 1)]));
        let b1 = eval_tower(&mut t, &mut t1, DyadicExp(2)).unwrap();
        assert!(b1.contains_point(&y));
        let mut tm = point_from_rational(&RationalPoint::from_fracs(&[(1, 2)]));
        let bm = eval_tower(&mut t, &mut tm, DyadicExp(3)).unwrap();
        assert!(bm.diam_sq() < DyadicExp(3).scale_sq());
        // The mid box touches the segment (exact oracle).
        assert!(segment().box_hits_set(&bm));
    }

    #[test]
    fn tower_name_is_cauchy_and_close() {
        let t = seg_tower(200_000_000);
        let mut h = tower_to_name(t);
        assert!(h.check_cauchy_prefix(4).unwrap());
        let truth = PolygonalCurve::segment(pt2((0, 1), (0, 1)), pt2((1, 1), (0, 1)));
        let f3 = h.approximant(3).unwrap();
        assert!(crate::names::polyline_hausdorff_lt(f3, &truth, &rat(1, 4)));
        // F_j(0) lies within 2^-(j+1) of x.
        let x = pt2((0, 1), (0, 1));
        for j in 0..=4usize {
            let v = h.approximant(j).unwrap().eval(&Rational::zero()).unwrap();
            assert!(dist_sq(&v, &x) < pow4_neg(j as u32 + 1));
        }
    }

    #[test]
    fn modulus_examples() {
        // Constant curve: m(k) = 0 for all k.
        let c = PolygonalCurve::new(
            vec![Rational::zero(), Rational::one()],
            vec![pt2((1, 4), (1, 4)), pt2((1, 4), (1, 4))],
        )
        .unwrap();
        let mut m = modulus_of(FunctionName::constant_stream(c));
        for k in 0..5 {
            assert_eq!(m.eval(k).unwrap(), 0);
        }
        // Slope 1: the slope rule yields the least m with 2^-m · 1 < 2^-(k+1),
        // namely m = k + 2; the defining inequality holds there and fails at
        // k + 1, while |s−t| ≤ 2^-(k+1) ⟹ d(h(s),h(t)) = |s−t| < 2^-k shows
        // k + 1 is also semantically valid for this curve.
        let line = PolygonalCurve::segment(pt2((0, 1), (0, 1)), pt2((1, 1), (0, 1)));
        let mut m1 = modulus_of(FunctionName::constant_stream(line.clone()));
        for k in 0..4 {
            let mk = m1.eval(k).unwrap();
            assert_eq!(mk, k + 2);
            let lam_sq = line.max_slope_sq();
            assert!(&lam_sq * pow4_neg(mk) < pow4_neg(k + 1));
            assert!(&lam_sq * pow4_neg(k + 1) >= pow4_neg(k + 1));
            assert!(pow2_neg(k + 1) < pow2_neg(k));
        }
        // Double speed: 2^-m(k) · 2 < 2^-(k+1) forces m(k) ≥ k + 2.
        let fast = PolygonalCurve::new(
            vec![Rational::zero(), rat(1, 2), Rational::one()],
            vec![pt2((0, 1), (0, 1)), pt2((1, 1), (0, 1)), pt2((1, 1), (1, 1))],
        )
        .unwrap();
        let mut m2 = modulus_of(FunctionName::constant_stream(fast.clone()));
        for k in 0..4 {
            let mk = m2.eval(k).unwrap();
            assert!(mk >= k + 2);
            assert!(fast.max_slope_sq() * pow4_neg(mk) < pow4_neg(k + 1));
        }
    }

    #[test]
    fn separation_minimum_exact() {
        // Straight line at unit speed: minimum over |s−t| ≥ 2^-k is (2^-k)².
        let line = PolygonalCurve::segment(pt2((0, 1), (0, 1)), pt2((1, 1), (0, 1)));
        let mut b = Budget::new(1_000_000);
        for k in 0..4u32 {
            let got = min_separation_sq(&line, &pow2_neg(k), &mut b).unwrap().unwrap();
            assert_eq!(got, pow4_neg(k));
        }
        // Diagonal at speed √2: minimum is 2 · 4^-k.
        let diag = PolygonalCurve::segment(pt2((0, 1), (0, 1)), pt2((1, 1), (1, 1)));
        for k in 1..4u32 {
            let got = min_separation_sq(&diag, &pow2_neg(k), &mut b).unwrap().unwrap();
            assert_eq!(got, rat_int(2) * pow4_neg(k));
        }
        // Two-piece curve: the minimum straddles pieces.
        let bent = PolygonalCurve::new(
            vec![Rational::zero(), rat(1, 2), Rational::one()],
            vec![pt2((0, 1), (0, 1)), pt2((1, 2), (0, 1)), pt2((1, 2), (1, 2))],
        )
        .unwrap();
        let got = min_separation_sq(&bent, &rat(1, 4), &mut b).unwrap().unwrap();
        // Pairs (s, s + 1/4): both on one leg give 1/16; straddling gives
        // a²+b² with a+b = speed·|s−t|; the corner pair (s, t) around 1/2
        // attains (1/8)² + (1/8)² = 1/32.
        assert_eq!(got, rat(1, 32));
    }

    #[test]
    fn inverse_modulus_examples() {
        let line = PolygonalCurve::segment(pt2((0, 1), (0, 1)), pt2((1, 1), (0, 1)));
        let mut m1 = inverse_modulus(
            FunctionName::constant_stream(line),
            Budget::new(1_000_000),
        );
        for k in 1..4u32 {
            let l = m1.eval(k).unwrap();
            assert!(l >= k, "k={k} gave {l}");
            // Validity: separation at parameter distance ≥ 2^-k is exactly
            // 2^-k ≥ 2^-L.
            assert!(pow2_neg(l) <= pow2_neg(k));
        }
        // Retracing curve is not injective: never certifies, budget dies.
        let retrace = PolygonalCurve::new(
            vec![Rational::zero(), rat(1, 2), Rational::one()],
            vec![pt2((0, 1), (0, 1)), pt2((1, 1), (0, 1)), pt2((0, 1), (0, 1))],
        )
        .unwrap();
        let mut bad = inverse_modulus(
            FunctionName::constant_stream(retrace),
            Budget::new(5_000),
        );
        assert!(matches!(bad.eval(2), Err(Error::BudgetExhausted { .. })));
    }

    #[test]
    fn lc_from_param_passes_verifier() {
        // Unit-speed segment parametrization.
        let line = PolygonalCurve::segment(pt2((0, 1), (0, 1)), pt2((1, 1), (0, 1)));
        let mut f = lc_from_param(
            FunctionName::constant_stream(line),
            Budget::new(10_000_000),
        );
        let samples = segment().sample_connected(9).unwrap();
        for k in 1..=3u32 {
            let fk = f.eval(k).unwrap();
            assert!(fk >= k);
            assert!(lc_check_sampled(&samples, k, fk).unwrap());
        }
        // Monotone after monotonize.
        let line2 = PolygonalCurve::segment(pt2((0, 1), (0, 1)), pt2((1, 1), (0, 1)));
        let mut g = lc_from_param(
            FunctionName::constant_stream(line2),
            Budget::new(10_000_000),
        )
        .monotonized();
        let mut prev = 0;
        for k in 0..5 {
            let v = g.eval(k).unwrap();
            assert!(v >= prev && v >= k);
            prev = v;
        }
        // Double-speed right-angle parametrization of the L-polyline.
        let fast = PolygonalCurve::new(
            vec![Rational::zero(), rat(1, 2), Rational::one()],
            vec![pt2((0, 1), (0, 1)), pt2((1, 1), (0, 1)), pt2((1, 1), (1, 1))],
        )
        .unwrap();
        let mut fl = lc_from_param(
            FunctionName::constant_stream(fast),
            Budget::new(10_000_000),
        );
        let lsamples = l_polyline().sample_connected(9).unwrap();
        for k in 1..=2u32 {
            let fk = fl.eval(k).unwrap();
            assert!(lc_check_sampled(&lsamples, k, fk).unwrap());
        }
    }

    #[test]
    fn compact_from_param_contract() {
        let line = PolygonalCurve::segment(pt2((0, 1), (0, 1)), pt2((1, 1), (0, 1)));
        let mut name = compact_from_param(FunctionName::constant_stream(line));
        let truth = segment();
        for stage in 0..5usize {
            let cover = name.next_cover().unwrap();
            assert!(truth.covers_set(&cover), "stage {stage}");
            for bx in cover.boxes() {
                // Minimality: each padded box contains a point of the image.
                assert!(truth.box_hits_set(bx), "stage {stage}");
            }
            if stage >= 3 {
                assert!(cover.all_diam_lt(DyadicExp(3)));
            }
        }
    }

    #[test]
    fn endpoints_of_segment() {
        let (mut x, mut y) = endpoints(
            compact_name(&segment()),
            LcFunction::identity(),
            Budget::new(100_000_000),
        )
        .unwrap();
        let a = pt2((0, 1), (0, 1));
        let b = pt2((1, 1), (0, 1));
        let mut last = Vec::new();
        for _ in 0..7 {
            let bx = x.pull().unwrap();
            let by = y.pull().unwrap();
            assert!(box_gap_sq(&bx, &by).is_positive());
            last = vec![bx, by];
        }
        // Within 2^-4 of the true endpoints, in either order.
        let tol = pow4_neg(4);
        let spans = |bx: &RationalBox, p: &RationalPoint| {
            crate::geometry::point_box_span_sq(p, bx) <= tol
        };
        assert!(
            (spans(&last[0], &a) && spans(&last[1], &b))
                || (spans(&last[0], &b) && spans(&last[1], &a))
        );
    }

    #[test]
    fn endpoints_of_l_polyline() {
        let (mut x, mut y) = endpoints(
            compact_name(&l_polyline()),
            LcFunction::identity(),
            Budget::new(100_000_000),
        )
        .unwrap();
        let a = pt2((0, 1), (0, 1));
        let b = pt2((1, 1), (1, 1));
        let mut last = Vec::new();
        for _ in 0..6 {
            let bx = x.pull().unwrap();
            let by = y.pull().unwrap();
            assert!(box_gap_sq(&bx, &by).is_positive());
            last = vec![bx, by];
        }
        let tol = pow4_neg(3);
        let spans = |bx: &RationalBox, p: &RationalPoint| {
            crate::geometry::point_box_span_sq(p, bx) <= tol
        };
        assert!(
            (spans(&last[0], &a) && spans(&last[1], &b))
                || (spans(&last[0], &b) && spans(&last[1], &a))
        );
    }

    #[test]
    fn l_tower_name_reaches_both_legs() {
        let t = l_tower(200_000_000);
        let mut h = tower_to_name(t);
        assert!(h.check_cauchy_prefix(3).unwrap());
        let truth = PolygonalCurve::new(
            vec![Rational::zero(), rat(1, 2), Rational::one()],
            vec![pt2((0, 1), (0, 1)), pt2((1, 1), (0, 1)), pt2((1, 1), (1, 1))],
        )
        .unwrap();
        let f3 = h.approximant(3).unwrap();
        assert!(crate::names::polyline_hausdorff_lt(f3, &truth, &rat(1, 4)));
    }
}
