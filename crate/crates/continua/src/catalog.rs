//! Analytically exact test continua and local connectivity derivation.
//!
//! A [`TestContinuum`] is a compact connected subset of the plane or line
//! given in closed form: a polyline graph, a union of closed boxes, or a
//! circle.  Box intersection, covering, and distance comparisons are all
//! decided exactly, so these sets serve both as oracles behind compact-set
//! names and as ground truth in tests.
//!
//! Circles need care: their points have irrational coordinates, so all
//! circle predicates are decided on squared quantities and on cut points
//! `(line, c ± √D)` represented by the rational data `(line, sign, D)`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::collections::VecDeque;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exec::map_batch;
use crate::geometry::{
    box_gap_sq, dist_sq, dyadic_sqrt_ub, point_box_gap_sq, point_box_span_sq,
    point_segment_dist_sq, pow2, pow2_neg, rat_int, rational_ceil, rational_floor, Rational,
    RationalBox, RationalPoint,
};
use crate::memo::{monotonized, MemoFn};
use crate::names::{dyadic_window, Cover, PolygonalCurve};

/// How an [`LcFunction`] was obtained.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Provenance {
    /// Justified by a closed-form argument (convexity, chord geometry).
    Analytic,
    /// Produced by the sampled brute-force search over a test continuum.
    BruteForced,
}

/// A local connectivity function `k ↦ f(k)`: the set intersected with the
/// ball `B_{2^-f(k)}(p)` lies in the component of `p` inside
/// `B_{2^-k}(p)`, for every point `p` of the set.
pub struct LcFunction {
    f: MemoFn,
    provenance: Provenance,
}

impl std::fmt::Debug for LcFunction {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("LcFunction").field("provenance", &self.provenance).finish_non_exhaustive()
    }
}

impl LcFunction {
    /// The identity function, valid for convex sets and circles.
    pub fn identity() -> Self {
        LcFunction { f: MemoFn::identity(), provenance: Provenance::Analytic }
    }

    /// Wraps an explicit closed form, trusted by the caller.
    pub fn from_formula(f: impl Fn(u32) -> u32 + Send + 'static) -> Self {
        LcFunction { f: MemoFn::from_formula(f), provenance: Provenance::Analytic }
    }

    /// Pins an initial segment from a table, extended by `+1` per step.
    pub fn from_table(table: Vec<u32>, provenance: Provenance) -> Self {
        LcFunction { f: MemoFn::from_table(table), provenance }
    }

    /// Rewraps with a caller-supplied memo rule.
    pub fn from_rule(
        rule: impl FnMut(u32) -> Result<u32> + Send + 'static,
        provenance: Provenance,
    ) -> Self {
        LcFunction { f: MemoFn::new(rule), provenance }
    }

    /// Brute-forces a table for `k ≤ 6` on a test continuum and extends it by
    /// `+1` per step beyond.  The extension is sound for these polyhedral
    /// catalogs: below the feature scale every neighborhood is a segment or a
    /// corner, where the required offset `f(k) − k` is scale invariant.
    pub fn derived(x: &TestContinuum, depth: u32) -> Result<Self> {
        if x.is_convex() || matches!(x.variant(), Variant::Circle { .. }) {
            return Ok(Self::identity());
        }
        let samples = x.sample_connected(depth)?;
        let mut table = Vec::new();
        for k in 0..=6u32 {
            table.push(derive_lc_sampled(&samples, k, depth)?);
        }
        Ok(LcFunction {
            f: monotonized(MemoFn::from_table(table)),
            provenance: Provenance::BruteForced,
        })
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Evaluates `f(k)`.
    pub fn eval(&mut self, k: u32) -> Result<u32> {
        self.f.eval(k)
    }

    /// Consumes and rewraps as `k ↦ max(f(0), …, f(k), k)`.
    pub fn monotonized(self) -> Self {
        LcFunction { f: monotonized(self.f), provenance: self.provenance }
    }

    /// Largest `m` with `f(m) ≤ bound`, if any.
    pub fn last_arg_with_value_at_most(&mut self, bound: u32) -> Result<Option<u32>> {
        self.f.last_arg_with_value_at_most(bound)
    }
}

/// The shape data of a test continuum.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Variant {
    /// A connected graph of straight segments between rational vertices.
    Polyline { vertices: Vec<RationalPoint>, edges: Vec<(usize, usize)> },
    /// A connected union of closed rational boxes.
    BoxGrid { boxes: Vec<RationalBox> },
    /// The circle of rational center and rational radius (dimension 2).
    Circle { center: RationalPoint, radius: Rational },
}

/// An exactly represented compact connected set with decidable predicates.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TestContinuum {
    variant: Variant,
    bounding: RationalBox,
}

impl TestContinuum {
    /// A polyline graph.  Validates nonemptiness, equal dimensions, edge
    /// sanity (valid indices, no self-loops, distinct endpoints), and
    /// connectivity.
    pub fn polyline(vertices: Vec<RationalPoint>, edges: Vec<(usize, usize)>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::invalid("polyline", "needs at least one vertex"));
        }
        let d = vertices[0].dim();
        if vertices.iter().any(|v| v.dim() != d) {
            return Err(Error::invalid("polyline", "vertices must share one dimension"));
        }
        if vertices.len() > 1 && edges.is_empty() {
            return Err(Error::invalid("polyline", "multiple vertices need edges"));
        }
        for &(u, v) in &edges {
            if u >= vertices.len() || v >= vertices.len() {
                return Err(Error::invalid("polyline", "edge index out of range"));
            }
            if u == v || vertices[u] == vertices[v] {
                return Err(Error::invalid("polyline", "edges need distinct endpoints"));
            }
        }
        // Connectivity over the vertex graph.
        let mut seen = vec![false; vertices.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &(a, b) in &edges {
                for (from, to) in [(a, b), (b, a)] {
                    if from == u && !seen[to] {
                        seen[to] = true;
                        queue.push_back(to);
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::invalid("polyline", "graph is not connected"));
        }
        let bounding = bounding_of_points(&vertices);
        Ok(TestContinuum { variant: Variant::Polyline { vertices, edges }, bounding })
    }

    /// A polyline visiting the vertices in order.
    pub fn path(vertices: Vec<RationalPoint>) -> Result<Self> {
        let edges = (1..vertices.len()).map(|i| (i - 1, i)).collect();
        Self::polyline(vertices, edges)
    }

    /// A connected union of closed boxes.  Adjacency means intersecting
    /// closures.
    pub fn boxgrid(boxes: Vec<RationalBox>) -> Result<Self> {
        if boxes.is_empty() {
            return Err(Error::invalid("boxgrid", "needs at least one box"));
        }
        let d = boxes[0].dim();
        if boxes.iter().any(|b| b.dim() != d) {
            return Err(Error::invalid("boxgrid", "boxes must share one dimension"));
        }
        let mut seen = vec![false; boxes.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(i) = queue.pop_front() {
            for j in 0..boxes.len() {
                if !seen[j] && box_gap_sq(&boxes[i], &boxes[j]).is_zero() {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::invalid("boxgrid", "union is not connected"));
        }
        let mut corners = Vec::new();
        for b in &boxes {
            corners.push(RationalPoint::new(b.lo().to_vec()));
            corners.push(RationalPoint::new(b.hi().to_vec()));
        }
        let bounding = bounding_of_points(&corners);
        Ok(TestContinuum { variant: Variant::BoxGrid { boxes }, bounding })
    }

    /// The circle of given center and radius in the plane.
    pub fn circle(center: RationalPoint, radius: Rational) -> Result<Self> {
        if center.dim() != 2 {
            return Err(Error::invalid("circle", "center must be two-dimensional"));
        }
        if !radius.is_positive() {
            return Err(Error::invalid("circle", "radius must be positive"));
        }
        let corners = vec![
            RationalPoint::new(vec![center.coord(0) - &radius, center.coord(1) - &radius]),
            RationalPoint::new(vec![center.coord(0) + &radius, center.coord(1) + &radius]),
        ];
        let bounding = bounding_of_points(&corners);
        Ok(TestContinuum { variant: Variant::Circle { center, radius }, bounding })
    }

    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    pub fn dim(&self) -> usize {
        match &self.variant {
            Variant::Polyline { vertices, .. } => vertices[0].dim(),
            Variant::BoxGrid { boxes } => boxes[0].dim(),
            Variant::Circle { .. } => 2,
        }
    }

    /// The declared bounding box all name constructors enumerate within: the
    /// coordinate extent of the set padded by 1.
    pub fn bounding_box(&self) -> &RationalBox {
        &self.bounding
    }

    /// True for sets that are convex, where ball intersections are connected
    /// and the identity is a valid LC function.
    pub fn is_convex(&self) -> bool {
        match &self.variant {
            Variant::Polyline { vertices, .. } => vertices.len() <= 2,
            Variant::BoxGrid { boxes } => boxes.len() == 1,
            Variant::Circle { .. } => false,
        }
    }

    /// Decides `R ∩ X ≠ ∅` exactly for an open box `R`.
    pub fn box_hits_set(&self, r: &RationalBox) -> bool {
        assert_eq!(self.dim(), r.dim(), "dimension mismatch");
        match &self.variant {
            Variant::Polyline { vertices, edges } => {
                if vertices.len() == 1 {
                    return r.contains_point(&vertices[0]);
                }
                edges
                    .iter()
                    .any(|&(u, v)| segment_meets_open_box(&vertices[u], &vertices[v], r))
            }
            Variant::BoxGrid { boxes } => boxes.iter().any(|b| closed_meets_open(b, r)),
            Variant::Circle { center, radius } => {
                // The distance to the center ranges over an interval dense in
                // [gap, span] on the open box, so the circle meets the box
                // exactly when gap < radius < span, strictly.
                let r_sq = radius * radius;
                point_box_gap_sq(center, r) < r_sq && r_sq < point_box_span_sq(center, r)
            }
        }
    }

    /// Decides `X ⊆ ⋃ C` exactly for a cover of open boxes.
    pub fn covers_set(&self, c: &Cover) -> bool {
        assert_eq!(self.dim(), c.dim(), "dimension mismatch");
        match &self.variant {
            Variant::Polyline { vertices, edges } => {
                if vertices.len() == 1 {
                    return c.boxes().iter().any(|b| b.contains_point(&vertices[0]));
                }
                edges
                    .iter()
                    .all(|&(u, v)| segment_covered(&vertices[u], &vertices[v], c.boxes()))
            }
            Variant::BoxGrid { boxes } => boxes
                .iter()
                .all(|b| crate::geometry::closed_box_covered(b.lo(), b.hi(), c.boxes())),
            Variant::Circle { center, radius } => circle_covered(center, radius, c.boxes()),
        }
    }

    /// Exact squared distance to the set; `None` for circles, whose distance
    /// is irrational (use [`TestContinuum::dist_sq_cmp`] there).
    pub fn dist_to_set_sq(&self, p: &RationalPoint) -> Option<Rational> {
        assert_eq!(self.dim(), p.dim(), "dimension mismatch");
        match &self.variant {
            Variant::Polyline { vertices, edges } => Some(if vertices.len() == 1 {
                dist_sq(p, &vertices[0])
            } else {
                edges
                    .iter()
                    .map(|&(u, v)| point_segment_dist_sq(p, &vertices[u], &vertices[v]))
                    .min()
                    .expect("polyline has edges")
            }),
            Variant::BoxGrid { boxes } => {
                boxes.iter().map(|b| point_box_gap_sq(p, b)).min()
            }
            Variant::Circle { .. } => None,
        }
    }

    /// Exactly compares `d(p, X)²` with a rational threshold.
    pub fn dist_sq_cmp(&self, p: &RationalPoint, threshold_sq: &Rational) -> Ordering {
        assert!(!threshold_sq.is_negative(), "squared threshold must be nonnegative");
        match &self.variant {
            Variant::Circle { center, radius } => {
                // |√D − r|² vs s  ⟺  D + r² − s vs 2r√D, squared once the
                // left side is known nonnegative.
                let d = dist_sq(p, center);
                let r_sq = radius * radius;
                let lhs = &d + &r_sq - threshold_sq;
                if lhs.is_negative() {
                    return Ordering::Less;
                }
                (&lhs * &lhs).cmp(&(rat_int(4) * &r_sq * &d))
            }
            _ => self
                .dist_to_set_sq(p)
                .expect("non-circle variants have rational distance")
                .cmp(threshold_sq),
        }
    }

    /// Exact membership of a rational point.
    pub fn contains_point(&self, p: &RationalPoint) -> bool {
        self.dist_sq_cmp(p, &Rational::zero()) == Ordering::Equal
    }

    /// A `2^-depth`-dense rational sample of the set together with an
    /// adjacency relation whose edges certify connections inside the set:
    /// consecutive samples along a polyline edge, or axis neighbors inside
    /// one closed box; coincident sample points are merged.  Circles are not
    /// sampled (their points are irrational).
    pub fn sample_connected(&self, depth: u32) -> Result<SampledSet> {
        let step = pow2_neg(depth);
        let mut points: Vec<RationalPoint> = Vec::new();
        let mut index: BTreeMap<Vec<Rational>, usize> = BTreeMap::new();
        let mut adjacency: Vec<Vec<usize>> = Vec::new();
        let mut intern = |p: RationalPoint, adjacency: &mut Vec<Vec<usize>>| -> usize {
            let key = p.coords().to_vec();
            if let Some(&i) = index.get(&key) {
                return i;
            }
            let i = points.len();
            index.insert(key, i);
            points.push(p);
            adjacency.push(Vec::new());
            i
        };
        let connect = |a: usize, b: usize, adjacency: &mut Vec<Vec<usize>>| {
            if a != b && !adjacency[a].contains(&b) {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        };
        match &self.variant {
            Variant::Polyline { vertices, edges } => {
                if vertices.len() == 1 {
                    intern(vertices[0].clone(), &mut adjacency);
                }
                for &(u, v) in edges {
                    let (a, b) = (&vertices[u], &vertices[v]);
                    let len_ub = dyadic_sqrt_ub(&dist_sq(a, b), depth + 4);
                    let m = rational_ceil(&(len_ub / &step))
                        .max(BigInt::one())
                        .to_u64()
                        .ok_or_else(|| Error::invalid("sampling", "edge too long for depth"))?;
                    let mut prev: Option<usize> = None;
                    for i in 0..=m {
                        let lambda = Rational::new(BigInt::from(i), BigInt::from(m));
                        let p = RationalPoint::new(
                            (0..a.dim())
                                .map(|c| a.coord(c) + &lambda * (b.coord(c) - a.coord(c)))
                                .collect(),
                        );
                        let id = intern(p, &mut adjacency);
                        if let Some(prev) = prev {
                            connect(prev, id, &mut adjacency);
                        }
                        prev = Some(id);
                    }
                }
            }
            Variant::BoxGrid { boxes } => {
                for b in boxes {
                    let n = b.dim();
                    let counts: Vec<u64> = (0..n)
                        .map(|i| {
                            rational_ceil(&(b.side(i) / &step))
                                .max(BigInt::one())
                                .to_u64()
                                .ok_or_else(|| Error::invalid("sampling", "box too large for depth"))
                        })
                        .collect::<Result<_>>()?;
                    // Multi-index walk over the grid of this box.
                    let total: u64 = counts.iter().map(|c| c + 1).product();
                    let mut ids = vec![0usize; total as usize];
                    let mut strides = vec![1u64; n];
                    for i in 1..n {
                        strides[i] = strides[i - 1] * (counts[i - 1] + 1);
                    }
                    for flat in 0..total {
                        let mut rem = flat;
                        let mut coords = Vec::with_capacity(n);
                        let mut multi = Vec::with_capacity(n);
                        for i in 0..n {
                            let ci = rem % (counts[i] + 1);
                            rem /= counts[i] + 1;
                            multi.push(ci);
                            let lambda = Rational::new(BigInt::from(ci), BigInt::from(counts[i]));
                            coords.push(&b.lo()[i] + lambda * b.side(i));
                        }
                        let id = intern(RationalPoint::new(coords), &mut adjacency);
                        ids[flat as usize] = id;
                        for i in 0..n {
                            if multi[i] > 0 {
                                let neighbor = ids[(flat - strides[i]) as usize];
                                connect(neighbor, id, &mut adjacency);
                            }
                        }
                    }
                }
            }
            Variant::Circle { .. } => {
                return Err(Error::invalid("sampling", "circles have no rational dense sample"));
            }
        }
        Ok(SampledSet { points, adjacency })
    }

    /// Derives a certified local connectivity value at scale `k`: the least
    /// `j ≥ k` such that every sample point within `2^-j` of a sample `p`
    /// lies in `p`'s component of the sampled set clipped to `B_{2^-k}(p)`,
    /// plus a slack of 2 bridging sample density to true validity.  Convex
    /// sets and circles return `k` analytically (their ball intersections
    /// are connected: convexity, or the chord-monotonicity argument that a
    /// disk cuts a circle in one arc).
    pub fn derive_lc(&self, k: u32, depth: u32) -> Result<u32> {
        if self.is_convex() || matches!(self.variant, Variant::Circle { .. }) {
            return Ok(k);
        }
        let samples = self.sample_connected(depth)?;
        derive_lc_sampled(&samples, k, depth)
    }

    /// The unique arc between two points of an acyclic polyline, as a
    /// polygonal curve with breakpoints proportional to certified segment
    /// length upper bounds.
    pub fn unique_arc(&self, x: &RationalPoint, y: &RationalPoint) -> Result<PolygonalCurve> {
        let (vertices, edges) = match &self.variant {
            Variant::Polyline { vertices, edges } => (vertices, edges),
            _ => return Err(Error::invalid("unique_arc", "only polylines have tree arcs")),
        };
        if x == y {
            return Err(Error::IdenticalPoints);
        }
        if edges.len() + 1 != vertices.len() {
            // A connected graph with extra edges has a cycle.
            return Err(Error::CyclicPolyline);
        }
        let locate = |p: &RationalPoint| -> Result<Vec<(usize, Rational)>> {
            let mut hits = Vec::new();
            for (idx, &(u, v)) in edges.iter().enumerate() {
                if point_segment_dist_sq(p, &vertices[u], &vertices[v]).is_zero() {
                    hits.push((idx, segment_parameter(p, &vertices[u], &vertices[v])));
                }
            }
            if hits.is_empty() {
                Err(Error::PointNotOnSet)
            } else {
                Ok(hits)
            }
        };
        let hx = locate(x)?;
        let hy = locate(y)?;
        // Same-edge shortcut: the tree arc is the straight subsegment.
        for &(e, _) in &hx {
            if hy.iter().any(|&(e2, _)| e2 == e) {
                return polyline_from_path(vec![x.clone(), y.clone()]);
            }
        }
        // Pseudo-nodes for x and y attached to their host edge endpoints
        // (or identified with a vertex when the parameter is 0 or 1).
        let n = vertices.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n + 2];
        for &(u, v) in edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let (x_node, y_node) = (n, n + 1);
        let attach = |node: usize, hits: &[(usize, Rational)], adj: &mut Vec<Vec<usize>>| {
            for &(e, ref t) in hits {
                let (u, v) = edges[e];
                if t.is_zero() {
                    adj[node].push(u);
                    adj[u].push(node);
                } else if t.is_one() {
                    adj[node].push(v);
                    adj[v].push(node);
                } else {
                    for h in [u, v] {
                        adj[node].push(h);
                        adj[h].push(node);
                    }
                }
            }
        };
        attach(x_node, &hx, &mut adj);
        attach(y_node, &hy, &mut adj);
        // Breadth-first search; in a tree with the two pseudo-nodes the
        // shortest hop path is the unique arc's vertex sequence.
        let mut parent = vec![usize::MAX; n + 2];
        parent[x_node] = x_node;
        let mut queue = VecDeque::from([x_node]);
        while let Some(u) = queue.pop_front() {
            if u == y_node {
                break;
            }
            for &v in &adj[u] {
                if parent[v] == usize::MAX {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[y_node] == usize::MAX {
            return Err(Error::PointNotOnSet);
        }
        let mut rev = vec![y.clone()];
        let mut cur = parent[y_node];
        while cur != x_node {
            rev.push(vertices[cur].clone());
            cur = parent[cur];
        }
        rev.push(x.clone());
        rev.reverse();
        // Coincidences (x or y sitting exactly on a vertex) leave duplicate
        // consecutive points; drop them.
        rev.dedup();
        polyline_from_path(rev)
    }
}

/// A dense rational sample of a set with certified adjacency.
pub struct SampledSet {
    pub points: Vec<RationalPoint>,
    pub adjacency: Vec<Vec<usize>>,
}

/// The sample coordinates rescaled to integers over one common denominator,
/// so ball membership and nearest-disconnect searches run on exact `i128`
/// arithmetic instead of big rationals.
struct IntSamples {
    coords: Vec<Vec<i128>>,
    denom: i128,
}

impl IntSamples {
    fn build(samples: &SampledSet) -> Result<Self> {
        let mut denom = BigInt::one();
        for p in &samples.points {
            for c in p.coords() {
                denom = num_integer::lcm(denom, c.denom().clone());
            }
        }
        let denom_i = denom
            .to_i128()
            .filter(|d| *d < 1i128 << 44)
            .ok_or_else(|| Error::invalid("sampling", "sample denominators too large"))?;
        let coords = samples
            .points
            .iter()
            .map(|p| {
                p.coords()
                    .iter()
                    .map(|c| {
                        (c.numer() * (&denom / c.denom()))
                            .to_i128()
                            .filter(|v| v.abs() < 1i128 << 48)
                            .ok_or_else(|| {
                                Error::invalid("sampling", "sample coordinates too large")
                            })
                    })
                    .collect::<Result<Vec<i128>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(IntSamples { coords, denom: denom_i })
    }

    fn dist_sq(&self, a: usize, b: usize) -> i128 {
        self.coords[a]
            .iter()
            .zip(&self.coords[b])
            .map(|(x, y)| (x - y) * (x - y))
            .sum()
    }

    /// Whether samples `a, b` are strictly within `2^-k`: compares
    /// `dist² · 4^k < denom²` in integers.
    fn within(&self, a: usize, b: usize, k: u32) -> bool {
        times_pow4_lt(self.dist_sq(a, b), k, self.denom * self.denom)
    }

    /// Spatial buckets of side `2^-k` (cell = floor(coord · 2^k)).
    fn buckets(&self, k: u32) -> BTreeMap<Vec<i128>, Vec<usize>> {
        assert!(k <= 60, "bucket scale out of range");
        let mut map: BTreeMap<Vec<i128>, Vec<usize>> = BTreeMap::new();
        for (i, p) in self.coords.iter().enumerate() {
            let key: Vec<i128> =
                p.iter().map(|c| (c << k).div_euclid(self.denom)).collect();
            map.entry(key).or_default().push(i);
        }
        map
    }

    /// Indices strictly within `2^-k` of sample `i`, via bucket neighbors.
    fn ball(&self, buckets: &BTreeMap<Vec<i128>, Vec<usize>>, i: usize, k: u32) -> Vec<usize> {
        let center: Vec<i128> = self.coords[i]
            .iter()
            .map(|c| (c << k).div_euclid(self.denom))
            .collect();
        let n = center.len();
        let mut out = Vec::new();
        let mut offsets = vec![-1i128; n];
        loop {
            let key: Vec<i128> =
                center.iter().zip(&offsets).map(|(c, o)| c + o).collect();
            if let Some(ids) = buckets.get(&key) {
                for &q in ids {
                    if self.within(q, i, k) {
                        out.push(q);
                    }
                }
            }
            // Advance the mixed-radix offset counter over {-1, 0, 1}ⁿ.
            let mut axis = 0;
            loop {
                if axis == n {
                    return out;
                }
                if offsets[axis] < 1 {
                    offsets[axis] += 1;
                    break;
                }
                offsets[axis] = -1;
                axis += 1;
            }
        }
    }

    /// For sample `i`, the squared integer distance to the nearest sample
    /// inside `B_{2^-k}(p_i)` that is NOT in `p_i`'s component of the
    /// clipped sampled set; `None` when the clipped sample is connected.
    fn min_disconnect_sq(
        &self,
        adjacency: &[Vec<usize>],
        buckets: &BTreeMap<Vec<i128>, Vec<usize>>,
        i: usize,
        k: u32,
    ) -> Option<i128> {
        let ball = self.ball(buckets, i, k);
        let mut in_ball = vec![false; self.coords.len()];
        for &q in &ball {
            in_ball[q] = true;
        }
        let mut reached = vec![false; self.coords.len()];
        reached[i] = true;
        let mut queue = VecDeque::from([i]);
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                if in_ball[v] && !reached[v] {
                    reached[v] = true;
                    queue.push_back(v);
                }
            }
        }
        ball.iter().filter(|&&q| !reached[q]).map(|&q| self.dist_sq(q, i)).min()
    }
}

/// The sampled local connectivity check at scales `(k, j)`: every sample
/// within `2^-j` of a sample `p` lies in `p`'s component of the sampled set
/// clipped to `B_{2^-k}(p)`.
pub fn lc_check_sampled(samples: &SampledSet, k: u32, j: u32) -> Result<bool> {
    assert!(j >= k, "inner scale must be at least the outer scale");
    let ints = IntSamples::build(samples)?;
    let buckets = ints.buckets(k);
    let indices: Vec<usize> = (0..samples.points.len()).collect();
    let ok = map_batch(&indices, |&i| {
        match ints.min_disconnect_sq(&samples.adjacency, &buckets, i, k) {
            None => true,
            // Violation means some non-component sample is within 2^-j.
            Some(d) => !times_pow4_lt(d, j, ints.denom * ints.denom),
        }
    });
    Ok(ok.into_iter().all(|b| b))
}

/// The sampled search behind [`TestContinuum::derive_lc`], on a prepared
/// sample.
fn derive_lc_sampled(samples: &SampledSet, k: u32, depth: u32) -> Result<u32> {
    let ints = IntSamples::build(samples)?;
    let buckets = ints.buckets(k);
    let indices: Vec<usize> = (0..samples.points.len()).collect();
    let disconnects = map_batch(&indices, |&i| {
        ints.min_disconnect_sq(&samples.adjacency, &buckets, i, k)
    });
    let global_min = disconnects.into_iter().flatten().min();
    let mut j = k;
    if let Some(min_sq) = global_min {
        // Least j with 4^-j ≤ min distance², i.e. denom² ≤ min · 4^j.
        while times_pow4_lt(min_sq, j, ints.denom * ints.denom) {
            j += 1;
            if j + 2 > depth {
                return Err(Error::DepthTooSmall { depth, scale: j });
            }
        }
    }
    Ok(j + 2)
}

/// Exactly decides `d · 4^j < rhs` for `d ≥ 0`, `rhs ≥ 1`, without overflow.
fn times_pow4_lt(d: i128, j: u32, rhs: i128) -> bool {
    debug_assert!(d >= 0 && rhs >= 1);
    let shift = 2 * j;
    if shift >= 127 {
        return d == 0;
    }
    d <= (rhs - 1) >> shift
}

/// The canonical compact-set name of a test continuum: stage `t` emits every
/// width-2 dyadic window at depth `t + 1` (within the bounding box) that
/// hits the set.  Each box hits the set (minimality) and the windows cover
/// it; diameters fall below `2^-k` from stage `k + 1` on.
pub fn compact_name(x: &TestContinuum) -> crate::names::CompactName {
    let set = x.clone();
    let mut depth = 1u32;
    let stream = move || {
        let cover = hitting_windows(&set, depth);
        depth += 1;
        Cover::new(cover).map_err(|_| {
            Error::invalid("catalog name", "window scan produced an empty cover")
        })
    };
    crate::names::CompactName::new(x.dim(), stream).with_oracle(x.clone())
}

/// All width-2 dyadic windows at `depth` near the bounding box that hit the
/// set, in lexicographic cell order.
pub fn hitting_windows(x: &TestContinuum, depth: u32) -> Vec<RationalBox> {
    if let Variant::Polyline { vertices, edges } = x.variant() {
        return polyline_hitting_windows(x, vertices, edges, depth);
    }
    // Box grids genuinely fill area, so the grid scan is proportional to
    // the answer; circles stay on it too, at shallow depths.
    let bb = x.bounding_box();
    let scale = pow2(depth);
    let n = x.dim();
    let ranges: Vec<(i64, i64)> = (0..n)
        .map(|i| {
            let lo = rational_floor(&(&bb.lo()[i] * &scale))
                .to_i64()
                .expect("catalog sets are desk scale")
                - 2;
            let hi = rational_ceil(&(&bb.hi()[i] * &scale))
                .to_i64()
                .expect("catalog sets are desk scale")
                + 1;
            (lo, hi)
        })
        .collect();
    let mut out = Vec::new();
    let mut cell: Vec<i64> = ranges.iter().map(|&(lo, _)| lo).collect();
    loop {
        let coords: Vec<BigInt> = cell.iter().map(|&a| BigInt::from(a)).collect();
        let window = dyadic_window(&coords, depth, 2);
        if x.box_hits_set(&window) {
            out.push(window);
        }
        // Lexicographic advance with the last axis fastest.
        let mut axis = n;
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            if cell[axis] < ranges[axis].1 {
                cell[axis] += 1;
                break;
            }
            cell[axis] = ranges[axis].0;
        }
    }
}

/// Output-sensitive window enumeration for polylines: candidate anchors
/// are gathered by walking each edge through the unit slabs of its
/// dominant axis, so the cost grows with the curve's length at this depth
/// rather than with the area of the bounding box.  The exact
/// `box_hits_set` filter then makes the result identical to a full scan.
fn polyline_hitting_windows(
    x: &TestContinuum,
    vertices: &[RationalPoint],
    edges: &[(usize, usize)],
    depth: u32,
) -> Vec<RationalBox> {
    let scale = pow2(depth);
    let n = x.dim();
    let mut anchors: BTreeSet<Vec<i64>> = BTreeSet::new();
    // A single-vertex polyline has no edges; scan around the lone vertex as
    // a degenerate edge so the window set is still complete.
    let edge_list: Vec<(usize, usize)> =
        if edges.is_empty() { vec![(0, 0)] } else { edges.to_vec() };
    for &(s, e) in &edge_list {
        // Grid units: the edge runs from u to v in cell coordinates.
        let u: Vec<Rational> = (0..n).map(|i| vertices[s].coord(i) * &scale).collect();
        let v: Vec<Rational> = (0..n).map(|i| vertices[e].coord(i) * &scale).collect();
        let dom = (0..n)
            .max_by(|&a, &b| (&v[a] - &u[a]).abs().cmp(&(&v[b] - &u[b]).abs()))
            .expect("positive dimension");
        let delta = &v[dom] - &u[dom];
        let dom_min = u[dom].clone().min(v[dom].clone());
        let dom_max = u[dom].clone().max(v[dom].clone());
        let dom_lo = rational_floor(&dom_min).to_i64().expect("catalog sets are desk scale") - 1;
        let dom_hi = rational_floor(&dom_max).to_i64().expect("catalog sets are desk scale") + 1;
        for slab in dom_lo..=dom_hi {
            // Edge parameters where the dominant coordinate crosses the
            // slab [slab, slab + 1], clamped to the edge.
            let (t0, t1) = if delta.is_zero() {
                (rat_int(0), rat_int(1))
            } else {
                let a = (rat_int(slab) - &u[dom]) / &delta;
                let b = (rat_int(slab + 1) - &u[dom]) / &delta;
                (a.clone().min(b.clone()).max(rat_int(0)), a.max(b).min(rat_int(1)))
            };
            if t0 > t1 {
                continue;
            }
            // Anchor ranges per axis from the subsegment's extent, with
            // one cell of slack on each side for boundary contact.
            let ranges: Vec<(i64, i64)> = (0..n)
                .map(|axis| {
                    let c0 = &u[axis] + (&v[axis] - &u[axis]) * &t0;
                    let c1 = &u[axis] + (&v[axis] - &u[axis]) * &t1;
                    let lo = rational_floor(&c0.clone().min(c1.clone()))
                        .to_i64()
                        .expect("catalog sets are desk scale");
                    let hi = rational_floor(&c0.max(c1))
                        .to_i64()
                        .expect("catalog sets are desk scale");
                    (lo - 2, hi + 1)
                })
                .collect();
            let mut cell: Vec<i64> = ranges.iter().map(|&(lo, _)| lo).collect();
            'product: loop {
                anchors.insert(cell.clone());
                let mut axis = n;
                loop {
                    if axis == 0 {
                        break 'product;
                    }
                    axis -= 1;
                    if cell[axis] < ranges[axis].1 {
                        cell[axis] += 1;
                        break;
                    }
                    cell[axis] = ranges[axis].0;
                }
            }
        }
    }
    anchors
        .into_iter()
        .map(|a| {
            let coords: Vec<BigInt> = a.iter().map(|&c| BigInt::from(c)).collect();
            dyadic_window(&coords, depth, 2)
        })
        .filter(|w| x.box_hits_set(w))
        .collect()
}

fn bounding_of_points(points: &[RationalPoint]) -> RationalBox {
    let n = points[0].dim();
    let pad = rat_int(1);
    let lo = (0..n)
        .map(|i| points.iter().map(|p| p.coord(i)).min().expect("nonempty") - &pad)
        .collect();
    let hi = (0..n)
        .map(|i| points.iter().map(|p| p.coord(i)).max().expect("nonempty") + &pad)
        .collect();
    RationalBox::new(lo, hi).expect("padded extent is nonempty")
}

/// The parameter of `p` on segment `[a, b]`, assuming `p` lies on it.
fn segment_parameter(p: &RationalPoint, a: &RationalPoint, b: &RationalPoint) -> Rational {
    let len_sq = dist_sq(a, b);
    let mut dot = Rational::zero();
    for i in 0..p.dim() {
        dot += (p.coord(i) - a.coord(i)) * (b.coord(i) - a.coord(i));
    }
    dot / len_sq
}

/// Builds a curve through the listed points with breakpoints proportional to
/// dyadic upper bounds of the segment lengths.
fn polyline_from_path(points: Vec<RationalPoint>) -> Result<PolygonalCurve> {
    if points.len() < 2 {
        return Err(Error::invalid("arc path", "needs at least two points"));
    }
    let lengths: Vec<Rational> = points
        .windows(2)
        .map(|w| dyadic_sqrt_ub(&dist_sq(&w[0], &w[1]), 24))
        .collect();
    let total: Rational = lengths.iter().sum();
    let mut breakpoints = vec![Rational::zero()];
    let mut acc = Rational::zero();
    for l in &lengths {
        acc += l;
        breakpoints.push(&acc / &total);
    }
    // Force the exact endpoint against accumulated rounding (acc/total = 1).
    let last = breakpoints.len() - 1;
    breakpoints[last] = Rational::one();
    PolygonalCurve::new(breakpoints, points)
}

/// Open parameter interval (clipped conceptually to `[0, 1]`) where the
/// segment `a + t (b − a)` lies strictly inside the open box; `None` when
/// empty.  Sentinel bounds `−1`/`2` stand for unbounded sides.
fn segment_box_interval(
    a: &RationalPoint,
    b: &RationalPoint,
    r: &RationalBox,
) -> Option<(Rational, Rational)> {
    let mut alpha = rat_int(-1);
    let mut beta = rat_int(2);
    for i in 0..a.dim() {
        let d = b.coord(i) - a.coord(i);
        if d.is_zero() {
            if a.coord(i) <= &r.lo()[i] || a.coord(i) >= &r.hi()[i] {
                return None;
            }
            continue;
        }
        let t1 = (&r.lo()[i] - a.coord(i)) / &d;
        let t2 = (&r.hi()[i] - a.coord(i)) / &d;
        let (lo, hi) = if d.is_positive() { (t1, t2) } else { (t2, t1) };
        alpha = alpha.max(lo);
        beta = beta.min(hi);
    }
    if alpha < beta {
        Some((alpha, beta))
    } else {
        None
    }
}

/// Whether the open segment-parameter set `[0,1] ∩ (α, β)` is nonempty.
fn segment_meets_open_box(a: &RationalPoint, b: &RationalPoint, r: &RationalBox) -> bool {
    match segment_box_interval(a, b, r) {
        None => false,
        Some((alpha, beta)) => {
            alpha < rat_int(1) && beta > Rational::zero() && alpha < beta
        }
    }
}

/// Whether the closed parameter interval `[0, 1]` is covered by the open
/// intervals cut by the boxes: greedy sweep over exact rational endpoints.
fn segment_covered(a: &RationalPoint, b: &RationalPoint, boxes: &[RationalBox]) -> bool {
    let intervals: Vec<(Rational, Rational)> =
        boxes.iter().filter_map(|r| segment_box_interval(a, b, r)).collect();
    let mut cur = Rational::zero();
    loop {
        // An interval must strictly contain the current frontier point.
        let next = intervals
            .iter()
            .filter(|(alpha, beta)| alpha < &cur && beta > &cur)
            .map(|(_, beta)| beta)
            .max();
        match next {
            None => return false,
            Some(beta) => {
                if beta > &Rational::one() {
                    return true;
                }
                cur = beta.clone();
            }
        }
    }
}

/// Whether the closed box `b` meets the open box `r`.
fn closed_meets_open(b: &RationalBox, r: &RationalBox) -> bool {
    (0..b.dim()).all(|i| &b.hi()[i] > &r.lo()[i] && &b.lo()[i] < &r.hi()[i])
}

/// Compares `base + sign·√root_sq` with `w` exactly.
fn algebraic_cmp(base: &Rational, sign: i8, root_sq: &Rational, w: &Rational) -> Ordering {
    debug_assert!(!root_sq.is_negative());
    if sign == 0 || root_sq.is_zero() {
        return base.cmp(w);
    }
    let e = w - base;
    if sign > 0 {
        // base + √D vs w ⟺ √D vs e.
        if !e.is_positive() {
            Ordering::Greater
        } else {
            root_sq.cmp(&(&e * &e))
        }
    } else {
        // base − √D vs w ⟺ −√D vs e.
        if !e.is_negative() {
            Ordering::Less
        } else {
            (&e * &e).cmp(root_sq)
        }
    }
}

/// A circle-boundary crossing: the point whose `axis` coordinate equals
/// `line` and whose other coordinate is `center + sign·√other_sq`.
struct CutPoint {
    axis: usize,
    line: Rational,
    sign: i8,
    other_sq: Rational,
}

impl CutPoint {
    /// Exactly compares coordinate `a` of the cut point with `w`.
    fn coord_cmp(&self, center: &RationalPoint, a: usize, w: &Rational) -> Ordering {
        if a == self.axis {
            self.line.cmp(w)
        } else {
            algebraic_cmp(center.coord(a), self.sign, &self.other_sq, w)
        }
    }

    /// Sign of the offset of coordinate `a` from the circle center.
    fn offset_sign(&self, center: &RationalPoint, a: usize) -> i8 {
        if a == self.axis {
            let off = &self.line - center.coord(a);
            if off.is_positive() {
                1
            } else if off.is_negative() {
                -1
            } else {
                0
            }
        } else {
            if self.other_sq.is_zero() {
                0
            } else {
                self.sign
            }
        }
    }

    /// Compares coordinate `a` of points just after the cut point, in the
    /// counterclockwise direction, with `w`.  Ties at the cut point are
    /// broken by the motion direction `(dx, dy) = (−offset_y, +offset_x)`;
    /// a vanishing derivative means the coordinate is at an extremum and
    /// immediately moves toward the center line.
    fn after_cmp(&self, center: &RationalPoint, a: usize, w: &Rational) -> Ordering {
        let at = self.coord_cmp(center, a, w);
        if at != Ordering::Equal {
            return at;
        }
        let derivative = if a == 0 {
            -self.offset_sign(center, 1)
        } else {
            self.offset_sign(center, 0)
        };
        match derivative.cmp(&0) {
            Ordering::Greater => Ordering::Greater,
            Ordering::Less => Ordering::Less,
            Ordering::Equal => {
                // Extremum: w equals the coordinate, which equals center ± r;
                // the arc bends toward the center.
                center.coord(a).cmp(w)
            }
        }
    }

    fn strictly_inside(&self, center: &RationalPoint, b: &RationalBox) -> bool {
        (0..2).all(|a| {
            self.coord_cmp(center, a, &b.lo()[a]) == Ordering::Greater
                && self.coord_cmp(center, a, &b.hi()[a]) == Ordering::Less
        })
    }

    fn after_inside(&self, center: &RationalPoint, b: &RationalBox) -> bool {
        (0..2).all(|a| {
            self.after_cmp(center, a, &b.lo()[a]) == Ordering::Greater
                && self.after_cmp(center, a, &b.hi()[a]) == Ordering::Less
        })
    }
}

/// Decides whether the circle is covered by the union of the open boxes.
///
/// Membership of circle points in each open box can change only where the
/// circle crosses one of the boxes' boundary lines, so the circle splits at
/// these cut points into arcs of constant membership.  Every arc starts at
/// a cut point; checking each cut point and its outgoing arc therefore
/// decides the cover.  Without any cut point the circle lies on one side of
/// every line and a single rational circle point decides.
fn circle_covered(center: &RationalPoint, radius: &Rational, boxes: &[RationalBox]) -> bool {
    let r_sq = radius * radius;
    let mut cuts: Vec<CutPoint> = Vec::new();
    for b in boxes {
        for axis in 0..2 {
            for line in [&b.lo()[axis], &b.hi()[axis]] {
                let off = line - center.coord(axis);
                let disc = &r_sq - &off * &off;
                if disc.is_negative() {
                    continue;
                }
                if disc.is_zero() {
                    cuts.push(CutPoint { axis, line: line.clone(), sign: 0, other_sq: disc });
                } else {
                    for sign in [1i8, -1] {
                        cuts.push(CutPoint {
                            axis,
                            line: line.clone(),
                            sign,
                            other_sq: disc.clone(),
                        });
                    }
                }
            }
        }
    }
    if cuts.is_empty() {
        let probe =
            RationalPoint::new(vec![center.coord(0) + radius, center.coord(1).clone()]);
        return boxes.iter().any(|b| b.contains_point(&probe));
    }
    cuts.iter().all(|cut| {
        boxes.iter().any(|b| cut.strictly_inside(center, b))
            && boxes.iter().any(|b| cut.after_inside(center, b))
    })
}
