//! Chords of the disk, their dynamics, and finite laminations.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::circle::{in_arc, sigma, CirclePoint, Degree};
use crate::error::{Error, Result};

/// An unordered pair of distinct circle points, stored with `lo < hi`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "(CirclePoint, CirclePoint)", into = "(CirclePoint, CirclePoint)")]
pub struct Leaf {
    lo: CirclePoint,
    hi: CirclePoint,
}

impl Leaf {
    pub fn new(a: CirclePoint, b: CirclePoint) -> Result<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(Leaf { lo: a, hi: b }),
            std::cmp::Ordering::Greater => Ok(Leaf { lo: b, hi: a }),
            std::cmp::Ordering::Equal => Err(Error::DegenerateLeaf(a)),
        }
    }

    /// Shorthand for literals; panics when the endpoints coincide.
    pub fn frac(a: (i64, i64), b: (i64, i64)) -> Self {
        Leaf::new(CirclePoint::frac(a.0, a.1), CirclePoint::frac(b.0, b.1)).expect("distinct endpoints")
    }

    pub fn lo(&self) -> &CirclePoint {
        &self.lo
    }

    pub fn hi(&self) -> &CirclePoint {
        &self.hi
    }

    pub fn endpoints(&self) -> [&CirclePoint; 2] {
        [&self.lo, &self.hi]
    }

    pub fn has_endpoint(&self, t: &CirclePoint) -> bool {
        &self.lo == t || &self.hi == t
    }

    pub fn shares_endpoint(&self, other: &Leaf) -> bool {
        self.has_endpoint(&other.lo) || self.has_endpoint(&other.hi)
    }

    /// Shorter-arc length, in `(0, 1/2]`.
    pub fn length(&self) -> BigRational {
        self.lo.distance(&self.hi)
    }

    /// The endpoint other than `t`, if `t` is an endpoint.
    pub fn other_end(&self, t: &CirclePoint) -> Option<&CirclePoint> {
        if &self.lo == t {
            Some(&self.hi)
        } else if &self.hi == t {
            Some(&self.lo)
        } else {
            None
        }
    }

    /// True iff `t` lies strictly on the side of the leaf containing the open arc `(lo, hi)`.
    pub fn separates(&self, s: &CirclePoint, t: &CirclePoint) -> bool {
        if self.has_endpoint(s) || self.has_endpoint(t) {
            return false;
        }
        in_arc(s, &self.lo, &self.hi) != in_arc(t, &self.lo, &self.hi)
    }
}

impl fmt::Display for Leaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.lo, self.hi)
    }
}

impl TryFrom<(CirclePoint, CirclePoint)> for Leaf {
    type Error = Error;

    fn try_from((a, b): (CirclePoint, CirclePoint)) -> Result<Self> {
        Leaf::new(a, b)
    }
}

impl From<Leaf> for (CirclePoint, CirclePoint) {
    fn from(l: Leaf) -> Self {
        (l.lo, l.hi)
    }
}

/// Image of a leaf: another leaf, or a point when the leaf is critical.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LeafImage {
    Leaf(Leaf),
    Degenerate(CirclePoint),
}

impl LeafImage {
    pub fn leaf(&self) -> Option<&Leaf> {
        match self {
            LeafImage::Leaf(l) => Some(l),
            LeafImage::Degenerate(_) => None,
        }
    }
}

pub fn leaf_image(d: Degree, l: &Leaf) -> LeafImage {
    let a = sigma(d, &l.lo);
    let b = sigma(d, &l.hi);
    match Leaf::new(a.clone(), b) {
        Ok(leaf) => LeafImage::Leaf(leaf),
        Err(_) => LeafImage::Degenerate(a),
    }
}

pub fn is_critical(d: Degree, l: &Leaf) -> bool {
    matches!(leaf_image(d, l), LeafImage::Degenerate(_))
}

/// Strict interleaving of endpoints; a shared endpoint is not a crossing.
pub fn leaves_cross(l1: &Leaf, l2: &Leaf) -> bool {
    if l1.shares_endpoint(l2) {
        return false;
    }
    in_arc(&l2.lo, &l1.lo, &l1.hi) != in_arc(&l2.hi, &l1.lo, &l1.hi)
}

/// Finite gap with only leaves on its boundary.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Polygon {
    vertices: Vec<CirclePoint>,
}

impl Polygon {
    pub fn new(vertices: impl IntoIterator<Item = CirclePoint>) -> Result<Self> {
        let vertices: Vec<_> = vertices.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if vertices.len() < 3 {
            return Err(Error::DegeneratePolygon);
        }
        Ok(Polygon { vertices })
    }

    /// Vertices in counterclockwise order starting from the smallest angle.
    pub fn vertices(&self) -> &[CirclePoint] {
        &self.vertices
    }

    pub fn sides(&self) -> Vec<Leaf> {
        hull_sides(&self.vertices)
    }
}

/// Boundary chords of the convex hull of a point set: nothing for one point,
/// the chord for two, consecutive sides otherwise.
pub fn hull_sides(points: &[CirclePoint]) -> Vec<Leaf> {
    let sorted: Vec<_> = points.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    match sorted.len() {
        0 | 1 => Vec::new(),
        2 => vec![Leaf::new(sorted[0].clone(), sorted[1].clone()).expect("distinct")],
        n => (0..n).map(|i| Leaf::new(sorted[i].clone(), sorted[(i + 1) % n].clone()).expect("distinct")).collect(),
    }
}

/// A finite set of leaves together with its degree and pullback stage.
///
/// The leaf set is not required to be non-crossing; use
/// [`validate_prelamination`] to check condition (1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lamination {
    pub degree: Degree,
    pub leaves: BTreeSet<Leaf>,
    pub depth: usize,
}

impl Lamination {
    pub fn new(degree: Degree, leaves: impl IntoIterator<Item = Leaf>) -> Self {
        Lamination { degree, leaves: leaves.into_iter().collect(), depth: 0 }
    }

    pub fn empty(degree: Degree) -> Self {
        Self::new(degree, [])
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn contains(&self, l: &Leaf) -> bool {
        self.leaves.contains(l)
    }

    pub fn endpoints(&self) -> BTreeSet<CirclePoint> {
        self.leaves.iter().flat_map(|l| [l.lo.clone(), l.hi.clone()]).collect()
    }

    pub fn is_prelamination(&self) -> bool {
        validate_prelamination(self).is_ok()
    }
}

/// Crossing pairs found by [`validate_prelamination`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PrelaminationReport {
    pub crossings: Vec<(Leaf, Leaf)>,
}

impl PrelaminationReport {
    pub fn is_ok(&self) -> bool {
        self.crossings.is_empty()
    }
}

/// Index form of a leaf set: endpoints replaced by their rank among all endpoints.
pub(crate) fn indexed(leaves: &[&Leaf]) -> (Vec<CirclePoint>, Vec<(usize, usize)>) {
    let points: Vec<CirclePoint> =
        leaves.iter().flat_map(|l| [l.lo.clone(), l.hi.clone()]).collect::<BTreeSet<_>>().into_iter().collect();
    let rank: HashMap<&CirclePoint, usize> = points.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let pairs = leaves.iter().map(|l| (rank[&l.lo], rank[&l.hi])).collect();
    (points, pairs)
}

fn index_cross((a, b): (usize, usize), (c, d): (usize, usize)) -> bool {
    (a < c && c < b && b < d) || (c < a && a < d && d < b)
}

pub fn validate_prelamination(lam: &Lamination) -> PrelaminationReport {
    let leaves: Vec<&Leaf> = lam.leaves.iter().collect();
    let (_, pairs) = indexed(&leaves);
    let mut crossings = Vec::new();
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            if index_cross(pairs[i], pairs[j]) {
                crossings.push((leaves[i].clone(), leaves[j].clone()));
            }
        }
    }
    PrelaminationReport { crossings }
}

/// `d` pairwise disjoint leaves with a common non-degenerate image.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SiblingCollection {
    pub leaves: BTreeSet<Leaf>,
}

/// All full sibling collections of `l` that contain `l`.
pub fn sibling_collections(d: Degree, l: &Leaf) -> Result<Vec<SiblingCollection>> {
    let image = match leaf_image(d, l) {
        LeafImage::Leaf(img) => img,
        LeafImage::Degenerate(_) => return Err(Error::CriticalLeaf(l.clone())),
    };
    let from = crate::circle::preimages(d, &image.lo);
    let to = crate::circle::preimages(d, &image.hi);
    let mut out = Vec::new();
    let mut used = vec![false; to.len()];
    let mut chosen: Vec<Leaf> = Vec::new();
    fn extend(
        i: usize,
        from: &[CirclePoint],
        to: &[CirclePoint],
        used: &mut [bool],
        chosen: &mut Vec<Leaf>,
        seed: &Leaf,
        out: &mut Vec<SiblingCollection>,
    ) {
        if i == from.len() {
            if chosen.contains(seed) {
                out.push(SiblingCollection { leaves: chosen.iter().cloned().collect() });
            }
            return;
        }
        for j in 0..to.len() {
            if used[j] {
                continue;
            }
            let cand = Leaf::new(from[i].clone(), to[j].clone()).expect("distinct images");
            if seed.has_endpoint(&from[i]) && &cand != seed {
                continue;
            }
            if chosen.iter().any(|c| leaves_cross(c, &cand)) {
                continue;
            }
            used[j] = true;
            chosen.push(cand);
            extend(i + 1, from, to, used, chosen, seed, out);
            chosen.pop();
            used[j] = false;
        }
    }
    extend(0, &from, &to, &mut used, &mut chosen, l, &mut out);
    Ok(out)
}

/// Finite-depth invariance failures between consecutive stages.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct InvarianceReport {
    /// Leaves of the earlier stage that are missing from the later one.
    pub not_contained: Vec<Leaf>,
    pub forward: Vec<Leaf>,
    pub backward: Vec<Leaf>,
    pub sibling: Vec<Leaf>,
}

impl InvarianceReport {
    pub fn is_ok(&self) -> bool {
        self.not_contained.is_empty() && self.forward.is_empty() && self.backward.is_empty() && self.sibling.is_empty()
    }
}

/// Checks forward, backward and sibling invariance of every leaf of `prev`
/// against the leaves of `next`.
pub fn check_invariance(prev: &Lamination, next: &Lamination) -> Result<InvarianceReport> {
    if prev.degree != next.degree {
        return Err(Error::DegreeMismatch(prev.degree.get(), next.degree.get()));
    }
    let d = prev.degree;
    let mut by_image: HashMap<Leaf, Vec<&Leaf>> = HashMap::new();
    for l in &next.leaves {
        if let LeafImage::Leaf(img) = leaf_image(d, l) {
            by_image.entry(img).or_default().push(l);
        }
    }
    let mut report = InvarianceReport::default();
    for l in &prev.leaves {
        if !next.contains(l) {
            report.not_contained.push(l.clone());
        }
        if !by_image.contains_key(l) {
            report.backward.push(l.clone());
        }
        match leaf_image(d, l) {
            LeafImage::Degenerate(_) => {}
            LeafImage::Leaf(img) => {
                if !next.contains(&img) {
                    report.forward.push(l.clone());
                }
                let candidates = by_image.get(&img).map(Vec::as_slice).unwrap_or(&[]);
                if !has_full_sibling_collection(d, l, candidates) {
                    report.sibling.push(l.clone());
                }
            }
        }
    }
    Ok(report)
}

fn has_full_sibling_collection(d: Degree, l: &Leaf, candidates: &[&Leaf]) -> bool {
    let pool: Vec<&Leaf> =
        candidates.iter().copied().filter(|c| *c != l && !c.shares_endpoint(l) && !leaves_cross(c, l)).collect();
    fn search(need: usize, start: usize, pool: &[&Leaf], chosen: &mut Vec<Leaf>) -> bool {
        if need == 0 {
            return true;
        }
        for i in start..pool.len() {
            let c = pool[i];
            if chosen.iter().any(|x| x.shares_endpoint(c) || leaves_cross(x, c)) {
                continue;
            }
            chosen.push(c.clone());
            if search(need - 1, i + 1, pool, chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    let mut chosen = vec![l.clone()];
    search(d.as_usize() - 1, 0, &pool, &mut chosen)
}

/// Leaves of `lam` reached from `seed` by at most `max_depth` forward steps
/// followed by at most `max_depth` backward steps, staying inside `lam`.
pub fn grand_orbit_truncated(d: Degree, lam: &Lamination, seed: &Leaf, max_depth: usize) -> Result<BTreeSet<Leaf>> {
    if !lam.contains(seed) {
        return Err(Error::SeedNotInLamination(seed.clone()));
    }
    let mut preimages_in: HashMap<Leaf, Vec<&Leaf>> = HashMap::new();
    for l in &lam.leaves {
        if let LeafImage::Leaf(img) = leaf_image(d, l) {
            preimages_in.entry(img).or_default().push(l);
        }
    }
    let mut forward = vec![seed.clone()];
    let mut current = seed.clone();
    for _ in 0..max_depth {
        match leaf_image(d, &current) {
            LeafImage::Leaf(img) if lam.contains(&img) => {
                current = img;
                forward.push(current.clone());
            }
            _ => break,
        }
    }
    let mut seen: HashSet<Leaf> = forward.iter().cloned().collect();
    for start in forward {
        let mut frontier = vec![start];
        for _ in 0..max_depth {
            let mut next = Vec::new();
            for l in &frontier {
                for &p in preimages_in.get(l).map(Vec::as_slice).unwrap_or(&[]) {
                    next.push(p.clone());
                    seen.insert(p.clone());
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
    }
    Ok(seen.into_iter().collect())
}
