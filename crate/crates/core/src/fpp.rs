//! Fixed point portraits: non-crossing connection patterns on the `d − 1`
//! fixed points `i/(d−1)`, the fixed sectors they cut out, and the canonical
//! critical portraits that touch them.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::circle::{fixed_points, in_closed_arc, CirclePoint, Degree};
use crate::error::{Error, Result};
use crate::face::{faces_with_points, Face};
use crate::leaves::{hull_sides, Leaf, Polygon};
use crate::pullback::CriticalPortrait;

/// A non-crossing partition of the fixed-point indices `0..d−1`.
///
/// Blocks are kept sorted, and ordered by least element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawPortrait")]
pub struct FixedPointPortrait {
    degree: Degree,
    blocks: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
struct RawPortrait {
    degree: Degree,
    blocks: Vec<Vec<usize>>,
}

impl TryFrom<RawPortrait> for FixedPointPortrait {
    type Error = Error;

    fn try_from(raw: RawPortrait) -> Result<Self> {
        FixedPointPortrait::new(raw.degree, raw.blocks)
    }
}

impl FixedPointPortrait {
    /// Validates and normalizes `blocks`. Indices that appear in no block
    /// become singletons, so `[[0, 1]]` is enough to describe one fixed leaf.
    pub fn new(degree: Degree, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let n = degree.as_usize() - 1;
        let mut seen = vec![false; n];
        let mut normalized = Vec::new();
        for block in blocks {
            let block: Vec<usize> = block.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
            if block.is_empty() {
                continue;
            }
            for &i in &block {
                if i >= n {
                    return Err(Error::InvalidPortrait(format!("index {i} out of range for degree {degree}")));
                }
                if seen[i] {
                    return Err(Error::InvalidPortrait(format!("index {i} used twice")));
                }
                seen[i] = true;
            }
            normalized.push(block);
        }
        normalized.extend((0..n).filter(|&i| !seen[i]).map(|i| vec![i]));
        normalized.sort();
        for (i, a) in normalized.iter().enumerate() {
            for b in &normalized[i + 1..] {
                if blocks_cross(a, b) {
                    return Err(Error::InvalidPortrait(format!("blocks {a:?} and {b:?} cross")));
                }
            }
        }
        Ok(FixedPointPortrait { degree, blocks: normalized })
    }

    pub fn empty(degree: Degree) -> Self {
        Self::new(degree, Vec::new()).expect("singletons never cross")
    }

    pub fn degree(&self) -> Degree {
        self.degree
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn fixed_point(&self, i: usize) -> CirclePoint {
        CirclePoint::frac(i as i64, self.degree.get() as i64 - 1)
    }

    /// The hull sides of every block with at least two fixed points.
    pub fn fixed_leaves(&self) -> Vec<Leaf> {
        let mut out: Vec<Leaf> = self
            .blocks
            .iter()
            .flat_map(|b| {
                let pts: Vec<_> = b.iter().map(|&i| self.fixed_point(i)).collect();
                hull_sides(&pts)
            })
            .collect();
        out.sort();
        out
    }

    fn rotated(&self) -> Self {
        let n = self.degree.as_usize() - 1;
        let blocks = self.blocks.iter().map(|b| b.iter().map(|&i| (i + 1) % n).collect()).collect();
        Self::new(self.degree, blocks).expect("rotation preserves validity")
    }
}

// Blocks cross when their elements interleave: a < b < c < e with a, c in
// one block and b, e in the other.
fn blocks_cross(x: &[usize], y: &[usize]) -> bool {
    let inside = |v: usize, lo: usize, hi: usize| lo < v && v < hi;
    for (i, &a) in x.iter().enumerate() {
        for &c in &x[i + 1..] {
            let in_count = y.iter().filter(|&&v| inside(v, a, c)).count();
            if in_count > 0 && in_count < y.len() {
                return true;
            }
        }
    }
    false
}

/// All fixed point portraits of degree `d`, in lexicographic order of blocks.
pub fn enumerate_fpps(d: Degree) -> Vec<FixedPointPortrait> {
    let n = d.as_usize() - 1;
    let mut out: Vec<FixedPointPortrait> = noncrossing_partitions(0, n)
        .into_iter()
        .map(|blocks| FixedPointPortrait::new(d, blocks).expect("non-crossing by construction"))
        .collect();
    out.sort();
    out
}

/// Non-crossing partitions of the range `lo..hi`.
fn noncrossing_partitions(lo: usize, hi: usize) -> Vec<Vec<Vec<usize>>> {
    if lo >= hi {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    grow_block(vec![lo], vec![Vec::new()], hi, &mut out);
    out
}

// `block` holds the elements chosen so far for the block of the range's first
// element; `inner` the partitions of the gaps already skipped over.
fn grow_block(block: Vec<usize>, inner: Vec<Vec<Vec<usize>>>, hi: usize, out: &mut Vec<Vec<Vec<usize>>>) {
    let last = *block.last().expect("nonempty");
    for rest in noncrossing_partitions(last + 1, hi) {
        for gap in &inner {
            let mut p = vec![block.clone()];
            p.extend(gap.iter().cloned());
            p.extend(rest.iter().cloned());
            out.push(p);
        }
    }
    for next in last + 1..hi {
        let gaps = noncrossing_partitions(last + 1, next);
        let mut combined = Vec::with_capacity(inner.len() * gaps.len());
        for a in &inner {
            for g in &gaps {
                let mut p = a.clone();
                p.extend(g.iter().cloned());
                combined.push(p);
            }
        }
        let mut b = block.clone();
        b.push(next);
        grow_block(b, combined, hi, out);
    }
}

/// One representative per orbit of the index rotation `i ↦ i + 1 (mod d−1)`:
/// the lexicographically least member.
pub fn fpps_up_to_rotation(d: Degree) -> Vec<FixedPointPortrait> {
    let n = d.as_usize() - 1;
    enumerate_fpps(d)
        .into_iter()
        .map(|p| {
            let mut best = p.clone();
            let mut r = p;
            for _ in 1..n {
                r = r.rotated();
                if r < best {
                    best = r.clone();
                }
            }
            best
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Component of the disk minus the portrait's hull that meets the circle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixedSector {
    pub id: usize,
    /// Fixed points on the boundary, in counterclockwise order.
    pub boundary_points: Vec<CirclePoint>,
    pub boundary_leaves: Vec<Leaf>,
    /// Counterclockwise arcs `(from, to)`; `from == to` is the whole circle.
    pub arcs: Vec<(CirclePoint, CirclePoint)>,
}

impl FixedSector {
    fn from_face(id: usize, face: &Face) -> Self {
        let arcs: Vec<_> = face.arcs().map(|(a, b)| (a.clone(), b.clone())).collect();
        let mut boundary_points = Vec::new();
        for (a, b) in &arcs {
            for p in [a, b] {
                if !boundary_points.contains(p) {
                    boundary_points.push(p.clone());
                }
            }
        }
        let mut boundary_leaves = face.leaves();
        boundary_leaves.sort();
        FixedSector { id, boundary_points, boundary_leaves, arcs }
    }

    pub fn degree(&self) -> usize {
        sector_degree(self)
    }

    /// True iff `t` lies in one of the sector's closed arcs.
    pub fn closure_contains(&self, t: &CirclePoint) -> bool {
        self.arcs.iter().any(|(a, b)| a == b || in_closed_arc(t, a, b))
    }

    pub fn arc_length(&self) -> BigRational {
        self.arcs.iter().fold(BigRational::zero(), |acc, (a, b)| acc + crate::circle::arc_length(a, b))
    }
}

fn portrait_faces(p: &FixedPointPortrait) -> Vec<Face> {
    let leaves = p.fixed_leaves();
    faces_with_points(leaves.iter(), &fixed_points(p.degree))
}

/// Fixed sectors, ordered by the start of their first arc.
pub fn fixed_sectors(p: &FixedPointPortrait) -> Vec<FixedSector> {
    portrait_faces(p)
        .iter()
        .filter(|f| !f.is_polygon())
        .enumerate()
        .map(|(i, f)| FixedSector::from_face(i, f))
        .collect()
}

/// Fixed polygons: blocks of three or more fixed points.
pub fn fixed_polygons(p: &FixedPointPortrait) -> Vec<Polygon> {
    p.blocks
        .iter()
        .filter(|b| b.len() >= 3)
        .map(|b| Polygon::new(b.iter().map(|&i| p.fixed_point(i))).expect("three vertices"))
        .collect()
}

/// One more than the number of arcs.
pub fn sector_degree(s: &FixedSector) -> usize {
    s.arcs.len() + 1
}

/// Per fixed sector, an all-critical polygon (a chord when the sector has
/// degree 2) touching one of the sector's boundary fixed points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CanonicalPortraitChoice {
    pub polygons: Vec<Vec<CirclePoint>>,
}

impl CanonicalPortraitChoice {
    pub fn critical_portrait(&self, d: Degree) -> Result<CriticalPortrait> {
        CriticalPortrait::from_polygons(d, self.polygons.clone())
    }
}

/// Every admissible all-critical polygon for one sector: `n = degree`
/// vertices `p + k/d` in the closure of the sector's arcs, one of them a
/// boundary fixed point `p`.
pub fn sector_placements(s: &FixedSector, d: Degree) -> Vec<Vec<CirclePoint>> {
    let n = sector_degree(s);
    let step = BigRational::new(1.into(), d.big());
    let mut found = BTreeSet::new();
    for p in &s.boundary_points {
        let others: Vec<CirclePoint> = (1..d.get())
            .map(|k| p.add(&(&step * BigRational::from_integer(k.into()))))
            .filter(|v| s.closure_contains(v))
            .collect();
        for pick in combinations(others.len(), n - 1) {
            let mut vertices: Vec<CirclePoint> = pick.iter().map(|&i| others[i].clone()).collect();
            vertices.push(p.clone());
            vertices.sort();
            found.insert(vertices);
        }
    }
    found.into_iter().collect()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if n < k {
        return Vec::new();
    }
    let mut out = combinations(n - 1, k);
    for mut c in combinations(n - 1, k - 1) {
        c.push(n - 1);
        out.push(c);
    }
    out
}

/// Cartesian product of [`sector_placements`] over the fixed sectors.
pub fn canonical_portraits(p: &FixedPointPortrait) -> Vec<CanonicalPortraitChoice> {
    let mut out = vec![Vec::new()];
    for s in fixed_sectors(p) {
        let options = sector_placements(&s, p.degree);
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<Vec<CirclePoint>>| {
                options.iter().map(move |o| {
                    let mut v = prefix.clone();
                    v.push(o.clone());
                    v
                })
            })
            .collect();
    }
    out.into_iter().map(|polygons| CanonicalPortraitChoice { polygons }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::leaves::leaves_cross;

    fn deg(d: u32) -> Degree {
        Degree::new(d).unwrap()
    }

    fn pts(v: &[(i64, i64)]) -> Vec<CirclePoint> {
        v.iter().map(|&(a, b)| CirclePoint::frac(a, b)).collect()
    }

    // Catalan numbers from the binomial formula, independent of the recursion.
    fn catalan(n: u64) -> u64 {
        let mut c: u64 = 1;
        for k in 0..n {
            c = c * 2 * (2 * k + 1) / (k + 2);
        }
        c
    }

    #[test]
    fn catalan_counts() {
        for d in 2..=8u32 {
            assert_eq!(enumerate_fpps(deg(d)).len() as u64, catalan(d as u64 - 1), "d={d}");
        }
        let d3: Vec<_> = enumerate_fpps(deg(3)).iter().map(|p| p.blocks().to_vec()).collect();
        assert_eq!(d3, vec![vec![vec![0], vec![1]], vec![vec![0, 1]]]);
    }

    // Brute-force oracle: all set partitions, filtered by pairwise non-crossing
    // of hull chords.
    #[test]
    fn enumeration_matches_brute_force() {
        fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
            if n == 0 {
                return vec![Vec::new()];
            }
            let mut out = Vec::new();
            for p in set_partitions(n - 1) {
                for i in 0..p.len() {
                    let mut q = p.clone();
                    q[i].push(n - 1);
                    out.push(q);
                }
                let mut q = p.clone();
                q.push(vec![n - 1]);
                out.push(q);
            }
            out
        }
        for d in 2..=6u32 {
            let n = d as usize - 1;
            let pt = |i: usize| CirclePoint::frac(i as i64, n as i64);
            let brute: BTreeSet<_> = set_partitions(n)
                .into_iter()
                .filter(|p| {
                    let sides: Vec<Vec<Leaf>> =
                        p.iter().map(|b| hull_sides(&b.iter().map(|&i| pt(i)).collect::<Vec<_>>())).collect();
                    (0..sides.len()).all(|i| {
                        (i + 1..sides.len())
                            .all(|j| sides[i].iter().all(|a| sides[j].iter().all(|b| !leaves_cross(a, b))))
                    })
                })
                .map(|p| FixedPointPortrait::new(deg(d), p).unwrap())
                .collect();
            let ours: BTreeSet<_> = enumerate_fpps(deg(d)).into_iter().collect();
            assert_eq!(ours, brute, "d={d}");
        }
    }

    #[test]
    fn rotation_classes() {
        assert_eq!(fpps_up_to_rotation(deg(5)).len(), 6);
        assert_eq!(fpps_up_to_rotation(deg(3)).len(), 2);
        assert_eq!(fpps_up_to_rotation(deg(2)).len(), 1);
    }

    #[test]
    fn rejects_crossing_and_duplicates() {
        assert!(FixedPointPortrait::new(deg(5), vec![vec![0, 2], vec![1, 3]]).is_err());
        assert!(FixedPointPortrait::new(deg(5), vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(FixedPointPortrait::new(deg(5), vec![vec![4]]).is_err());
        let p = FixedPointPortrait::new(deg(5), vec![vec![3, 1]]).unwrap();
        assert_eq!(p.blocks(), &[vec![0], vec![1, 3], vec![2]]);
    }

    #[test]
    fn json_round_trip() {
        let p = FixedPointPortrait::new(deg(5), vec![vec![1, 2, 3]]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"degree":5,"blocks":[[0],[1,2,3]]}"#);
        let back: FixedPointPortrait = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<FixedPointPortrait>(r#"{"degree":5,"blocks":[[0,2],[1,3]]}"#).is_err());
    }

    #[test]
    fn sectors_of_quarter_leaf() {
        let p = FixedPointPortrait::new(deg(5), vec![vec![0, 1]]).unwrap();
        let s = fixed_sectors(&p);
        assert_eq!(s.len(), 2);
        let arcs: Vec<Vec<(CirclePoint, CirclePoint)>> = s.iter().map(|x| x.arcs.clone()).collect();
        let q = |a, b| CirclePoint::frac(a, b);
        assert!(arcs.contains(&vec![(q(0, 1), q(1, 4))]));
        assert!(arcs.contains(&vec![(q(1, 4), q(1, 2)), (q(1, 2), q(3, 4)), (q(3, 4), q(0, 1))]));
        let degrees: BTreeSet<_> = s.iter().map(sector_degree).collect();
        assert_eq!(degrees, BTreeSet::from([2, 4]));
    }

    #[test]
    fn sectors_of_triangle_and_empty() {
        let p = FixedPointPortrait::new(deg(5), vec![vec![1, 2, 3]]).unwrap();
        let mut arc_counts: Vec<_> = fixed_sectors(&p).iter().map(|s| s.arcs.len()).collect();
        arc_counts.sort();
        assert_eq!(arc_counts, vec![1, 1, 2]);
        assert_eq!(fixed_polygons(&p).len(), 1);

        let e = fixed_sectors(&FixedPointPortrait::empty(deg(5)));
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].arcs.len(), 4);
        assert_eq!(sector_degree(&e[0]), 5);
    }

    #[test]
    fn criticality_budget() {
        for d in 2..=8u32 {
            for p in enumerate_fpps(deg(d)) {
                let total: usize = fixed_sectors(&p).iter().map(|s| sector_degree(s) - 1).sum();
                assert_eq!(total, d as usize - 1);
            }
        }
    }

    #[test]
    fn placements_of_quarter_leaf() {
        let p = FixedPointPortrait::new(deg(5), vec![vec![0, 1]]).unwrap();
        let sectors = fixed_sectors(&p);
        let small = sectors.iter().find(|s| s.arcs.len() == 1).unwrap();
        let big = sectors.iter().find(|s| s.arcs.len() == 3).unwrap();
        let sp = sector_placements(small, deg(5));
        assert!(sp.contains(&pts(&[(0, 1), (1, 5)])));
        assert!(sp.contains(&pts(&[(1, 20), (1, 4)])));
        let bp = sector_placements(big, deg(5));
        assert!(bp.contains(&pts(&[(1, 4), (9, 20), (13, 20), (17, 20)])));
        assert_eq!(canonical_portraits(&p).len(), sp.len() * bp.len());
    }

    #[test]
    fn degree_two_single_chord() {
        let c = canonical_portraits(&FixedPointPortrait::empty(deg(2)));
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].polygons, vec![pts(&[(0, 1), (1, 2)])]);
    }

    #[test]
    fn placements_exist_and_are_compatible() {
        for d in 2..=6u32 {
            for p in enumerate_fpps(deg(d)) {
                let fixed = p.fixed_leaves();
                for s in fixed_sectors(&p) {
                    let placements = sector_placements(&s, deg(d));
                    assert!(!placements.is_empty(), "{p:?} sector {}", s.id);
                    for poly in placements {
                        assert_eq!(poly.len(), sector_degree(&s));
                        for side in hull_sides(&poly) {
                            assert!(fixed.iter().all(|f| !leaves_cross(f, &side)));
                        }
                    }
                }
                for c in canonical_portraits(&p) {
                    c.critical_portrait(deg(d)).unwrap();
                }
            }
        }
    }
}
