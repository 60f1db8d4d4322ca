//! Rotational sets, rotation numbers, majors and co-roots, and the
//! unicritical ↔ maximally-critical correspondence.
//!
//! Side `i` of a rotational polygon `x_0 < … < x_{n−1}` joins `x_i` to
//! `x_{i+1}` and cuts off the arc `(x_i, x_{i+1})`. If `σ_d` shifts indices
//! by `s`, that arc of length `ℓ_i` is carried around the circle onto arc
//! `i + s`, so `m_i = d·ℓ_i − ℓ_{i+s}` is a non-negative integer: the number
//! of critical chords that fit behind side `i`. The `m_i` sum to `d − 1`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::circle::{arc_length, fixed_points, in_arc, in_closed_arc, orbit, sigma, sigma_iter, CirclePoint, Degree};
use crate::error::{Error, Result};
use crate::face::{faces, Face};
use crate::leaves::{hull_sides, leaf_image, Lamination, Leaf};
use crate::pullback::{critical_sectors, pullback, CriticalPortrait, PullbackState};

/// Combinatorial rotation number `p/q` in lowest terms, `0 ≤ p/q < 1`.
pub type Rotation = Ratio<usize>;

fn serialize_rotation<S: Serializer>(r: &Rotation, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

/// Rotation number of a finite set carried onto itself preserving circular order.
pub fn rotation_number(d: Degree, points: &[CirclePoint]) -> Result<Rotation> {
    let pts: Vec<CirclePoint> = points.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if pts.is_empty() {
        return Err(Error::NotRotational("empty set".into()));
    }
    index_shift(d, &pts).map(|s| Ratio::new(s, pts.len()))
}

// The constant `j − i (mod n)` with `σ(x_i) = x_j`, for sorted distinct points.
fn index_shift(d: Degree, pts: &[CirclePoint]) -> Result<usize> {
    let n = pts.len();
    let mut shift = None;
    for (i, x) in pts.iter().enumerate() {
        let j = pts.binary_search(&sigma(d, x)).map_err(|_| Error::NotInvariant)?;
        let s = (j + n - i) % n;
        match shift {
            None => shift = Some(s),
            Some(s0) if s0 != s => return Err(Error::NotRotational(format!("order not preserved at index {i}"))),
            _ => {}
        }
    }
    Ok(shift.expect("nonempty"))
}

/// A finite rotational set: one periodic orbit, or several carried around
/// together with a common rotation number.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RotationalOrbit {
    pub degree: Degree,
    pub points: Vec<CirclePoint>,
    #[serde(serialize_with = "serialize_rotation")]
    pub rotation: Rotation,
}

impl RotationalOrbit {
    pub fn new(degree: Degree, points: impl IntoIterator<Item = CirclePoint>) -> Result<Self> {
        let points: Vec<CirclePoint> = points.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let rotation = rotation_number(degree, &points)?;
        Ok(RotationalOrbit { degree, points, rotation })
    }

    /// Period of the points (all points of a rotational set share it).
    pub fn period(&self) -> usize {
        orbit(self.degree, &self.points[0]).period()
    }

    /// Sides of the convex hull; a single leaf when there are two points.
    pub fn sides(&self) -> Vec<Leaf> {
        hull_sides(&self.points)
    }

    fn shift(&self) -> usize {
        index_shift(self.degree, &self.points).expect("validated at construction")
    }

    /// `m_i` for every side `i`; see the module docs.
    pub fn criticality(&self) -> Vec<usize> {
        let n = self.points.len();
        let arcs: Vec<BigRational> = (0..n).map(|i| arc_length(&self.points[i], &self.points[(i + 1) % n])).collect();
        let s = self.shift();
        let d = BigRational::from_integer(BigInt::from(self.degree.get()));
        (0..n)
            .map(|i| {
                let m = &d * &arcs[i] - &arcs[(i + s) % n];
                debug_assert!(m.is_integer());
                m.to_integer().to_usize().expect("non-negative")
            })
            .collect()
    }

    /// The side `{x_i, x_{i+1}}` behind which all criticality sits, if any.
    pub fn critical_side(&self) -> Option<usize> {
        let m = self.criticality();
        let total = self.degree.as_usize() - 1;
        m.iter().position(|&x| x == total)
    }

    /// All `d − 1` critical chords fit behind a single side.
    pub fn is_unicritical(&self) -> bool {
        self.points.len() >= 2 && self.critical_side().is_some()
    }

    fn side(&self, i: usize) -> Leaf {
        let n = self.points.len();
        Leaf::new(self.points[i].clone(), self.points[(i + 1) % n].clone()).expect("distinct points")
    }

    /// Closed arc cut off by side `i`.
    fn arc_behind(&self, i: usize) -> (&CirclePoint, &CirclePoint) {
        let n = self.points.len();
        (&self.points[i], &self.points[(i + 1) % n])
    }
}

/// Every rotational orbit of exact period `q`, optionally with rotation
/// number `p/q`, by brute force over the points `k/(d^q − 1)`.
pub fn enumerate_rotational_orbits(d: Degree, q: usize, p: Option<usize>) -> Vec<RotationalOrbit> {
    let den = BigInt::from(d.get()).pow(q as u32) - 1;
    let mut seen: BTreeSet<CirclePoint> = BTreeSet::new();
    let mut out = Vec::new();
    let mut k = BigInt::zero();
    while k < den {
        let x = CirclePoint::new(BigRational::new(k.clone(), den.clone()));
        k += 1;
        if seen.contains(&x) {
            continue;
        }
        let cycle = orbit(d, &x).cycle;
        seen.extend(cycle.iter().cloned());
        if cycle.len() != q {
            continue;
        }
        if let Ok(o) = RotationalOrbit::new(d, cycle) {
            if p.is_none_or(|p| o.rotation == Ratio::new(p, q)) {
                out.push(o);
            }
        }
    }
    out.sort();
    out
}

/// Every fixed point lies behind one and the same side.
pub fn fixed_points_subtended(o: &RotationalOrbit) -> bool {
    let fps = fixed_points(o.degree);
    (0..o.points.len()).any(|i| {
        let (a, b) = o.arc_behind(i);
        fps.iter().all(|f| in_arc(f, a, b))
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MajorMinor {
    pub sides: Vec<Leaf>,
    pub major: Leaf,
    pub minor: Leaf,
}

/// Picks the major of a forward-invariant leaf orbit.
///
/// Among sides of length at least `1/(d+1)` the major is the one closest to
/// `1/d`; if none is that long, the longest side. Ties are errors.
pub fn major_minor(d: Degree, sides: &[Leaf]) -> Result<MajorMinor> {
    let sides: Vec<Leaf> = sides.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if sides.is_empty() {
        return Err(Error::NotInvariant);
    }
    if let Some(l) = sides.iter().find(|l| leaf_image(d, l).leaf().is_none_or(|m| !sides.contains(m))) {
        return Err(Error::NotForwardInvariant(l.clone()));
    }
    let crit = BigRational::new(1.into(), BigInt::from(d.get()));
    let floor = BigRational::new(1.into(), BigInt::from(d.get() + 1));
    let long: Vec<&Leaf> = sides.iter().filter(|l| l.length() >= floor).collect();
    let ranked: Vec<(BigRational, &Leaf)> = if long.is_empty() {
        sides.iter().map(|l| (-l.length(), l)).collect()
    } else {
        long.into_iter().map(|l| ((l.length() - &crit).abs(), l)).collect()
    };
    let best = ranked.iter().map(|(k, _)| k).min().expect("nonempty").clone();
    let winners: Vec<&Leaf> = ranked.iter().filter(|(k, _)| *k == best).map(|(_, l)| *l).collect();
    if winners.len() > 1 {
        return Err(Error::MajorTie(winners[0].clone(), winners[1].clone()));
    }
    let major = winners[0].clone();
    let minor = leaf_image(d, &major).leaf().expect("checked above").clone();
    Ok(MajorMinor { sides, major, minor })
}

/// `|1/d − length(M)| ≤ 1/(d(d+1))`.
pub fn major_length_bound_check(d: Degree, m: &Leaf) -> bool {
    let dd = BigInt::from(d.get());
    let crit = BigRational::new(1.into(), dd.clone());
    let slack = BigRational::new(1.into(), &dd * (&dd + 1));
    (crit - m.length()).abs() <= slack
}

/// The unicritical pullback lamination of `o`: its sides pulled back along
/// the all-critical `d`-gon that touches the major.
pub fn unicritical_lamination(o: &RotationalOrbit, depth: usize) -> Result<PullbackState> {
    let d = o.degree;
    let i = o
        .critical_side()
        .filter(|_| o.points.len() >= 2)
        .ok_or_else(|| Error::NotRotational("orbit is not unicritical".into()))?;
    let base = &o.points[i];
    let gon: Vec<CirclePoint> =
        (0..d.get()).map(|k| base.add(&BigRational::new(k.into(), BigInt::from(d.get())))).collect();
    let c = CriticalPortrait::from_polygons(d, vec![gon])?;
    pullback(&Lamination::new(d, o.sides()), &c, depth)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoRootSet {
    /// The central gap: the face behind the major.
    pub gap: Face,
    /// `1 +` the criticality held by the central gap.
    pub local_degree: usize,
    pub coroots: Vec<CirclePoint>,
}

impl CoRootSet {
    pub fn is_global(&self, d: Degree) -> bool {
        self.local_degree == d.as_usize()
    }

    /// Pairwise circular distances strictly exceed `1/d`.
    pub fn spacing_holds(&self, d: Degree) -> bool {
        let min = BigRational::new(1.into(), BigInt::from(d.get()));
        self.coroots.iter().enumerate().all(|(i, a)| self.coroots[i + 1..].iter().all(|b| a.distance(b) > min))
    }
}

/// Co-roots of a (locally) unicritical polygon in a pullback lamination `l`
/// built with portrait `c`: points of the central gap's boundary fixed by
/// `σ_d^q`, other than the polygon's vertices.
pub fn find_coroots(l: &Lamination, c: &CriticalPortrait, polygon: &RotationalOrbit) -> Result<CoRootSet> {
    let d = c.degree();
    let i = polygon
        .criticality()
        .iter()
        .position(|&m| m > 0)
        .ok_or_else(|| Error::NotRotational("polygon carries no criticality".into()))?;
    if polygon.criticality().iter().filter(|&&m| m > 0).count() != 1 {
        return Err(Error::NotRotational("criticality sits behind several sides".into()));
    }
    let major = polygon.side(i);
    let (a, b) = polygon.arc_behind(i);
    let gap = faces(l)
        .into_iter()
        .find(|f| f.has_leaf(&major) && f.vertices().iter().all(|v| in_closed_arc(v, a, b)))
        .ok_or_else(|| Error::InsufficientDepth("no face behind the major".into()))?;
    let local_degree = 1 + c
        .critical_sets()
        .iter()
        .filter(|set| set.iter().all(|v| gap.closure_contains(v)))
        .map(|set| set.len() - 1)
        .sum::<usize>();
    let q = polygon.period();
    let den = BigInt::from(d.get()).pow(q as u32) - 1;
    let mut coroots = Vec::new();
    let mut k = BigInt::zero();
    while k < den {
        let x = CirclePoint::new(BigRational::new(k.clone(), den.clone()));
        k += 1;
        if gap.closure_contains(&x) && !polygon.points.contains(&x) && sigma_iter(d, &x, q) == x {
            coroots.push(x);
        }
    }
    let expected = local_degree.saturating_sub(2);
    if coroots.len() != expected {
        return Err(Error::CoRootCount { expected, found: coroots.len() });
    }
    Ok(CoRootSet { gap, local_degree, coroots })
}

/// A unicritical rotational polygon and its maximally critical partner.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorrespondencePair {
    pub degree: Degree,
    pub local_degree: usize,
    pub unicritical: RotationalOrbit,
    pub coroots: Vec<CirclePoint>,
    pub maximal: RotationalOrbit,
    /// Sides of the maximal polygon with criticality behind them, in order.
    pub majors: Vec<Leaf>,
}

fn forward_orbit(d: Degree, x: &CirclePoint) -> Vec<CirclePoint> {
    orbit(d, x).cycle
}

/// Adds the orbits of the co-roots to `p`'s vertices.
pub fn uni_to_max(l: &Lamination, c: &CriticalPortrait, p: &RotationalOrbit) -> Result<CorrespondencePair> {
    let d = c.degree();
    let roots = find_coroots(l, c, p)?;
    let mut vertices: BTreeSet<CirclePoint> = p.points.iter().cloned().collect();
    for c in &roots.coroots {
        vertices.extend(forward_orbit(d, c));
    }
    let maximal = RotationalOrbit::new(d, vertices)?;
    let q = p.points.len();
    if maximal.points.len() != q * (roots.local_degree - 1) {
        return Err(Error::CoRootCount { expected: q * (roots.local_degree - 1), found: maximal.points.len() });
    }
    let back = max_to_uni(&maximal)?;
    if back.unicritical != *p || back.local_degree != roots.local_degree {
        return Err(Error::Other(format!(
            "round trip recovered {:?} instead of the original polygon",
            back.unicritical.points
        )));
    }
    Ok(CorrespondencePair { coroots: roots.coroots, ..back })
}

/// Recovers the unicritical polygon from a maximally critical one whose
/// critical sides form a single chain of adjacent majors: the chain's two
/// ends lie on the unicritical orbit, its inner vertices are co-roots.
pub fn max_to_uni(g: &RotationalOrbit) -> Result<CorrespondencePair> {
    let d = g.degree;
    let n = g.points.len();
    let m = g.criticality();
    let critical: Vec<usize> = (0..n).filter(|&i| m[i] > 0).collect();
    if critical.is_empty() || critical.len() == n {
        return Err(Error::NoAdjacentMajors("no proper chain of critical sides".into()));
    }
    // the chain starts at a critical side whose predecessor is not critical
    let starts: Vec<usize> = critical.iter().copied().filter(|&i| m[(i + n - 1) % n] == 0).collect();
    if starts.len() != 1 {
        return Err(Error::NoAdjacentMajors(format!("{} separate runs of critical sides", starts.len())));
    }
    let first = starts[0];
    let len = critical.len();
    let majors: Vec<Leaf> = (0..len).map(|k| g.side((first + k) % n)).collect();
    let inner: Vec<CirclePoint> = (1..len).map(|k| g.points[(first + k) % n].clone()).collect();
    let end = &g.points[(first + len) % n];
    let uni_points = forward_orbit(d, &g.points[first]);
    if !uni_points.contains(end) {
        return Err(Error::NoAdjacentMajors("chain ends lie on different orbits".into()));
    }
    let mut rest: BTreeSet<CirclePoint> = g.points.iter().cloned().collect();
    for x in &uni_points {
        rest.remove(x);
    }
    for c in &inner {
        if uni_points.contains(c) {
            return Err(Error::NoAdjacentMajors("co-root on the unicritical orbit".into()));
        }
        for x in forward_orbit(d, c) {
            rest.remove(&x);
        }
    }
    if !rest.is_empty() {
        return Err(Error::NotRotational("vertices outside the unicritical and co-root orbits".into()));
    }
    // majors must lie in separate orbits of sides
    let side_orbit = |l: &Leaf| -> BTreeSet<Leaf> {
        let mut out = BTreeSet::new();
        let mut cur = l.clone();
        while out.insert(cur.clone()) {
            cur = leaf_image(d, &cur).leaf().expect("sides of a rotational set are not critical").clone();
        }
        out
    };
    for (i, a) in majors.iter().enumerate() {
        if majors[i + 1..].iter().any(|b| side_orbit(a).contains(b)) {
            return Err(Error::NoAdjacentMajors("two majors share an orbit".into()));
        }
    }
    let unicritical = RotationalOrbit::new(d, uni_points)?;
    Ok(CorrespondencePair { degree: d, local_degree: len + 1, unicritical, coroots: inner, maximal: g.clone(), majors })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PlacementReport {
    /// Sectors with a nonzero rotation that also hold a fixed point.
    pub fixed_point_conflicts: Vec<(usize, CirclePoint)>,
    /// Adjacent sectors both assigned nonzero rotation.
    pub adjacent_conflicts: Vec<(usize, usize)>,
}

impl PlacementReport {
    pub fn is_ok(&self) -> bool {
        self.fixed_point_conflicts.is_empty() && self.adjacent_conflicts.is_empty()
    }
}

/// Checks an assignment of rotation numbers to the critical sectors of `c`
/// (indexed as returned by `critical_sectors`).
pub fn validate_rotational_placement(
    c: &CriticalPortrait,
    assignments: &BTreeMap<usize, Rotation>,
) -> Result<PlacementReport> {
    let sectors = critical_sectors(c)?;
    let fps = fixed_points(c.degree());
    let rotating: Vec<usize> =
        assignments.iter().filter(|(&i, r)| i < sectors.len() && !r.is_zero()).map(|(&i, _)| i).collect();
    let mut report = PlacementReport::default();
    for &i in &rotating {
        for f in &fps {
            if sectors[i].arcs.iter().any(|(a, b)| in_arc(f, a, b)) {
                report.fixed_point_conflicts.push((i, f.clone()));
            }
        }
    }
    for (k, &i) in rotating.iter().enumerate() {
        for &j in &rotating[k + 1..] {
            if sectors[i].chords.iter().any(|ch| sectors[j].chords.contains(ch)) {
                report.adjacent_conflicts.push((i, j));
            }
        }
    }
    Ok(report)
}
