//! Critical portraits, inverse branches, and the pullback scheme
//! `F_k = F_{k−1} ∪ τ_1(F_{k−1}) ∪ … ∪ τ_d(F_{k−1})`.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize, Serializer};

use crate::circle::{in_arc, in_closed_arc, preimages, sigma, CirclePoint, Degree};
use crate::error::{Error, Result};
use crate::face::{faces, faces_with_points, Face};
use crate::fpp::{canonical_portraits, fixed_sectors, FixedPointPortrait, FixedSector};
use crate::leaves::{hull_sides, is_critical, leaf_image, leaves_cross, Lamination, Leaf, LeafImage, Polygon};
use crate::rotation::rotation_number;

/// A maximal non-crossing family of critical chords.
///
/// Chords sharing endpoints form critical sets: all-critical polygons, or
/// several polygons glued at a vertex. A set with `k` vertices carries
/// criticality `k − 1`, and the total is `d − 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalPortrait {
    degree: Degree,
    chords: Vec<Leaf>,
    sets: Vec<Vec<CirclePoint>>,
}

impl CriticalPortrait {
    pub fn from_chords(degree: Degree, chords: impl IntoIterator<Item = Leaf>) -> Result<Self> {
        let chords: Vec<Leaf> = chords.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        for c in &chords {
            if !is_critical(degree, c) {
                return Err(Error::InvalidCriticalPortrait(format!("chord {c} is not critical")));
            }
        }
        for (i, a) in chords.iter().enumerate() {
            if let Some(b) = chords[i + 1..].iter().find(|b| leaves_cross(a, b)) {
                return Err(Error::Crossing(a.clone(), b.clone()));
            }
        }
        let mut sets: Vec<BTreeSet<CirclePoint>> = Vec::new();
        for c in &chords {
            let mut merged: BTreeSet<CirclePoint> = c.endpoints().into_iter().cloned().collect();
            sets.retain(|g| {
                if g.iter().any(|x| merged.contains(x)) {
                    merged.extend(g.iter().cloned());
                    false
                } else {
                    true
                }
            });
            sets.push(merged);
        }
        let mut sets: Vec<Vec<CirclePoint>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        sets.sort();
        let total: usize = sets.iter().map(|s| s.len() - 1).sum();
        if total != degree.as_usize() - 1 {
            return Err(Error::InvalidCriticalPortrait(format!(
                "total criticality {total}, expected {}",
                degree.get() - 1
            )));
        }
        Ok(CriticalPortrait { degree, chords, sets })
    }

    /// Each entry is an all-critical polygon, or a chord when it has two vertices.
    pub fn from_polygons(degree: Degree, polygons: Vec<Vec<CirclePoint>>) -> Result<Self> {
        let mut chords = Vec::new();
        for p in polygons {
            let sides = hull_sides(&p);
            if sides.is_empty() {
                return Err(Error::InvalidCriticalPortrait("a critical polygon needs two vertices".into()));
            }
            chords.extend(sides);
        }
        Self::from_chords(degree, chords)
    }

    pub fn degree(&self) -> Degree {
        self.degree
    }

    pub fn chords(&self) -> &[Leaf] {
        &self.chords
    }

    /// Vertex sets of the critical sets, each sorted.
    pub fn critical_sets(&self) -> &[Vec<CirclePoint>] {
        &self.sets
    }

    /// Chords with both endpoints in the closure of fixed sector `s`.
    pub fn chords_in(&self, s: &FixedSector) -> Vec<&Leaf> {
        self.chords.iter().filter(|c| c.endpoints().iter().all(|p| s.closure_contains(p))).collect()
    }
}

impl Serialize for CriticalPortrait {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out<'a> {
            degree: Degree,
            chords: &'a [Leaf],
        }
        Out { degree: self.degree, chords: &self.chords }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CriticalPortrait {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            degree: Degree,
            chords: Vec<Leaf>,
        }
        let raw = Raw::deserialize(de)?;
        CriticalPortrait::from_chords(raw.degree, raw.chords).map_err(serde::de::Error::custom)
    }
}

/// Region bounded by critical chords and arcs; it covers the circle once.
///
/// Open arcs belong to the sector outright. Each vertex of a critical set
/// is owned by exactly one of the sectors meeting it, listed in `owned`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CriticalSector {
    pub arcs: Vec<(CirclePoint, CirclePoint)>,
    pub chords: Vec<Leaf>,
    pub owned: Vec<CirclePoint>,
    pub terminal: bool,
}

impl CriticalSector {
    pub fn contains(&self, t: &CirclePoint) -> bool {
        self.owned.contains(t) || self.arcs.iter().any(|(a, b)| in_arc(t, a, b))
    }

    /// Membership in the closed arcs or at a corner vertex, ignoring ownership.
    pub fn closure_contains(&self, t: &CirclePoint) -> bool {
        self.chords.iter().any(|c| c.has_endpoint(t)) || self.arcs.iter().any(|(a, b)| in_closed_arc(t, a, b))
    }

    pub fn arc_length(&self) -> BigRational {
        self.arcs.iter().fold(BigRational::zero(), |acc, (a, b)| acc + crate::circle::arc_length(a, b))
    }
}

/// Critical sectors with the default vertex ownership: each vertex belongs
/// to the sector whose arc starts there.
pub fn critical_sectors(c: &CriticalPortrait) -> Result<Vec<CriticalSector>> {
    critical_sectors_with(c, &Lamination::empty(c.degree))
}

/// Critical sectors whose vertex ownership keeps the leaves of `f0` that
/// touch the portrait inside the sector that contains them, so those leaves
/// are their own preimages.
pub fn critical_sectors_with(c: &CriticalPortrait, f0: &Lamination) -> Result<Vec<CriticalSector>> {
    let d = c.degree;
    let sector_faces: Vec<Face> =
        faces_with_points(c.chords.iter(), &[]).into_iter().filter(|f| !f.is_polygon()).collect();
    let share = BigRational::new(One::one(), d.big());
    if sector_faces.len() != d.as_usize() || sector_faces.iter().any(|f| f.total_arc_length() != share) {
        return Err(Error::InvalidCriticalPortrait("sectors do not each cover the circle once".into()));
    }
    let mut owned: Vec<Vec<CirclePoint>> = vec![Vec::new(); sector_faces.len()];
    for set in &c.sets {
        for (v, i) in assign_vertices(set, &sector_faces, f0)? {
            owned[i].push(v);
        }
    }
    Ok(sector_faces
        .iter()
        .zip(owned)
        .map(|(f, mut owned)| {
            owned.sort();
            let mut chords = f.leaves();
            chords.sort();
            CriticalSector {
                arcs: f.arcs().map(|(a, b)| (a.clone(), b.clone())).collect(),
                terminal: chords.len() == 1,
                chords,
                owned,
            }
        })
        .collect())
}

// Matches the vertices of one critical set with the sectors that meet it.
// Leaves of `f0` at a vertex force its owner; the rest prefer the sector
// whose arc starts at the vertex.
fn assign_vertices(set: &[CirclePoint], sectors: &[Face], f0: &Lamination) -> Result<Vec<(CirclePoint, usize)>> {
    let touching: Vec<usize> =
        (0..sectors.len()).filter(|&i| set.iter().any(|v| sectors[i].vertices().contains(v))).collect();
    let candidates: Vec<Vec<usize>> = touching
        .iter()
        .map(|&i| {
            let verts = sectors[i].vertices();
            let mut c: Vec<usize> = (0..set.len()).filter(|&k| verts.contains(&set[k])).collect();
            c.sort_by_key(|&k| !sectors[i].arcs().any(|(a, _)| a == &set[k]));
            c
        })
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; set.len()];
    let mut forced = vec![false; set.len()];
    for (k, v) in set.iter().enumerate() {
        let hit = f0.leaves.iter().filter_map(|l| l.other_end(v)).find_map(|w| {
            (0..touching.len()).find(|&j| candidates[j].contains(&k) && sectors[touching[j]].closure_contains(w))
        });
        if let Some(j) = hit {
            if !owner.contains(&Some(j)) {
                owner[k] = Some(j);
                forced[k] = true;
            }
        }
    }
    fn augment(j: usize, cand: &[Vec<usize>], owner: &mut [Option<usize>], forced: &[bool], seen: &mut [bool]) -> bool {
        for &k in &cand[j] {
            if seen[k] || forced[k] {
                continue;
            }
            seen[k] = true;
            let free = match owner[k] {
                None => true,
                Some(other) => augment(other, cand, owner, forced, seen),
            };
            if free {
                owner[k] = Some(j);
                return true;
            }
        }
        false
    }
    for j in 0..touching.len() {
        if owner.contains(&Some(j)) {
            continue;
        }
        let mut seen = vec![false; set.len()];
        if !augment(j, &candidates, &mut owner, &forced, &mut seen) {
            return Err(Error::InvalidCriticalPortrait("cannot share critical vertices among sectors".into()));
        }
    }
    Ok(owner.into_iter().enumerate().filter_map(|(k, j)| j.map(|j| (set[k].clone(), touching[j]))).collect())
}

/// The preimage of `t` owned by `sector`.
pub fn branch_inverse(d: Degree, sector: &CriticalSector, t: &CirclePoint) -> CirclePoint {
    let mut hits = preimages(d, t).into_iter().filter(|x| sector.contains(x));
    let x = hits.next().expect("every sector holds a preimage");
    debug_assert!(hits.next().is_none(), "sector holds two preimages of {t}");
    x
}

fn leaf_inverse(d: Degree, sector: &CriticalSector, l: &Leaf) -> Leaf {
    Leaf::new(branch_inverse(d, sector, l.lo()), branch_inverse(d, sector, l.hi()))
        .expect("inverse branches are injective")
}

/// Successive stages of a pullback, with the stage at which each leaf appeared.
#[derive(Clone, Debug)]
pub struct PullbackState {
    pub degree: Degree,
    pub portrait: CriticalPortrait,
    pub sectors: Vec<CriticalSector>,
    pub stages: Vec<Lamination>,
    pub first_depth: BTreeMap<Leaf, usize>,
    pub fpp: Option<FixedPointPortrait>,
}

impl PullbackState {
    pub fn depth(&self) -> usize {
        self.stages.len() - 1
    }

    pub fn last(&self) -> &Lamination {
        self.stages.last().expect("stage 0 always exists")
    }

    pub fn initial(&self) -> &Lamination {
        &self.stages[0]
    }

    /// Leaves that first appear at stage `k`.
    pub fn new_leaves(&self, k: usize) -> impl Iterator<Item = &Leaf> {
        self.first_depth.iter().filter(move |(_, &dk)| dk == k).map(|(l, _)| l)
    }
}

pub fn pullback(f0: &Lamination, c: &CriticalPortrait, n: usize) -> Result<PullbackState> {
    let d = c.degree;
    if f0.degree != d {
        return Err(Error::DegreeMismatch(f0.degree.get(), d.get()));
    }
    for chord in c.chords() {
        if let Some(l) = f0.leaves.iter().find(|l| leaves_cross(l, chord)) {
            return Err(Error::Incompatible { chord: chord.clone(), leaf: l.clone() });
        }
    }
    for l in &f0.leaves {
        if let LeafImage::Leaf(img) = leaf_image(d, l) {
            if !f0.contains(&img) {
                return Err(Error::NotForwardInvariant(l.clone()));
            }
        }
    }
    let portrait = c.clone();
    let sectors = critical_sectors_with(&portrait, f0)?;
    let mut first_depth: BTreeMap<Leaf, usize> = f0.leaves.iter().map(|l| (l.clone(), 0)).collect();
    let mut stages = vec![f0.clone().with_depth(0)];
    let mut frontier: Vec<Leaf> = f0.leaves.iter().cloned().collect();
    for k in 1..=n {
        let mut next = stages[k - 1].clone().with_depth(k);
        let mut fresh = Vec::new();
        for l in &frontier {
            for s in &sectors {
                let pre = leaf_inverse(d, s, l);
                if next.leaves.insert(pre.clone()) {
                    first_depth.insert(pre.clone(), k);
                    fresh.push(pre);
                }
            }
        }
        stages.push(next);
        frontier = fresh;
    }
    Ok(PullbackState { degree: d, portrait, sectors, stages, first_depth, fpp: None })
}

/// Pullback of the portrait's fixed leaves under its first canonical
/// critical portrait.
pub fn canonical_lamination(p: &FixedPointPortrait, n: usize) -> Result<PullbackState> {
    let choice = canonical_portraits(p).into_iter().next().expect("every sector has a placement");
    let c = choice.critical_portrait(p.degree())?;
    let f0 = Lamination::new(p.degree(), p.fixed_leaves());
    let mut state = pullback(&f0, &c, n)?;
    state.fpp = Some(p.clone());
    Ok(state)
}

/// Stages where two canonical choices disagree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CpMismatch {
    pub choice: usize,
    pub stage: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CpEqualityReport {
    pub choices: usize,
    pub depth: usize,
    pub mismatches: Vec<CpMismatch>,
}

impl CpEqualityReport {
    pub fn is_equal(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Pulls back under every canonical choice and compares each stage with the
/// first choice's.
pub fn cp_pullback_equality(p: &FixedPointPortrait, n: usize) -> Result<CpEqualityReport> {
    let f0 = Lamination::new(p.degree(), p.fixed_leaves());
    let choices = canonical_portraits(p);
    let states =
        choices.iter().map(|c| pullback(&f0, &c.critical_portrait(p.degree())?, n)).collect::<Result<Vec<_>>>()?;
    let mut mismatches = Vec::new();
    for (i, s) in states.iter().enumerate().skip(1) {
        for k in 1..=n {
            if s.stages[k].leaves != states[0].stages[k].leaves {
                mismatches.push(CpMismatch { choice: i, stage: k });
            }
        }
    }
    Ok(CpEqualityReport { choices: choices.len(), depth: n, mismatches })
}

/// Outcome of the canonical-lamination property checks.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClpReport {
    pub depth: usize,
    /// Longest leaf first appearing at each stage (index 0 = initial data).
    pub max_new_length: Vec<Option<BigRational>>,
    /// Leaves whose forward orbit misses the initial data within their stage.
    pub orbit_failures: Vec<Leaf>,
    /// Leaves first appearing at stage `k` longer than `1/(2·d^k)`.
    pub length_violations: Vec<(usize, Leaf)>,
    /// Fixed sectors whose gap boundary leaves are not preimages of the
    /// sector's boundary leaves.
    pub gap_failures: Vec<String>,
}

impl ClpReport {
    pub fn length_bound_holds(&self) -> bool {
        self.length_violations.is_empty()
    }

    pub fn is_ok(&self) -> bool {
        self.orbit_failures.is_empty() && self.length_bound_holds() && self.gap_failures.is_empty()
    }
}

pub fn length_bound(d: Degree, k: usize) -> BigRational {
    let dk = num_traits::pow(d.big(), k);
    BigRational::new(One::one(), dk * 2)
}

fn reaches(d: Degree, l: &Leaf, targets: &Lamination, steps: usize) -> bool {
    let mut cur = l.clone();
    for _ in 0..=steps {
        if targets.contains(&cur) {
            return true;
        }
        match leaf_image(d, &cur) {
            LeafImage::Leaf(next) => cur = next,
            LeafImage::Degenerate(_) => return false,
        }
    }
    false
}

pub fn clp_checks(state: &PullbackState) -> ClpReport {
    let d = state.degree;
    let n = state.depth();
    let mut report = ClpReport { depth: n, max_new_length: vec![None; n + 1], ..Default::default() };
    for (l, &k) in &state.first_depth {
        if !reaches(d, l, state.initial(), k) {
            report.orbit_failures.push(l.clone());
        }
        let len = l.length();
        let slot = &mut report.max_new_length[k];
        if slot.as_ref().is_none_or(|m| &len > m) {
            *slot = Some(len.clone());
        }
        if k >= 1 && len > length_bound(d, k) {
            report.length_violations.push((k, l.clone()));
        }
    }
    if let (Some(p), true) = (&state.fpp, n >= 1) {
        for s in fixed_sectors(p) {
            let boundary = Lamination::new(d, s.boundary_leaves.iter().cloned());
            match invariant_gap(state, &s) {
                Ok(gap) => {
                    for l in gap.leaves() {
                        if !reaches(d, &l, &boundary, n) {
                            report.gap_failures.push(format!("sector {}: leaf {l} does not map to its boundary", s.id));
                        }
                    }
                }
                Err(e) => report.gap_failures.push(format!("sector {}: {e}", s.id)),
            }
        }
    }
    report
}

fn vertex_invariant(d: Degree, f: &Face) -> bool {
    let v = f.vertices();
    v.iter().all(|x| v.contains(&sigma(d, x)))
}

/// The face of the last stage that contains the sector's critical chords
/// and whose vertex set maps into itself.
pub fn invariant_gap(state: &PullbackState, s: &FixedSector) -> Result<Face> {
    let points: Vec<&CirclePoint> = state.portrait.chords_in(s).into_iter().flat_map(|c| c.endpoints()).collect();
    if points.is_empty() {
        return Err(Error::NoInvariantFace);
    }
    faces(state.last())
        .into_iter()
        .find(|f| points.iter().all(|v| f.closure_contains(v)) && vertex_invariant(state.degree, f))
        .ok_or(Error::NoInvariantFace)
}

/// Index of the face whose closure holds the image of `g`'s vertices; ties
/// are broken by the image of an interior point of one of `g`'s arcs.
fn image_face(d: Degree, all: &[Face], g: &Face) -> Option<usize> {
    let image: Vec<CirclePoint> = g.vertices().iter().map(|v| sigma(d, v)).collect();
    let candidates: Vec<usize> = (0..all.len()).filter(|&i| image.iter().all(|x| all[i].closure_contains(x))).collect();
    if candidates.len() <= 1 {
        return candidates.first().copied();
    }
    let probe = g.arcs().next().map(|(a, b)| {
        let half = crate::circle::arc_length(a, b) / BigRational::from_integer(2.into());
        sigma(d, &a.add(&half))
    });
    match probe {
        Some(p) => candidates
            .iter()
            .copied()
            .find(|&i| all[i].arc_interior_contains(&p) || all[i].closure_contains(&p))
            .or(candidates.first().copied()),
        None => candidates.first().copied(),
    }
}

/// True iff the forward face itinerary of face `start` repeats within `depth` steps.
fn eventually_periodic(d: Degree, all: &[Face], start: usize, depth: usize) -> bool {
    let mut seen = vec![start];
    let mut cur = start;
    for _ in 0..=depth {
        match image_face(d, all, &all[cur]) {
            Some(next) if seen.contains(&next) => return true,
            Some(next) => {
                seen.push(next);
                cur = next;
            }
            None => return false,
        }
    }
    false
}

/// The face whose closure holds `chord` without having it as a boundary leaf.
fn face_holding(all: &[Face], chord: &Leaf) -> Option<usize> {
    all.iter().position(|f| chord.endpoints().iter().all(|v| f.closure_contains(v)) && !f.has_leaf(chord))
}

/// Finite-depth check that every critical chord sits inside a face whose
/// itinerary under `σ_d` is eventually periodic within `depth` steps.
pub fn is_hyperbolic_approx(l: &Lamination, c: &CriticalPortrait, depth: usize) -> bool {
    let d = c.degree;
    if c.chords().iter().any(|ch| l.contains(ch)) {
        return false;
    }
    let all = faces(l);
    c.chords().iter().all(|ch| match face_holding(&all, ch) {
        Some(i) => eventually_periodic(d, &all, i, depth),
        None => false,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FixedObject {
    Point(CirclePoint),
    Leaf(Leaf),
}

impl FixedObject {
    fn points(&self) -> Vec<&CirclePoint> {
        match self {
            FixedObject::Point(p) => vec![p],
            FixedObject::Leaf(l) => l.endpoints().to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Case {
    I,
    II,
    III,
}

/// Type 1: the center of an invariant Fatou gap. Type 2: a rotational polygon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FixedObjectType {
    GapCenter,
    RotationalPolygon,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Witness {
    Gap(Face),
    Polygon(Polygon),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SectorClassification {
    pub sector: usize,
    pub case: Case,
    pub object_type: FixedObjectType,
    pub objects: Vec<FixedObject>,
    pub subtended: Vec<bool>,
    pub witness: Witness,
}

/// Fixed leaves on the sector boundary, then fixed points on it that are
/// not endpoints of those leaves.
pub fn fixed_objects(s: &FixedSector) -> Vec<FixedObject> {
    let mut out: Vec<FixedObject> = s.boundary_leaves.iter().cloned().map(FixedObject::Leaf).collect();
    for p in &s.boundary_points {
        if !s.boundary_leaves.iter().any(|l| l.has_endpoint(p)) {
            out.push(FixedObject::Point(p.clone()));
        }
    }
    out
}

// `inside` strictly within the open arc cut off by `l` on one side, and
// every point of `outside` strictly on the other side; `touching` points may
// also sit on `l`'s endpoints.
fn cuts_off(l: &Leaf, inside: &[&CirclePoint], outside: &[&CirclePoint], touching: &[&CirclePoint]) -> bool {
    for (a, b) in [(l.lo(), l.hi()), (l.hi(), l.lo())] {
        let ok = inside.iter().all(|x| in_arc(x, a, b))
            && outside.iter().all(|x| in_arc(x, b, a))
            && touching.iter().all(|x| !in_arc(x, a, b));
        if ok {
            return true;
        }
    }
    false
}

/// Classifies the fixed object inside fixed sector `s` by which of the
/// sector's fixed objects are subtended by leaves of `l`.
///
/// An object is subtended when a leaf of `l` lying in the sector, other than
/// a boundary leaf, has the object strictly on one side and every other
/// fixed object of the sector, together with the sector's critical chords,
/// on the other (chord endpoints may touch the leaf).
pub fn classify_sector(l: &Lamination, c: &CriticalPortrait, s: &FixedSector) -> Result<SectorClassification> {
    let d = c.degree();
    if l.depth == 0 {
        return Err(Error::InsufficientDepth("classification needs pulled-back leaves".into()));
    }
    let objects = fixed_objects(s);
    let chords = c.chords_in(s);
    let chord_points: Vec<&CirclePoint> = chords.iter().flat_map(|ch| ch.endpoints()).collect();
    let candidates: Vec<&Leaf> = l
        .leaves
        .iter()
        .filter(|x| !s.boundary_leaves.contains(x))
        .filter(|x| x.endpoints().iter().all(|p| s.closure_contains(p)))
        .collect();
    let subtended: Vec<bool> = objects
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let inside = o.points();
            let outside: Vec<&CirclePoint> =
                objects.iter().enumerate().filter(|&(j, _)| j != i).flat_map(|(_, x)| x.points()).collect();
            candidates.iter().any(|x| cuts_off(x, &inside, &outside, &chord_points))
        })
        .collect();
    let all = faces(l);
    let count = subtended.iter().filter(|&&b| b).count();
    let (case, object_type) = match count {
        0 => (Case::I, FixedObjectType::GapCenter),
        n if n == objects.len() => (Case::II, FixedObjectType::RotationalPolygon),
        _ => (Case::III, FixedObjectType::GapCenter),
    };
    let witness = match object_type {
        FixedObjectType::GapCenter => {
            let gap = chords
                .iter()
                .filter_map(|ch| face_holding(&all, ch))
                .find(|&i| image_face(d, &all, &all[i]) == Some(i))
                .ok_or_else(|| Error::InsufficientDepth("no invariant gap in the sector".into()))?;
            Witness::Gap(all[gap].clone())
        }
        FixedObjectType::RotationalPolygon => {
            let poly = all
                .iter()
                .filter(|f| f.is_polygon())
                .map(|f| f.vertices().into_iter().collect::<Vec<_>>())
                .filter(|v| v.iter().all(|x| s.closure_contains(x)))
                .find(|v| matches!(rotation_number(d, v), Ok(r) if *r.numer() != 0))
                .ok_or_else(|| Error::InsufficientDepth("no invariant rotational polygon in the sector".into()))?;
            Witness::Polygon(Polygon::new(poly)?)
        }
    };
    Ok(SectorClassification { sector: s.id, case, object_type, objects, subtended, witness })
}

/// An invariant lap or gap with the periodic faces attached to it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlowerLike {
    pub core: Vec<CirclePoint>,
    pub petals: Vec<Face>,
    /// Periodicity of petals is checked up to this many steps.
    pub verified_depth: usize,
}

/// `core` must be invariant: its image lies within it.
pub fn flower_like(l: &Lamination, core: &[CirclePoint]) -> Result<FlowerLike> {
    let d = l.degree;
    let core: Vec<CirclePoint> = core.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if core.iter().any(|x| !core.contains(&sigma(d, x))) {
        return Err(Error::NotInvariant);
    }
    let sides = hull_sides(&core);
    let all = faces(l);
    let depth = l.depth.max(1);
    let petals = (0..all.len())
        .filter(|&i| {
            let f = &all[i];
            let is_core = f.is_polygon() && f.vertices().into_iter().collect::<Vec<_>>() == core;
            !is_core && sides.iter().any(|s| f.has_leaf(s)) && eventually_periodic(d, &all, i, depth)
        })
        .map(|i| all[i].clone())
        .collect();
    Ok(FlowerLike { core, petals, verified_depth: depth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpp::enumerate_fpps;
    use crate::leaves::check_invariance;

    fn deg(d: u32) -> Degree {
        Degree::new(d).unwrap()
    }

    fn q(a: i64, b: i64) -> CirclePoint {
        CirclePoint::frac(a, b)
    }

    fn portrait(d: u32, polys: &[&[(i64, i64)]]) -> CriticalPortrait {
        CriticalPortrait::from_polygons(
            deg(d),
            polys.iter().map(|p| p.iter().map(|&(a, b)| q(a, b)).collect()).collect(),
        )
        .unwrap()
    }

    fn quarter_leaf() -> FixedPointPortrait {
        FixedPointPortrait::new(deg(5), vec![vec![0, 1]]).unwrap()
    }

    #[test]
    fn portrait_validation() {
        assert!(CriticalPortrait::from_polygons(deg(2), vec![vec![q(0, 1), q(1, 4)]]).is_err());
        assert!(CriticalPortrait::from_polygons(deg(3), vec![vec![q(0, 1), q(1, 3)]]).is_err());
        assert!(CriticalPortrait::from_chords(deg(3), [Leaf::frac((0, 1), (1, 3)), Leaf::frac((1, 3), (2, 3))]).is_ok());
        let crossing = CriticalPortrait::from_polygons(deg(3), vec![vec![q(0, 1), q(1, 3)], vec![q(1, 6), q(1, 2)]]);
        assert!(crossing.is_err());
    }

    #[test]
    fn portrait_json() {
        let c = portrait(5, &[&[(0, 1), (1, 5)], &[(1, 4), (9, 20), (13, 20), (17, 20)]]);
        let s = serde_json::to_string(&c).unwrap();
        let back: CriticalPortrait = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        assert!(s.starts_with(r#"{"degree":5,"chords":[["0/1","1/5"]"#));
    }

    #[test]
    fn sectors_examples() {
        let s = critical_sectors(&portrait(2, &[&[(0, 1), (1, 2)]])).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|x| x.terminal));

        let c = portrait(5, &[&[(0, 1), (1, 5)], &[(1, 4), (9, 20), (13, 20), (17, 20)]]);
        let s = critical_sectors(&c).unwrap();
        assert_eq!(s.len(), 5);

        let s = critical_sectors(&portrait(3, &[&[(0, 1), (1, 3), (2, 3)]])).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.iter().all(|x| x.terminal));
    }

    #[test]
    fn branch_examples() {
        let d2 = deg(2);
        let s = critical_sectors(&portrait(2, &[&[(0, 1), (1, 2)]])).unwrap();
        let low = s.iter().find(|x| x.arcs[0].0 == q(0, 1)).unwrap();
        assert_eq!(branch_inverse(d2, low, &q(2, 7)), q(1, 7));
        assert_eq!(branch_inverse(d2, low, &q(0, 1)), q(0, 1));

        let c = portrait(5, &[&[(0, 1), (1, 5)], &[(1, 4), (9, 20), (13, 20), (17, 20)]]);
        let s = critical_sectors(&c).unwrap();
        let first = s.iter().find(|x| x.arcs.len() == 1 && x.arcs[0].0 == q(0, 1)).unwrap();
        assert_eq!(branch_inverse(deg(5), first, &q(1, 4)), q(1, 20));
    }

    #[test]
    fn every_point_has_one_preimage_per_sector() {
        for p in enumerate_fpps(deg(5)) {
            for choice in canonical_portraits(&p) {
                let c = choice.critical_portrait(deg(5)).unwrap();
                let f0 = Lamination::new(deg(5), p.fixed_leaves());
                for s in [critical_sectors(&c).unwrap(), critical_sectors_with(&c, &f0).unwrap()] {
                    for k in 0..40 {
                        let t = q(k, 40);
                        for x in preimages(deg(5), &t) {
                            assert_eq!(s.iter().filter(|sec| sec.contains(&x)).count(), 1);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn quarter_leaf_first_pullback() {
        let f0 = Lamination::new(deg(5), [Leaf::frac((0, 1), (1, 4))]);
        let expected: BTreeSet<Leaf> = [
            Leaf::frac((0, 1), (1, 4)),
            Leaf::frac((1, 20), (1, 5)),
            Leaf::frac((2, 5), (9, 20)),
            Leaf::frac((3, 5), (13, 20)),
            Leaf::frac((4, 5), (17, 20)),
        ]
        .into();
        for choice in canonical_portraits(&quarter_leaf()) {
            let c = choice.critical_portrait(deg(5)).unwrap();
            let st = pullback(&f0, &c, 1).unwrap();
            assert_eq!(st.stages[1].leaves, expected, "{:?}", choice.polygons);
        }
    }

    #[test]
    fn rabbit_sibling_triangle() {
        let f0 = Lamination::new(
            deg(2),
            [Leaf::frac((1, 7), (2, 7)), Leaf::frac((2, 7), (4, 7)), Leaf::frac((1, 7), (4, 7))],
        );
        let c = CriticalPortrait::from_chords(deg(2), [Leaf::frac((1, 7), (9, 14))]).unwrap();
        let st = pullback(&f0, &c, 1).unwrap();
        for l in [Leaf::frac((1, 14), (9, 14)), Leaf::frac((9, 14), (11, 14)), Leaf::frac((1, 14), (11, 14))] {
            assert!(st.stages[1].contains(&l), "{l}");
        }
        assert_eq!(st.stages[1].len(), 6);
        assert!(check_invariance(&st.stages[0], &st.stages[1]).unwrap().is_ok());
    }

    #[test]
    fn pullback_errors() {
        let f0 = Lamination::new(deg(2), [Leaf::frac((1, 4), (3, 4))]);
        let c = portrait(2, &[&[(0, 1), (1, 2)]]);
        assert!(matches!(pullback(&f0, &c, 1), Err(Error::Incompatible { .. })));
        let f0 = Lamination::new(deg(2), [Leaf::frac((1, 7), (2, 7))]);
        let c = portrait(2, &[&[(3, 7), (13, 14)]]);
        assert!(matches!(pullback(&f0, &c, 1), Err(Error::NotForwardInvariant(_))));
        let st = pullback(&Lamination::empty(deg(2)), &portrait(2, &[&[(0, 1), (1, 2)]]), 0).unwrap();
        assert_eq!(st.stages.len(), 1);
    }

    #[test]
    fn stages_are_invariant_prelaminations() {
        for d in 2..=5u32 {
            for p in enumerate_fpps(deg(d)) {
                let st = canonical_lamination(&p, 3).unwrap();
                for k in 1..=3 {
                    assert!(st.stages[k].is_prelamination());
                    let r = check_invariance(&st.stages[k - 1], &st.stages[k]).unwrap();
                    assert!(r.is_ok(), "{:?} stage {k}: {r:?}", p.blocks());
                }
            }
        }
    }

    #[test]
    fn cp_equality_examples() {
        assert!(cp_pullback_equality(&quarter_leaf(), 1).unwrap().is_equal());
        let half = FixedPointPortrait::new(deg(3), vec![vec![0, 1]]).unwrap();
        let r = cp_pullback_equality(&half, 3).unwrap();
        assert!(r.choices > 1);
        assert!(r.is_equal());
        assert!(cp_pullback_equality(&FixedPointPortrait::empty(deg(2)), 2).unwrap().is_equal());
    }

    #[test]
    fn empty_portrait_has_no_leaves() {
        for d in [2, 5] {
            let st = canonical_lamination(&FixedPointPortrait::empty(deg(d)), 3).unwrap();
            assert!(st.last().is_empty());
        }
    }

    #[test]
    fn clp_orbits_and_gaps() {
        let st = canonical_lamination(&quarter_leaf(), 3).unwrap();
        let r = clp_checks(&st);
        assert!(r.orbit_failures.is_empty());
        assert!(r.gap_failures.is_empty(), "{:?}", r.gap_failures);
        assert!(clp_checks(&canonical_lamination(&quarter_leaf(), 0).unwrap()).is_ok());
    }

    #[test]
    fn quarter_leaf_siblings_exceed_the_length_bound() {
        // every full sibling collection of {0, 1/4} has a leaf longer than 1/10
        let l = Leaf::frac((0, 1), (1, 4));
        let bound = length_bound(deg(5), 1);
        let cs = crate::leaves::sibling_collections(deg(5), &l).unwrap();
        assert!(!cs.is_empty());
        assert!(cs.iter().all(|c| c.leaves.iter().any(|x| x.length() > bound)));

        let r = clp_checks(&canonical_lamination(&quarter_leaf(), 1).unwrap());
        assert!(r.length_violations.contains(&(1, Leaf::frac((1, 20), (1, 5)))));
    }

    #[test]
    fn invariant_gaps_of_quarter_leaf() {
        let st = canonical_lamination(&quarter_leaf(), 3).unwrap();
        for s in fixed_sectors(&quarter_leaf()) {
            let gap = invariant_gap(&st, &s).unwrap();
            let v = gap.vertices();
            assert!(v.iter().all(|x| v.contains(&sigma(deg(5), x))));
        }
    }

    #[test]
    fn hyperbolic_examples() {
        for d in 2..=5u32 {
            for p in enumerate_fpps(deg(d)) {
                let st = canonical_lamination(&p, 2).unwrap();
                assert!(is_hyperbolic_approx(st.last(), &st.portrait, 2), "{:?}", p.blocks());
            }
        }
        let c = portrait(2, &[&[(0, 1), (1, 2)]]);
        let l = Lamination::new(deg(2), [Leaf::frac((0, 1), (1, 2))]);
        assert!(!is_hyperbolic_approx(&l, &c, 2));
        assert!(is_hyperbolic_approx(&Lamination::empty(deg(2)), &c, 2));
    }

    #[test]
    fn case_one_two_fixed_leaves() {
        let p = FixedPointPortrait::new(deg(5), vec![vec![0, 1], vec![2, 3]]).unwrap();
        let st = canonical_lamination(&p, 3).unwrap();
        let central = fixed_sectors(&p).into_iter().find(|s| s.arcs.len() == 2).unwrap();
        let cls = classify_sector(st.last(), &st.portrait, &central).unwrap();
        assert_eq!(cls.case, Case::I);
        assert_eq!(cls.object_type, FixedObjectType::GapCenter);
    }

    #[test]
    fn case_two_rotational_triangle() {
        let d = deg(4);
        let p = FixedPointPortrait::new(d, vec![vec![0, 2]]).unwrap();
        let mut f0: Vec<Leaf> = p.fixed_leaves();
        f0.extend(hull_sides(&[q(1, 7), q(2, 7), q(4, 7)]));
        let c = CriticalPortrait::from_chords(
            d,
            [Leaf::frac((2, 7), (15, 28)), Leaf::frac((1, 7), (9, 14)), Leaf::frac((2, 3), (11, 12))],
        )
        .unwrap();
        let st = pullback(&Lamination::new(d, f0), &c, 2).unwrap();
        let big = fixed_sectors(&p).into_iter().find(|s| s.arcs.len() == 2).unwrap();
        let cls = classify_sector(st.last(), &st.portrait, &big).unwrap();
        assert_eq!(cls.case, Case::II, "{:?}", cls.subtended);
        match cls.witness {
            Witness::Polygon(poly) => {
                assert_eq!(poly.vertices(), &[q(1, 7), q(2, 7), q(4, 7)]);
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn case_three_period_three_leaves() {
        let d = deg(4);
        let p = FixedPointPortrait::new(d, vec![vec![0, 1]]).unwrap();
        let mut f0 = p.fixed_leaves();
        f0.extend([Leaf::frac((10, 21), (31, 63)), Leaf::frac((19, 21), (61, 63)), Leaf::frac((13, 21), (55, 63))]);
        let c = CriticalPortrait::from_chords(
            d,
            [Leaf::frac((1, 12), (1, 3)), Leaf::frac((0, 1), (1, 2)), Leaf::frac((13, 21), (73, 84))],
        )
        .unwrap();
        let st = pullback(&Lamination::new(d, f0), &c, 3).unwrap();
        assert!(is_hyperbolic_approx(st.last(), &c, 3));
        let big = fixed_sectors(&p).into_iter().find(|s| s.arcs.len() == 2).unwrap();
        let cls = classify_sector(st.last(), &st.portrait, &big).unwrap();
        assert_eq!(cls.case, Case::III);
        assert_eq!(cls.object_type, FixedObjectType::GapCenter);
        assert_eq!(cls.subtended, vec![false, true]);
    }

    #[test]
    fn flower_of_invariant_leaf() {
        let st = canonical_lamination(&quarter_leaf(), 3).unwrap();
        let fl = flower_like(st.last(), &[q(0, 1), q(1, 4)]).unwrap();
        assert_eq!(fl.petals.len(), 2);
        assert!(flower_like(st.last(), &[q(1, 20), q(1, 5)]).is_err());
        let lone = flower_like(&Lamination::empty(deg(2)).with_depth(1), &[q(1, 3), q(2, 3)]).unwrap();
        assert!(lone.petals.is_empty());
    }
}
