//! Planar subdivision of the closed disk cut out by a non-crossing leaf set.
//!
//! Faces are traced with the face on the left: circle arcs are walked
//! counterclockwise, and at every vertex the walk turns onto the incident
//! element immediately preceding the one it arrived on (elements ordered by
//! the counterclockwise position of their far end).

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::circle::{arc_length, in_arc, in_closed_arc, CirclePoint};
use crate::leaves::{indexed, Lamination, Leaf};
use num_rational::BigRational;
use num_traits::Zero;

/// One piece of a face boundary, oriented with the face on the left.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BoundaryElement {
    /// Counterclockwise circle arc; `from == to` means the whole circle.
    Arc {
        from: CirclePoint,
        to: CirclePoint,
    },
    Leaf {
        from: CirclePoint,
        to: CirclePoint,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Face {
    pub boundary: Vec<BoundaryElement>,
}

impl Face {
    pub fn arcs(&self) -> impl Iterator<Item = (&CirclePoint, &CirclePoint)> {
        self.boundary.iter().filter_map(|e| match e {
            BoundaryElement::Arc { from, to } => Some((from, to)),
            BoundaryElement::Leaf { .. } => None,
        })
    }

    pub fn leaves(&self) -> Vec<Leaf> {
        self.boundary
            .iter()
            .filter_map(|e| match e {
                BoundaryElement::Leaf { from, to } => Some(Leaf::new(from.clone(), to.clone()).expect("distinct")),
                BoundaryElement::Arc { .. } => None,
            })
            .collect()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs().count()
    }

    /// A face with no circle arcs is a polygon (finite gap).
    pub fn is_polygon(&self) -> bool {
        self.arc_count() == 0
    }

    pub fn is_whole_disk(&self) -> bool {
        matches!(self.boundary.as_slice(), [BoundaryElement::Arc { from, to }] if from == to)
    }

    /// Circle points where boundary elements meet.
    pub fn vertices(&self) -> BTreeSet<CirclePoint> {
        if self.is_whole_disk() {
            return BTreeSet::new();
        }
        self.boundary
            .iter()
            .flat_map(|e| match e {
                BoundaryElement::Arc { from, to } | BoundaryElement::Leaf { from, to } => [from.clone(), to.clone()],
            })
            .collect()
    }

    pub fn total_arc_length(&self) -> BigRational {
        self.arcs().fold(BigRational::zero(), |acc, (a, b)| acc + arc_length(a, b))
    }

    /// True iff `t` is a vertex or lies inside one of the face's arcs.
    pub fn closure_contains(&self, t: &CirclePoint) -> bool {
        self.boundary.iter().any(|e| match e {
            BoundaryElement::Arc { from, to } => from == to || in_closed_arc(t, from, to),
            BoundaryElement::Leaf { from, to } => t == from || t == to,
        })
    }

    /// True iff `t` lies in the interior of one of the face's arcs.
    pub fn arc_interior_contains(&self, t: &CirclePoint) -> bool {
        self.arcs().any(|(a, b)| in_arc(t, a, b))
    }

    pub fn has_leaf(&self, l: &Leaf) -> bool {
        self.boundary.iter().any(|e| match e {
            BoundaryElement::Leaf { from, to } => l.has_endpoint(from) && l.has_endpoint(to),
            BoundaryElement::Arc { .. } => false,
        })
    }
}

/// Faces of the subdivision induced by the leaves of `lam`.
pub fn faces(lam: &Lamination) -> Vec<Face> {
    faces_with_points(lam.leaves.iter(), &[])
}

/// Faces where `extra` circle points (not necessarily leaf endpoints) also
/// split arcs.
pub fn faces_with_points<'a>(leaves: impl IntoIterator<Item = &'a Leaf>, extra: &[CirclePoint]) -> Vec<Face> {
    let leaves: Vec<&Leaf> = leaves.into_iter().collect();
    let (leaf_points, pairs) = indexed(&leaves);
    let points: Vec<CirclePoint> =
        leaf_points.iter().chain(extra.iter()).cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if points.is_empty() {
        let z = CirclePoint::zero();
        return vec![Face { boundary: vec![BoundaryElement::Arc { from: z.clone(), to: z }] }];
    }
    let n = points.len();
    let remap: Vec<usize> = leaf_points.iter().map(|p| points.binary_search(p).expect("present")).collect();
    // neighbours[v] sorted by ccw offset (w - v) mod n
    let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in &pairs {
        let (a, b) = (remap[a], remap[b]);
        neighbours[a].push(b);
        neighbours[b].push(a);
    }
    let offset = |v: usize, w: usize| (w + n - v) % n;
    for (v, ns) in neighbours.iter_mut().enumerate() {
        ns.sort_by_key(|&w| offset(v, w));
    }

    #[derive(Clone, Copy, PartialEq, Eq, Hash)]
    enum Step {
        Arc(usize),
        Chord(usize, usize),
    }
    // Next step after arriving at `v` from an element whose far end has ccw
    // offset `pos` (n for the arc coming in from behind).
    let next_step = |v: usize, pos: usize| -> Step {
        match neighbours[v].iter().rev().find(|&&w| offset(v, w) < pos) {
            Some(&w) => Step::Chord(v, w),
            None => Step::Arc(v),
        }
    };

    let mut used: HashSet<Step> = HashSet::new();
    let mut out = Vec::new();
    let trace = |start: Step, used: &mut HashSet<Step>| -> Face {
        let mut boundary = Vec::new();
        let mut step = start;
        loop {
            used.insert(step);
            let (v, arrive, pos) = match step {
                Step::Arc(v) => {
                    let w = (v + 1) % n;
                    boundary.push(BoundaryElement::Arc { from: points[v].clone(), to: points[w].clone() });
                    (v, w, n)
                }
                Step::Chord(v, w) => {
                    boundary.push(BoundaryElement::Leaf { from: points[v].clone(), to: points[w].clone() });
                    (v, w, offset(w, v))
                }
            };
            let _ = v;
            step = next_step(arrive, pos);
            if step == start {
                break;
            }
        }
        Face { boundary }
    };
    for v in 0..n {
        let s = Step::Arc(v);
        if !used.contains(&s) {
            out.push(trace(s, &mut used));
        }
    }
    for (v, ws) in neighbours.iter().enumerate() {
        for &w in ws {
            let s = Step::Chord(v, w);
            if !used.contains(&s) {
                out.push(trace(s, &mut used));
            }
        }
    }
    out
}
