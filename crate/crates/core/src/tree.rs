//! The legally coloured `d`-regular tree.
//!
//! A vertex is a reduced word over the colours; the edge between `w` and `w·c`
//! carries colour `c` in both directions.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use num_bigint::BigUint;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Vertex(Vec<u8>);

impl Vertex {
    pub fn root() -> Self {
        Vertex(Vec::new())
    }

    pub fn from_colours(colours: Vec<u8>) -> Result<Self> {
        if colours.windows(2).any(|w| w[0] == w[1]) {
            let s: String = colours.iter().map(|c| c.to_string()).collect();
            return Err(Error::NotReduced(s));
        }
        Ok(Vertex(colours))
    }

    /// Parses `-` (the root) or a digit string such as `012`.
    pub fn parse(s: &str, degree: usize) -> Result<Self> {
        let s = s.trim();
        if s == "-" {
            return Ok(Vertex::root());
        }
        let mut colours = Vec::with_capacity(s.len());
        for ch in s.chars() {
            let c = ch
                .to_digit(36)
                .filter(|&c| (c as usize) < degree)
                .ok_or_else(|| Error::Parse { line: 0, msg: format!("bad colour `{ch}` in `{s}`") })?;
            colours.push(c as u8);
        }
        Vertex::from_colours(colours)
    }

    pub fn colours(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// The same as [`Vertex::is_root`].
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<u8> {
        self.0.last().copied()
    }

    /// The neighbour across the edge of colour `c`.
    pub fn step(&self, c: u8) -> Vertex {
        let mut w = self.0.clone();
        if w.last() == Some(&c) {
            w.pop();
        } else {
            w.push(c);
        }
        Vertex(w)
    }

    pub fn neighbours(&self, degree: usize) -> impl Iterator<Item = Vertex> + '_ {
        (0..degree as u8).map(move |c| self.step(c))
    }

    fn common_prefix(&self, other: &Vertex) -> usize {
        self.0.iter().zip(&other.0).take_while(|(a, b)| a == b).count()
    }

    pub fn distance(&self, other: &Vertex) -> usize {
        let p = self.common_prefix(other);
        self.0.len() + other.0.len() - 2 * p
    }

    /// The vertices of the unique path from `self` to `other`, both ends included.
    pub fn geodesic(&self, other: &Vertex) -> Vec<Vertex> {
        let p = self.common_prefix(other);
        let mut path = Vec::with_capacity(self.distance(other) + 1);
        for k in (p..=self.0.len()).rev() {
            path.push(Vertex(self.0[..k].to_vec()));
        }
        for k in p + 1..=other.0.len() {
            path.push(Vertex(other.0[..k].to_vec()));
        }
        path
    }

    /// Colour of the first edge on the path towards `other`.
    pub fn colour_towards(&self, other: &Vertex) -> Option<u8> {
        let p = self.common_prefix(other);
        if p < self.0.len() {
            self.0.last().copied()
        } else if p < other.0.len() {
            Some(other.0[p])
        } else {
            None
        }
    }

    /// Colour of the edge `{u, v}` if the two vertices are adjacent.
    pub fn edge_colour(u: &Vertex, v: &Vertex) -> Option<u8> {
        if u.distance(v) == 1 {
            u.colour_towards(v)
        } else {
            None
        }
    }

    /// The vertex `k` steps along the path towards `other` (clamped at `other`).
    pub fn towards(&self, other: &Vertex, k: usize) -> Vertex {
        let p = self.common_prefix(other);
        let up = self.0.len() - p;
        if k <= up {
            Vertex(self.0[..self.0.len() - k].to_vec())
        } else {
            let down = (k - up).min(other.0.len() - p);
            Vertex(other.0[..p + down].to_vec())
        }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "-");
        }
        for c in &self.0 {
            write!(f, "{}", std::char::from_digit(*c as u32, 36).unwrap_or('?'))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{self}")
    }
}

/// A directed edge `origin → origin·colour`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct EdgeRef {
    pub origin: Vertex,
    pub colour: u8,
}

impl EdgeRef {
    pub fn new(origin: Vertex, colour: u8) -> Self {
        EdgeRef { origin, colour }
    }

    pub fn target(&self) -> Vertex {
        self.origin.step(self.colour)
    }

    pub fn reversed(&self) -> EdgeRef {
        EdgeRef { origin: self.target(), colour: self.colour }
    }
}

/// `2(d−1)^k`: the number of vertices at distance `k` from a fixed edge.
pub fn sphere_size(degree: usize, k: u32) -> BigUint {
    BigUint::from(2u32) * BigUint::from(degree - 1).pow(k)
}

/// A finite complete subtree: every vertex is either a leaf or has all `d` neighbours present.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CompleteSubtree {
    degree: usize,
    vertices: BTreeSet<Vertex>,
    internal: BTreeSet<Vertex>,
}

impl CompleteSubtree {
    /// Validates completeness and connectivity of an explicit vertex set.
    pub fn from_vertices(degree: usize, vertices: BTreeSet<Vertex>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Precondition("empty subtree".into()));
        }
        let t = Self::build(degree, vertices);
        let start = t.vertices.iter().next().cloned().expect("non-empty");
        let mut seen = BTreeSet::from([start.clone()]);
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for y in x.neighbours(degree) {
                if t.vertices.contains(&y) && seen.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
        if seen.len() != t.vertices.len() {
            return Err(Error::Precondition("subtree is not connected".into()));
        }
        if t.vertices.len() > 1 {
            for x in &t.vertices {
                let val = t.valency(x);
                if val != 1 && val != degree {
                    return Err(Error::Precondition(format!("vertex {x} has valency {val}")));
                }
            }
        }
        Ok(t)
    }

    fn build(degree: usize, vertices: BTreeSet<Vertex>) -> Self {
        let internal = vertices
            .iter()
            .filter(|x| x.neighbours(degree).all(|y| vertices.contains(&y)))
            .cloned()
            .collect();
        CompleteSubtree { degree, vertices, internal }
    }

    /// All vertices within `radius` of `centre`.
    pub fn ball(degree: usize, centre: &Vertex, radius: usize) -> Self {
        let mut vertices = BTreeSet::from([centre.clone()]);
        let mut frontier = vec![centre.clone()];
        for _ in 0..radius {
            let mut next = Vec::new();
            for x in &frontier {
                for y in x.neighbours(degree) {
                    if vertices.insert(y.clone()) {
                        next.push(y);
                    }
                }
            }
            frontier = next;
        }
        Self::build(degree, vertices)
    }

    pub fn star(degree: usize, centre: &Vertex) -> Self {
        Self::ball(degree, centre, 1)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn vertices(&self) -> &BTreeSet<Vertex> {
        &self.vertices
    }

    pub fn internal(&self) -> &BTreeSet<Vertex> {
        &self.internal
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        self.vertices.contains(v)
    }

    pub fn is_internal(&self, v: &Vertex) -> bool {
        self.internal.contains(v)
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.iter().filter(move |v| !self.internal.contains(*v))
    }

    pub fn valency(&self, v: &Vertex) -> usize {
        v.neighbours(self.degree).filter(|y| self.vertices.contains(y)).count()
    }

    /// The closest vertex of the subtree to `v`.
    pub fn projection(&self, v: &Vertex) -> Vertex {
        if self.contains(v) {
            return v.clone();
        }
        let target = self.vertices.iter().next().expect("non-empty");
        v.geodesic(target)
            .into_iter()
            .find(|x| self.contains(x))
            .expect("target lies in the subtree")
    }

    pub fn union(&self, other: &CompleteSubtree) -> CompleteSubtree {
        let all: BTreeSet<Vertex> = self.vertices.union(&other.vertices).cloned().collect();
        complete_hull(self.degree, &all)
    }

    pub fn is_subtree_of(&self, other: &CompleteSubtree) -> bool {
        self.vertices.is_subset(&other.vertices)
    }

    /// Image under an arbitrary vertex map that is known to be a tree automorphism.
    pub fn map(&self, f: impl Fn(&Vertex) -> Vertex) -> CompleteSubtree {
        Self::build(self.degree, self.vertices.iter().map(f).collect())
    }
}

/// The smallest complete subtree containing `set`: its convex hull, plus every neighbour of a
/// hull vertex whose valency in the hull is at least two.  A single vertex yields its star.
pub fn complete_hull(degree: usize, set: &BTreeSet<Vertex>) -> CompleteSubtree {
    let mut iter = set.iter();
    let Some(first) = iter.next() else {
        return CompleteSubtree { degree, vertices: BTreeSet::new(), internal: BTreeSet::new() };
    };
    let mut hull = BTreeSet::from([first.clone()]);
    for s in iter {
        if hull.contains(s) {
            continue;
        }
        for x in s.geodesic(first) {
            if !hull.insert(x) {
                break;
            }
        }
    }
    if hull.len() == 1 {
        return CompleteSubtree::star(degree, first);
    }
    let mut out = hull.clone();
    for x in &hull {
        let val = x.neighbours(degree).filter(|y| hull.contains(y)).count();
        if val >= 2 {
            out.extend(x.neighbours(degree));
        }
    }
    CompleteSubtree::build(degree, out)
}
