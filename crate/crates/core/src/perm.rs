//! Permutations of the colour set and fully enumerated permutation groups.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use num_bigint::BigUint;

use crate::error::{Error, Result};

/// Largest supported number of colours.
pub const MAX_DEGREE: usize = 12;
/// Largest group order that will be enumerated.
pub const MAX_ORDER: usize = 1_000_000;

/// A permutation in one-line notation: entry `i` is the image of colour `i`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(Vec<u8>);

impl Perm {
    pub fn identity(d: usize) -> Self {
        Perm((0..d as u8).collect())
    }

    pub fn from_images(images: Vec<u8>) -> Result<Self> {
        let d = images.len();
        if d > MAX_DEGREE {
            return Err(Error::CapExceeded(format!("degree {d} exceeds {MAX_DEGREE}")));
        }
        let mut seen = vec![false; d];
        for &x in &images {
            if x as usize >= d || seen[x as usize] {
                return Err(Error::InvalidPerm(format!("{images:?} is not a bijection")));
            }
            seen[x as usize] = true;
        }
        Ok(Perm(images))
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn images(&self) -> &[u8] {
        &self.0
    }

    #[inline]
    pub fn apply(&self, a: u8) -> u8 {
        self.0[a as usize]
    }

    /// `self ∘ other`: `other` acts first.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(other.0.iter().map(|&x| self.0[x as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u8; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x as usize] = i as u8;
        }
        Perm(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i as u8 == x)
    }

    /// Parses a space separated image list such as `1 2 0`.
    pub fn parse(s: &str) -> Result<Self> {
        let images = s
            .split_whitespace()
            .map(|t| t.parse::<u8>().map_err(|_| Error::InvalidPerm(format!("bad image `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        Perm::from_images(images)
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

/// A finite permutation group with its elements listed in increasing lexicographic order.
#[derive(Clone, PartialEq, Eq)]
pub struct PermGroup {
    degree: usize,
    generators: Vec<Perm>,
    elements: Vec<Perm>,
    members: HashSet<Perm>,
}

impl fmt::Debug for PermGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PermGroup")
            .field("degree", &self.degree)
            .field("order", &self.elements.len())
            .finish()
    }
}

impl PermGroup {
    /// Closes `generators` under composition.
    pub fn enumerate(degree: usize, generators: &[Perm]) -> Result<Self> {
        Self::enumerate_capped(degree, generators, MAX_ORDER)
    }

    pub fn enumerate_capped(degree: usize, generators: &[Perm], max_order: usize) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::CapExceeded(format!("degree {degree} exceeds {MAX_DEGREE}")));
        }
        for g in generators {
            if g.degree() != degree {
                return Err(Error::DegreeMismatch { expected: degree, found: g.degree() });
            }
        }
        let id = Perm::identity(degree);
        let mut members: HashSet<Perm> = HashSet::new();
        let mut queue = VecDeque::new();
        members.insert(id.clone());
        queue.push_back(id);
        while let Some(x) = queue.pop_front() {
            for g in generators {
                let y = g.compose(&x);
                if members.insert(y.clone()) {
                    if members.len() > max_order {
                        return Err(Error::CapExceeded(format!("group order exceeds {max_order}")));
                    }
                    queue.push_back(y);
                }
            }
        }
        let mut elements: Vec<Perm> = members.iter().cloned().collect();
        elements.sort();
        Ok(PermGroup { degree, generators: generators.to_vec(), elements, members })
    }

    fn from_elements(degree: usize, mut elements: Vec<Perm>) -> Self {
        elements.sort();
        elements.dedup();
        let members = elements.iter().cloned().collect();
        PermGroup { degree, generators: elements.clone(), elements, members }
    }

    pub fn symmetric(degree: usize) -> Result<Self> {
        let mut gens = Vec::new();
        if degree >= 2 {
            let mut t: Vec<u8> = (0..degree as u8).collect();
            t.swap(0, 1);
            gens.push(Perm(t));
            let c: Vec<u8> = (0..degree as u8).map(|i| (i + 1) % degree as u8).collect();
            gens.push(Perm(c));
        }
        Self::enumerate(degree, &gens)
    }

    pub fn trivial(degree: usize) -> Self {
        Self::from_elements(degree, vec![Perm::identity(degree)])
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn contains(&self, p: &Perm) -> bool {
        self.members.contains(p)
    }

    pub fn is_subgroup_of(&self, other: &PermGroup) -> bool {
        self.degree == other.degree && self.elements.iter().all(|p| other.contains(p))
    }

    pub fn filter(&self, pred: impl Fn(&Perm) -> bool) -> PermGroup {
        Self::from_elements(self.degree, self.elements.iter().filter(|p| pred(p)).cloned().collect())
    }

    pub fn intersection(&self, other: &PermGroup) -> PermGroup {
        self.filter(|p| other.contains(p))
    }

    pub fn point_stabilizer(&self, a: u8) -> PermGroup {
        self.filter(|p| p.apply(a) == a)
    }

    /// `|G_a| / |G_a ∩ G_b|`.
    pub fn index_factor(&self, a: u8, b: u8) -> BigUint {
        let ga = self.elements.iter().filter(|p| p.apply(a) == a).count();
        let gab = self.elements.iter().filter(|p| p.apply(a) == a && p.apply(b) == b).count();
        BigUint::from(ga / gab)
    }

    pub fn orbit(&self, a: u8) -> BTreeSet<u8> {
        self.elements.iter().map(|p| p.apply(a)).collect()
    }

    pub fn orbits(&self) -> Vec<BTreeSet<u8>> {
        let mut seen = vec![false; self.degree];
        let mut out = Vec::new();
        for a in 0..self.degree as u8 {
            if !seen[a as usize] {
                let o = self.orbit(a);
                for &b in &o {
                    seen[b as usize] = true;
                }
                out.push(o);
            }
        }
        out
    }

    pub fn is_transitive(&self) -> bool {
        self.degree == 0 || self.orbit(0).len() == self.degree
    }

    pub fn is_2transitive(&self) -> bool {
        if self.degree < 2 {
            return true;
        }
        let images: HashSet<(u8, u8)> = self.elements.iter().map(|p| (p.apply(0), p.apply(1))).collect();
        images.len() == self.degree * (self.degree - 1)
    }

    /// The direct product of the symmetric groups on the orbits of `self`.
    pub fn young_subgroup(&self) -> Result<PermGroup> {
        let mut gens = Vec::new();
        for orbit in self.orbits() {
            let pts: Vec<u8> = orbit.into_iter().collect();
            for w in pts.windows(2) {
                let mut t: Vec<u8> = (0..self.degree as u8).collect();
                t.swap(w[0] as usize, w[1] as usize);
                gens.push(Perm(t));
            }
        }
        PermGroup::enumerate(self.degree, &gens)
    }

    pub fn has_distinct_point_stabilizers(&self) -> bool {
        let stabs: Vec<BTreeSet<&Perm>> = (0..self.degree as u8)
            .map(|a| self.elements.iter().filter(|p| p.apply(a) == a).collect())
            .collect();
        (0..stabs.len()).all(|i| (i + 1..stabs.len()).all(|j| stabs[i] != stabs[j]))
    }

    /// The lexicographically least element mapping `b` to `a`.
    pub fn minimal_map(&self, b: u8, a: u8) -> Option<Perm> {
        self.elements.iter().find(|p| p.apply(b) == a).cloned()
    }

    /// Lexicographically least element of `left · G · right` satisfying every pin `(x, y)`,
    /// meaning the element maps `x` to `y`.
    pub fn least_in_double_coset(&self, left: &Perm, right: &Perm, pins: &[(u8, u8)]) -> Option<Perm> {
        self.elements
            .iter()
            .map(|f| left.compose(f).compose(right))
            .filter(|p| pins.iter().all(|&(x, y)| p.apply(x) == y))
            .min()
    }
}

/// A left coset `τG` stored by its lexicographically least member.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct LambdaCoset {
    rep: Perm,
}

impl LambdaCoset {
    pub fn new(tau: &Perm, group: &PermGroup) -> Self {
        let rep = group.elements().iter().map(|f| tau.compose(f)).min().expect("groups are non-empty");
        LambdaCoset { rep }
    }

    pub fn trivial(degree: usize) -> Self {
        LambdaCoset { rep: Perm::identity(degree) }
    }

    pub fn representative(&self) -> &Perm {
        &self.rep
    }

    pub fn is_trivial(&self) -> bool {
        self.rep.is_identity()
    }

    /// `σ · τG`.
    pub fn left_translate(&self, sigma: &Perm, group: &PermGroup) -> Self {
        LambdaCoset::new(&sigma.compose(&self.rep), group)
    }

    pub fn contains(&self, p: &Perm, group: &PermGroup) -> bool {
        group.contains(&self.rep.inverse().compose(p))
    }
}

/// Tests `τ ∈ σ₁ F σ₂`.
pub fn double_coset_contains(tau: &Perm, s1: &Perm, s2: &Perm, group: &PermGroup) -> bool {
    group.contains(&s1.inverse().compose(tau).compose(&s2.inverse()))
}

/// Tests `σ ∈ c₁ c₂⁻¹ = τ₁ F τ₂⁻¹`, where `c₁ = τ₁F` and `c₂ = τ₂F`.
pub fn quotient_contains(sigma: &Perm, c1: &LambdaCoset, c2: &LambdaCoset, group: &PermGroup) -> bool {
    double_coset_contains(sigma, c1.representative(), &c2.representative().inverse(), group)
}
