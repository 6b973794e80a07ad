//! Translation compatibility, the shifted elements `g_v`, direction stabilisers and
//! scale-multiplicativity checks.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::directions::{self, lambda, Certificate, Verdict};
use crate::element::{translation_along, Ambient, Elem};
use crate::error::{Error, Result};
use crate::perm::{LambdaCoset, Perm};
use crate::scale::{self, Caps};
use crate::tree::Vertex;

/// Whether the axis orders of `g` and `h` agree on the intersection of their axes.  The test is
/// exact: the intersection is found from one projection and oriented on one shared edge.
pub fn translation_compatible(g: &Elem, h: &Elem) -> Result<bool> {
    if !g.is_hyperbolic() || !h.is_hyperbolic() {
        return Err(Error::NotHyperbolic);
    }
    let x0 = g.project_to_axis(&h.axis_base()?)?;
    if h.dist_to_axis(&x0)? > 0 {
        return Ok(true);
    }
    let p = g.axis_pos(&x0)?;
    for step in [1i64, -1] {
        let y = g.axis_vertex(p + step)?;
        if h.dist_to_axis(&y)? == 0 {
            let forward_in_h = h.axis_pos(&y)? > h.axis_pos(&x0)?;
            return Ok(forward_in_h == (step > 0));
        }
    }
    Ok(true)
}

/// The transition band of `g_v`: an element acting as a translation `h` far behind `v`, as `g`
/// beyond `v`, and through λ-matched local actions in between.
pub struct Splice {
    amb: Arc<Ambient>,
    g: Elem,
    h: Elem,
    len: i64,
    /// `P(t)` for `t ∈ [−2L−1, 2L+1]`, stored at index `t + 2L + 1`.
    path: Vec<Vertex>,
    index: HashMap<Vertex, i64>,
    axis_local: HashMap<i64, Perm>,
}

impl fmt::Debug for Splice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Splice(len={}, v={})", self.len, self.p(0))
    }
}

impl Splice {
    fn p(&self, t: i64) -> &Vertex {
        &self.path[(t + 2 * self.len + 1) as usize]
    }

    /// Position of the first path vertex met when walking from `y` to `P(0)`.
    fn region(&self, y: &Vertex) -> (i64, Vertex) {
        for x in y.geodesic(self.p(0)) {
            if let Some(&t) = self.index.get(&x) {
                return (t, x);
            }
        }
        unreachable!("the geodesic ends at P(0)")
    }

    fn coset(&self, x: &Vertex) -> LambdaCoset {
        lambda(&self.g, x).map(|(c, _)| c).unwrap_or_else(|_| LambdaCoset::trivial(self.amb.degree()))
    }

    /// Least local action at `x` sending colour `c` to `a` inside `λ_g(img) λ_g(x)⁻¹`.
    fn choose(&self, x: &Vertex, img: &Vertex, pins: &[(u8, u8)]) -> Perm {
        let (cx, cy) = (self.coset(x), self.coset(img));
        if cx.is_trivial() && cy.is_trivial() && pins.len() == 1 {
            if let Some(p) = self.amb.default_local(pins[0].0, pins[0].1) {
                return p.clone();
            }
        }
        self.amb
            .f()
            .least_in_double_coset(cy.representative(), &cx.representative().inverse(), pins)
            .expect("double cosets of a 2-transitive group are 2-transitive")
    }

    pub(crate) fn forward(&self, u: &Vertex) -> (Vertex, Perm) {
        let l = self.len;
        let (t, start) = self.region(u);
        if t <= -2 * l {
            return self.h.eval_local(u);
        }
        if t > 0 {
            return self.g.eval_local(u);
        }
        let mut img = self.p(t + l).clone();
        let mut sigma = self.axis_local[&t].clone();
        let path = start.geodesic(u);
        for w in path.windows(2) {
            let c = Vertex::edge_colour(&w[0], &w[1]).expect("adjacent");
            let a = sigma.apply(c);
            img = img.step(a);
            sigma = self.choose(&w[1], &img, &[(c, a)]);
        }
        (img, sigma)
    }

    pub(crate) fn backward(&self, y: &Vertex) -> (Vertex, Perm) {
        let l = self.len;
        let (t, start) = self.region(y);
        if t <= -l {
            return self.h.eval_inv_local(y);
        }
        if t > l {
            return self.g.eval_inv_local(y);
        }
        let mut x = self.p(t - l).clone();
        let mut sigma = self.axis_local[&(t - l)].clone();
        let path = start.geodesic(y);
        for w in path.windows(2) {
            let c = Vertex::edge_colour(&w[0], &w[1]).expect("adjacent");
            let b = sigma.inverse().apply(c);
            x = x.step(b);
            sigma = self.choose(&x, &w[1], &[(b, c)]);
        }
        (x, sigma.inverse())
    }

    pub(crate) fn singular(&self) -> Vec<Vertex> {
        let l = self.len;
        let Ok(limit) = self.g.axis_pos(self.p(l)) else {
            return Vec::new();
        };
        let mut trajectory = BTreeSet::new();
        for s in self.g.singularities() {
            let mut x = s.clone();
            loop {
                x = self.g.eval(&x);
                match self.g.proj_pos(&x) {
                    Ok(p) if p <= limit => {
                        trajectory.insert(x.clone());
                    }
                    _ => break,
                }
            }
        }
        let mut candidates = BTreeSet::new();
        for y in &trajectory {
            let (t, _) = self.region(y);
            if -2 * l < t && t <= 0 {
                candidates.insert(y.clone());
            }
            if -l < t && t <= l {
                candidates.insert(self.backward(y).0);
            }
        }
        candidates.into_iter().filter(|x| !self.amb.f().contains(&self.forward(x).1)).collect()
    }
}

/// `g_v`: an element asymptotic to `g` with the same translation length whose axis leaves the
/// axis of `g` at `v` and runs backwards into a region where it acts as an element of `U(F)`.
pub fn shift_element(g: &Elem, v: &Vertex) -> Result<Elem> {
    let amb = g.ambient().clone();
    if !amb.f().is_2transitive() {
        return Err(Error::NotTwoTransitive);
    }
    if !g.is_hyperbolic() {
        return Err(Error::NotHyperbolic);
    }
    let l = g.length() as i64;
    if g.length() <= g.sing_depth()? {
        return Err(Error::Precondition(format!("translation length {l} does not exceed the singular depth")));
    }
    let pv = g.axis_pos(v)?;
    if let Some((_, hi)) = g.sing_window()? {
        if pv <= hi {
            return Err(Error::Precondition(format!("{v} does not lie past the singular projections")));
        }
    }
    let fwd = v.colour_towards(&g.axis_vertex(pv + 1)?).expect("adjacent");
    let back_g = v.colour_towards(&g.axis_vertex(pv - 1)?).expect("adjacent");
    let back = (0..amb.degree() as u8).find(|&c| c != fwd && c != back_g).expect("degree is at least 3");
    let h1 = translation_along(&amb, v, back, fwd)?;
    let h = h1.pow(l);

    let mut path = Vec::with_capacity((4 * l + 3) as usize);
    let mut index = HashMap::new();
    for t in -2 * l - 1..=2 * l + 1 {
        let x = if t >= 0 { g.axis_vertex(pv + t)? } else { h1.eval_pow(v, t) };
        index.insert(x.clone(), t);
        path.push(x);
    }
    let mut splice = Splice { amb: amb.clone(), g: g.clone(), h, len: l, path, index, axis_local: HashMap::new() };

    for t in -2 * l + 1..=0 {
        let colour = |a: i64, b: i64| Vertex::edge_colour(splice.p(a), splice.p(b)).expect("adjacent");
        let pins = [(colour(t, t - 1), colour(t + l, t + l - 1)), (colour(t, t + 1), colour(t + l, t + l + 1))];
        let cx = splice.coset(splice.p(t));
        let cy = splice.coset(splice.p(t + l));
        let tau = amb
            .f()
            .least_in_double_coset(cy.representative(), &cx.representative().inverse(), &pins)
            .ok_or(Error::NotTwoTransitive)?;
        splice.axis_local.insert(t, tau);
    }
    Ok(Elem::from_splice(&amb, splice))
}

/// Whether `x` fixes the attracting end of `g` and intertwines `λ_g`.  The λ identity is
/// checked on the λ-window of `g`, its preimage under `x`, and `S(x)`.
pub fn in_direction_stabilizer(x: &Elem, g: &Elem, depth: usize) -> Result<Verdict> {
    if !g.ambient().f().is_2transitive() {
        return Err(Error::NotTwoTransitive);
    }
    let conj = g.conjugate_by(x);
    let ends = directions::ends_equal(g, &conj, depth)?;
    if ends.is_not_equal() {
        return Ok(ends);
    }
    let f = g.ambient().f();
    let window = directions::lambda_window(g, 2 + g.length())?;
    let mut region: BTreeSet<Vertex> = window.iter().map(|w| x.eval_inv(w)).collect();
    region.extend(window);
    region.extend(x.singularities().iter().cloned());
    for v in region {
        let (xv, s) = x.eval_local(&v);
        if lambda(g, &v)?.0.left_translate(&s, f) != lambda(g, &xv)?.0 {
            return Ok(Verdict::NotEqual(Certificate::Lambda { at: v }));
        }
    }
    Ok(ends)
}

/// Membership in `G(F,F′)_{+∂g}`: hyperbolic elements asymptotic to `g` and elliptic elements
/// of the uniscalar direction stabiliser.
pub fn in_plus_semigroup(x: &Elem, g: &Elem, depth: usize) -> Result<Verdict> {
    if x.is_hyperbolic() {
        directions::asymptotic(x, g, depth)
    } else {
        in_direction_stabilizer(x, g, depth)
    }
}

/// Positive words of bounded length in a set of generators, with their scales.
pub struct SemigroupSample {
    pub generators: Vec<Elem>,
    pub products: Vec<SampleWord>,
    pub caps: Caps,
}

#[derive(Clone, Debug)]
pub struct SampleWord {
    pub letters: Vec<usize>,
    pub elem: Elem,
    pub scale: BigUint,
}

impl SemigroupSample {
    pub fn new(generators: Vec<Elem>, max_len: usize) -> Result<Self> {
        Self::new_with(generators, max_len, Caps::default())
    }

    pub fn new_with(generators: Vec<Elem>, max_len: usize, caps: Caps) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Precondition("a semigroup sample needs a generator".into()));
        }
        let mut products = Vec::new();
        let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                for i in 0..generators.len() {
                    let mut letters = w.clone();
                    letters.push(i);
                    next.push(letters);
                }
            }
            for letters in &next {
                let elem = word_elem(&generators, letters);
                let scale = scale::scale_with(&elem, &caps)?;
                products.push(SampleWord { letters: letters.clone(), elem, scale });
            }
            frontier = next;
        }
        Ok(SemigroupSample { generators, products, caps })
    }

    /// Recomputes every cached scale.
    pub fn verify_cache(&self) -> Result<bool> {
        for w in &self.products {
            if scale::scale_with(&word_elem(&self.generators, &w.letters), &self.caps)? != w.scale {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn word_elem(generators: &[Elem], letters: &[usize]) -> Elem {
    let amb = generators[0].ambient();
    letters.iter().fold(Elem::identity(amb), |acc, &i| acc.mul(&generators[i]))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairCheck {
    pub lhs: usize,
    pub rhs: usize,
    pub s_product: BigUint,
    pub s_lhs: BigUint,
    pub s_rhs: BigUint,
}

impl PairCheck {
    pub fn multiplicative(&self) -> bool {
        self.s_product == &self.s_lhs * &self.s_rhs
    }
}

impl fmt::Display for PairCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pair={},{} s_lhs={} s_rhs={} verdict={}",
            self.lhs,
            self.rhs,
            self.s_product,
            &self.s_lhs * &self.s_rhs,
            if self.multiplicative() { "mult" } else { "nonmult" }
        )
    }
}

#[derive(Clone, Debug)]
pub struct MultReport {
    pub checks: Vec<PairCheck>,
}

impl MultReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(PairCheck::multiplicative)
    }

    pub fn first_failure(&self) -> Option<&PairCheck> {
        self.checks.iter().find(|c| !c.multiplicative())
    }
}

/// Tests `s(w₁w₂) = s(w₁)s(w₂)` on pairs of sample words: every pair when there are at most
/// `samples` of them, otherwise `samples` pairs drawn with the given seed.
pub fn check_scale_multiplicative(sample: &SemigroupSample, samples: usize, seed: u64) -> Result<MultReport> {
    let n = sample.products.len();
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    if pairs.len() > samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        pairs.shuffle(&mut rng);
        pairs.truncate(samples);
        pairs.sort();
    }
    let mut checks = Vec::with_capacity(pairs.len());
    for (i, j) in pairs {
        let (a, b) = (&sample.products[i], &sample.products[j]);
        let s_product = scale::scale_with(&a.elem.mul(&b.elem), &sample.caps)?;
        checks.push(PairCheck { lhs: i, rhs: j, s_product, s_lhs: a.scale.clone(), s_rhs: b.scale.clone() });
    }
    Ok(MultReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;

    #[test]
    fn powers_are_translation_compatible() {
        let tw = samples::planted_twist();
        assert!(translation_compatible(&tw.g, &tw.g.pow(3)).unwrap());
        assert!(!translation_compatible(&tw.g, &tw.g.inv()).unwrap());
    }

    #[test]
    fn shift_agrees_with_g_ahead_of_v() {
        let tw = samples::planted_twist();
        let v = tw.g.axis_vertex(3).unwrap();
        let gv = shift_element(&tw.g, &v).unwrap();
        assert_eq!(gv.length(), tw.g.length());
        for p in 4..12 {
            let x = tw.g.axis_vertex(p).unwrap();
            assert_eq!(gv.eval_local(&x), tw.g.eval_local(&x));
        }
    }

    #[test]
    fn shift_needs_a_vertex_past_the_singularities() {
        let tw = samples::planted_twist();
        let v = tw.g.axis_vertex(-1).unwrap();
        assert!(matches!(shift_element(&tw.g, &v), Err(Error::Precondition(_))));
    }

    #[test]
    fn pair_check_report_line() {
        let c = PairCheck { lhs: 0, rhs: 2, s_product: 9u32.into(), s_lhs: 3u32.into(), s_rhs: 3u32.into() };
        assert_eq!(c.to_string(), "pair=0,2 s_lhs=9 s_rhs=9 verdict=mult");
    }

    #[test]
    fn elliptic_end_stabiliser_membership() {
        let tw = samples::planted_twist();
        let id = Elem::identity(&tw.amb);
        assert!(in_plus_semigroup(&id, &tw.g, 16).unwrap().is_equal());
        assert!(in_plus_semigroup(&tw.g.pow(2), &tw.g, 16).unwrap().is_equal());
        assert!(!in_plus_semigroup(&tw.g.inv(), &tw.g, 16).unwrap().is_equal());
    }

    #[test]
    fn sample_words_by_length() {
        let tw = samples::planted_twist();
        let sample = SemigroupSample::new(vec![tw.g.clone(), tw.t.clone()], 2).unwrap();
        assert_eq!(sample.products.len(), 2 + 4);
        assert!(sample.verify_cache().unwrap());
    }
}
