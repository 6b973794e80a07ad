//! Standard local groups, constructed fixtures and seeded random elements.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::element::{translation_along, translation_from_star, Ambient, Elem, Portrait};
use crate::error::Result;
use crate::perm::{Perm, PermGroup};
use crate::semigroup::shift_element;
use crate::tree::{CompleteSubtree, Vertex};

fn perm(images: &[u8]) -> Perm {
    Perm::from_images(images.to_vec()).expect("literal permutation")
}

pub fn symmetric(d: usize) -> PermGroup {
    PermGroup::symmetric(d).expect("small degree")
}

pub fn alternating4() -> PermGroup {
    PermGroup::enumerate(4, &[perm(&[1, 2, 0, 3]), perm(&[0, 2, 3, 1])]).expect("A4")
}

pub fn cyclic4() -> PermGroup {
    PermGroup::enumerate(4, &[perm(&[1, 2, 3, 0])]).expect("C4")
}

/// The dihedral group of the square, the cyclic group of order four extended by a reflection.
pub fn dihedral4() -> PermGroup {
    PermGroup::enumerate(4, &[perm(&[1, 2, 3, 0]), perm(&[0, 3, 2, 1])]).expect("D4")
}

/// `⟨(0 1)(2 3)⟩`, intransitive with two orbits of size two.
pub fn double_transposition() -> PermGroup {
    PermGroup::enumerate(4, &[perm(&[1, 0, 3, 2])]).expect("order two")
}

pub fn universal(f: PermGroup) -> Arc<Ambient> {
    Ambient::universal(f).expect("valid local group")
}

/// A translation `t` of length one through the root, an elliptic `x` swapping the two branches
/// off the axis at the root, and `g = x t`, whose only singularity lies one step behind the root.
pub struct Twist {
    pub amb: Arc<Ambient>,
    pub t: Elem,
    pub x: Elem,
    pub g: Elem,
}

pub fn planted_twist() -> Twist {
    let amb = Ambient::new(alternating4(), symmetric(4)).expect("A4 ≤ Sym(4)");
    let t = translation_along(&amb, &Vertex::root(), 0, 1).expect("A4 is 2-transitive");
    let locals = BTreeMap::from([(Vertex::root(), perm(&[0, 1, 3, 2]))]);
    let x = Elem::from_portrait(Portrait::new(&amb, Vertex::root(), Vertex::root(), locals).expect("consistent"));
    let g = x.mul(&t);
    Twist { amb, t, x, g }
}

/// `g_v` for the planted twist at the axis position `pos`.
pub fn twist_shift(tw: &Twist, pos: i64) -> Result<Elem> {
    let v = tw.g.axis_vertex(pos)?;
    shift_element(&tw.g, &v)
}

/// The pair `(g_l, h)` with a shared attracting end whose product breaks multiplicativity:
/// `h = t` and `g_l` the shift of the twist four steps ahead.
pub fn negative_witness() -> Result<(Elem, Elem)> {
    let tw = planted_twist();
    let gl = twist_shift(&tw, 4)?;
    Ok((gl, tw.t))
}

/// For `F = ⟨(0 1)(2 3)⟩`: a translation with a singular local action swapping the colours off
/// its axis.  Lies in `G(F, F′)` for every `F′` containing `F̂`.
pub fn intransitive_planted(amb: &Arc<Ambient>) -> Result<Elem> {
    let t = translation_from_star(amb, &Vertex::root(), 0, 1, perm(&[1, 0, 3, 2]))?;
    let locals = BTreeMap::from([(Vertex::root(), perm(&[0, 1, 3, 2]))]);
    let x = Elem::from_portrait(Portrait::new(amb, Vertex::root(), Vertex::root(), locals)?);
    Ok(x.mul(&t))
}

/// A uniformly chosen element of `F` with `τ(b) = a`, if there is one.
fn pinned_choice<R: Rng>(rng: &mut R, group: &PermGroup, b: u8, a: u8) -> Option<Perm> {
    let options: Vec<&Perm> = group.elements().iter().filter(|p| p.apply(b) == a).collect();
    options.choose(rng).map(|p| (*p).clone())
}

fn random_vertex<R: Rng>(rng: &mut R, d: usize, max_len: usize) -> Vertex {
    let len = rng.gen_range(0..=max_len);
    let mut v = Vertex::root();
    for _ in 0..len {
        let mut c = rng.gen_range(0..d as u8);
        while Some(c) == v.last() {
            c = rng.gen_range(0..d as u8);
        }
        v = v.step(c);
    }
    v
}

/// A random portrait on the ball of the given radius around the root, with local actions drawn
/// from `F` except at up to `planted` vertices, where they are drawn from `F′`.
pub fn random_portrait<R: Rng>(rng: &mut R, amb: &Arc<Ambient>, radius: usize, planted: usize) -> Result<Elem> {
    let d = amb.degree();
    let ball = CompleteSubtree::ball(d, &Vertex::root(), radius);
    let internal: Vec<Vertex> = ball.internal().iter().cloned().collect();
    let mut special: Vec<Vertex> = internal.clone();
    special.shuffle(rng);
    special.truncate(planted);
    let mut locals = BTreeMap::new();
    let root_group = if special.contains(&Vertex::root()) { amb.fprime() } else { amb.f() };
    let root_local = root_group.elements().choose(rng).expect("non-empty").clone();
    locals.insert(Vertex::root(), root_local);
    let mut frontier = vec![Vertex::root()];
    while let Some(x) = frontier.pop() {
        if !ball.is_internal(&x) {
            continue;
        }
        let sx = locals[&x].clone();
        for c in 0..d as u8 {
            let y = x.step(c);
            if locals.contains_key(&y) || !ball.contains(&y) {
                continue;
            }
            let group = if special.contains(&y) { amb.fprime() } else { amb.f() };
            let sy = pinned_choice(rng, group, c, sx.apply(c))
                .or_else(|| pinned_choice(rng, amb.f(), c, sx.apply(c)))
                .expect("local actions preserve F-orbits");
            locals.insert(y.clone(), sy);
            frontier.push(y);
        }
    }
    let image = random_vertex(rng, d, 3);
    Ok(Elem::from_portrait(Portrait::from_consistent_set(amb, ball, locals, Vertex::root(), image)?))
}

/// A product of one to `max_letters` random portraits, each inverted with probability one half.
pub fn random_elem<R: Rng>(rng: &mut R, amb: &Arc<Ambient>, max_letters: usize, planted: usize) -> Result<Elem> {
    let n = rng.gen_range(1..=max_letters);
    let mut g = Elem::identity(amb);
    for _ in 0..n {
        let radius = rng.gen_range(1..=2);
        let mut p = random_portrait(rng, amb, radius, planted)?;
        if rng.gen_bool(0.5) {
            p = p.inv();
        }
        g = g.mul(&p);
    }
    Ok(g)
}

/// Draws random elements until a hyperbolic one appears.
pub fn random_hyperbolic<R: Rng>(rng: &mut R, amb: &Arc<Ambient>, max_letters: usize, planted: usize) -> Result<Elem> {
    loop {
        let g = random_elem(rng, amb, max_letters, planted)?;
        if g.is_hyperbolic() {
            return Ok(g);
        }
    }
}

pub fn random_elliptic<R: Rng>(rng: &mut R, amb: &Arc<Ambient>, max_letters: usize) -> Result<Elem> {
    loop {
        let g = random_elem(rng, amb, max_letters, 0)?;
        if !g.is_hyperbolic() {
            return Ok(g);
        }
    }
}
