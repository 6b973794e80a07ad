//! Elements of `G(F, F′)` as signed words of finite portraits.
//!
//! A portrait records the image of a base vertex and the local actions on a finite complete
//! subtree.  Outside that subtree every local action is the lexicographically least element of
//! `F` compatible with the edge it was reached through, so a portrait denotes exactly one
//! automorphism.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::perm::LambdaCoset;
use crate::error::{Error, Result};
use crate::perm::{Perm, PermGroup};
use crate::semigroup::Splice;
use crate::tree::{complete_hull, CompleteSubtree, EdgeRef, Vertex};

/// The local groups `F ≤ F′ ≤ F̂` together with the default-extension table.
pub struct Ambient {
    degree: usize,
    f: PermGroup,
    fprime: PermGroup,
    fhat: PermGroup,
    sym: PermGroup,
    trimmed: bool,
    minmap: Vec<Option<Perm>>,
}

impl fmt::Debug for Ambient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Ambient")
            .field("degree", &self.degree)
            .field("f", &self.f.order())
            .field("fprime", &self.fprime.order())
            .field("trimmed", &self.trimmed)
            .finish()
    }
}

impl Ambient {
    /// Builds the ambient data, replacing `F′` by `F′ ∩ F̂`.
    pub fn new(f: PermGroup, fprime: PermGroup) -> Result<Arc<Self>> {
        let degree = f.degree();
        if fprime.degree() != degree {
            return Err(Error::DegreeMismatch { expected: degree, found: fprime.degree() });
        }
        if degree < 3 {
            return Err(Error::Precondition(format!("tree degree {degree} is below 3")));
        }
        if !f.is_subgroup_of(&fprime) {
            return Err(Error::Precondition("F is not contained in F′".into()));
        }
        let fhat = f.young_subgroup()?;
        let trimmed = !fprime.is_subgroup_of(&fhat);
        let fprime = if trimmed { fprime.intersection(&fhat) } else { fprime };
        let sym = PermGroup::symmetric(degree)?;
        let mut minmap = Vec::with_capacity(degree * degree);
        for b in 0..degree as u8 {
            for a in 0..degree as u8 {
                minmap.push(f.minimal_map(b, a));
            }
        }
        Ok(Arc::new(Ambient { degree, f, fprime, fhat, sym, trimmed, minmap }))
    }

    /// The ambient for `U(F)`.
    pub fn universal(f: PermGroup) -> Result<Arc<Self>> {
        Self::new(f.clone(), f)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn f(&self) -> &PermGroup {
        &self.f
    }

    pub fn fprime(&self) -> &PermGroup {
        &self.fprime
    }

    pub fn fhat(&self) -> &PermGroup {
        &self.fhat
    }

    pub fn symmetric(&self) -> &PermGroup {
        &self.sym
    }

    /// Whether `F′` had to be intersected with `F̂`.
    pub fn trimmed(&self) -> bool {
        self.trimmed
    }

    /// Least element of `F` sending `b` to `a`.
    pub fn default_local(&self, b: u8, a: u8) -> Option<&Perm> {
        self.minmap[b as usize * self.degree + a as usize].as_ref()
    }

    fn default_or_panic(&self, b: u8, a: u8) -> Perm {
        self.default_local(b, a)
            .cloned()
            .unwrap_or_else(|| panic!("colours {b} and {a} lie in different F-orbits"))
    }
}

/// A finite description of an automorphism: base, image and local actions on a complete subtree.
#[derive(Clone)]
pub struct Portrait {
    amb: Arc<Ambient>,
    base: Vertex,
    image: Vertex,
    support: CompleteSubtree,
    locals: HashMap<Vertex, Perm>,
}

impl fmt::Debug for Portrait {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let locals: BTreeMap<_, _> = self.locals.iter().collect();
        f.debug_struct("Portrait")
            .field("base", &self.base)
            .field("image", &self.image)
            .field("locals", &locals)
            .finish()
    }
}

impl Portrait {
    /// Extends a consistent family of local actions on `support` to an automorphism sending
    /// `base` to `image`.  Vertices of `support` without a prescribed local action receive the
    /// default one; the base defaults to the identity.
    pub fn from_consistent_set(
        amb: &Arc<Ambient>,
        support: CompleteSubtree,
        locals: BTreeMap<Vertex, Perm>,
        base: Vertex,
        image: Vertex,
    ) -> Result<Portrait> {
        let d = amb.degree;
        if support.degree() != d {
            return Err(Error::DegreeMismatch { expected: d, found: support.degree() });
        }
        if !support.contains(&base) {
            return Err(Error::Precondition(format!("base {base} is outside the support")));
        }
        for (v, s) in &locals {
            if s.degree() != d {
                return Err(Error::DegreeMismatch { expected: d, found: s.degree() });
            }
            if !support.contains(v) {
                return Err(Error::Precondition(format!("local at {v} is outside the support")));
            }
            if !amb.fhat.contains(s) {
                return Err(Error::Inconsistent(format!("local {s} at {v} mixes F-orbits")));
            }
            if !amb.fprime.contains(s) {
                return Err(Error::Inconsistent(format!("local {s} at {v} is not in F′")));
            }
        }
        let mut full: HashMap<Vertex, Perm> = HashMap::new();
        let base_local = locals.get(&base).cloned().unwrap_or_else(|| Perm::identity(d));
        full.insert(base.clone(), base_local);
        let mut stack = vec![base.clone()];
        while let Some(x) = stack.pop() {
            let sx = full[&x].clone();
            for c in 0..d as u8 {
                let y = x.step(c);
                if !support.contains(&y) || full.contains_key(&y) {
                    continue;
                }
                let sy = match locals.get(&y) {
                    Some(s) => s.clone(),
                    None => amb.default_or_panic(c, sx.apply(c)),
                };
                full.insert(y.clone(), sy);
                stack.push(y);
            }
        }
        for x in support.vertices() {
            for c in 0..d as u8 {
                let y = x.step(c);
                if let (Some(sx), Some(sy)) = (full.get(x), full.get(&y)) {
                    if sx.apply(c) != sy.apply(c) {
                        return Err(Error::Inconsistent(format!("edge {x}–{y} of colour {c}")));
                    }
                }
            }
        }
        Ok(Portrait { amb: amb.clone(), base, image, support, locals: full })
    }

    /// Portrait supported on the complete hull of the prescribed vertices and the base.
    pub fn new(amb: &Arc<Ambient>, base: Vertex, image: Vertex, locals: BTreeMap<Vertex, Perm>) -> Result<Portrait> {
        let mut keys: BTreeSet<Vertex> = locals.keys().cloned().collect();
        keys.insert(base.clone());
        let support = complete_hull(amb.degree, &keys);
        Self::from_consistent_set(amb, support, locals, base, image)
    }

    pub fn base(&self) -> &Vertex {
        &self.base
    }

    pub fn image(&self) -> &Vertex {
        &self.image
    }

    pub fn support(&self) -> &CompleteSubtree {
        &self.support
    }

    pub fn local_at(&self, v: &Vertex) -> Option<&Perm> {
        self.locals.get(v)
    }

    fn forward(&self, v: &Vertex) -> (Vertex, Perm) {
        let path = self.base.geodesic(v);
        let mut gx = self.image.clone();
        let mut sx = self.locals[&self.base].clone();
        for w in path.windows(2) {
            let c = w[0].colour_towards(&w[1]).expect("adjacent");
            let a = sx.apply(c);
            gx = gx.step(a);
            sx = match self.locals.get(&w[1]) {
                Some(s) => s.clone(),
                None => self.amb.default_or_panic(c, a),
            };
        }
        (gx, sx)
    }

    /// Returns the preimage of `y` and the local action of the inverse at `y`.
    fn backward(&self, y: &Vertex) -> (Vertex, Perm) {
        let path = self.image.geodesic(y);
        let mut x = self.base.clone();
        let mut sx = self.locals[&self.base].clone();
        for w in path.windows(2) {
            let c = w[0].colour_towards(&w[1]).expect("adjacent");
            let b = sx.inverse().apply(c);
            x = x.step(b);
            sx = match self.locals.get(&x) {
                Some(s) => s.clone(),
                None => self.amb.default_or_panic(b, c),
            };
        }
        (x, sx.inverse())
    }

    fn singular(&self) -> Vec<Vertex> {
        let mut out: Vec<Vertex> = self
            .locals
            .iter()
            .filter(|(_, s)| !self.amb.f.contains(s))
            .map(|(v, _)| v.clone())
            .collect();
        out.sort();
        out
    }
}

#[derive(Clone)]
pub(crate) enum Letter {
    Portrait(Arc<Portrait>),
    Splice(Arc<Splice>),
}

impl Letter {
    fn forward(&self, v: &Vertex) -> (Vertex, Perm) {
        match self {
            Letter::Portrait(p) => p.forward(v),
            Letter::Splice(s) => s.forward(v),
        }
    }

    fn backward(&self, y: &Vertex) -> (Vertex, Perm) {
        match self {
            Letter::Portrait(p) => p.backward(y),
            Letter::Splice(s) => s.backward(y),
        }
    }

    fn apply(&self, inverted: bool, v: &Vertex) -> (Vertex, Perm) {
        if inverted {
            self.backward(v)
        } else {
            self.forward(v)
        }
    }

    fn singular(&self, inverted: bool) -> Vec<Vertex> {
        let s = match self {
            Letter::Portrait(p) => p.singular(),
            Letter::Splice(sp) => sp.singular(),
        };
        if inverted {
            s.iter().map(|v| self.forward(v).0).collect()
        } else {
            s
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Elliptic,
    Hyperbolic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub kind: Kind,
    pub length: usize,
    pub axis_base: Option<Vertex>,
    pub fixed_vertex: Option<Vertex>,
    pub inverted_edge: Option<EdgeRef>,
}

/// One of the two ends of the axis of a hyperbolic element.
#[derive(Clone)]
pub struct EndHandle {
    pub carrier: Elem,
    pub attracting: bool,
}

impl EndHandle {
    /// The element whose attracting end this is.
    pub fn as_attracting(&self) -> Elem {
        if self.attracting {
            self.carrier.clone()
        } else {
            self.carrier.inv()
        }
    }
}

struct AxisData {
    base: Vertex,
    length: usize,
    segment: Vec<Vertex>,
    forward: Vertex,
    backward: Vertex,
}

pub(crate) struct ElemInner {
    amb: Arc<Ambient>,
    word: Vec<(Letter, bool)>,
    class: OnceLock<Classification>,
    axis: OnceLock<Option<AxisData>>,
    axis_memo: Mutex<HashMap<i64, Vertex>>,
    sing: OnceLock<BTreeSet<Vertex>>,
    pub(crate) lambda_memo: Mutex<HashMap<Vertex, (LambdaCoset, usize)>>,
}

/// An element of `G(F, F′)`: a word of letters, the rightmost acting first.
#[derive(Clone)]
pub struct Elem {
    inner: Arc<ElemInner>,
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Elem(len={})", self.inner.word.len())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipReport {
    pub singular: usize,
    pub checked: usize,
}

impl Elem {
    fn from_word(amb: Arc<Ambient>, word: Vec<(Letter, bool)>) -> Elem {
        Elem {
            inner: Arc::new(ElemInner {
                amb,
                word,
                class: OnceLock::new(),
                axis: OnceLock::new(),
                axis_memo: Mutex::new(HashMap::new()),
                sing: OnceLock::new(),
                lambda_memo: Mutex::new(HashMap::new()),
            }),
        }
    }

    pub fn identity(amb: &Arc<Ambient>) -> Elem {
        Self::from_word(amb.clone(), Vec::new())
    }

    pub fn from_portrait(p: Portrait) -> Elem {
        let amb = p.amb.clone();
        Self::from_word(amb, vec![(Letter::Portrait(Arc::new(p)), false)])
    }

    pub(crate) fn from_splice(amb: &Arc<Ambient>, s: Splice) -> Elem {
        Self::from_word(amb.clone(), vec![(Letter::Splice(Arc::new(s)), false)])
    }

    pub fn ambient(&self) -> &Arc<Ambient> {
        &self.inner.amb
    }

    pub fn degree(&self) -> usize {
        self.inner.amb.degree
    }

    pub(crate) fn inner(&self) -> &ElemInner {
        &self.inner
    }

    pub fn word_len(&self) -> usize {
        self.inner.word.len()
    }

    /// `self ∘ other`: `other` acts first.
    pub fn mul(&self, other: &Elem) -> Elem {
        let mut word = self.inner.word.clone();
        word.extend(other.inner.word.iter().cloned());
        Self::from_word(self.inner.amb.clone(), word)
    }

    pub fn inv(&self) -> Elem {
        let word = self.inner.word.iter().rev().map(|(l, s)| (l.clone(), !s)).collect();
        Self::from_word(self.inner.amb.clone(), word)
    }

    pub fn pow(&self, n: i64) -> Elem {
        let base = if n < 0 { self.inv() } else { self.clone() };
        let mut word = Vec::with_capacity(base.inner.word.len() * n.unsigned_abs() as usize);
        for _ in 0..n.unsigned_abs() {
            word.extend(base.inner.word.iter().cloned());
        }
        Self::from_word(self.inner.amb.clone(), word)
    }

    /// `x · self · x⁻¹`.
    pub fn conjugate_by(&self, x: &Elem) -> Elem {
        x.mul(self).mul(&x.inv())
    }

    /// Image of `v` and the local action at `v`.
    pub fn eval_local(&self, v: &Vertex) -> (Vertex, Perm) {
        let mut x = v.clone();
        let mut acc = Perm::identity(self.degree());
        for (letter, inverted) in self.inner.word.iter().rev() {
            let (y, s) = letter.apply(*inverted, &x);
            acc = s.compose(&acc);
            x = y;
        }
        (x, acc)
    }

    pub fn eval(&self, v: &Vertex) -> Vertex {
        self.eval_local(v).0
    }

    pub fn local_action(&self, v: &Vertex) -> Perm {
        self.eval_local(v).1
    }

    /// Preimage of `y` and the local action of the inverse at `y`.
    pub fn eval_inv_local(&self, y: &Vertex) -> (Vertex, Perm) {
        let mut x = y.clone();
        let mut acc = Perm::identity(self.degree());
        for (letter, inverted) in self.inner.word.iter() {
            let (z, s) = letter.apply(!*inverted, &x);
            acc = s.compose(&acc);
            x = z;
        }
        (x, acc)
    }

    pub fn eval_inv(&self, y: &Vertex) -> Vertex {
        self.eval_inv_local(y).0
    }

    /// `gⁿ(v)` for any integer `n`, without building the power.
    pub fn eval_pow(&self, v: &Vertex, n: i64) -> Vertex {
        let mut x = v.clone();
        for _ in 0..n.unsigned_abs() {
            x = if n > 0 { self.eval(&x) } else { self.eval_inv(&x) };
        }
        x
    }

    /// `σ(gⁿ, v)` together with `gⁿ(v)`.
    pub fn eval_pow_local(&self, v: &Vertex, n: i64) -> (Vertex, Perm) {
        let mut x = v.clone();
        let mut acc = Perm::identity(self.degree());
        for _ in 0..n.unsigned_abs() {
            let (y, s) = if n > 0 { self.eval_local(&x) } else { self.eval_inv_local(&x) };
            acc = s.compose(&acc);
            x = y;
        }
        (x, acc)
    }

    /// Agreement of vertex images and local actions on a ball.
    pub fn agrees_on_ball(&self, other: &Elem, centre: &Vertex, radius: usize) -> bool {
        CompleteSubtree::ball(self.degree(), centre, radius)
            .vertices()
            .iter()
            .all(|v| self.eval_local(v) == other.eval_local(v))
    }

    pub fn classify(&self) -> &Classification {
        self.inner.class.get_or_init(|| self.compute_classification())
    }

    fn compute_classification(&self) -> Classification {
        let mut v = Vertex::root();
        let mut gv = self.eval(&v);
        let mut disp = v.distance(&gv);
        loop {
            if disp == 0 {
                return Classification {
                    kind: Kind::Elliptic,
                    length: 0,
                    axis_base: None,
                    fixed_vertex: Some(v),
                    inverted_edge: None,
                };
            }
            let m = v.towards(&gv, disp / 2);
            let gm = self.eval(&m);
            let dm = m.distance(&gm);
            if dm < disp {
                v = m;
                gv = gm;
                disp = dm;
            } else {
                break;
            }
        }
        if disp == 1 && self.eval(&gv) == v {
            let colour = v.colour_towards(&gv).expect("adjacent");
            return Classification {
                kind: Kind::Elliptic,
                length: 0,
                axis_base: None,
                fixed_vertex: None,
                inverted_edge: Some(EdgeRef::new(v, colour)),
            };
        }
        Classification { kind: Kind::Hyperbolic, length: disp, axis_base: Some(v), fixed_vertex: None, inverted_edge: None }
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.classify().kind == Kind::Hyperbolic
    }

    /// Translation length `l(g)` (zero when elliptic).
    pub fn length(&self) -> usize {
        self.classify().length
    }

    fn axis_data(&self) -> Result<&AxisData> {
        self.inner
            .axis
            .get_or_init(|| {
                let c = self.classify();
                let base = c.axis_base.clone()?;
                let image = self.eval(&base);
                let segment = base.geodesic(&image);
                let forward = segment[1].clone();
                let back = self.eval_inv(&base);
                let backward = base.towards(&back, 1);
                Some(AxisData { base, length: c.length, segment, forward, backward })
            })
            .as_ref()
            .ok_or(Error::NotHyperbolic)
    }

    pub fn axis_base(&self) -> Result<Vertex> {
        Ok(self.axis_data()?.base.clone())
    }

    /// The axis vertex at signed position `i` from the axis base, increasing towards the attracting end.
    pub fn axis_vertex(&self, i: i64) -> Result<Vertex> {
        let ax = self.axis_data()?;
        if let Some(v) = self.inner.axis_memo.lock().expect("poisoned").get(&i) {
            return Ok(v.clone());
        }
        let l = ax.length as i64;
        let q = i.div_euclid(l);
        let r = i.rem_euclid(l) as usize;
        let v = self.eval_pow(&ax.segment[r], q);
        self.inner.axis_memo.lock().expect("poisoned").insert(i, v.clone());
        Ok(v)
    }

    /// Signed position of an axis vertex.
    pub fn axis_pos(&self, w: &Vertex) -> Result<i64> {
        let ax = self.axis_data()?;
        if *w == ax.base {
            return Ok(0);
        }
        let k = ax.base.distance(w) as i64;
        let first = ax.base.towards(w, 1);
        if first == ax.forward {
            Ok(k)
        } else if first == ax.backward {
            Ok(-k)
        } else {
            Err(Error::Precondition(format!("{w} is not on the axis")))
        }
    }

    pub fn dist_to_axis(&self, v: &Vertex) -> Result<usize> {
        let l = self.axis_data()?.length;
        let d = v.distance(&self.eval(v));
        if d < l || !(d - l).is_multiple_of(2) {
            return Err(Error::Internal(format!("displacement {d} at {v} is incompatible with length {l}")));
        }
        Ok((d - l) / 2)
    }

    pub fn project_to_axis(&self, v: &Vertex) -> Result<Vertex> {
        let k = self.dist_to_axis(v)?;
        Ok(v.towards(&self.eval(v), k))
    }

    /// Position of the projection of `v` onto the axis.
    pub fn proj_pos(&self, v: &Vertex) -> Result<i64> {
        self.axis_pos(&self.project_to_axis(v)?)
    }

    /// `u ≤_g v` for axis vertices.
    pub fn axis_order_leq(&self, u: &Vertex, v: &Vertex) -> Result<bool> {
        Ok(self.axis_pos(u)? <= self.axis_pos(v)?)
    }

    pub fn attracting_end(&self) -> Result<EndHandle> {
        self.axis_data()?;
        Ok(EndHandle { carrier: self.clone(), attracting: true })
    }

    pub fn repelling_end(&self) -> Result<EndHandle> {
        self.axis_data()?;
        Ok(EndHandle { carrier: self.clone(), attracting: false })
    }

    /// Vertices that could carry a local action outside `F`.
    pub fn singular_candidates(&self) -> BTreeSet<Vertex> {
        let word = &self.inner.word;
        let mut out = BTreeSet::new();
        for (i, (letter, inverted)) in word.iter().enumerate() {
            for s in letter.singular(*inverted) {
                let mut x = s;
                for (l, inv) in &word[i + 1..] {
                    x = l.apply(!*inv, &x).0;
                }
                out.insert(x);
            }
        }
        out
    }

    /// `S(g)`: the vertices whose local action lies outside `F`.
    pub fn singularities(&self) -> &BTreeSet<Vertex> {
        self.inner.sing.get_or_init(|| {
            let f = &self.inner.amb.f;
            self.singular_candidates().into_iter().filter(|v| !f.contains(&self.local_action(v))).collect()
        })
    }

    /// `D_g`, zero when there are no singularities.
    pub fn sing_depth(&self) -> Result<usize> {
        let mut depth = 0;
        for s in self.singularities() {
            depth = depth.max(self.dist_to_axis(s)?);
        }
        Ok(depth)
    }

    /// Least and greatest axis positions of projected singularities.
    pub fn sing_window(&self) -> Result<Option<(i64, i64)>> {
        let mut window: Option<(i64, i64)> = None;
        for s in self.singularities() {
            let p = self.proj_pos(s)?;
            window = Some(match window {
                None => (p, p),
                Some((lo, hi)) => (lo.min(p), hi.max(p)),
            });
        }
        Ok(window)
    }

    /// Checks local actions in `F′` on the candidate region and a ball, and in `F` off the candidates.
    pub fn validate_membership(&self, radius: usize) -> Result<MembershipReport> {
        let amb = &self.inner.amb;
        let candidates = self.singular_candidates();
        let mut region: BTreeSet<Vertex> = candidates.clone();
        region.extend(CompleteSubtree::ball(amb.degree, &Vertex::root(), radius).vertices().iter().cloned());
        for v in &region {
            let s = self.local_action(v);
            if !amb.fprime.contains(&s) {
                return Err(Error::Inconsistent(format!("local action {s} at {v} is outside F′")));
            }
            if !candidates.contains(v) && !amb.f.contains(&s) {
                return Err(Error::Internal(format!("uncounted singularity at {v}")));
            }
        }
        Ok(MembershipReport { singular: self.singularities().len(), checked: region.len() })
    }
}

/// A hyperbolic element of length one whose axis passes `base` with backward colour `back` and
/// forward colour `forward` at `base`; the axis continues along default local actions.
pub fn translation_along(amb: &Arc<Ambient>, base: &Vertex, back: u8, forward: u8) -> Result<Elem> {
    if !amb.f.is_2transitive() {
        return Err(Error::NotTwoTransitive);
    }
    if back == forward || back as usize >= amb.degree || forward as usize >= amb.degree {
        return Err(Error::Precondition("backward and forward colours must be distinct colours".into()));
    }
    let sigma = amb
        .f
        .elements()
        .iter()
        .find(|s| s.apply(back) == forward && s.apply(forward) != forward)
        .cloned()
        .ok_or(Error::NotTwoTransitive)?;
    translation_from_star(amb, base, back, forward, sigma)
}

/// The portrait at `base` with local action `sigma`, sending `base·back` to `base` and `base` to
/// `base·forward`.
pub fn translation_from_star(amb: &Arc<Ambient>, base: &Vertex, back: u8, forward: u8, sigma: Perm) -> Result<Elem> {
    if sigma.apply(back) != forward {
        return Err(Error::Precondition("local action must send the backward colour to the forward colour".into()));
    }
    let support = CompleteSubtree::star(amb.degree, base);
    let locals = BTreeMap::from([(base.clone(), sigma)]);
    let p = Portrait::from_consistent_set(amb, support, locals, base.clone(), base.step(forward))?;
    Ok(Elem::from_portrait(p))
}
