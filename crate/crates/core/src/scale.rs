//! The scale function: pandos, the automorphism set `M`, fixator indices and the closed
//! formula for `U(F)`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::directions::lambda;
use crate::element::{Ambient, Elem, Portrait};
use crate::error::{Error, Result};
use crate::perm::{quotient_contains, Perm, PermGroup};
use crate::tree::{complete_hull, CompleteSubtree, Vertex};

/// Resource limits for the enumerations behind the scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub max_internal: usize,
    pub max_nodes: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { max_internal: 64, max_nodes: 10_000_000 }
    }
}

impl Caps {
    /// Limits large enough for the constructed witnesses, whose pandos reach a few hundred
    /// internal vertices.
    pub fn generous() -> Self {
        Caps { max_internal: 20_000, max_nodes: 100_000_000 }
    }
}

struct Budget {
    used: u64,
    max: u64,
}

impl Budget {
    fn new(max: u64) -> Self {
        Budget { used: 0, max }
    }

    fn spend(&mut self, n: u64) -> Result<()> {
        self.used += n;
        if self.used > self.max {
            return Err(Error::CapExceeded(format!("more than {} enumeration nodes", self.max)));
        }
        Ok(())
    }
}

/// The vertices hanging off the axis vertex at position `p`, up to distance `depth` from it.
fn hanging(g: &Elem, p: i64, depth: usize) -> Result<Vec<Vertex>> {
    let d = g.degree();
    let x = g.axis_vertex(p)?;
    let prev = g.axis_vertex(p - 1)?;
    let next = g.axis_vertex(p + 1)?;
    let mut out = Vec::new();
    let mut stack: Vec<(Vertex, Vertex, usize)> = x
        .neighbours(d)
        .filter(|y| *y != prev && *y != next)
        .map(|y| (y, x.clone(), 1))
        .collect();
    while let Some((y, parent, k)) = stack.pop() {
        if k < depth {
            for z in y.neighbours(d) {
                if z != parent {
                    stack.push((z, y.clone(), k + 1));
                }
            }
        }
        out.push(y);
    }
    Ok(out)
}

/// Axis positions `[a, b]` together with the vertices hanging off `(a, b)` to distance `depth`.
fn axis_tree(g: &Elem, a: i64, b: i64, depth: usize) -> Result<CompleteSubtree> {
    if b - a < 2 || depth == 0 {
        return Err(Error::Precondition("axis tree needs an internal axis vertex and positive depth".into()));
    }
    let mut set = BTreeSet::new();
    for p in a..=b {
        set.insert(g.axis_vertex(p)?);
    }
    for p in a + 1..b {
        set.extend(hanging(g, p, depth)?);
    }
    CompleteSubtree::from_vertices(g.degree(), set)
}

/// A finite complete subtree whose translates control the scale of `g`.
#[derive(Clone, Debug)]
pub struct Pando {
    pub tree: CompleteSubtree,
    pub owner: Elem,
    pub depth: usize,
    pub window: (i64, i64),
}

impl Pando {
    /// Axis `[v0, v1]` plus everything within `depth` of the axis projecting strictly between.
    pub fn build(g: &Elem, depth: usize, v0: i64, v1: i64) -> Result<Pando> {
        if !g.is_hyperbolic() {
            return Err(Error::NotHyperbolic);
        }
        if depth <= g.sing_depth()? {
            return Err(Error::Precondition(format!("depth {depth} does not exceed the singular depth")));
        }
        if v0 + g.length() as i64 >= v1 {
            return Err(Error::Precondition("g(v0) must precede v1".into()));
        }
        if let Some((lo, hi)) = g.sing_window()? {
            if v0 >= lo || v1 <= hi {
                return Err(Error::Precondition("singular projections must lie strictly inside the window".into()));
            }
        }
        let tree = axis_tree(g, v0, v1, depth)?;
        let p = Pando { tree, owner: g.clone(), depth, window: (v0, v1) };
        p.validate()?;
        Ok(p)
    }

    /// Checks the three pando conditions directly.
    pub fn validate(&self) -> Result<()> {
        let g = &self.owner;
        for s in g.singularities() {
            if !self.tree.is_internal(s) {
                return Err(Error::Internal(format!("singularity {s} is not internal to the pando")));
            }
        }
        let mut p2 = false;
        let mut max_dist = 0;
        let mut internal_axis = Vec::new();
        for v in self.tree.vertices() {
            let dist = g.dist_to_axis(v)?;
            max_dist = max_dist.max(dist);
            if dist == 0 {
                if self.tree.is_internal(&g.eval(v)) {
                    p2 = true;
                }
                if self.tree.is_internal(v) {
                    internal_axis.push(g.axis_pos(v)?);
                }
            }
        }
        if !p2 {
            return Err(Error::Internal("no axis vertex of the pando maps into its interior".into()));
        }
        for p in internal_axis {
            for y in hanging(g, p, max_dist)? {
                if !self.tree.contains(&y) {
                    return Err(Error::Internal(format!("pando misses {y} at depth {}", g.dist_to_axis(&y)?)));
                }
            }
        }
        Ok(())
    }

    /// `𝒫₀`: the least complete subtree containing `𝒫 ∖ g(𝒫)`.
    pub fn initial_segment(&self) -> CompleteSubtree {
        let image = self.image();
        let rest: BTreeSet<Vertex> = self.tree.vertices().difference(image.vertices()).cloned().collect();
        complete_hull(self.tree.degree(), &rest)
    }

    pub fn image(&self) -> CompleteSubtree {
        self.tree.map(|v| self.owner.eval(v))
    }
}

/// The pando with the tightest window around the singular projections.
pub fn make_pando(g: &Elem, depth: Option<usize>) -> Result<Pando> {
    if !g.is_hyperbolic() {
        return Err(Error::NotHyperbolic);
    }
    let depth = depth.unwrap_or(g.sing_depth()? + 1);
    let l = g.length() as i64;
    let (v0, v1) = match g.sing_window()? {
        Some((lo, hi)) => (lo - 1, (hi + 1).max(lo + l)),
        None => (0, l + 1),
    };
    Pando::build(g, depth, v0, v1)
}

/// Number of distinct restrictions to `big` of elements of `U(F)` fixing `small` pointwise.
pub fn fixator_index(big: &CompleteSubtree, small: &CompleteSubtree, f: &PermGroup) -> Result<BigUint> {
    if !small.is_subtree_of(big) {
        return Err(Error::Precondition("the fixed subtree is not contained in the larger one".into()));
    }
    let d = big.degree() as u8;
    let mut total = BigUint::one();
    let mut seen: HashSet<Vertex> = small.vertices().iter().cloned().collect();
    let mut queue: VecDeque<(Vertex, Option<u8>)> = small.vertices().iter().map(|v| (v.clone(), None)).collect();
    while let Some((x, parent)) = queue.pop_front() {
        let pins: Vec<u8> = match parent {
            Some(c) => vec![c],
            None => (0..d).filter(|&c| small.contains(&x.step(c))).collect(),
        };
        let free: Vec<u8> = (0..d).filter(|&c| !pins.contains(&c) && big.contains(&x.step(c))).collect();
        if free.is_empty() {
            continue;
        }
        let restrictions: HashSet<Vec<u8>> = f
            .elements()
            .iter()
            .filter(|t| pins.iter().all(|&c| t.apply(c) == c))
            .map(|t| free.iter().map(|&c| t.apply(c)).collect())
            .collect();
        total *= BigUint::from(restrictions.len());
        for &c in &free {
            let y = x.step(c);
            if seen.insert(y.clone()) {
                queue.push_back((y, Some(c)));
            }
        }
    }
    Ok(total)
}

/// A fixator `U_𝒯`, or its conjugate `c U_𝒯 c⁻¹`.
#[derive(Clone, Debug)]
pub struct FixatorSpec {
    pub fixed: CompleteSubtree,
    pub conjugator: Option<Elem>,
}

impl FixatorSpec {
    pub fn plain(fixed: CompleteSubtree) -> Self {
        FixatorSpec { fixed, conjugator: None }
    }
}

/// Counts distinct restrictions to `target` of members of the fixator by exhaustive search over
/// consistent `F`-local actions.  A conjugator `c` is absorbed by restricting to `c⁻¹(target)`.
pub fn restriction_count(spec: &FixatorSpec, target: &CompleteSubtree, amb: &Arc<Ambient>, caps: &Caps) -> Result<BigUint> {
    let d = amb.degree();
    let fixed = &spec.fixed;
    let targets: Vec<Vertex> = match &spec.conjugator {
        Some(c) => target.vertices().iter().map(|y| c.eval_inv(y)).collect(),
        None => target.vertices().iter().cloned().collect(),
    };
    let mut all: BTreeSet<Vertex> = fixed.vertices().clone();
    all.extend(targets.iter().cloned());
    let hull = complete_hull(d, &all);
    let root = fixed.vertices().iter().next().cloned().ok_or(Error::Precondition("empty fixed set".into()))?;

    // Breadth-first order of the hull with parent links.
    let mut order = vec![(root.clone(), None::<(usize, u8)>)];
    let mut pos: HashMap<Vertex, usize> = HashMap::from([(root.clone(), 0)]);
    let mut i = 0;
    while i < order.len() {
        let x = order[i].0.clone();
        for c in 0..d as u8 {
            let y = x.step(c);
            if hull.contains(&y) && !pos.contains_key(&y) {
                pos.insert(y.clone(), order.len());
                order.push((y, Some((i, c))));
            }
        }
        i += 1;
    }
    let target_idx: Vec<usize> = targets.iter().map(|t| pos[t]).collect();

    let mut images: Vec<Option<Vertex>> = vec![None; order.len()];
    let mut locals: Vec<Option<Perm>> = vec![None; order.len()];
    images[0] = Some(root.clone());
    let mut found: BTreeSet<Vec<Vertex>> = BTreeSet::new();
    let mut budget = Budget::new(caps.max_nodes);
    let f = amb.f().clone();

    #[allow(clippy::too_many_arguments)]
    fn search(
        k: usize,
        order: &[(Vertex, Option<(usize, u8)>)],
        hull: &CompleteSubtree,
        fixed: &CompleteSubtree,
        f: &PermGroup,
        images: &mut Vec<Option<Vertex>>,
        locals: &mut Vec<Option<Perm>>,
        target_idx: &[usize],
        found: &mut BTreeSet<Vec<Vertex>>,
        budget: &mut Budget,
    ) -> Result<()> {
        budget.spend(1)?;
        if k == order.len() {
            found.insert(target_idx.iter().map(|&i| images[i].clone().expect("assigned")).collect());
            return Ok(());
        }
        let x = &order[k].0;
        let (img, pin) = match order[k].1 {
            None => (x.clone(), None),
            Some((p, c)) => {
                let a = locals[p].as_ref().expect("parent local").apply(c);
                (images[p].as_ref().expect("parent image").step(a), Some((c, a)))
            }
        };
        if fixed.contains(x) && img != *x {
            return Ok(());
        }
        images[k] = Some(img);
        // Only the action on colours leading to hull vertices matters.
        let mut tried: HashSet<Vec<u8>> = HashSet::new();
        for t in f.elements() {
            if let Some((c, a)) = pin {
                if t.apply(c) != a {
                    continue;
                }
            }
            let key: Vec<u8> = (0..f.degree() as u8).filter(|&c| hull.contains(&x.step(c))).map(|c| t.apply(c)).collect();
            if !tried.insert(key) {
                continue;
            }
            locals[k] = Some(t.clone());
            search(k + 1, order, hull, fixed, f, images, locals, target_idx, found, budget)?;
        }
        images[k] = None;
        locals[k] = None;
        Ok(())
    }

    search(0, &order, &hull, fixed, &f, &mut images, &mut locals, &target_idx, &mut found, &mut budget)?;
    Ok(BigUint::from(found.len()))
}

/// `([U : U ∩ V], [V : U ∩ V])`.  Conjugators must lie in `U(F)`, so conjugating a fixator
/// amounts to moving its fixed subtree.
pub fn cos_distance(u: &FixatorSpec, v: &FixatorSpec, amb: &Arc<Ambient>, caps: &Caps) -> Result<(BigUint, BigUint)> {
    let settle = |s: &FixatorSpec| -> Result<CompleteSubtree> {
        match &s.conjugator {
            None => Ok(s.fixed.clone()),
            Some(c) if c.singularities().is_empty() => Ok(s.fixed.map(|x| c.eval(x))),
            Some(_) => Err(Error::Precondition("conjugators must lie in U(F)".into())),
        }
    };
    let (a, b) = (settle(u)?, settle(v)?);
    let uv = restriction_count(&FixatorSpec::plain(a.clone()), &b, amb, caps)?;
    let vu = restriction_count(&FixatorSpec::plain(b), &a, amb, caps)?;
    Ok((uv, vu))
}

/// Which membership test a local action of an element of `M` must pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MRule {
    /// `τ ∈ F` and `τ ∈ σ(gᴷ, a(v))⁻¹ F σ(gᴷ, v)` for a stabilised forward power `K`.
    Forward { k: i64 },
    /// `σ(gᵏ, a(v)) τ σ(gᵏ, v)⁻¹ ∈ F` for `k = ±K`.
    TwoSided { k: i64 },
    /// `τ ∈ F ∩ λ_g(a(v)) λ_g(v)⁻¹`.
    Lambda,
}

/// Automorphisms of an axis tree that fix the axis and satisfy a local rule at internal vertices.
pub struct MSet<'a> {
    g: &'a Elem,
    tree: &'a CompleteSubtree,
    rule: MRule,
    rho_plus: HashMap<Vertex, Perm>,
    rho_minus: HashMap<Vertex, Perm>,
    memo: HashMap<(Vertex, Vertex), BigUint>,
    budget: Budget,
}

impl<'a> MSet<'a> {
    pub fn new(g: &'a Elem, tree: &'a CompleteSubtree, rule: MRule, caps: &Caps) -> Self {
        MSet {
            g,
            tree,
            rule,
            rho_plus: HashMap::new(),
            rho_minus: HashMap::new(),
            memo: HashMap::new(),
            budget: Budget::new(caps.max_nodes),
        }
    }

    fn rho(&mut self, v: &Vertex, forward: bool) -> Perm {
        let k = match self.rule {
            MRule::Forward { k } | MRule::TwoSided { k } => k,
            MRule::Lambda => 0,
        };
        let (map, n) = if forward { (&mut self.rho_plus, k) } else { (&mut self.rho_minus, -k) };
        map.entry(v.clone()).or_insert_with(|| self.g.eval_pow_local(v, n).1).clone()
    }

    /// Local actions at `x` allowed when `x` is sent to `y`, restricted by the given pins.
    fn candidates(&mut self, x: &Vertex, y: &Vertex, pins: &[(u8, u8)]) -> Result<Vec<Perm>> {
        let f = self.g.ambient().f().clone();
        self.budget.spend(f.order() as u64)?;
        let pinned = |t: &Perm| pins.iter().all(|&(c, a)| t.apply(c) == a);
        let out = match self.rule {
            MRule::Forward { .. } => {
                let (rx, ry) = (self.rho(x, true), self.rho(y, true));
                let rx_inv = rx.inverse();
                f.elements()
                    .iter()
                    .filter(|t| pinned(t) && f.contains(&ry.compose(t).compose(&rx_inv)))
                    .cloned()
                    .collect()
            }
            MRule::TwoSided { .. } => {
                let (rx, ry) = (self.rho(x, true), self.rho(y, true));
                let (mx, my) = (self.rho(x, false), self.rho(y, false));
                let (ry_inv, mx_inv) = (ry.inverse(), mx.inverse());
                f.elements()
                    .iter()
                    .map(|e| ry_inv.compose(e).compose(&rx))
                    .filter(|t| pinned(t) && f.contains(&my.compose(t).compose(&mx_inv)))
                    .collect()
            }
            MRule::Lambda => {
                let (lx, ly) = (lambda(self.g, x)?.0, lambda(self.g, y)?.0);
                f.elements().iter().filter(|t| pinned(t) && quotient_contains(t, &ly, &lx, &f)).cloned().collect()
            }
        };
        Ok(out)
    }

    /// Ways of mapping the branch at `x` (entered along colour `cx`) onto the branch at `y`.
    fn branch(&mut self, x: &Vertex, y: &Vertex, cx: u8, cy: u8) -> Result<BigUint> {
        if !self.tree.is_internal(x) {
            return Ok(BigUint::one());
        }
        if let Some(n) = self.memo.get(&(x.clone(), y.clone())) {
            return Ok(n.clone());
        }
        let d = self.g.degree() as u8;
        let mut total = BigUint::zero();
        for t in self.candidates(x, y, &[(cx, cy)])? {
            let mut prod = BigUint::one();
            for c in (0..d).filter(|&c| c != cx) {
                let a = t.apply(c);
                prod *= self.branch(&x.step(c), &y.step(a), c, a)?;
                if prod.is_zero() {
                    break;
                }
            }
            total += prod;
        }
        self.memo.insert((x.clone(), y.clone()), total.clone());
        Ok(total)
    }

    fn axis_internal(&self) -> Result<Vec<(Vertex, u8, u8)>> {
        let mut out = Vec::new();
        for x in self.tree.internal() {
            if self.g.dist_to_axis(x)? == 0 {
                let p = self.g.axis_pos(x)?;
                let back = Vertex::edge_colour(x, &self.g.axis_vertex(p - 1)?).expect("adjacent");
                let fwd = Vertex::edge_colour(x, &self.g.axis_vertex(p + 1)?).expect("adjacent");
                out.push((x.clone(), back, fwd));
            }
        }
        Ok(out)
    }

    /// `|M|` as a product over internal axis vertices.
    pub fn count(&mut self) -> Result<BigUint> {
        let d = self.g.degree() as u8;
        let mut total = BigUint::one();
        for (x, back, fwd) in self.axis_internal()? {
            let mut here = BigUint::zero();
            for t in self.candidates(&x, &x, &[(back, back), (fwd, fwd)])? {
                let mut prod = BigUint::one();
                for c in (0..d).filter(|&c| c != back && c != fwd) {
                    let a = t.apply(c);
                    prod *= self.branch(&x.step(c), &x.step(a), c, a)?;
                }
                here += prod;
            }
            total *= here;
        }
        Ok(total)
    }

    fn branch_maps(&mut self, x: &Vertex, y: &Vertex, cx: u8, cy: u8, cap: usize) -> Result<Vec<Vec<(Vertex, Vertex)>>> {
        if !self.tree.is_internal(x) {
            return Ok(vec![vec![(x.clone(), y.clone())]]);
        }
        let d = self.g.degree() as u8;
        let mut out = Vec::new();
        for t in self.candidates(x, y, &[(cx, cy)])? {
            let mut partial = vec![vec![(x.clone(), y.clone())]];
            for c in (0..d).filter(|&c| c != cx) {
                let a = t.apply(c);
                let sub = self.branch_maps(&x.step(c), &y.step(a), c, a, cap)?;
                partial = product(partial, &sub, cap)?;
            }
            out.extend(partial);
            if out.len() > cap {
                return Err(Error::CapExceeded(format!("more than {cap} automorphisms")));
            }
        }
        Ok(out)
    }

    /// The members of `M` as vertex maps, at most `cap` of them.
    pub fn enumerate(&mut self, cap: usize) -> Result<Vec<BTreeMap<Vertex, Vertex>>> {
        let d = self.g.degree() as u8;
        let mut all: Vec<Vec<(Vertex, Vertex)>> = vec![self
            .tree
            .vertices()
            .iter()
            .filter(|v| self.g.dist_to_axis(v).map(|k| k == 0).unwrap_or(false))
            .map(|v| (v.clone(), v.clone()))
            .collect()];
        for (x, back, fwd) in self.axis_internal()? {
            let mut here = Vec::new();
            for t in self.candidates(&x, &x, &[(back, back), (fwd, fwd)])? {
                let mut partial = vec![Vec::new()];
                for c in (0..d).filter(|&c| c != back && c != fwd) {
                    let a = t.apply(c);
                    let sub = self.branch_maps(&x.step(c), &x.step(a), c, a, cap)?;
                    partial = product(partial, &sub, cap)?;
                }
                here.extend(partial);
            }
            all = product(all, &here, cap)?;
        }
        Ok(all.into_iter().map(|m| m.into_iter().collect()).collect())
    }
}

fn product<T: Clone>(left: Vec<Vec<T>>, right: &[Vec<T>], cap: usize) -> Result<Vec<Vec<T>>> {
    if left.len().saturating_mul(right.len()) > cap {
        return Err(Error::CapExceeded(format!("more than {cap} automorphisms")));
    }
    let mut out = Vec::with_capacity(left.len() * right.len());
    for l in &left {
        for r in right {
            let mut v = l.clone();
            v.extend(r.iter().cloned());
            out.push(v);
        }
    }
    Ok(out)
}

/// Smallest `K ≥ 1` with `from + K·l > hi`.
fn forward_power(from: i64, hi: i64, l: i64) -> i64 {
    ((hi - from).div_euclid(l) + 1).max(1)
}

/// The rule for `M_{g,𝒫₀}` of a pando whose window starts at `v0`.
pub fn pando_rule(g: &Elem, v0: i64) -> Result<MRule> {
    let l = g.length() as i64;
    let k = match g.sing_window()? {
        Some((_, hi)) => forward_power(v0 + 1, hi, l) + 1,
        None => 1,
    };
    Ok(MRule::Forward { k })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaleReport {
    pub scale: BigUint,
    pub numerator: BigUint,
    pub m_size: BigUint,
    pub pando_int: usize,
}

impl ScaleReport {
    fn unit() -> Self {
        ScaleReport { scale: BigUint::one(), numerator: BigUint::one(), m_size: BigUint::one(), pando_int: 0 }
    }
}

fn check_internal(tree: &CompleteSubtree, caps: &Caps) -> Result<()> {
    if tree.internal().len() > caps.max_internal {
        return Err(Error::CapExceeded(format!(
            "{} internal vertices exceed the limit of {}",
            tree.internal().len(),
            caps.max_internal
        )));
    }
    Ok(())
}

fn exact_quotient(numerator: BigUint, m_size: BigUint, pando_int: usize) -> Result<ScaleReport> {
    if m_size.is_zero() || !(&numerator % &m_size).is_zero() {
        return Err(Error::Internal(format!("{numerator} is not divisible by |M| = {m_size}")));
    }
    Ok(ScaleReport { scale: &numerator / &m_size, numerator, m_size, pando_int })
}

/// `[U_{g𝒫} : U_{𝒫 ∪ g𝒫}] / |M_{g,𝒫₀}|` for a given pando.
pub fn scale_with_pando(pando: &Pando, caps: &Caps) -> Result<ScaleReport> {
    let g = &pando.owner;
    check_internal(&pando.tree, caps)?;
    let image = pando.image();
    let big = pando.tree.union(&image);
    let numerator = fixator_index(&big, &image, g.ambient().f())?;
    let p0 = pando.initial_segment();
    let mut m = MSet::new(g, &p0, pando_rule(g, pando.window.0)?, caps);
    let m_size = m.count()?;
    exact_quotient(numerator, m_size, pando.tree.internal().len())
}

pub fn scale_report(g: &Elem, caps: &Caps) -> Result<ScaleReport> {
    if !g.is_hyperbolic() {
        return Ok(ScaleReport::unit());
    }
    scale_with_pando(&make_pando(g, None)?, caps)
}

/// `s(g)` with the default limits.
pub fn scale(g: &Elem) -> Result<BigUint> {
    scale_with(g, &Caps::default())
}

pub fn scale_with(g: &Elem, caps: &Caps) -> Result<BigUint> {
    Ok(scale_report(g, caps)?.scale)
}

/// The tree of the flexible formula for a window starting at the axis vertex `v0`.
pub fn flex_tree(g: &Elem, v0: &Vertex, depth: usize) -> Result<CompleteSubtree> {
    let p0 = g.axis_pos(v0)?;
    axis_tree(g, p0 - 1, p0 + g.length() as i64, depth)
}

/// The rule for `M` in the flexible formula: λ-values past the singularities, conjugation by a
/// power of `g` that clears them in both directions otherwise.
pub fn flex_rule(g: &Elem, v0: &Vertex) -> Result<MRule> {
    let p0 = g.axis_pos(v0)?;
    let l = g.length() as i64;
    Ok(match g.sing_window()? {
        None => MRule::Lambda,
        Some((_, hi)) if p0 > hi => MRule::Lambda,
        Some((lo, hi)) => {
            let plus = forward_power(p0, hi, l);
            let minus = forward_power(lo, p0 + l - 1, l);
            MRule::TwoSided { k: plus.max(minus) + 1 }
        }
    })
}

/// `(|Ω| − 1)^{|Int 𝒯|} / |M_{g,𝒯}|` for the tree around `v0`.
pub fn scale_flex(g: &Elem, v0: &Vertex, depth: usize, caps: &Caps) -> Result<ScaleReport> {
    if !g.ambient().f().is_2transitive() {
        return Err(Error::NotTwoTransitive);
    }
    if !g.is_hyperbolic() {
        return Err(Error::NotHyperbolic);
    }
    if depth <= g.sing_depth()? {
        return Err(Error::Precondition(format!("depth {depth} does not exceed the singular depth")));
    }
    let tree = flex_tree(g, v0, depth)?;
    check_internal(&tree, caps)?;
    let rule = flex_rule(g, v0)?;
    let int = tree.internal().len();
    let numerator = BigUint::from(g.degree() - 1).pow(int as u32);
    let m_size = MSet::new(g, &tree, rule, caps).count()?;
    exact_quotient(numerator, m_size, int)
}

/// `∏ |F_{cᵢ} : F_{cᵢ} ∩ F_{cᵢ₊₁}|` over the axis colours of one fundamental domain.
pub fn scale_closed_form_uf(g: &Elem) -> Result<BigUint> {
    if !g.is_hyperbolic() {
        return Err(Error::NotHyperbolic);
    }
    if !g.singularities().is_empty() {
        return Err(Error::Precondition("element does not lie in U(F)".into()));
    }
    let l = g.length() as i64;
    let mut colours = Vec::with_capacity(l as usize + 1);
    for i in 0..=l {
        colours.push(Vertex::edge_colour(&g.axis_vertex(i)?, &g.axis_vertex(i + 1)?).expect("adjacent"));
    }
    let f = g.ambient().f();
    Ok(colours.windows(2).map(|w| f.index_factor(w[0], w[1])).product())
}

/// `Δ(g) = s(g) / s(g⁻¹)`.
pub fn modular(g: &Elem, caps: &Caps) -> Result<BigRational> {
    let num = scale_with(g, caps)?;
    let den = scale_with(&g.inv(), caps)?;
    Ok(BigRational::new(num.into(), den.into()))
}

/// A hyperbolic element of `U(F)` with scale one, available when two colours share a point
/// stabiliser: it translates by two along a path alternating those colours.
pub fn uniscalar_witness(amb: &Arc<Ambient>) -> Result<Option<Elem>> {
    let f = amb.f();
    let d = amb.degree() as u8;
    for a in 0..d {
        for b in a + 1..d {
            if f.point_stabilizer(a) == f.point_stabilizer(b) {
                let image = Vertex::from_colours(vec![a, b])?;
                let locals = BTreeMap::from([(Vertex::root(), Perm::identity(d as usize))]);
                let p = Portrait::new(amb, Vertex::root(), image, locals)?;
                return Ok(Some(Elem::from_portrait(p)));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::translation_along;

    fn ambient(d: usize) -> Arc<Ambient> {
        Ambient::universal(PermGroup::symmetric(d).unwrap()).unwrap()
    }

    #[test]
    fn sym3_translation_has_scale_two() {
        let amb = ambient(3);
        let t = translation_along(&amb, &Vertex::root(), 0, 1).unwrap();
        assert_eq!(scale(&t).unwrap(), BigUint::from(2u32));
        assert_eq!(scale_closed_form_uf(&t).unwrap(), BigUint::from(2u32));
    }

    #[test]
    fn elliptic_scale_is_one() {
        let amb = ambient(4);
        assert_eq!(scale(&Elem::identity(&amb)).unwrap(), BigUint::one());
    }

    #[test]
    fn fixator_index_of_equal_trees_is_one() {
        let amb = ambient(3);
        let star = CompleteSubtree::star(3, &Vertex::root());
        assert_eq!(fixator_index(&star, &star, amb.f()).unwrap(), BigUint::one());
    }

    #[test]
    fn restriction_count_of_edge_fixator() {
        let amb = ambient(3);
        let star = CompleteSubtree::star(3, &Vertex::root());
        let spec = FixatorSpec::plain(CompleteSubtree::from_vertices(3, BTreeSet::from([Vertex::root(), Vertex::root().step(0)])).unwrap());
        assert_eq!(restriction_count(&spec, &star, &amb, &Caps::default()).unwrap(), BigUint::from(2u32));
    }

    #[test]
    fn cyclic_group_has_uniscalar_witness() {
        let c4 = PermGroup::enumerate(4, &[Perm::from_images(vec![1, 2, 3, 0]).unwrap()]).unwrap();
        let amb = Ambient::universal(c4).unwrap();
        let w = uniscalar_witness(&amb).unwrap().expect("C4 has equal point stabilisers");
        assert!(w.is_hyperbolic());
        assert_eq!(w.length(), 2);
        assert_eq!(scale(&w).unwrap(), BigUint::one());
        assert!(uniscalar_witness(&ambient(3)).unwrap().is_none());
    }
}
