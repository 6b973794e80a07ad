//! Asymptotic behaviour of hyperbolic elements: λ-trajectories, end comparison, the length
//! function `𝒩ₑ` and the asymptotic relation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigUint;

use crate::element::Elem;
use crate::error::{Error, Result};
use crate::perm::{LambdaCoset, Perm};
use crate::scale;
use crate::tree::{complete_hull, CompleteSubtree, EdgeRef, Vertex};

/// Evidence attached to a certified verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    /// The axes overlap along a walk of this many steps with matching orientation.
    Overlap { depth: usize },
    /// The axes stay at least this far apart while the walk moves away.
    AxisGap { distance: usize },
    /// Opposite orientations along a shared edge starting at this vertex.
    Orientation { at: Vertex },
    /// The walk leaves the other axis after touching it.
    Divergence { at: Vertex },
    /// λ-values differ at this vertex.
    Lambda { at: Vertex },
    /// The axes share no edge.
    Disjoint,
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::Overlap { .. } => "overlap",
            Certificate::AxisGap { .. } => "axis-gap",
            Certificate::Orientation { .. } => "orientation",
            Certificate::Divergence { .. } => "divergence",
            Certificate::Lambda { .. } => "lambda",
            Certificate::Disjoint => "disjoint",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Equal(Certificate),
    NotEqual(Certificate),
    Unknown { depth: usize },
}

impl Verdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, Verdict::Equal(_))
    }

    pub fn is_not_equal(&self) -> bool {
        matches!(self, Verdict::NotEqual(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Equal(_) => "equal",
            Verdict::NotEqual(_) => "notequal",
            Verdict::Unknown { .. } => "unknown",
        }
    }

    pub fn certificate_kind(&self) -> &'static str {
        match self {
            Verdict::Equal(c) | Verdict::NotEqual(c) => c.kind(),
            Verdict::Unknown { .. } => "none",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} certificate={}", self.label(), self.certificate_kind())
    }
}

/// `λ_g(v)` and the threshold `H_g(v)` after which `σ(gⁿ, g⁻ⁿ(v))F` is constant.
pub fn lambda(g: &Elem, v: &Vertex) -> Result<(LambdaCoset, usize)> {
    if !g.is_hyperbolic() {
        return Err(Error::NotHyperbolic);
    }
    let f = g.ambient().f();
    let trivial = (LambdaCoset::trivial(g.degree()), 0);
    let Some((lo, _)) = g.sing_window()? else {
        return Ok(trivial);
    };
    if let Some(hit) = g.inner().lambda_memo.lock().expect("poisoned").get(v) {
        return Ok(hit.clone());
    }
    let result = if g.proj_pos(v)? <= lo || g.dist_to_axis(v)? > g.sing_depth()? {
        trivial
    } else {
        let mut x = v.clone();
        let mut acc = Perm::identity(g.degree());
        let mut cosets = vec![LambdaCoset::trivial(g.degree())];
        loop {
            let (prev, s_inv) = g.eval_inv_local(&x);
            x = prev;
            acc = acc.compose(&s_inv.inverse());
            cosets.push(LambdaCoset::new(&acc, f));
            if g.proj_pos(&x)? < lo {
                break;
            }
        }
        let last = cosets.last().cloned().expect("non-empty");
        let h = cosets.iter().rposition(|c| *c != last).map_or(0, |i| i + 1);
        (last, h)
    };
    g.inner().lambda_memo.lock().expect("poisoned").insert(v.clone(), result.clone());
    Ok(result)
}

/// `⋃_{1≤n≤N} gⁿ S(g)` where `N` carries every singularity past the last singular projection,
/// extended by `extra` further translates.
pub fn lambda_window(g: &Elem, extra: usize) -> Result<BTreeSet<Vertex>> {
    let mut out = BTreeSet::new();
    let Some((_, hi)) = g.sing_window()? else {
        return Ok(out);
    };
    for s in g.singularities() {
        let mut x = s.clone();
        let mut past = 0;
        while past <= extra {
            x = g.eval(&x);
            out.insert(x.clone());
            if g.proj_pos(&x)? > hi {
                past += 1;
            }
        }
    }
    Ok(out)
}

/// The vertices of the initial window where `λ_g` is non-trivial.  Beyond it `λ_g` is
/// determined by the cocycle law from these values.
pub fn lambda_support(g: &Elem) -> Result<BTreeSet<Vertex>> {
    let mut out = BTreeSet::new();
    for v in lambda_window(g, 0)? {
        if !lambda(g, &v)?.0.is_trivial() {
            out.insert(v);
        }
    }
    Ok(out)
}

/// Sparse table of non-trivial λ-values on the initial window.
#[derive(Clone, Debug)]
pub struct LambdaTable {
    pub entries: BTreeMap<Vertex, (LambdaCoset, usize)>,
}

impl LambdaTable {
    pub fn build(g: &Elem) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for v in lambda_support(g)? {
            entries.insert(v.clone(), lambda(g, &v)?);
        }
        Ok(LambdaTable { entries })
    }
}

/// Compares `λ_g` and `λ_h` on the union of their windows extended by `horizon` translates.
pub fn weakly_asymptotic_within(g: &Elem, h: &Elem, horizon: usize) -> Result<Option<Vertex>> {
    let mut region = lambda_window(g, horizon)?;
    region.extend(lambda_window(h, horizon)?);
    for v in region {
        if lambda(g, &v)?.0 != lambda(h, &v)?.0 {
            return Ok(Some(v));
        }
    }
    Ok(None)
}

pub fn default_horizon(g: &Elem, h: &Elem) -> usize {
    2 + g.length() + h.length()
}

pub fn weakly_asymptotic(g: &Elem, h: &Elem) -> Result<bool> {
    Ok(weakly_asymptotic_within(g, h, default_horizon(g, h))?.is_none())
}

/// `4·(l(g) + l(h) + D_g + D_h + d(bases))`.
pub fn default_depth(g: &Elem, h: &Elem) -> Result<usize> {
    let d = g.axis_base()?.distance(&h.axis_base()?);
    Ok(4 * (g.length() + h.length() + g.sing_depth()? + h.sing_depth()? + d))
}

/// Whether the attracting ends of `g` and `h` coincide.
pub fn ends_equal(g: &Elem, h: &Elem, depth: usize) -> Result<Verdict> {
    if !g.is_hyperbolic() || !h.is_hyperbolic() {
        return Err(Error::NotHyperbolic);
    }
    let start = g.proj_pos(&h.axis_base()?)?;
    let mut prev: Option<(Vertex, usize)> = None;
    let mut min_gap = usize::MAX;
    let mut shared_edges = 0;
    for i in 0..=depth as i64 {
        let x = g.axis_vertex(start + i)?;
        let delta = h.dist_to_axis(&x)?;
        if let Some((px, pdelta)) = &prev {
            if delta > *pdelta {
                return Ok(Verdict::NotEqual(if min_gap > 0 {
                    Certificate::AxisGap { distance: min_gap }
                } else {
                    Certificate::Divergence { at: x }
                }));
            }
            if delta == 0 && *pdelta == 0 {
                if h.axis_pos(&x)? < h.axis_pos(px)? {
                    return Ok(Verdict::NotEqual(Certificate::Orientation { at: px.clone() }));
                }
                shared_edges += 1;
            }
        }
        min_gap = min_gap.min(delta);
        prev = Some((x, delta));
    }
    match prev {
        Some((_, 0)) if shared_edges > 0 => Ok(Verdict::Equal(Certificate::Overlap { depth })),
        _ => Ok(Verdict::Unknown { depth }),
    }
}

/// `g ≍ h`: equal attracting ends and equal λ-functions.
pub fn asymptotic(g: &Elem, h: &Elem, depth: usize) -> Result<Verdict> {
    if !g.ambient().f().is_2transitive() {
        return Err(Error::NotTwoTransitive);
    }
    let ends = ends_equal(g, h, depth)?;
    if ends.is_not_equal() {
        return Ok(ends);
    }
    if let Some(v) = weakly_asymptotic_within(g, h, default_horizon(g, h))? {
        return Ok(Verdict::NotEqual(Certificate::Lambda { at: v }));
    }
    Ok(ends)
}

/// `𝒯ₑ(g)`: the least complete subtree containing `e` and `g⁻¹(e)` with `S(g)` internal.
pub fn tree_t_e(g: &Elem, e: &EdgeRef) -> CompleteSubtree {
    let d = g.degree();
    let (o, t) = (e.origin.clone(), e.target());
    let mut set = BTreeSet::from([g.eval_inv(&o), g.eval_inv(&t), o, t]);
    for s in g.singularities() {
        set.extend(s.neighbours(d));
        set.insert(s.clone());
    }
    complete_hull(d, &set)
}

/// `𝒩ₑ(g) = |Int(𝒯ₑ(g))|`.
pub fn n_e(g: &Elem, e: &EdgeRef) -> usize {
    tree_t_e(g, e).internal().len()
}

/// Number of distinct lengths of paths that start along `e` (either way) and end at a
/// non-internal vertex of `𝒯ₑ(g)`.
pub fn p_e(g: &Elem, e: &EdgeRef) -> usize {
    let tree = tree_t_e(g, e);
    let (o, t) = (e.origin.clone(), e.target());
    let lengths: BTreeSet<usize> = tree
        .leaves()
        .map(|x| if x.distance(&t) < x.distance(&o) { x.distance(&o) } else { x.distance(&t) })
        .collect();
    lengths.len()
}

/// The least `(p, q)` with `p·l(g) = q·l(h)`.
pub fn matched_powers(g: &Elem, h: &Elem) -> (i64, i64) {
    let (a, b) = (g.length() as i64, h.length() as i64);
    let gcd = num_integer::gcd(a, b).max(1);
    (b / gcd, a / gcd)
}

/// `𝒩ₑ(g^{−pn} h^{qn})` for `n = 1..=n_max`.
pub fn length_diagnostic(g: &Elem, h: &Elem, p: i64, q: i64, n_max: usize, e: &EdgeRef) -> Vec<usize> {
    (1..=n_max as i64).map(|n| n_e(&g.pow(-p * n).mul(&h.pow(q * n)), e)).collect()
}

/// Shape of a run of length-function values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Growth {
    /// The second half of the run is constant.
    Bounded,
    /// The second half of the run increases strictly.
    Unbounded,
    Inconclusive,
}

pub fn growth(values: &[usize]) -> Growth {
    if values.len() < 4 {
        return Growth::Inconclusive;
    }
    let tail = &values[values.len() / 2 - 1..];
    if tail.windows(2).all(|w| w[0] == w[1]) {
        Growth::Bounded
    } else if tail.windows(2).all(|w| w[0] < w[1]) {
        Growth::Unbounded
    } else {
        Growth::Inconclusive
    }
}

/// Lower bound `log(|Ω|−1)·(l(g)/log s(g) + l(h)/log s(h))` on the distance between distinct
/// directions, kept symbolically alongside a float rendering.
#[derive(Clone, Debug, PartialEq)]
pub struct GapBound {
    pub base: usize,
    pub lg: usize,
    pub sg: BigUint,
    pub lh: usize,
    pub sh: BigUint,
    pub value: f64,
}

pub fn gap_bound_from(base: usize, lg: usize, sg: &BigUint, lh: usize, sh: &BigUint) -> Option<GapBound> {
    let one = BigUint::from(1u32);
    if *sg <= one || *sh <= one {
        return None;
    }
    let ln = |x: &BigUint| x.to_string().parse::<f64>().map(f64::ln).unwrap_or(f64::NAN);
    let value = (base as f64).ln() * (lg as f64 / ln(sg) + lh as f64 / ln(sh));
    Some(GapBound { base, lg, sg: sg.clone(), lh, sh: sh.clone(), value })
}

/// Absent when the elements are asymptotic or one of them is uniscalar.
pub fn direction_gap_bound(g: &Elem, h: &Elem) -> Result<Option<GapBound>> {
    if asymptotic(g, h, default_depth(g, h)?)?.is_equal() {
        return Ok(None);
    }
    let (sg, sh) = (scale::scale(g)?, scale::scale(h)?);
    Ok(gap_bound_from(g.degree() - 1, g.length(), &sg, h.length(), &sh))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;

    #[test]
    fn verdict_labels() {
        let v = Verdict::NotEqual(Certificate::Lambda { at: Vertex::root() });
        assert_eq!(v.to_string(), "notequal certificate=lambda");
        assert_eq!(Verdict::Unknown { depth: 3 }.certificate_kind(), "none");
        assert!(Verdict::Equal(Certificate::Overlap { depth: 1 }).is_equal());
    }

    #[test]
    fn growth_shapes() {
        assert_eq!(growth(&[5, 5, 5, 5, 5, 5]), Growth::Bounded);
        assert_eq!(growth(&[3, 4, 5, 5, 5, 5]), Growth::Bounded);
        assert_eq!(growth(&[1, 2, 3, 4, 5, 6]), Growth::Unbounded);
        assert_eq!(growth(&[1, 3, 2, 4, 3, 5]), Growth::Inconclusive);
        assert_eq!(growth(&[1, 2]), Growth::Inconclusive);
    }

    #[test]
    fn matched_powers_balance_lengths() {
        let tw = samples::planted_twist();
        assert_eq!(matched_powers(&tw.g, &tw.g.pow(2)), (2, 1));
        assert_eq!(matched_powers(&tw.g.pow(4), &tw.g.pow(6)), (3, 2));
    }

    #[test]
    fn gap_bound_needs_non_uniscalar_elements() {
        let (two, three) = (BigUint::from(2u32), BigUint::from(3u32));
        assert!((gap_bound_from(2, 1, &two, 1, &two).unwrap().value - 2.0).abs() < 1e-12);
        assert!((gap_bound_from(3, 1, &three, 1, &three).unwrap().value - 2.0).abs() < 1e-12);
        let b = gap_bound_from(2, 1, &three, 1, &three).unwrap();
        assert!((b.value - 2.0 * 2f64.ln() / 3f64.ln()).abs() < 1e-12);
        assert!(gap_bound_from(2, 1, &BigUint::from(1u32), 1, &three).is_none());
    }

    #[test]
    fn twist_is_singular_only_behind_the_root() {
        let tw = samples::planted_twist();
        assert_eq!(tw.g.singularities().len(), 1);
        assert!(lambda(&tw.t, &Vertex::root()).unwrap().0.is_trivial());
        assert!(!lambda(&tw.g, &Vertex::root()).unwrap().0.is_trivial());
    }

    #[test]
    fn opposite_elements_have_different_ends() {
        let tw = samples::planted_twist();
        let v = ends_equal(&tw.t, &tw.t.inv(), 8).unwrap();
        assert!(matches!(v, Verdict::NotEqual(Certificate::Orientation { .. })));
    }

    #[test]
    fn zero_depth_is_inconclusive() {
        let tw = samples::planted_twist();
        assert!(asymptotic(&tw.g, &tw.g.pow(2), 0).unwrap().is_unknown());
    }
}
