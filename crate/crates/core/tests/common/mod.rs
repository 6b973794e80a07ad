//! Brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use bmscale::perm::LambdaCoset;
use bmscale::scale::MRule;
use bmscale::{CompleteSubtree, Elem, Perm, PermGroup, Vertex};

/// Vertices at distance exactly `k` from the edge between the root and its neighbour of colour 0,
/// counted by breadth-first search.
pub fn sphere_by_bfs(d: usize, k: usize) -> usize {
    let a = Vertex::root();
    let b = a.step(0);
    let mut dist: BTreeMap<Vertex, usize> = BTreeMap::from([(a.clone(), 0), (b.clone(), 0)]);
    let mut queue = VecDeque::from([a, b]);
    while let Some(x) = queue.pop_front() {
        let dx = dist[&x];
        if dx == k {
            continue;
        }
        for y in x.neighbours(d) {
            if !dist.contains_key(&y) {
                dist.insert(y.clone(), dx + 1);
                queue.push_back(y);
            }
        }
    }
    dist.values().filter(|&&v| v == k).count()
}

/// `σ(gⁿ, g⁻ⁿ(v))F` for an `n` that carries `g⁻ⁿ(v)` well behind every singularity, checked to be
/// stable over three consecutive values of `n`.
pub fn lambda_by_limit(g: &Elem, v: &Vertex) -> LambdaCoset {
    let f = g.ambient().f();
    let l = g.length() as i64;
    let lo = match g.sing_window().unwrap() {
        Some((lo, _)) => lo,
        None => return LambdaCoset::trivial(g.degree()),
    };
    let p = g.proj_pos(v).unwrap();
    let n0 = (p - lo).max(0) / l + 3;
    let at = |n: i64| {
        let back = g.eval_pow(v, -n);
        let (img, s) = g.eval_pow_local(&back, n);
        assert_eq!(&img, v);
        LambdaCoset::new(&s, f)
    };
    let c = at(n0);
    assert_eq!(c, at(n0 + 1));
    assert_eq!(c, at(n0 + 2 * l.max(1)));
    c
}

fn rule_holds(g: &Elem, rule: MRule, x: &Vertex, y: &Vertex, tau: &Perm, cache: &mut BTreeMap<Vertex, LambdaCoset>) -> bool {
    let f: &PermGroup = g.ambient().f();
    let conj = |k: i64| {
        let (_, sx) = g.eval_pow_local(x, k);
        let (_, sy) = g.eval_pow_local(y, k);
        sy.compose(tau).compose(&sx.inverse())
    };
    match rule {
        MRule::Forward { k } => f.contains(tau) && f.contains(&conj(k)),
        MRule::TwoSided { k } => f.contains(&conj(k)) && f.contains(&conj(-k)),
        MRule::Lambda => {
            let mut lam = |v: &Vertex| cache.entry(v.clone()).or_insert_with(|| lambda_by_limit(g, v)).clone();
            let (lx, ly) = (lam(x), lam(y));
            f.contains(tau) && f.contains(&ly.representative().inverse().compose(tau).compose(lx.representative()))
        }
    }
}

/// Every automorphism of `tree` fixing the axis of `g`, filtered by `rule` at internal vertices.
pub fn m_by_enumeration(g: &Elem, tree: &CompleteSubtree, rule: MRule) -> usize {
    let d = g.degree();
    let sym = PermGroup::symmetric(d).unwrap();
    let root = tree
        .internal()
        .iter()
        .find(|v| g.dist_to_axis(v).unwrap() == 0)
        .cloned()
        .expect("an internal axis vertex");
    let mut order = vec![(root.clone(), None::<(usize, u8)>)];
    let mut seen = BTreeSet::from([root]);
    let mut i = 0;
    while i < order.len() {
        let x = order[i].0.clone();
        for c in 0..d as u8 {
            let y = x.step(c);
            if tree.contains(&y) && seen.insert(y.clone()) {
                order.push((y, Some((i, c))));
            }
        }
        i += 1;
    }
    let mut images: Vec<Option<Vertex>> = vec![None; order.len()];
    let mut locals: Vec<Option<Perm>> = vec![None; order.len()];
    let mut count = 0;
    #[allow(clippy::too_many_arguments)]
    fn go(
        k: usize,
        g: &Elem,
        tree: &CompleteSubtree,
        rule: MRule,
        sym: &PermGroup,
        order: &[(Vertex, Option<(usize, u8)>)],
        images: &mut Vec<Option<Vertex>>,
        locals: &mut Vec<Option<Perm>>,
        count: &mut usize,
        cache: &mut BTreeMap<Vertex, LambdaCoset>,
    ) {
        if k == order.len() {
            let imgs: BTreeSet<&Vertex> = images.iter().map(|v| v.as_ref().unwrap()).collect();
            if imgs.len() != order.len() || imgs.iter().any(|v| !tree.contains(v)) {
                return;
            }
            for (j, (x, _)) in order.iter().enumerate() {
                let y = images[j].as_ref().unwrap();
                if g.dist_to_axis(x).unwrap() == 0 && y != x {
                    return;
                }
                if tree.is_internal(x) && !rule_holds(g, rule, x, y, locals[j].as_ref().unwrap(), cache) {
                    return;
                }
            }
            *count += 1;
            return;
        }
        let x = &order[k].0;
        let (img, pin) = match &order[k].1 {
            None => (x.clone(), None),
            Some((p, c)) => {
                let a = locals[*p].as_ref().unwrap().apply(*c);
                (images[*p].as_ref().unwrap().step(a), Some((*c, a)))
            }
        };
        if !tree.contains(&img) {
            return;
        }
        images[k] = Some(img);
        if !tree.is_internal(x) {
            go(k + 1, g, tree, rule, sym, order, images, locals, count, cache);
        } else {
            for t in sym.elements() {
                if let Some((c, a)) = pin {
                    if t.apply(c) != a {
                        continue;
                    }
                }
                locals[k] = Some(t.clone());
                go(k + 1, g, tree, rule, sym, order, images, locals, count, cache);
            }
            locals[k] = None;
        }
        images[k] = None;
    }
    let mut cache = BTreeMap::new();
    go(0, g, tree, rule, &sym, &order, &mut images, &mut locals, &mut count, &mut cache);
    count
}
