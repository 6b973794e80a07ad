//! Fixed values, each either read off a closed formula, recomputed by brute force, or immediate.

mod common;

use num_bigint::BigUint;

use bmscale::directions::{self, Growth};
use bmscale::element::translation_along;
use bmscale::samples;
use bmscale::scale::{self, Caps, FixatorSpec};
use bmscale::tree::sphere_size;
use bmscale::{CompleteSubtree, EdgeRef, Perm, PermGroup, Vertex};

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

#[test]
fn group_orders() {
    assert_eq!(samples::symmetric(4).order(), 24);
    assert_eq!(samples::alternating4().order(), 12);
    assert_eq!(samples::dihedral4().order(), 8);
    assert_eq!(samples::cyclic4().order(), 4);
    assert_eq!(samples::double_transposition().young_subgroup().unwrap().order(), 4);
}

#[test]
fn index_factor_by_counting() {
    for f in [samples::symmetric(4), samples::alternating4(), samples::dihedral4(), samples::cyclic4()] {
        for a in 0..4u8 {
            for b in 0..4u8 {
                let fixes_a: Vec<&Perm> = f.elements().iter().filter(|p| p.apply(a) == a).collect();
                let both = fixes_a.iter().filter(|p| p.apply(b) == b).count();
                let expected = fixes_a.len() / both;
                assert_eq!(f.index_factor(a, b), big(expected as u64), "{a} {b}");
            }
        }
    }
}

#[test]
fn two_transitivity() {
    assert!(samples::symmetric(3).is_2transitive());
    assert!(samples::alternating4().is_2transitive());
    assert!(!samples::dihedral4().is_2transitive());
    assert!(!samples::cyclic4().is_2transitive());
}

#[test]
fn sphere_sizes() {
    assert_eq!(sphere_size(3, 0), big(2));
    assert_eq!(sphere_size(3, 4), big(32));
    assert_eq!(sphere_size(4, 3), big(54));
    assert_eq!(sphere_size(5, 5), big(2048));
    assert_eq!(common::sphere_by_bfs(4, 3), 54);
}

#[test]
fn full_automorphism_group_scales_by_valency() {
    for d in [3usize, 4, 5] {
        let amb = samples::universal(samples::symmetric(d));
        let t = translation_along(&amb, &Vertex::root(), 1, 2).unwrap();
        for l in 1..=3 {
            assert_eq!(scale::scale(&t.pow(l)).unwrap(), big((d as u64 - 1).pow(l as u32)));
        }
    }
}

#[test]
fn alternating_colour_translation_is_uniscalar() {
    // In the dihedral group the stabilisers of 0 and 2 coincide.
    let amb = samples::universal(samples::dihedral4());
    let w = scale::uniscalar_witness(&amb).unwrap().unwrap();
    assert_eq!(w.length(), 2);
    assert_eq!(scale::scale(&w).unwrap(), big(1));
    assert_eq!(scale::scale_closed_form_uf(&w).unwrap(), big(1));
    assert!(scale::uniscalar_witness(&samples::universal(samples::symmetric(3))).unwrap().is_none());
    assert!(scale::uniscalar_witness(&samples::universal(samples::alternating4())).unwrap().is_none());
}

#[test]
fn edge_fixator_indices() {
    let amb = samples::universal(samples::symmetric(3));
    let edge = CompleteSubtree::from_vertices(3, [Vertex::root(), Vertex::root().step(0)].into()).unwrap();
    let star = CompleteSubtree::star(3, &Vertex::root());
    let caps = Caps::default();
    // Fixing an edge, the two remaining branches at its root may still be swapped.
    assert_eq!(scale::fixator_index(&star, &edge, amb.f()).unwrap(), big(2));
    assert_eq!(scale::restriction_count(&FixatorSpec::plain(edge.clone()), &star, &amb, &caps).unwrap(), big(2));
    let ball2 = CompleteSubtree::ball(3, &Vertex::root(), 2);
    assert_eq!(scale::fixator_index(&ball2, &star, amb.f()).unwrap(), big(8));
    assert_eq!(scale::restriction_count(&FixatorSpec::plain(star), &ball2, &amb, &caps).unwrap(), big(8));
}

#[test]
fn cos_distance_between_adjacent_stars() {
    let amb = samples::universal(samples::symmetric(3));
    let a = CompleteSubtree::star(3, &Vertex::root());
    let b = CompleteSubtree::star(3, &Vertex::root().step(0));
    let (ab, ba) = scale::cos_distance(&FixatorSpec::plain(a), &FixatorSpec::plain(b), &amb, &Caps::default()).unwrap();
    assert_eq!((ab, ba), (big(2), big(2)));
}

#[test]
fn twist_fixture() {
    let tw = samples::planted_twist();
    assert_eq!(tw.g.length(), 1);
    assert_eq!(tw.g.singularities().len(), 1);
    assert_eq!(tw.g.sing_depth().unwrap(), 0);
    assert_eq!(scale::scale(&tw.t).unwrap(), big(3));
    assert_eq!(scale::scale_closed_form_uf(&tw.t).unwrap(), big(3));
    assert_eq!(scale::scale(&tw.g).unwrap(), big(3));
}

#[test]
fn twist_length_function() {
    let tw = samples::planted_twist();
    let e = EdgeRef::new(Vertex::root(), 0);
    let twisted = directions::length_diagnostic(&tw.t, &tw.g, 1, 1, 8, &e);
    assert_eq!(directions::growth(&twisted), Growth::Unbounded);
    let squared = directions::length_diagnostic(&tw.g, &tw.g.pow(2), 2, 1, 8, &e);
    assert_eq!(squared, vec![0; 8]);
}

#[test]
fn negative_witness_breaks_multiplicativity() {
    let (gl, h) = samples::negative_witness().unwrap();
    let caps = Caps::generous();
    let product = gl.mul(&h);
    let s = scale::scale_with(&product, &caps).unwrap();
    assert_eq!(scale::scale_with(&gl, &caps).unwrap(), big(3));
    assert_eq!(scale::scale_with(&h, &caps).unwrap(), big(3));
    assert!(s > big(9));
    // The product's scale does not depend on the pando used to compute it.
    let dg = product.sing_depth().unwrap();
    let wider = scale::make_pando(&product, Some(dg + 2)).unwrap();
    assert_eq!(scale::scale_with_pando(&wider, &caps).unwrap().scale, s);
    let (_, hi) = product.sing_window().unwrap().unwrap();
    let v0 = product.axis_vertex(hi + 1).unwrap();
    assert_eq!(scale::scale_flex(&product, &v0, dg + 1, &caps).unwrap().scale, s);
}

#[test]
fn f_prime_reduction() {
    let f = samples::double_transposition();
    let wide = bmscale::Ambient::new(f.clone(), samples::symmetric(4)).unwrap();
    let narrow = bmscale::Ambient::new(f.clone(), f.young_subgroup().unwrap()).unwrap();
    let a = samples::intransitive_planted(&wide).unwrap();
    let b = samples::intransitive_planted(&narrow).unwrap();
    assert_eq!(scale::scale(&a).unwrap(), scale::scale(&b).unwrap());
    let order_two = PermGroup::enumerate(4, &[Perm::from_images(vec![1, 0, 2, 3]).unwrap()]).unwrap();
    assert!(bmscale::Ambient::new(f, order_two).is_err());
}
