mod common;

use std::sync::Arc;

use num_bigint::BigUint;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bmscale::directions;
use bmscale::perm::LambdaCoset;
use bmscale::samples;
use bmscale::scale::{self, Caps};
use bmscale::tree::complete_hull;
use bmscale::{Ambient, Elem, Perm, PermGroup, Vertex};

fn vertex(d: usize) -> impl Strategy<Value = Vertex> {
    prop::collection::vec(0..d as u8, 0..7).prop_map(|cs| {
        cs.into_iter().fold(Vertex::root(), |v, c| if v.last() == Some(c) { v } else { v.step(c) })
    })
}

fn perm(d: usize) -> impl Strategy<Value = Perm> {
    Just((0..d as u8).collect::<Vec<u8>>()).prop_shuffle().prop_map(|v| Perm::from_images(v).unwrap())
}

fn ambients() -> Vec<Arc<Ambient>> {
    vec![
        samples::universal(samples::symmetric(3)),
        Ambient::new(samples::alternating4(), samples::symmetric(4)).unwrap(),
        samples::universal(samples::dihedral4()),
    ]
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_is_associative(a in perm(5), b in perm(5), c in perm(5)) {
        prop_assert_eq!(a.compose(&b).compose(&c), a.compose(&b.compose(&c)));
        prop_assert!(a.compose(&a.inverse()).is_identity());
    }

    #[test]
    fn composition_applies_right_first(a in perm(4), b in perm(4), x in 0u8..4) {
        prop_assert_eq!(a.compose(&b).apply(x), a.apply(b.apply(x)));
    }

    #[test]
    fn cosets_are_classes(a in perm(4), s in perm(4)) {
        let f = samples::alternating4();
        let c = LambdaCoset::new(&a, &f);
        for t in f.elements() {
            prop_assert_eq!(LambdaCoset::new(&a.compose(t), &f), c.clone());
        }
        prop_assert_eq!(c.left_translate(&s, &f), LambdaCoset::new(&s.compose(&a), &f));
    }

    #[test]
    fn distance_is_a_metric(u in vertex(4), v in vertex(4), w in vertex(4)) {
        prop_assert_eq!(u.distance(&v), v.distance(&u));
        prop_assert!(u.distance(&w) <= u.distance(&v) + v.distance(&w));
        prop_assert_eq!(u.geodesic(&v).len(), u.distance(&v) + 1);
    }

    #[test]
    fn edges_carry_one_colour(v in vertex(3), c in 0u8..3) {
        let w = v.step(c);
        prop_assert_eq!(w.step(c), v.clone());
        prop_assert_eq!(Vertex::edge_colour(&v, &w), Some(c));
        prop_assert_eq!(Vertex::edge_colour(&w, &v), Some(c));
    }

    #[test]
    fn hulls_are_complete(vs in prop::collection::btree_set(vertex(3), 1..5)) {
        let hull = complete_hull(3, &vs);
        for v in &vs {
            prop_assert!(hull.contains(v));
        }
        for x in hull.internal() {
            prop_assert_eq!(hull.valency(x), 3);
        }
        for x in hull.leaves() {
            prop_assert!(hull.valency(x) <= 1);
        }
    }

    #[test]
    fn products_act_right_to_left(seed in any::<u64>(), which in 0usize..3) {
        let amb = &ambients()[which];
        let mut r = rng(seed);
        let g = samples::random_elem(&mut r, amb, 2, 1).unwrap();
        let h = samples::random_elem(&mut r, amb, 2, 1).unwrap();
        let gh = g.mul(&h);
        for _ in 0..6 {
            let v = common_vertex(&mut r, amb.degree());
            let (hv, sh) = h.eval_local(&v);
            let (ghv, sg) = g.eval_local(&hv);
            prop_assert_eq!(gh.eval_local(&v), (ghv, sg.compose(&sh)));
            prop_assert_eq!(g.eval_inv(&g.eval(&v)), v.clone());
            prop_assert_eq!(g.inv().eval_local(&g.eval(&v)).1, g.local_action(&v).inverse());
        }
    }

    #[test]
    fn singularities_are_exactly_the_non_f_locals(seed in any::<u64>()) {
        let amb = &ambients()[1];
        let mut r = rng(seed);
        let g = samples::random_elem(&mut r, amb, 3, 2).unwrap();
        let ball = bmscale::CompleteSubtree::ball(4, &Vertex::root(), 5);
        for v in ball.vertices() {
            let singular = !amb.f().contains(&g.local_action(v));
            prop_assert_eq!(singular, g.singularities().contains(v), "at {}", v);
        }
    }

    #[test]
    fn axis_is_translated(seed in any::<u64>(), which in 0usize..3, n in 1i64..4) {
        let amb = &ambients()[which];
        let g = samples::random_hyperbolic(&mut rng(seed), amb, 2, 1).unwrap();
        let l = g.length() as i64;
        for i in -3..4 {
            prop_assert_eq!(g.eval(&g.axis_vertex(i).unwrap()), g.axis_vertex(i + l).unwrap());
        }
        prop_assert_eq!(g.pow(n).length() as i64, n * l);
        prop_assert_eq!(g.inv().length() as i64, l);
    }

    #[test]
    fn elliptic_elements_have_scale_one(seed in any::<u64>(), which in 0usize..3) {
        let amb = &ambients()[which];
        let g = samples::random_elliptic(&mut rng(seed), amb, 2).unwrap();
        prop_assert_eq!(scale::scale(&g).unwrap(), BigUint::from(1u32));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn closed_form_matches_pando_formula(seed in any::<u64>(), which in 0usize..3) {
        let f = [samples::symmetric(3), samples::alternating4(), samples::dihedral4()][which].clone();
        let amb = samples::universal(f);
        let g = samples::random_hyperbolic(&mut rng(seed), &amb, 2, 0).unwrap();
        prop_assert_eq!(scale::scale_closed_form_uf(&g).unwrap(), scale::scale_with(&g, &Caps::generous()).unwrap());
    }

    #[test]
    fn scale_is_a_conjugacy_invariant(seed in any::<u64>()) {
        let amb = &ambients()[1];
        let mut r = rng(seed);
        let g = samples::random_hyperbolic(&mut r, amb, 2, 1).unwrap();
        let x = samples::random_elem(&mut r, amb, 1, 1).unwrap();
        let caps = Caps::generous();
        prop_assert_eq!(scale::scale_with(&g.conjugate_by(&x), &caps).unwrap(), scale::scale_with(&g, &caps).unwrap());
        prop_assert_eq!(scale::scale_with(&g.pow(2), &caps).unwrap(), scale::scale_with(&g, &caps).unwrap().pow(2));
    }

    #[test]
    fn lambda_laws(seed in any::<u64>()) {
        let amb = &ambients()[1];
        let mut r = rng(seed);
        let g = samples::random_hyperbolic(&mut r, amb, 2, 2).unwrap();
        let f = amb.f();
        for _ in 0..8 {
            let v = near_axis(&mut r, &g);
            let (lv, _) = directions::lambda(&g, &v).unwrap();
            prop_assert_eq!(lv.clone(), common::lambda_by_limit(&g, &v));
            let (gv, s) = g.eval_local(&v);
            prop_assert_eq!(directions::lambda(&g, &gv).unwrap().0, lv.left_translate(&s, f));
            prop_assert_eq!(directions::lambda(&g.pow(3), &v).unwrap().0, lv);
        }
    }

    #[test]
    fn powers_are_asymptotic(seed in any::<u64>(), k in 2i64..4) {
        let amb = &ambients()[1];
        let g = samples::random_hyperbolic(&mut rng(seed), amb, 2, 1).unwrap();
        let h = g.pow(k);
        let verdict = directions::asymptotic(&g, &h, directions::default_depth(&g, &h).unwrap()).unwrap();
        prop_assert!(verdict.is_equal(), "{}", verdict);
        let inverse = directions::asymptotic(&g, &g.inv(), directions::default_depth(&g, &h).unwrap()).unwrap();
        prop_assert!(inverse.is_not_equal(), "{}", inverse);
    }

    #[test]
    fn group_closure(gens in prop::collection::vec(perm(4), 1..3)) {
        let group = PermGroup::enumerate(4, &gens).unwrap();
        prop_assert_eq!(24 % group.order(), 0);
        for a in group.elements() {
            prop_assert!(group.contains(&a.inverse()));
            for b in group.elements() {
                prop_assert!(group.contains(&a.compose(b)));
            }
        }
        let fhat = group.young_subgroup().unwrap();
        prop_assert!(group.is_subgroup_of(&fhat));
        prop_assert_eq!(fhat.orbits(), group.orbits());
    }
}

fn common_vertex(r: &mut ChaCha8Rng, d: usize) -> Vertex {
    let mut v = Vertex::root();
    for _ in 0..r.gen_range(0..5) {
        let c = r.gen_range(0..d as u8);
        if v.last() != Some(c) {
            v = v.step(c);
        }
    }
    v
}

fn near_axis(r: &mut ChaCha8Rng, g: &Elem) -> Vertex {
    let (lo, hi) = g.sing_window().unwrap().unwrap_or((0, 0));
    let mut v = g.axis_vertex(r.gen_range(lo - 2..=hi + 2 * g.length() as i64)).unwrap();
    for _ in 0..r.gen_range(0..3) {
        let c = r.gen_range(0..g.degree() as u8);
        if v.last() != Some(c) {
            v = v.step(c);
        }
    }
    v
}
