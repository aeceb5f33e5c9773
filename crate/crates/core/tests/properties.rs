use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

use bkp_core::diffalg::{derive, poly_add, poly_mul, tau_poly, Axis, DiffPoly, Gen, Jet, Monomial, RelationTable};
use bkp_core::hierarchy::{
    build_relation_table, decompose_commutator, reduce_mod_h, symmetric_extract, FlowKind, Hierarchy,
    SchrodingerOp,
};
use bkp_core::psido::{sandwich, PsiDO};
use bkp_core::scalar::Scalar;

const DEPTH: u32 = 4;

fn config() -> Config {
    Config { cases: 200, rng_seed: RngSeed::Fixed(0x5eed), failure_persistence: None, ..Config::default() }
}

fn table() -> &'static RelationTable {
    static T: OnceLock<RelationTable> = OnceLock::new();
    T.get_or_init(|| build_relation_table(DEPTH).unwrap())
}

fn hierarchy() -> &'static Hierarchy {
    static H: OnceLock<Hierarchy> = OnceLock::new();
    H.get_or_init(|| Hierarchy::with_table(DEPTH, Arc::new(table().clone())))
}

fn scalar() -> impl Strategy<Value = Scalar> {
    prop_oneof![
        6 => (-3i64..=3).prop_map(Scalar::int),
        1 => ((-3i64..=3), (1i64..=3)).prop_map(|(a, b)| Scalar::ratio(a, b)),
        1 => ((-2i64..=2), (-2i64..=2)).prop_map(|(a, b)| Scalar::complex(a, b)),
    ]
}

fn jet() -> impl Strategy<Value = Jet> {
    prop_oneof![
        ((0u32..=2), (0u32..=2)).prop_map(|(a, b)| Jet::u(a, b)),
        ((0u32..=1), (0u32..=2)).prop_map(|(m, k)| Jet::v(m, k)),
        ((0u32..=1), (0u32..=2)).prop_map(|(l, k)| Jet::w(l, k)),
    ]
}

fn poly_sized(terms: usize, degree: usize) -> impl Strategy<Value = DiffPoly> {
    prop::collection::vec((scalar(), prop::collection::vec(jet(), 0..=degree)), 1..=terms).prop_map(|ts| {
        let mut p = DiffPoly::zero();
        for (c, js) in ts {
            p.add_term(Monomial::from_factors(js.into_iter().map(|j| (j, 1))), &c);
        }
        p
    })
}

fn poly() -> impl Strategy<Value = DiffPoly> {
    poly_sized(3, 2)
}

fn axis() -> impl Strategy<Value = Axis> {
    prop_oneof![Just(Axis::D1), Just(Axis::D2)]
}

/// Operators with main exponents in `[floor, top]`, aux degree `≤ aux`, precision `floor`.
fn operator(main: Axis, top: i32, floor: i32, aux: u32) -> impl Strategy<Value = PsiDO> {
    prop::collection::vec(((floor..=top), (0..=aux), poly_sized(2, 1)), 1..=3)
        .prop_map(move |ts| PsiDO::from_terms(main, ts, Some(floor)))
}

fn differential(main: Axis, top: i32, aux: u32) -> impl Strategy<Value = PsiDO> {
    prop::collection::vec(((0..=top), (0..=aux), poly_sized(2, 1)), 1..=3)
        .prop_map(move |ts| PsiDO::from_terms(main, ts, None))
}

fn agree(a: &PsiDO, b: &PsiDO) -> bool {
    let f = a.precision().max(b.precision()).unwrap_or(i32::MIN);
    a.truncate(f) == b.truncate(f)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn leibniz(p in poly(), q in poly(), a in axis()) {
        let t = table();
        let lhs = derive(&poly_mul(&p, &q), a, t).unwrap();
        let rhs = poly_add(&poly_mul(&derive(&p, a, t).unwrap(), &q), &poly_mul(&p, &derive(&q, a, t).unwrap()));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn derivations_commute(p in poly()) {
        let t = table();
        let d12 = derive(&derive(&p, Axis::D2, t).unwrap(), Axis::D1, t).unwrap();
        let d21 = derive(&derive(&p, Axis::D1, t).unwrap(), Axis::D2, t).unwrap();
        prop_assert_eq!(d12, d21);
    }

    #[test]
    fn tau_is_an_involutive_ring_map(p in poly(), q in poly()) {
        prop_assert_eq!(tau_poly(&tau_poly(&p)), p.clone());
        prop_assert_eq!(tau_poly(&poly_mul(&p, &q)), poly_mul(&tau_poly(&p), &tau_poly(&q)));
        prop_assert_eq!(tau_poly(&poly_add(&p, &q)), poly_add(&tau_poly(&p), &tau_poly(&q)));
    }

    #[test]
    fn tau_swaps_derivations(p in poly(), a in axis()) {
        let t = table();
        prop_assert_eq!(tau_poly(&derive(&p, a, t).unwrap()), derive(&tau_poly(&p), a.other(), t).unwrap());
    }

    #[test]
    fn only_constants_are_killed(p in poly(), a in axis()) {
        let t = table();
        let p = &p - &DiffPoly::constant(p.constant_term());
        prop_assume!(!p.is_zero());
        prop_assert!(!derive(&p, a, t).unwrap().is_zero());
    }

    #[test]
    fn distributive(p in poly(), q in poly(), r in poly()) {
        prop_assert_eq!(poly_mul(&p, &poly_add(&q, &r)), poly_add(&poly_mul(&p, &q), &poly_mul(&p, &r)));
    }

    #[test]
    fn associativity(
        p in operator(Axis::D1, 1, -3, 1),
        q in operator(Axis::D1, 1, -3, 1),
        r in operator(Axis::D1, 1, -3, 1),
    ) {
        let t = table();
        let lhs = p.mul(&q, t).unwrap().mul(&r, t).unwrap();
        let rhs = p.mul(&q.mul(&r, t).unwrap(), t).unwrap();
        prop_assert!(agree(&lhs, &rhs), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn adjoint_reverses_products(p in operator(Axis::D2, 1, -3, 1), q in operator(Axis::D2, 1, -3, 1)) {
        let t = table();
        let lhs = p.mul(&q, t).unwrap().adjoint(t).unwrap();
        let rhs = q.adjoint(t).unwrap().mul(&p.adjoint(t).unwrap(), t).unwrap();
        prop_assert!(agree(&lhs, &rhs), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn adjoint_is_involutive(p in operator(Axis::D1, 2, -3, 1)) {
        let t = table();
        let back = p.adjoint(t).unwrap().adjoint(t).unwrap();
        prop_assert!(agree(&back, &p));
    }

    #[test]
    fn precision_is_sound(
        p in operator(Axis::D1, 1, -2, 1),
        q in operator(Axis::D1, 1, -2, 1),
        tail_p in operator(Axis::D1, -3, -5, 1),
        tail_q in operator(Axis::D1, -3, -5, 1),
    ) {
        let t = table();
        let deepen = |x: &PsiDO, tail: &PsiDO| {
            PsiDO::from_terms(
                Axis::D1,
                x.terms().chain(tail.terms()).map(|(e, c)| (e.main, e.aux, c.clone())),
                tail.precision(),
            )
        };
        let shallow = p.mul(&q, t).unwrap();
        let deep = deepen(&p, &tail_p).mul(&deepen(&q, &tail_q), t).unwrap();
        let f = shallow.precision().unwrap();
        prop_assert_eq!(deep.truncate(f), shallow);
    }

    #[test]
    fn orders_add(p in differential(Axis::D1, 2, 2), q in differential(Axis::D1, 2, 2)) {
        prop_assume!(!p.is_zero() && !q.is_zero());
        let t = table();
        let pq = p.mul(&q, t).unwrap();
        prop_assert!(pq.is_differential());
        prop_assert_eq!(pq.diff_order(), Some(p.diff_order().unwrap() + q.diff_order().unwrap()));
    }

    #[test]
    fn application_composes(p in differential(Axis::D2, 2, 1), q in differential(Axis::D2, 1, 1), a in poly()) {
        let t = table();
        let lhs = p.mul(&q, t).unwrap().apply(&a, t).unwrap();
        let rhs = p.apply(&q.apply(&a, t).unwrap(), t).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn reorientation_is_transparent(p in differential(Axis::D1, 2, 2), a in poly()) {
        let t = table();
        let r = p.reorient().unwrap();
        prop_assert_eq!(r.apply(&a, t).unwrap(), p.apply(&a, t).unwrap());
        prop_assert_eq!(r.reorient().unwrap(), p);
    }

    #[test]
    fn tau_is_multiplicative_on_operators(p in operator(Axis::D1, 1, -3, 1), q in operator(Axis::D1, 1, -3, 1)) {
        let t = table();
        let lhs = p.mul(&q, t).unwrap().tau();
        let rhs = p.tau().mul(&q.tau(), t).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn parts_split_the_operator(p in operator(Axis::D1, 2, -3, 1)) {
        let (plus, minus) = p.split_parts();
        prop_assert!(plus.min_main().is_none_or(|m| m >= 0));
        prop_assert!(minus.max_main().is_none_or(|m| m < 0));
        prop_assert_eq!(plus.try_add(&minus).unwrap(), p);
    }

    #[test]
    fn division_by_h_recomposes(p in operator(Axis::D1, 2, -3, 3)) {
        let t = table();
        let (r, q) = reduce_mod_h(&p, &DiffPoly::u(), t).unwrap();
        prop_assert!(r.aux_degree().is_none_or(|a| a == 0));
        let h = SchrodingerOp::standard().op(Axis::D1);
        let back = r.try_add(&q.mul(&h, t).unwrap()).unwrap();
        prop_assert!(agree(&back, &p), "{} vs {}", back, p);
    }

    #[test]
    fn decomposition_recomposes(d in differential(Axis::D1, 3, 3)) {
        let t = table();
        let dec = decompose_commutator(&d, &DiffPoly::u(), t).unwrap();
        prop_assert_eq!(dec.recompose(&DiffPoly::u(), t).unwrap(), d);
    }

    #[test]
    fn symmetric_form_round_trips(s in prop::collection::vec(poly_sized(2, 2), 1..=3), a in axis()) {
        let t = table();
        let count = s.len() as u32 - 1;
        let floor = -2 * count as i32 - 1;
        let mut x = PsiDO::zero(a, Some(floor));
        for (m, sm) in s.iter().enumerate() {
            x = x.try_add(&sandwich(a, m as u32, sm, floor, t).unwrap()).unwrap();
        }
        prop_assert_eq!(symmetric_extract(&x, count, t).unwrap(), s);
    }

    #[test]
    fn flows_are_tau_equivariant(p in poly()) {
        let h = hierarchy();
        let t = h.table();
        let d1 = h.flow_value_for(FlowKind::Side(Axis::D1), 1, [&p, &tau_poly(&p)]).unwrap();
        let d2 = h.flow_value_for(FlowKind::Side(Axis::D2), 1, [&p, &tau_poly(&p)]).unwrap();
        prop_assert_eq!(tau_poly(&d1.apply(&p, t).unwrap()), d2.apply(&tau_poly(&p), t).unwrap());
    }

    #[test]
    fn flows_commute_with_derivations(p in poly(), a in axis(), side in axis()) {
        let h = hierarchy();
        let t = h.table();
        let dp = derive(&p, a, t).unwrap();
        let fv = h.flow_value_for(FlowKind::Side(side), 0, [&p, &dp]).unwrap();
        let lhs = fv.apply(&dp, t).unwrap();
        let rhs = derive(&fv.apply(&p, t).unwrap(), a, t).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

#[test]
fn generator_names_round_trip() {
    for g in [Gen::U, Gen::V(0), Gen::V(7), Gen::W(3)] {
        assert_eq!(Gen::parse(&g.name()), Some(g));
    }
}
