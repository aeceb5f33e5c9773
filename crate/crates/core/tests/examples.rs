use bkp_core::diffalg::{derive, poly_add, poly_mul, tau_poly, Axis, DiffPoly, Gen, RelationTable};
use bkp_core::hierarchy::{
    build_l, build_relation_table, compute_a, compute_b, decompose_commutator, direct_w_relations, reduce_mod_h,
    symmetric_extract, FlowKind, Hierarchy, SchrodingerOp,
};
use bkp_core::parse::{parse_op, parse_poly};
use bkp_core::psido::PsiDO;
use bkp_core::scalar::Scalar;
use bkp_core::verify::{self, Status, Suite};
use bkp_core::Error;

const D1: Axis = Axis::D1;
const D2: Axis = Axis::D2;

fn p(s: &str, t: &RelationTable) -> DiffPoly {
    parse_poly(s, t).unwrap()
}

fn op(s: &str, main: Axis, floor: Option<i32>, t: &RelationTable) -> PsiDO {
    parse_op(s, main, floor, t).unwrap()
}

#[test]
fn poly_arithmetic() {
    let t = RelationTable::empty();
    assert_eq!(poly_add(&DiffPoly::u(), &DiffPoly::zero()), DiffPoly::u());
    assert_eq!(poly_add(&DiffPoly::v(0), &DiffPoly::v(0)), p("2*v0", &t));
    assert!(poly_add(&p("d1(u)*v0", &t), &p("-d1(u)*v0", &t)).is_zero());
    assert_eq!(poly_mul(&DiffPoly::u(), &DiffPoly::one()), DiffPoly::u());
    assert_eq!(poly_mul(&DiffPoly::v(0), &DiffPoly::v(0)), p("v0^2", &t));
    assert_eq!(poly_mul(&p("u + v0", &t), &p("u - v0", &t)), p("u^2 - v0^2", &t));
}

#[test]
fn derivations_and_involution() {
    let t = build_relation_table(1).unwrap();
    assert_eq!(derive(&DiffPoly::v(0), D2, &t).unwrap(), p("d1(u)", &t));
    assert_eq!(derive(&DiffPoly::u(), D1, &t).unwrap(), p("d1(u)", &t));
    assert_eq!(tau_poly(&DiffPoly::v(0)), DiffPoly::w(0));
    assert_eq!(tau_poly(&p("d1^2 d2(u)", &t)), p("d1 d2^2(u)", &t));
    assert_eq!(tau_poly(&p("i*u", &t)), p("-i*u", &t));
}

#[test]
fn relation_table() {
    let t0 = build_relation_table(0).unwrap();
    assert_eq!(*t0.dv()[0], p("d1(u)", &t0));
    assert_eq!(*t0.dw()[0], p("d2(u)", &t0));

    // sign as forced by the defining relation; the opposite sign is refuted below
    let t1 = build_relation_table(1).unwrap();
    assert_eq!(*t1.dv()[1], p("u*d1(v0) - d1(u)*v0", &t1));
    assert_eq!(*t1.dw()[1], p("u*d2(w0) - d2(u)*w0", &t1));

    let t2 = build_relation_table(2).unwrap();
    let dv2 = p("u*d1(v1) - 3*v1*d1(u) - d1(u)*d1^2(v0) + d1^2(u)*d1(v0)", &t2);
    assert_eq!(*t2.dv()[2], dv2);
}

#[test]
fn w_side_agrees_with_direct_computation() {
    let t = build_relation_table(3).unwrap();
    let direct = direct_w_relations(3).unwrap();
    let via_tau: Vec<DiffPoly> = t.dw().iter().map(|a| (**a).clone()).collect();
    assert_eq!(direct, via_tau);
}

fn relation_residual(table: &RelationTable, depth: u32) -> PsiDO {
    let floor = -(2 * depth as i32 + 2);
    let l = build_l(D1, depth).op;
    let inv_u = PsiDO::d_main(D1, -1).mul_to(&PsiDO::coeff(D1, DiffPoly::u()), floor - 2, table).unwrap();
    let m = PsiDO::d_aux(D1, 1).try_add(&inv_u).unwrap();
    let lm = l.mul_to(&m, floor, table).unwrap();
    lm.try_sub(&m.mul_to(&l, floor, table).unwrap()).unwrap()
}

#[test]
fn defining_relation_fixes_the_sign() {
    let ours = build_relation_table(1).unwrap();
    assert!(relation_residual(&ours, 1).is_zero());

    let e = RelationTable::empty();
    let flipped = RelationTable::from_v_side(vec![p("d1(u)", &e), p("d1(u)*v0 - u*d1(v0)", &e)]);
    let r = relation_residual(&flipped, 1);
    assert_eq!(r.coeff_at(-3, 0).unwrap(), p("2*u*d1(v0) - 2*d1(u)*v0", &e));

    for k in 2..=4 {
        let t = build_relation_table(k).unwrap();
        assert!(relation_residual(&t, k).is_zero(), "K={k}");
    }
}

#[test]
fn operator_sums() {
    let t = RelationTable::empty();
    let d = PsiDO::d_main(D1, 1);
    assert_eq!(d.try_add(&PsiDO::zero(D1, None)).unwrap(), d);
    let z = d.truncate(-3).try_sub(&d).unwrap();
    assert!(z.is_zero());
    assert_eq!(z.precision(), Some(-3));
    let a = op("u*d1^-1", D1, Some(-3), &t);
    let b = op("v0*d1^-2", D1, Some(-2), &t);
    let s = a.try_add(&b).unwrap();
    assert_eq!(s.precision(), Some(-2));
    assert_eq!(s.coeff_at(-1, 0).unwrap(), DiffPoly::u());
    assert_eq!(s.coeff_at(-2, 0).unwrap(), DiffPoly::v(0));
}

#[test]
fn operator_products() {
    let t = build_relation_table(1).unwrap();
    let inv = PsiDO::d_main(D1, -1).mul_to(&PsiDO::coeff(D1, DiffPoly::u()), -3, &t).unwrap();
    assert_eq!(inv, op("u*d1^-1 - d1(u)*d1^-2 + d1^2(u)*d1^-3 + O(d1^-4)", D1, None, &t));
    let d1 = PsiDO::d_main(D1, 1);
    let d2 = PsiDO::d_aux(D1, 1);
    assert!(d1.commutator(&d2, &t).unwrap().is_zero());
    let lhs = PsiDO::d_aux(D1, 1).mul(&PsiDO::coeff(D1, DiffPoly::v(0)), &t).unwrap();
    assert_eq!(lhs, op("v0*d2 + d1(u)", D1, None, &t));
}

#[test]
fn adjoints() {
    let t = RelationTable::empty();
    assert_eq!(PsiDO::d_main(D1, 1).adjoint(&t).unwrap(), op("-d1", D1, None, &t));
    assert_eq!(PsiDO::coeff(D1, DiffPoly::u()).adjoint(&t).unwrap(), PsiDO::coeff(D1, DiffPoly::u()));
    let x = op("d1^-1*u", D1, Some(-5), &t);
    assert_eq!(x.adjoint(&t).unwrap(), op("-u*d1^-1", D1, Some(-5), &t));
}

#[test]
fn parts_and_application() {
    let h = Hierarchy::new(2).unwrap();
    let t = h.table();
    let x = op("d1 + u*d1^-1", D1, Some(-4), t);
    let (plus, minus) = x.split_parts();
    assert_eq!(plus, PsiDO::d_main(D1, 1));
    assert_eq!(minus, op("u*d1^-1", D1, Some(-4), t));
    let (plus, minus) = PsiDO::coeff(D1, DiffPoly::u()).split_parts();
    assert_eq!(plus, PsiDO::coeff(D1, DiffPoly::u()));
    assert!(minus.is_zero());

    assert_eq!(PsiDO::d_main(D1, 1).apply(&DiffPoly::u(), t).unwrap(), p("d1(u)", t));
    let a21 = h.a_op(D2, 1).unwrap();
    assert_eq!(a21.apply(&DiffPoly::u(), t).unwrap(), p("d2^3(u) + 3*w0*d2(u)", t));
    let a11 = h.a_op(D1, 1).unwrap();
    let du = -a11.adjoint(t).unwrap().apply(&DiffPoly::u(), t).unwrap();
    assert_eq!(du, p("d1^3(u) + 3*d1(v0*u)", t));
}

#[test]
fn tau_on_operators() {
    let h = Hierarchy::new(2).unwrap();
    assert_eq!(PsiDO::d_main(D1, 1).tau(), PsiDO::d_main(D2, 1));
    assert_eq!(h.a_op(D1, 1).unwrap().tau(), *h.a_op(D2, 1).unwrap());
    assert_eq!(h.h(D1).tau(), h.h(D2));
}

#[test]
fn coefficients() {
    let t = RelationTable::empty();
    assert_eq!(op("d1^2*d2", D1, None, &t).coeff_at(2, 1).unwrap(), DiffPoly::one());
    let x = op("u*d1^-1", D1, Some(-1), &t);
    assert!(matches!(x.coeff_at(-2, 0), Err(Error::InsufficientPrecision { .. })));
    let a12 = compute_a(D1, 2, 1).unwrap();
    assert_eq!(a12.coeff_at(1, 0).unwrap(), p("5*d1^2(v0) + 5*v1 + 10*v0^2", &t));
}

#[test]
fn lax_and_a_operators() {
    let t = RelationTable::empty();
    let l = build_l(D1, 0);
    assert_eq!(l.op.truncate(-1), op("d1 + v0*d1^-1", D1, Some(-1), &t));
    assert_eq!(compute_a(D1, 0, 0).unwrap(), PsiDO::d_main(D1, 1));
    assert_eq!(compute_a(D2, 1, 1).unwrap(), op("d2^3 + 3*w0*d2", D2, None, &t));
    let a12 = op("d1^5 + 5*v0*d1^3 + 5*d1(v0)*d1^2 + (5*d1^2(v0) + 5*v1 + 10*v0^2)*d1", D1, None, &t);
    assert_eq!(compute_a(D1, 2, 2).unwrap(), a12);
}

#[test]
fn division_by_h() {
    let t = build_relation_table(2).unwrap();
    let u = DiffPoly::u();
    let x = op("u*d1^-1 + d1^2", D1, Some(-4), &t);
    let (r, q) = reduce_mod_h(&x, &u, &t).unwrap();
    assert_eq!(r, x);
    assert!(q.is_zero());

    let d2 = PsiDO::d_aux(D1, 1).truncate(-6);
    let (r, q) = reduce_mod_h(&d2, &u, &t).unwrap();
    assert_eq!(r, op("-d1^-1*u", D1, Some(-6), &t));
    assert_eq!(q.truncate(-5), op("d1^-1", D1, Some(-5), &t));
    // oracle: ∂2 = −∂1^{-1}u + ∂1^{-1}ℋ
    let inv = PsiDO::d_main(D1, -1);
    let back = inv.mul_to(&SchrodingerOp::standard().op(D1), -6, &t).unwrap().try_add(&r).unwrap();
    assert_eq!(back, d2);
}

#[test]
fn b_operators() {
    let depth = 2;
    let f = -(2 * depth as i32 + 2);
    let t = build_relation_table(depth).unwrap();
    assert_eq!(compute_b(D2, 0, depth).unwrap(), op("-d2^-1*u", D2, Some(f), &t));
    assert_eq!(compute_b(D1, 0, depth).unwrap(), op("-d1^-1*u", D1, Some(f), &t));
    let b11 = op(
        "-d1^-1*(d2^2(u)+3*u*w0) + d1^-1*u*d1^-1*d2(u) - d1^-1*d2(u)*d1^-1*u - d1^-1*u*d1^-1*u*d1^-1*u",
        D1,
        Some(f),
        &t,
    );
    assert_eq!(compute_b(D1, 1, depth).unwrap(), b11);
    let a21 = compute_a(D2, 1, depth).unwrap().reorient().unwrap().truncate(f);
    assert_eq!(reduce_mod_h(&a21, &DiffPoly::u(), &t).unwrap().0, b11);
}

#[test]
fn symmetric_extraction() {
    let t = RelationTable::empty();
    let x = PsiDO::coeff(D1, DiffPoly::v(0)).truncate(-1);
    assert_eq!(symmetric_extract(&x, 0, &t).unwrap(), vec![DiffPoly::v(0)]);
    let z = PsiDO::zero(D1, Some(-7));
    assert_eq!(symmetric_extract(&z, 3, &t).unwrap(), vec![DiffPoly::zero(); 4]);

    let l = build_l(D1, 1).op;
    let inv_u = PsiDO::d_main(D1, -1).mul_to(&PsiDO::coeff(D1, DiffPoly::u()), -6, &t).unwrap();
    let x = PsiDO::d_main(D1, 1).mul(&l.commutator(&inv_u, &t).unwrap(), &t).unwrap();
    let got = symmetric_extract(&x, 1, &t).unwrap();
    assert_eq!(got, vec![p("d1(u)", &t), p("u*d1(v0) - d1(u)*v0", &t)]);

    assert!(matches!(
        symmetric_extract(&PsiDO::d_main(D1, 1), 0, &t),
        Err(Error::Shape(_))
    ));
    assert!(matches!(
        symmetric_extract(&op("d1^-1", D1, Some(-3), &t), 1, &t),
        Err(Error::NotSelfAdjoint { exponent: -1 })
    ));
}

#[test]
fn flows() {
    let h = Hierarchy::new(3).unwrap();
    let t = h.table();
    let s1 = FlowKind::Side(D1);
    let s2 = FlowKind::Side(D2);
    assert_eq!(h.flow(s1, 1, Gen::U).unwrap(), p("d1^3(u) + 3*d1(v0*u)", t));
    assert_eq!(h.flow(s2, 1, Gen::V(0)).unwrap(), p("d2^3(v0) + 3*d1(w0*u)", t));
    for g in [Gen::U, Gen::V(0), Gen::W(0)] {
        assert_eq!(h.flow(s1, 0, g).unwrap(), derive(&g.into(), D1, t).unwrap());
    }

    let f11 = h.flow_value(s1, 1, 1, 1).unwrap();
    assert_eq!(f11.apply(&p("d1(u)", t), t).unwrap(), p("d1^4(u) + 3*d1^2(v0*u)", t));
    assert!(f11.apply(&DiffPoly::constant(Scalar::ratio(7, 2)), t).unwrap().is_zero());
    let f21 = h.flow_value(s2, 1, 1, 1).unwrap();
    assert_eq!(f21.apply(&p("v0^2", t), t).unwrap(), p("2*v0*(d2^3(v0) + 3*d1(w0*u))", t));

    assert_eq!(h.reduced_flow(1, Gen::U).unwrap(), p("d1^3(u) + d2^3(u) + 3*d1(v0*u) + 3*d2(w0*u)", t));
    let dv0 = p("d1^3(v0) + d2^3(v0) + 6*v0*d1(v0) + 3*d1(u*w0) + 3*d1(v1)", t);
    assert_eq!(h.reduced_flow(1, Gen::V(0)).unwrap(), dv0);
    assert_eq!(h.reduced_flow(0, Gen::U).unwrap(), p("d1(u) + d2(u)", t));
}

#[test]
fn decompositions() {
    let h = Hierarchy::new(3).unwrap();
    let t = h.table();
    let u = DiffPoly::u();
    let a = |i, n| h.a_op(i, n).unwrap().oriented(D1).unwrap();

    let c = a(D1, 0).commutator(&a(D2, 0), t).unwrap();
    assert!(decompose_commutator(&c, &u, t).unwrap().is_zero());

    let c = a(D1, 1).commutator(&a(D2, 0), t).unwrap();
    let dec = decompose_commutator(&c, &u, t).unwrap();
    assert_eq!(dec.p, PsiDO::coeff(D1, p("-3*d1(u)", t)));
    assert!(dec.q.is_zero() && dec.a.is_zero() && dec.r.is_zero());

    let c = a(D1, 1).commutator(&a(D2, 1), t).unwrap();
    let dec = decompose_commutator(&c, &u, t).unwrap();
    assert!(dec.a.is_zero());
    assert!(dec.r.is_skew_adjoint(t).unwrap());
    assert_eq!(dec.recompose(&u, t).unwrap(), c);
}

#[test]
fn verification_checks() {
    for (i, n) in [(D1, 0), (D2, 1), (D1, 2)] {
        assert_eq!(verify::check_lemma2(i, n, 3).status, Status::Pass);
        assert_eq!(verify::check_lemma3(i, n, 3).status, Status::Pass);
    }
    for (i, n) in [(D2, 0), (D1, 1), (D1, 0)] {
        assert_eq!(verify::check_lemma4(i, n, 3).status, Status::Pass);
    }
    for (i, n, j, m) in [(D1, 1, D1, 2), (D1, 1, D2, 0), (D1, 1, D2, 1)] {
        assert_eq!(verify::check_zero_curvature(i, n, j, m, 4).status, Status::Pass);
    }
    let cases: [(Axis, u32, Axis, u32, Gen); 3] =
        [(D1, 1, D2, 1, Gen::U), (D1, 0, D2, 1, Gen::V(0)), (D1, 1, D1, 2, Gen::V(0))];
    for (i, n, j, m, g) in cases {
        assert_eq!(verify::check_commutativity(i, n, j, m, &[g], 4).status, Status::Pass);
    }
    assert_eq!(verify::check_tau(1, 3).status, Status::Pass);
    for (i, k) in [(D1, 1), (D2, 1), (D1, 0)] {
        assert_eq!(verify::check_defrel(i, k).status, Status::Pass);
    }
    assert_eq!(verify::derive_nv(3).status, Status::Pass);
}

#[test]
fn suites() {
    let reports = verify::run_suite(Suite::Tau, 3, 0);
    assert_eq!(reports.len(), 3);
    assert_eq!(verify::overall(&reports), Status::Pass);
    let reports = verify::run_suite(Suite::Lemmas, 0, 0);
    assert_eq!(verify::overall(&reports), Status::InsufficientPrecision);
    assert!(reports.iter().all(|r| r.status != Status::Fail));
}
