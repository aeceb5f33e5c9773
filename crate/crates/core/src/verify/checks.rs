use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diffalg::{Axis, DiffPoly, Gen};
use crate::error::Result;
use crate::hierarchy::{decompose_commutator, FlowKind, Hierarchy};
use crate::parse::{parse_op, parse_poly};
use crate::psido::PsiDO;

use super::random::{self, Shape};
use super::Witness;

/// Result of one check body: pass/fail, a residual on failure, and a one-line note.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub ok: bool,
    pub witness: Option<Witness>,
    pub note: String,
}

impl Verdict {
    fn pass(note: impl Into<String>) -> Self {
        Verdict { ok: true, witness: None, note: note.into() }
    }

    fn fail(witness: Option<Witness>, note: impl Into<String>) -> Self {
        Verdict { ok: false, witness, note: note.into() }
    }

    fn zero_op(residual: PsiDO, what: &str) -> Self {
        if residual.is_zero() {
            Self::pass(format!("{what} = 0"))
        } else {
            Self::fail(Some(Witness::Op(residual)), format!("{what} ≠ 0"))
        }
    }

    fn zero_poly(residual: DiffPoly, what: &str) -> Self {
        if residual.is_zero() {
            Self::pass(format!("{what} = 0"))
        } else {
            Self::fail(Some(Witness::Poly(residual)), format!("{what} ≠ 0"))
        }
    }

    /// Combines verdicts; the first failure is kept.
    fn all(parts: Vec<Verdict>) -> Self {
        let notes: Vec<String> = parts.iter().map(|v| v.note.clone()).collect();
        match parts.into_iter().find(|v| !v.ok) {
            Some(f) => f,
            None => Self::pass(notes.join("; ")),
        }
    }
}

pub(super) fn lemma2(h: &Hierarchy, i: Axis, n: u32) -> Result<Verdict> {
    let a = h.a_op(i, n)?;
    let x = a.mul(&PsiDO::d_main(i, -1), h.table())?;
    if !x.is_differential() {
        return Ok(Verdict::fail(Some(Witness::Op(x.minus_part())), "A·∂^-1 has a negative part"));
    }
    let residual = x.try_sub(&x.adjoint(h.table())?)?;
    Ok(Verdict::zero_op(residual, "A∂^-1 − (A∂^-1)^*"))
}

pub(super) fn lemma3(h: &Hierarchy, i: Axis, n: u32) -> Result<Verdict> {
    let t = h.table();
    let a = h.a_op(i, n)?;
    let ham = h.h(i);
    let adj = a.adjoint(t)?;
    let au = adj.apply(&DiffPoly::u(), t)?;
    let residual = ham.mul(&a, t)?.try_add(&adj.mul(&ham, t)?)?.try_sub(&PsiDO::coeff(i, au))?;
    Ok(Verdict::zero_op(residual, "ℋA + A^*ℋ − A^*(u)"))
}

pub(super) fn lemma4(h: &Hierarchy, i: Axis, n: u32) -> Result<Verdict> {
    let t = h.table();
    let b = h.b_op(i, n)?;
    if b.max_main().is_some_and(|k| k >= 0) {
        return Ok(Verdict::fail(Some(Witness::Op(b.plus_part())), "B has nonnegative order"));
    }
    let x = PsiDO::d_main(i, 1).mul(&b, t)?;
    let residual = x.try_sub(&x.adjoint(t)?)?;
    let floor = residual.precision().unwrap_or(0);
    let mut v = Verdict::zero_op(residual, "∂B − (∂B)^*");
    v.note = format!("{} down to d{}^{floor}", v.note, i.index());
    Ok(v)
}

pub(super) fn zero_curvature(h: &Hierarchy, i: Axis, n: u32, j: Axis, m: u32) -> Result<Verdict> {
    let t = h.table();
    let ai = h.a_op(i, n)?;
    let aj = h.a_op(j, m)?;
    let fv_j = h.flow_value_for(FlowKind::Side(j), m, ai.terms().map(|(_, c)| c))?;
    let fv_i = h.flow_value_for(FlowKind::Side(i), n, aj.terms().map(|(_, c)| c))?;
    let dai = fv_j.apply_op(&ai, t)?;
    let daj = fv_i.apply_op(&aj, t)?.oriented(i)?;
    let comm = ai.commutator(&aj.oriented(i)?, t)?;
    let z = dai.try_sub(&daj)?.try_add(&comm)?;
    let u = DiffPoly::u();
    let dz = decompose_commutator(&z, &u, t)?;
    let dc = decompose_commutator(&comm, &u, t)?;
    if !dc.a.is_zero() {
        return Ok(Verdict::fail(Some(Witness::Poly(dc.a)), "order-zero part of [A,A] ≠ 0"));
    }
    if !(dz.p.is_zero() && dz.q.is_zero() && dz.a.is_zero()) {
        return Ok(Verdict::fail(Some(Witness::Op(z)), "zero-curvature residual is not a multiple of ℋ"));
    }
    if i == j {
        return Ok(Verdict::zero_op(dz.r, "R (same side)"));
    }
    let skew = dz.r.try_add(&dz.r.adjoint(t)?)?;
    if !skew.is_zero() {
        return Ok(Verdict::fail(Some(Witness::Op(skew)), "R + R^* ≠ 0"));
    }
    let note = if dz.r.is_zero() { "R = 0".to_string() } else { format!("R = {} is skew-adjoint", dz.r) };
    Ok(Verdict::pass(note))
}

pub(super) fn commutativity(h: &Hierarchy, i: Axis, n: u32, j: Axis, m: u32, gens: &[Gen]) -> Result<Verdict> {
    let t = h.table();
    let (ki, kj) = (FlowKind::Side(i), FlowKind::Side(j));
    let mut parts = Vec::new();
    for &g in gens {
        let fi = h.flow(ki, n, g)?;
        let fj = h.flow(kj, m, g)?;
        let di = h.flow_value_for(ki, n, [&fj])?;
        let dj = h.flow_value_for(kj, m, [&fi])?;
        let residual = &di.apply(&fj, t)? - &dj.apply(&fi, t)?;
        parts.push(Verdict::zero_poly(residual, &format!("[d/dt_{{{},{n}}}, d/dt_{{{},{m}}}]({g})", i.index(), j.index())));
    }
    Ok(Verdict::all(parts))
}

pub(super) fn tau(h: &Hierarchy, n: u32) -> Result<Verdict> {
    let (d1, d2) = (Axis::D1, Axis::D2);
    let mut parts = vec![
        Verdict::zero_op(h.a_op(d2, n)?.try_sub(&h.a_op(d1, n)?.tau())?, "A_2 − τ(A_1)"),
        Verdict::zero_op(h.b_op(d2, n)?.try_sub(&h.b_op(d1, n)?.tau())?, "B_2 − τ(B_1)"),
        Verdict::zero_op(h.lax(d2)?.op.try_sub(&h.lax(d1)?.op.tau())?, "ℒ2 − τ(ℒ1)"),
        Verdict::zero_op(h.h(d1).try_sub(&h.h(d2).tau())?, "ℋ − τ(ℋ)"),
    ];
    for g in [Gen::U, Gen::V(0), Gen::V(1), Gen::W(0), Gen::W(1)] {
        let reduced = &h.reduced_flow(n, g)?.tau() - &h.reduced_flow(n, g.tau())?;
        parts.push(Verdict::zero_poly(reduced, &format!("τ(d{g}/dt_{n}) − d{}/dt_{n}", g.tau())));
        let side = &h.flow(FlowKind::Side(d1), n, g)?.tau() - &h.flow(FlowKind::Side(d2), n, g.tau())?;
        parts.push(Verdict::zero_poly(side, &format!("τ(d{g}/dt_{{1,{n}}}) − d{}/dt_{{2,{n}}}", g.tau())));
    }
    Ok(Verdict::all(parts))
}

/// `[ℒ_i, ∂_ī + ∂_i^{-1}u]` down to `-(2K+2)`.
pub(super) fn defrel(h: &Hierarchy, i: Axis) -> Result<Verdict> {
    let t = h.table();
    let k = h.depth() as i32;
    let l = h.lax(i)?;
    let inv_u = PsiDO::d_main(i, -1).mul_to(&PsiDO::coeff(i, DiffPoly::u()), -(2 * k + 4), t)?;
    let m = PsiDO::d_aux(i, 1).try_add(&inv_u)?;
    let c = l.op.mul_to(&m, -(2 * k + 2), t)?.try_sub(&m.mul_to(&l.op, -(2 * k + 2), t)?)?;
    let floor = c.precision().unwrap_or(0);
    let mut v = Verdict::zero_op(c, "[ℒ, ∂_aux + ∂^-1 u]");
    v.note = format!("{} down to d{}^{floor}", v.note, i.index());
    Ok(v)
}

/// Reduced first flow against the reduced-hierarchy display, then the NV form with `v = 3v0`.
pub(super) fn nv(h: &Hierarchy) -> Result<Verdict> {
    let t = h.table();
    let du = h.reduced_flow(1, Gen::U)?;
    let dv0 = h.reduced_flow(1, Gen::V(0))?;
    let op = parse_op("d1^3 + d2^3 + 3*d1*v0 + 3*d2*w0", Axis::D1, None, t)?;
    let ag_u = op.apply(&DiffPoly::u(), t)?;
    let ag_v = parse_poly("d1^3(v0) + d2^3(v0) + 6*v0*d1(v0) + 3*d1(u*w0) + 3*d1(v1)", t)?;
    let nv_u = parse_poly("d1^3(u) + d2^3(u) + d1(u*(3*v0)) + d2(u*(3*w0))", t)?;
    let constraint = &t.derive(&parse_poly("3*v0", t)?, Axis::D2)? - &parse_poly("3*d1(u)", t)?;
    let conj = &h.reduced_flow(1, Gen::U)?.tau() - &du;
    Ok(Verdict::all(vec![
        Verdict::zero_poly(&du - &ag_u, "du/dt_1 − reduced display"),
        Verdict::zero_poly(&dv0 - &ag_v, "dv0/dt_1 − reduced display"),
        Verdict::zero_poly(&du - &nv_u, "du/dt_1 − NV right side"),
        Verdict::zero_poly(constraint, "∂2(v) − 3∂1(u)"),
        Verdict::zero_poly(conj, "τ(du/dt_1) − du/dt_1"),
    ]))
}

/// Seeded algebraic identities in `𝒜` and in the operator algebra.
pub(super) fn properties(h: &Hierarchy, seed: u64, cases: u32) -> Result<Verdict> {
    let t = h.table();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = Shape { index: h.depth().min(1), ..Shape::default() };
    let (d1, d2) = (Axis::D1, Axis::D2);
    for case in 0..cases {
        let p = random::poly(&mut rng, s);
        let q = random::poly(&mut rng, s);
        for axis in [d1, d2] {
            let lhs = t.derive(&(&p * &q), axis)?;
            let rhs = &(&t.derive(&p, axis)? * &q) + &(&p * &t.derive(&q, axis)?);
            if lhs != rhs {
                return Ok(Verdict::fail(Some(Witness::Poly(&lhs - &rhs)), format!("Leibniz, case {case}")));
            }
        }
        let mixed = &t.derive(&t.derive(&p, d1)?, d2)? - &t.derive(&t.derive(&p, d2)?, d1)?;
        if !mixed.is_zero() {
            return Ok(Verdict::fail(Some(Witness::Poly(mixed)), format!("∂1∂2 = ∂2∂1, case {case}")));
        }
        let checks = [
            (p.tau().tau() == p, "τ involutive"),
            ((&p * &q).tau() == &p.tau() * &q.tau(), "τ multiplicative"),
            (t.derive(&p, d1)?.tau() == t.derive(&p.tau(), d2)?, "τ∂1 = ∂2τ"),
        ];
        if let Some((_, name)) = checks.iter().find(|(ok, _)| !ok) {
            return Ok(Verdict::fail(Some(Witness::Poly(p)), format!("{name}, case {case}")));
        }
        let a = random::operator(&mut rng, d1, 1, -3, 1, s);
        let b = random::operator(&mut rng, d1, 1, -3, 1, s);
        let c = random::operator(&mut rng, d1, 1, -3, 0, s);
        let left = a.mul(&b, t)?.mul(&c, t)?;
        let right = a.mul(&b.mul(&c, t)?, t)?;
        let f = left.precision().max(right.precision()).unwrap_or(0);
        if left.truncate(f) != right.truncate(f) {
            return Ok(Verdict::fail(Some(Witness::Op(left.truncate(f).try_sub(&right.truncate(f))?)), format!("associativity, case {case}")));
        }
        let ab_adj = a.mul(&b, t)?.adjoint(t)?;
        let ba = b.adjoint(t)?.mul(&a.adjoint(t)?, t)?;
        let f = ab_adj.precision().max(ba.precision()).unwrap_or(0);
        if ab_adj.truncate(f) != ba.truncate(f) {
            return Ok(Verdict::fail(Some(Witness::Op(ab_adj.truncate(f).try_sub(&ba.truncate(f))?)), format!("(PQ)^* = Q^*P^*, case {case}")));
        }
        let deep_a = deepen(&a, &random::operator(&mut rng, d1, -4, -5, 1, s));
        let deep_b = deepen(&b, &random::operator(&mut rng, d1, -4, -5, 1, s));
        let shallow = a.mul(&b, t)?;
        let f = shallow.precision().unwrap_or(0);
        if deep_a.mul(&deep_b, t)?.truncate(f) != shallow {
            return Ok(Verdict::fail(Some(Witness::Op(shallow)), format!("precision soundness, case {case}")));
        }
        if a.adjoint(t)?.adjoint(t)? != a {
            return Ok(Verdict::fail(Some(Witness::Op(a)), format!("adjoint involutive, case {case}")));
        }
    }
    Ok(Verdict::pass(format!("{cases} cases")))
}

/// `p` with the terms of `tail` appended and the floor lowered to `tail`'s.
fn deepen(p: &PsiDO, tail: &PsiDO) -> PsiDO {
    let terms = p.terms().chain(tail.terms()).map(|(e, c)| (e.main, e.aux, c.clone()));
    PsiDO::from_terms(p.main(), terms.collect::<Vec<_>>(), tail.precision())
}
