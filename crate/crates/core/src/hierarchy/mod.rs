//! The coupled hierarchy: Lax operators `ℒ1`, `ℒ2`, the Schrödinger operator `ℋ`,
//! the operators `A_{i,n}`, `B_{i,n}`, and the flows `d/dt_{i,n}` on the generators.
//!
//! [`Hierarchy`] owns a frozen relation table for one truncation depth `K` and
//! memoizes every operator it builds, so independent checks can share work and run
//! concurrently.

mod flows;
mod lax;
mod reduce;

use std::collections::HashMap;
use std::hash::Hash;
use std::sync::{Arc, Mutex, OnceLock};

pub use flows::{flow_derivation, FlowKind, FlowValue};
pub use lax::{build_l, build_relation_table, direct_w_relations, LOperator, SchrodingerOp};
pub use reduce::{decompose_commutator, reduce_mod_h, Decomposition};

pub use crate::psido::symmetric_extract;

use crate::diffalg::{Axis, DiffPoly, Gen, RelationTable};
use crate::error::{Error, Result};
use crate::psido::PsiDO;

type Slot<V> = Arc<OnceLock<Result<Arc<V>>>>;

/// Compute-once cache; each key is computed by a single caller, others wait for it.
struct Memo<K, V> {
    slots: Mutex<HashMap<K, Slot<V>>>,
}

impl<K: Eq + Hash + Clone, V> Memo<K, V> {
    fn new() -> Self {
        Memo { slots: Mutex::new(HashMap::new()) }
    }

    fn get(&self, key: K, compute: impl FnOnce() -> Result<V>) -> Result<Arc<V>> {
        let slot = {
            let mut slots = self.slots.lock().expect("memo poisoned");
            slots.entry(key).or_default().clone()
        };
        slot.get_or_init(|| compute().map(Arc::new)).clone()
    }
}

/// Symmetric-form coefficients of `∂_i·d(ℒ_i)/dt`, read down to the floor they are exact at.
struct Extraction {
    coeffs: Vec<DiffPoly>,
    floor: i32,
}

/// All hierarchy data at one truncation depth `K`.
pub struct Hierarchy {
    depth: u32,
    table: Arc<RelationTable>,
    lax: Memo<Axis, LOperator>,
    powers: Memo<(Axis, u32), PsiDO>,
    a_ops: Memo<(Axis, u32), PsiDO>,
    b_ops: Memo<(Axis, u32), (PsiDO, PsiDO)>,
    extractions: Memo<(Axis, Axis, u32), Extraction>,
}

impl Hierarchy {
    /// Builds the relation table at depth `K` and an empty cache.
    pub fn new(depth: u32) -> Result<Self> {
        Ok(Self::with_table(depth, Arc::new(build_relation_table(depth)?)))
    }

    pub fn with_table(depth: u32, table: Arc<RelationTable>) -> Self {
        Hierarchy {
            depth,
            table,
            lax: Memo::new(),
            powers: Memo::new(),
            a_ops: Memo::new(),
            b_ops: Memo::new(),
            extractions: Memo::new(),
        }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn table(&self) -> &RelationTable {
        &self.table
    }

    pub fn shared_table(&self) -> Arc<RelationTable> {
        self.table.clone()
    }

    /// `ℋ = ∂1∂2 + u` in the given orientation.
    pub fn h(&self, main: Axis) -> PsiDO {
        SchrodingerOp::standard().op(main)
    }

    /// Precision floor used for the `B_{i,n}` series: the same as `ℒ_i`.
    pub fn b_floor(&self) -> i32 {
        -(2 * self.depth as i32 + 2)
    }

    pub fn lax(&self, which: Axis) -> Result<Arc<LOperator>> {
        self.lax.get(which, || Ok(build_l(which, self.depth)))
    }

    /// `ℒ_i^{2n+1}`, by iterated left multiplication.
    pub fn odd_power(&self, which: Axis, n: u32) -> Result<Arc<PsiDO>> {
        self.powers.get((which, n), || {
            let l = self.lax(which)?;
            if n == 0 {
                return Ok(l.op.clone());
            }
            let prev = self.odd_power(which, n - 1)?;
            let sq = l.op.mul(&prev, &self.table)?;
            l.op.mul(&sq, &self.table)
        })
    }

    /// `A_{i,n} = (ℒ_i^{2n+1})_+`.
    pub fn a_op(&self, which: Axis, n: u32) -> Result<Arc<PsiDO>> {
        self.a_ops.get((which, n), || {
            let p = self.odd_power(which, n)?;
            if let Some(f) = p.precision().filter(|&f| f > 0) {
                return Err(Error::InsufficientPrecision { needed: 0, floor: f });
            }
            Ok(p.plus_part())
        })
    }

    /// `(B_{i,n}, C_{i,n})` with `A_{ī,n} = B_{i,n} + C_{i,n}ℋ`, both with main derivation `∂_i`.
    pub fn b_and_c(&self, which: Axis, n: u32) -> Result<Arc<(PsiDO, PsiDO)>> {
        self.b_ops.get((which, n), || {
            let a = self.a_op(which.other(), n)?;
            let p = a.reorient()?.truncate(self.b_floor());
            let (r, q) = reduce_mod_h(&p, &DiffPoly::u(), &self.table)?;
            if r.aux_degree().is_some_and(|d| d > 0) {
                return Err(Error::Shape("reduction left auxiliary powers".into()));
            }
            Ok((r, q))
        })
    }

    pub fn b_op(&self, which: Axis, n: u32) -> Result<PsiDO> {
        Ok(self.b_and_c(which, n)?.0.clone())
    }

    /// `∂_i·[Z, ℒ_i]` where `Z = A_{i,n}` for the own-side flow and `Z = B_{i,n}` otherwise.
    pub fn lax_velocity(&self, flow: Axis, of: Axis, n: u32) -> Result<PsiDO> {
        let l = self.lax(of)?;
        let z = if flow == of { (*self.a_op(of, n)?).clone() } else { self.b_op(of, n)? };
        let c = z.commutator(&l.op, &self.table)?;
        PsiDO::d_main(of, 1).mul(&c, &self.table)
    }

    fn extraction(&self, flow: Axis, of: Axis, n: u32) -> Result<Arc<Extraction>> {
        self.extractions.get((flow, of, n), || {
            let x = self.lax_velocity(flow, of, n)?;
            let floor = x.precision().expect("ℒ is truncated");
            let count = (-floor).max(0) as u32 / 2;
            let coeffs = symmetric_extract(&x, count, &self.table)?;
            Ok(Extraction { coeffs, floor })
        })
    }

    /// `d g / dt_{i,n}` for a generator `g`.
    pub fn flow(&self, kind: FlowKind, n: u32, g: Gen) -> Result<DiffPoly> {
        let side = match kind {
            FlowKind::Reduced => {
                let a = self.flow(FlowKind::Side(Axis::D1), n, g)?;
                return Ok(&a + &self.flow(FlowKind::Side(Axis::D2), n, g)?);
            }
            FlowKind::Side(s) => s,
        };
        let (of, idx) = match g {
            Gen::U => {
                let a = self.a_op(side, n)?;
                let adj = a.adjoint(&self.table)?;
                return Ok(-adj.apply(&DiffPoly::u(), &self.table)?);
            }
            Gen::V(m) => (Axis::D1, m),
            Gen::W(l) => (Axis::D2, l),
        };
        let ext = self.extraction(side, of, n)?;
        ext.coeffs.get(idx as usize).cloned().ok_or(Error::InsufficientPrecision {
            needed: -2 * idx as i32,
            floor: ext.floor,
        })
    }

    /// The flow on `u`, `v_0..v_{max_v}` and `w_0..w_{max_w}`.
    pub fn flow_value(&self, kind: FlowKind, n: u32, max_v: u32, max_w: u32) -> Result<FlowValue> {
        let mut fv = FlowValue::new(kind, n);
        let gens = std::iter::once(Gen::U)
            .chain((0..=max_v).map(Gen::V))
            .chain((0..=max_w).map(Gen::W));
        for g in gens {
            fv.values.insert(g, self.flow(kind, n, g)?);
        }
        Ok(fv)
    }

    /// A flow value covering every generator that occurs in `polys`.
    pub fn flow_value_for<'a>(
        &self,
        kind: FlowKind,
        n: u32,
        polys: impl IntoIterator<Item = &'a DiffPoly>,
    ) -> Result<FlowValue> {
        let mut fv = FlowValue::new(kind, n);
        fv.values.insert(Gen::U, self.flow(kind, n, Gen::U)?);
        for p in polys {
            for g in p.generators() {
                if let std::collections::btree_map::Entry::Vacant(e) = fv.values.entry(g) {
                    e.insert(self.flow(kind, n, g)?);
                }
            }
        }
        Ok(fv)
    }

    /// `d/dt_n = d/dt_{1,n} + d/dt_{2,n}` on a generator.
    pub fn reduced_flow(&self, n: u32, g: Gen) -> Result<DiffPoly> {
        self.flow(FlowKind::Reduced, n, g)
    }
}

/// `A_{i,n}` from `ℒ_i` truncated at depth `K`.
pub fn compute_a(which: Axis, n: u32, depth: u32) -> Result<PsiDO> {
    let h = Hierarchy::with_table(depth, Arc::new(RelationTable::empty()));
    Ok((*h.a_op(which, n)?).clone())
}

/// `B_{i,n}` at precision `-(2K+2)`.
pub fn compute_b(which: Axis, n: u32, depth: u32) -> Result<PsiDO> {
    Hierarchy::new(depth)?.b_op(which, n)
}

pub fn flow_on_generator(which: Axis, n: u32, g: Gen, depth: u32) -> Result<DiffPoly> {
    Hierarchy::new(depth)?.flow(FlowKind::Side(which), n, g)
}

pub fn reduced_flow(n: u32, g: Gen, depth: u32) -> Result<DiffPoly> {
    Hierarchy::new(depth)?.reduced_flow(n, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_op, parse_poly};

    fn poly(h: &Hierarchy, s: &str) -> DiffPoly {
        parse_poly(s, h.table()).unwrap()
    }

    #[test]
    fn a_operators() {
        let h = Hierarchy::new(3).unwrap();
        let t = h.table();
        assert_eq!(*h.a_op(Axis::D1, 0).unwrap(), PsiDO::d_main(Axis::D1, 1));
        let a21 = parse_op("d2^3 + 3*w0*d2", Axis::D2, None, t).unwrap();
        assert_eq!(*h.a_op(Axis::D2, 1).unwrap(), a21);
        let a12 = parse_op(
            "d1^5 + 5*v0*d1^3 + 5*d1(v0)*d1^2 + (5*d1^2(v0) + 5*v1 + 10*v0^2)*d1",
            Axis::D1,
            None,
            t,
        )
        .unwrap();
        assert_eq!(*h.a_op(Axis::D1, 2).unwrap(), a12);
        assert_eq!(h.a_op(Axis::D1, 2).unwrap().coeff_at(1, 0).unwrap(), poly(&h, "5*d1^2(v0)+5*v1+10*v0^2"));
    }

    #[test]
    fn a_needs_depth() {
        let h = Hierarchy::new(0).unwrap();
        assert!(h.a_op(Axis::D1, 1).is_ok());
        assert!(matches!(h.a_op(Axis::D1, 2), Err(Error::InsufficientPrecision { .. })));
    }

    #[test]
    fn b_operators() {
        let h = Hierarchy::new(2).unwrap();
        let t = h.table();
        let f = h.b_floor();
        let b20 = parse_op("-d2^-1*u", Axis::D2, Some(f), t).unwrap();
        assert_eq!(h.b_op(Axis::D2, 0).unwrap(), b20);
        let b10 = parse_op("-d1^-1*u", Axis::D1, Some(f), t).unwrap();
        assert_eq!(h.b_op(Axis::D1, 0).unwrap(), b10);
        let b11 = parse_op(
            "-d1^-1*(d2^2(u)+3*u*w0) + d1^-1*u*d1^-1*d2(u) - d1^-1*d2(u)*d1^-1*u - d1^-1*u*d1^-1*u*d1^-1*u",
            Axis::D1,
            Some(f),
            t,
        )
        .unwrap();
        assert_eq!(h.b_op(Axis::D1, 1).unwrap(), b11);
        assert_eq!(h.b_op(Axis::D2, 1).unwrap(), b11.tau());
    }

    #[test]
    fn reduction_recomposes() {
        let h = Hierarchy::new(2).unwrap();
        let (b, c) = &*h.b_and_c(Axis::D1, 1).unwrap();
        let a = h.a_op(Axis::D2, 1).unwrap().reorient().unwrap();
        let back = b.try_add(&c.mul(&h.h(Axis::D1), h.table()).unwrap()).unwrap();
        let f = back.precision().unwrap();
        assert_eq!(back, a.truncate(f));
    }

    #[test]
    fn displayed_flows() {
        let h = Hierarchy::new(3).unwrap();
        let s1 = FlowKind::Side(Axis::D1);
        let s2 = FlowKind::Side(Axis::D2);
        let cases = [
            (s1, Gen::U, "d1^3(u) + 3*d1(v0*u)"),
            (s2, Gen::U, "d2^3(u) + 3*d2(w0*u)"),
            (s1, Gen::V(0), "d1^3(v0) + 6*v0*d1(v0) + 3*d1(v1)"),
            (s2, Gen::V(0), "d2^3(v0) + 3*d1(w0*u)"),
            (s1, Gen::W(0), "d1^3(w0) + 3*d2(v0*u)"),
            (s2, Gen::W(0), "d2^3(w0) + 6*w0*d2(w0) + 3*d2(w1)"),
        ];
        for (kind, g, want) in cases {
            assert_eq!(h.flow(kind, 1, g).unwrap(), poly(&h, want), "{} on {g}", kind.label());
        }
    }

    #[test]
    fn level_zero_flows_are_derivations() {
        let h = Hierarchy::new(2).unwrap();
        for axis in [Axis::D1, Axis::D2] {
            for g in [Gen::U, Gen::V(0), Gen::V(1), Gen::W(0), Gen::W(1)] {
                let want = h.table().derive(&DiffPoly::gen(g), axis).unwrap();
                assert_eq!(h.flow(FlowKind::Side(axis), 0, g).unwrap(), want);
            }
        }
    }

    #[test]
    fn reduced_flows() {
        let h = Hierarchy::new(3).unwrap();
        assert_eq!(
            h.reduced_flow(1, Gen::U).unwrap(),
            poly(&h, "d1^3(u) + d2^3(u) + 3*d1(v0*u) + 3*d2(w0*u)")
        );
        assert_eq!(
            h.reduced_flow(1, Gen::V(0)).unwrap(),
            poly(&h, "d1^3(v0) + d2^3(v0) + 6*v0*d1(v0) + 3*d1(u*w0) + 3*d1(v1)")
        );
        assert_eq!(h.reduced_flow(0, Gen::U).unwrap(), poly(&h, "d1(u) + d2(u)"));
    }

    #[test]
    fn flow_depth_limits() {
        let h = Hierarchy::new(2).unwrap();
        assert!(h.flow(FlowKind::Side(Axis::D1), 2, Gen::V(0)).is_ok());
        assert!(matches!(
            h.flow(FlowKind::Side(Axis::D1), 2, Gen::V(1)),
            Err(Error::InsufficientPrecision { .. })
        ));
    }

    #[test]
    fn extension_to_jets() {
        let h = Hierarchy::new(3).unwrap();
        let fv = h.flow_value(FlowKind::Side(Axis::D1), 1, 1, 1).unwrap();
        let du = flow_derivation(&fv, &poly(&h, "d1(u)"), h.table()).unwrap();
        assert_eq!(du, poly(&h, "d1^4(u) + 3*d1^2(v0*u)"));
        assert!(flow_derivation(&fv, &DiffPoly::int(7), h.table()).unwrap().is_zero());
        let fv2 = h.flow_value(FlowKind::Side(Axis::D2), 1, 1, 1).unwrap();
        let sq = flow_derivation(&fv2, &poly(&h, "v0^2"), h.table()).unwrap();
        assert_eq!(sq, poly(&h, "2*v0*(d2^3(v0) + 3*d1(w0*u))"));
    }

    #[test]
    fn concurrent_access_shares_results() {
        let h = Hierarchy::new(2).unwrap();
        let outs: Vec<_> = std::thread::scope(|s| {
            let hs: Vec<_> = (0..4).map(|_| s.spawn(|| h.a_op(Axis::D1, 1).unwrap())).collect();
            hs.into_iter().map(|j| j.join().unwrap()).collect()
        });
        assert!(outs.windows(2).all(|w| Arc::ptr_eq(&w[0], &w[1])));
    }
}
