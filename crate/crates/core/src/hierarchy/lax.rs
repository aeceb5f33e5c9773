use crate::diffalg::{Axis, DiffPoly, Gen, RelationTable};
use crate::error::Result;
use crate::psido::{sandwich, symmetric_extract, PsiDO};

/// `ℒ_i = ∂_i^{-1}(∂_i² + c_0 + ∂_i^{-1}c_1∂_i^{-1} + … + ∂_i^{-K}c_K∂_i^{-K})`, with
/// `c = v` for `i = 1` and `c = w` for `i = 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LOperator {
    pub which: Axis,
    pub depth: u32,
    pub op: PsiDO,
}

fn lax_coefficient(which: Axis, k: u32) -> DiffPoly {
    match which {
        Axis::D1 => DiffPoly::gen(Gen::V(k)),
        Axis::D2 => DiffPoly::gen(Gen::W(k)),
    }
}

/// Builds `ℒ_which` truncated after index `depth`; its precision floor is `-(2·depth + 2)`.
pub fn build_l(which: Axis, depth: u32) -> LOperator {
    // only derivatives along the main axis occur, which never need the relations
    let table = RelationTable::empty();
    let floor = -(2 * depth as i32 + 1);
    let mut inner = PsiDO::from_terms(
        which,
        [(2, 0, DiffPoly::one()), (0, 0, lax_coefficient(which, 0))],
        Some(floor),
    );
    for k in 1..=depth {
        let s = sandwich(which, k, &lax_coefficient(which, k), floor, &table)
            .expect("main-axis derivatives are canonical");
        inner = inner.try_add(&s).expect("same orientation");
    }
    let op = PsiDO::d_main(which, -1)
        .mul(&inner, &table)
        .expect("main-axis derivatives are canonical");
    LOperator { which, depth, op }
}

/// The Schrödinger operator `ℋ_a = ∂1∂2 + a`, expressed in the given orientation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchrodingerOp {
    pub potential: DiffPoly,
}

impl SchrodingerOp {
    pub fn new(potential: DiffPoly) -> Self {
        SchrodingerOp { potential }
    }

    /// `ℋ = ∂1∂2 + u`.
    pub fn standard() -> Self {
        Self::new(DiffPoly::u())
    }

    pub fn op(&self, main: Axis) -> PsiDO {
        PsiDO::from_terms(main, [(1, 1, DiffPoly::one()), (0, 0, self.potential.clone())], None)
    }
}

/// `X_i = ∂_i·[ℒ_i, ∂_i^{-1}u]`, the right-hand side of the defining relation multiplied by `∂_i`.
pub(crate) fn relation_operator(which: Axis, depth: u32) -> Result<PsiDO> {
    let table = RelationTable::empty();
    let l = build_l(which, depth).op;
    let floor = -(2 * depth as i32 + 4);
    let inv_u = PsiDO::d_main(which, -1).mul_to(&PsiDO::coeff(which, DiffPoly::u()), floor, &table)?;
    let c = l.commutator(&inv_u, &table)?;
    PsiDO::d_main(which, 1).mul(&c, &table)
}

/// Derives `∂2(v_0..v_K)` from `∂2(ℒ1) = [ℒ1, ∂1^{-1}u]` and sets `∂1(w_l) = τ(∂2(v_l))`.
pub fn build_relation_table(depth: u32) -> Result<RelationTable> {
    let x = relation_operator(Axis::D1, depth)?;
    let dv = symmetric_extract(&x, depth, &RelationTable::empty())?;
    Ok(RelationTable::from_v_side(dv))
}

/// `∂1(w_0..w_K)` computed directly from `∂1(ℒ2) = [ℒ2, ∂2^{-1}u]`, for cross-checking τ.
pub fn direct_w_relations(depth: u32) -> Result<Vec<DiffPoly>> {
    let x = relation_operator(Axis::D2, depth)?;
    symmetric_extract(&x, depth, &RelationTable::empty())
}
