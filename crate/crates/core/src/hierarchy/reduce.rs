use crate::diffalg::{Axis, DiffPoly, RelationTable};
use crate::error::Result;
use crate::psido::PsiDO;

use super::lax::SchrodingerOp;

/// Division by `ℋ_a` on the right: returns `(r, Q)` with `P = r + Q·ℋ_a` and `r` free of
/// the auxiliary derivation.
///
/// The top auxiliary degree `N` is peeled off repeatedly: `Q += P_N ∂_aux^{N-1} ∂_main^{-1}`.
/// Set the precision of `p` (see [`PsiDO::truncate`]) to control how deep `r` is computed.
pub fn reduce_mod_h(p: &PsiDO, potential: &DiffPoly, table: &RelationTable) -> Result<(PsiDO, PsiDO)> {
    let main = p.main();
    let h = SchrodingerOp::new(potential.clone()).op(main);
    let mut rest = p.clone();
    let mut q = PsiDO::zero(main, p.precision().map(|f| f - 1));
    while let Some(n) = rest.aux_degree().filter(|&n| n > 0) {
        let step = PsiDO::from_terms(
            main,
            rest.terms()
                .filter(|(e, _)| e.aux == n)
                .map(|(e, c)| (e.main - 1, n - 1, c.clone())),
            rest.precision().map(|f| f - 1),
        );
        rest = rest.try_sub(&step.mul(&h, table)?)?;
        q = q.try_add(&step)?;
    }
    Ok((rest, q))
}

/// `D = P∂1 + Q∂2 + a + R·ℋ_a` for a differential operator `D` in both derivations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    /// Coefficients in `𝒜[∂1]` (main = ∂1).
    pub p: PsiDO,
    /// Coefficients in `𝒜[∂2]` (main = ∂2).
    pub q: PsiDO,
    pub a: DiffPoly,
    /// Mixed part, main = ∂1.
    pub r: PsiDO,
}

impl Decomposition {
    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero() && self.a.is_zero() && self.r.is_zero()
    }

    /// Rebuilds `P∂1 + Q∂2 + a + R·ℋ_a` in the ∂1 orientation.
    pub fn recompose(&self, potential: &DiffPoly, table: &RelationTable) -> Result<PsiDO> {
        let h = SchrodingerOp::new(potential.clone()).op(Axis::D1);
        let p_d1 = self.p.mul(&PsiDO::d_main(Axis::D1, 1), table)?;
        let q_d2 = self.q.mul(&PsiDO::d_main(Axis::D2, 1), table)?.reorient()?;
        let mut out = p_d1.try_add(&q_d2)?;
        out = out.try_add(&PsiDO::coeff(Axis::D1, self.a.clone()))?;
        out.try_add(&self.r.mul(&h, table)?)
    }
}

/// Strips mixed monomials `c∂1^i∂2^j` (`i, j ≥ 1`) by subtracting `c∂1^{i-1}∂2^{j-1}ℋ_a`,
/// highest total order first.
pub fn decompose_commutator(d: &PsiDO, potential: &DiffPoly, table: &RelationTable) -> Result<Decomposition> {
    let h = SchrodingerOp::new(potential.clone()).op(Axis::D1);
    let mut rest = d.oriented(Axis::D1)?;
    let mut r_terms = Vec::new();
    loop {
        let top = rest
            .terms()
            .filter(|(e, _)| e.main >= 1 && e.aux >= 1)
            .max_by_key(|(e, _)| (e.main + e.aux as i32, e.main))
            .map(|(e, c)| (e, c.clone()));
        let Some((e, c)) = top else { break };
        let step = PsiDO::monomial(Axis::D1, e.main - 1, e.aux - 1, c.clone());
        rest = rest.try_sub(&step.mul(&h, table)?)?;
        r_terms.push((e.main - 1, e.aux - 1, c));
    }
    let p = PsiDO::from_terms(
        Axis::D1,
        rest.terms().filter(|(e, _)| e.main >= 1).map(|(e, c)| (e.main - 1, 0, c.clone())),
        None,
    );
    let q = PsiDO::from_terms(
        Axis::D2,
        rest.terms().filter(|(e, _)| e.main == 0 && e.aux >= 1).map(|(e, c)| (e.aux as i32 - 1, 0, c.clone())),
        None,
    );
    let a = rest.coeff_at(0, 0)?;
    let r = PsiDO::from_terms(Axis::D1, r_terms, None);
    Ok(Decomposition { p, q, a, r })
}
