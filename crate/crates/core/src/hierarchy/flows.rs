use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::diffalg::{Axis, DiffPoly, Gen, Jet, JetImage, RelationTable};
use crate::error::{Error, Result};
use crate::psido::PsiDO;

/// Which family a flow belongs to: `d/dt_{i,n}` or the reduced `d/dt_n = d/dt_{1,n} + d/dt_{2,n}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FlowKind {
    Side(Axis),
    Reduced,
}

impl FlowKind {
    pub fn label(&self) -> String {
        match self {
            FlowKind::Side(a) => a.index().to_string(),
            FlowKind::Reduced => "reduced".to_string(),
        }
    }
}

/// The values of one evolutionary derivation on the generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowValue {
    pub kind: FlowKind,
    pub n: u32,
    pub values: BTreeMap<Gen, DiffPoly>,
}

impl FlowValue {
    pub fn new(kind: FlowKind, n: u32) -> Self {
        FlowValue { kind, n, values: BTreeMap::new() }
    }

    pub fn get(&self, g: Gen) -> Option<&DiffPoly> {
        self.values.get(&g)
    }

    /// Highest `v` and `w` index covered (each `None` if absent).
    pub fn coverage(&self) -> (Option<u32>, Option<u32>) {
        let mut v = None;
        let mut w = None;
        for g in self.values.keys() {
            match *g {
                Gen::V(m) => v = v.max(Some(m)),
                Gen::W(l) => w = w.max(Some(l)),
                Gen::U => {}
            }
        }
        (v, w)
    }

    fn missing(&self, g: Gen) -> Error {
        let (v, w) = self.coverage();
        let (needed, have) = match g {
            Gen::V(m) => (m, v),
            Gen::W(l) => (l, w),
            Gen::U => (0, None),
        };
        Error::DepthExceeded { needed, entries: have.map_or(0, |k| k + 1) }
    }

    fn jet_image(
        &self,
        j: &Jet,
        table: &RelationTable,
        memo: &mut HashMap<Jet, Arc<DiffPoly>>,
    ) -> Result<JetImage> {
        if let Some(p) = memo.get(j) {
            return Ok(JetImage::Poly(p.clone()));
        }
        let base = self.values.get(&j.gen()).ok_or_else(|| self.missing(j.gen()))?;
        let p = table.derive_n(base, Axis::D1, j.d1())?;
        let p = Arc::new(table.derive_n(&p, Axis::D2, j.d2())?);
        memo.insert(*j, p.clone());
        Ok(JetImage::Poly(p))
    }

    /// Extends the generator values to the evolutionary derivation on `p`:
    /// `d(∂1^a∂2^b g)/dt = ∂1^a∂2^b(dg/dt)` plus the Leibniz rule.
    pub fn apply(&self, p: &DiffPoly, table: &RelationTable) -> Result<DiffPoly> {
        let mut memo = HashMap::new();
        p.derivation_by(|j| self.jet_image(j, table, &mut memo))
    }

    /// The derivation applied to every coefficient of an operator.
    pub fn apply_op(&self, op: &PsiDO, table: &RelationTable) -> Result<PsiDO> {
        let mut memo = HashMap::new();
        op.map_coeffs(|c| c.derivation_by(|j| self.jet_image(j, table, &mut memo)))
    }

    pub fn tau(&self) -> FlowValue {
        FlowValue {
            kind: self.kind,
            n: self.n,
            values: self.values.iter().map(|(g, p)| (g.tau(), p.tau())).collect(),
        }
    }
}

/// Extends `fv` to `p`; fails with `DepthExceeded` if `p` mentions a generator `fv` lacks.
pub fn flow_derivation(fv: &FlowValue, p: &DiffPoly, table: &RelationTable) -> Result<DiffPoly> {
    fv.apply(p, table)
}
