use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};

use super::jet::{Axis, Gen, Jet};
use super::poly::{DiffPoly, JetImage};

/// The rewriting rules `∂2(v_m)` and `∂1(w_l)` that eliminate non-canonical jets.
///
/// The table is frozen at construction. The memo of iterated cross-derivatives
/// (`∂1^n ∂2(v_m)`, `∂2^k ∂1(w_l)`) is filled on demand behind a lock and never
/// changes an observable result.
pub struct RelationTable {
    dv: Vec<Arc<DiffPoly>>,
    dw: Vec<Arc<DiffPoly>>,
    memo: RwLock<HashMap<(Gen, u32), Arc<DiffPoly>>>,
}

impl RelationTable {
    /// A table with no entries; enough for any computation in a single derivation.
    pub fn empty() -> Self {
        Self::from_v_side(Vec::new())
    }

    /// Builds the table from `∂2(v_0..v_K)`; the w-side is defined as τ of the v-side.
    pub fn from_v_side(dv: Vec<DiffPoly>) -> Self {
        let dw = dv.iter().map(|p| Arc::new(p.tau())).collect();
        RelationTable {
            dv: dv.into_iter().map(Arc::new).collect(),
            dw,
            memo: RwLock::new(HashMap::new()),
        }
    }

    /// Builds a table from explicit entries on both sides (no τ coupling); used for cross-checks.
    pub fn from_entries(dv: Vec<DiffPoly>, dw: Vec<DiffPoly>) -> Self {
        RelationTable {
            dv: dv.into_iter().map(Arc::new).collect(),
            dw: dw.into_iter().map(Arc::new).collect(),
            memo: RwLock::new(HashMap::new()),
        }
    }

    /// Highest index `K` with an entry on both sides, or `None` for the empty table.
    pub fn depth(&self) -> Option<u32> {
        self.dv.len().min(self.dw.len()).checked_sub(1).map(|k| k as u32)
    }

    pub fn dv(&self) -> &[Arc<DiffPoly>] {
        &self.dv
    }

    pub fn dw(&self) -> &[Arc<DiffPoly>] {
        &self.dw
    }

    fn entry(&self, gen: Gen) -> Result<Arc<DiffPoly>> {
        let (list, idx) = match gen {
            Gen::V(m) => (&self.dv, m),
            Gen::W(l) => (&self.dw, l),
            Gen::U => unreachable!("u has no cross relation"),
        };
        list.get(idx as usize)
            .cloned()
            .ok_or(Error::DepthExceeded { needed: idx, entries: list.len() as u32 })
    }

    /// `∂1^n(∂2 v_m)` for `gen = V(m)`, or `∂2^n(∂1 w_l)` for `gen = W(l)`.
    fn cross(&self, gen: Gen, n: u32) -> Result<Arc<DiffPoly>> {
        if n == 0 {
            return self.entry(gen);
        }
        if let Some(p) = self.memo.read().expect("memo poisoned").get(&(gen, n)) {
            return Ok(p.clone());
        }
        let along = match gen {
            Gen::V(_) => Axis::D1,
            _ => Axis::D2,
        };
        let prev = self.cross(gen, n - 1)?;
        let p = Arc::new(self.derive(&prev, along)?);
        self.memo.write().expect("memo poisoned").insert((gen, n), p.clone());
        Ok(p)
    }

    /// Image of one canonical jet under `∂_axis`.
    pub fn derive_jet(&self, j: &Jet, axis: Axis) -> Result<JetImage> {
        if let Some(next) = j.bump(axis) {
            return Ok(JetImage::Jet(next));
        }
        let n = j.order(axis.other());
        Ok(JetImage::Poly(self.cross(j.gen(), n)?))
    }

    /// The derivation `∂_axis` on the algebra.
    pub fn derive(&self, p: &DiffPoly, axis: Axis) -> Result<DiffPoly> {
        p.derivation_by(|j| self.derive_jet(j, axis))
    }

    /// `∂_axis^n (p)`.
    pub fn derive_n(&self, p: &DiffPoly, axis: Axis, n: u32) -> Result<DiffPoly> {
        let mut acc = p.clone();
        for _ in 0..n {
            if acc.is_zero() {
                break;
            }
            acc = self.derive(&acc, axis)?;
        }
        Ok(acc)
    }

    /// `∂1^a ∂2^b (g)` rewritten into canonical jets.
    pub fn jet_poly(&self, gen: Gen, a: u32, b: u32) -> Result<DiffPoly> {
        match Jet::new(gen, a, b) {
            Some(j) => Ok(DiffPoly::jet(j)),
            None => {
                let base = DiffPoly::gen(gen);
                let p = self.derive_n(&base, Axis::D1, a)?;
                self.derive_n(&p, Axis::D2, b)
            }
        }
    }
}

impl Clone for RelationTable {
    fn clone(&self) -> Self {
        RelationTable {
            dv: self.dv.clone(),
            dw: self.dw.clone(),
            memo: RwLock::new(HashMap::new()),
        }
    }
}

impl fmt::Debug for RelationTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RelationTable").field("dv", &self.dv).field("dw", &self.dw).finish()
    }
}

/// `∂_axis(p)` against a relation table.
pub fn derive(p: &DiffPoly, axis: Axis, table: &RelationTable) -> Result<DiffPoly> {
    table.derive(p, axis)
}

/// τ on the algebra.
pub fn tau_poly(p: &DiffPoly) -> DiffPoly {
    p.tau()
}
