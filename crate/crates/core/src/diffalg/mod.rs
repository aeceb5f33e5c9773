//! The differential polynomial algebra in the jets of `u`, `v_m`, `w_l`.
//!
//! Only canonical jets are stored: `∂1^n(v_m)`, `∂2^k(w_l)` and `∂1^p ∂2^q(u)`.
//! Mixed jets of `v`/`w` are rewritten through a [`RelationTable`] whenever a
//! derivation produces them.

mod jet;
mod poly;
mod relations;

pub use jet::{Axis, Gen, Jet};
pub use poly::{DiffPoly, JetImage, Monomial};
pub use relations::{derive, tau_poly, RelationTable};

/// `p + q`.
pub fn poly_add(p: &DiffPoly, q: &DiffPoly) -> DiffPoly {
    p + q
}

/// `p · q`.
pub fn poly_mul(p: &DiffPoly, q: &DiffPoly) -> DiffPoly {
    p * q
}
