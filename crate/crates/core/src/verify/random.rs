//! Seeded random elements of `𝒜` and small operators, for the property checks.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::diffalg::{Axis, DiffPoly, Jet, Monomial};
use crate::psido::PsiDO;
use crate::scalar::Scalar;

/// Size limits for random elements.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub terms: usize,
    pub degree: u32,
    pub jet_order: u32,
    pub index: u32,
}

impl Default for Shape {
    fn default() -> Self {
        Shape { terms: 3, degree: 2, jet_order: 2, index: 1 }
    }
}

pub fn jet(rng: &mut ChaCha8Rng, s: Shape) -> Jet {
    match rng.gen_range(0..3) {
        0 => Jet::u(rng.gen_range(0..=s.jet_order), rng.gen_range(0..=s.jet_order)),
        1 => Jet::v(rng.gen_range(0..=s.index), rng.gen_range(0..=s.jet_order)),
        _ => Jet::w(rng.gen_range(0..=s.index), rng.gen_range(0..=s.jet_order)),
    }
}

pub fn scalar(rng: &mut ChaCha8Rng) -> Scalar {
    let re = rng.gen_range(-3..=3);
    if rng.gen_bool(0.2) {
        Scalar::complex(re, rng.gen_range(-2..=2))
    } else if rng.gen_bool(0.2) {
        Scalar::ratio(re, rng.gen_range(1..=3))
    } else {
        Scalar::int(re)
    }
}

pub fn poly(rng: &mut ChaCha8Rng, s: Shape) -> DiffPoly {
    let mut out = DiffPoly::zero();
    for _ in 0..rng.gen_range(1..=s.terms) {
        let deg = rng.gen_range(0..=s.degree);
        let m = Monomial::from_factors((0..deg).map(|_| (jet(rng, s), 1)));
        out.add_term(m, &scalar(rng));
    }
    out
}

/// A random operator with main exponents in `[floor, top]`, aux exponents `≤ aux`, and
/// precision `floor`.
pub fn operator(rng: &mut ChaCha8Rng, main: Axis, top: i32, floor: i32, aux: u32, s: Shape) -> PsiDO {
    let mut terms = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let i = rng.gen_range(floor..=top);
        let j = rng.gen_range(0..=aux);
        terms.push((i, j, poly(rng, Shape { terms: 2, degree: 1, ..s })));
    }
    PsiDO::from_terms(main, terms, Some(floor))
}
