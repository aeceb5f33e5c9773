use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::Result;
use crate::scalar::Scalar;

use super::jet::{Gen, Jet};

/// A product of canonical jets with positive powers, sorted by jet order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<(Jet, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn jet(j: Jet) -> Self {
        Monomial(vec![(j, 1)])
    }

    /// Normalizes an arbitrary factor list (merges repeated jets, drops zero powers).
    pub fn from_factors(factors: impl IntoIterator<Item = (Jet, u32)>) -> Self {
        let mut map: BTreeMap<Jet, u32> = BTreeMap::new();
        for (j, p) in factors {
            if p > 0 {
                *map.entry(j).or_insert(0) += p;
            }
        }
        Monomial(map.into_iter().collect())
    }

    pub fn factors(&self) -> &[(Jet, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, p)| p).sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut k) = (0, 0);
        while i < a.len() && k < b.len() {
            match a[i].0.cmp(&b[k].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[k]);
                    k += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[k].1));
                    i += 1;
                    k += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[k..]);
        Monomial(out)
    }

    /// The monomial with one power of the factor at `pos` removed.
    fn without_one(&self, pos: usize) -> Monomial {
        let mut f = self.0.clone();
        if f[pos].1 == 1 {
            f.remove(pos);
        } else {
            f[pos].1 -= 1;
        }
        Monomial(f)
    }

    fn map_jets(&self, g: impl Fn(&Jet) -> Jet) -> Monomial {
        Monomial::from_factors(self.0.iter().map(|(j, p)| (g(j), *p)))
    }

    pub fn latex(&self) -> String {
        self.0
            .iter()
            .map(|(j, p)| if *p == 1 { j.latex() } else { format!("{}^{{{p}}}", j.latex()) })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(j, p)| if *p == 1 { j.to_string() } else { format!("{j}^{p}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// The image of a single jet under a derivation, as handed to [`DiffPoly::derivation_by`].
pub enum JetImage {
    Zero,
    /// A single jet with coefficient one (the canonical increments).
    Jet(Jet),
    Poly(Arc<DiffPoly>),
}

/// An element of the differential polynomial algebra: a sparse map monomial → scalar.
///
/// Zero coefficients are never stored, so structural equality is mathematical equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DiffPoly {
    terms: BTreeMap<Monomial, Scalar>,
}

impl DiffPoly {
    pub fn zero() -> Self {
        DiffPoly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn int(n: i64) -> Self {
        Self::constant(Scalar::int(n))
    }

    pub fn term(c: Scalar, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        DiffPoly { terms }
    }

    pub fn jet(j: Jet) -> Self {
        Self::term(Scalar::one(), Monomial::jet(j))
    }

    pub fn gen(g: Gen) -> Self {
        Self::jet(Jet::of(g))
    }

    pub fn u() -> Self {
        Self::gen(Gen::U)
    }

    pub fn v(m: u32) -> Self {
        Self::gen(Gen::V(m))
    }

    pub fn w(l: u32) -> Self {
        Self::gen(Gen::W(l))
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Scalar)>) -> Self {
        let mut p = DiffPoly::zero();
        for (m, c) in terms {
            p.add_term(m, &c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn constant_term(&self) -> Scalar {
        self.terms.get(&Monomial::one()).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn add_term(&mut self, m: Monomial, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_assign_ref(&mut self, other: &DiffPoly) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c);
        }
    }

    /// `self += c * m * other`, the accumulation step used by every product routine.
    pub fn add_scaled_product(&mut self, c: &Scalar, m: &Monomial, other: &DiffPoly) {
        if c.is_zero() {
            return;
        }
        for (m2, c2) in &other.terms {
            self.add_term(m.mul(m2), &(c * c2));
        }
    }

    pub fn scale(&self, c: &Scalar) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero();
        }
        DiffPoly { terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect() }
    }

    pub fn pow(&self, n: u32) -> DiffPoly {
        let mut acc = DiffPoly::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Every jet occurring in the polynomial.
    pub fn jets(&self) -> BTreeSet<Jet> {
        self.terms.keys().flat_map(|m| m.0.iter().map(|(j, _)| *j)).collect()
    }

    pub fn generators(&self) -> BTreeSet<Gen> {
        self.jets().into_iter().map(|j| j.gen()).collect()
    }

    /// Extends a map on jets to the unique derivation obeying the Leibniz rule.
    pub fn derivation_by<F>(&self, mut image: F) -> Result<DiffPoly>
    where
        F: FnMut(&Jet) -> Result<JetImage>,
    {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            for (pos, (j, power)) in m.0.iter().enumerate() {
                let rest = m.without_one(pos);
                let coeff = c * &Scalar::int(*power as i64);
                match image(j)? {
                    JetImage::Zero => {}
                    JetImage::Jet(dj) => out.add_term(rest.mul(&Monomial::jet(dj)), &coeff),
                    JetImage::Poly(dp) => out.add_scaled_product(&coeff, &rest, &dp),
                }
            }
        }
        Ok(out)
    }

    /// Substitutes each jet by a polynomial: the algebra morphism determined by `image`.
    pub fn substitute<F>(&self, mut image: F) -> Result<DiffPoly>
    where
        F: FnMut(&Jet) -> Result<DiffPoly>,
    {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            let mut acc = DiffPoly::constant(c.clone());
            for (j, p) in &m.0 {
                acc = &acc * &image(j)?.pow(*p);
            }
            out.add_assign_ref(&acc);
        }
        Ok(out)
    }

    /// The involution τ: swaps `∂1 ↔ ∂2`, `v_m ↔ w_m`, and conjugates the coefficients.
    pub fn tau(&self) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.map_jets(Jet::tau), &c.conj());
        }
        out
    }

    pub fn latex(&self) -> String {
        render(self, |m| m.latex(), " ")
    }
}

fn render(p: &DiffPoly, mono: impl Fn(&Monomial) -> String, sep: &str) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (idx, (m, c)) in p.terms.iter().enumerate() {
        let (neg, mag) = if c.is_negative_real() { (true, -c) } else { (false, c.clone()) };
        if idx == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if m.is_one() {
            out.push_str(&mag.to_string());
        } else if mag.is_one() {
            out.push_str(&mono(m));
        } else {
            out.push_str(&format!("{mag}{sep}{}", mono(m)));
        }
    }
    out
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self, |m| m.to_string(), "*"))
    }
}

impl Add for &DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        out.add_assign_ref(rhs);
        out
    }
}

impl Add for DiffPoly {
    type Output = DiffPoly;
    fn add(mut self, rhs: DiffPoly) -> DiffPoly {
        self.add_assign_ref(&rhs);
        self
    }
}

impl Sub for &DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), &-c);
        }
        out
    }
}

impl Sub for DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: DiffPoly) -> DiffPoly {
        &self - &rhs
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        DiffPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

impl Neg for DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        -&self
    }
}

impl Mul for &DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        let (small, large) = if self.len() <= rhs.len() { (self, rhs) } else { (rhs, self) };
        let mut out = DiffPoly::zero();
        for (m, c) in &small.terms {
            out.add_scaled_product(c, m, large);
        }
        out
    }
}

impl Mul for DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: DiffPoly) -> DiffPoly {
        &self * &rhs
    }
}

impl From<Jet> for DiffPoly {
    fn from(j: Jet) -> Self {
        DiffPoly::jet(j)
    }
}

impl From<Gen> for DiffPoly {
    fn from(g: Gen) -> Self {
        DiffPoly::gen(g)
    }
}

impl From<i64> for DiffPoly {
    fn from(n: i64) -> Self {
        DiffPoly::int(n)
    }
}
