//! Truncated pseudodifferential operators `Σ c_ij ∂_main^i ∂_aux^j` with an explicit precision floor.
//!
//! Operators live in `𝒜[∂_aux]((∂_main^{-1}))` and are stored coefficient-left. A
//! precision `Some(μ)` means every coefficient with main exponent `≥ μ` is exact and
//! nothing below `μ` is known; `None` means the stored terms are the whole operator.

use std::collections::BTreeMap;
use std::fmt;

use crate::diffalg::{Axis, DiffPoly, RelationTable};
use crate::error::{Error, Result};
use crate::scalar::{binomial, Scalar};

/// Exponent pair `(main, aux)`, ordered main-descending then aux-ascending.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Exp {
    pub main: i32,
    pub aux: u32,
}

impl Ord for Exp {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.main.cmp(&self.main).then(self.aux.cmp(&other.aux))
    }
}

impl PartialOrd for Exp {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsiDO {
    main: Axis,
    terms: BTreeMap<Exp, DiffPoly>,
    precision: Option<i32>,
}

fn max_floor(a: Option<i32>, b: Option<i32>) -> Option<i32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Iterated derivatives `∂_main^a ∂_aux^b (d)` of one coefficient, filled on demand.
struct Ladder<'a> {
    main: Axis,
    table: &'a RelationTable,
    rows: Vec<Vec<DiffPoly>>,
}

impl<'a> Ladder<'a> {
    fn new(d: &DiffPoly, main: Axis, table: &'a RelationTable) -> Self {
        Ladder { main, table, rows: vec![vec![d.clone()]] }
    }

    fn get(&mut self, a: usize, b: usize) -> Result<&DiffPoly> {
        while self.rows.len() <= a {
            let next = self.table.derive(&self.rows[self.rows.len() - 1][0], self.main)?;
            self.rows.push(vec![next]);
        }
        while self.rows[a].len() <= b {
            let row = &self.rows[a];
            let next = self.table.derive(&row[row.len() - 1], self.main.other())?;
            self.rows[a].push(next);
        }
        Ok(&self.rows[a][b])
    }
}

fn add_into(terms: &mut BTreeMap<Exp, DiffPoly>, e: Exp, s: &Scalar, left: &DiffPoly, right: &DiffPoly) {
    if s.is_zero() || left.is_zero() || right.is_zero() {
        return;
    }
    let entry = terms.entry(e).or_default();
    for (m, c) in left.terms() {
        entry.add_scaled_product(&(s * c), m, right);
    }
}

/// Accumulates `left · ∂_main^i ∂_aux^j · d · ∂_main^k ∂_aux^l` in normal form, down to `floor`.
#[allow(clippy::too_many_arguments)]
fn push_product(
    out: &mut BTreeMap<Exp, DiffPoly>,
    left: &DiffPoly,
    i: i32,
    j: u32,
    ladder: &mut Ladder<'_>,
    k: i32,
    l: u32,
    floor: Option<i32>,
) -> Result<()> {
    // Terminates: either a floor is set, or i >= 0, or the derivatives of d vanish.
    for a in 0u32.. {
        let main = i - a as i32 + k;
        if floor.is_some_and(|f| main < f) || (i >= 0 && a as i32 > i) {
            break;
        }
        if ladder.get(a as usize, 0)?.is_zero() {
            break;
        }
        let ca = Scalar::from_bigint(binomial(i as i64, a));
        for b in 0..=j {
            let d = ladder.get(a as usize, b as usize)?;
            if d.is_zero() {
                break;
            }
            let cb = Scalar::from_bigint(binomial(j as i64, b));
            add_into(out, Exp { main, aux: j - b + l }, &(&ca * &cb), left, d);
        }
    }
    Ok(())
}

impl PsiDO {
    pub fn zero(main: Axis, precision: Option<i32>) -> Self {
        PsiDO { main, terms: BTreeMap::new(), precision }
    }

    /// Builds an operator from `(main, aux, coeff)` triples, merging repeats and
    /// dropping zero coefficients and anything below the floor.
    pub fn from_terms(
        main: Axis,
        terms: impl IntoIterator<Item = (i32, u32, DiffPoly)>,
        precision: Option<i32>,
    ) -> Self {
        let mut map: BTreeMap<Exp, DiffPoly> = BTreeMap::new();
        for (i, j, c) in terms {
            if precision.is_some_and(|f| i < f) {
                continue;
            }
            map.entry(Exp { main: i, aux: j }).or_default().add_assign_ref(&c);
        }
        map.retain(|_, c| !c.is_zero());
        PsiDO { main, terms: map, precision }
    }

    /// The exact monomial `c ∂_main^i ∂_aux^j`.
    pub fn monomial(main: Axis, i: i32, j: u32, c: DiffPoly) -> Self {
        Self::from_terms(main, [(i, j, c)], None)
    }

    pub fn one(main: Axis) -> Self {
        Self::monomial(main, 0, 0, DiffPoly::one())
    }

    /// `∂_main^i` (any integer `i`).
    pub fn d_main(main: Axis, i: i32) -> Self {
        Self::monomial(main, i, 0, DiffPoly::one())
    }

    /// `∂_aux^j`.
    pub fn d_aux(main: Axis, j: u32) -> Self {
        Self::monomial(main, 0, j, DiffPoly::one())
    }

    /// The multiplication operator by `c`.
    pub fn coeff(main: Axis, c: DiffPoly) -> Self {
        Self::monomial(main, 0, 0, c)
    }

    pub fn main(&self) -> Axis {
        self.main
    }

    pub fn precision(&self) -> Option<i32> {
        self.precision
    }

    pub fn is_exact(&self) -> bool {
        self.precision.is_none()
    }

    /// True when no stored term survives; within precision this is "equal to zero".
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms ordered by main exponent descending, then aux ascending.
    pub fn terms(&self) -> impl Iterator<Item = (Exp, &DiffPoly)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    /// Largest stored main exponent.
    pub fn max_main(&self) -> Option<i32> {
        self.terms.keys().map(|e| e.main).max()
    }

    pub fn min_main(&self) -> Option<i32> {
        self.terms.keys().map(|e| e.main).min()
    }

    pub fn aux_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.aux).max()
    }

    /// Differential order: `∂1` and `∂2` both have grading one.
    pub fn diff_order(&self) -> Option<i32> {
        self.terms.keys().map(|e| e.main + e.aux as i32).max()
    }

    /// True for exact operators with no negative main exponent.
    pub fn is_differential(&self) -> bool {
        self.precision.is_none() && self.min_main().is_none_or(|m| m >= 0)
    }

    /// Upper bound on the main exponents the operator may contain, known or not.
    fn ord_bound(&self) -> Option<i32> {
        max_floor(self.max_main(), self.precision.map(|p| p - 1))
    }

    pub fn coeff_at(&self, main: i32, aux: u32) -> Result<DiffPoly> {
        if let Some(f) = self.precision {
            if main < f {
                return Err(Error::InsufficientPrecision { needed: main, floor: f });
            }
        }
        Ok(self.terms.get(&Exp { main, aux }).cloned().unwrap_or_default())
    }

    /// Forgets everything below `floor`.
    pub fn truncate(&self, floor: i32) -> PsiDO {
        let precision = max_floor(self.precision, Some(floor));
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| e.main >= precision.unwrap())
            .map(|(e, c)| (*e, c.clone()))
            .collect();
        PsiDO { main: self.main, terms, precision }
    }

    fn check_orientation(&self, other: &PsiDO) -> Result<()> {
        if self.main != other.main {
            return Err(Error::OrientationMismatch);
        }
        Ok(())
    }

    pub fn try_add(&self, other: &PsiDO) -> Result<PsiDO> {
        self.check_orientation(other)?;
        let precision = max_floor(self.precision, other.precision);
        let pairs = self.terms.iter().chain(other.terms.iter());
        Ok(Self::from_terms(
            self.main,
            pairs.map(|(e, c)| (e.main, e.aux, c.clone())),
            precision,
        ))
    }

    pub fn try_sub(&self, other: &PsiDO) -> Result<PsiDO> {
        self.try_add(&other.neg())
    }

    pub fn neg(&self) -> PsiDO {
        PsiDO {
            main: self.main,
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
            precision: self.precision,
        }
    }

    /// Left multiplication by a coefficient.
    pub fn scale(&self, c: &DiffPoly) -> PsiDO {
        Self::from_terms(
            self.main,
            self.terms.iter().map(|(e, k)| (e.main, e.aux, c * k)),
            self.precision,
        )
    }

    /// Applies a map to every coefficient; the map must be additive for the result to mean anything.
    pub fn map_coeffs<F>(&self, mut f: F) -> Result<PsiDO>
    where
        F: FnMut(&DiffPoly) -> Result<DiffPoly>,
    {
        let mut out = Vec::with_capacity(self.terms.len());
        for (e, c) in &self.terms {
            out.push((e.main, e.aux, f(c)?));
        }
        Ok(Self::from_terms(self.main, out, self.precision))
    }

    /// Precision of `self · other` under the max-rule (`None` if the product is exact).
    fn product_floor(&self, other: &PsiDO) -> Option<i32> {
        let left = match (self.precision, other.ord_bound()) {
            (Some(p), Some(o)) => Some(p + o),
            _ => None,
        };
        let right = match (other.precision, self.ord_bound()) {
            (Some(p), Some(o)) => Some(p + o),
            _ => None,
        };
        max_floor(left, right)
    }

    fn has_infinite_expansion(&self, other: &PsiDO) -> bool {
        self.min_main().is_some_and(|m| m < 0) && other.terms.values().any(|c| !c.is_constant())
    }

    /// Product in normal form. The result precision follows the max-rule
    /// `max(μ_P + ord(Q), μ_Q + ord(P))`. When both factors are exact and the product is an
    /// infinite series, the floor defaults to the lowest exponent of the naive product;
    /// use [`PsiDO::mul_to`] to ask for more.
    pub fn mul(&self, other: &PsiDO, table: &RelationTable) -> Result<PsiDO> {
        self.mul_impl(other, None, table)
    }

    /// Product computed down to `floor` (or the max-rule floor if that is higher).
    pub fn mul_to(&self, other: &PsiDO, floor: i32, table: &RelationTable) -> Result<PsiDO> {
        self.mul_impl(other, Some(floor), table)
    }

    fn mul_impl(&self, other: &PsiDO, request: Option<i32>, table: &RelationTable) -> Result<PsiDO> {
        self.check_orientation(other)?;
        let mut floor = max_floor(self.product_floor(other), request);
        if floor.is_none() && self.has_infinite_expansion(other) {
            floor = Some(self.min_main().unwrap() + other.min_main().unwrap());
        }
        let mut out = BTreeMap::new();
        for (ek, d) in &other.terms {
            let mut ladder = Ladder::new(d, self.main, table);
            for (ei, c) in &self.terms {
                push_product(&mut out, c, ei.main, ei.aux, &mut ladder, ek.main, ek.aux, floor)?;
            }
        }
        out.retain(|_, c| !c.is_zero());
        Ok(PsiDO { main: self.main, terms: out, precision: floor })
    }

    /// Formal adjoint: `∂^* = -∂`, `c^* = c`, `(PQ)^* = Q^* P^*`. Precision is preserved.
    pub fn adjoint(&self, table: &RelationTable) -> Result<PsiDO> {
        let mut floor = self.precision;
        if floor.is_none()
            && self.terms.iter().any(|(e, c)| e.main < 0 && !c.is_constant())
        {
            floor = self.min_main();
        }
        let mut out = BTreeMap::new();
        let one = DiffPoly::one();
        for (e, c) in &self.terms {
            let sign = if (e.main.rem_euclid(2) as u32 + e.aux).is_multiple_of(2) { one.clone() } else { -&one };
            let mut ladder = Ladder::new(c, self.main, table);
            push_product(&mut out, &sign, e.main, e.aux, &mut ladder, 0, 0, floor)?;
        }
        out.retain(|_, c| !c.is_zero());
        Ok(PsiDO { main: self.main, terms: out, precision: floor })
    }

    /// `(P_+, P_-)`: the parts with main exponent `≥ 0` and `< 0`.
    ///
    /// `P_+` is exact whenever the floor is `≤ 0`.
    pub fn split_parts(&self) -> (PsiDO, PsiDO) {
        let plus_prec = self.precision.filter(|&f| f > 0);
        let plus = self.terms.iter().filter(|(e, _)| e.main >= 0);
        let minus = self.terms.iter().filter(|(e, _)| e.main < 0);
        (
            PsiDO {
                main: self.main,
                terms: plus.map(|(e, c)| (*e, c.clone())).collect(),
                precision: plus_prec,
            },
            PsiDO {
                main: self.main,
                terms: minus.map(|(e, c)| (*e, c.clone())).collect(),
                precision: self.precision,
            },
        )
    }

    pub fn plus_part(&self) -> PsiDO {
        self.split_parts().0
    }

    pub fn minus_part(&self) -> PsiDO {
        self.split_parts().1
    }

    /// Applies a differential operator to a function: `Σ c_ij ∂_main^i ∂_aux^j (a)`.
    pub fn apply(&self, a: &DiffPoly, table: &RelationTable) -> Result<DiffPoly> {
        if !self.is_differential() {
            return Err(Error::NegativeExponent);
        }
        let mut ladder = Ladder::new(a, self.main, table);
        let mut out = DiffPoly::zero();
        for (e, c) in &self.terms {
            let d = ladder.get(e.main as usize, e.aux as usize)?;
            out.add_assign_ref(&(c * d));
        }
        Ok(out)
    }

    /// τ: flips the orientation and maps every coefficient through τ.
    pub fn tau(&self) -> PsiDO {
        PsiDO {
            main: self.main.other(),
            terms: self.terms.iter().map(|(e, c)| (*e, c.tau())).collect(),
            precision: self.precision,
        }
    }

    /// Rewrites an exact differential operator with the roles of main and aux swapped.
    pub fn reorient(&self) -> Result<PsiDO> {
        if !self.is_differential() {
            return Err(Error::NegativeExponent);
        }
        Ok(Self::from_terms(
            self.main.other(),
            self.terms.iter().map(|(e, c)| (e.aux as i32, e.main as u32, c.clone())),
            None,
        ))
    }

    /// Returns the operator in the requested orientation (reorienting when needed).
    pub fn oriented(&self, main: Axis) -> Result<PsiDO> {
        if self.main == main {
            Ok(self.clone())
        } else {
            self.reorient()
        }
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &PsiDO, table: &RelationTable) -> Result<PsiDO> {
        self.mul(other, table)?.try_sub(&other.mul(self, table)?)
    }

    /// `self − self^*` vanishes within precision.
    pub fn is_self_adjoint(&self, table: &RelationTable) -> Result<bool> {
        Ok(self.try_sub(&self.adjoint(table)?)?.is_zero())
    }

    /// `self + self^*` vanishes within precision.
    pub fn is_skew_adjoint(&self, table: &RelationTable) -> Result<bool> {
        Ok(self.try_add(&self.adjoint(table)?)?.is_zero())
    }

    pub fn latex(&self) -> String {
        self.render(true)
    }

    fn render(&self, latex: bool) -> String {
        let sym = |axis: Axis, n: i64| -> String {
            let a = axis.index();
            match (latex, n) {
                (_, 0) => String::new(),
                (true, 1) => format!("\\partial_{a}"),
                (true, _) => format!("\\partial_{a}^{{{n}}}"),
                (false, 1) => format!("d{a}"),
                (false, _) => format!("d{a}^{n}"),
            }
        };
        let mut parts: Vec<String> = Vec::new();
        for (e, c) in &self.terms {
            let mut ops: Vec<String> = Vec::new();
            let (m, x) = (sym(self.main, e.main as i64), sym(self.main.other(), e.aux as i64));
            // always print ∂1 before ∂2
            let ordered = if self.main == Axis::D1 { [m, x] } else { [x, m] };
            ops.extend(ordered.into_iter().filter(|s| !s.is_empty()));
            let op = ops.join(if latex { "" } else { "*" });
            let coeff = if latex { c.latex() } else { c.to_string() };
            let single = c.len() == 1;
            let s = if op.is_empty() {
                if single { coeff } else { format!("({coeff})") }
            } else if c == &DiffPoly::one() {
                op
            } else if c == &-DiffPoly::one() {
                format!("-{op}")
            } else if single {
                format!("{coeff}{}{op}", if latex { " " } else { "*" })
            } else {
                format!("({coeff}){}{op}", if latex { " " } else { "*" })
            };
            parts.push(s);
        }
        let mut out = String::new();
        for (idx, p) in parts.iter().enumerate() {
            if idx == 0 {
                out.push_str(p);
            } else if let Some(rest) = p.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(p);
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        if let Some(f) = self.precision {
            let o = if latex {
                format!("O(\\partial_{}^{{{}}})", self.main.index(), f - 1)
            } else {
                format!("O(d{}^{})", self.main.index(), f - 1)
            };
            out.push_str(" + ");
            out.push_str(&o);
        }
        out
    }
}

impl fmt::Display for PsiDO {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(false))
    }
}

/// `∂^{-m} s ∂^{-m}` in normal form, down to `floor`.
pub fn sandwich(main: Axis, m: u32, s: &DiffPoly, floor: i32, table: &RelationTable) -> Result<PsiDO> {
    let mut out = BTreeMap::new();
    let mut ladder = Ladder::new(s, main, table);
    push_product(&mut out, &DiffPoly::one(), -(m as i32), 0, &mut ladder, -(m as i32), 0, Some(floor))?;
    out.retain(|_, c: &mut DiffPoly| !c.is_zero());
    Ok(PsiDO { main, terms: out, precision: Some(floor) })
}

/// Reads the coefficients `s_0..s_M` of a self-adjoint operator of order `≤ 0`
/// written as `Σ_m ∂^{-m} s_m ∂^{-m}`.
pub fn symmetric_extract(x: &PsiDO, count: u32, table: &RelationTable) -> Result<Vec<DiffPoly>> {
    if x.aux_degree().is_some_and(|a| a > 0) {
        return Err(Error::Shape("symmetric form needs an operator free of the auxiliary derivation".into()));
    }
    if x.max_main().is_some_and(|m| m > 0) {
        return Err(Error::Shape("symmetric form needs an operator of order at most 0".into()));
    }
    let needed = -2 * count as i32;
    if let Some(f) = x.precision {
        if f > needed {
            return Err(Error::InsufficientPrecision { needed, floor: f });
        }
    }
    // exact operators are handled at the floor their own terms reach
    let floor = x.precision.unwrap_or_else(|| x.min_main().unwrap_or(0).min(needed) - 1);
    let mut rest = x.clone();
    let mut out = Vec::with_capacity(count as usize + 1);
    for m in 0..=count {
        let s = rest.coeff_at(-2 * m as i32, 0)?;
        if !s.is_zero() {
            rest = rest.try_sub(&sandwich(x.main, m, &s, floor, table)?)?;
        }
        let odd = -(2 * m as i32) - 1;
        if odd >= floor && !rest.coeff_at(odd, 0)?.is_zero() {
            return Err(Error::NotSelfAdjoint { exponent: odd });
        }
        out.push(s);
    }
    Ok(out)
}
