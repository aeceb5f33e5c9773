//! Reader for the plain-text notation printed by the `Display` impls.
//!
//! Polynomials: `3*v0^2 - d1^2(v0) + (1/2+i)*d1d2(u)`, where `d1^a d2^b(e)` applies the
//! derivations to `e` through the relation table. Operators additionally allow bare
//! `d1^k` / `d2^k` factors (negative `k` only on the main side) and a trailing
//! `+ O(d1^k)` giving the precision floor `k + 1`.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::diffalg::{Axis, DiffPoly, Gen, RelationTable};
use crate::error::{Error, Result};
use crate::psido::PsiDO;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational, bool),
    Gen(Gen),
    D(Axis),
    Big,
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
    LBrace,
    RBrace,
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let cs: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    let err = |k: usize| Error::Parse(format!("unexpected character at {k} in {s:?}"));
    while k < cs.len() {
        let c = cs[k];
        let ident_end = |mut e: usize| {
            while e < cs.len() && (cs[e].is_ascii_alphanumeric() || cs[e] == '_') {
                e += 1;
            }
            e
        };
        match c {
            ' ' | '\t' | '\n' => k += 1,
            '+' => (out.push(Tok::Plus), k += 1).1,
            '-' => (out.push(Tok::Minus), k += 1).1,
            '*' | '·' => (out.push(Tok::Star), k += 1).1,
            '^' => (out.push(Tok::Caret), k += 1).1,
            '/' => (out.push(Tok::Slash), k += 1).1,
            '(' => (out.push(Tok::LParen), k += 1).1,
            ')' => (out.push(Tok::RParen), k += 1).1,
            '{' => (out.push(Tok::LBrace), k += 1).1,
            '}' => (out.push(Tok::RBrace), k += 1).1,
            '0'..='9' => {
                let start = k;
                while k < cs.len() && cs[k].is_ascii_digit() {
                    k += 1;
                }
                let digits: String = cs[start..k].iter().collect();
                let n: BigInt = digits.parse().map_err(|_| err(start))?;
                let imag = k < cs.len() && cs[k] == 'i' && ident_end(k + 1) == k + 1;
                if imag {
                    k += 1;
                }
                out.push(Tok::Num(BigRational::from_integer(n), imag));
            }
            'd' if k + 1 < cs.len() && (cs[k + 1] == '1' || cs[k + 1] == '2') => {
                out.push(Tok::D(if cs[k + 1] == '1' { Axis::D1 } else { Axis::D2 }));
                k += 2;
            }
            'O' => (out.push(Tok::Big), k += 1).1,
            'i' if ident_end(k + 1) == k + 1 => {
                out.push(Tok::Num(BigRational::from_integer(BigInt::from(1)), true));
                k += 1;
            }
            c if c.is_ascii_alphabetic() => {
                let e = ident_end(k);
                let word: String = cs[k..e].iter().collect();
                let g = Gen::parse(&word).ok_or_else(|| Error::Parse(format!("unknown symbol {word:?}")))?;
                out.push(Tok::Gen(g));
                k = e;
            }
            _ => return Err(err(k)),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    main: Axis,
    floor: Option<i32>,
    tail: Option<i32>,
    table: &'a RelationTable,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok) -> Result<()> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(Error::Parse(format!("expected {t:?} at token {}", self.pos)))
        }
    }

    fn mul(&self, a: &PsiDO, b: &PsiDO) -> Result<PsiDO> {
        match self.floor {
            Some(f) => a.mul_to(b, f, self.table),
            None => a.mul(b, self.table),
        }
    }

    fn expr(&mut self) -> Result<PsiDO> {
        let mut acc = PsiDO::zero(self.main, self.floor);
        let mut first = true;
        loop {
            let neg = if self.eat(&Tok::Minus) {
                true
            } else {
                let plus = self.eat(&Tok::Plus);
                if !plus && !first {
                    return Ok(acc);
                }
                false
            };
            first = false;
            if self.peek() == Some(&Tok::Big) {
                self.pos += 1;
                self.expect(&Tok::LParen)?;
                let (axis, k) = self.d_symbol()?;
                self.expect(&Tok::RParen)?;
                if axis != self.main {
                    return Err(Error::Parse("remainder term must be in the main derivation".into()));
                }
                self.tail = Some(k + 1);
                continue;
            }
            let t = self.term()?;
            acc = if neg { acc.try_sub(&t)? } else { acc.try_add(&t)? };
        }
    }

    fn term(&mut self) -> Result<PsiDO> {
        let mut acc = self.power()?;
        while self.eat(&Tok::Star) {
            let f = self.power()?;
            acc = self.mul(&acc, &f)?;
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<PsiDO> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let n = self.exponent()?;
        if n < 0 {
            return Err(Error::Parse("negative power of a non-derivation factor".into()));
        }
        let mut acc = PsiDO::one(self.main);
        for _ in 0..n {
            acc = self.mul(&acc, &base)?;
        }
        Ok(acc)
    }

    fn exponent(&mut self) -> Result<i32> {
        let braced = self.eat(&Tok::LBrace);
        let neg = self.eat(&Tok::Minus);
        let n = match self.peek().cloned() {
            Some(Tok::Num(r, false)) if r.is_integer() => {
                self.pos += 1;
                i32::try_from(r.to_integer()).map_err(|_| Error::Parse("exponent too large".into()))?
            }
            _ => return Err(Error::Parse(format!("expected exponent at token {}", self.pos))),
        };
        if braced {
            self.expect(&Tok::RBrace)?;
        }
        Ok(if neg { -n } else { n })
    }

    fn d_symbol(&mut self) -> Result<(Axis, i32)> {
        let axis = match self.peek() {
            Some(Tok::D(a)) => *a,
            _ => return Err(Error::Parse(format!("expected d1 or d2 at token {}", self.pos))),
        };
        self.pos += 1;
        let k = if self.eat(&Tok::Caret) { self.exponent()? } else { 1 };
        Ok((axis, k))
    }

    fn atom(&mut self) -> Result<PsiDO> {
        match self.peek().cloned() {
            Some(Tok::Num(r, imag)) => {
                self.pos += 1;
                let mut r = r;
                if !imag && self.peek() == Some(&Tok::Slash) {
                    self.pos += 1;
                    match self.peek().cloned() {
                        Some(Tok::Num(d, imag2)) if d.is_integer() => {
                            self.pos += 1;
                            r /= d;
                            if imag2 {
                                return Ok(self.scalar(Scalar::new(BigRational::default(), r)));
                            }
                        }
                        _ => return Err(Error::Parse("expected denominator".into())),
                    }
                }
                let s = if imag { Scalar::new(BigRational::default(), r) } else { Scalar::new(r, BigRational::default()) };
                Ok(self.scalar(s))
            }
            Some(Tok::Gen(g)) => {
                self.pos += 1;
                Ok(PsiDO::coeff(self.main, DiffPoly::gen(g)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::D(_)) => {
                let mut exps = [0i32; 2];
                while matches!(self.peek(), Some(Tok::D(_))) {
                    let (axis, k) = self.d_symbol()?;
                    exps[axis.index() as usize - 1] += k;
                }
                if self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    let inner = self.expr()?;
                    self.expect(&Tok::RParen)?;
                    let mut p = as_poly(&inner)?;
                    for (axis, k) in [(Axis::D1, exps[0]), (Axis::D2, exps[1])] {
                        if k < 0 {
                            return Err(Error::Parse("negative derivative of a polynomial".into()));
                        }
                        p = self.table.derive_n(&p, axis, k as u32)?;
                    }
                    return Ok(PsiDO::coeff(self.main, p));
                }
                let (i, j) = match self.main {
                    Axis::D1 => (exps[0], exps[1]),
                    Axis::D2 => (exps[1], exps[0]),
                };
                if j < 0 {
                    return Err(Error::Parse("negative power of the auxiliary derivation".into()));
                }
                Ok(PsiDO::monomial(self.main, i, j as u32, DiffPoly::one()))
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }

    fn scalar(&self, s: Scalar) -> PsiDO {
        PsiDO::coeff(self.main, DiffPoly::constant(s))
    }
}

fn as_poly(op: &PsiDO) -> Result<DiffPoly> {
    let mut out = DiffPoly::zero();
    for (e, c) in op.terms() {
        if e.main != 0 || e.aux != 0 {
            return Err(Error::Parse("derivation applied to an operator".into()));
        }
        out = c.clone();
    }
    Ok(out)
}

fn run(s: &str, main: Axis, floor: Option<i32>, table: &RelationTable) -> Result<PsiDO> {
    let mut p = Parser { toks: lex(s)?, pos: 0, main, floor, tail: None, table };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!("trailing input at token {}", p.pos)));
    }
    let floor = match (p.tail, floor) {
        (Some(t), Some(f)) => Some(t.max(f)),
        (t, f) => t.or(f),
    };
    Ok(match floor {
        Some(f) => PsiDO::from_terms(main, e.terms().map(|(x, c)| (x.main, x.aux, c.clone())), Some(f)),
        None => e,
    })
}

/// Parses a differential polynomial.
pub fn parse_poly(s: &str, table: &RelationTable) -> Result<DiffPoly> {
    as_poly(&run(s, Axis::D1, None, table)?)
}

/// Parses an operator with main derivation `main`. Products are expanded down to
/// `floor` when given; a trailing `O(·)` term raises the floor.
pub fn parse_op(s: &str, main: Axis, floor: Option<i32>, table: &RelationTable) -> Result<PsiDO> {
    run(s, main, floor, table)
}
