//! Sparse bivariate polynomials `sum c_ij t^i X^j` over GF(2^m).
//!
//! The same type carries the `(x, y)` polynomials of diagonal
//! representations; exponent `i` belongs to the first variable.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2m::{FieldCtx, FieldElem};
use crate::series::{LaurentSeries, ZPoly};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BivarPoly {
    ctx: FieldCtx,
    terms: BTreeMap<(u32, u32), FieldElem>,
}

/// Graded-lex key with X > t: total degree, then X-degree.
fn grlex_key(&(i, j): &(u32, u32)) -> (u32, u32, u32) {
    (i + j, j, i)
}

impl BivarPoly {
    pub fn zero(ctx: &FieldCtx) -> Self {
        BivarPoly { ctx: ctx.clone(), terms: BTreeMap::new() }
    }

    pub fn monomial(ctx: &FieldCtx, c: FieldElem, i: u32, j: u32) -> Self {
        Self::from_terms(ctx, [((i, j), c)])
    }

    pub fn constant(ctx: &FieldCtx, c: FieldElem) -> Self {
        Self::monomial(ctx, c, 0, 0)
    }

    /// Sum of terms; repeated monomials are added.
    pub fn from_terms(ctx: &FieldCtx, terms: impl IntoIterator<Item = ((u32, u32), FieldElem)>) -> Self {
        let mut p = Self::zero(ctx);
        for (mono, c) in terms {
            p.add_term(mono, c);
        }
        p
    }

    pub fn add_term(&mut self, mono: (u32, u32), c: FieldElem) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(mono).or_insert(FieldElem::ZERO);
        *e = self.ctx.add(*e, c);
        if e.is_zero() {
            self.terms.remove(&mono);
        }
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, i: u32, j: u32) -> FieldElem {
        self.terms.get(&(i, j)).copied().unwrap_or(FieldElem::ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), FieldElem)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Degree in the first variable (`t`, or `x`).
    pub fn deg_t(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, _)| i).max()
    }

    /// Degree in the second variable (`X`, or `y`).
    pub fn deg_x(&self) -> Option<u32> {
        self.terms.keys().map(|&(_, j)| j).max()
    }

    /// Leading monomial and coefficient under graded-lex with X > t.
    pub fn leading(&self) -> Option<((u32, u32), FieldElem)> {
        self.terms.iter().max_by_key(|(m, _)| grlex_key(m)).map(|(&m, &c)| (m, c))
    }

    /// Scalar multiple with leading coefficient 1.
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => self.scale(self.ctx.inv(c).expect("nonzero leading coefficient")),
        }
    }

    pub fn scale(&self, c: FieldElem) -> Self {
        Self::from_terms(&self.ctx, self.terms().map(|(m, a)| (m, self.ctx.mul(a, c))))
    }

    /// Whether `other = c * self` for some nonzero scalar `c`.
    pub fn eq_up_to_scalar(&self, other: &Self) -> bool {
        self.ctx == other.ctx && self.monic() == other.monic()
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        let mut p = self.clone();
        for (m, c) in other.terms() {
            p.add_term(m, c);
        }
        Ok(p)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        let mut p = Self::zero(&self.ctx);
        for ((i, j), a) in self.terms() {
            for ((k, l), b) in other.terms() {
                p.add_term((i + k, j + l), self.ctx.mul(a, b));
            }
        }
        Ok(p)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(&self.ctx, FieldElem::ONE);
        for _ in 0..e {
            acc = acc.checked_mul(self).expect("same context");
        }
        acc
    }

    /// Partial derivative in the second variable.
    pub fn deriv_x(&self) -> Self {
        Self::from_terms(&self.ctx, self.terms().filter(|((_, j), _)| j % 2 == 1).map(|((i, j), c)| ((i, j - 1), c)))
    }

    /// Coefficientwise 2-Frobenius.
    pub fn frobenius(&self) -> Self {
        Self::from_terms(&self.ctx, self.terms().map(|(m, c)| (m, self.ctx.frobenius(c))))
    }

    /// `f(xy, y)`: `t^i X^j` becomes `x^i y^(i+j)`.
    pub fn subst_diagonal(&self) -> Self {
        Self::from_terms(&self.ctx, self.terms().map(|((i, j), c)| ((i, i + j), c)))
    }

    /// Exact division by `y^k`; `None` if some term has lower `y`-degree.
    pub fn div_y_pow(&self, k: u32) -> Option<Self> {
        if self.terms.keys().any(|&(_, j)| j < k) {
            return None;
        }
        Some(Self::from_terms(&self.ctx, self.terms().map(|((i, j), c)| ((i, j - k), c))))
    }

    pub fn eval(&self, t: FieldElem, x: FieldElem) -> FieldElem {
        self.terms().fold(FieldElem::ZERO, |acc, ((i, j), c)| {
            let v = self.ctx.mul(c, self.ctx.mul(self.ctx.pow(t, i as u64), self.ctx.pow(x, j as u64)));
            self.ctx.add(acc, v)
        })
    }

    /// Coefficient of `X^j` as a polynomial in `t`, exact to `prec`.
    pub fn t_coeff_series(&self, j: u32, prec: i64) -> LaurentSeries {
        let terms: Vec<(i64, FieldElem)> =
            self.terms().filter(|&((_, jj), _)| jj == j).map(|((i, _), c)| (i as i64, c)).collect();
        LaurentSeries::from_terms(&self.ctx, &terms, prec)
    }

    /// View as a polynomial in `X` with `t`-series coefficients.
    pub fn to_zpoly(&self, prec: i64) -> ZPoly {
        let dx = self.deg_x().unwrap_or(0);
        ZPoly::new((0..=dx).map(|j| self.t_coeff_series(j, prec)).collect())
    }

    /// `f(t, y(t))`.
    pub fn eval_series(&self, y: &LaurentSeries) -> Result<LaurentSeries> {
        let prec = y.prec().max(1) + 64;
        self.to_zpoly(prec).eval(y)
    }

    /// Parse text such as `(t^2+1)*X^2 + X + s*t^2 + t`. Juxtaposition
    /// multiplies, `x` is read as `X`, `-` as `+`, `s2` as `s^2`.
    pub fn parse(ctx: &FieldCtx, text: &str) -> Result<Self> {
        let toks = tokenize(text)?;
        let mut p = Parser { ctx, toks, pos: 0 };
        let out = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(Error::PolyParse(format!("unexpected `{}`", p.toks[p.pos])));
        }
        Ok(out)
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson { terms: self.terms().map(|((i, j), c)| (i, j, self.ctx.token(c))).collect() }
    }

    pub fn from_json(ctx: &FieldCtx, j: &PolyJson) -> Result<Self> {
        let mut p = Self::zero(ctx);
        for (i, jj, tok) in &j.terms {
            p.add_term((*i, *jj), ctx.parse_token(tok)?);
        }
        Ok(p)
    }
}

/// Sparse JSON form: `[t-exponent, X-exponent, coefficient token]` triples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyJson {
    pub terms: Vec<(u32, u32, String)>,
}

fn fmt_t_part(ctx: &FieldCtx, c: FieldElem, i: u32) -> String {
    let mono = match i {
        0 => return ctx.token(c),
        1 => "t".to_string(),
        _ => format!("t^{i}"),
    };
    if c == FieldElem::ONE {
        mono
    } else {
        format!("{}*{mono}", ctx.token(c))
    }
}

impl fmt::Display for BivarPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut by_x: BTreeMap<u32, Vec<(u32, FieldElem)>> = BTreeMap::new();
        for ((i, j), c) in self.terms() {
            by_x.entry(j).or_default().push((i, c));
        }
        let mut parts = Vec::new();
        for (&j, col) in by_x.iter().rev() {
            let mut col = col.clone();
            col.sort_by_key(|c| std::cmp::Reverse(c.0));
            let xs = match j {
                1 => "X".to_string(),
                _ => format!("X^{j}"),
            };
            if j == 0 {
                parts.extend(col.iter().map(|&(i, c)| fmt_t_part(&self.ctx, c, i)));
            } else if col.len() == 1 {
                let (i, c) = col[0];
                if i == 0 && c == FieldElem::ONE {
                    parts.push(xs);
                } else {
                    parts.push(format!("{}*{xs}", fmt_t_part(&self.ctx, c, i)));
                }
            } else {
                let inner: Vec<String> = col.iter().map(|&(i, c)| fmt_t_part(&self.ctx, c, i)).collect();
                parts.push(format!("({})*{xs}", inner.join("+")));
            }
        }
        f.write_str(&parts.join(" + "))
    }
}

impl fmt::Debug for BivarPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(u64),
    S,
    T,
    X,
    Plus,
    Star,
    Caret,
    LParen,
    RParen,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(n) => write!(f, "{n}"),
            Tok::S => f.write_str("s"),
            Tok::T => f.write_str("t"),
            Tok::X => f.write_str("X"),
            Tok::Plus => f.write_str("+"),
            Tok::Star => f.write_str("*"),
            Tok::Caret => f.write_str("^"),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let ch = chars[k];
        k += 1;
        match ch {
            c if c.is_whitespace() => {}
            '+' | '-' => out.push(Tok::Plus),
            '*' => out.push(Tok::Star),
            '^' => out.push(Tok::Caret),
            '(' => out.push(Tok::LParen),
            ')' => out.push(Tok::RParen),
            't' => out.push(Tok::T),
            'X' | 'x' => out.push(Tok::X),
            's' => {
                out.push(Tok::S);
                if chars.get(k) == Some(&'2') {
                    k += 1;
                    out.push(Tok::Caret);
                    out.push(Tok::Num(2));
                }
            }
            d if d.is_ascii_digit() => {
                let mut n = d.to_digit(10).unwrap() as u64;
                while let Some(e) = chars.get(k).and_then(|c| c.to_digit(10)) {
                    n = n
                        .checked_mul(10)
                        .and_then(|n| n.checked_add(e as u64))
                        .ok_or_else(|| Error::PolyParse("number too large".into()))?;
                    k += 1;
                }
                out.push(Tok::Num(n));
            }
            other => return Err(Error::PolyParse(format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    ctx: &'a FieldCtx,
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn expr(&mut self) -> Result<BivarPoly> {
        if self.peek() == Some(&Tok::Plus) {
            self.pos += 1;
        }
        let mut acc = self.term()?;
        while self.peek() == Some(&Tok::Plus) {
            self.pos += 1;
            acc = acc.checked_add(&self.term()?)?;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<BivarPoly> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc.checked_mul(&self.factor()?)?;
                }
                Some(Tok::Num(_) | Tok::S | Tok::T | Tok::X | Tok::LParen) => {
                    acc = acc.checked_mul(&self.factor()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<BivarPoly> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            match self.toks.get(self.pos) {
                Some(Tok::Num(e)) => {
                    let e = u32::try_from(*e).map_err(|_| Error::PolyParse("exponent too large".into()))?;
                    self.pos += 1;
                    return Ok(base.pow(e));
                }
                other => return Err(Error::PolyParse(format!("expected exponent, found {other:?}"))),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<BivarPoly> {
        let ctx = self.ctx;
        let tok = self.toks.get(self.pos).cloned().ok_or_else(|| Error::PolyParse("unexpected end of input".into()))?;
        self.pos += 1;
        Ok(match tok {
            Tok::Num(n) => BivarPoly::constant(ctx, if n % 2 == 1 { FieldElem::ONE } else { FieldElem::ZERO }),
            Tok::S => BivarPoly::constant(ctx, ctx.gen()),
            Tok::T => BivarPoly::monomial(ctx, FieldElem::ONE, 1, 0),
            Tok::X => BivarPoly::monomial(ctx, FieldElem::ONE, 0, 1),
            Tok::LParen => {
                let inner = self.expr()?;
                if self.toks.get(self.pos) != Some(&Tok::RParen) {
                    return Err(Error::PolyParse("missing `)`".into()));
                }
                self.pos += 1;
                inner
            }
            other => return Err(Error::PolyParse(format!("unexpected `{other}`"))),
        })
    }
}
