//! Truncated Laurent series over GF(2^m) with absolute precision tracking,
//! substitution, and the Nottingham group.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::bitpoly::mul_trunc;
use crate::error::{Error, Result};
use crate::gf2m::{FieldCtx, FieldElem};

/// Default working precision (number of known coefficients).
pub const DEFAULT_PRECISION: i64 = 4096;

/// `sum a_n t^n` known exactly for every `n < prec`.
///
/// Stored normalized: `coeffs[0]` is nonzero unless the series is zero to
/// its precision, in which case `start == prec` and `coeffs` is empty.
#[derive(Clone, PartialEq, Eq)]
pub struct LaurentSeries {
    ctx: FieldCtx,
    start: i64,
    prec: i64,
    coeffs: Vec<FieldElem>,
}

impl LaurentSeries {
    /// Series with `coeffs[k]` at exponent `start + k`; entries at or beyond
    /// `prec` are dropped and missing ones below `prec` are zero.
    pub fn new(ctx: &FieldCtx, start: i64, mut coeffs: Vec<FieldElem>, prec: i64) -> Self {
        let keep = (prec - start).max(0) as usize;
        coeffs.truncate(keep);
        coeffs.resize(keep, FieldElem::ZERO);
        match coeffs.iter().position(|c| !c.is_zero()) {
            None => Self::zero(ctx, prec),
            Some(lead) => {
                coeffs.drain(..lead);
                LaurentSeries { ctx: ctx.clone(), start: start + lead as i64, prec, coeffs }
            }
        }
    }

    pub fn zero(ctx: &FieldCtx, prec: i64) -> Self {
        LaurentSeries { ctx: ctx.clone(), start: prec, prec, coeffs: Vec::new() }
    }

    pub fn monomial(ctx: &FieldCtx, c: FieldElem, e: i64, prec: i64) -> Self {
        Self::new(ctx, e, vec![c], prec)
    }

    pub fn one(ctx: &FieldCtx, prec: i64) -> Self {
        Self::monomial(ctx, FieldElem::ONE, 0, prec)
    }

    /// The uniformizer `t`.
    pub fn var(ctx: &FieldCtx, prec: i64) -> Self {
        Self::monomial(ctx, FieldElem::ONE, 1, prec)
    }

    /// Finite sum of terms `c t^e`.
    pub fn from_terms(ctx: &FieldCtx, terms: &[(i64, FieldElem)], prec: i64) -> Self {
        let Some(lo) = terms.iter().map(|&(e, _)| e).min() else {
            return Self::zero(ctx, prec);
        };
        let hi = terms.iter().map(|&(e, _)| e).max().unwrap_or(lo);
        let mut v = vec![FieldElem::ZERO; (hi - lo + 1) as usize];
        for &(e, c) in terms {
            let slot = &mut v[(e - lo) as usize];
            *slot = ctx.add(*slot, c);
        }
        Self::new(ctx, lo, v, prec)
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    /// Valuation, or `None` if the series vanishes to its precision.
    pub fn val(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.start)
        }
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `t^n`. Panics if `n >= prec`.
    pub fn coeff(&self, n: i64) -> FieldElem {
        assert!(n < self.prec, "coefficient t^{n} beyond precision {}", self.prec);
        if n < self.start {
            FieldElem::ZERO
        } else {
            self.coeffs[(n - self.start) as usize]
        }
    }

    /// Coefficients of `t^lo .. t^hi`.
    pub fn dense(&self, lo: i64, hi: i64) -> Vec<FieldElem> {
        assert!(hi <= self.prec, "range end {hi} beyond precision {}", self.prec);
        (lo..hi).map(|n| self.coeff(n)).collect()
    }

    /// Stored coefficients from the valuation up to the precision.
    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    pub fn truncate(&self, prec: i64) -> Self {
        if prec >= self.prec {
            return self.clone();
        }
        Self::new(&self.ctx, self.start, self.coeffs.clone(), prec)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.ctx == other.ctx {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let prec = self.prec.min(other.prec);
        let lo = self.start.min(other.start).min(prec);
        let mut v = vec![FieldElem::ZERO; (prec - lo) as usize];
        for s in [self, other] {
            for (k, c) in s.coeffs.iter().enumerate() {
                let e = s.start + k as i64;
                if e >= prec {
                    break;
                }
                v[(e - lo) as usize].0 ^= c.0;
            }
        }
        Ok(Self::new(&self.ctx, lo, v, prec))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let prec = (self.start + other.prec).min(other.start + self.prec);
        let base = self.start + other.start;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(&self.ctx, prec));
        }
        let n = (prec - base).max(0) as usize;
        let c = mul_trunc(&self.ctx, &self.coeffs, &other.coeffs, n);
        Ok(Self::new(&self.ctx, base, c, prec))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        self.checked_mul(&other.inverse()?)
    }

    /// Multiplicative inverse; the valuation is negated and the relative
    /// precision preserved.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let ctx = &self.ctx;
        let r = self.coeffs.len();
        let u = &self.coeffs;
        let mut g = vec![ctx.inv(u[0])?];
        let mut cur = 1;
        while cur < r {
            let nxt = (2 * cur).min(r);
            let mut e = mul_trunc(ctx, &u[..nxt], &g, nxt);
            e[0].0 ^= 1;
            let corr = mul_trunc(ctx, &g, &e, nxt);
            g.resize(nxt, FieldElem::ZERO);
            for (gi, ci) in g.iter_mut().zip(&corr) {
                gi.0 ^= ci.0;
            }
            cur = nxt;
        }
        Ok(Self::new(ctx, -self.start, g, -self.start + r as i64))
    }

    pub fn scale(&self, c: FieldElem) -> Self {
        let v = self.coeffs.iter().map(|&a| self.ctx.mul(a, c)).collect();
        Self::new(&self.ctx, self.start, v, self.prec)
    }

    /// Multiply by `t^k`.
    pub fn shift(&self, k: i64) -> Self {
        LaurentSeries { ctx: self.ctx.clone(), start: self.start + k, prec: self.prec + k, coeffs: self.coeffs.clone() }
    }

    /// Squaring is additive in characteristic 2, so the precision doubles.
    pub fn square(&self) -> Self {
        if self.is_zero() {
            return Self::zero(&self.ctx, 2 * self.prec);
        }
        let mut v = vec![FieldElem::ZERO; 2 * self.coeffs.len()];
        for (k, &c) in self.coeffs.iter().enumerate() {
            v[2 * k] = self.ctx.mul(c, c);
        }
        Self::new(&self.ctx, 2 * self.start, v, 2 * self.prec)
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        if e < 0 {
            return self.inverse()?.pow(-e);
        }
        if e == 0 {
            return Ok(Self::one(&self.ctx, self.prec - self.start.min(self.prec)));
        }
        let mut base = self.clone();
        let mut acc: Option<Self> = None;
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.checked_mul(&base)?,
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.checked_mul(&base)?;
            }
        }
        Ok(acc.expect("positive exponent"))
    }

    /// Formal derivative d/dt.
    pub fn derivative(&self) -> Self {
        let v = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| if (self.start + k as i64).rem_euclid(2) == 1 { c } else { FieldElem::ZERO })
            .collect();
        Self::new(&self.ctx, self.start - 1, v, self.prec - 1)
    }

    /// Apply the 2-Frobenius to every coefficient.
    pub fn frobenius_coeffs(&self) -> Self {
        let v = self.coeffs.iter().map(|&c| self.ctx.frobenius(c)).collect();
        Self::new(&self.ctx, self.start, v, self.prec)
    }

    /// Substitute `psi` (valuation exactly 1) for `t`.
    ///
    /// For `val(self) >= 0` the result is exact to `min(prec(self), prec(psi))`;
    /// for negative valuation `v` to `min(prec(self), v + prec(psi) - 1)`.
    pub fn compose(&self, psi: &LaurentSeries) -> Result<Self> {
        self.check(psi)?;
        if psi.val() != Some(1) {
            return Err(Error::NotNottingham(format!("substituted series has valuation {:?}, expected 1", psi.val())));
        }
        let ctx = &self.ctx;
        if self.is_zero() {
            return Ok(Self::zero(ctx, self.prec));
        }
        let v = self.start;
        if v >= 0 {
            let prec = self.prec.min(psi.prec);
            let u = self.dense(0, prec);
            let p = psi.dense(0, prec);
            let out = compose_ps(ctx, &u, &p, prec as usize);
            return Ok(Self::new(ctx, 0, out, prec));
        }
        let rel = self.prec - v;
        let uprec = rel.min(psi.prec);
        let p = psi.dense(0, uprec);
        let out = compose_ps(ctx, &self.coeffs, &p, uprec as usize);
        let upsi = Self::new(ctx, 0, out, uprec);
        upsi.checked_mul(&psi.pow(v)?)
    }

    /// Least exponent where `self` and `other` differ, or their common
    /// precision if they agree throughout it.
    pub fn first_difference(&self, other: &Self) -> i64 {
        let prec = self.prec.min(other.prec);
        let lo = self.start.min(other.start);
        (lo..prec).find(|&n| self.coeff(n) != other.coeff(n)).unwrap_or(prec)
    }

    /// Equality on the shared known prefix.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.ctx == other.ctx && self.first_difference(other) >= self.prec.min(other.prec)
    }

    /// Render nonzero terms, at most `max_terms` of them, followed by the
    /// error term.
    pub fn to_string_terms(&self, max_terms: usize) -> String {
        let mut parts = Vec::new();
        let mut shown = 0;
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if shown == max_terms {
                parts.push("...".to_string());
                break;
            }
            parts.push(term(&self.ctx, c, self.start + k as i64));
            shown += 1;
        }
        if shown < max_terms {
            parts.push(format!("O(t^{})", self.prec));
        }
        parts.join(" + ")
    }

    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            val: self.start,
            prec: self.prec,
            coeffs: self.coeffs.iter().map(|&c| self.ctx.token(c)).collect(),
        }
    }

    pub fn from_json(ctx: &FieldCtx, j: &SeriesJson) -> Result<Self> {
        let coeffs = j.coeffs.iter().map(|tok| ctx.parse_token(tok)).collect::<Result<Vec<_>>>()?;
        Ok(Self::new(ctx, j.val, coeffs, j.prec))
    }
}

fn term(ctx: &FieldCtx, c: FieldElem, e: i64) -> String {
    let tok = ctx.token(c);
    let mono = match e {
        0 => return tok,
        1 => "t".to_string(),
        _ => format!("t^{e}"),
    };
    if c == FieldElem::ONE {
        mono
    } else {
        format!("{tok}*{mono}")
    }
}

/// Serialized form: coefficient tokens starting at `val`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub val: i64,
    pub prec: i64,
    pub coeffs: Vec<String>,
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_terms(usize::MAX))
    }
}

impl fmt::Debug for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_terms(12))
    }
}

/// `u(psi) mod t^n` for power series `u` and `psi` with `psi(0) = 0`.
///
/// Splits `u = sum_r t^r U_r(t^q)`; since coefficients lie in GF(q),
/// `U_r(psi^q) = (U_r o psi)(t^q)`, which only needs `ceil(n/q)` terms.
fn compose_ps(ctx: &FieldCtx, u: &[FieldElem], psi: &[FieldElem], n: usize) -> Vec<FieldElem> {
    if n == 0 {
        return Vec::new();
    }
    let mut u = &u[..u.len().min(n)];
    while let Some((last, rest)) = u.split_last() {
        if last.is_zero() {
            u = rest;
        } else {
            break;
        }
    }
    let psi = &psi[..psi.len().min(n)];
    if u.len() <= 8 {
        let mut acc = vec![FieldElem::ZERO; n];
        for &c in u.iter().rev() {
            acc = mul_trunc(ctx, &acc, psi, n);
            acc[0].0 ^= c.0;
        }
        return acc;
    }
    let q = ctx.q();
    let sub_n = n.div_ceil(q);
    let mut result = vec![FieldElem::ZERO; n];
    let mut psi_pow = vec![FieldElem::ONE];
    for r in 0..q {
        if r > 0 {
            psi_pow = mul_trunc(ctx, &psi_pow, psi, n);
        }
        let ur: Vec<FieldElem> = u.iter().skip(r).step_by(q).copied().collect();
        if ur.iter().all(|c| c.is_zero()) {
            continue;
        }
        let vr = compose_ps(ctx, &ur, psi, sub_n);
        let mut spread = vec![FieldElem::ZERO; n];
        for (i, c) in vr.into_iter().enumerate() {
            if q * i < n {
                spread[q * i] = c;
            }
        }
        let prod = mul_trunc(ctx, &psi_pow, &spread, n);
        for (a, b) in result.iter_mut().zip(prod) {
            a.0 ^= b.0;
        }
    }
    result
}

macro_rules! binop {
    ($tr:ident, $f:ident, $call:ident) => {
        impl $tr<&LaurentSeries> for &LaurentSeries {
            type Output = LaurentSeries;
            fn $f(self, rhs: &LaurentSeries) -> LaurentSeries {
                self.$call(rhs).expect(concat!("series ", stringify!($f)))
            }
        }
        impl $tr<LaurentSeries> for LaurentSeries {
            type Output = LaurentSeries;
            fn $f(self, rhs: LaurentSeries) -> LaurentSeries {
                (&self).$f(&rhs)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_add);
binop!(Mul, mul, checked_mul);
binop!(Div, div, checked_div);

impl Neg for &LaurentSeries {
    type Output = LaurentSeries;
    fn neg(self) -> LaurentSeries {
        self.clone()
    }
}

/// Depth `v(phi - t) - 1`, or a lower bound when `phi` agrees with the
/// identity to working precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Depth {
    Finite(i64),
    AtLeast(i64),
}

impl fmt::Display for Depth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Depth::Finite(d) => write!(f, "{d}"),
            Depth::AtLeast(d) => write!(f, ">={d}"),
        }
    }
}

/// An element `t + a_2 t^2 + ...` of the Nottingham group.
#[derive(Clone, PartialEq, Eq)]
pub struct NottinghamElem(LaurentSeries);

impl NottinghamElem {
    pub fn new(s: LaurentSeries) -> Result<Self> {
        if s.prec < 2 {
            return Err(Error::InsufficientPrecision(format!("need precision >= 2, have {}", s.prec)));
        }
        if s.val() != Some(1) || s.coeff(1) != FieldElem::ONE {
            return Err(Error::NotNottingham(s.to_string_terms(4)));
        }
        Ok(NottinghamElem(s))
    }

    pub fn identity(ctx: &FieldCtx, prec: i64) -> Self {
        NottinghamElem(LaurentSeries::var(ctx, prec))
    }

    pub fn series(&self) -> &LaurentSeries {
        &self.0
    }

    pub fn into_series(self) -> LaurentSeries {
        self.0
    }

    pub fn prec(&self) -> i64 {
        self.0.prec
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.0.ctx
    }

    /// `self o other`, i.e. `self(other(t))`.
    pub fn compose(&self, other: &NottinghamElem) -> Result<NottinghamElem> {
        Ok(NottinghamElem(self.0.compose(&other.0)?))
    }

    /// Group inverse, by Newton iteration on `phi(psi) = t`.
    pub fn inverse(&self) -> Result<NottinghamElem> {
        let phi = &self.0;
        let p = phi.prec;
        let t = LaurentSeries::var(&phi.ctx, p);
        let dphi = phi.derivative();
        let mut psi = t.clone();
        for _ in 0..128 {
            let r = phi.compose(&psi)?.checked_add(&t)?;
            if r.is_zero() {
                return Ok(NottinghamElem(psi));
            }
            let d = dphi.compose(&psi)?;
            psi = psi.checked_add(&r.checked_div(&d)?)?.truncate(p);
        }
        Err(Error::Verification("compositional inverse did not converge".into()))
    }

    pub fn depth(&self) -> Depth {
        let t = LaurentSeries::var(&self.0.ctx, self.0.prec);
        let d = &self.0 - &t;
        match d.val() {
            Some(v) => Depth::Finite(v - 1),
            None => Depth::AtLeast(self.0.prec - 1),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.depth(), Depth::AtLeast(_))
    }

    pub fn frobenius_coeffs(&self) -> NottinghamElem {
        NottinghamElem(self.0.frobenius_coeffs())
    }

    pub fn truncate(&self, prec: i64) -> NottinghamElem {
        NottinghamElem(self.0.truncate(prec.max(2)))
    }
}

impl fmt::Display for NottinghamElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Debug for NottinghamElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&self.0, f)
    }
}

/// Polynomial `sum_k c_k(t) Z^k` with series coefficients.
#[derive(Debug, Clone)]
pub struct ZPoly {
    pub coeffs: Vec<LaurentSeries>,
}

impl ZPoly {
    pub fn new(coeffs: Vec<LaurentSeries>) -> Self {
        ZPoly { coeffs }
    }

    pub fn eval(&self, z: &LaurentSeries) -> Result<LaurentSeries> {
        let mut it = self.coeffs.iter().rev();
        let Some(top) = it.next() else {
            return Ok(LaurentSeries::zero(z.ctx(), z.prec()));
        };
        let mut acc = top.clone();
        for c in it {
            acc = acc.checked_mul(z)?.checked_add(c)?;
        }
        Ok(acc)
    }

    pub fn derivative(&self) -> ZPoly {
        let ctx = self.coeffs.first().map(|c| c.ctx().clone()).unwrap_or_else(FieldCtx::gf2);
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| if k % 2 == 1 { c.clone() } else { LaurentSeries::zero(&ctx, c.prec()) })
            .collect();
        ZPoly { coeffs }
    }

    /// The root `Z` with positive valuation, to precision `n`, by Newton
    /// iteration from `Z = 0`. Needs `P(t,0)` of positive valuation and
    /// `dP/dZ(t,0)` a unit.
    pub fn newton_root(&self, n: i64) -> Result<LaurentSeries> {
        let Some(c0) = self.coeffs.first() else {
            return Err(Error::NonContractive("empty polynomial".into()));
        };
        let ctx = c0.ctx().clone();
        let dp = self.derivative();
        // Precision doubles with the number of correct terms.
        let mut cur = n.min(16);
        let at = |p: &ZPoly, cur: i64| ZPoly::new(p.coeffs.iter().map(|c| c.truncate(cur)).collect());
        let (mut f, mut df) = (at(self, cur), at(&dp, cur));
        let mut z = LaurentSeries::zero(&ctx, cur);
        let mut last = 0;
        for _ in 0..512 {
            let r = f.eval(&z)?.truncate(cur);
            if r.prec() < cur {
                return Err(Error::InsufficientPrecision(format!(
                    "equation known to t^{}, root requested to t^{n}",
                    r.prec()
                )));
            }
            let v = match r.val() {
                None if cur == n => return Ok(z),
                None => {
                    cur = (2 * cur).min(n);
                    (f, df) = (at(self, cur), at(&dp, cur));
                    z = LaurentSeries::new(&ctx, 0, z.dense(0, z.prec()), cur);
                    continue;
                }
                Some(v) => v,
            };
            if v <= last {
                return Err(Error::NonContractive(format!("residual valuation stalled at {v}")));
            }
            last = v;
            let d = df.eval(&z)?;
            if d.val() != Some(0) {
                return Err(Error::NonContractive(format!("derivative has valuation {:?}", d.val())));
            }
            z = z.checked_add(&r.checked_div(&d)?)?.truncate(cur);
        }
        Err(Error::NonContractive("no convergence".into()))
    }
}

/// Unique `Z` in `t GF(q)[[t]]` with `Z = rhs(t, Z)`, exact to precision `n`.
pub fn solve_contractive(rhs: &ZPoly, n: i64) -> Result<LaurentSeries> {
    for (k, c) in rhs.coeffs.iter().enumerate() {
        if let Some(v) = c.val() {
            if v < 1 {
                return Err(Error::NonContractive(format!("coefficient of Z^{k} has valuation {v}")));
            }
        }
    }
    let Some(first) = rhs.coeffs.first() else {
        return Err(Error::NonContractive("empty right-hand side".into()));
    };
    let ctx = first.ctx().clone();
    let mut g = rhs.coeffs.clone();
    if g.len() < 2 {
        g.resize(2, LaurentSeries::zero(&ctx, n));
    }
    g[1] = g[1].checked_add(&LaurentSeries::one(&ctx, n))?;
    ZPoly::new(g).newton_root(n)
}
