//! Recovering annihilating polynomials `f(t, X)` of algebraic series from
//! their truncations, by exact linear algebra over GF(q).

use crate::error::{Error, Result};
use crate::gf2m::{FieldCtx, FieldElem};
use crate::poly::BivarPoly;
use crate::series::LaurentSeries;

/// Extra rows required beyond the number of unknowns.
pub const MARGIN: usize = 16;

/// Monomials `t^i X^j` in the box, ascending in graded-lex with X > t.
fn box_monomials(dx: u32, dt: u32) -> Vec<(u32, u32)> {
    let mut m: Vec<(u32, u32)> = (0..=dt).flat_map(|i| (0..=dx).map(move |j| (i, j))).collect();
    m.sort_by_key(|&(i, j)| (i + j, j, i));
    m
}

struct Reducer {
    ctx: FieldCtx,
    /// Reduced vector, its pivot index, and its expression in the columns.
    rows: Vec<(Vec<FieldElem>, usize, Vec<FieldElem>)>,
}

impl Reducer {
    /// Reduce `v` (carrying combination `comb`) against the basis; returns
    /// the combination if `v` becomes zero.
    fn insert(&mut self, mut v: Vec<FieldElem>, mut comb: Vec<FieldElem>) -> Option<Vec<FieldElem>> {
        let ctx = &self.ctx;
        for (row, piv, rc) in &self.rows {
            let a = v[*piv];
            if a.is_zero() {
                continue;
            }
            for (x, &y) in v.iter_mut().zip(row) {
                *x = ctx.add(*x, ctx.mul(a, y));
            }
            for (x, &y) in comb.iter_mut().zip(rc) {
                *x = ctx.add(*x, ctx.mul(a, y));
            }
        }
        match v.iter().position(|c| !c.is_zero()) {
            None => Some(comb),
            Some(piv) => {
                let inv = ctx.inv(v[piv]).expect("nonzero pivot");
                for x in v.iter_mut() {
                    *x = ctx.mul(*x, inv);
                }
                for x in comb.iter_mut() {
                    *x = ctx.mul(*x, inv);
                }
                self.rows.push((v, piv, comb));
                None
            }
        }
    }
}

/// Nonzero `f` with `deg_X f <= dx`, `deg_t f <= dt` and
/// `f(t, y) = O(t^n)`, with the least possible leading monomial, made monic.
pub fn guess_annihilator(y: &LaurentSeries, dx: u32, dt: u32, n: usize) -> Result<BivarPoly> {
    let unknowns = ((dx + 1) * (dt + 1)) as usize;
    if n < unknowns + MARGIN {
        return Err(Error::InsufficientPrecision(format!("need at least {} terms, asked for {n}", unknowns + MARGIN)));
    }
    if (y.prec() as i128) < n as i128 {
        return Err(Error::InsufficientPrecision(format!("series known to t^{}, need t^{n}", y.prec())));
    }
    if y.val().is_some_and(|v| v < 0) {
        return Err(Error::InsufficientPrecision("series must be a power series".into()));
    }
    let ctx = y.ctx().clone();
    let n_i = n as i64;
    let mut ypow = vec![LaurentSeries::one(&ctx, n_i)];
    for j in 1..=dx as usize {
        ypow.push((&ypow[j - 1] * y).truncate(n_i));
    }
    let monos = box_monomials(dx, dt);
    let mut red = Reducer { ctx: ctx.clone(), rows: Vec::new() };
    for (k, &(i, j)) in monos.iter().enumerate() {
        let col = ypow[j as usize].dense(-(i as i64), n_i - i as i64);
        let mut comb = vec![FieldElem::ZERO; monos.len()];
        comb[k] = FieldElem::ONE;
        if let Some(rel) = red.insert(col, comb) {
            let f = BivarPoly::from_terms(&ctx, monos.iter().zip(rel).map(|(&m, c)| (m, c)));
            return Ok(f.monic());
        }
    }
    Err(Error::NoAnnihilator { dx, dt, n })
}

/// Valuation of `f(t, y(t))`; a value equal to the precision of `y` means
/// the residual vanishes to that precision.
pub fn verify_annihilator(f: &BivarPoly, y: &LaurentSeries) -> Result<i64> {
    let r = f.eval_series(y)?.truncate(y.prec());
    Ok(r.val().unwrap_or(r.prec()))
}

/// `f(0,0) = 0` and `df/dX(0,0) != 0`.
pub fn is_nonsingular(f: &BivarPoly) -> bool {
    f.coeff(0, 0).is_zero() && !f.coeff(0, 1).is_zero()
}

pub fn frobenius_poly(f: &BivarPoly) -> BivarPoly {
    f.frobenius()
}

/// The unique root `X = y(t)` with `y(0) = 0` of a nonsingular `f`, to
/// precision `n`.
pub fn series_root(f: &BivarPoly, n: i64) -> Result<LaurentSeries> {
    if !is_nonsingular(f) {
        return Err(Error::Singular);
    }
    f.to_zpoly(n).newton_root(n)
}
