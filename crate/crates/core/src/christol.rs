//! From algebraic series to automata: diagonal representations, the Cartier
//! kernel closure, and a precision-bounded kernel closure for series known
//! only through their coefficients.

use std::collections::{HashMap, VecDeque};
use std::time::Instant;

use serde::Serialize;

use crate::dfao::{Dfao, State};
use crate::error::{Error, Result};
use crate::gf2m::{FieldCtx, FieldElem};
use crate::minpoly::{is_nonsingular, series_root};
use crate::poly::BivarPoly;
use crate::series::LaurentSeries;

/// Terms compared by the mandatory brute-force check of a diagonal.
pub const VALIDATION_TERMS: usize = 64;
pub const DEFAULT_VERIFY: usize = 4096;
pub const DEFAULT_PROBE_LEN: usize = 4096;
pub const DEFAULT_ORACLE_N: u64 = 1 << 20;
/// Shortest window on which two kernel sequences may be identified.
pub const MIN_WINDOW: usize = 16;

/// `a_n = [x^n y^n] P/Q`. Exponent `i` of a term belongs to `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalRep {
    pub p: BivarPoly,
    pub q: BivarPoly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Diagonal,
    OracleKernel,
}

#[derive(Debug, Clone)]
pub struct SynthesisReport {
    pub automaton: Dfao,
    pub raw_state_count: usize,
    pub minimized_state_count: usize,
    pub verified_prefix: u64,
    pub method: Method,
    pub millis: f64,
}

#[derive(Serialize)]
struct ReportJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    method: Method,
    raw_state_count: usize,
    minimized_state_count: usize,
    verified_prefix: u64,
    millis: f64,
    automaton: crate::dfao::DfaoJson,
}

impl SynthesisReport {
    fn json(&self, label: Option<&str>) -> ReportJson {
        ReportJson {
            method: self.method,
            raw_state_count: self.raw_state_count,
            minimized_state_count: self.minimized_state_count,
            verified_prefix: self.verified_prefix,
            millis: self.millis,
            automaton: self.automaton.to_json(),
            label: label.map(str::to_string),
        }
    }

    pub fn to_json(&self, label: Option<&str>) -> serde_json::Value {
        serde_json::to_value(self.json(label)).expect("serializable")
    }

    /// Counts first, then the automaton.
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.json(None)).expect("serializable")
    }
}

impl DiagonalRep {
    pub fn new(p: BivarPoly, q: BivarPoly) -> Result<Self> {
        if p.ctx() != q.ctx() {
            return Err(Error::ContextMismatch);
        }
        if q.coeff(0, 0).is_zero() {
            return Err(Error::Singular);
        }
        Ok(DiagonalRep { p, q })
    }

    pub fn ctx(&self) -> &FieldCtx {
        self.q.ctx()
    }

    /// Degree box `(Dx, Dy)` containing `P`, `Q` and every Cartier image.
    pub fn bounds(&self) -> (u32, u32) {
        let dx = self.p.deg_t().unwrap_or(0).max(self.q.deg_t().unwrap_or(0));
        let dy = self.p.deg_x().unwrap_or(0).max(self.q.deg_x().unwrap_or(0));
        (dx, dy)
    }

    /// Compare the brute-force diagonal with `target` on the first `n`
    /// coefficients.
    pub fn validate(&self, target: &LaurentSeries, n: usize) -> Result<()> {
        if (target.prec() as i128) < n as i128 {
            return Err(Error::InsufficientPrecision(format!("target known to t^{}, need t^{n}", target.prec())));
        }
        let diag = brute_force_diagonal(self, n);
        match (0..n).find(|&k| diag[k] != target.coeff(k as i64)) {
            Some(k) => Err(Error::DiagonalMismatch(k)),
            None => Ok(()),
        }
    }
}

/// `P = y f_X(xy, y)`, `Q = f(xy, y) / y`, validated against the Newton
/// root of `f` on [`VALIDATION_TERMS`] coefficients.
pub fn furstenberg(f: &BivarPoly) -> Result<DiagonalRep> {
    if !is_nonsingular(f) {
        return Err(Error::Singular);
    }
    let ctx = f.ctx();
    let y = BivarPoly::monomial(ctx, FieldElem::ONE, 0, 1);
    let p = y.checked_mul(&f.deriv_x().subst_diagonal())?;
    let q = f.subst_diagonal().div_y_pow(1).ok_or(Error::Singular)?;
    let rep = DiagonalRep::new(p, q)?;
    let root = series_root(f, VALIDATION_TERMS as i64)?;
    rep.validate(&root, VALIDATION_TERMS)?;
    Ok(rep)
}

/// Diagonal for `N(t, Z)/D(t, Z)` at the nonsingular root `Z` of `f`:
/// `P = N(xy, y) f_X(xy, y)`, `Q = D(xy, y) f(xy, y) / y`. Needs
/// `D(0, 0) != 0`. Validated against the series it represents.
pub fn rational_diagonal(f: &BivarPoly, num: &BivarPoly, den: &BivarPoly) -> Result<DiagonalRep> {
    if !is_nonsingular(f) || den.coeff(0, 0).is_zero() {
        return Err(Error::Singular);
    }
    let p = num.subst_diagonal().checked_mul(&f.deriv_x().subst_diagonal())?;
    let q = den.subst_diagonal().checked_mul(&f.subst_diagonal().div_y_pow(1).ok_or(Error::Singular)?)?;
    let rep = DiagonalRep::new(p, q)?;
    let n = VALIDATION_TERMS as i64;
    let z = series_root(f, n + 8)?;
    let target = (num.eval_series(&z)? / den.eval_series(&z)?).truncate(n);
    rep.validate(&target, VALIDATION_TERMS)?;
    Ok(rep)
}

/// First `n` diagonal coefficients by direct expansion of `P/Q`.
pub fn brute_force_diagonal(rep: &DiagonalRep, n: usize) -> Vec<FieldElem> {
    let ctx = rep.ctx();
    let inv0 = ctx.inv(rep.q.coeff(0, 0)).expect("Q(0,0) != 0");
    let qterms: Vec<((usize, usize), FieldElem)> =
        rep.q.terms().filter(|&(m, _)| m != (0, 0)).map(|((i, j), c)| ((i as usize, j as usize), c)).collect();
    // s = 1/Q on the box [0, n) x [0, n).
    let mut s = vec![FieldElem::ZERO; n * n];
    for a in 0..n {
        for b in 0..n {
            let mut acc = if a == 0 && b == 0 { FieldElem::ONE } else { FieldElem::ZERO };
            for &((i, j), c) in &qterms {
                if i <= a && j <= b {
                    acc = ctx.add(acc, ctx.mul(c, s[(a - i) * n + (b - j)]));
                }
            }
            s[a * n + b] = ctx.mul(acc, inv0);
        }
    }
    (0..n)
        .map(|k| {
            rep.p.terms().fold(FieldElem::ZERO, |acc, ((i, j), c)| {
                let (i, j) = (i as usize, j as usize);
                if i <= k && j <= k {
                    ctx.add(acc, ctx.mul(c, s[(k - i) * n + (k - j)]))
                } else {
                    acc
                }
            })
        })
        .collect()
}

/// `Lambda_{r,r}(U Q^(q-1))`: keep exponents `(q a + r, q b + r)`, map them
/// to `(a, b)` and take `q`-th roots of the coefficients.
pub fn cartier(u: &BivarPoly, r: u32, q_poly: &BivarPoly) -> Result<BivarPoly> {
    let ctx = u.ctx();
    let q = ctx.q() as u32;
    let prod = u.checked_mul(&q_poly.pow(q - 1))?;
    Ok(BivarPoly::from_terms(
        ctx,
        prod.terms()
            .filter(|&((i, j), _)| i % q == r && j % q == r)
            .map(|((i, j), c)| (((i - r) / q, (j - r) / q), ctx.qth_root(c))),
    ))
}

/// Dense Cartier transitions on the degree box.
struct CartierMachine {
    ctx: FieldCtx,
    q: usize,
    dx: usize,
    dy: usize,
    /// `Q^(q-1)` as a dense grid with row length `qw`.
    qp: Vec<FieldElem>,
    qh: usize,
    qw: usize,
}

impl CartierMachine {
    fn new(rep: &DiagonalRep) -> Result<Self> {
        let ctx = rep.ctx().clone();
        let q = ctx.q();
        let (dx, dy) = rep.bounds();
        let (qdx, qdy) = (rep.q.deg_t().unwrap_or(0), rep.q.deg_x().unwrap_or(0));
        let stable = |d: u32, dq: u32| (d + (q as u32 - 1) * dq) / q as u32 <= d;
        if !stable(dx, qdx) || !stable(dy, qdy) {
            return Err(Error::UnstableBound(format!("box ({dx}, {dy}) is not Cartier-stable")));
        }
        let qpow = rep.q.pow(q as u32 - 1);
        let qh = qpow.deg_t().unwrap_or(0) as usize + 1;
        let qw = qpow.deg_x().unwrap_or(0) as usize + 1;
        let mut qp = vec![FieldElem::ZERO; qh * qw];
        for ((i, j), c) in qpow.terms() {
            qp[i as usize * qw + j as usize] = c;
        }
        Ok(CartierMachine { ctx, q, dx: dx as usize, dy: dy as usize, qp, qh, qw })
    }

    fn width(&self) -> usize {
        self.dy + 1
    }

    fn dense(&self, p: &BivarPoly) -> Vec<FieldElem> {
        let w = self.width();
        let mut v = vec![FieldElem::ZERO; (self.dx + 1) * w];
        for ((i, j), c) in p.terms() {
            v[i as usize * w + j as usize] = c;
        }
        v
    }

    fn step(&self, u: &[FieldElem], r: usize) -> Vec<FieldElem> {
        let ctx = &self.ctx;
        let w = self.width();
        let support: Vec<(usize, usize, FieldElem)> =
            u.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, &c)| (k / w, k % w, c)).collect();
        let mut out = vec![FieldElem::ZERO; u.len()];
        for a in 0..=self.dx {
            let ei = self.q * a + r;
            for b in 0..=self.dy {
                let ej = self.q * b + r;
                let mut acc = FieldElem::ZERO;
                for &(i, j, c) in &support {
                    if i <= ei && j <= ej && ei - i < self.qh && ej - j < self.qw {
                        acc = ctx.add(acc, ctx.mul(c, self.qp[(ei - i) * self.qw + (ej - j)]));
                    }
                }
                out[a * w + b] = ctx.qth_root(acc);
            }
        }
        out
    }
}

/// Kernel closure of a diagonal under the Cartier operators: states are the
/// distinct numerators `U` reached from `P`, explored breadth-first with
/// digits ascending. Not minimized.
pub fn diagonal_automaton(rep: &DiagonalRep, max_states: usize) -> Result<Dfao> {
    let m = CartierMachine::new(rep)?;
    let ctx = rep.ctx();
    let inv0 = ctx.inv(rep.q.coeff(0, 0))?;
    let start = m.dense(&rep.p);
    let mut index: HashMap<Vec<FieldElem>, usize> = HashMap::from([(start.clone(), 0)]);
    let mut polys = vec![start];
    let mut next: Vec<Vec<usize>> = Vec::new();
    let mut k = 0;
    while k < polys.len() {
        let mut row = Vec::with_capacity(m.q);
        for r in 0..m.q {
            let v = m.step(&polys[k], r);
            let id = match index.get(&v) {
                Some(&id) => id,
                None => {
                    if polys.len() >= max_states {
                        return Err(Error::StateBudget(max_states));
                    }
                    index.insert(v.clone(), polys.len());
                    polys.push(v);
                    polys.len() - 1
                }
            };
            row.push(id);
        }
        next.push(row);
        k += 1;
    }
    let states = polys.iter().zip(next).map(|(u, next)| State { next, out: ctx.mul(u[0], inv0) }).collect();
    Dfao::new(ctx, 0, states)
}

/// Default state budget for the Cartier closure.
pub const MAX_STATES: usize = 1 << 20;

fn synthesize(rep: &DiagonalRep, target: &LaurentSeries, n_verify: usize, started: Instant) -> Result<SynthesisReport> {
    let raw = diagonal_automaton(rep, MAX_STATES)?;
    let min = raw.minimize();
    let got = min.sequence(n_verify);
    if let Some(k) = (0..n_verify).find(|&k| got[k] != target.coeff(k as i64)) {
        return Err(Error::Verification(format!("automaton differs from the series at t^{k}")));
    }
    Ok(SynthesisReport {
        raw_state_count: raw.num_states(),
        minimized_state_count: min.num_states(),
        automaton: min,
        verified_prefix: n_verify as u64,
        method: Method::Diagonal,
        millis: started.elapsed().as_secs_f64() * 1e3,
    })
}

/// Automaton of the root `y = t + ...` of a nonsingular `f`, verified against
/// the Newton root on `n_verify` coefficients.
pub fn poly_to_automaton(f: &BivarPoly, n_verify: usize) -> Result<SynthesisReport> {
    let started = Instant::now();
    let rep = furstenberg(f)?;
    let root = series_root(f, n_verify as i64)?;
    synthesize(&rep, &root, n_verify, started)
}

/// Automaton of `N(t, Z)/D(t, Z)` where `Z` is the root of `f`, verified
/// against `target` on `n_verify` coefficients.
pub fn rational_to_automaton(
    f: &BivarPoly,
    num: &BivarPoly,
    den: &BivarPoly,
    target: &LaurentSeries,
    n_verify: usize,
) -> Result<SynthesisReport> {
    let started = Instant::now();
    let rep = rational_diagonal(f, num, den)?;
    if (target.prec() as i128) < n_verify as i128 {
        return Err(Error::InsufficientPrecision(format!("target known to t^{}", target.prec())));
    }
    synthesize(&rep, target, n_verify, started)
}

/// A sequence over GF(q) known on an index range `0 .. len()`.
pub trait SequenceOracle {
    fn ctx(&self) -> &FieldCtx;
    fn len(&self) -> u64;
    fn get(&self, n: u64) -> FieldElem;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl SequenceOracle for LaurentSeries {
    fn ctx(&self) -> &FieldCtx {
        LaurentSeries::ctx(self)
    }
    fn len(&self) -> u64 {
        self.prec().max(0) as u64
    }
    fn get(&self, n: u64) -> FieldElem {
        self.coeff(n as i64)
    }
}

/// Coefficient list as an oracle.
pub struct PrefixOracle {
    pub ctx: FieldCtx,
    pub values: Vec<FieldElem>,
}

impl SequenceOracle for PrefixOracle {
    fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }
    fn len(&self) -> u64 {
        self.values.len() as u64
    }
    fn get(&self, n: u64) -> FieldElem {
        self.values[n as usize]
    }
}

/// An automaton read as an oracle, truncated to `len` terms.
pub struct AutomatonOracle<'a> {
    pub automaton: &'a Dfao,
    pub len: u64,
}

impl SequenceOracle for AutomatonOracle<'_> {
    fn ctx(&self) -> &FieldCtx {
        self.automaton.ctx()
    }
    fn len(&self) -> u64 {
        self.len
    }
    fn get(&self, n: u64) -> FieldElem {
        self.automaton.eval(n)
    }
}

/// Kernel closure from coefficients alone. States are the subsequences
/// `n -> a(q^e n + c)`; two are identified when they agree on the first
/// `probe_len` terms available below `n` (at least [`MIN_WINDOW`]). The
/// candidate is certified by comparing its first `n` terms with the oracle.
pub fn oracle_kernel_automaton(
    oracle: &dyn SequenceOracle,
    n: u64,
    max_states: usize,
    probe_len: usize,
) -> Result<SynthesisReport> {
    let started = Instant::now();
    if oracle.len() < n {
        return Err(Error::InsufficientPrecision(format!("oracle knows {} terms, asked for {n}", oracle.len())));
    }
    let ctx = oracle.ctx().clone();
    let q = ctx.q() as u64;
    let probe_len = probe_len.max(MIN_WINDOW);
    let window = |stride: u128, c: u128| -> Option<Vec<FieldElem>> {
        if c >= n as u128 {
            return None;
        }
        let avail = ((n as u128 - 1 - c) / stride + 1).min(probe_len as u128) as usize;
        if avail < MIN_WINDOW {
            return None;
        }
        Some((0..avail as u128).map(|k| oracle.get((stride * k + c) as u64)).collect())
    };

    // (stride q^e, offset c, window)
    let mut states: Vec<(u128, u128, Vec<FieldElem>)> = Vec::new();
    let mut buckets: HashMap<Vec<FieldElem>, Vec<usize>> = HashMap::new();
    let w0 = window(1, 0).ok_or_else(|| Error::InsufficientPrecision("oracle too short".into()))?;
    buckets.entry(w0[..MIN_WINDOW].to_vec()).or_default().push(0);
    states.push((1, 0, w0));
    let mut next: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(k) = queue.pop_front() {
        let (stride, c) = (states[k].0, states[k].1);
        let mut row = Vec::with_capacity(q as usize);
        for d in 0..q as u128 {
            let (cs, cc) = (stride * q as u128, c + d * stride);
            let w = window(cs, cc).ok_or_else(|| {
                Error::InsufficientPrecision(format!(
                    "kernel sequence (q^e = {cs}, c = {cc}) has fewer than {MIN_WINDOW} known terms"
                ))
            })?;
            let found = buckets.get(&w[..MIN_WINDOW]).and_then(|ids| {
                ids.iter().copied().find(|&id| {
                    let m = w.len().min(states[id].2.len());
                    w[..m] == states[id].2[..m]
                })
            });
            let id = match found {
                Some(id) => id,
                None => {
                    if states.len() >= max_states {
                        return Err(Error::StateBudget(max_states));
                    }
                    let id = states.len();
                    buckets.entry(w[..MIN_WINDOW].to_vec()).or_default().push(id);
                    states.push((cs, cc, w));
                    queue.push_back(id);
                    id
                }
            };
            row.push(id);
        }
        if next.len() <= k {
            next.resize(k + 1, Vec::new());
        }
        next[k] = row;
    }
    let raw_states: Vec<State> = states.iter().zip(next).map(|((_, _, w), next)| State { next, out: w[0] }).collect();
    let raw = Dfao::new(&ctx, 0, raw_states)
        .map_err(|e| Error::Verification(format!("kernel candidate is not a valid automaton: {e}")))?;
    let min = raw.minimize();
    let got = min.sequence(n as usize);
    if let Some(k) = (0..n as usize).find(|&k| got[k] != oracle.get(k as u64)) {
        return Err(Error::Verification(format!(
            "candidate differs from the oracle at index {k}; increase the probe length"
        )));
    }
    Ok(SynthesisReport {
        raw_state_count: raw.num_states(),
        minimized_state_count: min.num_states(),
        automaton: min,
        verified_prefix: n,
        method: Method::OracleKernel,
        millis: started.elapsed().as_secs_f64() * 1e3,
    })
}
