//! Exact arithmetic in GF(2^m) for m <= 8.
//!
//! Elements are stored as their coordinate bitmask in the power basis of the
//! modulus class `s`. For GF(4) the modulus is `x^2 + x + 1`, so the encoding
//! is 0 -> 0, 1 -> 1, s -> 2, s^2 = s + 1 -> 3, and the text tokens are
//! `0`, `1`, `s`, `s2`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coordinates of a field element in the power basis of its context.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldElem(pub u8);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn bits(self) -> u8 {
        self.0
    }
}

#[derive(Debug)]
struct Tables {
    m: u32,
    modulus: u32,
    q: usize,
    /// exp[i] = g^i for i in 0..2(q-1), g a primitive element.
    exp: Vec<u8>,
    /// log[a] for a != 0.
    log: Vec<u16>,
}

/// A finite field GF(2^m) with a fixed modulus. Cheap to clone.
#[derive(Clone)]
pub struct FieldCtx {
    tables: Arc<Tables>,
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.tables, &other.tables)
            || (self.tables.m == other.tables.m && self.tables.modulus == other.tables.modulus)
    }
}

impl Eq for FieldCtx {}

impl std::hash::Hash for FieldCtx {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        (self.tables.m, self.tables.modulus).hash(state);
    }
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}; {:#b})", self.tables.m, self.tables.modulus)
    }
}

/// Carry-less product of two GF(2) polynomials given as bitmasks.
fn clmul(a: u32, b: u32) -> u32 {
    let mut r = 0;
    for i in 0..16 {
        if (b >> i) & 1 == 1 {
            r ^= a << i;
        }
    }
    r
}

fn degree(p: u32) -> i32 {
    31 - p.leading_zeros() as i32
}

fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = degree(b);
    while a != 0 && degree(a) >= db {
        a ^= b << (degree(a) - db);
    }
    a
}

fn is_irreducible(modulus: u32, m: u32) -> bool {
    if degree(modulus) != m as i32 {
        return false;
    }
    // Trial division by every polynomial of degree 1..=m/2.
    for d in 1..=(m / 2) {
        for p in (1u32 << d)..(1u32 << (d + 1)) {
            if poly_rem(modulus, p) == 0 {
                return false;
            }
        }
    }
    true
}

fn default_modulus(m: u32) -> Option<u32> {
    Some(match m {
        1 => 0b11,
        2 => 0b111,
        3 => 0b1011,
        4 => 0b10011,
        5 => 0b100101,
        6 => 0b1000011,
        7 => 0b10000011,
        8 => 0b100011101,
        _ => return None,
    })
}

impl FieldCtx {
    /// Builds GF(2^m) from an explicit modulus, checking irreducibility.
    pub fn new(m: u32, modulus: u32) -> Result<Self> {
        if !(1..=8).contains(&m) {
            return Err(Error::UnsupportedDegree(m));
        }
        if !is_irreducible(modulus, m) {
            return Err(Error::ReducibleModulus { m, modulus });
        }
        let q = 1usize << m;
        let mulmod = |a: u32, b: u32| poly_rem(clmul(a, b), modulus);
        // Find a primitive element for the log tables.
        let generator = (1..q as u32)
            .find(|&g| {
                let mut x = 1;
                for i in 1..q {
                    x = mulmod(x, g);
                    if x == 1 {
                        return i == q - 1;
                    }
                }
                false
            })
            .expect("multiplicative group of a finite field is cyclic");
        let mut exp = vec![0u8; 2 * (q - 1)];
        let mut log = vec![0u16; q];
        let mut x = 1u32;
        for i in 0..(q - 1) {
            exp[i] = x as u8;
            exp[i + q - 1] = x as u8;
            log[x as usize] = i as u16;
            x = mulmod(x, generator);
        }
        Ok(FieldCtx { tables: Arc::new(Tables { m, modulus, q, exp, log }) })
    }

    /// GF(2^m) with a standard modulus; for m = 2 this is `x^2 + x + 1`.
    pub fn with_degree(m: u32) -> Result<Self> {
        let modulus = default_modulus(m).ok_or(Error::UnsupportedDegree(m))?;
        Self::new(m, modulus)
    }

    pub fn gf2() -> Self {
        Self::with_degree(1).expect("GF(2) modulus")
    }

    pub fn gf4() -> Self {
        Self::with_degree(2).expect("GF(4) modulus")
    }

    pub fn m(&self) -> u32 {
        self.tables.m
    }

    pub fn q(&self) -> usize {
        self.tables.q
    }

    pub fn modulus(&self) -> u32 {
        self.tables.modulus
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem::ZERO
    }

    pub fn one(&self) -> FieldElem {
        FieldElem::ONE
    }

    /// The class of `x` modulo the modulus (the element `s` for GF(4)).
    pub fn gen(&self) -> FieldElem {
        if self.m() == 1 {
            FieldElem::ONE
        } else {
            FieldElem(2)
        }
    }

    pub fn elem(&self, bits: u32) -> Result<FieldElem> {
        if (bits as usize) < self.q() {
            Ok(FieldElem(bits as u8))
        } else {
            Err(Error::ElementOutOfRange { bits, q: self.q() })
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> {
        (0..self.q()).map(|b| FieldElem(b as u8))
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        FieldElem(a.0 ^ b.0)
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if a.0 == 0 || b.0 == 0 {
            return FieldElem::ZERO;
        }
        let t = &self.tables;
        FieldElem(t.exp[t.log[a.0 as usize] as usize + t.log[b.0 as usize] as usize])
    }

    pub fn pow(&self, a: FieldElem, e: u64) -> FieldElem {
        if e == 0 {
            return FieldElem::ONE;
        }
        if a.is_zero() {
            return FieldElem::ZERO;
        }
        let t = &self.tables;
        let order = (t.q - 1) as u64;
        let l = (t.log[a.0 as usize] as u64 * (e % order)) % order;
        FieldElem(t.exp[l as usize])
    }

    /// Multiplicative inverse, a^(q-2).
    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, self.q() as u64 - 2))
    }

    pub fn div(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// The 2-Frobenius a -> a^2.
    pub fn frobenius(&self, a: FieldElem) -> FieldElem {
        self.mul(a, a)
    }

    /// The unique b with b^q = a. On GF(q) itself this is the identity.
    pub fn qth_root(&self, a: FieldElem) -> FieldElem {
        debug_assert_eq!(self.pow(a, self.q() as u64), a);
        a
    }

    /// Text token: `0`, `1`, `s`, `s2` for GF(4); decimal bits otherwise.
    pub fn token(&self, a: FieldElem) -> String {
        match (self.m(), a.0) {
            (_, 0) => "0".into(),
            (_, 1) => "1".into(),
            (2, 2) => "s".into(),
            (2, 3) => "s2".into(),
            (_, b) => b.to_string(),
        }
    }

    pub fn parse_token(&self, tok: &str) -> Result<FieldElem> {
        let tok = tok.trim();
        let bits = match (self.m(), tok) {
            (_, "0") => 0,
            (_, "1") => 1,
            (2, "s") => 2,
            (2, "s2") | (2, "s^2") => 3,
            (m, other) if m > 2 => other.parse::<u32>().map_err(|_| Error::BadToken(tok.into()))?,
            _ => return Err(Error::BadToken(tok.into())),
        };
        self.elem(bits).map_err(|_| Error::BadToken(tok.into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f4() -> (FieldCtx, FieldElem, FieldElem) {
        let k = FieldCtx::gf4();
        let s = k.gen();
        let s2 = k.mul(s, s);
        (k, s, s2)
    }

    #[test]
    fn gf4_encoding_and_tables() {
        let (k, s, s2) = f4();
        assert_eq!(s, FieldElem(2));
        assert_eq!(s2, FieldElem(3));
        assert_eq!(k.add(s, s2), FieldElem::ONE);
        assert_eq!(k.add(FieldElem::ZERO, s), s);
        assert_eq!(k.mul(s, s2), FieldElem::ONE);
        assert_eq!(k.mul(s2, s2), s);
        assert_eq!(k.inv(s).unwrap(), s2);
        assert_eq!(k.inv(s2).unwrap(), s);
        assert_eq!(k.inv(FieldElem::ONE).unwrap(), FieldElem::ONE);
        assert_eq!(k.inv(FieldElem::ZERO), Err(Error::DivisionByZero));
        assert_eq!(k.frobenius(s), s2);
        assert_eq!(k.frobenius(s2), s);
        assert_eq!(k.frobenius(FieldElem::ONE), FieldElem::ONE);
        assert_eq!(k.qth_root(s), s);
        assert_eq!(k.qth_root(s2), s2);
        assert_eq!(k.qth_root(FieldElem::ZERO), FieldElem::ZERO);
    }

    #[test]
    fn gf4_multiplicative_group_generated_by_s() {
        let (k, s, _) = f4();
        let powers: Vec<_> = (0..3).map(|e| k.pow(s, e)).collect();
        let mut sorted = powers.clone();
        sorted.sort();
        assert_eq!(sorted, vec![FieldElem(1), FieldElem(2), FieldElem(3)]);
        assert_eq!(k.pow(s, 3), FieldElem::ONE);
    }

    #[test]
    fn tokens_round_trip() {
        let (k, s, s2) = f4();
        for (e, tok) in [(FieldElem::ZERO, "0"), (FieldElem::ONE, "1"), (s, "s"), (s2, "s2")] {
            assert_eq!(k.token(e), tok);
            assert_eq!(k.parse_token(tok).unwrap(), e);
        }
        assert_eq!(k.parse_token("s^2").unwrap(), s2);
        assert!(k.parse_token("2").is_err());
    }

    #[test]
    fn reducible_modulus_rejected() {
        // x^2 + 1 = (x + 1)^2
        assert!(matches!(FieldCtx::new(2, 0b101), Err(Error::ReducibleModulus { .. })));
        // x^4 + x^3 + x^2 + x + 1 is irreducible but x is not primitive.
        let k = FieldCtx::new(4, 0b11111).unwrap();
        assert_eq!(k.q(), 16);
        assert!(FieldCtx::new(9, 0b1000010001).is_err());
    }

    #[test]
    fn field_axioms_all_small_fields() {
        for m in 1..=8 {
            let k = FieldCtx::with_degree(m).unwrap();
            let q = k.q() as u64;
            for a in k.elements() {
                assert_eq!(k.add(a, a), FieldElem::ZERO);
                assert_eq!(k.pow(a, q), a);
                let mut f = a;
                for _ in 0..m {
                    f = k.frobenius(f);
                }
                assert_eq!(f, a);
                assert_eq!(k.pow(k.qth_root(a), q), a);
                if !a.is_zero() {
                    assert_eq!(k.mul(a, k.inv(a).unwrap()), FieldElem::ONE);
                }
            }
        }
    }

    #[test]
    fn distributive_gf16() {
        let k = FieldCtx::with_degree(4).unwrap();
        for a in k.elements() {
            for b in k.elements() {
                for c in k.elements() {
                    assert_eq!(k.mul(a, k.add(b, c)), k.add(k.mul(a, b), k.mul(a, c)));
                }
            }
        }
    }
}
