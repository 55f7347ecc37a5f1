//! Finite subgroups of the Nottingham group at working precision: closure,
//! classification and ramification breaks.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2m::FieldElem;
use crate::series::{Depth, NottinghamElem};

/// Smallest precision at which group element equality is trusted.
pub const MIN_PRECISION: i64 = 64;

/// How a product of Galois elements maps to series composition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    /// `theta(a b) = theta(b) o theta(a)`.
    Anti,
    /// `theta(a b) = theta(a) o theta(b)`.
    Direct,
}

#[derive(Debug, Clone)]
pub struct GroupElement {
    /// Word in the generators, `id` for the identity.
    pub word: String,
    pub series: NottinghamElem,
}

#[derive(Debug, Clone)]
pub struct GroupClosure {
    pub elements: Vec<GroupElement>,
    /// `table[a][b]` is the index of the group product `a b`.
    pub table: Vec<Vec<usize>>,
    pub convention: Convention,
    pub precision: i64,
}

fn key(e: &NottinghamElem) -> Vec<FieldElem> {
    e.series().coeffs().to_vec()
}

/// Series of the group product `a b`.
pub fn product(a: &NottinghamElem, b: &NottinghamElem, conv: Convention) -> Result<NottinghamElem> {
    match conv {
        Convention::Anti => b.compose(a),
        Convention::Direct => a.compose(b),
    }
}

/// Breadth-first closure of `gens` under the group product.
pub fn close_group(gens: &[(String, NottinghamElem)], max_size: usize, conv: Convention) -> Result<GroupClosure> {
    let Some((_, first)) = gens.first() else {
        return Err(Error::UnsupportedGroup("no generators".into()));
    };
    let ctx = first.ctx().clone();
    let prec = gens.iter().map(|(_, g)| g.prec()).min().unwrap_or(0);
    if prec < MIN_PRECISION {
        return Err(Error::InsufficientPrecision(format!(
            "group closure needs precision >= {MIN_PRECISION}, have {prec}"
        )));
    }
    let gens: Vec<(String, NottinghamElem)> = gens.iter().map(|(n, g)| (n.clone(), g.truncate(prec))).collect();
    let id = NottinghamElem::identity(&ctx, prec);
    let mut elements = vec![GroupElement { word: "id".into(), series: id.clone() }];
    let mut index: HashMap<Vec<FieldElem>, usize> = HashMap::from([(key(&id), 0)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(a) = queue.pop_front() {
        for (name, g) in &gens {
            let p = product(&elements[a].series, g, conv)?;
            let k = key(&p);
            if index.contains_key(&k) {
                continue;
            }
            if elements.len() == max_size {
                return Err(Error::ClosureTooLarge(max_size));
            }
            let word = if a == 0 { name.clone() } else { format!("{}*{name}", elements[a].word) };
            index.insert(k, elements.len());
            queue.push_back(elements.len());
            elements.push(GroupElement { word, series: p });
        }
    }
    let n = elements.len();
    let mut table = vec![vec![0usize; n]; n];
    for a in 0..n {
        for b in 0..n {
            let p = product(&elements[a].series, &elements[b].series, conv)?;
            table[a][b] = *index.get(&key(&p)).ok_or_else(|| {
                Error::Verification(format!(
                    "product of {} and {} left the closure",
                    elements[a].word, elements[b].word
                ))
            })?;
        }
    }
    Ok(GroupClosure { elements, table, convention: conv, precision: prec })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IsoType {
    Q8,
    D4,
    C2xC2xC2,
    C4xC2,
    C8,
    C2,
    C4,
    C2xC2,
    Trivial,
    Other,
}

impl fmt::Display for IsoType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            IsoType::Q8 => "Q8",
            IsoType::D4 => "D4",
            IsoType::C2xC2xC2 => "C2xC2xC2",
            IsoType::C4xC2 => "C4xC2",
            IsoType::C8 => "C8",
            IsoType::C2 => "C2",
            IsoType::C4 => "C4",
            IsoType::C2xC2 => "C2xC2",
            IsoType::Trivial => "trivial",
            IsoType::Other => "other",
        };
        f.write_str(s)
    }
}

impl GroupClosure {
    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn find(&self, word: &str) -> Option<usize> {
        self.elements.iter().position(|e| e.word == word)
    }

    /// Index of the element with the given series, if present.
    pub fn index_of(&self, s: &NottinghamElem) -> Option<usize> {
        let s = s.truncate(self.precision);
        self.elements.iter().position(|e| e.series == s)
    }

    /// Order of element `a` (certified only at the working precision).
    pub fn order(&self, a: usize) -> u32 {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.table[x][a];
            k += 1;
        }
        k
    }

    /// Multiset of element orders as `order -> count`.
    pub fn order_profile(&self) -> BTreeMap<u32, usize> {
        let mut m = BTreeMap::new();
        for a in 0..self.size() {
            *m.entry(self.order(a)).or_insert(0) += 1;
        }
        m
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.size();
        (0..n).all(|a| (0..n).all(|b| self.table[a][b] == self.table[b][a]))
    }

    /// Elements commuting with everything.
    pub fn center(&self) -> Vec<usize> {
        let n = self.size();
        (0..n).filter(|&a| (0..n).all(|b| self.table[a][b] == self.table[b][a])).collect()
    }

    pub fn iso_type(&self) -> Result<IsoType> {
        let n = self.size();
        if n > 8 {
            return Err(Error::UnsupportedGroup(format!("order {n} > 8")));
        }
        let prof = self.order_profile();
        let count = |k: u32| prof.get(&k).copied().unwrap_or(0);
        Ok(match n {
            1 => IsoType::Trivial,
            2 => IsoType::C2,
            4 if count(4) > 0 => IsoType::C4,
            4 => IsoType::C2xC2,
            8 if self.is_abelian() => {
                if count(8) > 0 {
                    IsoType::C8
                } else if count(4) > 0 {
                    IsoType::C4xC2
                } else {
                    IsoType::C2xC2xC2
                }
            }
            8 if count(2) == 1 => IsoType::Q8,
            8 if count(2) == 5 => IsoType::D4,
            _ => IsoType::Other,
        })
    }

    pub fn ramification(&self) -> Result<RamificationProfile> {
        lower_breaks(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RamificationProfile {
    /// Ascending, with multiplicity.
    pub lower_breaks: Vec<u64>,
    pub upper_breaks: Vec<BigRational>,
    pub depth_of: Vec<(String, Depth)>,
}

impl RamificationProfile {
    pub fn upper_strings(&self) -> Vec<String> {
        self.upper_breaks.iter().map(rational_string).collect()
    }
}

/// `3/2`, or `2` for integers.
pub fn rational_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Lower breaks from the depth filtration `G_d = {phi : D(phi) >= d}`.
pub fn lower_breaks(g: &GroupClosure) -> Result<RamificationProfile> {
    let p = 2u64;
    let mut depths = Vec::new();
    let mut depth_of = Vec::new();
    for (k, e) in g.elements.iter().enumerate() {
        let d = e.series.depth();
        depth_of.push((e.word.clone(), d));
        if k == 0 {
            continue;
        }
        match d {
            Depth::Finite(v) => depths.push(v as u64),
            Depth::AtLeast(_) => {
                return Err(Error::InsufficientPrecision(format!(
                    "element {} is indistinguishable from the identity; raise precision",
                    e.word
                )))
            }
        }
    }
    depths.sort_unstable();
    let mut distinct = depths.clone();
    distinct.dedup();
    let size_from = |d: u64| 1 + depths.iter().filter(|&&x| x >= d).count() as u64;
    let mut lower = Vec::new();
    for &b in &distinct {
        let ratio = size_from(b) / size_from(b + 1);
        if ratio * size_from(b + 1) != size_from(b) || !ratio.is_power_of_two() {
            return Err(Error::Verification(format!("filtration index at depth {b} is not a power of {p}")));
        }
        for _ in 0..ratio.trailing_zeros() {
            lower.push(b);
        }
    }
    let upper = lower_to_upper(&lower, p);
    Ok(RamificationProfile { lower_breaks: lower, upper_breaks: upper, depth_of })
}

/// `u_1 = b_1`, `u_{i+1} - u_i = (b_{i+1} - b_i) / p^i`.
pub fn lower_to_upper(breaks: &[u64], p: u64) -> Vec<BigRational> {
    let mut out: Vec<BigRational> = Vec::with_capacity(breaks.len());
    let mut pk = BigInt::one();
    for (i, &b) in breaks.iter().enumerate() {
        let u = if i == 0 {
            BigRational::from_integer(BigInt::from(b))
        } else {
            pk *= BigInt::from(p);
            let step = BigRational::new(BigInt::from(b) - BigInt::from(breaks[i - 1]), pk.clone());
            &out[i - 1] + step
        };
        out.push(u);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2m::FieldCtx;
    use crate::series::LaurentSeries;
    use proptest::prelude::*;

    fn nott(terms: &[(i64, u8)], prec: i64) -> NottinghamElem {
        let ctx = FieldCtx::gf4();
        let t: Vec<_> = terms.iter().map(|&(e, c)| (e, FieldElem(c))).collect();
        NottinghamElem::new(LaurentSeries::from_terms(&ctx, &t, prec)).unwrap()
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn upper_breaks() {
        assert_eq!(lower_to_upper(&[1, 1, 3], 2), vec![r(1, 1), r(1, 1), r(3, 2)]);
        assert_eq!(lower_to_upper(&[1, 1, 5], 2), vec![r(1, 1), r(1, 1), r(2, 1)]);
        assert_eq!(lower_to_upper(&[7], 3), vec![r(7, 1)]);
        assert_eq!(rational_string(&r(3, 2)), "3/2");
    }

    #[test]
    fn trivial_group() {
        let g = close_group(&[("a".into(), nott(&[(1, 1)], 64))], 16, Convention::Anti).unwrap();
        assert_eq!(g.size(), 1);
        assert_eq!(g.iso_type().unwrap(), IsoType::Trivial);
        assert!(g.ramification().unwrap().lower_breaks.is_empty());
    }

    #[test]
    fn involution_t_over_1_plus_t() {
        // t/(1+t) has order 2 in characteristic 2.
        let ctx = FieldCtx::gf4();
        let t = LaurentSeries::var(&ctx, 64);
        let s = &t / &(&LaurentSeries::one(&ctx, 64) + &t);
        let g = close_group(&[("a".into(), NottinghamElem::new(s).unwrap())], 16, Convention::Anti).unwrap();
        assert_eq!(g.iso_type().unwrap(), IsoType::C2);
        assert_eq!(g.ramification().unwrap().lower_breaks, vec![1]);
    }

    #[test]
    fn closure_limits() {
        // (t + t^2)^(2^k) = t + t^(2^(2^k)), so at precision 64 the element
        // looks like it has order 8.
        let a = nott(&[(1, 1), (2, 1)], 64);
        let g = close_group(&[("a".into(), a.clone())], 64, Convention::Anti).unwrap();
        assert_eq!(g.iso_type().unwrap(), IsoType::C8);
        let e = close_group(&[("a".into(), a)], 4, Convention::Anti);
        assert!(matches!(e, Err(Error::ClosureTooLarge(4))));
    }

    #[test]
    fn low_precision_rejected() {
        let e = close_group(&[("a".into(), nott(&[(1, 1)], 32))], 8, Convention::Anti);
        assert!(matches!(e, Err(Error::InsufficientPrecision(_))));
    }

    proptest! {
        #[test]
        fn upper_breaks_order_preserving(mut b in proptest::collection::vec(0u64..50, 1..6)) {
            b.sort_unstable();
            let u = lower_to_upper(&b, 2);
            prop_assert!(u.windows(2).all(|w| w[0] <= w[1]));
            if b.iter().all(|&x| x == b[0]) {
                prop_assert!(u.iter().all(|x| *x == BigRational::from_integer(BigInt::from(b[0]))));
            }
        }
    }
}
