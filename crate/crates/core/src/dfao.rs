//! Deterministic finite automata with output, reading base-q digits least
//! significant first and emitting field elements.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2m::{FieldCtx, FieldElem};
use crate::series::LaurentSeries;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct State {
    pub next: Vec<usize>,
    pub out: FieldElem,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfao {
    ctx: FieldCtx,
    states: Vec<State>,
    start: usize,
}

/// Result of an equivalence check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    /// Least index at which the two sequences differ.
    Differ(BigUint),
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Equivalence::Equivalent)
    }
}

/// Field for a `q`-letter alphabet.
pub fn ctx_for_q(q: usize) -> Result<FieldCtx> {
    if !q.is_power_of_two() || q < 2 {
        return Err(Error::MalformedTable(format!("alphabet size {q} is not a power of 2")));
    }
    FieldCtx::with_degree(q.trailing_zeros())
}

impl Dfao {
    /// Validates outdegree, targets and the zero-edge rule.
    pub fn new(ctx: &FieldCtx, start: usize, states: Vec<State>) -> Result<Self> {
        let q = ctx.q();
        let n = states.len();
        if start >= n {
            return Err(Error::BadTarget { target: start, states: n });
        }
        for (i, s) in states.iter().enumerate() {
            if s.next.len() != q {
                return Err(Error::Outdegree { state: i, found: s.next.len(), expected: q });
            }
            if let Some(&bad) = s.next.iter().find(|&&t| t >= n) {
                return Err(Error::BadTarget { target: bad, states: n });
            }
            if (s.out.0 as usize) >= q {
                return Err(Error::ElementOutOfRange { bits: s.out.0 as u32, q });
            }
        }
        let a = Dfao { ctx: ctx.clone(), states, start };
        a.check_zero_edge_rule()?;
        Ok(a)
    }

    pub(crate) fn new_unchecked(ctx: &FieldCtx, start: usize, states: Vec<State>) -> Self {
        Dfao { ctx: ctx.clone(), states, start }
    }

    fn check_zero_edge_rule(&self) -> Result<()> {
        for (i, s) in self.states.iter().enumerate() {
            let j = s.next[0];
            if self.states[j].out != s.out {
                return Err(Error::ZeroEdgeRule {
                    from: i,
                    to: j,
                    from_label: self.ctx.token(s.out),
                    to_label: self.ctx.token(self.states[j].out),
                });
            }
        }
        Ok(())
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn q(&self) -> usize {
        self.ctx.q()
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// Label after reading `digits` (least significant first).
    pub fn eval_digits(&self, digits: &[usize]) -> FieldElem {
        let s = digits.iter().fold(self.start, |s, &d| self.states[s].next[d]);
        self.states[s].out
    }

    pub fn eval(&self, mut n: u64) -> FieldElem {
        let q = self.q() as u64;
        let mut s = self.start;
        while n > 0 {
            s = self.states[s].next[(n % q) as usize];
            n /= q;
        }
        self.states[s].out
    }

    pub fn eval_big(&self, n: &BigUint) -> FieldElem {
        let digits: Vec<usize> = if n.is_zero() {
            Vec::new()
        } else {
            n.to_radix_le(self.q() as u32).into_iter().map(usize::from).collect()
        };
        self.eval_digits(&digits)
    }

    /// Labels for `0 .. n`.
    pub fn sequence(&self, n: usize) -> Vec<FieldElem> {
        let q = self.q();
        // level[c] = state after reading c padded to r digits.
        let mut level = vec![self.start];
        while level.len() < n {
            let mut nxt = Vec::with_capacity(level.len() * q);
            for d in 0..q {
                nxt.extend(level.iter().map(|&s| self.states[s].next[d]));
            }
            level = nxt;
        }
        level.truncate(n);
        level.into_iter().map(|s| self.states[s].out).collect()
    }

    /// `sum_{n < prec} eval(n) t^n`.
    pub fn series_of(&self, prec: usize) -> LaurentSeries {
        LaurentSeries::new(&self.ctx, 0, self.sequence(prec), prec as i64)
    }

    /// Reachable part renumbered in breadth-first order, digits ascending.
    pub fn canonicalize(&self) -> Dfao {
        let mut map = vec![usize::MAX; self.states.len()];
        let mut order = vec![self.start];
        map[self.start] = 0;
        let mut k = 0;
        while k < order.len() {
            let s = order[k];
            for &t in &self.states[s].next {
                if map[t] == usize::MAX {
                    map[t] = order.len();
                    order.push(t);
                }
            }
            k += 1;
        }
        let states = order
            .iter()
            .map(|&s| State { next: self.states[s].next.iter().map(|&t| map[t]).collect(), out: self.states[s].out })
            .collect();
        Dfao::new_unchecked(&self.ctx, 0, states)
    }

    /// Moore partition refinement on the reachable part; canonical output.
    pub fn minimize(&self) -> Dfao {
        let a = self.canonicalize();
        let n = a.states.len();
        let mut class: Vec<usize> = {
            let mut ids: HashMap<FieldElem, usize> = HashMap::new();
            a.states
                .iter()
                .map(|s| {
                    let k = ids.len();
                    *ids.entry(s.out).or_insert(k)
                })
                .collect()
        };
        let mut count = class.iter().max().map_or(0, |m| m + 1);
        loop {
            let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
            let next: Vec<usize> = (0..n)
                .map(|s| {
                    let mut sig = Vec::with_capacity(a.q() + 1);
                    sig.push(class[s]);
                    sig.extend(a.states[s].next.iter().map(|&t| class[t]));
                    let k = ids.len();
                    *ids.entry(sig).or_insert(k)
                })
                .collect();
            let new_count = ids.len();
            class = next;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        let mut states = vec![None; count];
        for s in 0..n {
            if states[class[s]].is_none() {
                states[class[s]] =
                    Some(State { next: a.states[s].next.iter().map(|&t| class[t]).collect(), out: a.states[s].out });
            }
        }
        let states = states.into_iter().map(|s| s.expect("every class has a member")).collect();
        Dfao::new_unchecked(&a.ctx, class[a.start], states).canonicalize()
    }

    /// Exact sequence equivalence by product breadth-first search; on
    /// failure the least differing index.
    pub fn equivalent(&self, other: &Dfao) -> Result<Equivalence> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        let q = self.q();
        let bad = |p: (usize, usize)| self.states[p.0].out != other.states[p.1].out;
        let root = (self.start, other.start);
        let mut seen: HashMap<(usize, usize), usize> = HashMap::from([(root, 0)]);
        let mut queue = VecDeque::from([root]);
        let mut depth = None;
        while let Some(p) = queue.pop_front() {
            let d = seen[&p];
            if bad(p) {
                depth = Some(d);
                break;
            }
            for digit in 0..q {
                let np = (self.states[p.0].next[digit], other.states[p.1].next[digit]);
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(np) {
                    e.insert(d + 1);
                    queue.push_back(np);
                }
            }
        }
        let Some(depth) = depth else {
            return Ok(Equivalence::Equivalent);
        };
        // Least value among words of exactly `depth` digits reaching a bad
        // pair. The last digit read is the most significant.
        let mut level: HashMap<(usize, usize), BigUint> = HashMap::from([(root, BigUint::zero())]);
        let mut place = BigUint::from(1u32);
        for _ in 0..depth {
            let mut nxt: HashMap<(usize, usize), BigUint> = HashMap::new();
            for (p, v) in &level {
                for digit in 0..q {
                    let np = (self.states[p.0].next[digit], other.states[p.1].next[digit]);
                    let nv = v + &place * BigUint::from(digit);
                    match nxt.get_mut(&np) {
                        Some(cur) if *cur <= nv => {}
                        Some(cur) => *cur = nv,
                        None => {
                            nxt.insert(np, nv);
                        }
                    }
                }
            }
            level = nxt;
            place *= BigUint::from(q);
        }
        let witness = level
            .into_iter()
            .filter(|(p, _)| bad(*p))
            .map(|(_, v)| v)
            .min()
            .ok_or_else(|| Error::Verification("witness reconstruction failed".into()))?;
        Ok(Equivalence::Differ(witness))
    }

    /// Same digraph with every label replaced by its Frobenius image.
    pub fn frobenius_labels(&self) -> Dfao {
        let states =
            self.states.iter().map(|s| State { next: s.next.clone(), out: self.ctx.frobenius(s.out) }).collect();
        Dfao::new_unchecked(&self.ctx, self.start, states)
    }

    pub fn to_json(&self) -> DfaoJson {
        DfaoJson {
            q: self.q(),
            start: self.start,
            states: self
                .states
                .iter()
                .map(|s| StateJson { out: self.ctx.token(s.out), next: s.next.clone() })
                .collect(),
        }
    }

    pub fn from_json(j: &DfaoJson) -> Result<Dfao> {
        let ctx = ctx_for_q(j.q)?;
        let states = j
            .states
            .iter()
            .map(|s| Ok(State { next: s.next.clone(), out: ctx.parse_token(&s.out)? }))
            .collect::<Result<Vec<_>>>()?;
        Dfao::new(&ctx, j.start, states)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("serializable")
    }

    pub fn parse_json(text: &str) -> Result<Dfao> {
        let j: DfaoJson = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        Dfao::from_json(&j)
    }

    /// Graphviz rendering; states are numbered from 1 as in the tables.
    pub fn to_dot(&self, omit_self_loops: bool) -> String {
        let mut out = String::from("digraph dfao {\n  rankdir=LR;\n  node [shape=circle];\n");
        for (i, s) in self.states.iter().enumerate() {
            let extra = if i == self.start { ", penwidth=2" } else { "" };
            let _ = writeln!(out, "  n{} [label=\"{}\\n{}\"{extra}];", i + 1, i + 1, self.ctx.token(s.out));
        }
        for (i, s) in self.states.iter().enumerate() {
            let mut by_target: Vec<(usize, Vec<usize>)> = Vec::new();
            for (d, &t) in s.next.iter().enumerate() {
                if omit_self_loops && t == i {
                    continue;
                }
                match by_target.iter_mut().find(|(x, _)| *x == t) {
                    Some((_, ds)) => ds.push(d),
                    None => by_target.push((t, vec![d])),
                }
            }
            for (t, ds) in by_target {
                let lab: Vec<String> = ds.iter().map(|d| d.to_string()).collect();
                let _ = writeln!(out, "  n{} -> n{} [label=\"{}\"];", i + 1, t + 1, lab.join(","));
            }
        }
        out.push_str("}\n");
        out
    }

    /// Table with a 1-based `State` column and one label column.
    pub fn to_tsv(&self, label: &str) -> String {
        let mut out = String::from("State");
        for d in 0..self.q() {
            let _ = write!(out, "\t{d}");
        }
        let _ = writeln!(out, "\t{label}");
        for (i, s) in self.states.iter().enumerate() {
            let _ = write!(out, "{}", i + 1);
            for &t in &s.next {
                let _ = write!(out, "\t{}", t + 1);
            }
            let _ = writeln!(out, "\t{}", self.ctx.token(s.out));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateJson {
    pub out: String,
    pub next: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DfaoJson {
    pub q: usize,
    pub start: usize,
    pub states: Vec<StateJson>,
}

/// Parse a table `State, 0, .., q-1, label[, label..]` (tab separated,
/// 1-based states, start state 1). Each label column yields one automaton.
pub fn parse_tsv(text: &str) -> Result<Vec<(String, Dfao)>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> =
        lines.next().ok_or_else(|| Error::MalformedTable("empty table".into()))?.split('\t').collect();
    if header.first().map(|h| h.trim()) != Some("State") {
        return Err(Error::MalformedTable("header must start with `State`".into()));
    }
    let q = header[1..].iter().take_while(|h| h.trim().parse::<usize>().is_ok()).count();
    for (d, h) in header[1..=q].iter().enumerate() {
        if h.trim() != d.to_string() {
            return Err(Error::MalformedTable(format!("digit column {d} has header `{h}`")));
        }
    }
    let labels: Vec<String> = header[q + 1..].iter().map(|h| h.trim().to_string()).collect();
    if labels.is_empty() {
        return Err(Error::MalformedTable("no label column".into()));
    }
    let ctx = ctx_for_q(q)?;
    let mut rows: Vec<(usize, Vec<usize>, Vec<FieldElem>)> = Vec::new();
    for (ln, line) in lines.enumerate() {
        let f: Vec<&str> = line.split('\t').map(str::trim).collect();
        let id: usize =
            f[0].parse().map_err(|_| Error::MalformedTable(format!("row {}: bad state `{}`", ln + 1, f[0])))?;
        if id == 0 {
            return Err(Error::MalformedTable(format!("row {}: states are numbered from 1", ln + 1)));
        }
        if f.len() != header.len() {
            return Err(Error::Outdegree {
                state: id - 1,
                found: f.len().saturating_sub(1 + labels.len()),
                expected: q,
            });
        }
        let next = f[1..=q]
            .iter()
            .map(|x| match x.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(Error::MalformedTable(format!("state {id}: bad target `{x}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let outs = f[q + 1..].iter().map(|x| ctx.parse_token(x)).collect::<Result<Vec<_>>>()?;
        rows.push((id - 1, next, outs));
    }
    let n = rows.len();
    let mut slots: Vec<Option<(Vec<usize>, Vec<FieldElem>)>> = vec![None; n];
    for (id, next, outs) in rows {
        if id >= n {
            return Err(Error::MalformedTable(format!("state {} out of range 1..{n}", id + 1)));
        }
        if slots[id].is_some() {
            return Err(Error::MalformedTable(format!("state {} listed twice", id + 1)));
        }
        slots[id] = Some((next, outs));
    }
    let rows: Vec<(Vec<usize>, Vec<FieldElem>)> = slots.into_iter().map(|s| s.expect("all states present")).collect();
    labels
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let states = rows.iter().map(|(next, outs)| State { next: next.clone(), out: outs[k] }).collect();
            Ok((name.clone(), Dfao::new(&ctx, 0, states)?))
        })
        .collect()
}

/// Convert a witness to `u64` when it fits.
pub fn witness_u64(w: &BigUint) -> Option<u64> {
    w.to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SIGMA: &str = include_str!("../fixtures/q8_0_s1_s2.tsv");

    fn st(next: &[usize], out: u8) -> State {
        State { next: next.to_vec(), out: FieldElem(out) }
    }

    #[test]
    fn eval_fixture() {
        let autos = parse_tsv(SIGMA).unwrap();
        assert_eq!(autos.len(), 2);
        let (name, a) = &autos[0];
        assert_eq!(name, "q8_0.s1");
        assert_eq!(a.eval(0), FieldElem::ZERO);
        assert_eq!(a.eval(1), FieldElem::ONE);
        assert_eq!(a.eval(2), FieldElem(3));
        let seq = a.sequence(200);
        for (n, &c) in seq.iter().enumerate() {
            assert_eq!(a.eval(n as u64), c);
            assert_eq!(a.eval_big(&BigUint::from(n)), c);
        }
    }

    #[test]
    fn sigma_pair_witness_and_frobenius() {
        let autos = parse_tsv(SIGMA).unwrap();
        let (a, b) = (&autos[0].1, &autos[1].1);
        assert_eq!(a.equivalent(b).unwrap(), Equivalence::Differ(BigUint::from(2u32)));
        assert!(a.frobenius_labels().equivalent(b).unwrap().is_equivalent());
        assert_eq!(a.frobenius_labels().frobenius_labels(), *a);
        assert!(a.equivalent(a).unwrap().is_equivalent());
    }

    #[test]
    fn minimize_duplicate_state() {
        let ctx = FieldCtx::gf2();
        // 0,1,1,1,... with a duplicated accepting state.
        let a = Dfao::new(&ctx, 0, vec![st(&[0, 1], 0), st(&[2, 2], 1), st(&[1, 1], 1)]).unwrap();
        let m = a.minimize();
        assert_eq!(m.num_states(), 2);
        assert!(m.equivalent(&a).unwrap().is_equivalent());
        assert_eq!(m.minimize(), m);
    }

    #[test]
    fn validation_errors() {
        let ctx = FieldCtx::gf2();
        assert!(matches!(Dfao::new(&ctx, 0, vec![st(&[0], 0)]), Err(Error::Outdegree { .. })));
        assert!(matches!(Dfao::new(&ctx, 0, vec![st(&[0, 3], 0)]), Err(Error::BadTarget { .. })));
        assert!(matches!(Dfao::new(&ctx, 0, vec![st(&[1, 1], 0), st(&[1, 1], 1)]), Err(Error::ZeroEdgeRule { .. })));
        let bad = SIGMA.replacen("1\t2\t3\t4\t5", "1\t2\t3\t4", 1);
        assert!(matches!(parse_tsv(&bad), Err(Error::Outdegree { .. })));
        let bad = SIGMA.replacen("2\t2\t6\t7\t4\t0\t0", "2\t3\t6\t7\t4\t0\t0", 1);
        assert!(matches!(parse_tsv(&bad), Err(Error::ZeroEdgeRule { .. })));
        assert!(matches!(parse_tsv("Stat\t0\t1\tx\n"), Err(Error::MalformedTable(_))));
    }

    #[test]
    fn json_and_dot() {
        let a = &parse_tsv(SIGMA).unwrap()[0].1;
        let back = Dfao::parse_json(&a.to_json_string()).unwrap();
        assert_eq!(&back, a);
        assert!(a.to_json_string().starts_with("{\"q\":4,\"start\":0,\"states\":[{\"out\":\"0\",\"next\":[1,2,3,4]}"));
        let dot = a.to_dot(true);
        assert!(dot.starts_with("digraph"));
        assert!(!dot.contains("n2 -> n2"));
        assert!(a.to_dot(false).contains("n2 -> n2"));
        let round = parse_tsv(&a.to_tsv("x")).unwrap();
        assert_eq!(&round[0].1, a);
    }

    fn arb_dfao() -> impl Strategy<Value = Dfao> {
        (1usize..7).prop_flat_map(|n| {
            proptest::collection::vec((proptest::collection::vec(0..n, 2), 0u8..2), n).prop_map(move |raw| {
                let ctx = FieldCtx::gf2();
                // Enforce the zero-edge rule by copying labels along 0-edges.
                let mut out: Vec<u8> = raw.iter().map(|r| r.1).collect();
                for _ in 0..n {
                    for i in 0..n {
                        out[raw[i].0[0]] = out[i];
                    }
                }
                let states: Vec<State> = raw
                    .iter()
                    .enumerate()
                    .map(|(i, (next, _))| State { next: next.clone(), out: FieldElem(out[i]) })
                    .collect();
                match Dfao::new(&ctx, 0, states) {
                    Ok(a) => a,
                    Err(_) => Dfao::new(&ctx, 0, vec![State { next: vec![0, 0], out: FieldElem(0) }]).unwrap(),
                }
            })
        })
    }

    proptest! {
        #[test]
        fn minimize_preserves_sequence(a in arb_dfao(), b in arb_dfao()) {
            let m = a.minimize();
            prop_assert!(m.num_states() <= a.num_states());
            prop_assert_eq!(m.sequence(300), a.sequence(300));
            prop_assert_eq!(m.minimize(), m.clone());
            prop_assert_eq!(a.canonicalize().canonicalize(), a.canonicalize());
            // Product equivalence agrees with prefix comparison (states <= 6).
            let eq = a.equivalent(&b).unwrap();
            let sa = a.sequence(1 << 12);
            let sb = b.sequence(1 << 12);
            match eq {
                Equivalence::Equivalent => prop_assert_eq!(sa, sb),
                Equivalence::Differ(w) => {
                    let w = w.to_usize().unwrap();
                    prop_assert!(sa[w] != sb[w]);
                    prop_assert!(sa[..w] == sb[..w]);
                }
            }
        }
    }
}
