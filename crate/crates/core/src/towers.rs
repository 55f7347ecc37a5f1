//! The Q8 and D4 extension towers over `K = F_4((pi_K))` as series in the
//! uniformizer `t` of the top field, with their Galois groups.
//!
//! Each tower is `K ⊂ M_0 = K(Y) ⊂ L = M_0(alpha_3)` with `Y^4 + Y = 1/pi_K`
//! and `alpha_3^2 + alpha_3 = R(Y)`. The uniformizer is `t = w(Y)/alpha_3`
//! where `w(Y) = Y` (Q8) or `zeta Y^2` (D4). Galois elements act affinely:
//! `Y -> Y + c`, `alpha_3 -> alpha_3 + u(Y)`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2m::{FieldCtx, FieldElem};
use crate::poly::BivarPoly;
use crate::series::{solve_contractive, LaurentSeries, NottinghamElem};

/// Extra coefficients carried internally to absorb precision loss.
const GUARD: i64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Q8,
    D4,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Q8 => "q8",
            Family::D4 => "d4",
        })
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "q8" => Ok(Family::Q8),
            "d4" => Ok(Family::D4),
            other => Err(Error::InvalidTower(format!("unknown family `{other}` (expected q8 or d4)"))),
        }
    }
}

/// Family plus parameter: `delta` in {0, s} for Q8, `zeta` in {1, s, s^2}
/// for D4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TowerSpec {
    pub family: Family,
    pub param: FieldElem,
    pub precision: i64,
}

impl TowerSpec {
    pub fn new(family: Family, param: FieldElem, precision: i64) -> Result<Self> {
        let legal: &[u8] = match family {
            Family::Q8 => &[0, 2],
            Family::D4 => &[1, 2, 3],
        };
        if !legal.contains(&param.0) {
            return Err(Error::InvalidTower(format!(
                "parameter {} not allowed for {family}",
                FieldCtx::gf4().token(param)
            )));
        }
        if precision < 8 {
            return Err(Error::InvalidTower(format!("precision {precision} too small")));
        }
        Ok(TowerSpec { family, param, precision })
    }

    /// Parse a parameter token (`0`, `1`, `s`, `s2`).
    pub fn parse(family: &str, param: &str, precision: i64) -> Result<Self> {
        let family: Family = family.parse()?;
        let param = FieldCtx::gf4().parse_token(param)?;
        Self::new(family, param, precision)
    }

    /// The five towers: Q8 with delta = 0, s; D4 with zeta = 1, s, s^2.
    pub fn all(precision: i64) -> Vec<TowerSpec> {
        [(Family::Q8, 0), (Family::Q8, 2), (Family::D4, 1), (Family::D4, 2), (Family::D4, 3)]
            .into_iter()
            .map(|(f, p)| TowerSpec { family: f, param: FieldElem(p), precision })
            .collect()
    }

    /// Stable key such as `q8_0` or `d4_s2`.
    pub fn key(&self) -> String {
        format!("{}_{}", self.family, FieldCtx::gf4().token(self.param))
    }

    pub fn generator_names(&self) -> [&'static str; 3] {
        match self.family {
            Family::Q8 => ["s1", "s2", "s0"],
            Family::D4 => ["t1", "t2", "t0"],
        }
    }
}

/// Polynomial in `Y`, coefficients ascending.
pub type YPoly = Vec<FieldElem>;

fn ytrim(mut p: YPoly) -> YPoly {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn yadd(ctx: &FieldCtx, a: &[FieldElem], b: &[FieldElem]) -> YPoly {
    let n = a.len().max(b.len());
    let g = |p: &[FieldElem], i: usize| p.get(i).copied().unwrap_or(FieldElem::ZERO);
    ytrim((0..n).map(|i| ctx.add(g(a, i), g(b, i))).collect())
}

fn ymul(ctx: &FieldCtx, a: &[FieldElem], b: &[FieldElem]) -> YPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![FieldElem::ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = ctx.add(out[i + j], ctx.mul(x, y));
        }
    }
    ytrim(out)
}

/// `p(Y + c)`.
fn yshift(ctx: &FieldCtx, p: &[FieldElem], c: FieldElem) -> YPoly {
    let lin = [c, FieldElem::ONE];
    let mut acc: YPoly = Vec::new();
    for &a in p.iter().rev() {
        acc = yadd(ctx, &ymul(ctx, &acc, &lin), &[a]);
    }
    acc
}

/// Action `Y -> Y + c`, `alpha_3 -> alpha_3 + u(Y)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffineLift {
    pub c: FieldElem,
    pub u: YPoly,
}

impl AffineLift {
    pub fn identity() -> Self {
        AffineLift { c: FieldElem::ZERO, u: Vec::new() }
    }

    /// The automorphism `self o other`.
    pub fn then_apply(&self, ctx: &FieldCtx, other: &AffineLift) -> AffineLift {
        AffineLift { c: ctx.add(self.c, other.c), u: yadd(ctx, &self.u, &yshift(ctx, &other.u, self.c)) }
    }

    /// Whether this is an automorphism of `alpha^2 + alpha = rhs(Y)`.
    pub fn preserves(&self, ctx: &FieldCtx, rhs: &[FieldElem]) -> bool {
        let lhs = yadd(ctx, &yadd(ctx, rhs, &ymul(ctx, &self.u, &self.u)), &self.u);
        lhs == ytrim(yshift(ctx, rhs, self.c))
    }
}

#[derive(Debug, Clone)]
pub struct GaloisElement {
    pub name: String,
    pub lift: AffineLift,
    pub order: u32,
    pub series: NottinghamElem,
}

#[derive(Debug, Clone)]
pub struct Tower {
    pub spec: TowerSpec,
    pub ctx: FieldCtx,
    /// `Z = 1/Y`, valuation 2.
    pub z: LaurentSeries,
    pub y: LaurentSeries,
    pub alpha3: LaurentSeries,
    /// `Z^4 / (1 + Z^3)`, valuation 8.
    pub pi_k: LaurentSeries,
    pub elements: Vec<GaloisElement>,
}

/// Right-hand side `R(Y)` of the Artin-Schreier equation for `alpha_3`.
pub fn as_rhs(spec: &TowerSpec) -> YPoly {
    let ctx = FieldCtx::gf4();
    let (o, s, s2, z) = (FieldElem::ONE, FieldElem(2), FieldElem(3), FieldElem::ZERO);
    match spec.family {
        Family::Q8 if spec.param.is_zero() => vec![z, z, z, o],
        // alpha-hat: Y^3 + s Y^2 + s^2 Y + s
        Family::Q8 => vec![s, s2, s, o],
        // g(zeta Y) with g(X) = X^5 + X^4 + X^3
        Family::D4 => {
            let zeta = spec.param;
            vec![z, z, z, o, zeta, ctx.mul(zeta, zeta)]
        }
    }
}

/// `w(Y)` with `t = w(Y) / alpha_3`.
pub fn uniformizer_numerator(spec: &TowerSpec) -> YPoly {
    match spec.family {
        Family::Q8 => vec![FieldElem::ZERO, FieldElem::ONE],
        Family::D4 => vec![FieldElem::ZERO, FieldElem::ZERO, spec.param],
    }
}

/// Lifts of the three generators of `Gal(M_0/K)`, in the order
/// `[1, 2, 0]` (`Y -> Y + s, Y + s^2, Y + 1`).
pub fn generator_lifts(spec: &TowerSpec) -> [AffineLift; 3] {
    let (o, s, s2, z) = (FieldElem::ONE, FieldElem(2), FieldElem(3), FieldElem::ZERO);
    let l = |c: FieldElem, u: Vec<FieldElem>| AffineLift { c, u: ytrim(u) };
    match (spec.family, spec.param.0) {
        (Family::Q8, 0) => [l(s, vec![s2, s2]), l(s2, vec![s, s]), l(o, vec![s, o])],
        (Family::Q8, _) => [l(s, vec![s, s2]), l(s2, vec![z, s]), l(o, vec![o, o])],
        (Family::D4, 1) => [l(s, vec![z, o, s2]), l(s2, vec![z, o, s]), l(o, vec![s2, z, o])],
        (Family::D4, 2) => [l(s, vec![z, s, o]), l(s2, vec![s2, z, s2]), l(o, vec![z, s, s])],
        (Family::D4, _) => [l(s, vec![s, z, s]), l(s2, vec![z, s2, o]), l(o, vec![z, s2, s2])],
    }
}

/// The contractive equation `Z = Phi(t, Z)` satisfied by `Z = 1/Y`, as the
/// polynomial `Phi` in `(t, Z)`.
pub fn z_rhs(spec: &TowerSpec) -> BivarPoly {
    let ctx = FieldCtx::gf4();
    let (o, s, s2) = (FieldElem::ONE, FieldElem(2), FieldElem(3));
    let terms: Vec<((u32, u32), FieldElem)> = match (spec.family, spec.param.0) {
        (Family::Q8, 0) => vec![((2, 0), o), ((1, 2), o)],
        (Family::Q8, _) => vec![((1, 2), o), ((2, 0), o), ((2, 1), s), ((2, 2), s2), ((2, 3), s)],
        (Family::D4, _) => {
            let zeta = spec.param;
            let zeta2 = ctx.mul(zeta, zeta);
            vec![((1, 3), zeta2), ((2, 0), o), ((2, 1), zeta2), ((2, 2), zeta)]
        }
    };
    BivarPoly::from_terms(&ctx, terms)
}

/// `F(t, Z) = Z + Phi(t, Z)`, which has `Z` as its nonsingular root.
pub fn z_equation(spec: &TowerSpec) -> BivarPoly {
    let ctx = FieldCtx::gf4();
    z_rhs(spec).checked_add(&BivarPoly::monomial(&ctx, FieldElem::ONE, 0, 1)).expect("same field")
}

fn eval_ypoly(ctx: &FieldCtx, p: &[FieldElem], ypows: &[LaurentSeries], prec: i64) -> LaurentSeries {
    let mut acc = LaurentSeries::zero(ctx, prec);
    for (i, &c) in p.iter().enumerate() {
        if !c.is_zero() {
            acc = &acc + &ypows[i].scale(c);
        }
    }
    acc
}

/// Build the tower and all eight Galois elements at `spec.precision`.
pub fn build_tower(spec: &TowerSpec) -> Result<Tower> {
    let ctx = FieldCtx::gf4();
    let n = spec.precision;
    let ni = n + GUARD;

    let rhs_poly = z_rhs(spec);
    let z = solve_contractive(&rhs_poly.to_zpoly(ni), ni)?;
    let resid = &z - &rhs_poly.to_zpoly(ni).eval(&z)?;
    if !resid.is_zero() {
        return Err(Error::TowerInvariant("Z does not satisfy its defining equation".into()));
    }
    let y = z.inverse()?;
    let t = LaurentSeries::var(&ctx, ni + 8);
    let w = uniformizer_numerator(spec);
    let max_deg = 6;
    let mut ypows = vec![LaurentSeries::one(&ctx, ni + 8)];
    for k in 1..max_deg {
        ypows.push(&ypows[k - 1] * &y);
    }
    let alpha3 = &eval_ypoly(&ctx, &w, &ypows, ni + 8) / &t;

    // Artin-Schreier relation for alpha_3.
    let rhs = as_rhs(spec);
    let as_resid = &(&alpha3.square() + &alpha3) - &eval_ypoly(&ctx, &rhs, &ypows, ni + 8);
    if !as_resid.is_zero() || as_resid.prec() < n {
        return Err(Error::TowerInvariant(format!("alpha_3 residual {as_resid:?}")));
    }

    let one = LaurentSeries::one(&ctx, ni + 8);
    let z3 = &z.square() * &z;
    let pi_k = &z.square().square() / &(&one + &z3);
    let pi_inv = &ypows[4] + &y;
    if !(&pi_k * &pi_inv).agrees_with(&one) {
        return Err(Error::TowerInvariant("pi_K * (Y^4 + Y) != 1".into()));
    }

    let gens = generator_lifts(spec);
    for (name, g) in spec.generator_names().iter().zip(&gens) {
        if !g.preserves(&ctx, &rhs) {
            return Err(Error::TowerInvariant(format!("lift of {name} does not preserve the defining equation")));
        }
    }
    // The printed third lift restricts to the product on M_0 but may be
    // either ordering of the first two.
    if gens[0].then_apply(&ctx, &gens[1]) != gens[2] && gens[1].then_apply(&ctx, &gens[0]) != gens[2] {
        return Err(Error::TowerInvariant("third generator is not a product of the first two".into()));
    }

    let group = close_lifts(&ctx, &gens, spec.generator_names())?;
    let mut elements = Vec::with_capacity(group.len());
    for (name, lift, order) in group {
        let num = eval_ypoly(&ctx, &yshift(&ctx, &w, lift.c), &ypows, ni + 8);
        let den = &alpha3 + &eval_ypoly(&ctx, &lift.u, &ypows, ni + 8);
        let s = (&num / &den).truncate(n);
        if s.prec() < n {
            return Err(Error::InsufficientPrecision(format!("series for {name} only known to t^{}", s.prec())));
        }
        let series = NottinghamElem::new(s).map_err(|e| Error::TowerInvariant(format!("{name}: {e}")))?;
        elements.push(GaloisElement { name, lift, order, series });
    }

    Ok(Tower {
        spec: *spec,
        ctx,
        z: z.truncate(n),
        y: y.truncate(n),
        alpha3: alpha3.truncate(n),
        pi_k: pi_k.truncate(n),
        elements,
    })
}

/// Closure of the generator lifts, named `id`, the generators, `r^2` for the
/// first generator `r` of order 4, then `g^3` or `g*r^2` per generator.
fn close_lifts(ctx: &FieldCtx, gens: &[AffineLift; 3], names: [&str; 3]) -> Result<Vec<(String, AffineLift, u32)>> {
    let mut seen: HashMap<AffineLift, usize> = HashMap::from([(AffineLift::identity(), 0)]);
    let mut all = vec![AffineLift::identity()];
    let mut queue = VecDeque::from([0usize]);
    while let Some(a) = queue.pop_front() {
        for g in gens {
            let p = all[a].then_apply(ctx, g);
            if !seen.contains_key(&p) {
                if all.len() >= 64 {
                    return Err(Error::ClosureTooLarge(64));
                }
                seen.insert(p.clone(), all.len());
                queue.push_back(all.len());
                all.push(p);
            }
        }
    }
    let order = |x: &AffineLift| {
        let mut p = x.clone();
        let mut k = 1;
        while p != AffineLift::identity() {
            p = p.then_apply(ctx, x);
            k += 1;
        }
        k
    };
    let pow = |x: &AffineLift, e: u32| (1..e).fold(x.clone(), |acc, _| acc.then_apply(ctx, x));
    let gname = |i: usize| names[i].to_string();

    let mut named: BTreeMap<usize, String> = BTreeMap::new();
    named.insert(0, "id".into());
    for (i, g) in gens.iter().enumerate() {
        named.insert(seen[g], gname(i));
    }
    let r = (0..3)
        .find(|&i| order(&gens[i]) == 4)
        .ok_or_else(|| Error::TowerInvariant("no generator of order 4".into()))?;
    let r2 = pow(&gens[r], 2);
    named.insert(seen[&r2], format!("{}^2", gname(r)));
    for (i, g) in gens.iter().enumerate() {
        if order(g) == 4 {
            named.insert(seen[&pow(g, 3)], format!("{}^3", gname(i)));
        } else {
            named.insert(seen[&g.then_apply(ctx, &r2)], format!("{}*{}^2", gname(i), gname(r)));
        }
    }
    if named.len() != all.len() || all.len() != 8 {
        return Err(Error::TowerInvariant(format!(
            "expected 8 distinctly named elements, got {} of {}",
            named.len(),
            all.len()
        )));
    }
    Ok(named.into_iter().map(|(k, name)| (name, all[k].clone(), order(&all[k]))).collect())
}

impl Tower {
    /// Look up by name; `g^2` is accepted for any named `g`.
    pub fn element(&self, name: &str) -> Result<&GaloisElement> {
        let missing = || Error::InvalidTower(format!("no element `{name}` in {}", self.spec.key()));
        if let Some(e) = self.elements.iter().find(|e| e.name == name) {
            return Ok(e);
        }
        let base = name.strip_suffix("^2").ok_or_else(missing)?;
        let g = self.elements.iter().find(|e| e.name == base).ok_or_else(missing)?;
        let sq = g.lift.then_apply(&self.ctx, &g.lift);
        self.elements.iter().find(|e| e.lift == sq).ok_or_else(missing)
    }

    pub fn names(&self) -> Vec<&str> {
        self.elements.iter().map(|e| e.name.as_str()).collect()
    }

    /// Named generators in the order `[1, 2, 0]`.
    pub fn generators(&self) -> Vec<(String, NottinghamElem)> {
        self.spec
            .generator_names()
            .iter()
            .map(|n| (n.to_string(), self.element(n).expect("generator present").series.clone()))
            .collect()
    }

    /// `pi_K o phi = pi_K` for every element, to the working precision.
    pub fn check_galois_invariance(&self) -> Result<()> {
        for e in &self.elements {
            let moved = self.pi_k.compose(e.series.series())?;
            if !moved.agrees_with(&self.pi_k) || moved.prec() < self.spec.precision {
                return Err(Error::TowerInvariant(format!("pi_K not fixed by {}", e.name)));
            }
        }
        Ok(())
    }

    /// `(N, D)` in `(t, Z)` with `sigma(t) = N(t, Z(t)) / D(t, Z(t))` and
    /// `D(0, 0) != 0`.
    pub fn rational_form(&self, name: &str) -> Result<(BivarPoly, BivarPoly)> {
        Ok(lift_rational_form(&self.spec, &self.element(name)?.lift))
    }
}

fn lift_rational_form(spec: &TowerSpec, lift: &AffineLift) -> (BivarPoly, BivarPoly) {
    let ctx = FieldCtx::gf4();
    let w = uniformizer_numerator(spec);
    let k = (w.len() - 1) as u32;
    let wc = yshift(&ctx, &w, lift.c);
    // Multiply numerator and denominator by t Z^k.
    let num = BivarPoly::from_terms(&ctx, wc.iter().enumerate().map(|(i, &c)| ((1, k - i as u32), c)));
    let mut den = BivarPoly::constant(&ctx, w[k as usize]);
    for (i, &c) in lift.u.iter().enumerate() {
        den.add_term((1, k - i as u32), c);
    }
    (num, den)
}

/// Rational form of one named element without building the series of the
/// whole group.
pub fn element_rational_form(spec: &TowerSpec, name: &str) -> Result<(BivarPoly, BivarPoly)> {
    let ctx = FieldCtx::gf4();
    let group = close_lifts(&ctx, &generator_lifts(spec), spec.generator_names())?;
    let find = |n: &str| group.iter().find(|(k, _, _)| k == n).map(|(_, l, _)| l.clone());
    let lift = match find(name) {
        Some(l) => l,
        None => {
            let g = name.strip_suffix("^2").and_then(find);
            let sq = g.map(|g| g.then_apply(&ctx, &g));
            sq.filter(|s| group.iter().any(|(_, l, _)| l == s))
                .ok_or_else(|| Error::InvalidTower(format!("no element `{name}` in {}", spec.key())))?
        }
    };
    Ok(lift_rational_form(spec, &lift))
}

/// `sigma(t)` for one element to precision `n`, through its rational form
/// in the root of the `Z` equation.
pub fn element_series(spec: &TowerSpec, name: &str, n: i64) -> Result<LaurentSeries> {
    let (num, den) = element_rational_form(spec, name)?;
    let z = solve_contractive(&z_rhs(spec).to_zpoly(n), n)?;
    Ok((num.eval_series(&z)?.truncate(n)).checked_div(&den.eval_series(&z)?.truncate(n))?.truncate(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Depth;

    fn spec(f: Family, p: u8, n: i64) -> TowerSpec {
        TowerSpec::new(f, FieldElem(p), n).unwrap()
    }

    #[test]
    fn q8_zero_basics() {
        let t = build_tower(&spec(Family::Q8, 0, 128)).unwrap();
        let ctx = &t.ctx;
        let expect = LaurentSeries::from_terms(ctx, &[(2, FieldElem::ONE), (5, FieldElem::ONE)], 8);
        assert_eq!(t.z.truncate(8), expect);
        assert_eq!(t.y.val(), Some(-2));
        assert_eq!(t.alpha3.val(), Some(-3));
        assert_eq!(t.pi_k.val(), Some(8));
        let s1 = &t.element("s1").unwrap().series;
        assert_eq!(s1.series().coeff(2), FieldElem(3));
        assert_eq!(t.element("s2").unwrap().series, s1.frobenius_coeffs());
        let mut names = t.names();
        names.sort();
        assert_eq!(names, ["id", "s0", "s0^3", "s1", "s1^2", "s1^3", "s2", "s2^3"]);
        assert_eq!(t.element("s1^2").unwrap().series.depth(), Depth::Finite(3));
    }

    #[test]
    fn d4_valuations_and_names() {
        let t = build_tower(&spec(Family::D4, 1, 128)).unwrap();
        assert_eq!(t.alpha3.val(), Some(-5));
        assert_eq!(t.elements.len(), 8);
        assert!(t.elements.iter().filter(|e| e.order == 2).count() == 5);
    }

    #[test]
    fn product_follows_anti_isomorphism() {
        for sp in TowerSpec::all(96) {
            let t = build_tower(&sp).unwrap();
            let [a, b, c] = sp.generator_names();
            let sa = &t.element(a).unwrap().series;
            let sb = &t.element(b).unwrap().series;
            let sc = &t.element(c).unwrap().series;
            let g = generator_lifts(&sp);
            let ctx = FieldCtx::gf4();
            // theta(a b) = theta(b) o theta(a)
            if g[0].then_apply(&ctx, &g[1]) == g[2] {
                assert_eq!(&sb.compose(sa).unwrap(), sc, "{}", sp.key());
            } else {
                assert_eq!(&sa.compose(sb).unwrap(), sc, "{}", sp.key());
            }
            assert_ne!(sb.compose(sa).unwrap(), sa.compose(sb).unwrap());
        }
    }

    #[test]
    fn rational_forms_match_series() {
        for sp in TowerSpec::all(80) {
            let t = build_tower(&sp).unwrap();
            for e in &t.elements {
                let (num, den) = t.rational_form(&e.name).unwrap();
                let zp = |p: &BivarPoly| p.to_zpoly(200).eval(&t.z).unwrap();
                let s = &zp(&num) / &zp(&den);
                assert!(s.agrees_with(e.series.series()), "{} {}", sp.key(), e.name);
            }
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(TowerSpec::new(Family::Q8, FieldElem(1), 64).is_err());
        assert!(TowerSpec::new(Family::D4, FieldElem(0), 64).is_err());
        assert!(TowerSpec::parse("q9", "0", 64).is_err());
        assert_eq!(TowerSpec::parse("d4", "s2", 64).unwrap().key(), "d4_s2");
    }

    #[test]
    fn lift_validation_rejects_bad_lift() {
        let ctx = FieldCtx::gf4();
        let sp = spec(Family::Q8, 0, 64);
        let bad = AffineLift { c: FieldElem(2), u: vec![FieldElem::ONE, FieldElem::ONE] };
        assert!(!bad.preserves(&ctx, &as_rhs(&sp)));
        for g in generator_lifts(&sp) {
            assert!(g.preserves(&ctx, &as_rhs(&sp)));
        }
    }
}
