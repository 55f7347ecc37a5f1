use nottingham::christol::MIN_WINDOW;
use nottingham::christol::{
    brute_force_diagonal, furstenberg, oracle_kernel_automaton, poly_to_automaton, AutomatonOracle,
};
use nottingham::dfao::{parse_tsv, Dfao, Equivalence};
use nottingham::minpoly::{guess_annihilator, series_root, verify_annihilator};
use nottingham::towers::{build_tower, element_series, TowerSpec};
use nottingham::{fixtures, BivarPoly, Error, FieldCtx, FieldElem};
use proptest::prelude::*;

#[test]
fn fixture_serialization_round_trips() {
    for fx in fixtures::automata().unwrap() {
        let a = &fx.automaton;
        assert_eq!(&Dfao::parse_json(&a.to_json_string()).unwrap(), a, "{}", fx.key);
        assert_eq!(&parse_tsv(&a.to_tsv(&fx.key)).unwrap()[0].1, a);
        let m = a.minimize();
        assert_eq!(m.minimize(), m);
        assert!(m.equivalent(a).unwrap().is_equivalent());
    }
}

#[test]
fn witnesses_are_least_differences() {
    let all = fixtures::automata().unwrap();
    for a in &all {
        for b in &all {
            if let Equivalence::Differ(w) = a.automaton.equivalent(&b.automaton).unwrap() {
                let w: usize = w.try_into().unwrap();
                let (sa, sb) = (a.automaton.sequence(w + 1), b.automaton.sequence(w + 1));
                assert_eq!(sa[..w], sb[..w]);
                assert_ne!(sa[w], sb[w]);
            }
        }
    }
}

#[test]
fn single_element_series_matches_tower() {
    for spec in TowerSpec::all(512) {
        let tw = build_tower(&spec).unwrap();
        for e in &tw.elements {
            assert_eq!(&element_series(&spec, &e.name, 512).unwrap(), e.series.series(), "{} {}", spec.key(), e.name);
        }
    }
}

#[test]
fn fixture_series_start_like_tower_series() {
    for fx in fixtures::automata().unwrap() {
        let spec = TowerSpec::all(256).into_iter().find(|s| s.key() == fx.tower_key()).unwrap();
        let s = element_series(&spec, fx.element(), 256).unwrap();
        assert_eq!(fx.automaton.series_of(256), s, "{}", fx.key);
    }
}

fn bfs_depth(a: &Dfao) -> u32 {
    let mut depth = vec![u32::MAX; a.num_states()];
    depth[a.start()] = 0;
    let mut queue = std::collections::VecDeque::from([a.start()]);
    while let Some(s) = queue.pop_front() {
        for &t in &a.states()[s].next {
            if depth[t] == u32::MAX {
                depth[t] = depth[s] + 1;
                queue.push_back(t);
            }
        }
    }
    depth.into_iter().max().unwrap()
}

/// Recovered exactly when every kernel window has enough known terms, and
/// refused otherwise.
#[test]
fn oracle_kernel_on_fixtures() {
    let n: u64 = 1 << 20;
    for fx in fixtures::automata().unwrap() {
        let oracle = AutomatonOracle { automaton: &fx.automaton, len: n };
        let r = oracle_kernel_automaton(&oracle, n, 10_000, 1024);
        let d = bfs_depth(&fx.automaton.minimize());
        let reachable = (MIN_WINDOW as u64) << (2 * (d + 1)) <= n;
        match r {
            Ok(r) => assert!(r.automaton.equivalent(&fx.automaton).unwrap().is_equivalent(), "{}", fx.key),
            Err(Error::InsufficientPrecision(_)) => assert!(!reachable, "{} (depth {d})", fx.key),
            Err(e) => panic!("{}: {e}", fx.key),
        }
    }
}

/// Nonsingular `f` of degree at most 2 in each variable.
fn arb_nonsingular() -> impl Strategy<Value = BivarPoly> {
    (proptest::collection::vec(0u8..4, 9), 1u8..4).prop_map(|(cs, lin)| {
        let ctx = FieldCtx::gf4();
        let mut terms: Vec<((u32, u32), FieldElem)> = Vec::new();
        for (k, &c) in cs.iter().enumerate() {
            let m = ((k / 3) as u32, (k % 3) as u32);
            if m != (0, 0) && m != (0, 1) {
                terms.push((m, FieldElem(c)));
            }
        }
        terms.push(((0, 1), FieldElem(lin)));
        BivarPoly::from_terms(&ctx, terms)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn synthesis_commutes_with_frobenius(f in arb_nonsingular()) {
        let a = poly_to_automaton(&f, 512).unwrap();
        let b = poly_to_automaton(&f.frobenius(), 512).unwrap();
        prop_assert!(a.automaton.frobenius_labels().equivalent(&b.automaton).unwrap().is_equivalent());
        prop_assert_eq!(a.automaton.series_of(512), series_root(&f, 512).unwrap());
    }

    #[test]
    fn diagonal_equals_root(f in arb_nonsingular()) {
        let rep = furstenberg(&f).unwrap();
        let root = series_root(&f, 48).unwrap();
        let d = brute_force_diagonal(&rep, 48);
        for (k, c) in d.iter().enumerate() {
            prop_assert_eq!(*c, root.coeff(k as i64));
        }
    }

    #[test]
    fn guessed_polynomial_annihilates(f in arb_nonsingular()) {
        let root = series_root(&f, 256).unwrap();
        let g = guess_annihilator(&root, 2, 2, 256).unwrap();
        prop_assert_eq!(verify_annihilator(&g, &root).unwrap(), 256);
    }
}
