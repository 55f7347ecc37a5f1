use criterion::{criterion_group, criterion_main, Criterion};
use nottingham::christol::{oracle_kernel_automaton, poly_to_automaton};
use nottingham::fixtures;
use nottingham::minpoly::guess_annihilator;
use nottingham::ramification::{close_group, Convention};
use nottingham::towers::{build_tower, element_series, TowerSpec};
use nottingham_bench::{printed, tower};
use std::hint::black_box;

fn towers(c: &mut Criterion) {
    let mut g = c.benchmark_group("towers");
    g.sample_size(10);
    for spec in TowerSpec::all(4096) {
        g.bench_function(format!("build {}", spec.key()), |b| b.iter(|| build_tower(black_box(&spec)).unwrap()));
    }
    let tw = tower("q8_s", 4096);
    let gens: Vec<_> = tw.generators().into_iter().take(2).collect();
    g.bench_function("close_group q8_s", |b| b.iter(|| close_group(black_box(&gens), 64, Convention::Anti).unwrap()));
    g.finish();
}

fn minpoly(c: &mut Criterion) {
    let tw = tower("q8_s", 4096);
    let s = tw.element("s1").unwrap().series.series().clone();
    c.bench_function("guess_annihilator q8_s.s1", |b| b.iter(|| guess_annihilator(black_box(&s), 3, 3, 4096).unwrap()));
}

fn automata(c: &mut Criterion) {
    let mut g = c.benchmark_group("automata");
    g.sample_size(10);
    for key in ["q8_0.s1", "q8_s.s1", "d4_s.t2"] {
        let f = printed(key);
        g.bench_function(format!("synthesize {key}"), |b| b.iter(|| poly_to_automaton(black_box(&f), 4096).unwrap()));
    }
    let a = fixtures::automaton("d4_s.t1").unwrap().automaton;
    let b2 = fixtures::automaton("d4_s2.t2").unwrap().automaton.frobenius_labels();
    g.bench_function("equivalent 104x104", |b| b.iter(|| a.equivalent(black_box(&b2)).unwrap()));
    let spec = TowerSpec::parse("q8", "s", 1 << 20).unwrap();
    let oracle = element_series(&spec, "s0^2", 1 << 20).unwrap();
    g.bench_function("oracle kernel q8_s.s0^2", |b| {
        b.iter(|| oracle_kernel_automaton(black_box(&oracle), 1 << 20, 100_000, 4096).unwrap())
    });
    g.finish();
}

criterion_group!(benches, towers, minpoly, automata);
criterion_main!(benches);
