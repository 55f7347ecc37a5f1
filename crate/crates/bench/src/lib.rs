//! Inputs shared by the benchmarks.

use nottingham::towers::{build_tower, Tower, TowerSpec};
use nottingham::{fixtures, BivarPoly};

pub fn tower(key: &str, precision: i64) -> Tower {
    let spec = TowerSpec::all(precision).into_iter().find(|s| s.key() == key).expect("known tower key");
    build_tower(&spec).expect("tower builds")
}

pub fn printed(key: &str) -> BivarPoly {
    fixtures::polynomial(key).expect("printed polynomial")
}
