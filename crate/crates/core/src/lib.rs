//! Nottingham-group subgroups over GF(4): field towers, Galois actions as
//! power series, annihilating polynomials and automata.

mod bitpoly;
pub mod christol;
pub mod dfao;
pub mod error;
pub mod fixtures;
pub mod gf2m;
pub mod minpoly;
pub mod poly;
pub mod ramification;
pub mod series;
pub mod towers;

pub use christol::{
    furstenberg, oracle_kernel_automaton, poly_to_automaton, rational_to_automaton, DiagonalRep, Method,
    SequenceOracle, SynthesisReport,
};
pub use dfao::{Dfao, Equivalence};
pub use error::{Error, Result};
pub use gf2m::{FieldCtx, FieldElem};
pub use minpoly::{guess_annihilator, verify_annihilator};
pub use poly::BivarPoly;
pub use ramification::{close_group, Convention, GroupClosure, RamificationProfile};
pub use series::{solve_contractive, Depth, LaurentSeries, NottinghamElem, ZPoly, DEFAULT_PRECISION};
pub use towers::{build_tower, Family, Tower, TowerSpec};
