//! Finite structures, ages and their Fraïssé limits.

pub mod age;
pub mod limit;
pub mod rational;
pub mod structure;
pub mod types;

pub use age::{one_point_extensions, verify_amalgamation, AgeKind, AgeOracle, AgeReport};
pub use limit::{arity_limit, build_limit, DemandRecord, Element, LimitStructure};
pub use rational::{format_rat, parse_rat, Rat};
pub use structure::{FiniteStructure, Signature, Symbol};
pub use types::TupleType;
