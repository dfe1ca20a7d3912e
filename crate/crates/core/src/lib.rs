//! Non-uniform cellular automata over finitely generated abelian groups.

pub mod cli;
pub mod configuration;
pub mod decide;
pub mod engine;
pub mod error;
pub mod linear;
pub mod rules;
pub mod spec;
pub mod universe;
pub mod words;

pub use configuration::{Alphabet, Asymptotic, Configuration, Letter, Pattern};
pub use error::{NucaError, Result};
pub use rules::{
    induced_local_map, verify_ubs, BlockInverse, BlockMap, LocalRule, Memory, RuleConfiguration, RuleLayout,
    UbsWitness,
};
pub use universe::{Element, FiniteSubset, GroupUniverse};
pub use words::Budget;
pub use engine::{async_run, compose, identity_check, IdentityVerdict, Nuca};
