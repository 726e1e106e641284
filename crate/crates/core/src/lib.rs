//! Decision procedures for the quantifier-free boolean algebra of finite
//! sets with symbolic and constant cardinality constraints.
//!
//! The pipeline: formulas over sets and cardinalities are reduced to integer
//! feasibility over Venn-region counts ([`solver`]), decided exactly by a
//! rational simplex with branch-and-bound ([`ilp`]), and differentially
//! tested against a brute-force enumeration oracle ([`semantics`]).
//! Tree-shaped constraints ([`itree`]) get a dedicated polynomial-time
//! procedure. [`hardness`] provides reductions from 3-SAT and subset-sum,
//! and [`gen`] a deterministic random problem generator.

pub mod ast;
pub mod gen;
pub mod hardness;
pub mod ilp;
pub mod itree;
pub mod parser;
pub mod regions;
pub mod semantics;
pub mod solver;

pub use ast::{free_vars, to_nnf, type_check, Atom, Formula, IntTerm, Problem, SetTerm};
pub use semantics::{eval_formula, model_from_regions, oracle_sat, Model, OracleVerdict, RegionVector};
// solver re-exports added once the module lands
