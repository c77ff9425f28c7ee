//! Sampling-based decision procedures for the constraint satisfaction
//! problem of first-order theories.
//!
//! A *sampling* for a theory is a family of finite structure sets, indexed
//! by the number of variables, such that an instance is satisfiable in some
//! model of the theory iff it is satisfiable in one of the finite samples.
//! The crate provides built-in samplings, a product construction combining
//! samplings of theories with disjoint signatures, exact and
//! consistency-based solvers over samples, and polymorphism checks that
//! justify when the consistency-based solvers are complete.

pub mod definition;
pub mod formulas;
pub mod io;
pub mod model;
pub mod polymorphisms;
pub mod samplings;
pub mod solvers;
