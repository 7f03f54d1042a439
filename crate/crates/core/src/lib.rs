//! Exact slope-graded mutation calculus for m-cluster categories of
//! hereditary algebras.

pub mod acceptance;
pub mod dilog;
pub mod enumeration;
pub mod fans;
pub mod finrep;
pub mod fixtures;
pub mod linalg;
pub mod mutation;
pub mod render;
pub mod seed;

pub use mutation::{GradedVector, MutationContext, MutationError, MutationState};
pub use seed::{SeedError, ValuedQuiver};
