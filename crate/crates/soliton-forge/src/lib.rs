//! Exact symbolic-numeric toolkit for soliton phases of the KP-II equation
//! and its companion models (KdV, mKdV, ZK, mZK).
//!
//! The crate is organized around an exact exponential-polynomial ring
//! ([`expalg`]), constructors for the concrete soliton phases and their
//! symmetry transforms ([`phases`]), the characterization functionals in
//! cleared polynomial form ([`operators`]), cone decomposition /
//! classification / resonant reconstruction ([`cones`]), floating-point
//! field evaluation and finite-difference PDE cross-checks ([`numeric`]),
//! an expression DSL ([`dsl`]), machine-readable reports ([`report`]) and
//! the built-in verification suite ([`selftest`]).

pub mod cones;
pub mod dsl;
pub mod expalg;
pub mod numeric;
pub mod operators;
pub mod phases;
pub mod report;
pub mod selftest;

pub use expalg::{AlgebraError, ExpPoly, Term, VarSet};
pub use phases::{Phase, PhaseSpec};
