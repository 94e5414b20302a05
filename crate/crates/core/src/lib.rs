//! Exact symbolic kernel for the loop Virasoro Lie conformal algebra 𝒞𝒲.
//!
//! The crate is organised bottom-up:
//!
//! * [`poly`]: canonical multivariate polynomials over ℚ with a text grammar.
//! * [`algebra`]: graded conformal algebras, the λ-bracket and axiom checks.
//! * [`distribution`]: truncated formal distributions, locality and the
//!   formal Fourier transform.
//! * [`module`]: conformal modules and the built-in families.
//! * [`derivation`]: conformal derivations and inner-ness extraction.
//! * [`classify`]: bounded-degree classification solvers.
//! * [`mutation`]: single-monomial mutants for sensitivity testing.

pub mod algebra;
pub mod classify;
pub mod derivation;
pub mod distribution;
pub mod linalg;
pub mod module;
pub mod mutation;
pub mod poly;
pub mod report;
pub mod sample;
pub mod window;

pub use algebra::{make_cw, ConformalElement, GradedConformalAlgebra, LambdaValue};
pub use poly::{parse, render, Degree, MultiPoly, Rational, Var};
pub use report::{CheckReport, SuiteReport, Witness};
pub use window::Window;
