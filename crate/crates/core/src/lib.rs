//! Splitting integrators for the ε-dependent Benjamin–Bona–Mahony equation
//!
//! ```text
//! ∂t u + P(∂x)/(1 - ε∂x²) u + ε ∂x/(1 - ε∂x²) u² = 0,   x ∈ [-π, π) periodic,
//! ```
//!
//! on a Fourier pseudospectral grid. The linear part is integrated exactly,
//! the quadratic part by truncated Taylor flows, and the two are composed by
//! Lie, Strang, Ruth (order 3) or Yoshida (order 4) splitting. Reference
//! solvers and study drivers measure convergence in τ and ε and the
//! approach to the KdV limit.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datum;
pub mod error;
pub mod fit;
pub mod harness;
pub mod lemmas;
pub mod nonlinear;
pub mod operators;
pub mod reference;
pub mod schemes;
pub mod spectral;

pub use datum::InitialDatum;
pub use error::{Error, Result};
pub use nonlinear::NonlinearFlow;
pub use operators::{DispersionPolynomial, OperatorSymbol};
pub use schemes::{Scheme, SchemeSpec, SplitProblem, Stepper};
pub use spectral::{Field, SobolevWeight, SpectralGrid};
