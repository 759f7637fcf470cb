//! Toolkit for phases φ̄ on the 2-torus: exact trigonometric polynomials,
//! the derivative-recursion ring behind the factorisation hypothesis (FH),
//! a grid witness search for FH failure, and numerical engines for
//! Dirichlet partial sums and principal-value oscillatory integrals.

pub mod corpus;
pub mod error;
pub mod fft2;
pub mod fhcheck;
pub mod multiindex;
pub mod norms;
pub mod oscint;
pub mod par;
pub mod qcalc;
pub mod quad;
pub mod special;
pub mod trigpoly;

pub use error::{Error, Result};
pub use trigpoly::{Direction, PhaseFamily, TrigPoly};
