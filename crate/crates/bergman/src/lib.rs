//! Numerical toolkit for Toeplitz operators with radial symbols on Bergman
//! spaces of the unit ball in C^n.
//!
//! The library is organized around one pipeline:
//!
//! * [`indexing`] enumerates the monomial orthonormal basis and its
//!   normalization constants;
//! * [`symbols`] defines radial profiles and finite symbol expressions,
//!   together with their JSON form;
//! * [`quadrature`] provides certified radial and ball integration rules
//!   (Gauss-Jacobi in the variable u = t^2, tensor rules over the ball);
//! * [`spectra`] computes the eigenvalue sequence omega(f, s) of a radial
//!   symbol and classifies its zero degrees;
//! * [`operators`] assembles truncated Toeplitz matrices entry-exactly and
//!   composes them;
//! * [`muntz`] decides reciprocal-sum divergence for structured integer sets
//!   and evaluates Muntz distances by two independent routes;
//! * [`reconstruction`] builds moment-constraint systems and certifies that
//!   their nullspace is trivial;
//! * [`harness`] wires the pieces into end-to-end zero-product experiments.

pub mod error;
pub mod harness;
pub mod indexing;
pub mod muntz;
pub mod operators;
pub mod quadrature;
pub mod reconstruction;
pub mod spectra;
pub mod symbols;

pub use error::{Error, Result};
pub use indexing::{BasisOrder, MultiIndex, SpaceParams};
pub use symbols::{RadialProfile, SymbolExpr};
