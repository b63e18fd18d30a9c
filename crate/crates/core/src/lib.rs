//! Numerical laboratory for large-time stabilization of semilinear
//! parabolic equations.
//!
//! The crate answers three kinds of questions about equations of the form
//! `u_t = \u{394}u + b(x, u, Du) - absorption(x, u)`:
//!
//! * **Does the sufficient criterion hold?** [`criterion`] classifies the
//!   three improper integrals (spatial non-degeneracy, Keller-Osserman-type
//!   superlinearity, gradient control) and assembles a verdict.
//! * **How fast must solutions decay?** [`envelope`] inverts the dyadic
//!   sup-norm estimate into an explicit bound `M(r, t)`.
//! * **Does it actually happen?** [`pde`] simulates the radial equations on
//!   a truncated ball, and [`stationary`] searches for bounded positive
//!   stationary solutions that witness non-stabilization when the exponent
//!   conditions fail.
//!
//! All numerics are generic over the scalar type via [`real::Real`];
//! concrete `f64` aliases are exported at the crate root.

pub mod criterion;
pub mod envelope;
pub mod error;
pub mod funcs;
pub mod numeric;
pub mod pde;
pub mod real;
pub mod stationary;

pub use error::{Error, Result};
pub use real::Real;

pub type ScalarFunction64 = funcs::ScalarFunction<f64>;
pub type StructureTriple64 = funcs::StructureTriple<f64>;
pub type StabilizationReport64 = criterion::StabilizationReport<f64>;
pub type EnvelopeParams64 = envelope::EnvelopeParams<f64>;
pub type EquationSpec64 = pde::EquationSpec<f64>;
