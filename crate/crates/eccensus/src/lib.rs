//! Exact arithmetic census of elliptic curve groups over prime fields.
//!
//! The library sweeps short Weierstrass models over small prime fields,
//! classifies their point groups Z/N1 x Z/N1N2, and verifies in exact
//! rational arithmetic that the automorphism-weighted model counts agree
//! with Kronecker class numbers H(D_N(p)) prime by prime.  On top of the
//! census sit the arithmetic constants K(N), K(N,m), K(G) and K0(N,m),
//! evaluated both as truncations of their defining sums and as Euler
//! products, in the originally published form and in the corrected
//! ("erratum") form.

pub mod arith;
pub mod census;
pub mod constants;
pub mod curves;
pub mod quadforms;

pub use arith::Rational;
pub use constants::{FormulaVariant, TruncationParams};
pub use curves::{GroupShape, PrimeFieldCurve};
pub use quadforms::{ClassData, Discriminant};
