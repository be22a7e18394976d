//! High-precision evaluation of the Grothendieck-Krivine constant
//! `K_G = π / (2 ln(1 + √2))` and of the identities that tie it to a
//! Fourier double series, complete elliptic integrals, a set of hyperbolic
//! integrals, and Khintchine's product.

pub mod error;
pub mod numeric;
pub mod quadrature;
pub mod elliptic;
pub mod identities;
pub mod khintchine;
pub mod series;

pub use error::{Error, Result};
pub use identities::{verify, verify_all, IdentityId, IdentityReport};
pub use numeric::{const_kg, const_l, const_pi, BigReal, CompensatedSum, PrecisionContext};
pub use quadrature::{integrate, integrate_to_infinity, QuadratureResult, TanhSinh};
