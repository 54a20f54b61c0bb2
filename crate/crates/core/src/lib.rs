//! Exact arithmetic for integral points on affine quadric fibrations
//! `q(x, y, z) = p(t)` over the rationals: Brauer group classification,
//! quaternion generators, local solubility certificates and strong
//! approximation verdicts.

pub mod arith;
pub mod brauer;
pub mod central;
pub mod localsolve;
pub mod error;
pub mod numfield;
pub mod poly;
pub mod quadform;
pub mod search;

pub use arith::{BrInv, Place, Prime, Rational, SquareClass};
pub use poly::{Factorization, RationalPoly};
pub use quadform::QuadraticForm;
pub use error::{Error, Result};
