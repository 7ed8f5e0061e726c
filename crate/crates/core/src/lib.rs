//! Numerical laboratory for the modular double of U_q(sl(2,R)).

pub mod error;
pub mod identities;
pub mod kernels;
pub mod modulus;
pub mod opsim;
pub mod quadrature;
pub mod specfun;

pub use error::{Error, Result};
pub use modulus::Modulus;
