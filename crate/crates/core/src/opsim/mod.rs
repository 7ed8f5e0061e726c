//! Lattice surrogates of the operator constructions.

pub mod funcs;
pub mod grid;
pub mod haar;
pub mod efk;
pub mod rmat;
pub mod verma;
pub mod weyl;
