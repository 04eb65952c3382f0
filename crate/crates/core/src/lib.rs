//! Exact computational homological algebra for isolated hypersurface
//! singularities: Milnor and Tjurina algebras, Hochschild calculus of
//! ℤ/2-graded A∞-algebras, triangular gluing, polyvector fields, and Koszul
//! matrix factorizations with homotopy transfer.

pub mod ainfty;
pub mod error;
pub mod exactpoly;
pub mod hochschild;
pub mod linalg;
pub mod matfact;
pub mod morita;
pub mod polyvector;
pub mod rational;
pub mod sample;
pub mod superlin;

pub use error::{Error, Result};
pub use rational::Rational;
