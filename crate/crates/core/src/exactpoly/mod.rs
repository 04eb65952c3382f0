//! Exact sparse polynomials, jets and local quotient algebras.

pub mod monomial;
pub mod parse;
pub mod poly;
pub mod quotient;

pub use monomial::{monomials_up_to, Monomial};
pub use parse::{parse_poly, parse_poly_infer};
pub use poly::JetPolynomial;
pub use quotient::{
    default_order, is_quasi_homogeneous, jacobian_ideal, milnor_algebra, normal_form,
    quotient_basis, tjurina_algebra, verify_euler_witness, QuasiHomogeneity,
    QuotientPresentation, DEFAULT_ORDER_CAP,
};
