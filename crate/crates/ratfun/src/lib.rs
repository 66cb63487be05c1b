//! Exact algebra over `Q(x¹..xⁿ, y¹..yⁿ)` and its quadratic extension by a
//! single square root `w`.
//!
//! Polynomials are sparse and ordered graded-lexicographically with base
//! variables before fiber variables. Rational functions keep their
//! denominators factored into primitive atoms. [`ExtScalar`] is `a + b·w` with
//! `w² = R` for a fixed radicand polynomial `R`.

pub mod error;
pub mod ext;
pub mod monomial;
pub mod poly;
pub mod ratfun;

pub use error::RatFunError;
pub use ext::{Certificate, ExtContext, ExtScalar};
pub use monomial::Monomial;
pub use poly::{MultiPoly, Var};
pub use ratfun::{ratfun_arith, ArithOp, Atom, RatFun};

/// Arbitrary-precision rational number used for every coefficient.
pub type Rational = num_rational::BigRational;

/// Exact formal derivative of a polynomial.
pub fn poly_diff(p: &MultiPoly, v: Var) -> MultiPoly {
    p.diff(v)
}

/// Exact derivative of an extension element.
pub fn ext_diff(e: &ExtScalar, v: Var) -> ExtScalar {
    e.diff(v)
}

/// Rationality certificate of an extension element.
pub fn is_rational(e: &ExtScalar) -> Certificate {
    e.certificate()
}
