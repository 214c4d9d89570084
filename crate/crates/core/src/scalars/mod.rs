//! Exact scalars: rationals, elements of cyclotomic fields Q(ζ_N), and
//! univariate polynomials in ε over either.
//!
//! Everything in the crate is generic over [`Ring`] (tensors, local maps,
//! ε-polynomial maps) or [`Field`] (ranks, inverses). A ring element knows its
//! own [`Ring::Domain`], which is what lets a cyclotomic tensor create zeros
//! and ones of the right order without any global state.

mod cyclotomic;
mod eps;
mod rational;

use std::fmt;

pub use cyclotomic::{cyclotomic_polynomial, Cyclotomic, CyclotomicField};
pub use eps::EpsPolynomial;
pub use rational::Rational;

/// Commutative ring with exact equality.
///
/// Binary operations assume both operands live in the same domain. Containers
/// (tensors, matrices) check domains up front and report a mismatch as an
/// error, so the per-element operations may panic on a mismatch.
pub trait Ring: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    type Domain: Clone + PartialEq + fmt::Debug + Send + Sync + 'static;

    fn domain(&self) -> Self::Domain;
    fn zero(domain: &Self::Domain) -> Self;
    fn one(domain: &Self::Domain) -> Self;
    fn from_rational(r: &Rational, domain: &Self::Domain) -> Self;

    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;

    fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    fn is_one(&self) -> bool {
        *self == Self::one(&self.domain())
    }

    fn from_i64(v: i64, domain: &Self::Domain) -> Self {
        Self::from_rational(&Rational::from(v), domain)
    }

    fn pow(&self, mut exp: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(&self.domain());
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

/// A [`Ring`] in which every nonzero element is invertible.
pub trait Field: Ring {
    fn inv(&self) -> Option<Self>;

    fn div(&self, rhs: &Self) -> Option<Self> {
        rhs.inv().map(|r| self.mul(&r))
    }

    /// Exact rank of a dense row-major matrix over this field.
    ///
    /// The default is plain Gaussian elimination; [`Rational`] overrides it
    /// with fraction-free elimination.
    fn matrix_rank(rows: Vec<Vec<Self>>) -> usize {
        crate::tensors::rank::gaussian_rank(rows)
    }
}

/// Display domain of a scalar type, as written to tensor files.
pub trait DomainLabel {
    fn label(&self) -> String;
}

impl DomainLabel for () {
    fn label(&self) -> String {
        "rational".to_string()
    }
}

/// Exact scalars that embed into some Q(ζ_M).
pub trait CyclotomicEmbed: Field {
    /// Smallest N with the domain contained in Q(ζ_N).
    fn domain_order(domain: &Self::Domain) -> u32;

    fn to_cyclotomic(&self, field: &CyclotomicField) -> crate::error::Result<Cyclotomic>;
}

impl CyclotomicEmbed for Rational {
    fn domain_order(_: &()) -> u32 {
        1
    }

    fn to_cyclotomic(&self, field: &CyclotomicField) -> crate::error::Result<Cyclotomic> {
        Ok(field.constant(self.clone()))
    }
}

impl CyclotomicEmbed for Cyclotomic {
    fn domain_order(domain: &CyclotomicField) -> u32 {
        domain.order()
    }

    fn to_cyclotomic(&self, field: &CyclotomicField) -> crate::error::Result<Cyclotomic> {
        self.embed(field)
    }
}
