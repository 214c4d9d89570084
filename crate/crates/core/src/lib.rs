//! Exact-arithmetic laboratory for asymptotic SLOCC transformations between
//! GHZ, W and Dicke states.
//!
//! The crate builds and verifies degeneration certificates (border-rank upper
//! bounds), compiles them into exact restrictions via root-of-unity
//! interpolation, evaluates fixed-basis support functionals, constructs
//! m-average-free sets, and simulates the Coppersmith–Winograd hashing
//! protocol that turns W states into GHZ states.

pub mod avgfree;
pub mod cwprotocol;
pub mod degeneration;
pub mod error;
pub mod format;
pub mod interpolation;
pub mod report;
pub mod scalars;
pub mod slocc;
pub mod states;
pub mod support;
pub mod tensors;

pub use error::{Error, Result};
pub use scalars::{Cyclotomic, CyclotomicEmbed, CyclotomicField, EpsPolynomial, Field, Rational, Ring};
pub use tensors::{LocalMapSet, Matrix, SparseTensor, TensorShape};
