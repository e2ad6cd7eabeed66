//! Non-commutative polynomial identity testing for circuits with few parse-tree shapes.

pub mod biwa;
pub mod circuit;
pub mod const_width;
pub mod depth;
pub mod error;
pub mod fewpt;
pub mod field;
pub mod generate;
pub mod guide;
pub mod hard;
pub mod hitting;
pub mod linalg;
pub mod ncpoly;
pub mod perm;
pub mod primes;
pub mod sml;
pub mod upoly;

pub use circuit::{Circuit, CircuitBuilder};
pub use error::{Error, Result};
pub use field::{FieldElement, Fp};
pub use ncpoly::{NcPolynomial, Word};
pub use perm::Perm;
pub use sml::SmlPolynomial;
