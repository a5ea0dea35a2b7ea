//! Pisot units, CM complex tori and the entropy of their lattice
//! automorphisms, computed exactly and emitted as verifiable certificates.

pub mod certificate;
pub mod cmtorus;
pub mod dynamics;
pub mod entropy;
pub mod error;
pub mod interval;
pub mod linalg;
pub mod numberfield;
pub mod pisot;

pub use error::{Error, Result};
pub use num_bigint::BigInt;
pub use num_rational::BigRational;
