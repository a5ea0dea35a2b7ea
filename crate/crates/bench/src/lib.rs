//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use pisotcm::cmtorus::{delta_from_ints, make_cm_field, multiplication_matrix, CMField, LatticeAutomorphism};
use pisotcm::numberfield::{make_field, FieldElement, IntPolynomial, NumberField};

pub fn field(poly: &str, bits: u64) -> Arc<NumberField> {
    make_field(IntPolynomial::parse(poly).expect("valid polynomial"), bits).expect("valid field")
}

pub fn cm_field(poly: &str, delta: &[i64], bits: u64) -> CMField {
    let k = field(poly, bits);
    make_cm_field(&k, &delta_from_ints(&k, delta).expect("integral delta")).expect("CM field")
}

/// `E = ℚ(ζ₅)` over `ℚ(√5)` with `f_θ`.
pub fn zeta5(bits: u64) -> (CMField, LatticeAutomorphism) {
    let e = cm_field("x^2-x-1", &[-2, -1], bits);
    let aut = multiplication_matrix(&e, &FieldElement::theta(e.base())).expect("unit");
    (e, aut)
}
