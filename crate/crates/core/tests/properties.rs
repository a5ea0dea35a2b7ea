use std::sync::Arc;

use proptest::prelude::*;

use pisotcm::cmtorus::{delta_from_ints, make_cm_field, multiplication_matrix, CMField};
use pisotcm::dynamics::{iterate, Orbit, TorusMap, TorusPoint};
use pisotcm::interval::rat;
use pisotcm::numberfield::{make_field, FieldElement, IntPolynomial, NumberField};
use pisotcm::pisot::{find_pisot_unit, is_pisot_unit};

fn field(poly: &str) -> Arc<NumberField> {
    make_field(IntPolynomial::parse(poly).unwrap(), 96).unwrap()
}

fn cm(poly: &str, delta: &[i64]) -> CMField {
    let k = field(poly);
    make_cm_field(&k, &delta_from_ints(&k, delta).unwrap()).unwrap()
}

fn coords(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-6i64..=6, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn norm_is_multiplicative(a in coords(3), b in coords(3)) {
        let k = field("x^3-x^2-2x+1");
        let x = FieldElement::from_ints(&k, &a).unwrap();
        let y = FieldElement::from_ints(&k, &b).unwrap();
        prop_assert_eq!(x.mul(&y).unwrap().norm(), x.norm() * y.norm());
    }

    #[test]
    fn division_inverts_multiplication(a in coords(2), b in coords(2)) {
        let k = field("x^2-3");
        let x = FieldElement::from_ints(&k, &a).unwrap();
        let y = FieldElement::from_ints(&k, &b).unwrap();
        prop_assume!(!y.is_zero());
        prop_assert_eq!(x.mul(&y).unwrap().div(&y).unwrap(), x);
    }

    #[test]
    fn lattice_matrix_is_a_homomorphism(i in 0u32..4, j in 0u32..4) {
        let e = cm("x^2-x-1", &[-2, -1]);
        let t = FieldElement::theta(e.base());
        let (a, b) = (t.pow(i), t.pow(j));
        let ma = multiplication_matrix(&e, &a).unwrap().matrix;
        let mb = multiplication_matrix(&e, &b).unwrap().matrix;
        let mab = multiplication_matrix(&e, &a.mul(&b).unwrap()).unwrap().matrix;
        prop_assert_eq!(ma.mul(&mb), mab);
    }

    #[test]
    fn inverse_map_undoes_steps(num in prop::collection::vec(0i64..7, 4), n in 1u64..12) {
        let e = cm("x^2-x-1", &[-2, -1]);
        let aut = multiplication_matrix(&e, &FieldElement::theta(e.base())).unwrap();
        let f = TorusMap::from(&aut);
        let start: Vec<_> = num.iter().map(|&k| rat(k, 7)).collect();
        let Orbit::Exact(fwd) = iterate(&f, &TorusPoint::exact(start.clone()), n).unwrap() else { unreachable!() };
        let end = fwd.points.last().unwrap().clone();
        let Orbit::Exact(back) = iterate(&f.inverse().unwrap(), &TorusPoint::exact(end), fwd.points.len() as u64 - 1).unwrap() else { unreachable!() };
        prop_assert_eq!(back.points.last().unwrap(), &start);
    }
}

#[test]
fn powers_of_pisot_units_stay_pisot() {
    let k = field("x^3-3x+1");
    let base = find_pisot_unit(&k, 2, Some(1), 96).unwrap().remove(0);
    for p in 2..=3 {
        let c = is_pisot_unit(&base.alpha.pow(p), 96).unwrap();
        assert_eq!(c.norm, base.norm.pow(p));
        assert!(c.dominant_interval().lo() > base.dominant_interval().hi());
    }
}
