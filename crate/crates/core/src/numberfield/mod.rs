//! Exact arithmetic in number fields `ℚ[x]/(g)`.
//!
//! A [`NumberField`] owns its defining polynomial, its signature (decided by
//! an exact Sturm count) and certified enclosures of every root of `g`.
//! [`FieldElement`]s are rational coordinate vectors on the power basis
//! `1, θ, …, θ^{m-1}` and share their field through an `Arc`.

pub mod modp;
pub mod poly;
pub mod roots;
pub mod sturm;

use std::borrow::Cow;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use modp::Irreducibility;
pub use poly::{IntPolynomial, RatPoly};
pub use roots::enclose_roots;
pub use sturm::{sturm_count, Bound, SturmChain};

use crate::error::{Error, Result};
use crate::interval::{eps, ComplexInterval, Interval};
use crate::linalg::RatMatrix;

/// Extra bits carried by root enclosures beyond the requested precision.
pub const GUARD_BITS: u64 = 32;

/// Default working precision in bits.
pub const DEFAULT_PRECISION: u64 = 128;

#[derive(Clone)]
pub struct NumberField {
    poly: IntPolynomial,
    signature: (usize, usize),
    irreducibility: Irreducibility,
    precision_bits: u64,
    roots: Vec<ComplexInterval>,
}

impl fmt::Debug for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NumberField")
            .field("poly", &self.poly.to_string())
            .field("signature", &self.signature)
            .field("irreducibility", &self.irreducibility)
            .finish()
    }
}

impl PartialEq for NumberField {
    fn eq(&self, o: &Self) -> bool {
        self.poly == o.poly
    }
}

/// Builds `ℚ[x]/(poly)` for a monic polynomial, with root enclosures of
/// width at most `2^-(precision_bits + GUARD_BITS)`.
pub fn make_field(poly: IntPolynomial, precision_bits: u64) -> Result<Arc<NumberField>> {
    if poly.is_zero() || poly.degree() < 1 {
        return Err(Error::DegreeTooSmall {
            degree: poly.degree(),
            min: 1,
        });
    }
    if !poly.is_monic() {
        return Err(Error::NotMonic(poly.leading().to_string()));
    }
    let irreducibility = modp::irreducibility(&poly)?;
    let m = poly.degree();
    let r1 = sturm_count(&poly, &Bound::NegInf, &Bound::PosInf);
    let signature = (r1, (m - r1) / 2);
    let roots = roots::enclose_roots(&poly, precision_bits + GUARD_BITS)?;
    debug_assert_eq!(roots.len(), m);
    Ok(Arc::new(NumberField {
        poly,
        signature,
        irreducibility,
        precision_bits,
        roots,
    }))
}

impl NumberField {
    pub fn poly(&self) -> &IntPolynomial {
        &self.poly
    }

    pub fn degree(&self) -> usize {
        self.poly.degree()
    }

    pub fn signature(&self) -> (usize, usize) {
        self.signature
    }

    pub fn is_totally_real(&self) -> bool {
        self.signature.1 == 0
    }

    pub fn irreducibility(&self) -> &Irreducibility {
        &self.irreducibility
    }

    pub fn precision_bits(&self) -> u64 {
        self.precision_bits
    }

    /// Root enclosures: real roots ascending, then conjugate pairs.
    pub fn roots(&self) -> &[ComplexInterval] {
        &self.roots
    }

    /// Root enclosures good to at least `bits + GUARD_BITS`, recomputed when
    /// the stored ones are too coarse.
    pub fn roots_at(&self, bits: u64) -> Result<Cow<'_, [ComplexInterval]>> {
        if bits <= self.precision_bits {
            Ok(Cow::Borrowed(&self.roots))
        } else {
            Ok(Cow::Owned(roots::enclose_roots(&self.poly, bits + GUARD_BITS)?))
        }
    }

    /// Real embeddings `σ_1 < … < σ_r1` as real intervals.
    pub fn real_roots(&self) -> Vec<Interval> {
        self.roots[..self.signature.0].iter().map(|z| z.re.clone()).collect()
    }

    pub fn modulus(&self) -> RatPoly {
        self.poly.to_rat()
    }
}

/// Element of a number field in power-basis coordinates.
#[derive(Clone)]
pub struct FieldElement {
    field: Arc<NumberField>,
    coords: Vec<BigRational>,
}

impl PartialEq for FieldElement {
    fn eq(&self, o: &Self) -> bool {
        self.same_field(o) && self.coords == o.coords
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldElement({self})")
    }
}

impl fmt::Display for FieldElement {
    /// Polynomial in `θ`, ascending.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            }
            first = false;
            let m = if mag.is_integer() {
                mag.numer().to_string()
            } else {
                format!("({}/{})", mag.numer(), mag.denom())
            };
            match (k, mag.is_one()) {
                (0, _) => write!(f, "{m}")?,
                (1, true) => write!(f, "θ")?,
                (1, false) => write!(f, "{m}θ")?,
                (_, true) => write!(f, "θ^{k}")?,
                (_, false) => write!(f, "{m}θ^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Field operation selector for [`element_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn element_arith(a: &FieldElement, b: &FieldElement, op: ArithOp) -> Result<FieldElement> {
    match op {
        ArithOp::Add => a.add(b),
        ArithOp::Sub => a.sub(b),
        ArithOp::Mul => a.mul(b),
        ArithOp::Div => a.div(b),
    }
}

impl FieldElement {
    pub fn new(field: &Arc<NumberField>, coords: Vec<BigRational>) -> Result<Self> {
        let m = field.degree();
        if coords.len() > m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: coords.len(),
            });
        }
        let mut coords = coords;
        coords.resize(m, BigRational::zero());
        Ok(Self {
            field: field.clone(),
            coords,
        })
    }

    pub fn from_ints(field: &Arc<NumberField>, coords: &[i64]) -> Result<Self> {
        Self::new(
            field,
            coords
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    pub fn rational(field: &Arc<NumberField>, q: BigRational) -> Self {
        Self::from_poly(field, &RatPoly::constant(q))
    }

    pub fn one(field: &Arc<NumberField>) -> Self {
        Self::rational(field, BigRational::one())
    }

    pub fn zero(field: &Arc<NumberField>) -> Self {
        Self::rational(field, BigRational::zero())
    }

    /// The generator `θ` (a root of the defining polynomial).
    pub fn theta(field: &Arc<NumberField>) -> Self {
        Self::from_poly(field, &RatPoly::x())
    }

    fn from_poly(field: &Arc<NumberField>, p: &RatPoly) -> Self {
        let r = p.rem(&field.modulus());
        let m = field.degree();
        Self {
            field: field.clone(),
            coords: (0..m).map(|i| r.coeff(i)).collect(),
        }
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    /// Integer coordinates, if all are integral (membership in `ℤ[θ]`).
    pub fn int_coords(&self) -> Option<Vec<BigInt>> {
        self.coords
            .iter()
            .map(|c| c.is_integer().then(|| c.to_integer()))
            .collect()
    }

    pub fn as_poly(&self) -> RatPoly {
        RatPoly::new(self.coords.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// Rational value if the element lies in ℚ.
    pub fn as_rational(&self) -> Option<BigRational> {
        self.coords[1..]
            .iter()
            .all(|c| c.is_zero())
            .then(|| self.coords[0].clone())
    }

    pub fn same_field(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.field, &o.field) || *self.field == *o.field
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.same_field(o) {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        Ok(Self {
            field: self.field.clone(),
            coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        Ok(Self {
            field: self.field.clone(),
            coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn neg(&self) -> Self {
        Self {
            field: self.field.clone(),
            coords: self.coords.iter().map(|a| -a).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        Ok(Self::from_poly(&self.field, &self.as_poly().mul(&o.as_poly())))
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let inv = self
            .as_poly()
            .inverse_mod(&self.field.modulus())
            .ok_or_else(|| Error::Reducible(format!("{} is a zero divisor modulo {}", self, self.field.poly)))?;
        Ok(Self::from_poly(&self.field, &inv))
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        self.mul(&o.inverse()?)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(&self.field);
        for _ in 0..k {
            acc = acc.mul(self).expect("same field");
        }
        acc
    }

    /// Matrix of multiplication by `self` on the power basis; column `k`
    /// holds the coordinates of `self·θ^k`.
    pub fn mul_matrix(&self) -> RatMatrix {
        let m = self.field.degree();
        let modulus = self.field.modulus();
        let mut cols = Vec::with_capacity(m);
        let mut cur = self.as_poly();
        for _ in 0..m {
            cols.push(cur.clone());
            cur = cur.mul(&RatPoly::x()).rem(&modulus);
        }
        RatMatrix::from_fn(m, m, |i, j| cols[j].coeff(i))
    }

    pub fn norm(&self) -> BigRational {
        self.mul_matrix().det()
    }

    pub fn trace(&self) -> BigRational {
        self.mul_matrix().trace()
    }

    pub fn charpoly(&self) -> RatPoly {
        self.mul_matrix().charpoly()
    }

    /// Primitive integer minimal polynomial with positive leading
    /// coefficient; it is monic exactly when the element is integral.
    pub fn minimal_polynomial(&self) -> IntPolynomial {
        self.charpoly().squarefree().to_primitive_int()
    }

    pub fn is_integral(&self) -> bool {
        self.minimal_polynomial().is_monic()
    }

    /// `ℚ(self) = K`.
    pub fn generates_field(&self) -> bool {
        self.minimal_polynomial().degree() == self.field.degree()
    }

    /// Value of the power-basis polynomial at a root enclosure.
    pub fn eval_at(&self, root: &ComplexInterval, bits: u64) -> ComplexInterval {
        let w = bits + GUARD_BITS;
        let mut acc = ComplexInterval::zero();
        for c in self.coords.iter().rev() {
            acc = acc.mul(root).round(w);
            acc.re = acc.re.add_rat(c);
        }
        acc.round(w)
    }

    /// One enclosure per embedding, in the field's root order, with radius at
    /// most `2^-(bits/2)`.
    pub fn embed(&self, bits: u64) -> Result<Vec<ComplexInterval>> {
        let target = eps(bits / 2);
        let mut work = bits;
        for _ in 0..4 {
            let roots = self.field.roots_at(work)?;
            let out: Vec<ComplexInterval> = roots.iter().map(|r| self.eval_at(r, work)).collect();
            if out.iter().all(|z| z.radius() <= target) {
                return Ok(out);
            }
            work *= 2;
        }
        Err(Error::PrecisionExhausted(format!(
            "embedding of {self} did not reach 2^-{} after refinement",
            bits / 2
        )))
    }

    /// Real embeddings (the first `r1` entries of [`embed`](Self::embed)) as
    /// real intervals.
    pub fn real_embeddings(&self, bits: u64) -> Result<Vec<Interval>> {
        let r1 = self.field.signature.0;
        Ok(self.embed(bits)?.into_iter().take(r1).map(|z| z.re).collect())
    }
}

/// `(norm, trace)` of an element.
pub fn norm_and_trace(a: &FieldElement) -> (BigRational, BigRational) {
    let m = a.mul_matrix();
    (m.det(), m.trace())
}

pub fn minimal_polynomial(a: &FieldElement) -> IntPolynomial {
    a.minimal_polynomial()
}

pub fn embed(a: &FieldElement, precision_bits: u64) -> Result<Vec<ComplexInterval>> {
    a.embed(precision_bits)
}

pub fn parse_polynomial(text: &str) -> Result<IntPolynomial> {
    IntPolynomial::parse(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::{int, rat};

    fn field(s: &str) -> Arc<NumberField> {
        make_field(IntPolynomial::parse(s).unwrap(), DEFAULT_PRECISION).unwrap()
    }

    #[test]
    fn make_field_examples() {
        let k = field("x^2-2");
        assert_eq!(k.degree(), 2);
        assert_eq!(k.signature(), (2, 0));
        let r = k.real_roots();
        assert!((r[0].mid_f64() + std::f64::consts::SQRT_2).abs() < 1e-8);
        assert!((r[1].mid_f64() - std::f64::consts::SQRT_2).abs() < 1e-8);
        assert_eq!(field("x^2+1").signature(), (0, 1));
        let c = field("x^3-x-1");
        assert_eq!(c.signature(), (1, 1));
        assert!((c.real_roots()[0].mid_f64() - 1.3247180).abs() < 1e-7);
    }

    #[test]
    fn make_field_rejections() {
        let p = IntPolynomial::parse("2x^2-1").unwrap();
        assert!(matches!(make_field(p, 64), Err(Error::NotMonic(_))));
        let p = IntPolynomial::parse("x^2-1").unwrap();
        assert!(matches!(make_field(p, 64), Err(Error::Reducible(_))));
        let p = IntPolynomial::parse("5").unwrap();
        assert!(matches!(make_field(p, 64), Err(Error::DegreeTooSmall { .. })));
    }

    #[test]
    fn root_enclosures_are_disjoint_and_tight() {
        let k = field("x^4-4x^2+2");
        let r = k.roots();
        for i in 0..r.len() {
            assert!(r[i].radius() <= eps(DEFAULT_PRECISION + GUARD_BITS));
            for j in i + 1..r.len() {
                assert!(!r[i].overlaps(&r[j]));
            }
        }
    }

    #[test]
    fn arithmetic_examples() {
        let k = field("x^2-x-1");
        let t = FieldElement::theta(&k);
        assert_eq!(t.mul(&t).unwrap().coords(), &[int(1), int(1)]);
        assert_eq!(t.mul(&t.inverse().unwrap()).unwrap(), FieldElement::one(&k));
        let s = field("x^2-2");
        let a = FieldElement::from_ints(&s, &[1, 1]).unwrap();
        let b = FieldElement::from_ints(&s, &[1, -1]).unwrap();
        assert_eq!(
            element_arith(&a, &b, ArithOp::Mul).unwrap(),
            FieldElement::rational(&s, int(-1))
        );
        assert_eq!(element_arith(&a, &b, ArithOp::Div).unwrap().mul(&b).unwrap(), a);
    }

    #[test]
    fn arithmetic_errors() {
        let k = field("x^2-x-1");
        let s = field("x^2-2");
        let a = FieldElement::theta(&k);
        assert!(matches!(a.add(&FieldElement::theta(&s)), Err(Error::FieldMismatch)));
        assert!(matches!(a.div(&FieldElement::zero(&k)), Err(Error::DivisionByZero)));
    }

    #[test]
    fn minimal_polynomial_examples() {
        let s = field("x^2-2");
        assert_eq!(FieldElement::theta(&s).minimal_polynomial().to_string(), "x^2 - 2");
        let a = FieldElement::from_ints(&s, &[1, 1]).unwrap();
        assert_eq!(a.minimal_polynomial().to_string(), "x^2 - 2x - 1");
        let q = FieldElement::rational(&s, rat(3, 2));
        assert_eq!(q.minimal_polynomial().to_string(), "2x - 3");
        assert!(!q.is_integral());
        assert_eq!(
            FieldElement::rational(&s, int(5)).minimal_polynomial().to_string(),
            "x - 5"
        );
        let quartic = field("x^4-2");
        let t2 = FieldElement::theta(&quartic).pow(2);
        assert_eq!(t2.minimal_polynomial().to_string(), "x^2 - 2");
    }

    #[test]
    fn norm_trace_examples() {
        let s = field("x^2-2");
        let a = FieldElement::from_ints(&s, &[1, 1]).unwrap();
        assert_eq!(norm_and_trace(&a), (int(-1), int(2)));
        let g = field("x^2-x-1");
        assert_eq!(norm_and_trace(&FieldElement::theta(&g)), (int(-1), int(1)));
        let c = field("x^3-3x+1");
        let q = FieldElement::rational(&c, rat(2, 3));
        assert_eq!(q.norm(), rat(8, 27));
    }

    #[test]
    fn embed_examples() {
        let s = field("x^2-2");
        let a = FieldElement::from_ints(&s, &[1, 1]).unwrap();
        let e = a.embed(128).unwrap();
        assert!((e[0].re.mid_f64() + 0.41421356).abs() < 1e-8);
        assert!((e[1].re.mid_f64() - 2.41421356).abs() < 1e-8);
        assert!(e.iter().all(|z| z.radius() <= eps(64)));
        let q = FieldElement::rational(&s, rat(3, 2));
        for z in q.embed(128).unwrap() {
            assert_eq!(z.re, Interval::point(rat(3, 2)));
        }
        let g = field("x^2-x-1");
        let e = FieldElement::theta(&g).embed(128).unwrap();
        assert!((e[0].re.mid_f64() + 0.61803399).abs() < 1e-8);
        assert!((e[1].re.mid_f64() - 1.61803399).abs() < 1e-8);
    }

    #[test]
    fn embed_beyond_stored_precision() {
        let g = field("x^2-x-1");
        let e = FieldElement::theta(&g).embed(400).unwrap();
        assert!(e[1].radius() <= eps(200));
    }

    #[test]
    fn norm_matches_product_of_embeddings() {
        let c = field("x^3-x-1");
        let a = FieldElement::from_ints(&c, &[2, -1, 3]).unwrap();
        let prod = a
            .embed(128)
            .unwrap()
            .iter()
            .fold(ComplexInterval::one(), |acc, z| acc.mul(z));
        let n = a.norm();
        assert!(prod.re.contains(&n));
        assert!(prod.im.contains_zero());
    }
}
