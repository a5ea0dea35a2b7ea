//! Pisot units in totally real fields: exact certification and box search.
//!
//! An element `α` of a totally real field `K` of degree `m` is accepted when
//! it is a unit generating `K` whose minimal polynomial has exactly one root
//! in `(1, ∞)` and `m - 1` roots in `(-1, 1)`. Every decision is a Sturm count
//! or an exact evaluation; enclosures are only carried along for display.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interval::{int, ComplexInterval, Interval};
use crate::linalg::IntMatrix;
use crate::numberfield::{Bound, FieldElement, IntPolynomial, NumberField, SturmChain, GUARD_BITS};

/// Root counts backing a certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SturmEvidence {
    /// Roots in `(1, ∞)`.
    pub above_one: usize,
    /// Roots in `(-1, 1)`.
    pub inside_unit: usize,
}

#[derive(Clone, Debug)]
pub struct PisotCertificate {
    pub alpha: FieldElement,
    pub minimal_poly: IntPolynomial,
    /// `N(α)`, either 1 or -1.
    pub norm: i32,
    /// Exact isolating interval `(lo, hi]` of the root above 1, with `lo > 1`.
    pub dominant_root: (BigRational, BigRational),
    /// Index of the real embedding of `K` that sends `α` to its dominant root.
    pub dominant_embedding: usize,
    pub sturm_evidence: SturmEvidence,
    /// `σ_i(α)` for every embedding, in the field's root order.
    pub conjugates: Vec<ComplexInterval>,
    pub precision_bits: u64,
}

impl PisotCertificate {
    pub fn dominant_interval(&self) -> Interval {
        Interval::new(self.dominant_root.0.clone(), self.dominant_root.1.clone())
    }
}

/// Why an element failed the Pisot-unit test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PisotRejection {
    FieldNotTotallyReal,
    NotIntegral,
    NotAUnit { norm: BigRational },
    NotGenerating { degree: usize },
    RootOnBoundary { at: i32 },
    WrongRootDistribution { above_one: usize, inside_unit: usize },
}

impl PisotRejection {
    pub fn code(&self) -> &'static str {
        match self {
            PisotRejection::FieldNotTotallyReal => "field-not-totally-real",
            PisotRejection::NotIntegral => "not-integral",
            PisotRejection::NotAUnit { .. } => "not-a-unit",
            PisotRejection::NotGenerating { .. } => "not-generating",
            PisotRejection::RootOnBoundary { .. } => "root-on-boundary",
            PisotRejection::WrongRootDistribution { .. } => "wrong-root-distribution",
        }
    }
}

impl fmt::Display for PisotRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PisotRejection::NotAUnit { norm } => write!(f, "not-a-unit (norm {norm})"),
            PisotRejection::NotGenerating { degree } => {
                write!(f, "not-generating (minimal polynomial degree {degree})")
            }
            PisotRejection::RootOnBoundary { at } => {
                write!(f, "root-on-boundary (minimal polynomial vanishes at {at})")
            }
            PisotRejection::WrongRootDistribution { above_one, inside_unit } => {
                write!(
                    f,
                    "wrong-root-distribution ({above_one} roots in (1,inf), {inside_unit} in (-1,1))"
                )
            }
            other => write!(f, "{}", other.code()),
        }
    }
}

/// `ℚ(a) = K`.
pub fn generates_field(a: &FieldElement) -> bool {
    a.generates_field()
}

/// Certifies `a` as a Pisot unit or reports the first failed condition.
pub fn is_pisot_unit(a: &FieldElement, precision_bits: u64) -> std::result::Result<PisotCertificate, PisotRejection> {
    let field = a.field();
    if !field.is_totally_real() {
        return Err(PisotRejection::FieldNotTotallyReal);
    }
    let m = field.degree();
    let minpoly = a.minimal_polynomial();
    if !minpoly.is_monic() {
        return Err(PisotRejection::NotIntegral);
    }
    let norm = a.norm();
    if norm.abs() != BigRational::one() {
        return Err(PisotRejection::NotAUnit { norm });
    }
    if minpoly.degree() != m {
        return Err(PisotRejection::NotGenerating {
            degree: minpoly.degree(),
        });
    }
    for at in [1, -1] {
        if minpoly.eval_int(&BigInt::from(at)).is_zero() {
            return Err(PisotRejection::RootOnBoundary { at });
        }
    }
    let chain = SturmChain::from_int(&minpoly);
    let above_one = chain.count(&Bound::int(1), &Bound::PosInf);
    let inside_unit = chain.count(&Bound::int(-1), &Bound::int(1));
    if above_one != 1 || inside_unit != m - 1 {
        return Err(PisotRejection::WrongRootDistribution { above_one, inside_unit });
    }
    let dominant_root = dominant_root(&chain, precision_bits + GUARD_BITS);
    let conjugates = a.embed(precision_bits).expect("embedding of an integral element");
    let dominant_embedding = conjugates
        .iter()
        .position(|z| z.re.lo() > &int(1))
        .expect("exactly one conjugate exceeds 1");
    Ok(PisotCertificate {
        alpha: a.clone(),
        minimal_poly: minpoly,
        norm: if norm.is_positive() { 1 } else { -1 },
        dominant_root,
        dominant_embedding,
        sturm_evidence: SturmEvidence { above_one, inside_unit },
        conjugates,
        precision_bits,
    })
}

/// Isolates the unique root in `(1, ∞)` and refines it until the lower end
/// exceeds 1 and the width is at most `2^-bits`.
fn dominant_root(chain: &SturmChain, bits: u64) -> (BigRational, BigRational) {
    let (lo, hi) = chain
        .isolate()
        .into_iter()
        .find(|(_, hi)| hi > &int(1) && chain.count(&Bound::int(1), &Bound::Finite(hi.clone())) == 1)
        .expect("one root above 1");
    let lo = lo.max(int(1));
    let (mut lo, mut hi) = chain.refine(&lo, &hi, bits);
    while lo <= int(1) {
        let mid = (&lo + &hi) / int(2);
        if chain.count(&Bound::Finite(lo.clone()), &Bound::Finite(mid.clone())) == 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

/// Exact comparison of the dominant roots of two certificates.
pub fn compare_dominant(a: &PisotCertificate, b: &PisotCertificate) -> Ordering {
    if a.minimal_poly == b.minimal_poly {
        return Ordering::Equal;
    }
    let (ca, cb) = (
        SturmChain::from_int(&a.minimal_poly),
        SturmChain::from_int(&b.minimal_poly),
    );
    let (mut ia, mut ib) = (a.dominant_root.clone(), b.dominant_root.clone());
    let mut bits = a.precision_bits.max(b.precision_bits) + GUARD_BITS;
    loop {
        if ia.1 <= ib.0 {
            return Ordering::Less;
        }
        if ib.1 <= ia.0 {
            return Ordering::Greater;
        }
        bits *= 2;
        ia = ca.refine(&ia.0, &ia.1, bits);
        ib = cb.refine(&ib.0, &ib.1, bits);
    }
}

/// Deterministic order on certificates: dominant root ascending, then
/// preferring the embedding at the largest root of the defining polynomial,
/// then coordinates lexicographically.
pub fn certificate_order(a: &PisotCertificate, b: &PisotCertificate) -> Ordering {
    compare_dominant(a, b)
        .then_with(|| b.dominant_embedding.cmp(&a.dominant_embedding))
        .then_with(|| a.alpha.coords().cmp(b.alpha.coords()))
}

/// Integer multiplication matrices of `θ^k` on the power basis.
fn power_matrices(field: &Arc<NumberField>) -> Vec<IntMatrix> {
    let t = FieldElement::theta(field);
    (0..field.degree())
        .map(|k| {
            t.pow(k as u32)
                .mul_matrix()
                .to_int()
                .expect("monic defining polynomial")
        })
        .collect()
}

fn decode(mut idx: u64, m: usize, height: i64) -> Vec<i64> {
    let base = (2 * height + 1) as u64;
    (0..m)
        .map(|_| {
            let d = (idx % base) as i64 - height;
            idx /= base;
            d
        })
        .collect()
}

/// Scans `{-H..H}^m` for Pisot units, sorted by [`certificate_order`] and
/// truncated to `max_results` (`None` keeps all).
pub fn find_pisot_unit(
    field: &Arc<NumberField>,
    height: i64,
    max_results: Option<usize>,
    precision_bits: u64,
) -> Result<Vec<PisotCertificate>> {
    let m = field.degree();
    if m < 2 {
        return Err(Error::DegreeTooSmall { degree: m, min: 2 });
    }
    if !field.is_totally_real() {
        let (r1, r2) = field.signature();
        return Err(Error::NotTotallyReal { r1, r2 });
    }
    if height < 0 {
        return Err(Error::InvalidArgument(format!("negative height {height}")));
    }
    let side = (2 * height + 1) as u64;
    let total = side
        .checked_pow(m as u32)
        .ok_or_else(|| Error::InvalidArgument("search box too large".into()))?;
    let mats = power_matrices(field);
    let mut found: Vec<PisotCertificate> = (0..total)
        .into_par_iter()
        .filter_map(|idx| {
            let coords = decode(idx, m, height);
            if coords[1..].iter().all(|&c| c == 0) {
                return None;
            }
            let mat = IntMatrix::from_fn(m, m, |i, j| {
                coords
                    .iter()
                    .zip(&mats)
                    .fold(BigInt::zero(), |acc, (&c, t)| acc + BigInt::from(c) * t.get(i, j))
            });
            let det = mat.det();
            if det.abs() != BigInt::one() {
                return None;
            }
            let a = FieldElement::from_ints(field, &coords).expect("m coordinates");
            is_pisot_unit(&a, precision_bits).ok()
        })
        .collect();
    found.sort_by(certificate_order);
    if let Some(k) = max_results {
        found.truncate(k);
    }
    Ok(found)
}

/// Enclosure-based Pisot check usable outside totally real fields (e.g. the
/// plastic number). `Some(true)` when exactly one embedding is certified real
/// and above 1 and all others certified inside the unit disc; `None` when the
/// enclosures are too coarse to decide. Never used for certificates.
pub fn advisory_pisot_check(a: &FieldElement, precision_bits: u64) -> Result<Option<bool>> {
    if !a.is_integral() {
        return Ok(Some(false));
    }
    let conj = a.embed(precision_bits)?;
    let mut above = 0;
    for z in &conj {
        let modulus = z.abs(precision_bits);
        if z.is_real() && z.re.lo() > &int(1) {
            above += 1;
        } else if modulus.hi() < &int(1) {
        } else if modulus.lo() > &int(1) || (modulus.contains(&int(1)) && modulus.is_point()) {
            return Ok(Some(false));
        } else {
            return Ok(None);
        }
    }
    Ok(Some(above == 1))
}

/// Floating view of a certificate's dominant root.
pub fn dominant_f64(c: &PisotCertificate) -> f64 {
    c.dominant_interval().mid().to_f64().unwrap_or(f64::NAN)
}
