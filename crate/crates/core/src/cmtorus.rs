//! CM fields `E = K(√δ)`, CM types, period matrices and lattice automorphisms.
//!
//! The lattice is the order `ℤ[θ][√δ]` with basis
//! `1, θ, …, θ^{m-1}, √δ, θ√δ, …, θ^{m-1}√δ`. Matrices act on coordinate
//! columns: column `k` of the multiplication matrix holds the coordinates of
//! `α·b_k`, so the descent identity reads `Π·M = D·Π`.

use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interval::{eps, int, ComplexInterval, Interval};
use crate::linalg::IntMatrix;
use crate::numberfield::{FieldElement, NumberField, GUARD_BITS};

/// `E = K(√δ)` with `K` totally real and `δ ∈ ℤ[θ]` totally negative.
#[derive(Clone, Debug)]
pub struct CMField {
    base: Arc<NumberField>,
    delta: FieldElement,
    delta_embeddings: Vec<Interval>,
}

impl CMField {
    pub fn base(&self) -> &Arc<NumberField> {
        &self.base
    }

    pub fn delta(&self) -> &FieldElement {
        &self.delta
    }

    /// `m = [K:ℚ]`.
    pub fn degree(&self) -> usize {
        self.base.degree()
    }

    /// `σ_j(δ)` for each real embedding of `K`, all certified negative.
    pub fn delta_embeddings(&self) -> &[Interval] {
        &self.delta_embeddings
    }

    /// Names of the order basis elements.
    pub fn order_basis(&self) -> Vec<String> {
        let m = self.degree();
        let name = |k: usize| match k {
            0 => String::new(),
            1 => "θ".to_string(),
            _ => format!("θ^{k}"),
        };
        let mut out: Vec<String> = (0..m).map(|k| if k == 0 { "1".into() } else { name(k) }).collect();
        out.extend((0..m).map(|k| {
            if k == 0 {
                "√δ".into()
            } else {
                format!("{}√δ", name(k))
            }
        }));
        out
    }
}

/// Certifies `δ` totally negative and assembles `E = K(√δ)`.
pub fn make_cm_field(base: &Arc<NumberField>, delta: &FieldElement) -> Result<CMField> {
    if !base.is_totally_real() {
        let (r1, r2) = base.signature();
        return Err(Error::NotTotallyReal { r1, r2 });
    }
    if delta.field().as_ref() != base.as_ref() {
        return Err(Error::FieldMismatch);
    }
    if delta.int_coords().is_none() {
        return Err(Error::NotInOrder(format!("δ = {delta} has non-integral coordinates")));
    }
    let mut bits = base.precision_bits().max(64);
    for _ in 0..8 {
        let emb = delta.real_embeddings(bits)?;
        match emb.iter().position(|v| !v.is_negative()) {
            None => {
                return Ok(CMField {
                    base: base.clone(),
                    delta: delta.clone(),
                    delta_embeddings: emb,
                })
            }
            Some(index) if !emb[index].lo().is_negative() => {
                return Err(Error::DeltaNotTotallyNegative {
                    index,
                    value: format!("{:.6}", emb[index].mid_f64()),
                });
            }
            // enclosure straddles 0: refine
            Some(_) => bits *= 2,
        }
    }
    Err(Error::PrecisionExhausted(format!(
        "sign of the embeddings of δ = {delta}"
    )))
}

/// A choice of one embedding from each conjugate pair of `E`: position `j`
/// uses the real embedding `ordering[j]` of `K` and `φ_j(√δ) = signs[j]·i·√(-σ(δ))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CMType {
    pub ordering: Vec<usize>,
    pub signs: Vec<i8>,
}

impl CMType {
    pub fn canonical(m: usize) -> Self {
        Self {
            ordering: (0..m).collect(),
            signs: vec![1; m],
        }
    }

    pub fn degree(&self) -> usize {
        self.ordering.len()
    }

    pub fn is_canonical(&self) -> bool {
        *self == Self::canonical(self.degree())
    }
}

impl fmt::Display for CMType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .ordering
            .iter()
            .zip(&self.signs)
            .map(|(o, s)| format!("{}σ{}", if *s > 0 { '+' } else { '-' }, o + 1))
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CMTypeMode {
    Canonical,
    All,
}

/// `Canonical` gives the identity ordering with all signs `+`; `All` gives the
/// `2^m·m!` types, orderings in lexicographic order and, within each, sign
/// vectors in lexicographic order with `+` before `-`.
pub fn enumerate_cm_types(e: &CMField, mode: CMTypeMode) -> Vec<CMType> {
    all_cm_types(e.degree(), mode)
}

pub fn all_cm_types(m: usize, mode: CMTypeMode) -> Vec<CMType> {
    match mode {
        CMTypeMode::Canonical => vec![CMType::canonical(m)],
        CMTypeMode::All => {
            let mut out = Vec::new();
            for ordering in (0..m).permutations(m) {
                for mask in 0u32..(1 << m) {
                    let signs = (0..m)
                        .map(|j| if mask >> (m - 1 - j) & 1 == 1 { -1 } else { 1 })
                        .collect();
                    out.push(CMType {
                        ordering: ordering.clone(),
                        signs,
                    });
                }
            }
            out
        }
    }
}

/// `B_I = ℂ^m / φ_I(ℤ[θ][√δ])`.
#[derive(Clone, Debug)]
pub struct CMTorus {
    pub cm_field: CMField,
    pub cm_type: CMType,
    /// `m × 2m`, entry `[j][k] = φ_j(b_k)`.
    pub period_matrix: Vec<Vec<ComplexInterval>>,
    /// Enclosure of the determinant of the `2m × 2m` matrix stacking the real
    /// and imaginary parts of the rows; it excludes zero.
    pub stacked_det: Interval,
    pub precision_bits: u64,
}

impl CMTorus {
    pub fn degree(&self) -> usize {
        self.cm_field.degree()
    }
}

fn check_type(e: &CMField, ty: &CMType) -> Result<()> {
    let m = e.degree();
    if ty.ordering.len() != m || ty.signs.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: ty.ordering.len(),
        });
    }
    let mut seen = vec![false; m];
    for &o in &ty.ordering {
        if o >= m || std::mem::replace(&mut seen[o], true) {
            return Err(Error::InvalidArgument(format!(
                "CM type ordering {:?} is not a permutation",
                ty.ordering
            )));
        }
    }
    if ty.signs.iter().any(|s| s.abs() != 1) {
        return Err(Error::InvalidArgument(format!(
            "CM type signs {:?} must be ±1",
            ty.signs
        )));
    }
    Ok(())
}

/// `φ_j(√δ)` for each position of the type.
fn sqrt_delta(e: &CMField, ty: &CMType, bits: u64) -> Result<Vec<ComplexInterval>> {
    let w = bits + GUARD_BITS;
    let emb = if bits <= e.base.precision_bits() {
        e.delta_embeddings.clone()
    } else {
        e.delta.real_embeddings(2 * bits)?
    };
    ty.ordering
        .iter()
        .zip(&ty.signs)
        .map(|(&o, &s)| {
            let root = emb[o].neg().round(2 * w).sqrt(w)?;
            let im = if s > 0 { root } else { root.neg() };
            Ok(ComplexInterval::new(Interval::zero(), im))
        })
        .collect()
}

/// Builds the period matrix of `B_I` and certifies that its columns are
/// linearly independent over ℝ.
pub fn period_matrix(e: &CMField, ty: &CMType, precision_bits: u64) -> Result<CMTorus> {
    check_type(e, ty)?;
    let m = e.degree();
    let w = precision_bits + GUARD_BITS;
    let roots = e.base.roots_at(precision_bits)?;
    let sd = sqrt_delta(e, ty, precision_bits)?;
    let mut pi = Vec::with_capacity(m);
    for (j, &o) in ty.ordering.iter().enumerate() {
        let r = &roots[o];
        let mut powers = Vec::with_capacity(m);
        let mut acc = ComplexInterval::one();
        for _ in 0..m {
            powers.push(acc.clone());
            acc = acc.mul(r).round(w);
        }
        let mut row = powers.clone();
        row.extend(powers.iter().map(|p| p.mul(&sd[j]).round(w)));
        pi.push(row);
    }
    let stacked: Vec<Vec<Interval>> = pi
        .iter()
        .map(|row| row.iter().map(|z| z.re.clone()).collect())
        .chain(pi.iter().map(|row| row.iter().map(|z| z.im.clone()).collect()))
        .collect();
    let stacked_det = interval_det(stacked, w)?;
    Ok(CMTorus {
        cm_field: e.clone(),
        cm_type: ty.clone(),
        period_matrix: pi,
        stacked_det,
        precision_bits,
    })
}

/// Determinant enclosure by Gaussian elimination with pivots chosen by
/// largest lower bound on the modulus; fails if no pivot excludes zero.
fn interval_det(mut a: Vec<Vec<Interval>>, bits: u64) -> Result<Interval> {
    let n = a.len();
    let mut det = Interval::one();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].mig().cmp(&a[j][c].mig()))
            .filter(|&i| !a[i][c].contains_zero())
            .ok_or_else(|| Error::PrecisionExhausted("lattice columns not certified independent".into()))?;
        if p != c {
            a.swap(p, c);
            det = det.neg();
        }
        det = det.mul(&a[c][c]).round(bits);
        let inv = a[c][c].recip()?;
        let (top, rest) = a.split_at_mut(c + 1);
        let pivot = &top[c];
        for row in rest {
            let f = row[c].mul(&inv).round(bits);
            for (x, p) in row[c..].iter_mut().zip(&pivot[c..]) {
                *x = x.sub(&f.mul(p)).round(bits);
            }
        }
    }
    Ok(det)
}

/// Multiplication by a unit `α ∈ ℤ[θ]` on the order basis.
#[derive(Clone, Debug)]
pub struct LatticeAutomorphism {
    pub matrix: IntMatrix,
    pub alpha: FieldElement,
    /// `σ_o(α)` for each real embedding `o` of `K` in root order; the diagonal
    /// of a particular torus is this list permuted by its CM type.
    pub diag: Vec<ComplexInterval>,
}

impl LatticeAutomorphism {
    /// `D = diag(φ_j(α))` for the given CM type.
    pub fn diagonal_for(&self, ty: &CMType) -> Vec<ComplexInterval> {
        ty.ordering.iter().map(|&o| self.diag[o].clone()).collect()
    }

    pub fn det(&self) -> BigInt {
        self.matrix.det()
    }
}

pub fn multiplication_matrix(e: &CMField, alpha: &FieldElement) -> Result<LatticeAutomorphism> {
    if alpha.field().as_ref() != e.base.as_ref() {
        return Err(Error::FieldMismatch);
    }
    let block = alpha
        .mul_matrix()
        .to_int()
        .ok_or_else(|| Error::NotInOrder(format!("α = {alpha} does not preserve ℤ[θ]")))?;
    let norm = block.det();
    if norm.abs() != BigInt::one() {
        return Err(Error::NotAUnit(format!("α = {alpha} has norm {norm}")));
    }
    let matrix = IntMatrix::block_diag(&[&block, &block]);
    let diag = alpha.embed(e.base.precision_bits())?;
    Ok(LatticeAutomorphism {
        matrix,
        alpha: alpha.clone(),
        diag,
    })
}

/// Upper bound on `max_{j,k} |(Π·M − D·Π)[j][k]|`.
pub fn verify_descent(t: &CMTorus, l: &LatticeAutomorphism) -> Result<BigRational> {
    descent_residual(t, &l.matrix, &l.diagonal_for(&t.cm_type))
}

/// Residual for an arbitrary integer matrix and diagonal, used when
/// re-checking a matrix read back from a certificate.
pub fn descent_residual(t: &CMTorus, m: &IntMatrix, d: &[ComplexInterval]) -> Result<BigRational> {
    let n = 2 * t.degree();
    if m.rows() != n || m.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.rows(),
        });
    }
    if d.len() != t.degree() {
        return Err(Error::DimensionMismatch {
            expected: t.degree(),
            got: d.len(),
        });
    }
    let w = t.precision_bits + GUARD_BITS;
    let mut worst = BigRational::zero();
    for (j, row) in t.period_matrix.iter().enumerate() {
        for k in 0..n {
            let mut acc = ComplexInterval::zero();
            for (l, p) in row.iter().enumerate() {
                let c = m.get(l, k);
                if !c.is_zero() {
                    acc = acc.add(&p.scale(&BigRational::from_integer(c.clone())));
                }
            }
            let r = acc.sub(&d[j].mul(&row[k])).round(w);
            worst = worst.max(r.re.mag().max(r.im.mag()));
        }
    }
    // |z| ≤ √2·max(|re|, |im|) ≤ 3/2·max(|re|, |im|)
    Ok(worst * BigRational::new(3.into(), 2.into()))
}

/// Outcome of the height-bounded simplicity search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Simplicity {
    Simple {
        reason: String,
        height_bounded: Option<i64>,
    },
    NotSimple(SimplicityWitness),
    Unknown {
        searched_height: i64,
    },
}

impl Simplicity {
    pub fn label(&self) -> &'static str {
        match self {
            Simplicity::Simple { .. } => "simple",
            Simplicity::NotSimple(_) => "not-simple",
            Simplicity::Unknown { .. } => "unknown",
        }
    }
}

/// `x = a·√δ` with `a ∈ ℤ[θ]` and `x² = r ∈ ℚ`, so `ℚ(x) = ℚ(√r)` is an
/// imaginary quadratic subfield of `E`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicityWitness {
    pub coords: Vec<BigInt>,
    pub square: BigRational,
    /// Sign of `Im φ_j(x)` for each position `j` of the CM type.
    pub restriction_signs: Vec<i8>,
    /// All `φ_j` restrict to the same embedding of `ℚ(x)`.
    pub restricts_identically: bool,
}

impl SimplicityWitness {
    pub fn height(&self) -> BigInt {
        self.coords.iter().map(|c| c.abs()).max().unwrap_or_default()
    }
}

fn box_points(m: usize, height: i64) -> Vec<Vec<i64>> {
    (0..m).map(|_| -height..=height).multi_cartesian_product().collect()
}

/// Searches `a ∈ [-H, H]^m` for `(a·√δ)² ∈ ℚ`. A witness on which the CM type
/// restricts identically proves `B_I` is not simple. Without such a witness,
/// `m = 2` is declared simple up to height `H` and `m ≥ 3` is left unknown.
pub fn simplicity_check(e: &CMField, ty: &CMType, height: i64) -> Result<Simplicity> {
    check_type(e, ty)?;
    let m = e.degree();
    if m == 1 {
        return Ok(Simplicity::Simple {
            reason: "one-dimensional torus".into(),
            height_bounded: None,
        });
    }
    let k = e.base.clone();
    let bits = k.precision_bits();
    let sd = sqrt_delta(e, ty, bits)?;
    let mut witnesses: Vec<SimplicityWitness> = box_points(m, height)
        .into_par_iter()
        // x and -x give the same subfield: keep the first nonzero coordinate positive
        .filter(|c| c.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0))
        .filter_map(|c| {
            let a = FieldElement::from_ints(&k, &c).expect("m coordinates");
            let square = a.mul(&a).and_then(|s| s.mul(&e.delta)).ok()?.as_rational()?;
            let emb = a.embed(bits).ok()?;
            let signs: Vec<i8> = ty
                .ordering
                .iter()
                .enumerate()
                .map(|(j, &o)| {
                    let im = emb[o].re.mul(&sd[j].im);
                    if im.is_positive() {
                        1
                    } else {
                        -1
                    }
                })
                .collect();
            let restricts_identically = signs.iter().all_equal();
            Some(SimplicityWitness {
                coords: c.into_iter().map(BigInt::from).collect(),
                square,
                restriction_signs: signs,
                restricts_identically,
            })
        })
        .collect();
    witnesses.sort_by(|a, b| (a.height(), &a.coords).cmp(&(b.height(), &b.coords)));
    if let Some(w) = witnesses.iter().find(|w| w.restricts_identically) {
        return Ok(Simplicity::NotSimple(w.clone()));
    }
    if m == 2 && witnesses.is_empty() {
        return Ok(Simplicity::Simple {
            reason: format!(
                "non-simple CM surface forces an imaginary quadratic CM subfield, none found up to height {height}"
            ),
            height_bounded: Some(height),
        });
    }
    Ok(Simplicity::Unknown {
        searched_height: height,
    })
}

/// Half of the precision contract on the descent residual.
pub fn descent_tolerance(precision_bits: u64) -> BigRational {
    eps(precision_bits / 2)
}

/// Element of `K` from integer power-basis coordinates, zero-padded to `m`.
pub fn delta_from_ints(k: &Arc<NumberField>, coords: &[i64]) -> Result<FieldElement> {
    if coords.len() > k.degree() {
        return Err(Error::DimensionMismatch {
            expected: k.degree(),
            got: coords.len(),
        });
    }
    let mut c: Vec<BigRational> = coords.iter().map(|&v| int(v)).collect();
    c.resize(k.degree(), BigRational::zero());
    FieldElement::new(k, c)
}
