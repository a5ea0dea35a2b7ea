//! Spectral radii of `f_α^*` on `H^{p,p}` and the topological entropy
//! `h_top = log max_p r_p`.
//!
//! The eigenvalues on `H^{1,0}` are `λ_j = φ_j(α)`. On `H^{p,p}` the action
//! is `Λ^p H^{1,0} ⊗ Λ^p H^{0,1}`, so `r_p` is the largest
//! `|∏_S λ|·|∏_T λ̄|` over `p`-subsets `S`, `T`. The exterior powers of the
//! integer lattice matrix give an independent route to the same maximum.

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;

use crate::cmtorus::{CMField, CMType};
use crate::error::{Error, Result};
use crate::interval::{eps, int, ComplexInterval, Interval};
use crate::linalg::IntMatrix;
use crate::numberfield::{enclose_roots, FieldElement, GUARD_BITS};
use crate::pisot::PisotCertificate;

/// Eigenvalues of `f_α^*` on `H^0(B, Ω¹)`.
#[derive(Clone, Debug)]
pub struct H1Spectrum {
    pub values: Vec<ComplexInterval>,
    /// False when `α` lies in a proper subfield, so the values repeat.
    pub alpha_generates: bool,
}

pub fn h1_eigenvalues(e: &CMField, ty: &CMType, alpha: &FieldElement, precision_bits: u64) -> Result<H1Spectrum> {
    if alpha.field().as_ref() != e.base().as_ref() {
        return Err(Error::FieldMismatch);
    }
    if ty.degree() != e.degree() {
        return Err(Error::DimensionMismatch {
            expected: e.degree(),
            got: ty.degree(),
        });
    }
    let emb = alpha.embed(precision_bits)?;
    Ok(H1Spectrum {
        values: ty.ordering.iter().map(|&o| emb[o].clone()).collect(),
        alpha_generates: alpha.generates_field(),
    })
}

fn moduli(lambdas: &[ComplexInterval], bits: u64) -> Vec<Interval> {
    lambdas.iter().map(|z| z.abs(bits + GUARD_BITS)).collect()
}

fn subset_products(moduli: &[Interval], p: usize, bits: u64) -> Vec<Interval> {
    moduli
        .iter()
        .combinations(p)
        .map(|s| {
            s.into_iter()
                .fold(Interval::one(), |acc, x| acc.mul(x).round(bits + GUARD_BITS))
        })
        .collect()
}

/// `r_p`, by enumerating all pairs of `p`-subsets.
pub fn hpp_spectral_radius(lambdas: &[ComplexInterval], p: usize, precision_bits: u64) -> Result<Interval> {
    let m = lambdas.len();
    if p > m {
        return Err(Error::OutOfRange { index: p, max: m });
    }
    let prods = subset_products(&moduli(lambdas, precision_bits), p, precision_bits);
    let w = precision_bits + GUARD_BITS;
    let mut best: Option<Interval> = None;
    for s in &prods {
        for t in &prods {
            let v = s.mul(t).round(w);
            best = Some(match best {
                Some(b) => b.max(&v),
                None => v,
            });
        }
    }
    Ok(best.expect("at least the empty subset"))
}

#[derive(Clone, Debug)]
pub struct EntropyReport {
    pub lambdas: Vec<ComplexInterval>,
    /// `r_0, …, r_m`.
    pub r: Vec<Interval>,
    pub h_top: Interval,
    /// `p` whose `r_p` has the largest midpoint.
    pub dominant_p: usize,
    /// `2·log α` once a Pisot certificate is attached.
    pub alpha_bound: Option<Interval>,
    pub symbolic: Option<String>,
    pub precision_bits: u64,
}

pub fn topological_entropy(lambdas: &[ComplexInterval], precision_bits: u64) -> Result<EntropyReport> {
    let m = lambdas.len();
    let r = (0..=m)
        .map(|p| hpp_spectral_radius(lambdas, p, precision_bits))
        .collect::<Result<Vec<_>>>()?;
    let top = r.iter().skip(1).fold(r[0].clone(), |acc, x| acc.max(x));
    let dominant_p = (0..=m)
        .max_by(|&a, &b| r[a].mid().cmp(&r[b].mid()).then(b.cmp(&a)))
        .unwrap_or(0);
    let h_top = top.ln(precision_bits + GUARD_BITS)?.max(&Interval::zero());
    Ok(EntropyReport {
        lambdas: lambdas.to_vec(),
        r,
        h_top,
        dominant_p,
        alpha_bound: None,
        symbolic: None,
        precision_bits,
    })
}

/// `2·log α` from the exact isolating interval of a Pisot certificate.
pub fn two_log_alpha(cert: &PisotCertificate, precision_bits: u64) -> Result<Interval> {
    Ok(cert.dominant_interval().ln(precision_bits + GUARD_BITS)?.scale(&int(2)))
}

impl EntropyReport {
    /// Records `2·log α` and the closed form `h_top = 2·log α`.
    pub fn attach_alpha(&mut self, cert: &PisotCertificate) -> Result<()> {
        self.alpha_bound = Some(two_log_alpha(cert, self.precision_bits)?);
        let lo = cert.dominant_root.0.floor().to_integer();
        self.symbolic = Some(format!(
            "2·log(α), α = root of {} in ({}, {})",
            cert.minimal_poly,
            lo,
            &lo + BigInt::from(1)
        ));
        Ok(())
    }
}

/// Outcome of the entropy lower bound `h_top ≥ log r_1 ≥ 2·log α > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntropyBoundCheck {
    pub holds: bool,
    /// `h_top` and `2·log α` agree within `2^-(precision/2)`.
    pub equality: bool,
    /// Upper bound on `|h_top - 2·log α|`.
    pub gap: BigRational,
}

pub fn check_entropy_bound(report: &EntropyReport, cert: &PisotCertificate) -> Result<EntropyBoundCheck> {
    check_entropy_bound_with(report, &two_log_alpha(cert, report.precision_bits)?)
}

/// Same check against an arbitrary enclosure of `2·log α`, for units that
/// are not Pisot.
pub fn check_entropy_bound_with(report: &EntropyReport, two_log_alpha: &Interval) -> Result<EntropyBoundCheck> {
    let w = report.precision_bits + GUARD_BITS;
    let r1 = report.r.get(1).ok_or(Error::OutOfRange {
        index: 1,
        max: report.r.len().saturating_sub(1),
    })?;
    let log_r1 = r1.ln(w)?;
    let h = &report.h_top;
    let refuted = h.hi() < log_r1.lo() || log_r1.hi() < two_log_alpha.lo() || !two_log_alpha.is_positive();
    if refuted {
        return Err(Error::EntropyBound(format!(
            "h_top ∈ [{:.12e}, {:.12e}], log r_1 ∈ [{:.12e}, {:.12e}], 2·log α ∈ [{:.12e}, {:.12e}]",
            h.lo_f64(),
            h.hi_f64(),
            log_r1.lo_f64(),
            log_r1.hi_f64(),
            two_log_alpha.lo_f64(),
            two_log_alpha.hi_f64()
        )));
    }
    let gap = h.hull(two_log_alpha).width();
    let equality = h.overlaps(two_log_alpha) && gap <= eps(report.precision_bits / 2);
    Ok(EntropyBoundCheck {
        holds: true,
        equality,
        gap,
    })
}

/// Spectral radius of `Λ^k M` for `k = 0..=n`, from the exact integer
/// characteristic polynomial of each exterior power.
pub fn exterior_spectral_radii(m: &IntMatrix, precision_bits: u64) -> Result<Vec<Interval>> {
    let n = m.rows();
    let w = precision_bits + GUARD_BITS;
    let mut out = vec![Interval::one()];
    for k in 1..=n {
        let cp = m.exterior_power(k).charpoly();
        let roots = enclose_roots(&cp, w)?;
        let best = roots
            .iter()
            .map(|z| z.abs(w))
            .reduce(|a, b| a.max(&b))
            .unwrap_or_else(Interval::zero);
        out.push(best);
    }
    Ok(out)
}

pub fn max_interval(values: &[Interval]) -> Interval {
    values.iter().skip(1).fold(values[0].clone(), |acc, x| acc.max(x))
}

/// `M^k ≠ I` for `1 ≤ k ≤ limit`.
pub fn no_finite_order_up_to(m: &IntMatrix, limit: u32) -> bool {
    m.finite_order_up_to(limit).is_none()
}

/// `min_{|S| = p} |∏_S λ|`, the counterpart used in the duality
/// `r_{m-p}·(min_S |∏_S λ|)² = |N(α)|²`.
pub fn min_subset_modulus(lambdas: &[ComplexInterval], p: usize, precision_bits: u64) -> Interval {
    let prods = subset_products(&moduli(lambdas, precision_bits), p, precision_bits);
    prods.iter().skip(1).fold(prods[0].clone(), |acc, x| {
        Interval::new(
            acc.lo().clone().min(x.lo().clone()),
            acc.hi().clone().min(x.hi().clone()),
        )
    })
}

/// Whether two reports agree within their enclosures.
pub fn reports_agree(a: &EntropyReport, b: &EntropyReport) -> bool {
    a.r.len() == b.r.len() && a.r.iter().zip(&b.r).all(|(x, y)| x.overlaps(y)) && a.h_top.overlaps(&b.h_top)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmtorus::{all_cm_types, delta_from_ints, make_cm_field, multiplication_matrix, CMTypeMode};
    use crate::interval::rat;
    use crate::numberfield::{make_field, IntPolynomial, DEFAULT_PRECISION};
    use crate::pisot::{find_pisot_unit, is_pisot_unit};
    use num_traits::Zero;

    fn cm(poly: &str, delta: &[i64]) -> CMField {
        let k = make_field(IntPolynomial::parse(poly).unwrap(), DEFAULT_PRECISION).unwrap();
        make_cm_field(&k, &delta_from_ints(&k, delta).unwrap()).unwrap()
    }

    fn report(e: &CMField, alpha: &FieldElement, ty: &CMType) -> EntropyReport {
        let s = h1_eigenvalues(e, ty, alpha, 128).unwrap();
        topological_entropy(&s.values, 128).unwrap()
    }

    #[test]
    fn zeta5_spectrum() {
        let e = cm("x^2-x-1", &[-2, -1]);
        let t = FieldElement::theta(e.base());
        let s = h1_eigenvalues(&e, &CMType::canonical(2), &t, 128).unwrap();
        assert!(s.alpha_generates);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((s.values[0].re.mid_f64() - (1.0 - phi)).abs() < 1e-15);
        assert!((s.values[1].re.mid_f64() - phi).abs() < 1e-15);
        let rep = topological_entropy(&s.values, 128).unwrap();
        assert_eq!(rep.r[0], Interval::one());
        assert!((rep.r[1].mid_f64() - phi * phi).abs() < 1e-14);
        assert!(rep.r[2].contains(&int(1)));
        assert_eq!(rep.dominant_p, 1);
        // 2·log φ
        assert!((rep.h_top.mid_f64() - 0.962_423_650_119_206_9).abs() < 1e-15);
        assert!(rep.h_top.width() < rat(1, 10).pow(20));
    }

    #[test]
    fn identity_has_zero_entropy() {
        let e = cm("x^2-x-1", &[-2, -1]);
        let one = FieldElement::one(e.base());
        let s = h1_eigenvalues(&e, &CMType::canonical(2), &one, 128).unwrap();
        assert!(!s.alpha_generates);
        assert!(s.values.iter().all(|v| v.re.contains(&int(1))));
        let rep = topological_entropy(&s.values, 128).unwrap();
        assert!(rep.h_top.contains(&BigRational::zero()));
        assert!(rep.h_top.hi() < &eps(100));
    }

    #[test]
    fn out_of_range_p() {
        let lam = vec![ComplexInterval::one()];
        assert!(matches!(
            hpp_spectral_radius(&lam, 2, 64),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn gaussian_sqrt2_entropy_and_bound() {
        let e = cm("x^2-2", &[-1]);
        let a = FieldElement::from_ints(e.base(), &[1, 1]).unwrap();
        let mut rep = report(&e, &a, &CMType::canonical(2));
        let want = 2.0 * (1.0 + 2f64.sqrt()).ln();
        assert!((rep.h_top.mid_f64() - want).abs() < 1e-14);
        let cert = is_pisot_unit(&a, 128).unwrap();
        let chk = check_entropy_bound(&rep, &cert).unwrap();
        assert!(chk.holds && chk.equality);
        rep.attach_alpha(&cert).unwrap();
        assert_eq!(
            rep.symbolic.as_deref(),
            Some("2·log(α), α = root of x^2 - 2x - 1 in (2, 3)")
        );
    }

    #[test]
    fn zeta5_bound_and_symbolic_form() {
        let e = cm("x^2-x-1", &[-2, -1]);
        let t = FieldElement::theta(e.base());
        let mut rep = report(&e, &t, &CMType::canonical(2));
        let cert = is_pisot_unit(&t, 128).unwrap();
        let chk = check_entropy_bound(&rep, &cert).unwrap();
        assert!(chk.equality);
        assert!(chk.gap < rat(1, 10).pow(25));
        rep.attach_alpha(&cert).unwrap();
        assert_eq!(
            rep.symbolic.as_deref(),
            Some("2·log(α), α = root of x^2 - x - 1 in (1, 2)")
        );
    }

    #[test]
    fn non_pisot_unit_bound_without_equality() {
        // θ² in x³ - 3x + 1 has conjugates ≈ 3.53, 2.35, 0.12
        let e = cm("x^3-3x+1", &[-2, 1]);
        let a = FieldElement::theta(e.base()).pow(2);
        assert!(is_pisot_unit(&a, 64).is_err());
        let rep = report(&e, &a, &CMType::canonical(3));
        let emb = a.real_embeddings(128).unwrap();
        let top = max_interval(&emb);
        let bound = top.ln(160).unwrap().scale(&int(2));
        let chk = check_entropy_bound_with(&rep, &bound).unwrap();
        assert!(chk.holds);
        assert!(!chk.equality);
        assert_eq!(rep.dominant_p, 2);
    }

    #[test]
    fn entropy_is_independent_of_cm_type() {
        for (poly, delta) in [("x^2-x-1", vec![-2, -1]), ("x^3-3x+1", vec![-2, 1])] {
            let e = cm(poly, &delta);
            let alpha = find_pisot_unit(e.base(), 2, Some(1), 96).unwrap().remove(0).alpha;
            let types = all_cm_types(e.degree(), CMTypeMode::All);
            let base = report(&e, &alpha, &types[0]);
            for ty in &types[1..] {
                assert!(reports_agree(&base, &report(&e, &alpha, ty)), "{poly} {ty}");
            }
        }
    }

    #[test]
    fn duality_for_units() {
        let e = cm("x^3-3x+1", &[-2, 1]);
        let alpha = find_pisot_unit(e.base(), 2, Some(1), 96).unwrap().remove(0).alpha;
        let lam = h1_eigenvalues(&e, &CMType::canonical(3), &alpha, 128).unwrap().values;
        let m = lam.len();
        for p in 0..=m {
            let r = hpp_spectral_radius(&lam, m - p, 128).unwrap();
            let mn = min_subset_modulus(&lam, p, 128);
            assert!(r.mul(&mn.sqr()).contains(&int(1)) || (r.mul(&mn.sqr()).mid_f64() - 1.0).abs() < 1e-30);
        }
    }

    #[test]
    fn powers_scale_entropy() {
        let e = cm("x^2-x-1", &[-2, -1]);
        let t = FieldElement::theta(e.base());
        let h1 = report(&e, &t, &CMType::canonical(2)).h_top;
        for k in 1..=3u32 {
            let hk = report(&e, &t.pow(k), &CMType::canonical(2)).h_top;
            assert!(hk.overlaps(&h1.scale(&int(k as i64))), "k = {k}");
        }
    }

    #[test]
    fn exterior_power_oracle() {
        for (poly, delta, coords) in [("x^2-x-1", vec![-2, -1], vec![0, 1]), ("x^2-2", vec![-1], vec![1, 1])] {
            let e = cm(poly, &delta);
            let a = FieldElement::from_ints(e.base(), &coords).unwrap();
            let l = multiplication_matrix(&e, &a).unwrap();
            let radii = exterior_spectral_radii(&l.matrix, 128).unwrap();
            assert_eq!(radii.len(), 5);
            let rep = report(&e, &a, &CMType::canonical(2));
            assert!(max_interval(&radii).overlaps(&max_interval(&rep.r)), "{poly}");
            assert!(no_finite_order_up_to(&l.matrix, 12));
        }
    }
}
