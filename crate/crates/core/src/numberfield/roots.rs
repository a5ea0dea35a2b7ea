//! Certified enclosures for every complex root of a squarefree polynomial.
//!
//! Real roots come from Sturm isolation followed by exact bisection. Non-real
//! roots start from a Durand–Kerner iteration in double precision, are
//! polished by Newton steps on exact rationals, and are certified with the
//! inclusion disk `|z - ζ| ≤ n·|p(z)/p'(z)|`. Since the disks are pairwise
//! disjoint, lie in the upper half plane, and their count matches the number
//! of root pairs left after the Sturm count, each holds exactly one root.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::poly::{IntPolynomial, RatPoly};
use super::sturm::{root_bound, Bound, SturmChain};
use crate::error::{Error, Result};
use crate::interval::{eps, floor_dyadic, int, ComplexInterval, Interval};

/// Complex number with exact rational parts.
#[derive(Clone, Debug)]
struct ExactComplex {
    re: BigRational,
    im: BigRational,
}

impl ExactComplex {
    fn from_c64(z: Complex64) -> Self {
        let f = |x: f64| BigRational::from_float(x).unwrap_or_else(BigRational::zero);
        Self {
            re: f(z.re),
            im: f(z.im),
        }
    }

    fn mul(&self, o: &Self) -> Self {
        Self {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    fn round(&self, bits: u64) -> Self {
        Self {
            re: floor_dyadic(&self.re, bits),
            im: floor_dyadic(&self.im, bits),
        }
    }
}

fn eval_exact(p: &RatPoly, z: &ExactComplex) -> ExactComplex {
    let mut acc = ExactComplex {
        re: BigRational::zero(),
        im: BigRational::zero(),
    };
    for c in p.coeffs().iter().rev() {
        acc = acc.mul(z);
        acc.re += c;
    }
    acc
}

fn durand_kerner(p: &RatPoly) -> Vec<Complex64> {
    let n = p.degree();
    let lead = p.leading().to_f64().unwrap_or(1.0);
    let coeffs: Vec<f64> = p.coeffs().iter().map(|c| c.to_f64().unwrap_or(0.0) / lead).collect();
    let eval = |z: Complex64| {
        coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    };
    let radius = root_bound(p).to_f64().unwrap_or(2.0).max(1.0);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius * 0.9, 0.4 + 2.0 * PI * k as f64 / n as f64))
        .collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                denom = Complex64::new(1e-300, 0.0);
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    z
}

/// Newton polishing on exact rationals rounded to `bits`.
fn newton(p: &RatPoly, dp: &RatPoly, start: Complex64, bits: u64) -> ExactComplex {
    let mut z = ExactComplex::from_c64(start).round(bits);
    let tol = eps(2 * bits);
    for _ in 0..200 {
        let f = eval_exact(p, &z);
        let d = eval_exact(dp, &z);
        let dn = d.norm_sqr();
        if dn.is_zero() {
            break;
        }
        // f / d = f·conj(d) / |d|²
        let step = ExactComplex {
            re: (&f.re * &d.re + &f.im * &d.im) / &dn,
            im: (&f.im * &d.re - &f.re * &d.im) / &dn,
        };
        z = ExactComplex {
            re: &z.re - &step.re,
            im: &z.im - &step.im,
        }
        .round(bits);
        if step.norm_sqr() < tol {
            break;
        }
    }
    z
}

/// Upper bound on `n·|p(z)/p'(z)|`, or `None` when `p'(z) = 0`.
fn inclusion_radius(p: &RatPoly, dp: &RatPoly, z: &ExactComplex, bits: u64) -> Option<BigRational> {
    let f = eval_exact(p, z).norm_sqr();
    let d = eval_exact(dp, z).norm_sqr();
    if d.is_zero() {
        return None;
    }
    let n = int(p.degree() as i64);
    let r2 = &n * &n * f / d;
    let iv = Interval::point(r2).round(2 * bits + 16).sqrt(bits + 8).ok()?;
    Some(iv.hi().clone())
}

/// All roots of the squarefree part of `poly`, each enclosed with width at
/// most `2^-bits`. Order: real roots ascending, then each upper-half-plane
/// root (sorted by real then imaginary part) followed by its conjugate.
pub fn enclose_roots(poly: &IntPolynomial, bits: u64) -> Result<Vec<ComplexInterval>> {
    if poly.degree() == 0 {
        return Ok(Vec::new());
    }
    let chain = SturmChain::from_int(poly);
    let sf = chain.base().clone();
    let n = sf.degree();
    let real = chain.real_roots(bits + 1);
    let mut out: Vec<ComplexInterval> = real
        .iter()
        .map(|(lo, hi)| ComplexInterval::real(Interval::new(lo.clone(), hi.clone())))
        .collect();
    let pairs = (n - real.len()) / 2;
    if pairs == 0 {
        return Ok(out);
    }
    debug_assert_eq!(chain.count(&Bound::NegInf, &Bound::PosInf), real.len());
    let dp = sf.derivative();
    let mut approx = durand_kerner(&sf);
    approx.sort_by(|a, b| b.im.abs().total_cmp(&a.im.abs()));
    let mut upper: Vec<Complex64> = approx.into_iter().take(2 * pairs).filter(|z| z.im > 0.0).collect();
    if upper.len() != pairs {
        return Err(Error::PrecisionExhausted(format!(
            "root approximation found {} of {pairs} non-real root pairs of {poly}",
            upper.len()
        )));
    }
    upper.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    let target = eps(bits);
    let mut work = bits + 32;
    for _round in 0..4 {
        let mut boxes = Vec::with_capacity(pairs);
        let mut ok = true;
        for z0 in &upper {
            let z = newton(&sf, &dp, *z0, work);
            let Some(r) = inclusion_radius(&sf, &dp, &z, work) else {
                ok = false;
                break;
            };
            if r > &target / int(2) {
                ok = false;
                break;
            }
            let b = ComplexInterval::new(Interval::ball(&z.re, &r), Interval::ball(&z.im, &r));
            if !b.im.is_positive() {
                ok = false;
                break;
            }
            boxes.push(b);
        }
        if ok {
            let disjoint = boxes
                .iter()
                .enumerate()
                .all(|(i, a)| boxes[i + 1..].iter().all(|b| !a.overlaps(b)));
            if disjoint {
                for b in boxes {
                    let c = b.conj();
                    out.push(b);
                    out.push(c);
                }
                return Ok(out);
            }
        }
        work *= 2;
    }
    Err(Error::PrecisionExhausted(format!(
        "could not certify complex roots of {poly} at {bits} bits"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> IntPolynomial {
        IntPolynomial::parse(s).unwrap()
    }

    #[test]
    fn gaussian_roots() {
        let r = enclose_roots(&p("x^2+1"), 100).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r[0].re.contains(&BigRational::zero()));
        assert!(r[0].im.contains(&int(1)));
        assert!(r[1].im.contains(&int(-1)));
        assert!(r[0].radius() <= eps(100));
    }

    #[test]
    fn cubic_with_complex_pair() {
        let r = enclose_roots(&p("x^3-x-1"), 128).unwrap();
        assert_eq!(r.len(), 3);
        assert!(r[0].is_real());
        assert!((r[0].re.mid_f64() - 1.324_717_957_244_746).abs() < 1e-15);
        // Vieta: the product of the roots is 1 and the pair has modulus² = 1/ρ.
        let prod = r[0].mul(&r[1]).mul(&r[2]);
        assert!(prod.re.contains(&int(1)) || (prod.re.mid_f64() - 1.0).abs() < 1e-30);
        assert!(prod.im.contains_zero());
        assert!(r[1].im.is_positive());
    }

    #[test]
    fn quartic_two_pairs() {
        // x^4 + 1: primitive eighth roots of unity
        let r = enclose_roots(&p("x^4+1"), 100).unwrap();
        assert_eq!(r.len(), 4);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let got: Vec<(f64, f64)> = r.iter().map(|z| (z.re.mid_f64(), z.im.mid_f64())).collect();
        assert!((got[0].0 + h).abs() < 1e-15 && (got[0].1 - h).abs() < 1e-15);
        assert!((got[2].0 - h).abs() < 1e-15 && (got[2].1 - h).abs() < 1e-15);
        for z in &r {
            assert!(z.norm_sqr().contains(&int(1)) || (z.norm_sqr().mid_f64() - 1.0).abs() < 1e-28);
        }
    }

    #[test]
    fn repeated_factor_is_reduced() {
        let r = enclose_roots(&p("x^4 - 2x^2 + 1"), 64).unwrap();
        assert_eq!(r.len(), 2);
    }
}
