//! Exact real-root counting and isolation with Sturm sequences.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::{IntPolynomial, RatPoly};
use crate::interval::{eps, int, sign};

/// Endpoint of a counting interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bound {
    NegInf,
    Finite(BigRational),
    PosInf,
}

impl Bound {
    pub fn int(n: i64) -> Self {
        Bound::Finite(int(n))
    }
}

impl From<BigRational> for Bound {
    fn from(q: BigRational) -> Self {
        Bound::Finite(q)
    }
}

/// Rescales by a positive rational so coefficients are coprime integers;
/// signs are preserved.
fn normalize_positive(p: &RatPoly) -> RatPoly {
    if p.is_zero() {
        return p.clone();
    }
    let lcm = p.coeffs().iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = p
        .coeffs()
        .iter()
        .map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x)).abs();
    RatPoly::new(ints.into_iter().map(|x| BigRational::from_integer(x / &g)).collect())
}

/// Sturm sequence of the squarefree part of a polynomial.
#[derive(Clone, Debug)]
pub struct SturmChain {
    seq: Vec<RatPoly>,
}

impl SturmChain {
    pub fn new(p: &RatPoly) -> Self {
        assert!(!p.is_zero(), "Sturm chain of the zero polynomial");
        let p0 = normalize_positive(&p.squarefree());
        let mut seq = vec![p0.clone()];
        if p0.degree() == 0 {
            return Self { seq };
        }
        let mut prev = p0;
        let mut cur = normalize_positive(&prev.derivative());
        while !cur.is_zero() {
            let next = normalize_positive(&prev.rem(&cur).neg());
            seq.push(cur.clone());
            prev = cur;
            cur = next;
        }
        Self { seq }
    }

    pub fn from_int(p: &IntPolynomial) -> Self {
        Self::new(&p.to_rat())
    }

    /// The squarefree polynomial the chain was built from.
    pub fn base(&self) -> &RatPoly {
        &self.seq[0]
    }

    fn signs_at(&self, b: &Bound) -> usize {
        let mut last = 0;
        let mut changes = 0;
        for p in &self.seq {
            let s = match b {
                Bound::Finite(x) => sign(&p.eval(x)),
                Bound::PosInf => sign(&p.leading()),
                Bound::NegInf => {
                    let s = sign(&p.leading());
                    if p.degree() % 2 == 1 {
                        -s
                    } else {
                        s
                    }
                }
            };
            if s == 0 {
                continue;
            }
            if last != 0 && s != last {
                changes += 1;
            }
            last = s;
        }
        changes
    }

    /// Number of distinct real roots in `(lo, hi]`.
    pub fn count(&self, lo: &Bound, hi: &Bound) -> usize {
        if let (Bound::Finite(a), Bound::Finite(b)) = (lo, hi) {
            if a >= b {
                return 0;
            }
        }
        if matches!(hi, Bound::NegInf) || matches!(lo, Bound::PosInf) {
            return 0;
        }
        self.signs_at(lo).saturating_sub(self.signs_at(hi))
    }

    /// Disjoint half-open intervals `(lo, hi]`, ascending, each holding
    /// exactly one real root.
    pub fn isolate(&self) -> Vec<(BigRational, BigRational)> {
        let b = root_bound(self.base());
        let mut out = Vec::new();
        let mut stack = vec![(-b.clone(), b)];
        while let Some((lo, hi)) = stack.pop() {
            let n = self.count(&Bound::Finite(lo.clone()), &Bound::Finite(hi.clone()));
            match n {
                0 => {}
                1 => out.push((lo, hi)),
                _ => {
                    let mid = (&lo + &hi) / int(2);
                    stack.push((lo, mid.clone()));
                    stack.push((mid, hi));
                }
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// Shrinks an isolating interval `(lo, hi]` to width at most `2^-bits`.
    pub fn refine(&self, lo: &BigRational, hi: &BigRational, bits: u64) -> (BigRational, BigRational) {
        let p = self.base();
        let target = eps(bits);
        let (mut lo, mut hi) = (lo.clone(), hi.clone());
        // Sturm bisection until neither endpoint is a root, then sign bisection.
        while p.eval(&lo).is_zero() || p.eval(&hi).is_zero() {
            if p.eval(&hi).is_zero() {
                let l = (&hi - &target).max(lo.clone());
                return (l, hi);
            }
            let mid = (&lo + &hi) / int(2);
            if self.count(&Bound::Finite(lo.clone()), &Bound::Finite(mid.clone())) == 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let s_hi = sign(&p.eval(&hi));
        while &hi - &lo > target {
            let mid = (&lo + &hi) / int(2);
            let s = sign(&p.eval(&mid));
            if s == 0 {
                let l = (&mid - &target).max(lo);
                return (l, mid);
            }
            if s == s_hi {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (lo, hi)
    }

    /// Isolating intervals of width at most `2^-bits`.
    pub fn real_roots(&self, bits: u64) -> Vec<(BigRational, BigRational)> {
        self.isolate()
            .into_iter()
            .map(|(lo, hi)| self.refine(&lo, &hi, bits))
            .collect()
    }
}

/// Cauchy bound: every complex root has modulus below the returned value.
pub fn root_bound(p: &RatPoly) -> BigRational {
    let l = p.leading().abs();
    let m = p
        .coeffs()
        .iter()
        .rev()
        .skip(1)
        .map(|c| c.abs() / &l)
        .max()
        .unwrap_or_else(BigRational::zero);
    (m + int(1)).ceil()
}

/// Distinct real roots of `poly` in `(lo, hi]`.
pub fn sturm_count(poly: &IntPolynomial, lo: &Bound, hi: &Bound) -> usize {
    if poly.is_zero() || poly.degree() == 0 {
        return 0;
    }
    SturmChain::from_int(poly).count(lo, hi)
}
