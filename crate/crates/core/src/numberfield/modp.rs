//! Irreducibility evidence from factorization patterns modulo small primes.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::poly::IntPolynomial;
use super::sturm::SturmChain;
use crate::error::{Error, Result};

const PRIMES: [u64; 30] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109,
    113,
];

/// Outcome of the irreducibility test for a defining polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Irreducibility {
    /// Factor degree patterns modulo `primes` leave no room for a proper
    /// rational factor.
    Certified { primes: Vec<u64> },
    /// No contradiction found, but no proof either.
    Unverified,
}

impl Irreducibility {
    pub fn is_certified(&self) -> bool {
        matches!(self, Irreducibility::Certified { .. })
    }
}

type Fp = Vec<u64>;

fn trim(mut a: Fp) -> Fp {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn deg(a: &Fp) -> usize {
    a.len().saturating_sub(1)
}

fn inv(a: u64, p: u64) -> u64 {
    // Fermat
    let mut r = 1u64;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn rem(a: &Fp, m: &Fp, p: u64) -> Fp {
    let mut r = a.clone();
    let dm = deg(m);
    let li = inv(m[dm], p);
    while r.len() > dm && !r.is_empty() {
        let k = r.len() - 1;
        let c = r[k] * li % p;
        if c != 0 {
            for (j, &mc) in m.iter().enumerate() {
                let idx = k - dm + j;
                r[idx] = (r[idx] + p - c * mc % p) % p;
            }
        }
        r.pop();
        r = trim(r);
    }
    trim(r)
}

fn mul_mod(a: &Fp, b: &Fp, m: &Fp, p: u64) -> Fp {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    rem(&trim(out), m, p)
}

fn pow_mod(base: &Fp, mut e: u64, m: &Fp, p: u64) -> Fp {
    let mut r: Fp = vec![1];
    let mut b = rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(&r, &b, m, p);
        }
        b = mul_mod(&b, &b, m, p);
        e >>= 1;
    }
    r
}

fn sub(a: &Fp, b: &Fp, p: u64) -> Fp {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|i| (a.get(i).copied().unwrap_or(0) + p - b.get(i).copied().unwrap_or(0)) % p)
            .collect(),
    )
}

fn gcd(a: &Fp, b: &Fp, p: u64) -> Fp {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_empty() {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn div_exact(a: &Fp, b: &Fp, p: u64) -> Fp {
    let db = deg(b);
    let li = inv(b[db], p);
    let mut r = a.clone();
    let mut q = vec![0u64; a.len() - db];
    for k in (0..q.len()).rev() {
        let c = r[k + db] * li % p;
        q[k] = c;
        for (j, &bc) in b.iter().enumerate() {
            r[k + j] = (r[k + j] + p - c * bc % p) % p;
        }
    }
    trim(q)
}

fn reduce(poly: &IntPolynomial, p: u64) -> Fp {
    let pb = BigInt::from(p);
    trim(
        poly.coeffs()
            .iter()
            .map(|c| c.mod_floor(&pb).to_u64().unwrap_or(0))
            .collect(),
    )
}

fn derivative(a: &Fp, p: u64) -> Fp {
    trim(
        a.iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| (i as u64 % p) * c % p)
            .collect(),
    )
}

/// Degrees of the irreducible factors of a squarefree polynomial mod `p`
/// (distinct-degree factorization).
fn factor_degrees(f: &Fp, p: u64) -> Vec<usize> {
    let mut out = Vec::new();
    let mut f = f.clone();
    let x: Fp = vec![0, 1];
    let mut h = x.clone();
    let mut d = 1;
    while deg(&f) >= 2 * d {
        h = pow_mod(&h, p, &f, p);
        let g = gcd(&f, &sub(&h, &x, p), p);
        let dg = deg(&g);
        if dg > 0 {
            out.extend(std::iter::repeat_n(d, dg / d));
            f = div_exact(&f, &g, p);
            h = rem(&h, &f, p);
        }
        d += 1;
    }
    if deg(&f) > 0 {
        out.push(deg(&f));
    }
    out
}

/// Bitmask of factor degrees realizable as sums of sub-multisets.
fn achievable(pattern: &[usize], n: usize) -> Vec<bool> {
    let mut can = vec![false; n + 1];
    can[0] = true;
    for &d in pattern {
        for s in (d..=n).rev() {
            if can[s - d] {
                can[s] = true;
            }
        }
    }
    can
}

fn integer_root(poly: &IntPolynomial) -> Option<BigInt> {
    if poly.coeffs()[0].is_zero() {
        return Some(BigInt::zero());
    }
    let chain = SturmChain::from_int(poly);
    for (lo, hi) in chain.real_roots(2) {
        let mut k = lo.floor().to_integer();
        let top = hi.ceil().to_integer();
        while k <= top {
            if poly.eval_int(&k).is_zero() {
                return Some(k);
            }
            k += 1;
        }
    }
    None
}

/// Tests a monic integer polynomial for irreducibility over ℚ.
///
/// Returns `Err(Reducible)` when an integer root exhibits a linear factor.
pub fn irreducibility(poly: &IntPolynomial) -> Result<Irreducibility> {
    let n = poly.degree();
    if n <= 1 {
        return Ok(Irreducibility::Certified { primes: Vec::new() });
    }
    if let Some(r) = integer_root(poly) {
        return Err(Error::Reducible(format!("{poly} vanishes at {r}")));
    }
    let mut possible = vec![true; n + 1];
    let mut used = Vec::new();
    for &p in &PRIMES {
        let f = reduce(poly, p);
        if deg(&f) != n {
            continue;
        }
        if deg(&gcd(&f, &derivative(&f, p), p)) > 0 {
            continue;
        }
        let pattern = factor_degrees(&f, p);
        let can = achievable(&pattern, n);
        let before = possible.clone();
        for d in 1..n {
            possible[d] &= can[d];
        }
        if possible != before || used.is_empty() {
            used.push(p);
        }
        if (1..n).all(|d| !possible[d]) {
            return Ok(Irreducibility::Certified { primes: used });
        }
    }
    Ok(Irreducibility::Unverified)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> IntPolynomial {
        IntPolynomial::parse(s).unwrap()
    }

    #[test]
    fn certifies_small_fields() {
        for s in ["x^2-x-1", "x^2-2", "x^2+1", "x^3-x-1", "x^3-3x+1", "x^4-4x^2+2"] {
            assert!(irreducibility(&p(s)).unwrap().is_certified(), "{s}");
        }
    }

    #[test]
    fn rejects_linear_factor() {
        assert!(matches!(irreducibility(&p("x^2-1")), Err(Error::Reducible(_))));
        assert!(matches!(irreducibility(&p("x^3-x")), Err(Error::Reducible(_))));
        assert!(matches!(
            irreducibility(&p("x^3 - 2x^2 - 2x + 4")),
            Err(Error::Reducible(_))
        ));
    }

    #[test]
    fn product_of_quadratics_is_not_certified() {
        // (x^2-2)(x^2-3) has no rational root and splits into quadratics mod every prime.
        assert_eq!(
            irreducibility(&p("x^4 - 5x^2 + 6")).unwrap(),
            Irreducibility::Unverified
        );
    }

    #[test]
    fn biquadratic_fields_are_unverified_by_patterns() {
        // Irreducible over Q but reducible modulo every prime.
        assert_eq!(irreducibility(&p("x^4 + 1")).unwrap(), Irreducibility::Unverified);
        assert_eq!(irreducibility(&p("x^4-10x^2+1")).unwrap(), Irreducibility::Unverified);
    }

    #[test]
    fn distinct_degree_pattern() {
        // x^3 - x - 1 has no root in F_2, and splits as (x - 2)(x^2 + 2x + 3) mod 5.
        assert_eq!(factor_degrees(&reduce(&p("x^3-x-1"), 2), 2), vec![3]);
        assert_eq!(factor_degrees(&reduce(&p("x^3-x-1"), 5), 5), vec![1, 2]);
        // x^2 - 2 mod 7 = (x-3)(x-4)
        let g = reduce(&p("x^2-2"), 7);
        assert_eq!(factor_degrees(&g, 7), vec![1, 1]);
    }
}
