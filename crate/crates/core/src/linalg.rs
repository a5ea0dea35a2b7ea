//! Exact integer and rational matrices.

use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numberfield::poly::{IntPolynomial, RatPoly};

/// Dense square-or-rectangular matrix over ℚ, row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigRational::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> BigRational) -> Self {
        let data = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| f(i, j))
            .collect();
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows);
        Self::from_fn(self.rows, o.cols, |i, j| {
            (0..self.cols).fold(BigRational::zero(), |acc, k| acc + self.get(i, k) * o.get(k, j))
        })
    }

    pub fn trace(&self) -> BigRational {
        (0..self.rows.min(self.cols)).fold(BigRational::zero(), |acc, i| acc + self.get(i, i))
    }

    /// Determinant by Gaussian elimination over ℚ.
    pub fn det(&self) -> BigRational {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = BigRational::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !a[r * n + c].is_zero()) else {
                return BigRational::zero();
            };
            if p != c {
                for k in 0..n {
                    a.swap(p * n + k, c * n + k);
                }
                det = -det;
            }
            let piv = a[c * n + c].clone();
            det *= &piv;
            for r in c + 1..n {
                let f = &a[r * n + c] / &piv;
                if f.is_zero() {
                    continue;
                }
                for k in c..n {
                    let v = &f * &a[c * n + k];
                    a[r * n + k] -= v;
                }
            }
        }
        det
    }

    /// Characteristic polynomial `det(xI - A)` (Faddeev–LeVerrier).
    pub fn charpoly(&self) -> RatPoly {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut c = vec![BigRational::zero(); n + 1];
        c[n] = BigRational::one();
        let mut m = Self::zeros(n, n);
        for k in 1..=n {
            // M_k = A·M_{k-1} + c_{n-k+1}·I
            let mut next = self.mul(&m);
            for i in 0..n {
                let v = next.get(i, i) + &c[n - k + 1];
                next.set(i, i, v);
            }
            m = next;
            c[n - k] = -self.mul(&m).trace() / BigRational::from_integer(BigInt::from(k));
        }
        RatPoly::new(c)
    }

    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for c in 0..n {
            let p = (c..n).find(|&r| !a.get(r, c).is_zero())?;
            if p != c {
                for k in 0..n {
                    a.data.swap(p * n + k, c * n + k);
                    inv.data.swap(p * n + k, c * n + k);
                }
            }
            let piv = a.get(c, c).clone();
            for k in 0..n {
                let v = a.get(c, k) / &piv;
                a.set(c, k, v);
                let w = inv.get(c, k) / &piv;
                inv.set(c, k, w);
            }
            for r in 0..n {
                if r == c || a.get(r, c).is_zero() {
                    continue;
                }
                let f = a.get(r, c).clone();
                for k in 0..n {
                    let v = a.get(r, k) - &f * a.get(c, k);
                    a.set(r, k, v);
                    let w = inv.get(r, k) - &f * inv.get(c, k);
                    inv.set(r, k, w);
                }
            }
        }
        Some(inv)
    }

    pub fn to_int(&self) -> Option<IntMatrix> {
        if self.data.iter().all(|x| x.is_integer()) {
            Some(IntMatrix {
                rows: self.rows,
                cols: self.cols,
                data: self.data.iter().map(|x| x.to_integer()).collect(),
            })
        } else {
            None
        }
    }
}

/// Dense integer matrix, row-major. Serializes as nested arrays of decimal
/// strings.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.rows)
            .map(|i| format!("{:?}", self.row(i).iter().map(|x| x.to_string()).collect_vec()))
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.iter().flatten().map(|&x| BigInt::from(x)).collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> BigInt) -> Self {
        let data = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| f(i, j))
            .collect();
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rat(&self) -> RatMatrix {
        RatMatrix::from_fn(self.rows, self.cols, |i, j| {
            BigRational::from_integer(self.get(i, j).clone())
        })
    }

    /// Entries as `i64`, when they all fit.
    pub fn to_i64(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.to_i64()).collect())
            .collect()
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows);
        Self::from_fn(self.rows, o.cols, |i, j| {
            (0..self.cols).fold(BigInt::zero(), |acc, k| acc + self.get(i, k) * o.get(k, j))
        })
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i).iter().zip(v).fold(BigRational::zero(), |acc, (a, x)| {
                    acc + BigRational::from_integer(a.clone()) * x
                })
            })
            .collect()
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::identity(self.rows);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    if i == j {
                        self.get(i, j).is_one()
                    } else {
                        self.get(i, j).is_zero()
                    }
                })
            })
    }

    /// Determinant by fraction-free Bareiss elimination.
    pub fn det(&self) -> BigInt {
        assert!(self.is_square());
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.data.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k * n + k].is_zero() {
                let Some(p) = (k + 1..n).find(|&r| !a[r * n + k].is_zero()) else {
                    return BigInt::zero();
                };
                for c in 0..n {
                    a.swap(p * n + c, k * n + c);
                }
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j];
                    a[i * n + j] = v / &prev;
                }
            }
            prev = a[k * n + k].clone();
        }
        sign * &a[n * n - 1]
    }

    pub fn charpoly(&self) -> IntPolynomial {
        self.to_rat()
            .charpoly()
            .to_int()
            .expect("integer matrix has an integer characteristic polynomial")
    }

    /// Exact inverse, `None` unless the matrix is unimodular.
    pub fn inverse(&self) -> Option<Self> {
        self.to_rat().inverse()?.to_int()
    }

    /// Matrix of the induced action on the k-th exterior power, in the basis
    /// of k-subsets ordered lexicographically.
    pub fn exterior_power(&self, k: usize) -> Self {
        assert!(self.is_square());
        let n = self.rows;
        let subsets: Vec<Vec<usize>> = (0..n).combinations(k).collect();
        let s = subsets.len();
        Self::from_fn(s, s, |a, b| {
            if k == 0 {
                return BigInt::one();
            }
            let minor = Self::from_fn(k, k, |i, j| self.get(subsets[a][i], subsets[b][j]).clone());
            minor.det()
        })
    }

    pub fn reduce_mod(&self, q: u64) -> Vec<u64> {
        let qb = BigInt::from(q);
        self.data
            .iter()
            .map(|x| x.mod_floor(&qb).to_u64().unwrap_or(0))
            .collect()
    }

    /// Multiplicative order of the matrix in GL_n(ℤ/qℤ), searched up to `limit`.
    pub fn order_mod(&self, q: u64, limit: u64) -> Option<u64> {
        assert!(self.is_square());
        let n = self.rows;
        let m = self.reduce_mod(q);
        let id: Vec<u64> = (0..n * n).map(|i| u64::from(i / n == i % n) % q).collect();
        let mut acc = m.clone();
        for k in 1..=limit {
            if acc == id {
                return Some(k);
            }
            let mut next = vec![0u64; n * n];
            for i in 0..n {
                for j in 0..n {
                    let mut s: u128 = 0;
                    for t in 0..n {
                        s += acc[i * n + t] as u128 * m[t * n + j] as u128;
                    }
                    next[i * n + j] = (s % q as u128) as u64;
                }
            }
            acc = next;
        }
        None
    }

    /// Smallest `k ≤ limit` with `self^k = I` over ℤ.
    pub fn finite_order_up_to(&self, limit: u32) -> Option<u32> {
        let mut acc = self.clone();
        for k in 1..=limit {
            if acc.is_identity() {
                return Some(k);
            }
            acc = acc.mul(self);
        }
        None
    }

    /// Block-diagonal matrix with the given square blocks.
    pub fn block_diag(blocks: &[&IntMatrix]) -> Self {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let mut m = Self::zeros(n, n);
        let mut off = 0;
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    m.set(off + i, off + j, b.get(i, j).clone());
                }
            }
            off += b.rows;
        }
        m
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    pub fn max_abs(&self) -> BigInt {
        self.data.iter().map(|x| x.abs()).max().unwrap_or_default()
    }
}

impl Serialize for IntMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.to_string()).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<String>> = Vec::deserialize(d)?;
        parse_matrix(&rows).map_err(serde::de::Error::custom)
    }
}

fn parse_matrix(rows: &[Vec<String>]) -> Result<IntMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    if rows.iter().any(|x| x.len() != c) {
        return Err(Error::InvalidArgument("ragged matrix".into()));
    }
    let mut data = Vec::with_capacity(r * c);
    for x in rows.iter().flatten() {
        data.push(x.parse::<BigInt>().map_err(|_| Error::Parse {
            position: 0,
            message: format!("invalid integer '{x}'"),
        })?);
    }
    Ok(IntMatrix { rows: r, cols: c, data })
}
