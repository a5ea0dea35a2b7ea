//! Certified enclosures with exact rational endpoints.
//!
//! Arithmetic on [`Interval`] is exact; [`Interval::round`] widens outward to
//! a dyadic grid so that long computations keep bounded denominators. Every
//! transcendental operation here (`sqrt`, `log`) returns an interval that
//! provably contains the true value.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn pow2(bits: u64) -> BigInt {
    BigInt::one() << bits
}

/// Largest dyadic `k / 2^bits` not above `q`.
pub fn floor_dyadic(q: &BigRational, bits: u64) -> BigRational {
    if q.denom().bits() <= bits {
        return q.clone();
    }
    let n = (q.numer() << bits).div_floor(q.denom());
    BigRational::new(n, pow2(bits))
}

/// Smallest dyadic `k / 2^bits` not below `q`.
pub fn ceil_dyadic(q: &BigRational, bits: u64) -> BigRational {
    if q.denom().bits() <= bits {
        return q.clone();
    }
    let n = (q.numer() << bits).div_ceil(q.denom());
    BigRational::new(n, pow2(bits))
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `2^-bits` as a rational.
pub fn eps(bits: u64) -> BigRational {
    BigRational::new(BigInt::one(), pow2(bits))
}

/// Closed real interval `[lo, hi]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: BigRational,
    hi: BigRational,
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.17e}, {:.17e}]", self.lo_f64(), self.hi_f64())
    }
}

impl Interval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        debug_assert!(lo <= hi, "inverted interval");
        Self { lo, hi }
    }

    pub fn point(x: BigRational) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    pub fn from_int(n: i64) -> Self {
        Self::point(int(n))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// Enclosure `[c - r, c + r]`.
    pub fn ball(c: &BigRational, r: &BigRational) -> Self {
        Self::new(c - r, c + r)
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn mid(&self) -> BigRational {
        (&self.lo + &self.hi) / int(2)
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn radius(&self) -> BigRational {
        self.width() / int(2)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    pub fn overlaps(&self, o: &Self) -> bool {
        self.lo <= o.hi && o.lo <= self.hi
    }

    /// Certified ordering: `Some` only when the intervals are disjoint or
    /// both are the same point.
    pub fn certified_cmp(&self, o: &Self) -> Option<Ordering> {
        if self.hi < o.lo {
            Some(Ordering::Less)
        } else if o.hi < self.lo {
            Some(Ordering::Greater)
        } else if self.is_point() && o.is_point() && self.lo == o.lo {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn hull(&self, o: &Self) -> Self {
        Self::new(self.lo.clone().min(o.lo.clone()), self.hi.clone().max(o.hi.clone()))
    }

    /// Upper bound on `|x|`.
    pub fn mag(&self) -> BigRational {
        self.lo.abs().max(self.hi.abs())
    }

    /// Lower bound on `|x|`.
    pub fn mig(&self) -> BigRational {
        if self.contains_zero() {
            BigRational::zero()
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64().unwrap_or(f64::NAN)
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64().unwrap_or(f64::NAN)
    }

    pub fn mid_f64(&self) -> f64 {
        self.mid().to_f64().unwrap_or(f64::NAN)
    }

    /// Outward rounding to the grid `2^-bits`.
    pub fn round(&self, bits: u64) -> Self {
        Self {
            lo: floor_dyadic(&self.lo, bits),
            hi: ceil_dyadic(&self.hi, bits),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self {
            lo: &self.lo - &o.hi,
            hi: &self.hi - &o.lo,
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }

    pub fn add_rat(&self, q: &BigRational) -> Self {
        Self {
            lo: &self.lo + q,
            hi: &self.hi + q,
        }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        let (a, b) = (&self.lo * q, &self.hi * q);
        if q.is_negative() {
            Self { lo: b, hi: a }
        } else {
            Self { lo: a, hi: b }
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_point() && o.is_point() {
            return Self::point(&self.lo * &o.lo);
        }
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().cloned().unwrap_or_default();
        let hi = c.iter().max().cloned().unwrap_or_default();
        Self { lo, hi }
    }

    pub fn sqr(&self) -> Self {
        let a = self.mig();
        let b = self.mag();
        Self {
            lo: &a * &a,
            hi: &b * &b,
        }
    }

    pub fn recip(&self) -> Result<Self> {
        if self.contains_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self {
            lo: self.hi.recip(),
            hi: self.lo.recip(),
        })
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.recip()?))
    }

    pub fn abs(&self) -> Self {
        Self {
            lo: self.mig(),
            hi: self.mag(),
        }
    }

    /// Enclosure of `max(self, o)`.
    pub fn max(&self, o: &Self) -> Self {
        Self {
            lo: self.lo.clone().max(o.lo.clone()),
            hi: self.hi.clone().max(o.hi.clone()),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Square root of a nonnegative interval, endpoints on the grid `2^-bits`.
    pub fn sqrt(&self, bits: u64) -> Result<Self> {
        if self.lo.is_negative() {
            return Err(Error::InvalidArgument("square root of negative interval".into()));
        }
        let scale = pow2(2 * bits);
        let lo_scaled = (self.lo.numer() * &scale).div_floor(self.lo.denom());
        let hi_scaled = (self.hi.numer() * &scale).div_ceil(self.hi.denom());
        let lo_root = lo_scaled.sqrt();
        let mut hi_root = hi_scaled.sqrt();
        if &hi_root * &hi_root < hi_scaled {
            hi_root += 1;
        }
        Ok(Self {
            lo: BigRational::new(lo_root, pow2(bits)),
            hi: BigRational::new(hi_root, pow2(bits)),
        })
    }

    /// Natural logarithm of a positive interval, accurate to about `2^-bits`.
    pub fn ln(&self, bits: u64) -> Result<Self> {
        if !self.is_positive() {
            return Err(Error::InvalidArgument("logarithm of non-positive interval".into()));
        }
        let lo = ln_rational(&self.lo, bits);
        let hi = if self.is_point() {
            lo.clone()
        } else {
            ln_rational(&self.hi, bits)
        };
        Ok(Self { lo: lo.lo, hi: hi.hi })
    }

    pub fn to_ball(&self, digits: usize) -> Ball {
        Ball::from_interval(self, digits)
    }
}

/// `atanh(t)` for `0 <= t <= 1/3`, enclosed.
fn atanh_small(t: &BigRational, bits: u64) -> Interval {
    if t.is_zero() {
        return Interval::zero();
    }
    let w = bits + 16;
    let t_iv = Interval::point(t.clone());
    let t2 = t_iv.sqr().round(w);
    let mut power = t_iv.round(w);
    let mut sum = Interval::zero();
    let cutoff = eps(bits + 8);
    let mut n: i64 = 0;
    loop {
        let term = power.scale(&rat(1, 2 * n + 1)).round(w);
        sum = sum.add(&term);
        power = power.mul(&t2).round(w);
        n += 1;
        // tail ≤ t^(2n+1) / ((2n+1)(1 - t²)) ≤ t^(2n+1) · 9/8
        let tail = power.hi() * rat(9, 8);
        if tail < cutoff {
            return Interval::new(sum.lo().clone(), sum.hi() + tail);
        }
    }
}

fn ln2(bits: u64) -> Interval {
    atanh_small(&rat(1, 3), bits + 4).scale(&int(2))
}

fn ln_rational(q: &BigRational, bits: u64) -> Interval {
    debug_assert!(q.is_positive());
    let mut k = q.numer().bits() as i64 - q.denom().bits() as i64;
    let shift = |k: i64| -> BigRational {
        if k >= 0 {
            BigRational::from_integer(pow2(k as u64))
        } else {
            BigRational::new(BigInt::one(), pow2((-k) as u64))
        }
    };
    let mut y = q / shift(k);
    if y < int(1) {
        y *= int(2);
        k -= 1;
    }
    if y >= int(2) {
        y /= int(2);
        k += 1;
    }
    let t = (&y - int(1)) / (&y + int(1));
    let extra = 64 - (k.unsigned_abs().max(1)).leading_zeros() as u64;
    let log_y = atanh_small(&t, bits + 4).scale(&int(2));
    let log_2k = ln2(bits + extra + 4).scale(&int(k));
    log_y.add(&log_2k).round(bits + 2)
}

/// Complex enclosure as a rectangle.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ComplexInterval {
    pub re: Interval,
    pub im: Interval,
}

impl fmt::Debug for ComplexInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} + {:?}i", self.re, self.im)
    }
}

impl ComplexInterval {
    pub fn new(re: Interval, im: Interval) -> Self {
        Self { re, im }
    }

    pub fn real(re: Interval) -> Self {
        Self {
            re,
            im: Interval::zero(),
        }
    }

    pub fn from_rat(q: BigRational) -> Self {
        Self::real(Interval::point(q))
    }

    pub fn zero() -> Self {
        Self::real(Interval::zero())
    }

    pub fn one() -> Self {
        Self::real(Interval::one())
    }

    pub fn is_real(&self) -> bool {
        self.im.is_point() && self.im.lo().is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            re: self.re.add(&o.re),
            im: self.im.add(&o.im),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self {
            re: self.re.sub(&o.re),
            im: self.im.sub(&o.im),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: self.im.neg(),
        }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        Self {
            re: self.re.scale(q),
            im: self.im.scale(q),
        }
    }

    pub fn mul_real(&self, x: &Interval) -> Self {
        Self {
            re: self.re.mul(x),
            im: self.im.mul(x),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_real() && o.is_real() {
            return Self::real(self.re.mul(&o.re));
        }
        Self {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }

    /// Multiplication by `i`.
    pub fn mul_i(&self) -> Self {
        Self {
            re: self.im.neg(),
            im: self.re.clone(),
        }
    }

    pub fn round(&self, bits: u64) -> Self {
        Self {
            re: self.re.round(bits),
            im: self.im.round(bits),
        }
    }

    pub fn contains_zero(&self) -> bool {
        self.re.contains_zero() && self.im.contains_zero()
    }

    pub fn overlaps(&self, o: &Self) -> bool {
        self.re.overlaps(&o.re) && self.im.overlaps(&o.im)
    }

    /// Enclosure of `|z|²`.
    pub fn norm_sqr(&self) -> Interval {
        self.re.sqr().add(&self.im.sqr())
    }

    /// Enclosure of `|z|`.
    pub fn abs(&self, bits: u64) -> Interval {
        if self.im.is_point() && self.im.lo().is_zero() {
            return self.re.abs();
        }
        if self.re.is_point() && self.re.lo().is_zero() {
            return self.im.abs();
        }
        self.norm_sqr()
            .round(2 * bits + 4)
            .sqrt(bits + 2)
            .expect("norm is nonnegative")
    }

    /// Largest half-width over both parts.
    pub fn radius(&self) -> BigRational {
        self.re.radius().max(self.im.radius())
    }

    pub fn to_ball(&self, digits: usize) -> ComplexBall {
        ComplexBall {
            re: self.re.to_ball(digits),
            im: self.im.to_ball(digits),
        }
    }

    pub fn to_c64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.mid_f64(), self.im.mid_f64())
    }
}

/// Decimal enclosure `center ± radius` for serialization.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ball {
    pub center: String,
    pub radius: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexBall {
    pub re: Ball,
    pub im: Ball,
}

impl Ball {
    /// Rounds the midpoint to `digits` decimals and widens the radius to
    /// cover both the interval and the rounding.
    pub fn from_interval(iv: &Interval, digits: usize) -> Self {
        let scale = BigRational::from_integer(BigInt::from(10).pow(digits as u32));
        let mid = iv.mid();
        let scaled = (&mid * &scale).round();
        let center = &scaled / &scale;
        let r = iv.radius() + (&mid - &center).abs();
        Self {
            center: format_fixed(&scaled.to_integer(), digits),
            radius: format_radius(&r),
        }
    }

    pub fn to_interval(&self) -> Result<Interval> {
        let c = parse_decimal(&self.center)?;
        let r = parse_decimal(&self.radius)?;
        if r.is_negative() {
            return Err(Error::InvalidArgument(format!("negative radius {}", self.radius)));
        }
        Ok(Interval::ball(&c, &r))
    }
}

impl ComplexBall {
    pub fn to_interval(&self) -> Result<ComplexInterval> {
        Ok(ComplexInterval::new(self.re.to_interval()?, self.im.to_interval()?))
    }
}

fn format_fixed(scaled: &BigInt, digits: usize) -> String {
    let neg = scaled.is_negative();
    let s = scaled.abs().to_string();
    let s = if s.len() <= digits {
        format!("{}{}", "0".repeat(digits + 1 - s.len()), s)
    } else {
        s
    };
    let (int_part, frac) = s.split_at(s.len() - digits);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac}")
    }
}

/// Upward-rounded radius with three significant digits, e.g. `"125e-43"`.
pub fn format_radius(r: &BigRational) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let r = r.abs();
    // choose e with 100 <= r·10^-e < 1000
    let mut e: i64 = (r.numer().to_string().len() as i64) - (r.denom().to_string().len() as i64) - 3;
    let ten = BigInt::from(10);
    let scaled = |e: i64| -> BigRational {
        if e >= 0 {
            &r / BigRational::from_integer(ten.pow(e as u32))
        } else {
            &r * BigRational::from_integer(ten.pow((-e) as u32))
        }
    };
    while scaled(e) >= int(1000) {
        e += 1;
    }
    while scaled(e) < int(100) {
        e -= 1;
    }
    let m = scaled(e).ceil().to_integer();
    format!("{m}e{e}")
}

/// Parses a plain or exponent-form decimal string exactly.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse {
        position: 0,
        message: format!("invalid decimal '{s}'"),
    };
    let s = s.trim();
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(bad());
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{ip}{fp}").parse().map_err(|_| bad())?;
    let e = exp - fp.len() as i64;
    let ten = BigInt::from(10);
    let mut v = if e >= 0 {
        BigRational::from_integer(digits * ten.pow(e as u32))
    } else {
        BigRational::new(digits, ten.pow((-e) as u32))
    };
    if neg {
        v = -v;
    }
    Ok(v)
}

/// Exact `num/den` rendering; integers print bare.
pub fn rational_string(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse {
        position: 0,
        message: format!("invalid rational '{s}'"),
    };
    let s = s.trim().replace('\u{2212}', "-");
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None if s.contains('.') || s.contains(['e', 'E']) => parse_decimal(&s),
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Sign of a rational as an integer in {-1, 0, 1}.
pub fn sign(q: &BigRational) -> i32 {
    match q.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}
