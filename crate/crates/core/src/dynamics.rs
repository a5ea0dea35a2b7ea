//! Orbits on the real torus `ℝ^{2m}/ℤ^{2m}` in lattice coordinates.
//!
//! Exact mode works on rational points, which stay on the finite grid of a
//! fixed denominator, so every orbit of an invertible map is purely
//! periodic. Statistical mode stores each coordinate as a 64-bit fixed-point
//! fraction and steps with wrapping integer arithmetic. That is exact modulo
//! `2^-64` for integer matrices, so no drift accumulates and points never
//! leave `[0, 1)`.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cmtorus::LatticeAutomorphism;
use crate::error::{Error, Result};
use crate::linalg::IntMatrix;
use crate::numberfield::FieldElement;

/// Largest partition the statistics accept.
pub const MAX_CELLS: u64 = 1 << 26;

#[derive(Clone, Debug)]
pub enum TorusPoint {
    /// Rational coordinates reduced into `[0, 1)`.
    Exact(Vec<BigRational>),
    /// Floating coordinates in `[0, 1)`.
    Float(Vec<f64>),
    /// Coordinates given symbolically as field elements (real embeddings).
    Symbolic(Vec<FieldElement>),
}

fn frac(q: &BigRational) -> BigRational {
    q - q.floor()
}

impl TorusPoint {
    pub fn exact(coords: Vec<BigRational>) -> Self {
        TorusPoint::Exact(coords.iter().map(frac).collect())
    }

    pub fn float(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite torus coordinate".into()));
        }
        Ok(TorusPoint::Float(
            coords
                .into_iter()
                .map(|x| x.rem_euclid(1.0))
                .map(|x| if x >= 1.0 { 0.0 } else { x })
                .collect(),
        ))
    }

    pub fn dim(&self) -> usize {
        match self {
            TorusPoint::Exact(c) => c.len(),
            TorusPoint::Float(c) => c.len(),
            TorusPoint::Symbolic(c) => c.len(),
        }
    }

    fn to_fixed(&self) -> Result<Vec<u64>> {
        match self {
            TorusPoint::Exact(c) => Ok(c.iter().map(rational_to_fixed).collect()),
            TorusPoint::Float(c) => Ok(c.iter().map(|&x| f64_to_fixed(x)).collect()),
            TorusPoint::Symbolic(_) => Err(Error::InvalidArgument("symbolic points cannot be iterated".into())),
        }
    }
}

fn rational_to_fixed(q: &BigRational) -> u64 {
    let f = frac(q);
    ((f.numer() << 64u32) / f.denom()).to_u64().unwrap_or(0)
}

fn f64_to_fixed(x: f64) -> u64 {
    (x * 18_446_744_073_709_551_616.0) as u64
}

pub fn fixed_to_f64(y: u64) -> f64 {
    y as f64 / 18_446_744_073_709_551_616.0
}

/// Exact value `y / 2^64` of a fixed-point coordinate.
pub fn fixed_to_rational(y: u64) -> BigRational {
    BigRational::new(BigInt::from(y), BigInt::one() << 64u32)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Torsion {
    Order(BigInt),
    NonTorsion,
}

/// Order of `a` in the group `ℝ^{2m}/ℤ^{2m}`.
pub fn torsion_order(a: &TorusPoint) -> Result<Torsion> {
    match a {
        TorusPoint::Float(_) => Err(Error::InvalidArgument(
            "torsion is undecidable for floating points".into(),
        )),
        TorusPoint::Exact(c) => Ok(Torsion::Order(
            c.iter().fold(BigInt::one(), |acc, q| acc.lcm(frac(q).denom())),
        )),
        TorusPoint::Symbolic(c) => {
            let mut rational = Vec::with_capacity(c.len());
            for x in c {
                match x.as_rational() {
                    Some(q) if x.minimal_polynomial().degree() == 1 => rational.push(q),
                    _ => return Ok(Torsion::NonTorsion),
                }
            }
            torsion_order(&TorusPoint::exact(rational))
        }
    }
}

#[derive(Clone, Debug)]
pub enum TorusMap {
    /// `x ↦ M x` for a unimodular integer matrix.
    Linear(IntMatrix),
    /// `x ↦ x + a`.
    Translation(TorusPoint),
}

impl From<&LatticeAutomorphism> for TorusMap {
    fn from(l: &LatticeAutomorphism) -> Self {
        TorusMap::Linear(l.matrix.clone())
    }
}

impl TorusMap {
    pub fn dim(&self) -> usize {
        match self {
            TorusMap::Linear(m) => m.rows(),
            TorusMap::Translation(a) => a.dim(),
        }
    }

    /// Inverse map, for backward orbits.
    pub fn inverse(&self) -> Result<Self> {
        match self {
            TorusMap::Linear(m) => m
                .inverse()
                .map(TorusMap::Linear)
                .ok_or_else(|| Error::InvalidArgument("matrix is not unimodular".into())),
            TorusMap::Translation(TorusPoint::Exact(c)) => {
                Ok(TorusMap::Translation(TorusPoint::exact(c.iter().map(|q| -q).collect())))
            }
            TorusMap::Translation(TorusPoint::Float(c)) => {
                TorusPoint::float(c.iter().map(|x| -x).collect()).map(TorusMap::Translation)
            }
            TorusMap::Translation(TorusPoint::Symbolic(_)) => {
                Err(Error::InvalidArgument("symbolic translation".into()))
            }
        }
    }

    fn check(&self, start: &TorusPoint) -> Result<()> {
        if let TorusMap::Linear(m) = self {
            if !m.is_square() || m.det().abs() != BigInt::one() {
                return Err(Error::InvalidArgument("torus map must be unimodular".into()));
            }
        }
        if start.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: start.dim(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactOrbit {
    pub steps: u64,
    /// Smallest `t > 0` with `f^t(x) = x`, if reached within the budget.
    pub period: Option<u64>,
    /// Steps before the cycle; always 0 for invertible maps.
    pub preperiod: u64,
    /// `x, f(x), …` up to the first repeat or the step budget.
    pub points: Vec<Vec<BigRational>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FloatSummary {
    pub steps: u64,
    pub end: Vec<f64>,
    pub in_unit_cube: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Orbit {
    Exact(ExactOrbit),
    Float(FloatSummary),
}

/// Integer numerators over a common denominator `q`.
struct Grid {
    q: BigInt,
    u: Vec<BigInt>,
}

impl Grid {
    fn new(coords: &[BigRational], extra: &[BigRational]) -> Self {
        let q = coords
            .iter()
            .chain(extra)
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let u = coords
            .iter()
            .map(|c| (frac(c) * BigRational::from_integer(q.clone())).to_integer())
            .collect();
        Self { q, u }
    }

    fn scaled(&self, a: &[BigRational]) -> Vec<BigInt> {
        a.iter()
            .map(|c| (frac(c) * BigRational::from_integer(self.q.clone())).to_integer())
            .collect()
    }

    fn point(&self) -> Vec<BigRational> {
        self.u
            .iter()
            .map(|n| BigRational::new(n.clone(), self.q.clone()))
            .collect()
    }
}

/// Iterates `map` from `start` for at most `n` steps. Exact points return the
/// trajectory and period; floating points return a summary only.
pub fn iterate(map: &TorusMap, start: &TorusPoint, n: u64) -> Result<Orbit> {
    if n == 0 {
        return Err(Error::InvalidArgument("iteration count must be positive".into()));
    }
    map.check(start)?;
    match start {
        TorusPoint::Exact(c) => iterate_exact(map, c, n).map(Orbit::Exact),
        TorusPoint::Float(_) => {
            let mut stepper = FixedStepper::new(map)?;
            let mut y = start.to_fixed()?;
            for _ in 0..n {
                stepper.step(&mut y);
            }
            let end: Vec<f64> = y.iter().map(|&v| fixed_to_f64(v)).collect();
            let in_unit_cube = end.iter().all(|x| (0.0..1.0).contains(x));
            Ok(Orbit::Float(FloatSummary {
                steps: n,
                end,
                in_unit_cube,
            }))
        }
        TorusPoint::Symbolic(_) => Err(Error::InvalidArgument(
            "exact iteration needs rational coordinates".into(),
        )),
    }
}

fn iterate_exact(map: &TorusMap, start: &[BigRational], n: u64) -> Result<ExactOrbit> {
    let shift = match map {
        TorusMap::Translation(TorusPoint::Exact(a)) => Some(a.clone()),
        TorusMap::Translation(_) => {
            return Err(Error::InvalidArgument("exact mode needs a rational translation".into()))
        }
        TorusMap::Linear(_) => None,
    };
    let mut g = Grid::new(start, shift.as_deref().unwrap_or(&[]));
    let shift = shift.map(|a| g.scaled(&a));
    let mut seen: HashMap<Vec<BigInt>, u64> = HashMap::new();
    let mut points = Vec::new();
    for t in 0..=n {
        if let Some(&s) = seen.get(&g.u) {
            return Ok(ExactOrbit {
                steps: t,
                period: Some(t - s),
                preperiod: s,
                points,
            });
        }
        seen.insert(g.u.clone(), t);
        points.push(g.point());
        if t == n {
            break;
        }
        g.u = match (map, &shift) {
            (TorusMap::Linear(m), _) => (0..m.rows())
                .map(|i| {
                    m.row(i)
                        .iter()
                        .zip(&g.u)
                        .map(|(a, b)| a * b)
                        .sum::<BigInt>()
                        .mod_floor(&g.q)
                })
                .collect(),
            (_, Some(a)) => g.u.iter().zip(a).map(|(x, y)| (x + y).mod_floor(&g.q)).collect(),
            _ => unreachable!("checked above"),
        };
    }
    Ok(ExactOrbit {
        steps: n,
        period: None,
        preperiod: 0,
        points,
    })
}

struct FixedStepper {
    matrix: Option<Vec<Vec<u64>>>,
    shift: Option<Vec<u64>>,
}

impl FixedStepper {
    fn new(map: &TorusMap) -> Result<Self> {
        match map {
            TorusMap::Linear(m) => {
                let rows = m
                    .to_i64()
                    .ok_or_else(|| Error::InvalidArgument("matrix entries exceed 64 bits".into()))?;
                Ok(Self {
                    matrix: Some(
                        rows.into_iter()
                            .map(|r| r.into_iter().map(|v| v as u64).collect())
                            .collect(),
                    ),
                    shift: None,
                })
            }
            TorusMap::Translation(a) => Ok(Self {
                matrix: None,
                shift: Some(a.to_fixed()?),
            }),
        }
    }

    fn step(&mut self, y: &mut [u64]) {
        if let Some(m) = &self.matrix {
            let next: Vec<u64> = m
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(y.iter())
                        .fold(0u64, |acc, (&a, &b)| acc.wrapping_add(a.wrapping_mul(b)))
                })
                .collect();
            y.copy_from_slice(&next);
        }
        if let Some(a) = &self.shift {
            for (x, d) in y.iter_mut().zip(a) {
                *x = x.wrapping_add(*d);
            }
        }
    }
}

/// Visit counts of an orbit on the `k^d` cells of a uniform partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitStats {
    pub iterations: u64,
    pub partition: u32,
    pub cells: u64,
    pub hits: u64,
    /// `hits / cells`.
    pub hit_fraction: BigRational,
    /// `max_c |count_c / N - 1 / cells|`.
    pub discrepancy: BigRational,
    /// Known only for exact orbits.
    pub period: Option<u64>,
    pub seed: u64,
    /// Fixed-point start, coordinate `y` standing for `y / 2^64`.
    pub start: Vec<u64>,
    pub counts: Vec<u64>,
}

impl OrbitStats {
    pub fn hit_fraction_f64(&self) -> f64 {
        self.hit_fraction.to_f64().unwrap_or(f64::NAN)
    }

    pub fn discrepancy_f64(&self) -> f64 {
        self.discrepancy.to_f64().unwrap_or(f64::NAN)
    }

    /// One line per cell: `cell,i_1,…,i_d,count`, first axis fastest.
    pub fn to_csv(&self) -> String {
        let d = self.start.len();
        let k = self.partition as u64;
        let mut out = String::from("cell");
        for i in 1..=d {
            let _ = write!(out, ",i{i}");
        }
        out.push_str(",count\n");
        for (c, count) in self.counts.iter().enumerate() {
            let _ = write!(out, "{c}");
            let mut rest = c as u64;
            for _ in 0..d {
                let _ = write!(out, ",{}", rest % k);
                rest /= k;
            }
            let _ = writeln!(out, ",{count}");
        }
        out
    }
}

/// Seeded random start on the fixed-point grid.
pub fn random_start(dim: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| rng.random::<u64>()).collect()
}

/// Runs `n` points of the orbit (`x, f(x), …, f^{n-1}(x)`) through a
/// `k`-per-axis partition. A missing start is drawn from `seed`.
pub fn equidistribution(map: &TorusMap, start: Option<&TorusPoint>, n: u64, k: u32, seed: u64) -> Result<OrbitStats> {
    let d = map.dim();
    if k == 0 {
        return Err(Error::InvalidArgument(
            "partition needs at least one cell per axis".into(),
        ));
    }
    let cells = (k as u64)
        .checked_pow(d as u32)
        .filter(|&c| c <= MAX_CELLS)
        .ok_or_else(|| Error::InvalidArgument(format!("{k}^{d} cells exceed the limit of {MAX_CELLS}")))?;
    if n < cells {
        return Err(Error::PartitionTooFine {
            cells,
            required: cells,
            got: n,
        });
    }
    let mut y = match start {
        Some(p) => {
            map.check(p)?;
            p.to_fixed()?
        }
        None => random_start(d, seed),
    };
    let start_fixed = y.clone();
    let mut stepper = FixedStepper::new(map)?;
    let mut counts = vec![0u64; cells as usize];
    for _ in 0..n {
        let mut idx = 0u64;
        for &v in y.iter().rev() {
            idx = idx * k as u64 + ((v as u128 * k as u128) >> 64) as u64;
        }
        counts[idx as usize] += 1;
        stepper.step(&mut y);
    }
    let hits = counts.iter().filter(|&&c| c > 0).count() as u64;
    let big = |v: u64| BigInt::from(v);
    let worst = counts
        .iter()
        .map(|&c| (big(c) * big(cells) - big(n)).abs())
        .max()
        .unwrap_or_default();
    Ok(OrbitStats {
        iterations: n,
        partition: k,
        cells,
        hits,
        hit_fraction: BigRational::new(big(hits), big(cells)),
        discrepancy: BigRational::new(worst, big(n) * big(cells)),
        period: None,
        seed,
        start: start_fixed,
        counts,
    })
}

/// Whether `period` divides the order of `M` modulo `q`.
pub fn period_divides_order(m: &IntMatrix, q: u64, period: u64, limit: u64) -> Option<bool> {
    m.order_mod(q, limit).map(|ord| ord % period == 0)
}

/// All points of `(1/q)ℤ^d / ℤ^d` except the origin, in lexicographic order.
pub fn grid_points(dim: usize, q: u64) -> impl Iterator<Item = Vec<BigRational>> {
    let total = q.pow(dim as u32);
    (1..total).map(move |mut idx| {
        let mut c = vec![BigRational::zero(); dim];
        for slot in c.iter_mut().rev() {
            *slot = BigRational::new(BigInt::from(idx % q), BigInt::from(q));
            idx /= q;
        }
        c
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::{int, rat};
    use crate::numberfield::{make_field, IntPolynomial};
    use proptest::prelude::*;

    fn fib4() -> IntMatrix {
        let b = IntMatrix::from_rows(&[vec![0, 1], vec![1, 1]]);
        IntMatrix::block_diag(&[&b, &b])
    }

    #[test]
    fn torsion_orders() {
        let p = TorusPoint::exact(vec![rat(1, 2), rat(1, 3), int(0), int(0)]);
        assert_eq!(torsion_order(&p).unwrap(), Torsion::Order(BigInt::from(6)));
        let z = TorusPoint::exact(vec![int(0); 4]);
        assert_eq!(torsion_order(&z).unwrap(), Torsion::Order(BigInt::one()));
        let neg = TorusPoint::exact(vec![rat(-1, 4), rat(7, 2)]);
        assert_eq!(torsion_order(&neg).unwrap(), Torsion::Order(BigInt::from(4)));
        assert!(torsion_order(&TorusPoint::float(vec![0.5]).unwrap()).is_err());
        let k = make_field(IntPolynomial::parse("x^2-x-1").unwrap(), 64).unwrap();
        let t = FieldElement::theta(&k);
        let sym = TorusPoint::Symbolic(vec![t, FieldElement::zero(&k)]);
        assert_eq!(torsion_order(&sym).unwrap(), Torsion::NonTorsion);
        let sym = TorusPoint::Symbolic(vec![FieldElement::rational(&k, rat(2, 5))]);
        assert_eq!(torsion_order(&sym).unwrap(), Torsion::Order(BigInt::from(5)));
    }

    #[test]
    fn exact_periods() {
        let m = TorusMap::Linear(fib4());
        let o = iterate(&m, &TorusPoint::exact(vec![rat(1, 5), int(0), int(0), int(0)]), 1000).unwrap();
        let Orbit::Exact(o) = o else { panic!() };
        let p = o.period.unwrap();
        assert_eq!(o.preperiod, 0);
        assert!(p <= 624);
        assert_eq!(period_divides_order(&fib4(), 5, p, 10_000), Some(true));

        let quarter = TorusMap::Translation(TorusPoint::exact(vec![rat(1, 4), int(0), int(0), int(0)]));
        let Orbit::Exact(o) = iterate(&quarter, &TorusPoint::exact(vec![int(0); 4]), 100).unwrap() else {
            panic!()
        };
        assert_eq!(o.period, Some(4));

        let id = TorusMap::Linear(IntMatrix::identity(4));
        let Orbit::Exact(o) = iterate(&id, &TorusPoint::exact(vec![rat(1, 3); 4]), 10).unwrap() else {
            panic!()
        };
        assert_eq!(o.period, Some(1));
    }

    #[test]
    fn budget_and_errors() {
        let m = TorusMap::Linear(fib4());
        let start = TorusPoint::exact(vec![rat(1, 7), int(0), int(0), int(0)]);
        let Orbit::Exact(o) = iterate(&m, &start, 3).unwrap() else {
            panic!()
        };
        assert_eq!(o.period, None);
        assert_eq!(o.points.len(), 4);
        assert!(iterate(&m, &start, 0).is_err());
        assert!(matches!(
            iterate(&m, &TorusPoint::exact(vec![int(0); 2]), 5),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn backward_orbit() {
        let m = TorusMap::Linear(fib4());
        let inv = m.inverse().unwrap();
        let x = vec![rat(2, 7), rat(3, 7), int(0), rat(1, 7)];
        let Orbit::Exact(fwd) = iterate(&m, &TorusPoint::exact(x.clone()), 1).unwrap() else {
            panic!()
        };
        let Orbit::Exact(back) = iterate(&inv, &TorusPoint::exact(fwd.points[1].clone()), 1).unwrap() else {
            panic!()
        };
        assert_eq!(back.points[1], x);
    }

    #[test]
    fn float_mode_stays_in_cube() {
        let m = TorusMap::Linear(fib4());
        let Orbit::Float(s) = iterate(&m, &TorusPoint::float(vec![0.1, 0.2, 0.3, 0.4]).unwrap(), 10_000).unwrap()
        else {
            panic!()
        };
        assert!(s.in_unit_cube);
    }

    #[test]
    fn fixed_point_matches_exact_on_dyadics() {
        // Dyadic points are exact in fixed point, so both modes agree.
        let m = TorusMap::Linear(fib4());
        let x = vec![rat(1, 8), rat(3, 16), rat(5, 32), int(0)];
        let Orbit::Exact(e) = iterate(&m, &TorusPoint::exact(x.clone()), 20).unwrap() else {
            panic!()
        };
        let mut stepper = FixedStepper::new(&m).unwrap();
        let mut y: Vec<u64> = x.iter().map(rational_to_fixed).collect();
        for p in e.points.iter().skip(1) {
            stepper.step(&mut y);
            let want: Vec<u64> = p.iter().map(rational_to_fixed).collect();
            assert_eq!(y, want);
        }
    }

    #[test]
    fn partition_guard() {
        let m = TorusMap::Linear(fib4());
        let err = equidistribution(&m, None, 600, 5, 1).unwrap_err();
        assert_eq!(
            err,
            Error::PartitionTooFine {
                cells: 625,
                required: 625,
                got: 600
            }
        );
    }

    #[test]
    fn rational_translation_hits_few_cells() {
        let a = TorusMap::Translation(TorusPoint::exact(vec![rat(1, 4), rat(1, 2), int(0), int(0)]));
        let s = equidistribution(&a, Some(&TorusPoint::exact(vec![int(0); 4])), 1000, 4, 0).unwrap();
        assert!(s.hits <= 4);
        assert!(s.hit_fraction <= rat(4, 256));
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let m = TorusMap::Linear(fib4());
        let a = equidistribution(&m, None, 5000, 3, 42).unwrap();
        let b = equidistribution(&m, None, 5000, 3, 42).unwrap();
        assert_eq!(a, b);
        let c = equidistribution(&m, None, 5000, 3, 43).unwrap();
        assert_ne!(a.start, c.start);
        assert_eq!(a.counts.iter().sum::<u64>(), 5000);
        assert!(a.to_csv().lines().count() == 82);
    }

    #[test]
    fn grid_enumeration() {
        let pts: Vec<_> = grid_points(2, 3).collect();
        assert_eq!(pts.len(), 8);
        assert_eq!(pts[0], vec![int(0), rat(1, 3)]);
    }

    proptest! {
        #[test]
        fn exact_orbits_are_purely_periodic(a in 0i64..5, b in 0i64..5, c in 0i64..5, d in 0i64..5) {
            let x = vec![rat(a, 5), rat(b, 5), rat(c, 5), rat(d, 5)];
            let Orbit::Exact(o) = iterate(&TorusMap::Linear(fib4()), &TorusPoint::exact(x), 1000).unwrap() else {
                panic!()
            };
            prop_assert_eq!(o.preperiod, 0);
            let p = o.period.unwrap();
            prop_assert_eq!(period_divides_order(&fib4(), 5, p, 10_000), Some(true));
        }
    }
}
