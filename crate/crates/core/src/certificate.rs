//! End-to-end pipeline and its JSON certificate.
//!
//! Exact data (integers, rationals, polynomials, matrices) are written as
//! decimal strings; every approximate quantity is a `{center, radius}` ball.
//! [`verify`] re-derives the descent identity and the Pisot minimal
//! polynomial from the certificate's own data, then regenerates the whole
//! certificate from its config echo and compares field by field.

use std::time::{SystemTime, UNIX_EPOCH};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cmtorus::{
    descent_residual, descent_tolerance, enumerate_cm_types, make_cm_field, multiplication_matrix, period_matrix,
    simplicity_check, CMField, CMType, CMTypeMode, Simplicity,
};
use crate::dynamics::{equidistribution, fixed_to_rational, OrbitStats, TorusMap};
use crate::entropy::{
    check_entropy_bound, exterior_spectral_radii, h1_eigenvalues, max_interval, no_finite_order_up_to, reports_agree,
    topological_entropy, EntropyReport,
};
use crate::error::{Error, Result};
use crate::interval::{format_radius, parse_rational, rational_string, Ball, ComplexBall, ComplexInterval, Interval};
use crate::linalg::IntMatrix;
use crate::numberfield::{make_field, FieldElement, IntPolynomial, Irreducibility, NumberField};
use crate::pisot::{find_pisot_unit, is_pisot_unit, PisotCertificate};

pub const SCHEMA: u32 = 1;

pub const ORDER_CAVEAT: &str = "The lattice is the order Z[theta][sqrt(delta)], which can be a proper \
suborder of the maximal order O_E; the torus built here is isogenous to the one built from O_E.";

/// Top-level keys left out of the comparison in [`verify`].
pub const UNVERIFIED_KEYS: [&str; 1] = ["generated_unix"];

/// Largest `m` for which the exterior-power oracle runs inside `certify`.
pub const ORACLE_MAX_DEGREE: usize = 3;

/// `M^k ≠ I` is checked directly for `k` up to this bound.
pub const ORDER_CHECK_LIMIT: u32 = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CmTypeChoice {
    Canonical,
    All,
    Index(usize),
}

impl std::str::FromStr for CmTypeChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "canonical" => Ok(CmTypeChoice::Canonical),
            "all" => Ok(CmTypeChoice::All),
            other => other.parse().map(CmTypeChoice::Index).map_err(|_| {
                Error::InvalidArgument(format!("CM type must be canonical, all or an index, got {other:?}"))
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    pub iterations: u64,
    pub partition: u32,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub field_poly: String,
    /// Power-basis coordinates of `δ`, ascending, as decimal integers.
    pub delta: Vec<String>,
    pub height: i64,
    pub precision_bits: u64,
    pub cm_type: CmTypeChoice,
    pub dynamics: Option<DynamicsConfig>,
}

impl PipelineConfig {
    pub fn new(field_poly: &str, delta: &[i64]) -> Self {
        Self {
            field_poly: field_poly.to_string(),
            delta: delta.iter().map(|d| d.to_string()).collect(),
            height: 10,
            precision_bits: 128,
            cm_type: CmTypeChoice::Canonical,
            dynamics: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.height < 1 {
            return Err(Error::InvalidArgument(format!(
                "height must be at least 1, got {}",
                self.height
            )));
        }
        if self.precision_bits < 64 {
            return Err(Error::InvalidArgument(format!(
                "precision must be at least 64 bits, got {}",
                self.precision_bits
            )));
        }
        Ok(())
    }
}

/// Decimal digits printed for a precision in bits.
pub fn digits_for(bits: u64) -> usize {
    (bits as usize * 3) / 10
}

fn balls(v: &[Interval], digits: usize) -> Vec<Ball> {
    v.iter().map(|x| x.to_ball(digits)).collect()
}

fn cballs(v: &[ComplexInterval], digits: usize) -> Vec<ComplexBall> {
    v.iter().map(|x| x.to_ball(digits)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldReport {
    pub polynomial: String,
    pub degree: usize,
    pub signature: [usize; 2],
    pub irreducibility: Irreducibility,
    pub roots: Vec<ComplexBall>,
}

pub fn field_report(k: &NumberField, digits: usize) -> FieldReport {
    let (r1, r2) = k.signature();
    FieldReport {
        polynomial: k.poly().to_string(),
        degree: k.degree(),
        signature: [r1, r2],
        irreducibility: k.irreducibility().clone(),
        roots: cballs(k.roots(), digits),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactInterval {
    pub lo: String,
    pub hi: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SturmEvidenceReport {
    pub above_one: usize,
    pub inside_unit: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PisotReport {
    /// Power-basis coordinates.
    pub alpha: Vec<String>,
    pub alpha_text: String,
    pub minimal_poly: String,
    pub norm: i32,
    /// Exact isolating interval `(lo, hi]` of the root above 1.
    pub dominant_root: ExactInterval,
    pub dominant_ball: Ball,
    pub dominant_embedding: usize,
    pub sturm_evidence: SturmEvidenceReport,
    pub conjugates: Vec<ComplexBall>,
}

pub fn pisot_report(c: &PisotCertificate, digits: usize) -> PisotReport {
    PisotReport {
        alpha: c.alpha.coords().iter().map(rational_string).collect(),
        alpha_text: c.alpha.to_string(),
        minimal_poly: c.minimal_poly.to_string(),
        norm: c.norm,
        dominant_root: ExactInterval {
            lo: rational_string(&c.dominant_root.0),
            hi: rational_string(&c.dominant_root.1),
        },
        dominant_ball: c.dominant_interval().to_ball(digits),
        dominant_embedding: c.dominant_embedding,
        sturm_evidence: SturmEvidenceReport {
            above_one: c.sturm_evidence.above_one,
            inside_unit: c.sturm_evidence.inside_unit,
        },
        conjugates: cballs(&c.conjugates, digits),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CmFieldReport {
    pub delta: Vec<String>,
    pub delta_text: String,
    pub delta_embeddings: Vec<Ball>,
    pub order_basis: Vec<String>,
}

pub fn cm_field_report(e: &CMField, digits: usize) -> CmFieldReport {
    CmFieldReport {
        delta: e.delta().coords().iter().map(rational_string).collect(),
        delta_text: e.delta().to_string(),
        delta_embeddings: balls(e.delta_embeddings(), digits),
        order_basis: e.order_basis(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutomorphismReport {
    /// Column `k` holds the coordinates of `α·b_k`.
    pub matrix: IntMatrix,
    pub det: String,
    pub charpoly: String,
    pub charpoly_is_minpoly_squared: bool,
    pub inverse_integral: bool,
    pub no_finite_order_up_to: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CmTypeReport {
    pub ordering: Vec<usize>,
    pub signs: Vec<i8>,
}

impl From<&CMType> for CmTypeReport {
    fn from(t: &CMType) -> Self {
        Self {
            ordering: t.ordering.clone(),
            signs: t.signs.clone(),
        }
    }
}

impl From<&CmTypeReport> for CMType {
    fn from(t: &CmTypeReport) -> Self {
        CMType {
            ordering: t.ordering.clone(),
            signs: t.signs.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub coords: Vec<String>,
    pub square: String,
    pub restriction_signs: Vec<i8>,
    pub restricts_identically: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplicityReport {
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub height_bounded: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<WitnessReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub searched_height: Option<i64>,
}

pub fn simplicity_report(s: &Simplicity) -> SimplicityReport {
    let mut r = SimplicityReport {
        verdict: s.label().to_string(),
        reason: None,
        height_bounded: None,
        witness: None,
        searched_height: None,
    };
    match s {
        Simplicity::Simple { reason, height_bounded } => {
            r.reason = Some(reason.clone());
            r.height_bounded = *height_bounded;
        }
        Simplicity::NotSimple(w) => {
            r.witness = Some(WitnessReport {
                coords: w.coords.iter().map(|c| c.to_string()).collect(),
                square: rational_string(&w.square),
                restriction_signs: w.restriction_signs.clone(),
                restricts_identically: w.restricts_identically,
            });
        }
        Simplicity::Unknown { searched_height } => r.searched_height = Some(*searched_height),
    }
    r
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusReport {
    pub cm_type: CmTypeReport,
    pub period_matrix: Vec<Vec<ComplexBall>>,
    pub stacked_det: Ball,
    /// Upper bound on `max |Π·M − D·Π|`.
    pub descent_residual: String,
    pub descent_tolerance: String,
    pub simplicity: SimplicityReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyJson {
    pub lambdas: Vec<ComplexBall>,
    pub r: Vec<Ball>,
    pub h_top: Ball,
    pub dominant_p: usize,
    pub symbolic: Option<String>,
    pub two_log_alpha: Option<Ball>,
    pub bound_holds: bool,
    pub equality: bool,
    pub equality_gap: String,
    pub cm_types_checked: usize,
    pub cm_type_invariant: bool,
    pub exterior_power_max: Option<Ball>,
    pub oracle_agrees: Option<bool>,
}

pub fn entropy_json(rep: &EntropyReport, digits: usize) -> EntropyJson {
    EntropyJson {
        lambdas: cballs(&rep.lambdas, digits),
        r: balls(&rep.r, digits),
        h_top: rep.h_top.to_ball(digits),
        dominant_p: rep.dominant_p,
        symbolic: rep.symbolic.clone(),
        two_log_alpha: rep.alpha_bound.as_ref().map(|b| b.to_ball(digits)),
        bound_holds: false,
        equality: false,
        equality_gap: String::new(),
        cm_types_checked: 1,
        cm_type_invariant: true,
        exterior_power_max: None,
        oracle_agrees: None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicsReport {
    pub iterations: u64,
    pub partition: u32,
    pub cells: u64,
    pub seed: u64,
    /// Exact start point, each coordinate a dyadic rational.
    pub start: Vec<String>,
    pub hits: u64,
    pub hit_fraction: String,
    pub discrepancy: String,
}

pub fn dynamics_report(s: &OrbitStats) -> DynamicsReport {
    DynamicsReport {
        iterations: s.iterations,
        partition: s.partition,
        cells: s.cells,
        seed: s.seed,
        start: s
            .start
            .iter()
            .map(|&y| rational_string(&fixed_to_rational(y)))
            .collect(),
        hits: s.hits,
        hit_fraction: rational_string(&s.hit_fraction),
        discrepancy: rational_string(&s.discrepancy),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: u32,
    pub tool_version: String,
    pub generated_unix: u64,
    pub config: PipelineConfig,
    pub field: FieldReport,
    pub pisot: PisotReport,
    pub cm_field: CmFieldReport,
    pub automorphism: AutomorphismReport,
    pub tori: Vec<TorusReport>,
    pub entropy: EntropyJson,
    pub dynamics: Option<DynamicsReport>,
    pub order_caveat: String,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

fn parse_delta(k: &std::sync::Arc<NumberField>, delta: &[String]) -> Result<FieldElement> {
    if delta.len() > k.degree() {
        return Err(Error::DimensionMismatch {
            expected: k.degree(),
            got: delta.len(),
        });
    }
    let mut c = delta.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
    c.resize(k.degree(), BigRational::from_integer(0.into()));
    FieldElement::new(k, c)
}

/// Selected CM types for a config.
pub fn select_cm_types(e: &CMField, choice: &CmTypeChoice) -> Result<Vec<CMType>> {
    match choice {
        CmTypeChoice::Canonical => Ok(enumerate_cm_types(e, CMTypeMode::Canonical)),
        CmTypeChoice::All => Ok(enumerate_cm_types(e, CMTypeMode::All)),
        CmTypeChoice::Index(i) => {
            let all = enumerate_cm_types(e, CMTypeMode::All);
            let max = all.len() - 1;
            all.into_iter()
                .nth(*i)
                .map(|t| vec![t])
                .ok_or(Error::OutOfRange { index: *i, max })
        }
    }
}

/// Field, CM field and Pisot unit shared by `certify` and `verify`.
struct Setup {
    field: std::sync::Arc<NumberField>,
    cm: CMField,
    pisot: PisotCertificate,
}

fn setup(config: &PipelineConfig) -> Result<Setup> {
    config.validate()?;
    let bits = config.precision_bits;
    let field = make_field(IntPolynomial::parse(&config.field_poly)?, bits)?;
    let pisot = find_pisot_unit(&field, config.height, Some(1), bits)?
        .into_iter()
        .next()
        .ok_or(Error::NoPisotUnit(config.height))?;
    let cm = make_cm_field(&field, &parse_delta(&field, &config.delta)?)?;
    Ok(Setup { field, cm, pisot })
}

/// Runs the whole pipeline. Fails without output on any rejection.
pub fn certify(config: &PipelineConfig) -> Result<Certificate> {
    let Setup { field, cm, pisot } = setup(config)?;
    let bits = config.precision_bits;
    let digits = digits_for(bits);
    let alpha = &pisot.alpha;
    let lat = multiplication_matrix(&cm, alpha)?;
    let det = lat.det();
    let minpoly = &pisot.minimal_poly;
    let charpoly = lat.matrix.charpoly();
    let no_order = no_finite_order_up_to(&lat.matrix, ORDER_CHECK_LIMIT);
    let automorphism = AutomorphismReport {
        matrix: lat.matrix.clone(),
        det: det.to_string(),
        charpoly: charpoly.to_string(),
        charpoly_is_minpoly_squared: charpoly == minpoly.mul(minpoly),
        inverse_integral: lat.matrix.inverse().is_some(),
        no_finite_order_up_to: no_order.then_some(ORDER_CHECK_LIMIT),
    };

    let types = select_cm_types(&cm, &config.cm_type)?;
    let tol = descent_tolerance(bits);
    let mut tori = Vec::with_capacity(types.len());
    let mut reports: Vec<EntropyReport> = Vec::with_capacity(types.len());
    for ty in &types {
        let torus = period_matrix(&cm, ty, bits)?;
        let residual = descent_residual(&torus, &lat.matrix, &lat.diagonal_for(ty))?;
        if residual > tol {
            return Err(Error::Verification(format!(
                "descent residual {} exceeds {} for CM type {ty}",
                format_radius(&residual),
                format_radius(&tol)
            )));
        }
        let simplicity = simplicity_check(&cm, ty, config.height)?;
        tori.push(TorusReport {
            cm_type: ty.into(),
            period_matrix: torus.period_matrix.iter().map(|row| cballs(row, digits)).collect(),
            stacked_det: torus.stacked_det.to_ball(digits),
            descent_residual: format_radius(&residual),
            descent_tolerance: format_radius(&tol),
            simplicity: simplicity_report(&simplicity),
        });
        let spectrum = h1_eigenvalues(&cm, ty, alpha, bits)?;
        reports.push(topological_entropy(&spectrum.values, bits)?);
    }

    let mut rep = reports[0].clone();
    rep.attach_alpha(&pisot)?;
    let check = check_entropy_bound(&rep, &pisot)?;
    let mut entropy = entropy_json(&rep, digits);
    entropy.bound_holds = check.holds;
    entropy.equality = check.equality;
    entropy.equality_gap = format_radius(&check.gap);
    entropy.cm_types_checked = reports.len();
    entropy.cm_type_invariant = reports.iter().all(|r| reports_agree(&reports[0], r));
    if cm.degree() <= ORACLE_MAX_DEGREE {
        let radii = exterior_spectral_radii(&lat.matrix, bits)?;
        let top = max_interval(&radii);
        entropy.oracle_agrees = Some(top.overlaps(&max_interval(&rep.r)));
        entropy.exterior_power_max = Some(top.to_ball(digits));
    }

    let dynamics = match &config.dynamics {
        Some(d) => Some(dynamics_report(&equidistribution(
            &TorusMap::from(&lat),
            None,
            d.iterations,
            d.partition,
            d.seed,
        )?)),
        None => None,
    };

    Ok(Certificate {
        schema: SCHEMA,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        generated_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        config: config.clone(),
        field: field_report(&field, digits),
        pisot: pisot_report(&pisot, digits),
        cm_field: cm_field_report(&cm, digits),
        automorphism,
        tori,
        entropy,
        dynamics,
        order_caveat: ORDER_CAVEAT.to_string(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    fn push(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.ok &= passed;
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Re-checks a certificate. Never errors: every problem becomes a failed check.
pub fn verify(text: &str) -> VerifyReport {
    let mut report = VerifyReport {
        ok: true,
        checks: Vec::new(),
    };
    let value: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => {
            report.push("parse", false, e.to_string());
            return report;
        }
    };
    let cert: Certificate = match serde_json::from_value(value.clone()) {
        Ok(c) => c,
        Err(e) => {
            report.push("schema", false, e.to_string());
            return report;
        }
    };
    report.push("schema", cert.schema == SCHEMA, format!("schema {}", cert.schema));
    let s = match setup(&cert.config) {
        Ok(s) => s,
        Err(e) => {
            report.push("setup", false, e.to_string());
            return report;
        }
    };
    check_pisot(&cert, &s, &mut report);
    check_descent(&cert, &s, &mut report);
    match certify(&cert.config).map(|c| serde_json::to_value(c).expect("certificate serializes")) {
        Ok(fresh) => {
            let mut diffs = Vec::new();
            compare_values(&value, &fresh, "", &mut diffs);
            let detail = if diffs.is_empty() {
                "all fields reproduced".to_string()
            } else {
                let shown: Vec<&str> = diffs.iter().take(5).map(String::as_str).collect();
                format!("{} mismatches: {}", diffs.len(), shown.join("; "))
            };
            report.push("regenerate", diffs.is_empty(), detail);
        }
        Err(e) => report.push("regenerate", false, e.to_string()),
    }
    report
}

fn check_pisot(cert: &Certificate, s: &Setup, report: &mut VerifyReport) {
    let alpha = cert
        .pisot
        .alpha
        .iter()
        .map(|c| parse_rational(c))
        .collect::<Result<Vec<_>>>()
        .and_then(|c| FieldElement::new(&s.field, c));
    let Ok(alpha) = alpha else {
        report.push("pisot-minimal-polynomial", false, "unreadable α coordinates");
        return;
    };
    let recomputed = alpha.minimal_polynomial().to_string();
    let stated = IntPolynomial::parse(&cert.pisot.minimal_poly).map(|p| p.to_string());
    let same = stated.as_deref() == Ok(recomputed.as_str());
    report.push(
        "pisot-minimal-polynomial",
        same,
        format!("stated {}, recomputed {recomputed}", cert.pisot.minimal_poly),
    );
    let valid = is_pisot_unit(&alpha, cert.config.precision_bits);
    report.push(
        "pisot-unit",
        valid.is_ok(),
        valid
            .map(|_| "α is a Pisot unit".to_string())
            .unwrap_or_else(|r| r.to_string()),
    );
}

fn check_descent(cert: &Certificate, s: &Setup, report: &mut VerifyReport) {
    let m = &cert.automorphism.matrix;
    let unimodular = m.is_square() && m.det().abs() == BigInt::one();
    report.push("lattice-determinant", unimodular, format!("det M = {}", m.det()));
    let alpha = &s.pisot.alpha;
    let diag = match alpha.embed(cert.config.precision_bits) {
        Ok(d) => d,
        Err(e) => {
            report.push("descent-residual", false, e.to_string());
            return;
        }
    };
    let tol = descent_tolerance(cert.config.precision_bits);
    for t in &cert.tori {
        let ty: CMType = (&t.cm_type).into();
        let outcome = period_matrix(&s.cm, &ty, cert.config.precision_bits).and_then(|torus| {
            let d: Vec<ComplexInterval> = ty.ordering.iter().map(|&o| diag[o].clone()).collect();
            descent_residual(&torus, m, &d)
        });
        match outcome {
            Ok(r) => report.push(
                "descent-residual",
                r <= tol,
                format!(
                    "CM type {ty}: residual {} against tolerance {}",
                    format_radius(&r),
                    format_radius(&tol)
                ),
            ),
            Err(e) => report.push("descent-residual", false, format!("CM type {ty}: {e}")),
        }
    }
}

fn is_ball(v: &serde_json::Map<String, Value>) -> bool {
    v.len() == 2 && v.contains_key("center") && v.contains_key("radius")
}

/// Structural comparison: balls match when their enclosures overlap,
/// everything else must be identical.
pub fn compare_values(a: &Value, b: &Value, path: &str, diffs: &mut Vec<String>) {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) if is_ball(x) && is_ball(y) => {
            let ia = serde_json::from_value::<Ball>(a.clone())
                .ok()
                .and_then(|b| b.to_interval().ok());
            let ib = serde_json::from_value::<Ball>(b.clone())
                .ok()
                .and_then(|b| b.to_interval().ok());
            match (ia, ib) {
                (Some(p), Some(q)) if p.overlaps(&q) => {}
                _ => diffs.push(format!("{path}: enclosures disjoint or unreadable")),
            }
        }
        (Value::Object(x), Value::Object(y)) => {
            for (k, v) in x {
                if path.is_empty() && UNVERIFIED_KEYS.contains(&k.as_str()) {
                    continue;
                }
                match y.get(k) {
                    Some(w) => compare_values(v, w, &format!("{path}/{k}"), diffs),
                    None => diffs.push(format!("{path}/{k}: unexpected field")),
                }
            }
            for k in y.keys() {
                if !x.contains_key(k) && !(path.is_empty() && UNVERIFIED_KEYS.contains(&k.as_str())) {
                    diffs.push(format!("{path}/{k}: missing"));
                }
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                diffs.push(format!("{path}: length {} vs {}", x.len(), y.len()));
                return;
            }
            for (i, (v, w)) in x.iter().zip(y).enumerate() {
                compare_values(v, w, &format!("{path}/{i}"), diffs);
            }
        }
        _ if a == b => {}
        _ => diffs.push(format!("{path}: {a} vs {b}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeta5_config() -> PipelineConfig {
        PipelineConfig::new("x^2-x-1", &[-2, -1])
    }

    #[test]
    fn zeta5_certificate() {
        let c = certify(&zeta5_config()).unwrap();
        assert_eq!(c.automorphism.det, "1");
        assert_eq!(c.automorphism.charpoly, "x^4 - 2x^3 - x^2 + 2x + 1");
        assert!(c.automorphism.charpoly_is_minpoly_squared);
        assert_eq!(c.pisot.alpha, vec!["0", "1"]);
        assert_eq!(c.tori[0].simplicity.verdict, "simple");
        assert!(c.entropy.equality);
        assert_eq!(c.entropy.oracle_agrees, Some(true));
        assert!(c.entropy.h_top.center.starts_with("0.962423650119206"));
        assert_eq!(c.order_caveat, ORDER_CAVEAT);
    }

    #[test]
    fn round_trip_and_corruption() {
        let mut cfg = zeta5_config();
        cfg.dynamics = Some(DynamicsConfig {
            iterations: 2000,
            partition: 3,
            seed: 7,
        });
        let text = certify(&cfg).unwrap().to_json();
        let ok = verify(&text);
        assert!(ok.ok, "{:?}", ok.checks);

        let mut v: Value = serde_json::from_str(&text).unwrap();
        v["automorphism"]["matrix"][0][1] = Value::String("2".into());
        let bad = verify(&v.to_string());
        assert!(!bad.ok);
        assert!(bad.failures().any(|c| c.name == "descent-residual"));

        let mut v: Value = serde_json::from_str(&text).unwrap();
        v["pisot"]["minimal_poly"] = Value::String("x^2 - x - 7".into());
        let bad = verify(&v.to_string());
        assert!(bad.failures().any(|c| c.name == "pisot-minimal-polynomial"));
    }

    #[test]
    fn timestamp_is_not_verified() {
        let text = certify(&zeta5_config()).unwrap().to_json();
        let mut v: Value = serde_json::from_str(&text).unwrap();
        v["generated_unix"] = Value::from(0);
        assert!(verify(&v.to_string()).ok);
    }

    #[test]
    fn ball_comparison_uses_overlap() {
        let a = serde_json::json!({"x": {"center": "1.00", "radius": "1e-2"}});
        let b = serde_json::json!({"x": {"center": "1.01", "radius": "1e-2"}});
        let c = serde_json::json!({"x": {"center": "1.10", "radius": "1e-2"}});
        let mut d = Vec::new();
        compare_values(&a, &b, "", &mut d);
        assert!(d.is_empty());
        compare_values(&a, &c, "", &mut d);
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn rejections() {
        let mut cfg = PipelineConfig::new("x^2-2", &[0, 1]);
        assert!(matches!(
            certify(&cfg),
            Err(Error::DeltaNotTotallyNegative { index: 1, .. })
        ));
        cfg.height = 0;
        assert!(matches!(certify(&cfg), Err(Error::InvalidArgument(_))));
        let cfg = PipelineConfig::new("x^2-5", &[-1]);
        // ℚ(√5) with basis 1, √5 at height 1 holds no unit of norm ±1 that is Pisot
        let mut small = cfg.clone();
        small.height = 1;
        assert!(matches!(certify(&small), Err(Error::NoPisotUnit(1))));
        let mut idx = zeta5_config();
        idx.cm_type = CmTypeChoice::Index(8);
        assert!(matches!(certify(&idx), Err(Error::OutOfRange { index: 8, max: 7 })));
        assert_eq!("all".parse::<CmTypeChoice>().unwrap(), CmTypeChoice::All);
        assert_eq!("3".parse::<CmTypeChoice>().unwrap(), CmTypeChoice::Index(3));
        assert!("x".parse::<CmTypeChoice>().is_err());
    }
}
