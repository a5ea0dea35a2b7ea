//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.

use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use pisotcm::certificate::{certify, verify, DynamicsConfig, PipelineConfig};
use pisotcm::cmtorus::{
    all_cm_types, delta_from_ints, make_cm_field, multiplication_matrix, period_matrix, simplicity_check,
    verify_descent, CMField, CMType, CMTypeMode, Simplicity,
};
use pisotcm::dynamics::{
    equidistribution, grid_points, iterate, period_divides_order, torsion_order, Orbit, Torsion, TorusMap, TorusPoint,
};
use pisotcm::entropy::{
    check_entropy_bound, exterior_spectral_radii, h1_eigenvalues, max_interval, reports_agree, topological_entropy,
    EntropyReport,
};
use pisotcm::interval::{int, rat, Interval};
use pisotcm::numberfield::{make_field, FieldElement, IntPolynomial, NumberField};
use pisotcm::pisot::{find_pisot_unit, is_pisot_unit};
use pisotcm::{BigInt, BigRational};
use serde_json::Value;

const BITS: u64 = 128;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn field(poly: &str) -> Arc<NumberField> {
    make_field(IntPolynomial::parse(poly).unwrap(), BITS).unwrap()
}

fn cm(poly: &str, delta: &[i64]) -> CMField {
    let k = field(poly);
    make_cm_field(&k, &delta_from_ints(&k, delta).unwrap()).unwrap()
}

fn ten_pow_neg(k: u32) -> BigRational {
    rat(1, 10).pow(k as i32)
}

fn entropy_report(e: &CMField, alpha: &FieldElement, ty: &CMType) -> Result<EntropyReport, String> {
    let s = h1_eigenvalues(e, ty, alpha, BITS).map_err(|x| x.to_string())?;
    topological_entropy(&s.values, BITS).map_err(|x| x.to_string())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_pisotcm"))
        .args(["--json", "find-pisot", "--poly", "x^2-x-1", "--height", "2"])
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(out.status.success(), "find-pisot failed")?;
    let v: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let first = &v["results"][0];
    ensure(
        first["alpha"] == serde_json::json!(["0", "1"]),
        format!("first result {}", first["alpha"]),
    )?;
    ensure(first["norm"] == -1, "norm")?;
    ensure(
        first["sturm_evidence"]["above_one"] == 1 && first["sturm_evidence"]["inside_unit"] == 1,
        "sturm evidence",
    )?;
    let k = field("x^2-x-1");
    let cert = is_pisot_unit(&FieldElement::theta(&k), BITS).map_err(|e| e.to_string())?;
    let emb = cert.conjugates.iter().map(|z| z.re.mid_f64()).collect::<Vec<_>>();
    ensure(
        (emb[0] + 0.618_033_988_7).abs() < 1e-10 && (emb[1] - 1.618_033_988_7).abs() < 1e-10,
        format!("{emb:?}"),
    )?;
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("α = θ, norm -1, Sturm (1, 1), {elapsed:.2?}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let e = cm("x^2-x-1", &[-2, -1]);
    let theta = FieldElement::theta(e.base());
    let aut = multiplication_matrix(&e, &theta).map_err(|x| x.to_string())?;
    let block = [[0, 1], [1, 1]];
    for l in 0..4 {
        for k in 0..4 {
            let want = if l / 2 == k / 2 { block[l % 2][k % 2] } else { 0 };
            ensure(aut.matrix.get(l, k) == &BigInt::from(want), format!("M[{l}][{k}]"))?;
        }
    }
    ensure(aut.det() == BigInt::from(1), "det M")?;
    let minpoly = IntPolynomial::parse("x^2-x-1").unwrap();
    ensure(aut.matrix.charpoly() == minpoly.mul(&minpoly), "char(M)")?;
    let ty = CMType::canonical(2);
    let torus = period_matrix(&e, &ty, BITS).map_err(|x| x.to_string())?;
    let residual = verify_descent(&torus, &aut).map_err(|x| x.to_string())?;
    ensure(residual < ten_pow_neg(25), "descent residual")?;
    let rep = entropy_report(&e, &theta, &ty)?;
    let cert = is_pisot_unit(&theta, BITS).map_err(|x| x.to_string())?;
    let bound = check_entropy_bound(&rep, &cert).map_err(|x| x.to_string())?;
    ensure(bound.equality, "h_top does not enclose 2·log φ")?;
    ensure(rep.h_top.width() < ten_pow_neg(20), "h_top width")?;
    ensure((rep.h_top.mid_f64() - 0.962_423_650_119).abs() < 1e-12, "h_top value")?;
    let simple = simplicity_check(&e, &ty, 10).map_err(|x| x.to_string())?;
    ensure(
        matches!(
            simple,
            Simplicity::Simple {
                height_bounded: Some(10),
                ..
            }
        ),
        format!("{simple:?}"),
    )?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!(
        "residual {:.1e}, h_top {:.12}, simple (H = 10), {elapsed:.2?}",
        Interval::point(residual).mid_f64(),
        rep.h_top.mid_f64()
    ))
}

fn is_rational_square(q: &BigRational) -> bool {
    let sq = |n: &BigInt| n.sqrt().pow(2) == *n;
    q >= &int(0) && sq(q.numer()) && sq(q.denom())
}

fn criterion_3() -> Outcome {
    let e = cm("x^2-2", &[-1]);
    match simplicity_check(&e, &CMType::canonical(2), 1).map_err(|x| x.to_string())? {
        Simplicity::NotSimple(w) => {
            ensure(w.height() <= BigInt::from(1), "witness height")?;
            ensure(
                is_rational_square(&-w.square.clone()) && w.square < int(0),
                "witness does not generate ℚ(i)",
            )?;
            ensure(w.restricts_identically, "embeddings restrict differently")?;
            Ok(format!(
                "witness {:?} with square {}",
                w.coords.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                w.square
            ))
        }
        other => Err(format!("{other:?}")),
    }
}

const SUITE: [&str; 9] = [
    "x^2-x-1",
    "x^2-2",
    "x^2-3",
    "x^2-5",
    "x^2-6",
    "x^2-7",
    "x^3-3x+1",
    "x^3-x^2-2x+1",
    "x^4-4x^2+2",
];

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut units = 0;
    let mut invariance_checked = 0;
    for poly in SUITE {
        let e = cm(poly, &[-1]);
        let m = e.degree();
        let (height, per_field) = if m == 2 { (8, 4) } else { (2, 3) };
        let found = find_pisot_unit(e.base(), height, None, BITS).map_err(|x| format!("{poly}: {x}"))?;
        for cert in found.iter().take(per_field) {
            let alpha = &cert.alpha;
            let types = if m <= 3 {
                all_cm_types(m, CMTypeMode::All)
            } else {
                vec![CMType::canonical(m)]
            };
            let base = entropy_report(&e, alpha, &types[0])?;
            let bound = check_entropy_bound(&base, cert).map_err(|x| x.to_string())?;
            ensure(
                bound.equality,
                format!("{poly} α = {:?}: h_top ≠ 2·log α", alpha.coords()),
            )?;
            ensure(
                base.r[0].contains(&int(1)) && base.r[m].contains(&int(1)),
                format!("{poly}: r_0 or r_m ≠ 1"),
            )?;
            for ty in &types[1..] {
                let other = entropy_report(&e, alpha, ty)?;
                ensure(reports_agree(&base, &other), format!("{poly}: report differs for {ty}"))?;
            }
            if m <= 3 {
                invariance_checked += 1;
            }
            units += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(units >= 20, format!("only {units} Pisot units"))?;
    within(elapsed, Duration::from_secs(60))?;
    Ok(format!(
        "{units} units, {invariance_checked} checked over all CM types, {elapsed:.2?}"
    ))
}

fn criterion_5() -> Outcome {
    let mut notes = Vec::new();
    let fixtures: [(&str, &[i64], [i64; 2]); 2] = [("x^2-x-1", &[-2, -1], [0, 1]), ("x^2-2", &[-1], [1, 1])];
    for (poly, delta, alpha) in fixtures {
        let e = cm(poly, delta);
        let a = FieldElement::from_ints(e.base(), &alpha).unwrap();
        let aut = multiplication_matrix(&e, &a).map_err(|x| x.to_string())?;
        let ext = max_interval(&exterior_spectral_radii(&aut.matrix, BITS).map_err(|x| x.to_string())?);
        let rep = entropy_report(&e, &a, &CMType::canonical(e.degree()))?;
        let sub = max_interval(&rep.r);
        ensure(
            ext.overlaps(&sub),
            format!("{poly}: {} vs {}", ext.mid_f64(), sub.mid_f64()),
        )?;
        let tol = ext.width().max(sub.width()).max(ten_pow_neg(20));
        ensure(
            ext.hull(&sub).width() <= tol * int(2),
            format!("{poly}: enclosures too far apart"),
        )?;
        notes.push(format!("{poly}: {:.15}", sub.mid_f64()));
    }
    Ok(notes.join(", "))
}

fn criterion_6() -> Outcome {
    let e = cm("x^2-x-1", &[-2, -1]);
    let aut = multiplication_matrix(&e, &FieldElement::theta(e.base())).map_err(|x| x.to_string())?;
    let map = TorusMap::from(&aut);
    let order = aut.matrix.order_mod(5, 100_000).ok_or("order of M mod 5 not found")?;
    let mut periods = std::collections::BTreeSet::new();
    for p in grid_points(4, 5) {
        let orbit = iterate(&map, &TorusPoint::exact(p.clone()), 10_000).map_err(|x| x.to_string())?;
        let Orbit::Exact(o) = orbit else {
            return Err("float orbit".into());
        };
        let period = o.period.ok_or_else(|| format!("{p:?} not periodic"))?;
        ensure(o.preperiod == 0, "preperiod")?;
        ensure(
            period_divides_order(&aut.matrix, 5, period, 100_000) == Some(true),
            format!("{period} ∤ {order}"),
        )?;
        periods.insert(period);
    }
    let t = torsion_order(&TorusPoint::exact(vec![rat(1, 2), rat(1, 3), int(0), int(0)])).map_err(|x| x.to_string())?;
    ensure(t == Torsion::Order(BigInt::from(6)), format!("{t:?}"))?;
    Ok(format!(
        "624 points, periods {periods:?} dividing ord(M mod 5) = {order}, torsion 6"
    ))
}

const HIT_THRESHOLD: f64 = 0.99;

fn criterion_7() -> Outcome {
    let e = cm("x^2-x-1", &[-2, -1]);
    let aut = multiplication_matrix(&e, &FieldElement::theta(e.base())).map_err(|x| x.to_string())?;
    let map = TorusMap::from(&aut);
    let mut log = Vec::new();
    for seed in [1u64, 2, 3] {
        let start = Instant::now();
        let stats = equidistribution(&map, None, 200_000, 5, seed).map_err(|x| x.to_string())?;
        let elapsed = start.elapsed();
        within(elapsed, Duration::from_secs(10))?;
        ensure(
            stats.hit_fraction_f64() >= HIT_THRESHOLD,
            format!("seed {seed}: hit fraction {}", stats.hit_fraction_f64()),
        )?;
        log.push(format!(
            "seed {seed}: {}/{} cells, D = {:.2e}, {elapsed:.2?}",
            stats.hits,
            stats.cells,
            stats.discrepancy_f64()
        ));
    }
    Ok(log.join("; "))
}

fn corrupt(text: &str, edit: impl Fn(&mut Value)) -> String {
    let mut v: Value = serde_json::from_str(text).unwrap();
    edit(&mut v);
    serde_json::to_string_pretty(&v).unwrap()
}

fn verify_exit_code(text: &str) -> Result<Option<i32>, String> {
    let dir = std::env::temp_dir().join(format!("pisotcm-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let path = dir.join("cert.json");
    std::fs::write(&path, text).map_err(|e| e.to_string())?;
    let out = Command::new(env!("CARGO_BIN_EXE_pisotcm"))
        .arg("verify")
        .arg(&path)
        .output()
        .map_err(|e| e.to_string())?;
    let _ = std::fs::remove_dir_all(&dir);
    Ok(out.status.code())
}

fn criterion_8() -> Outcome {
    let fixtures: [(&str, &[i64]); 3] = [("x^2-x-1", &[-2, -1]), ("x^2-2", &[-1]), ("x^3-3x+1", &[-2, 1])];
    for (poly, delta) in fixtures {
        let mut cfg = PipelineConfig::new(poly, delta);
        cfg.dynamics = Some(DynamicsConfig {
            iterations: 20_000,
            partition: 3,
            seed: 7,
        });
        let text = certify(&cfg).map_err(|x| format!("{poly}: {x}"))?.to_json();
        ensure(verify(&text).ok, format!("{poly}: round-trip failed"))?;
        ensure(verify_exit_code(&text)? == Some(0), format!("{poly}: verify exit code"))?;
        let bad_m = corrupt(&text, |v| {
            let cell = &mut v["automorphism"]["matrix"][0][1];
            let n: i64 = cell.as_str().unwrap().parse().unwrap();
            *cell = Value::String((n + 1).to_string());
        });
        ensure(
            verify_exit_code(&bad_m)? == Some(1),
            format!("{poly}: corrupted M accepted"),
        )?;
        let bad_poly = corrupt(&text, |v| {
            let s = v["pisot"]["minimal_poly"].as_str().unwrap().to_string();
            let last = s.rfind(|c: char| c.is_ascii_digit()).unwrap();
            let d = s.as_bytes()[last] - b'0';
            let mut t = s.clone();
            t.replace_range(last..=last, &((d + 1) % 10).to_string());
            v["pisot"]["minimal_poly"] = Value::String(t);
        });
        ensure(
            verify_exit_code(&bad_poly)? == Some(1),
            format!("{poly}: corrupted minimal polynomial accepted"),
        )?;
    }
    Ok("3 fixtures round-trip; corrupted M and minimal polynomial exit 1".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("golden-ratio Pisot search", criterion_1),
        ("zeta5 end-to-end", criterion_2),
        ("non-simple detection", criterion_3),
        ("entropy property suite", criterion_4),
        ("exterior-power oracle", criterion_5),
        ("exact dynamics", criterion_6),
        ("equidistribution", criterion_7),
        ("certificate integrity", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
