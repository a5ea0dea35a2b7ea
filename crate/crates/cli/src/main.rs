use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use pisotcm::certificate::{
    self, cm_field_report, dynamics_report, entropy_json, field_report, pisot_report, select_cm_types,
    simplicity_report, CmTypeChoice, DynamicsConfig, PipelineConfig,
};
use pisotcm::cmtorus::{
    make_cm_field, multiplication_matrix, period_matrix, simplicity_check, verify_descent, CMField,
};
use pisotcm::dynamics::{equidistribution, iterate, torsion_order, Orbit, Torsion, TorusMap, TorusPoint};
use pisotcm::entropy::{check_entropy_bound, h1_eigenvalues, topological_entropy};
use pisotcm::interval::{format_radius, parse_rational, rational_string, Interval};
use pisotcm::numberfield::{make_field, FieldElement, IntPolynomial, NumberField};
use pisotcm::pisot::{find_pisot_unit, is_pisot_unit, PisotCertificate};
use pisotcm::{BigRational, Error};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "pisotcm", version)]
#[command(about = "Pisot units, CM tori and certified entropy of their automorphisms")]
struct Cli {
    /// Emit machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,

    /// Working precision in bits.
    #[arg(long, global = true, env = "PISOTCM_PRECISION", default_value_t = 128)]
    precision: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct FieldArgs {
    /// Monic defining polynomial, e.g. "x^2 - x - 1".
    #[arg(long)]
    poly: String,
}

#[derive(Args, Clone)]
struct CmArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Coordinates of delta on the power basis, ascending, e.g. "[-2,-1]".
    #[arg(long, allow_hyphen_values = true)]
    delta: String,
    /// canonical, all, or an index into the full list.
    #[arg(long, default_value = "canonical")]
    cm_type: String,
    /// Unit alpha as power-basis coordinates; searched for when absent.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Search height for alpha and for simplicity witnesses.
    #[arg(long, default_value_t = 10)]
    height: i64,
}

#[derive(Subcommand)]
enum Command {
    /// Signature, irreducibility and root enclosures of a number field.
    AnalyzeField {
        #[command(flatten)]
        field: FieldArgs,
    },
    /// Search a coordinate box for Pisot units.
    FindPisot {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 10)]
        height: i64,
        /// Keep doubling the height up to this bound while nothing is found.
        #[arg(long)]
        max_height: Option<i64>,
        #[arg(long)]
        max_results: Option<usize>,
    },
    /// Build the CM field, period matrices and lattice automorphism.
    BuildCm {
        #[command(flatten)]
        cm: CmArgs,
    },
    /// Spectral radii on every H^{p,p} and the topological entropy.
    Entropy {
        #[command(flatten)]
        cm: CmArgs,
    },
    /// Iterate the automorphism or a translation on the torus.
    Simulate {
        #[command(flatten)]
        cm: CmArgs,
        #[arg(long, default_value_t = 200_000)]
        iterations: u64,
        /// Cells per axis.
        #[arg(long, default_value_t = 5)]
        partition: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Rational start point; iterates exactly and reports the period.
        #[arg(long, allow_hyphen_values = true)]
        exact_start: Option<String>,
        /// Translate by this vector instead of applying the automorphism.
        #[arg(long, allow_hyphen_values = true)]
        translate: Option<String>,
        /// Iterate the inverse map.
        #[arg(long)]
        backward: bool,
        /// Report the torsion order of this rational point and exit.
        #[arg(long, allow_hyphen_values = true)]
        torsion: Option<String>,
        /// Write binned visit counts as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the full pipeline and write a certificate.
    Certify {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, allow_hyphen_values = true)]
        delta: String,
        #[arg(long, default_value_t = 10)]
        height: i64,
        #[arg(long, default_value = "canonical")]
        cm_type: String,
        /// Orbit length for the equidistribution summary; omitted when absent.
        #[arg(long)]
        iterations: Option<u64>,
        #[arg(long, default_value_t = 5)]
        partition: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Re-check a certificate.
    Verify { certificate: PathBuf },
}

/// Failure with its exit code: 1 for mathematical rejections, 2 for usage.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_rejection() { 1 } else { 2 },
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type CliResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            if cli.json {
                println!("{}", json!({ "error": f.message, "exit_code": f.code }));
            } else {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> CliResult {
    if cli.precision < 64 {
        return Err(usage(format!(
            "precision must be at least 64 bits, got {}",
            cli.precision
        )));
    }
    match &cli.command {
        Command::AnalyzeField { field } => analyze_field(cli, field),
        Command::FindPisot {
            field,
            height,
            max_height,
            max_results,
        } => find_pisot(cli, field, *height, *max_height, *max_results),
        Command::BuildCm { cm } => build_cm(cli, cm),
        Command::Entropy { cm } => entropy(cli, cm),
        Command::Simulate {
            cm,
            iterations,
            partition,
            seed,
            exact_start,
            translate,
            backward,
            torsion,
            csv,
        } => {
            let sim = Simulation {
                iterations: *iterations,
                partition: *partition,
                seed: *seed,
                exact_start: exact_start.as_deref(),
                translate: translate.as_deref(),
                backward: *backward,
                torsion: torsion.as_deref(),
                csv: csv.as_ref(),
            };
            simulate(cli, cm, &sim)
        }
        Command::Certify {
            field,
            delta,
            height,
            cm_type,
            iterations,
            partition,
            seed,
            output,
        } => {
            let config = PipelineConfig {
                field_poly: field.poly.clone(),
                delta: parse_list(delta)?,
                height: *height,
                precision_bits: cli.precision,
                cm_type: cm_type.parse::<CmTypeChoice>()?,
                dynamics: iterations.map(|n| DynamicsConfig {
                    iterations: n,
                    partition: *partition,
                    seed: *seed,
                }),
            };
            let cert = certificate::certify(&config)?;
            let text = cert.to_json();
            match output {
                Some(path) => {
                    fs::write(path, text + "\n").map_err(|e| usage(format!("{}: {e}", path.display())))?;
                    if !cli.json {
                        println!("certificate written to {}", path.display());
                    }
                }
                None => println!("{text}"),
            }
            Ok(0)
        }
        Command::Verify { certificate } => {
            let text = fs::read_to_string(certificate).map_err(|e| usage(format!("{}: {e}", certificate.display())))?;
            let report = certificate::verify(&text);
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            } else {
                for c in &report.checks {
                    println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
                }
                println!(
                    "{}",
                    if report.ok {
                        "certificate verified"
                    } else {
                        "certificate rejected"
                    }
                );
            }
            Ok(if report.ok { 0 } else { 1 })
        }
    }
}

/// Splits "[a, b, c]" into its entries.
fn parse_list(s: &str) -> Result<Vec<String>, Failure> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .unwrap_or(s.trim());
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    let items: Vec<String> = inner.split(',').map(|t| t.trim().replace('\u{2212}', "-")).collect();
    if items.iter().any(|t| t.is_empty()) {
        return Err(usage(format!("malformed list {s:?}")));
    }
    Ok(items)
}

fn parse_rationals(s: &str) -> Result<Vec<BigRational>, Failure> {
    parse_list(s)?
        .iter()
        .map(|t| parse_rational(t).map_err(Failure::from))
        .collect()
}

fn element(k: &Arc<NumberField>, s: &str) -> Result<FieldElement, Failure> {
    let mut c = parse_rationals(s)?;
    if c.len() > k.degree() {
        return Err(Error::DimensionMismatch {
            expected: k.degree(),
            got: c.len(),
        }
        .into());
    }
    c.resize(k.degree(), BigRational::from_integer(0.into()));
    Ok(FieldElement::new(k, c)?)
}

fn field(cli: &Cli, f: &FieldArgs) -> Result<Arc<NumberField>, Failure> {
    Ok(make_field(IntPolynomial::parse(&f.poly)?, cli.precision)?)
}

fn digits(cli: &Cli) -> usize {
    certificate::digits_for(cli.precision)
}

fn emit(cli: &Cli, value: Value, text: impl FnOnce() -> String) {
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&value).expect("value serializes"));
    } else {
        print!("{}", text());
    }
}

fn analyze_field(cli: &Cli, f: &FieldArgs) -> CliResult {
    let k = field(cli, f)?;
    let rep = field_report(&k, digits(cli));
    emit(cli, serde_json::to_value(&rep).expect("report serializes"), || {
        let mut s = format!(
            "field Q[x]/({})\ndegree {}, signature ({}, {}), {}\n",
            rep.polynomial,
            rep.degree,
            rep.signature[0],
            rep.signature[1],
            if k.is_totally_real() {
                "totally real"
            } else {
                "not totally real"
            }
        );
        s += &format!(
            "irreducibility: {}\n",
            serde_json::to_string(&rep.irreducibility).unwrap_or_default()
        );
        for (i, z) in k.roots().iter().enumerate() {
            let c = z.to_c64();
            s += &format!("  root {i}: {:.15} {:+.15}i\n", c.re, c.im);
        }
        s
    });
    Ok(0)
}

fn find_pisot(cli: &Cli, f: &FieldArgs, height: i64, max_height: Option<i64>, max_results: Option<usize>) -> CliResult {
    let k = field(cli, f)?;
    let mut h = height;
    let found = loop {
        let found = find_pisot_unit(&k, h, max_results, cli.precision)?;
        match max_height {
            Some(top) if found.is_empty() && h < top => h = (2 * h.max(1)).min(top),
            _ => break found,
        }
    };
    let d = digits(cli);
    let value = json!({
        "field": k.poly().to_string(),
        "height": h,
        "results": found.iter().map(|c| pisot_report(c, d)).collect::<Vec<_>>(),
    });
    emit(cli, value, || {
        let mut s = format!(
            "{} Pisot unit(s) in Q[x]/({}) up to height {h}\n",
            found.len(),
            k.poly()
        );
        for c in &found {
            s += &format!(
                "  alpha = {}  minpoly {}  norm {}  alpha ~ {:.12}  roots in (1,inf): {}, in (-1,1): {}\n",
                c.alpha,
                c.minimal_poly,
                c.norm,
                pisotcm::pisot::dominant_f64(c),
                c.sturm_evidence.above_one,
                c.sturm_evidence.inside_unit
            );
        }
        s
    });
    Ok(0)
}

struct CmSetup {
    cm: CMField,
    alpha: FieldElement,
    pisot: Option<PisotCertificate>,
}

fn cm_setup(cli: &Cli, a: &CmArgs) -> Result<CmSetup, Failure> {
    let k = field(cli, &a.field)?;
    let delta = element(&k, &a.delta)?;
    let cm = make_cm_field(&k, &delta)?;
    let (alpha, pisot) = match &a.alpha {
        Some(s) => {
            let alpha = element(&k, s)?;
            let cert = is_pisot_unit(&alpha, cli.precision).ok();
            (alpha, cert)
        }
        None => {
            let cert = find_pisot_unit(&k, a.height, Some(1), cli.precision)?
                .into_iter()
                .next()
                .ok_or(Error::NoPisotUnit(a.height))?;
            (cert.alpha.clone(), Some(cert))
        }
    };
    Ok(CmSetup { cm, alpha, pisot })
}

fn build_cm(cli: &Cli, a: &CmArgs) -> CliResult {
    let s = cm_setup(cli, a)?;
    let d = digits(cli);
    let lat = multiplication_matrix(&s.cm, &s.alpha)?;
    let types = select_cm_types(&s.cm, &a.cm_type.parse()?)?;
    let mut tori = Vec::new();
    let mut lines = String::new();
    for ty in &types {
        let t = period_matrix(&s.cm, ty, cli.precision)?;
        let residual = verify_descent(&t, &lat)?;
        let simple = simplicity_check(&s.cm, ty, a.height)?;
        lines += &format!(
            "CM type {ty}: descent residual <= {}, {}\n",
            format_radius(&residual),
            simple.label()
        );
        for row in &t.period_matrix {
            let cells: Vec<String> = row
                .iter()
                .map(|z| z.to_c64())
                .map(|c| format!("{:.10}{:+.10}i", c.re, c.im))
                .collect();
            lines += &format!("  [{}]\n", cells.join(", "));
        }
        tori.push(json!({
            "cm_type": certificate::CmTypeReport::from(ty),
            "period_matrix": t.period_matrix.iter().map(|r| r.iter().map(|z| z.to_ball(d)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "descent_residual": format_radius(&residual),
            "simplicity": simplicity_report(&simple),
        }));
    }
    let value = json!({
        "cm_field": cm_field_report(&s.cm, d),
        "alpha": s.alpha.to_string(),
        "matrix": lat.matrix,
        "det": lat.det().to_string(),
        "tori": tori,
    });
    emit(cli, value, || {
        let mut out = format!(
            "E = K(sqrt(delta)), K = Q[x]/({}), delta = {}\n",
            s.cm.base().poly(),
            s.cm.delta()
        );
        out += &format!("alpha = {}, det M = {}\nM =\n", s.alpha, lat.det());
        for i in 0..lat.matrix.rows() {
            let row: Vec<String> = lat.matrix.row(i).iter().map(|v| format!("{v:>3}")).collect();
            out += &format!("  {}\n", row.join(" "));
        }
        out + &lines
    });
    Ok(0)
}

fn entropy(cli: &Cli, a: &CmArgs) -> CliResult {
    let s = cm_setup(cli, a)?;
    let d = digits(cli);
    let types = select_cm_types(&s.cm, &a.cm_type.parse()?)?;
    let spectrum = h1_eigenvalues(&s.cm, &types[0], &s.alpha, cli.precision)?;
    let mut rep = topological_entropy(&spectrum.values, cli.precision)?;
    let check = match &s.pisot {
        Some(c) => {
            rep.attach_alpha(c)?;
            Some(check_entropy_bound(&rep, c)?)
        }
        None => None,
    };
    let mut j = entropy_json(&rep, d);
    if let Some(c) = &check {
        j.bound_holds = c.holds;
        j.equality = c.equality;
        j.equality_gap = format_radius(&c.gap);
    }
    emit(cli, serde_json::to_value(&j).expect("report serializes"), || {
        let mut out = String::new();
        if !spectrum.alpha_generates {
            out += "note: alpha lies in a proper subfield, eigenvalues repeat\n";
        }
        for (p, r) in rep.r.iter().enumerate() {
            out += &format!("r_{p} = {:.15}\n", r.mid_f64());
        }
        out += &format!("h_top = {} +- {}\n", j.h_top.center, j.h_top.radius);
        if let Some(sym) = &rep.symbolic {
            out += &format!("h_top = {sym}\n");
        }
        if let Some(c) = &check {
            out += &format!(
                "bound h_top >= log r_1 >= 2 log alpha: holds, equality {}\n",
                c.equality
            );
        }
        out
    });
    Ok(0)
}

struct Simulation<'a> {
    iterations: u64,
    partition: u32,
    seed: u64,
    exact_start: Option<&'a str>,
    translate: Option<&'a str>,
    backward: bool,
    torsion: Option<&'a str>,
    csv: Option<&'a PathBuf>,
}

fn simulate(cli: &Cli, a: &CmArgs, sim: &Simulation) -> CliResult {
    if let Some(p) = sim.torsion {
        let t = torsion_order(&TorusPoint::exact(parse_rationals(p)?))?;
        let order = match &t {
            Torsion::Order(n) => n.to_string(),
            Torsion::NonTorsion => "non-torsion".to_string(),
        };
        emit(cli, json!({ "torsion_order": order }), || {
            format!("torsion order {order}\n")
        });
        return Ok(0);
    }
    let s = cm_setup(cli, a)?;
    let map = match sim.translate {
        Some(v) => {
            let coords = parse_rationals(v)?;
            if sim.exact_start.is_some() {
                TorusMap::Translation(TorusPoint::exact(coords))
            } else {
                let f: Vec<f64> = coords.iter().map(|q| Interval::point(q.clone()).mid_f64()).collect();
                TorusMap::Translation(TorusPoint::float(f)?)
            }
        }
        None => TorusMap::from(&multiplication_matrix(&s.cm, &s.alpha)?),
    };
    let map = if sim.backward { map.inverse()? } else { map };
    if let Some(start) = sim.exact_start {
        let orbit = iterate(&map, &TorusPoint::exact(parse_rationals(start)?), sim.iterations)?;
        let Orbit::Exact(o) = orbit else {
            unreachable!("exact start gives an exact orbit")
        };
        let value = json!({
            "steps": o.steps,
            "period": o.period,
            "preperiod": o.preperiod,
            "orbit": o.points.iter().take(64).map(|p| p.iter().map(rational_string).collect::<Vec<_>>()).collect::<Vec<_>>(),
        });
        emit(cli, value, || match o.period {
            Some(p) => format!("periodic with period {p} (first repeat after {} steps)\n", o.steps),
            None => format!("no repeat within {} steps\n", o.steps),
        });
        return Ok(0);
    }
    let stats = equidistribution(&map, None, sim.iterations, sim.partition, sim.seed)?;
    if let Some(path) = sim.csv {
        fs::write(path, stats.to_csv()).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    let rep = dynamics_report(&stats);
    emit(cli, serde_json::to_value(&rep).expect("report serializes"), || {
        format!(
            "N = {}, {} cells: hit fraction {:.6}, discrepancy {:.3e}\n",
            stats.iterations,
            stats.cells,
            stats.hit_fraction_f64(),
            stats.discrepancy_f64()
        )
    });
    Ok(0)
}
