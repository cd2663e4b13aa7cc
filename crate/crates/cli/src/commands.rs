use std::collections::BTreeMap;

use chordmink_core::measure::validate_general_position_seeded;
use chordmink_core::tolerances::TOL;
use chordmink_core::{
    chord_integral, chord_integral_reference, lp_chord_measure, outer_solve, parse_measure, sample_general_position,
    validate_general_position, verify, DiscreteMeasure, Error, Polytope, PolytopeRecord, QuadratureScheme,
    SolverConfig,
};
use log::info;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::args::{Budget, CheckGpArgs, GenMeasureArgs, IntegralsArgs, SolveArgs, VerifyArgs};
use crate::manifest::RunManifest;
use crate::Failure;

pub enum Status {
    Success,
    /// The computation ran but missed its tolerance.
    NotConverged(String),
    /// The input was analysed and found invalid.
    Rejected(String),
}

pub struct Outcome {
    pub report: Value,
    pub status: Status,
}

impl Outcome {
    fn new(manifest: RunManifest, body: Value, status: Status) -> Self {
        let mut report = match body {
            Value::Object(map) => map,
            other => Map::from_iter([("result".to_string(), other)]),
        };
        report.insert("manifest".into(), serde_json::to_value(manifest).expect("manifest serializes"));
        Self { report: Value::Object(report), status }
    }
}

fn scheme(n: usize, budget: Option<Budget>) -> QuadratureScheme {
    let base = QuadratureScheme::for_dim(n);
    match budget {
        Some(b) => base.with_budget(b.directions, b.section, b.facet_order),
        None => base,
    }
}

fn to_value<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("report serializes")
}

/// Accepts a bare polytope file or any report that embeds one under `polytope`.
fn parse_polytope(text: &str) -> Result<Polytope, Error> {
    let mut value: Value = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    if let Some(inner) = value.get_mut("polytope") {
        value = inner.take();
    }
    let record: PolytopeRecord = serde_json::from_value(value).map_err(|e| Error::Malformed(e.to_string()))?;
    Polytope::from_record(&record)
}

pub fn solve(args: &SolveArgs) -> Result<Outcome, Failure> {
    let mut manifest = RunManifest::new("solve");
    let measure = parse_measure(&manifest.read_input("measure", &args.measure)?)?;
    let n = measure.dim();
    let mut config = SolverConfig::new(n, args.p, args.q);
    config.seed = args.seed;
    config.scheme = scheme(n, args.quadrature.budget);
    config.scheme.seed = args.seed;
    if let Some(tol) = args.tol {
        config.residual_tol = tol;
    }
    if let Some(cap) = args.max_iter {
        config.max_outer = cap;
    }
    manifest.echo(&config);
    let report = outer_solve(&measure, &config)?;
    info!(
        "solve: {} after {} iterations, max residual {:.3e}",
        if report.converged { "converged" } else { "not converged" },
        report.iterations,
        report.max_residual
    );
    let status = if report.converged {
        Status::Success
    } else {
        Status::NotConverged(format!(
            "not converged: max residual {:e} against tolerance {:e} ({:?})",
            report.max_residual, config.residual_tol, report.termination
        ))
    };
    Ok(Outcome::new(manifest, to_value(&report), status))
}

pub fn verify_cmd(args: &VerifyArgs) -> Result<Outcome, Failure> {
    let mut manifest = RunManifest::new("verify");
    let poly = parse_polytope(&manifest.read_input("polytope", &args.polytope)?)?;
    let measure = parse_measure(&manifest.read_input("measure", &args.measure)?)?;
    let scheme = scheme(poly.dim(), args.quadrature.budget);
    manifest.echo(&json!({ "p": args.p, "q": args.q, "tol": args.tol, "scheme": scheme }));
    let report = verify(&poly, &measure, args.p, args.q, &scheme)?;
    let status = if report.max_residual <= args.tol {
        Status::Success
    } else {
        Status::NotConverged(format!("max residual {:e} exceeds tolerance {:e}", report.max_residual, args.tol))
    };
    Ok(Outcome::new(manifest, to_value(&report), status))
}

#[derive(Serialize)]
struct IntegralEntry {
    estimate: f64,
    reference: Option<f64>,
    error: f64,
}

pub fn integrals(args: &IntegralsArgs) -> Result<Outcome, Failure> {
    let mut manifest = RunManifest::new("integrals");
    let poly = parse_polytope(&manifest.read_input("polytope", &args.polytope)?)?;
    let scheme = scheme(poly.dim(), args.quadrature.budget);
    manifest.echo(&json!({ "q": args.q, "scheme": scheme }));
    let mut table = BTreeMap::new();
    for &q in &args.q {
        let estimate = chord_integral(&poly, q, &scheme)?;
        let reference = match chord_integral_reference(&poly, q) {
            Ok(r) => Some(r),
            Err(Error::NoReference(_)) => None,
            Err(e) => return Err(e.into()),
        };
        table.insert(format!("{q}"), IntegralEntry { estimate: estimate.value, reference, error: estimate.error });
    }
    Ok(Outcome::new(manifest, json!({ "integrals": table }), Status::Success))
}

pub fn gen_measure(args: &GenMeasureArgs) -> Result<Outcome, Failure> {
    let mut manifest = RunManifest::new("gen-measure");
    let measure = match (&args.polytope, args.dim, args.count) {
        (Some(path), _, _) => {
            let poly = parse_polytope(&manifest.read_input("polytope", path)?)?;
            let (p, q) = (args.p.expect("clap requires p"), args.q.expect("clap requires q"));
            let scheme = scheme(poly.dim(), args.quadrature.budget);
            manifest.echo(&json!({ "mode": "forward", "p": p, "q": q, "scheme": scheme }));
            forward_measure(&poly, p, q, &scheme)?
        }
        (None, Some(dim), Some(count)) => {
            manifest.echo(&json!({ "mode": "random", "dim": dim, "count": count, "seed": args.seed }));
            sample_general_position(dim, count, args.seed)?
        }
        _ => return Err(Failure::input("gen-measure needs --polytope or both --dim and --count".into())),
    };
    Ok(Outcome::new(manifest, measure.to_json(), Status::Success))
}

/// `F_{p,q}(P, .)` on the active facets of `poly`.
fn forward_measure(poly: &Polytope, p: f64, q: f64, scheme: &QuadratureScheme) -> Result<DiscreteMeasure, Error> {
    let f = lp_chord_measure(poly, p, q, scheme)?;
    let (normals, weights): (Vec<_>, Vec<_>) = poly
        .normals()
        .iter()
        .zip(&f.values)
        .enumerate()
        .filter(|&(i, _)| poly.is_active(i))
        .map(|(_, (v, &w))| (v.clone(), w))
        .unzip();
    DiscreteMeasure::new(poly.dim(), normals, weights)
}

pub fn check_gp(args: &CheckGpArgs) -> Result<Outcome, Failure> {
    let mut manifest = RunManifest::new("check-gp");
    let measure = parse_measure(&manifest.read_input("measure", &args.measure)?)?;
    let det_tol = args.det_tol.unwrap_or(TOL.subset_det);
    manifest.echo(&json!({ "det_tol": det_tol, "seed": args.seed }));
    let report = match args.seed {
        Some(seed) => validate_general_position_seeded(&measure, det_tol, seed),
        None => validate_general_position(&measure, det_tol),
    };
    let status = if report.in_general_position {
        Status::Success
    } else if let Some(subset) = &report.dependent_subset {
        Status::Rejected(format!(
            "not in general position: dependent_subset {subset:?} (|det| {:e} <= {det_tol:e})",
            report.min_subset_det
        ))
    } else {
        Status::Rejected(format!(
            "not in general position: normals lie in a closed hemisphere, witness {:?}",
            report.hemisphere_witness.as_deref().unwrap_or_default()
        ))
    };
    Ok(Outcome::new(manifest, to_value(&report), status))
}
