use std::path::PathBuf;

use dcext::counterexamples::{build_elltwo, elltwo_blowup_report, elltwo_positive_side, no_convex_extension_certificate, BlowupOptions};
use dcext::dc_calculus::{control_check_parts, convexity_check, lipschitz_estimate, CheckOptions, ConvexFn, DcFn, Mapping};
use dcext::extension_ops::{dc_extend_radial, finite_dim_extend, lipschitz_convex_extend, ExtendOptions, ExtensionResult};
use dcext::geometry::ConvexSet;
use dcext::sampling::derive_seed;
use dcext::subspace_ext::{
    hartman_majorant, kuzeliky_point, lift_sequence, majorant_to_extension, separable_quotient_extend_sets, HartmanOptions,
    KuzelikyOptions, MajorantOptions, QuotientOptions, SetSequence, SubspacePair,
};
use dcext::{Certificate, Tolerances, Vector};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{CounterKind, ExtendInput, ExtendMethod, RunConfig, SubspaceInput, SubspaceKind, Verb};
use crate::output::csv_bytes;
use crate::CliError;

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub verdict: &'static str,
    pub certificates: Vec<Certificate>,
    pub results: Value,
    pub artifacts: Vec<PathBuf>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.certificates.iter().all(Certificate::passed)
    }
}

/// A finished run: the report and the CSV body, not yet written anywhere.
pub struct RunOutput {
    pub report: RunReport,
    pub csv: Option<Vec<u8>>,
}

struct Partial {
    certificates: Vec<Certificate>,
    results: Value,
    csv: Vec<u8>,
}

pub fn run(config: RunConfig) -> Result<RunOutput, CliError> {
    Tolerances::set_global(config.tolerances());
    let p = match config.verb {
        Verb::Extend => extend(&config)?,
        Verb::Verify => verify(&config)?,
        Verb::Counterexample(CounterKind::Strip) => strip(&config)?,
        Verb::Counterexample(CounterKind::Elltwo) => elltwo(&config)?,
        Verb::Subspace(kind) => subspace(&config, kind)?,
    };
    let artifacts = config.csv_out.iter().cloned().collect();
    let mut report = RunReport {
        config,
        verdict: "pass",
        certificates: p.certificates,
        results: p.results,
        artifacts,
    };
    if !report.passed() {
        report.verdict = "fail";
    }
    let csv = report.config.csv_out.as_ref().map(|_| p.csv);
    Ok(RunOutput { report, csv })
}

fn core(context: &str) -> impl Fn(dcext::Error) -> CliError + '_ {
    move |source| CliError::Core {
        context: context.to_string(),
        source,
    }
}

fn parse_set(field: &str, v: &Value) -> Result<ConvexSet, CliError> {
    ConvexSet::from_json(&v.to_string()).map_err(|e| CliError::usage(field, e.to_string()))
}

fn parse_fn(field: &str, v: &Value) -> Result<ConvexFn, CliError> {
    ConvexFn::from_json(&v.to_string()).map_err(|e| CliError::usage(field, e.to_string()))
}

fn parse_map(field: &str, v: &Value) -> Result<Mapping, CliError> {
    serde_json::from_value(v.clone()).map_err(|e| CliError::usage(field, e.to_string()))
}

fn vector(field: &str, coords: &[f64]) -> Result<Vector, CliError> {
    Vector::new(coords.to_vec()).map_err(|e| CliError::usage(field, e.to_string()))
}

fn set_json(s: &ConvexSet) -> Value {
    s.to_json()
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok())
        .unwrap_or(Value::Null)
}

fn check_options(c: &RunConfig) -> CheckOptions {
    CheckOptions {
        pairs: c.samples,
        functionals: 16,
        seed: c.seed,
        tol: c.cert_tol,
    }
}

fn dc_input(e: &ExtendInput, domain: ConvexSet, opts: &CheckOptions) -> Result<DcFn, CliError> {
    match (&e.function, &e.map) {
        (Some(f), _) => DcFn::from_convex(parse_fn("extend.function", f)?, domain, opts),
        (None, Some(m)) => {
            let control = e.control.as_ref().map_or(Ok(ConvexFn::constant(0.0)), |c| parse_fn("extend.control", c))?;
            DcFn::new(parse_map("extend.map", m)?, control, domain, opts)
        }
        (None, None) => return Err(CliError::usage("extend.function", "missing")),
    }
    .map_err(core("input mapping"))
}

#[derive(Serialize)]
struct StageRow {
    stage: usize,
    radius: f64,
    lipschitz_map: f64,
    lipschitz_control: f64,
    verdict: &'static str,
}

fn extension_output(mut certificates: Vec<Certificate>, res: &ExtensionResult, probes: &[Vector]) -> Result<Partial, CliError> {
    let rows: Vec<StageRow> = res
        .log
        .iter()
        .map(|s| StageRow {
            stage: s.stage,
            radius: s.radius,
            lipschitz_map: s.lipschitz_map,
            lipschitz_control: s.lipschitz_control,
            verdict: if s.certificate.passed() { "pass" } else { "fail" },
        })
        .collect();
    certificates.extend(res.log.iter().map(|s| s.certificate.clone()));
    certificates.push(res.agreement.clone());
    let mut values = Vec::with_capacity(probes.len());
    for x in probes {
        let v = res.extended.eval(x).map_err(core("probe evaluation"))?;
        values.push(json!({ "x": x, "value": v }));
    }
    Ok(Partial {
        certificates,
        results: json!({ "center": res.center, "stages": rows, "probes": values }),
        csv: csv_bytes(&["stage", "radius", "lipschitz_map", "lipschitz_control", "verdict"], &rows)?,
    })
}

fn extend(c: &RunConfig) -> Result<Partial, CliError> {
    let e = c.extend.as_ref().ok_or_else(|| CliError::usage("extend", "section missing"))?;
    let domain = parse_set("extend.domain", e.domain.as_ref().ok_or_else(|| CliError::usage("extend.domain", "missing"))?)?;
    let probes = e
        .probes
        .iter()
        .map(|p| vector("extend.probes", p))
        .collect::<Result<Vec<_>, _>>()?;
    let check = check_options(c);
    let opts = ExtendOptions {
        check,
        stages: e.stages.unwrap_or(ExtendOptions::default().stages),
        agreement_samples: c.samples,
    };
    match e.method {
        ExtendMethod::Radial => {
            let f = dc_input(e, domain, &check)?;
            let target = parse_set("extend.target", e.target.as_ref().ok_or_else(|| CliError::usage("extend.target", "missing"))?)?;
            let exhaustion = match &e.exhaustion {
                Some(list) => Some(
                    list.iter()
                        .map(|v| parse_set("extend.exhaustion", v))
                        .collect::<Result<Vec<_>, _>>()?,
                ),
                None => None,
            };
            let res = dc_extend_radial(&f, &target, exhaustion.as_deref(), &opts).map_err(core("radial extension"))?;
            extension_output(vec![f.certificate().clone()], &res, &probes)
        }
        ExtendMethod::FiniteDim => {
            let f = dc_input(e, domain, &check)?;
            let radius = e.radius.ok_or_else(|| CliError::usage("extend.radius", "missing"))?;
            let res = finite_dim_extend(&f, radius, &opts).map_err(core("finite-dimensional extension"))?;
            extension_output(vec![f.certificate().clone()], &res, &probes)
        }
        ExtendMethod::Lipschitz => {
            let f = parse_fn("extend.function", e.function.as_ref().ok_or_else(|| CliError::usage("extend.function", "missing"))?)?;
            let l = e.lipschitz.ok_or_else(|| CliError::usage("extend.lipschitz", "missing"))?;
            let (ext, cert) = lipschitz_convex_extend(&f, &domain, l, c.samples, c.seed).map_err(core("Lipschitz extension"))?;
            let mut rows = Vec::with_capacity(probes.len());
            let mut values = Vec::with_capacity(probes.len());
            for x in &probes {
                let v = ext.eval(x).map_err(core("probe evaluation"))?;
                values.push(json!({ "x": x, "value": v }));
                let mut row = x.coords().to_vec();
                row.push(v);
                rows.push(row);
            }
            let dim = domain.dim();
            let mut header: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
            header.push("value".into());
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            Ok(Partial {
                certificates: vec![cert],
                results: json!({ "probes": values }),
                csv: csv_bytes(&header, &rows)?,
            })
        }
    }
}

fn verify(c: &RunConfig) -> Result<Partial, CliError> {
    let v = c.verify.as_ref().ok_or_else(|| CliError::usage("verify", "section missing"))?;
    let domain = parse_set("verify.domain", v.domain.as_ref().ok_or_else(|| CliError::usage("verify.domain", "missing"))?)?;
    let mut certificates = Vec::new();
    let mut results = serde_json::Map::new();
    if let Some(f) = &v.function {
        let f = parse_fn("verify.function", f)?;
        certificates.push(convexity_check(&f, &domain, c.samples, c.seed, c.cert_tol).map_err(core("convexity check"))?);
        let l1 = lipschitz_estimate(&f, &domain, c.samples, derive_seed(c.seed, 1)).map_err(core("Lipschitz estimate"))?;
        let l2 = lipschitz_estimate(&f, &domain, 2 * c.samples, derive_seed(c.seed, 2)).map_err(core("Lipschitz estimate"))?;
        results.insert("lipschitz_estimate".into(), json!(l1));
        results.insert("lipschitz_estimate_doubled".into(), json!(l2));
    }
    if let (Some(m), Some(k)) = (&v.map, &v.control) {
        let map = parse_map("verify.map", m)?;
        let control = parse_fn("verify.control", k)?;
        certificates.push(control_check_parts(&map, &control, &domain, &check_options(c)).map_err(core("control check"))?);
    }
    let rows: Vec<Vec<String>> = certificates
        .iter()
        .map(|k| k.csv_row().split(',').map(str::to_string).collect())
        .collect();
    let header: Vec<&str> = Certificate::CSV_HEADER.split(',').collect();
    Ok(Partial {
        results: Value::Object(results),
        csv: csv_bytes(&header, &rows)?,
        certificates,
    })
}

fn strip(c: &RunConfig) -> Result<Partial, CliError> {
    let s = c.strip.clone().unwrap_or_default();
    let target = Vector::from_slice(&s.target.unwrap_or([0.0, 3.0]));
    let (cert, rows) = no_convex_extension_certificate(&c.tau_list, &target, s.cap).map_err(core("strip certificate"))?;
    let rows: Vec<(f64, f64)> = rows.iter().map(|r| (r.tau, r.lb)).collect();
    let json_rows: Vec<Value> = rows.iter().map(|(tau, lb)| json!({ "tau": tau, "lb": lb })).collect();
    Ok(Partial {
        certificates: vec![cert],
        results: json!({ "target": target, "bounds": json_rows }),
        csv: csv_bytes(&["tau", "lb"], &rows)?,
    })
}

fn elltwo(c: &RunConfig) -> Result<Partial, CliError> {
    let e = c.elltwo.clone().unwrap_or_default();
    let d = BlowupOptions::default();
    let opts = BlowupOptions {
        radius: e.radius.unwrap_or(d.radius),
        lambda: e.lambda.unwrap_or(d.lambda),
        threshold: e.threshold.unwrap_or(d.threshold),
    };
    let ex = build_elltwo(c.n).map_err(core("ℓ₂ example"))?;
    let (blowup, rows) = elltwo_blowup_report(&ex, &opts).map_err(core("blow-up report"))?;
    let positive = elltwo_positive_side(&ex, c.samples, c.seed).map_err(core("positive side"))?;
    let rows: Vec<(usize, usize, f64, f64, f64)> = rows.iter().map(|r| (r.n, r.k, r.norm, r.g_value, r.cluster_diam)).collect();
    let json_rows: Vec<Value> = rows
        .iter()
        .map(|(n, k, norm, g, diam)| json!({ "n": n, "k": k, "norm": norm, "g_value": g, "cluster_diam": diam }))
        .collect();
    Ok(Partial {
        certificates: vec![blowup, positive],
        results: json!({ "h": ex.h, "rows": json_rows }),
        csv: csv_bytes(&["n", "k", "norm", "g_value", "cluster_diam"], &rows)?,
    })
}

fn sequence(field: &str, given: &Option<Vec<Value>>, dim: usize, count: usize) -> Result<SetSequence, CliError> {
    match given {
        Some(list) => {
            let sets = list.iter().map(|v| parse_set(field, v)).collect::<Result<Vec<_>, _>>()?;
            SetSequence::new(sets).map_err(|e| CliError::usage(field, e.to_string()))
        }
        None => SetSequence::balls(&Vector::zeros(dim), count, |n| n as f64).map_err(core(field)),
    }
}

fn subspace(c: &RunConfig, kind: SubspaceKind) -> Result<Partial, CliError> {
    let s: &SubspaceInput = c.subspace.as_ref().ok_or_else(|| CliError::usage("subspace", "section missing"))?;
    let dim = s.dim.ok_or_else(|| CliError::usage("subspace.dim", "missing"))?;
    let basis = s
        .y_basis
        .as_ref()
        .ok_or_else(|| CliError::usage("subspace.y_basis", "missing"))?
        .iter()
        .map(|b| vector("subspace.y_basis", b))
        .collect::<Result<Vec<_>, _>>()?;
    let pair = SubspacePair::new(dim, &basis).map_err(|e| CliError::usage("subspace.y_basis", e.to_string()))?;
    match kind {
        SubspaceKind::Majorant => {
            let f = parse_fn("subspace.function", s.function.as_ref().ok_or_else(|| CliError::usage("subspace.function", "missing"))?)?;
            let d = sequence("subspace.d_sets", &s.d_sets, dim, c.n)?;
            let hd = HartmanOptions::default();
            let h = hartman_majorant(
                &f,
                &pair,
                &d,
                &HartmanOptions {
                    directions: s.directions.unwrap_or(hd.directions),
                    samples: c.samples,
                    seed: c.seed,
                    inflation: s.inflation.unwrap_or(hd.inflation),
                },
            )
            .map_err(core("Hartman majorant"))?;
            let (_, ext_cert) = majorant_to_extension(
                &f,
                &h.g,
                &pair,
                &MajorantOptions {
                    samples: c.samples,
                    search_samples: 4,
                    radius: s.radius.unwrap_or(MajorantOptions::default().radius),
                    seed: derive_seed(c.seed, 1),
                },
            )
            .map_err(core("majorant extension"))?;
            let rows: Vec<(usize, f64, f64, f64, f64)> =
                h.limit.stages.iter().map(|t| (t.stage, t.sup_next, t.a, t.b, t.margin)).collect();
            Ok(Partial {
                certificates: vec![h.certificate.clone(), ext_cert],
                results: json!({ "sups": h.sups, "repairs": h.repairs, "stages": h.limit.stages.len() }),
                csv: csv_bytes(&["stage", "M_n", "a", "b", "d_n"], &rows)?,
            })
        }
        SubspaceKind::Lift => {
            let cs = sequence("subspace.c_sets", &s.c_sets, pair.y_dim(), c.n)?;
            let d = sequence("subspace.d_sets", &s.d_sets, dim, c.n)?;
            let (lifted, cert) = lift_sequence(&cs, &d, &pair, c.samples, c.seed).map_err(core("lifting"))?;
            let rows: Vec<(usize, bool, Option<f64>)> = lifted
                .sets
                .iter()
                .enumerate()
                .map(|(i, set)| (i + 1, set.is_empty(), set.bounds().map(|(_, r)| r)))
                .collect();
            let sets: Vec<Value> = lifted.sets.iter().map(set_json).collect();
            Ok(Partial {
                certificates: vec![cert],
                results: json!({ "sets": sets }),
                csv: csv_bytes(&["n", "empty", "bound_radius"], &rows)?,
            })
        }
        SubspaceKind::Kuzeliky => {
            let x = vector("subspace.x", s.x.as_deref().ok_or_else(|| CliError::usage("subspace.x", "missing"))?)?;
            let r = s.r.ok_or_else(|| CliError::usage("subspace.r", "missing"))?;
            let kd = KuzelikyOptions::default();
            let k = kuzeliky_point(
                &pair,
                r,
                &x,
                &KuzelikyOptions {
                    directions: s.directions.unwrap_or(kd.directions),
                    samples: c.samples,
                    seed: c.seed,
                    ..kd
                },
            )
            .map_err(core("Kuzeliky point"))?;
            let u0 = pair.lift(&k.u0);
            let rows: Vec<(usize, f64, f64, f64)> = (0..dim).map(|i| (i + 1, x[i], k.y[i], u0[i])).collect();
            Ok(Partial {
                certificates: k.certificate.clone().into_iter().collect(),
                results: json!({ "y": k.y, "u0": u0, "s": k.s }),
                csv: csv_bytes(&["i", "x", "y", "u0"], &rows)?,
            })
        }
        SubspaceKind::ConstructD => {
            let cs = sequence("subspace.c_sets", &s.c_sets, pair.y_dim(), c.n)?;
            let q = separable_quotient_extend_sets(
                &pair,
                &cs,
                &QuotientOptions {
                    r: s.r,
                    z_width: s.z_width.unwrap_or(QuotientOptions::default().z_width),
                    samples: c.samples,
                    seed: c.seed,
                },
            )
            .map_err(core("quotient construction"))?;
            let mut certificates = vec![q.certificate.clone()];
            if let Some(radius) = s.coverage_radius {
                certificates.push(q.d.coverage_check(radius, s.coverage_step.unwrap_or(1.0)).map_err(core("coverage"))?);
            }
            let rows: Vec<(usize, usize)> = q.n_of_j.iter().enumerate().map(|(j, n)| (j + 1, *n)).collect();
            let sets: Vec<Value> = q.d.sets.iter().map(set_json).collect();
            Ok(Partial {
                certificates,
                results: json!({ "r": q.r, "k": q.k, "n_of_j": q.n_of_j, "cover_sizes": q.cover_sizes, "sets": sets }),
                csv: csv_bytes(&["j", "n_of_j"], &rows)?,
            })
        }
    }
}
