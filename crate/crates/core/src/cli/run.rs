use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use super::config::{CompareCheck, Format, MatrixKind, Resolved, RunConfig, Task};
use super::{resolve_config, resolve_workers, CliError, CommonArgs};
use crate::correspond::{
    discreteness_diagnostic, resolvent_comparability_hypothesis, verify_indices, verify_kappa, verify_nonnegativity,
    verify_semiboundedness_probe, CorrespondenceReport, TruncationSource,
};
use crate::criteria::{self, Verdict};
use crate::jacobi::{build_b1, build_b2_with, build_tilde_b, Origin};
use crate::linalg::CMat;
use crate::output::{fmt_f64, to_json};
use crate::spectral::spectrum_report;
use crate::weyl::{herglotz_scan, m_regularized, HerglotzReport, WeylValue};

/// A finished artifact and the exit code that goes with it.
struct Artifact {
    body: String,
    code: i32,
}

impl Artifact {
    fn ok(body: String) -> Self {
        Self { body, code: 0 }
    }
}

#[derive(Serialize)]
struct Plan<'a> {
    config: &'a RunConfig,
    workers: usize,
    steps: Vec<String>,
}

fn plan_steps(cfg: &RunConfig) -> Vec<String> {
    match &cfg.task {
        Task::Build { n, matrix } => vec![format!("assemble {matrix:?} with {n} blocks or intervals")],
        Task::Weyl { n, triplet, z, scan } => {
            let mut s = vec![format!("evaluate regularized Weyl functions ({triplet:?}) on {n} intervals at {} points", z.len())];
            if *scan > 0 {
                s.push(format!("Herglotz scan on a {scan}x{scan} grid"));
            }
            s
        }
        Task::Criteria { split, .. } => vec![format!("criteria verdicts (split {split:?})")],
        Task::Spectrum { n, lo, hi, mesh, .. } => vec![format!("spectrum on {n} intervals in [{lo}, {hi}) for {} mesh levels", mesh.len())],
        Task::Compare { check, n, mesh, .. } => n.iter().map(|n| format!("{check:?} at N = {n} over {} mesh levels", mesh.len())).collect(),
    }
}

pub fn execute(name: &str, args: &CommonArgs) -> Result<i32, CliError> {
    let cfg = resolve_config(name, args)?;
    if args.dump_config {
        write_stdout(&to_json(&cfg))?;
        return Ok(0);
    }
    let base = args
        .config
        .as_ref()
        .and_then(|p| p.parent().map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."));
    let problem = cfg.problem.resolve(&base)?;
    let workers = resolve_workers(args.workers)?;
    if args.dry_run {
        write_stdout(&to_json(&Plan { config: &cfg, workers, steps: plan_steps(&cfg) }))?;
        return Ok(0);
    }
    let artifact = produce(&cfg, &problem, workers)?;
    match &cfg.output.emit {
        Some(path) => std::fs::write(path, &artifact.body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => write_stdout(&artifact.body)?,
    }
    Ok(artifact.code)
}

/// Writes to stdout; a closed pipe is not an error.
fn write_stdout(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

#[derive(Serialize)]
struct DenseReport {
    kind: &'static str,
    order: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

fn dense(kind: &'static str, m: &CMat, format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = String::from("i,j,re,im\n");
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    let v = m[(i, j)];
                    if v.re != 0.0 || v.im != 0.0 {
                        out.push_str(&format!("{},{},{},{}\n", i + 1, j + 1, fmt_f64(v.re), fmt_f64(v.im)));
                    }
                }
            }
            out
        }
        _ => to_json(&DenseReport {
            kind,
            order: m.rows(),
            re: (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)].re).collect()).collect(),
            im: (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)].im).collect()).collect(),
        }),
    }
}

#[derive(Serialize)]
struct WeylReport {
    values: Vec<WeylValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    herglotz: Option<HerglotzReport>,
}

/// `x + iy` with `x ∈ [−10, 10]` and `y ∈ [10⁻³, 10]` log-spaced.
fn herglotz_grid(side: usize) -> Vec<Complex64> {
    let step = |i: usize| if side > 1 { i as f64 / (side - 1) as f64 } else { 0.5 };
    let mut grid = Vec::with_capacity(side * side);
    for i in 0..side {
        for j in 0..side {
            grid.push(Complex64::new(-10.0 + 20.0 * step(i), 10f64.powf(-3.0 + 4.0 * step(j))));
        }
    }
    grid
}

#[derive(Serialize)]
struct CriteriaReport {
    verdicts: Vec<Verdict>,
}

fn verdict_table(verdicts: &[Verdict]) -> String {
    let mut rows = vec![("claim".to_string(), "status".to_string(), "conclusion".to_string())];
    fn walk(v: &Verdict, depth: usize, rows: &mut Vec<(String, String, String)>) {
        let status = serde_json::to_value(v.status).ok().and_then(|s| s.as_str().map(String::from)).unwrap_or_default();
        rows.push((format!("{}{}", "  ".repeat(depth), v.claim), status, v.conclusion.clone().unwrap_or_else(|| "-".into())));
        for p in &v.witness.parts {
            walk(p, depth + 1, rows);
        }
    }
    for v in verdicts {
        walk(v, 0, &mut rows);
    }
    let w0 = rows.iter().map(|r| r.0.chars().count()).max().unwrap_or(0);
    let w1 = rows.iter().map(|r| r.1.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(a, b, c)| {
            let pad = w0 - a.chars().count();
            format!("{a}{}  {b:<w1$}  {c}\n", " ".repeat(pad))
        })
        .collect()
}

fn kappa_table(r: &CorrespondenceReport) -> String {
    let opt = |v: Option<usize>| v.map_or_else(|| "?".into(), |c| c.to_string());
    let mut out = format!("{}\n{}\n{:>5}  {:>8}  {:>8}  {:>12}  {:>12}\n", r.family, r.evidence_level, "N", "kappa_B", "kappa_H", "kappa_B(D)", "kappa_H(D)");
    for row in &r.rows {
        out.push_str(&format!(
            "{:>5}  {:>8}  {:>8}  {:>12}  {:>12}\n",
            row.n,
            row.neumann.kappa_b,
            opt(row.neumann.kappa_h),
            row.dirichlet.kappa_b,
            opt(row.dirichlet.kappa_h)
        ));
    }
    out.push_str(&format!("agreement: {}  (dirichlet pair: {})\n", r.agreement, r.dirichlet_agreement));
    out
}

fn produce(cfg: &RunConfig, problem: &Resolved, workers: usize) -> Result<Artifact, CliError> {
    let format = cfg.output.format;
    Ok(match &cfg.task {
        Task::Build { n, matrix } => match matrix {
            MatrixKind::B2 | MatrixKind::B2Neumann => {
                let origin = if *matrix == MatrixKind::B2 { Origin::Dirichlet } else { Origin::Neumann };
                let b = build_b2_with(&problem.data(n + 1)?, *n, origin)?;
                Artifact::ok(if format == Format::Csv { b.to_matrix_market() } else { to_json(&b) })
            }
            MatrixKind::TildeB => Artifact::ok(dense("tilde-b", &build_tilde_b(&problem.data(*n)?, *n)?, format)),
            MatrixKind::B1 => Artifact::ok(dense("b1", &build_b1(&problem.data(*n)?, *n)?, format)),
        },
        Task::Weyl { n, triplet, z, scan } => {
            let data = problem.data(*n)?;
            let mut values = Vec::new();
            for &[re, im] in z {
                for k in 1..=*n {
                    values.push(m_regularized(&data, k, Complex64::new(re, im), *triplet)?);
                }
            }
            let herglotz = (*scan > 0).then(|| herglotz_scan(&data, *triplet, &herglotz_grid(*scan)));
            let code = if herglotz.as_ref().is_some_and(|h| !h.passed()) { 3 } else { 0 };
            let body = match (format, &herglotz) {
                (Format::Csv, Some(h)) => h.to_csv(),
                (Format::Csv, None) => {
                    let mut out = String::from("k,z_re,z_im,i,j,re,im\n");
                    for v in &values {
                        let m = &v.value;
                        for i in 0..m.rows() {
                            for j in 0..m.cols() {
                                out.push_str(&format!(
                                    "{},{},{},{},{},{},{}\n",
                                    v.k,
                                    fmt_f64(v.z.re),
                                    fmt_f64(v.z.im),
                                    i + 1,
                                    j + 1,
                                    fmt_f64(m[(i, j)].re),
                                    fmt_f64(m[(i, j)].im)
                                ));
                            }
                        }
                    }
                    out
                }
                _ => to_json(&WeylReport { values, herglotz }),
            };
            Artifact { body, code }
        }
        Task::Criteria { split, tilde_couplings } => {
            let verdicts = match problem {
                Resolved::Family(f) => {
                    let mut v = vec![criteria::carleman(f), criteria::kosmir(f)];
                    if let Some(p1) = split {
                        v.push(criteria::var_indices(f, *p1)?);
                    }
                    v.push(criteria::discreteness_necessary(f));
                    v.push(criteria::ac_trace_class(f));
                    if let Some(t) = tilde_couplings {
                        v.push(resolvent_comparability_hypothesis(f, t)?);
                    }
                    v
                }
                Resolved::Data(d) => vec![criteria::carleman_data(d), criteria::discreteness_data(d)],
                Resolved::Single(s) => {
                    let d = s.data(2)?;
                    vec![criteria::carleman_data(&d), criteria::discreteness_data(&d)]
                }
            };
            Artifact::ok(match format {
                Format::Pretty => verdict_table(&verdicts),
                Format::Csv => {
                    let mut out = String::from("claim,status,deficiency\n");
                    for v in &verdicts {
                        let status = serde_json::to_value(v.status).ok().and_then(|s| s.as_str().map(String::from)).unwrap_or_default();
                        out.push_str(&format!("\"{}\",{},{}\n", v.claim, status, v.deficiency.map_or_else(String::new, |d| d.to_string())));
                    }
                    out
                }
                Format::Json => to_json(&CriteriaReport { verdicts }),
            })
        }
        Task::Spectrum { n, left, lo, hi, count, mesh } => {
            let r = spectrum_report(&problem.data(*n)?, *n, *left, *lo, *hi, *count, mesh)?;
            Artifact::ok(if format == Format::Csv { r.to_csv() } else { to_json(&r) })
        }
        Task::Compare { check, n, mesh, horizon, split, probe_level } => match check {
            CompareCheck::Kappa => {
                let r = verify_kappa(problem.source(), n, mesh, workers)?;
                let code = if r.agreement { 0 } else { 3 };
                let body = match format {
                    Format::Csv => r.to_csv(),
                    Format::Pretty => kappa_table(&r),
                    Format::Json => to_json(&r),
                };
                Artifact { body, code }
            }
            CompareCheck::Nonnegativity => {
                let r = verify_nonnegativity(problem.source(), n, mesh, workers)?;
                let body = if format == Format::Csv {
                    let mut out = String::from("N,B_nonnegative,B_positive_definite,H_nonnegative,H_positive_definite,B_n_zero\n");
                    for x in &r.rows {
                        out.push_str(&format!(
                            "{},{},{},{},{},{}\n",
                            x.n, x.b_nonnegative, x.b_positive_definite, x.h_nonnegative, x.h_positive_definite, x.b_at_zero.n_zero
                        ));
                    }
                    out
                } else {
                    to_json(&r)
                };
                Artifact { body, code: if r.agreement { 0 } else { 3 } }
            }
            CompareCheck::Semiboundedness => {
                let r = verify_semiboundedness_probe(problem.source(), n, *probe_level, workers)?;
                let body = if format == Format::Csv {
                    let mut out = String::from("N,lower_edge\n");
                    for (l, e) in r.levels.iter().zip(&r.lower_edges) {
                        out.push_str(&format!("{l},{}\n", fmt_f64(*e)));
                    }
                    out
                } else {
                    to_json(&r)
                };
                Artifact::ok(body)
            }
            CompareCheck::Indices => {
                let family = problem.family().ok_or_else(|| CliError::Config("index comparison needs a parametric family".into()))?;
                let r = verify_indices(family, *split, *horizon)?;
                let code = if r.estimator_index.is_none() || r.flagged { 3 } else { 0 };
                let body = if format == Format::Csv {
                    let opt = |v: Option<usize>| v.map_or_else(String::new, |c| c.to_string());
                    format!(
                        "criteria_index,estimator_index,gap,agreement\n{},{},{},{}\n",
                        opt(r.criteria_index),
                        opt(r.estimator_index),
                        fmt_f64(r.estimate.gap),
                        r.agreement
                    )
                } else {
                    to_json(&r)
                };
                Artifact { body, code }
            }
            CompareCheck::Discreteness => {
                let family = problem.family().ok_or_else(|| CliError::Config("discreteness diagnostic needs a parametric family".into()))?;
                let r = discreteness_diagnostic(family, n, 5, workers)?;
                let body = if format == Format::Csv {
                    let mut out = String::from("N,j,eigenvalue\n");
                    for (l, eig) in r.levels.iter().zip(&r.eigenvalues) {
                        for (j, e) in eig.iter().enumerate() {
                            out.push_str(&format!("{l},{},{}\n", j + 1, fmt_f64(*e)));
                        }
                    }
                    out
                } else {
                    to_json(&r)
                };
                Artifact::ok(body)
            }
        },
    })
}
