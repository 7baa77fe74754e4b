//! Suite execution: build the configured system once, fan the configured
//! audits out over `(p, a)` tuples, and persist the reports. Audits are
//! independent jobs; each is deterministic given the config seed, so the
//! suite may run them on a thread pool and sort the results by key.

use crate::config::{AuditKind, ExperimentConfig, SpaceConfig};
use rayon::prelude::*;
use riesz_core::operators::{
    build_bessel, build_hermite, build_laguerre, tensor_product, BesselParams, BuildError,
    LaguerreParams,
};
use riesz_core::report::{named, AuditReport, NamedValue};
use riesz_core::riesz::{
    bellman_sweep_audit, bilinear_audit, integral_rep_audit, lusin_audit, main_bound_audit,
    semigroup_audit, TestFunctionSet, TimeRule,
};
use riesz_core::semigroups::SubordinationRule;
use riesz_core::spectral::{SpectralCoeffs, SpectralSystem, KERNEL_TOL};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn build_system(space: &SpaceConfig) -> Result<SpectralSystem, BuildError> {
    match space {
        SpaceConfig::Laguerre { alpha, n_modes } => {
            build_laguerre(&LaguerreParams::new(*alpha, *n_modes)?)
        }
        SpaceConfig::Bessel {
            alpha,
            radius,
            grid_size,
            n_modes,
        } => build_bessel(&BesselParams::new(*alpha, *radius, *grid_size, *n_modes)?),
        SpaceConfig::Hermite { n_modes } => build_hermite(*n_modes),
        SpaceConfig::Tensor {
            alphas,
            n_modes,
            max_total_degree,
        } => {
            let factors: Vec<SpectralSystem> = alphas
                .iter()
                .map(|&alpha| build_laguerre(&LaguerreParams::new(alpha, *n_modes)?))
                .collect::<Result<_, BuildError>>()?;
            let refs: Vec<&SpectralSystem> = factors.iter().collect();
            tensor_product(&refs, *max_total_degree)
        }
    }
}

/// Runs every configured audit; never panics on audit failure or
/// construction failure, which both land in failed reports.
pub fn run_suite(cfg: &ExperimentConfig) -> Vec<AuditReport> {
    let needs_system = cfg.audits.iter().any(|k| *k != AuditKind::Bellman);
    let system = if needs_system {
        match build_system(&cfg.space) {
            Ok(sys) => Some(Arc::new(sys)),
            Err(err) => {
                // one failed report per requested audit, no crash
                return cfg
                    .audits
                    .iter()
                    .map(|kind| construction_failure(kind.name(), &cfg.space.label(), &err))
                    .collect();
            }
        }
    } else {
        None
    };

    let jobs = collect_jobs(cfg, system);
    let mut reports: Vec<(String, AuditReport)> = jobs
        .into_par_iter()
        .map(|job| {
            let key = job.key.clone();
            let mut report = (job.run)();
            for w in &cfg.warnings {
                report.flags.push(w.clone());
            }
            if let Some(slack) = cfg.params.slack.get(&report.audit_name) {
                report.tolerance = *slack;
                report.passed = report.margin >= -report.tolerance;
            }
            ensure_param(&mut report, "seed", cfg.seed as f64);
            (key, report)
        })
        .collect();
    reports.sort_by(|a, b| a.0.cmp(&b.0));
    reports.into_iter().map(|(_, r)| r).collect()
}

struct Job {
    key: String,
    run: Box<dyn FnOnce() -> AuditReport + Send>,
}

fn collect_jobs(cfg: &ExperimentConfig, system: Option<Arc<SpectralSystem>>) -> Vec<Job> {
    let mut jobs: Vec<Job> = Vec::new();
    let params = cfg.params.clone();
    let seed = cfg.seed;

    for kind in &cfg.audits {
        match kind {
            AuditKind::Bellman => {
                for &p in &cfg.p_values {
                    let params = params.clone();
                    jobs.push(Job {
                        key: format!("bellman|p={p}"),
                        run: Box::new(move || {
                            // the Bellman function needs p >= 2; smaller
                            // exponents are audited through the conjugate
                            let (effective, swapped) = if p >= 2.0 {
                                (p, false)
                            } else {
                                (p / (p - 1.0), true)
                            };
                            let mut report = bellman_sweep_audit(
                                effective,
                                seed,
                                params.bellman_samples,
                                params.bellman_mollified_samples,
                                &params.bellman_epsilons,
                            );
                            if swapped {
                                report.flags.push(format!(
                                    "p = {p} < 2: audited at the conjugate exponent {effective}"
                                ));
                            }
                            report
                        }),
                    });
                }
            }
            AuditKind::Semigroup => {
                for &a in &cfg.a_values {
                    let sys = system.clone().expect("system built");
                    let params = params.clone();
                    jobs.push(Job {
                        key: format!("semigroup|a={a}"),
                        run: Box::new(move || {
                            let rule = SubordinationRule::default();
                            let tests = TestFunctionSet::generate(
                                &sys,
                                seed,
                                params.semigroup_count,
                                1.0,
                                a,
                            );
                            semigroup_audit(
                                &sys,
                                &rule,
                                a,
                                &params.semigroup_contraction_p,
                                &params.semigroup_t_values,
                                &tests,
                            )
                        }),
                    });
                }
            }
            AuditKind::RieszMain => {
                for &p in &cfg.p_values {
                    for &a in &cfg.a_values {
                        let sys = system.clone().expect("system built");
                        let params = params.clone();
                        jobs.push(Job {
                            key: format!("riesz-main|p={p}|a={a}"),
                            run: Box::new(move || {
                                let tests = TestFunctionSet::generate(
                                    &sys,
                                    seed,
                                    params.riesz_main_count,
                                    params.riesz_main_decay,
                                    a,
                                );
                                main_bound_audit(&sys, p, a, &tests)
                            }),
                        });
                    }
                }
            }
            AuditKind::IntegralRep => {
                for &a in &cfg.a_values {
                    let sys = system.clone().expect("system built");
                    let params = params.clone();
                    jobs.push(Job {
                        key: format!("integral-rep|a={a}"),
                        run: Box::new(move || integral_rep_job(&sys, a, seed, &params)),
                    });
                }
            }
            AuditKind::Bilinear => {
                for &p in &cfg.p_values {
                    for &a in &cfg.a_values {
                        let sys = system.clone().expect("system built");
                        let params = params.clone();
                        jobs.push(Job {
                            key: format!("bilinear|p={p}|a={a}"),
                            run: Box::new(move || bilinear_job(&sys, p, a, seed, &params)),
                        });
                    }
                }
            }
            AuditKind::Lusin => {
                for &p in &cfg.p_values {
                    let sys = system.clone().expect("system built");
                    let params = params.clone();
                    jobs.push(Job {
                        key: format!("lusin|p={p}"),
                        run: Box::new(move || lusin_job(&sys, p, seed, &params)),
                    });
                }
            }
        }
    }
    jobs
}

fn integral_rep_job(
    sys: &SpectralSystem,
    a: f64,
    seed: u64,
    params: &crate::config::AuditParams,
) -> AuditReport {
    let rule = TimeRule::default();
    let mut cases = Vec::new();

    // single excited mode: both sides reduce to one term
    if let Some(k) = sys.eigenvalues().iter().position(|&lam| lam > KERNEL_TOL) {
        let f = SpectralCoeffs::unit(sys.n_modes(), k);
        match integral_rep_audit(sys, a, &f, &f, &rule) {
            Ok(r) => cases.push(r),
            Err(e) => cases.push(audit_error_report(
                "integral-rep",
                sys.name(),
                &e.to_string(),
            )),
        }
    }

    let fs = TestFunctionSet::generate(
        sys,
        seed,
        params.integral_rep_pairs,
        params.integral_rep_decay,
        0.0,
    );
    let ws = TestFunctionSet::generate_forms(
        sys,
        seed.wrapping_add(1),
        params.integral_rep_pairs,
        params.integral_rep_decay,
    );
    for (f, w) in fs.functions().iter().zip(ws.functions()) {
        match integral_rep_audit(sys, a, f, w, &rule) {
            Ok(r) => cases.push(r),
            Err(e) => cases.push(audit_error_report(
                "integral-rep",
                sys.name(),
                &e.to_string(),
            )),
        }
    }
    AuditReport::merge("integral-rep", cases)
}

fn bilinear_job(
    sys: &SpectralSystem,
    p: f64,
    a: f64,
    seed: u64,
    params: &crate::config::AuditParams,
) -> AuditReport {
    let rule = TimeRule::default();
    let fs = TestFunctionSet::generate(sys, seed, params.bilinear_pairs, params.bilinear_decay, a);
    let ws = TestFunctionSet::generate_forms(
        sys,
        seed.wrapping_add(1),
        params.bilinear_pairs,
        params.bilinear_decay,
    );
    let mut cases = Vec::new();
    for (f, w) in fs.functions().iter().zip(ws.functions()) {
        match bilinear_audit(sys, p, a, f, w, &rule) {
            Ok(r) => cases.push(r),
            Err(e) => cases.push(audit_error_report("bilinear", sys.name(), &e.to_string())),
        }
    }
    AuditReport::merge("bilinear", cases)
}

fn lusin_job(
    sys: &SpectralSystem,
    p: f64,
    seed: u64,
    params: &crate::config::AuditParams,
) -> AuditReport {
    let alpha = params
        .lusin_alpha
        .filter(|&al| al < p.min(2.0))
        .unwrap_or_else(|| 0.5 * (1.0 + p.min(2.0)));
    let pairs = seeded_pairs(seed, params.lusin_pairs, sys.grid().len());
    let tests = TestFunctionSet::generate(sys, seed, params.lusin_functions, 1.0, 0.0);
    let mut cases = Vec::new();
    for f in tests.functions() {
        match lusin_audit(sys, f, p, alpha, &params.lusin_s_grid, &pairs) {
            Ok(r) => cases.push(r),
            Err(e) => cases.push(audit_error_report("lusin", sys.name(), &e.to_string())),
        }
    }
    AuditReport::merge("lusin", cases)
}

pub fn seeded_pairs(seed: u64, count: usize, grid_len: usize) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x70617273);
    let mut pairs = Vec::with_capacity(count);
    while pairs.len() < count {
        let i = rng.gen_range(0..grid_len);
        let j = rng.gen_range(0..grid_len);
        if i != j {
            pairs.push((i, j));
        }
    }
    pairs
}

fn construction_failure(audit: &str, space: &str, err: &BuildError) -> AuditReport {
    let mut report = AuditReport::new(
        audit,
        space,
        vec![],
        vec![],
        named("construction", 0.0),
        -1.0,
        0.0,
    );
    report
        .flags
        .push(format!("system construction failed: {err}"));
    report
}

fn audit_error_report(audit: &str, space: &str, message: &str) -> AuditReport {
    let mut report = AuditReport::new(
        audit,
        space,
        vec![],
        vec![],
        named("input_validation", 0.0),
        -1.0,
        0.0,
    );
    report.flags.push(message.to_string());
    report
}

/// Exit-status contract: zero exactly when every report passed.
pub fn exit_code(reports: &[AuditReport]) -> i32 {
    if reports.iter().all(|r| r.passed) {
        0
    } else {
        1
    }
}

fn ensure_param(report: &mut AuditReport, name: &str, value: f64) {
    if report.parameter(name).is_none() {
        report.parameters.push(NamedValue {
            name: name.to_string(),
            value,
        });
    }
}

// ---------------------------------------------------------------------------
// persistence
// ---------------------------------------------------------------------------

fn slug(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut last_dash = true;
    for ch in text.chars() {
        if ch.is_ascii_alphanumeric() || ch == '.' {
            out.push(ch.to_ascii_lowercase());
            last_dash = false;
        } else if !last_dash {
            out.push('-');
            last_dash = true;
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    if out.is_empty() {
        out.push_str("na");
    }
    out
}

fn fmt_value(v: Option<f64>) -> String {
    match v {
        None => "na".to_string(),
        Some(v) if v == v.trunc() && v.abs() < 1e15 => format!("{}", v as i64),
        Some(v) => format!("{v}"),
    }
}

pub fn report_filename(report: &AuditReport) -> String {
    format!(
        "{}__{}__p{}__a{}__s{}.json",
        slug(&report.audit_name),
        slug(&report.space),
        fmt_value(report.parameter("p")),
        fmt_value(report.parameter("a")),
        fmt_value(report.parameter("seed")),
    )
}

/// Writes one JSON file per report plus a flat `summary.csv`. Returns the
/// paths written, JSON files first.
pub fn write_reports(reports: &[AuditReport], output_dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(output_dir).map_err(|e| {
        std::io::Error::new(
            e.kind(),
            format!(
                "cannot create output directory {}: {e}",
                output_dir.display()
            ),
        )
    })?;
    let mut paths = Vec::new();
    for report in reports {
        let path = output_dir.join(report_filename(report));
        let json = serde_json::to_string_pretty(report).expect("reports serialize");
        write_file(&path, json + "\n")?;
        paths.push(path);
    }
    let csv_path = output_dir.join("summary.csv");
    let mut csv = String::from(
        "audit_name,space,p,a,seed,bound_name,bound,margin,tolerance,passed,runtime_ms,flags,observed\n",
    );
    for r in reports {
        let observed = r
            .observed
            .iter()
            .map(|nv| format!("{}={}", nv.name, nv.value))
            .collect::<Vec<_>>()
            .join(";");
        let flags = r.flags.join("|").replace(',', ";");
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.audit_name,
            slug(&r.space),
            fmt_value(r.parameter("p")),
            fmt_value(r.parameter("a")),
            fmt_value(r.parameter("seed")),
            r.bound.name,
            r.bound.value,
            r.margin,
            r.tolerance,
            r.passed,
            r.runtime_ms,
            flags,
            observed
        ));
    }
    write_file(&csv_path, csv)?;
    paths.push(csv_path);
    Ok(paths)
}

fn write_file(path: &Path, contents: String) -> std::io::Result<()> {
    let mut file = std::fs::File::create(path).map_err(|e| {
        std::io::Error::new(e.kind(), format!("cannot write {}: {e}", path.display()))
    })?;
    file.write_all(contents.as_bytes())
        .map_err(|e| std::io::Error::new(e.kind(), format!("cannot write {}: {e}", path.display())))
}
