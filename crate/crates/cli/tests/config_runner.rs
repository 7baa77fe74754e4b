//! Config parsing, suite execution and report persistence.

use riesz_lab::config::{AuditKind, ExperimentConfig, SpaceConfig};
use riesz_lab::{parse_config, parse_config_str, run_suite, write_reports};
use std::path::Path;

#[test]
fn minimal_config_fills_defaults() {
    let cfg = parse_config_str(
        r#"
space = "hermite"
audits = ["riesz-main"]
p_values = [2.0, 4.0]
"#,
    )
    .unwrap();
    assert!(matches!(cfg.space, SpaceConfig::Hermite { n_modes: 32 }));
    assert_eq!(cfg.audits, vec![AuditKind::RieszMain]);
    assert_eq!(cfg.p_values, vec![2.0, 4.0]);
    assert_eq!(cfg.a_values, vec![0.0, 1.0]);
    assert_eq!(cfg.seed, 42);
    assert_eq!(cfg.params.riesz_main_count, 50);
    assert!(cfg.warnings.is_empty());
}

#[test]
fn exponent_at_or_below_one_is_rejected_by_name() {
    let err = parse_config_str(
        r#"
space = "hermite"
audits = ["riesz-main"]
p_values = [1.0]
"#,
    )
    .unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("p must exceed 1"), "{msg}");
    assert!(msg.contains("p_values"), "{msg}");
}

#[test]
fn unknown_keys_and_audits_are_named() {
    let err = parse_config_str(
        r#"
space = "hermite"
audits = ["riesz-main"]
banana = 3
"#,
    )
    .unwrap_err();
    assert!(err.to_string().contains("banana"), "{err}");

    let err = parse_config_str(
        r#"
space = "hermite"
audits = ["riesz-mian"]
"#,
    )
    .unwrap_err();
    assert!(err.to_string().contains("riesz-mian"), "{err}");

    let err = parse_config_str(
        r#"
space = "fourier"
audits = ["riesz-main"]
"#,
    )
    .unwrap_err();
    assert!(err.to_string().contains("fourier"), "{err}");
}

#[test]
fn missing_file_reports_the_path() {
    let err = parse_config(Path::new("/nonexistent/exp.toml")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/exp.toml"), "{err}");
}

#[test]
fn laguerre_outside_the_curvature_range_warns_but_proceeds() {
    let cfg = parse_config_str(
        r#"
space = "laguerre"
alpha = -0.7
audits = ["riesz-main"]
p_values = [2.0]
a_values = [0.0]
"#,
    )
    .unwrap();
    assert_eq!(cfg.warnings.len(), 1);
    assert!(cfg.warnings[0].contains("alpha"), "{}", cfg.warnings[0]);
    // the run carries the warning as a flag on every report
    let mut cfg = cfg;
    cfg.params.riesz_main_count = 5;
    let reports = run_suite(&cfg);
    assert!(!reports.is_empty());
    assert!(reports
        .iter()
        .all(|r| r.flags.iter().any(|f| f.contains("alpha"))));
}

#[test]
fn audit_tables_override_parameters_and_reject_bad_values() {
    let cfg = parse_config_str(
        r#"
space = "hermite"
audits = ["riesz-main", "lusin"]
p_values = [2.0]

[audit.riesz-main]
test_count = 7
decay = 1.5

[audit.lusin]
pairs = 50
alpha = 1.25
"#,
    )
    .unwrap();
    assert_eq!(cfg.params.riesz_main_count, 7);
    assert_eq!(cfg.params.riesz_main_decay, 1.5);
    assert_eq!(cfg.params.lusin_pairs, 50);
    assert_eq!(cfg.params.lusin_alpha, Some(1.25));

    let err = parse_config_str(
        r#"
space = "hermite"
audits = ["integral-rep"]

[audit.integral-rep]
decay = 1.0
"#,
    )
    .unwrap_err();
    assert!(err.to_string().contains("decay"), "{err}");
}

#[test]
fn bilinear_and_lusin_require_one_dimensional_spaces() {
    let err = parse_config_str(
        r#"
space = "tensor"
audits = ["bilinear"]
"#,
    )
    .unwrap_err();
    assert!(err.to_string().contains("bilinear"), "{err}");
}

#[test]
fn suite_is_deterministic_for_a_fixed_seed() {
    let mut cfg = ExperimentConfig::default_full();
    cfg.audits = vec![AuditKind::RieszMain, AuditKind::Semigroup];
    cfg.params.riesz_main_count = 10;
    cfg.params.semigroup_count = 5;
    cfg.p_values = vec![2.0];
    cfg.a_values = vec![0.0];
    let first = run_suite(&cfg);
    let second = run_suite(&cfg);
    assert_eq!(first.len(), second.len());
    for (a, b) in first.iter().zip(&second) {
        assert_eq!(a.audit_name, b.audit_name);
        assert_eq!(a.observed, b.observed);
        assert_eq!(a.margin, b.margin);
        assert_eq!(a.passed, b.passed);
    }
}

#[test]
fn construction_failure_becomes_a_failed_report() {
    let mut cfg = ExperimentConfig::default_full();
    // a Bessel grid too small for the requested modes cannot be built
    cfg.space = SpaceConfig::Bessel {
        alpha: 0.0,
        radius: 40.0,
        grid_size: 3,
        n_modes: 32,
    };
    cfg.audits = vec![AuditKind::RieszMain];
    let reports = run_suite(&cfg);
    assert_eq!(reports.len(), 1);
    assert!(!reports[0].passed);
    assert!(reports[0].flags.iter().any(|f| f.contains("construction")));
}

#[test]
fn reports_round_trip_to_disk() {
    let dir = tempfile::tempdir().unwrap();

    // empty report list: header-only CSV
    let paths = write_reports(&[], dir.path()).unwrap();
    assert_eq!(paths.len(), 1);
    let csv = std::fs::read_to_string(&paths[0]).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("audit_name,space,"));

    let mut cfg = ExperimentConfig::default_full();
    cfg.audits = vec![AuditKind::RieszMain];
    cfg.p_values = vec![2.0];
    cfg.a_values = vec![0.0];
    cfg.params.riesz_main_count = 5;
    let reports = run_suite(&cfg);
    let paths = write_reports(&reports, dir.path()).unwrap();
    assert_eq!(paths.len(), reports.len() + 1);
    let json = std::fs::read_to_string(&paths[0]).unwrap();
    assert!(json.contains("\"passed\": true"));
    assert!(json.contains("\"audit_name\": \"riesz-main\""));
    // file name embeds audit, space, p, a and seed
    let name = paths[0].file_name().unwrap().to_string_lossy().to_string();
    assert!(
        name.contains("riesz-main") && name.contains("p2") && name.contains("s42"),
        "{name}"
    );

    // a second run differs at most in runtime_ms
    let dir2 = tempfile::tempdir().unwrap();
    let reports2 = run_suite(&cfg);
    let paths2 = write_reports(&reports2, dir2.path()).unwrap();
    let strip = |text: &str| -> String {
        text.lines()
            .filter(|l| !l.contains("runtime_ms"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let a = std::fs::read_to_string(&paths[0]).unwrap();
    let b = std::fs::read_to_string(&paths2[0]).unwrap();
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn cli_binary_list_audits_and_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_riesz-lab");
    let out = std::process::Command::new(bin)
        .arg("list-audits")
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in [
        "bellman",
        "semigroup",
        "riesz-main",
        "integral-rep",
        "bilinear",
        "lusin",
    ] {
        assert!(text.contains(name), "missing {name}");
    }

    // a run over a tiny config exits zero and writes reports
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("exp.toml");
    std::fs::write(
        &config_path,
        r#"
space = "hermite"
audits = ["riesz-main"]
p_values = [2.0]
a_values = [0.0]

[audit.riesz-main]
test_count = 5
"#,
    )
    .unwrap();
    let out_dir = dir.path().join("reports");
    let out = std::process::Command::new(bin)
        .arg("run")
        .arg(&config_path)
        .arg("--out")
        .arg(&out_dir)
        .arg("--jobs")
        .arg("2")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out_dir.join("summary.csv").exists());

    // config errors exit with a distinct code
    let out = std::process::Command::new(bin)
        .arg("run")
        .arg(dir.path().join("missing.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_code_follows_the_pass_flags() {
    use riesz_core::report::{named, AuditReport};
    use riesz_lab::runner::exit_code;
    let pass = AuditReport::new("x", "-", vec![], vec![], named("b", 0.0), 1.0, 0.0);
    let fail = AuditReport::new("x", "-", vec![], vec![], named("b", 0.0), -1.0, 0.0);
    assert!(pass.passed && !fail.passed);
    assert_eq!(exit_code(std::slice::from_ref(&pass)), 0);
    assert_eq!(exit_code(&[pass, fail]), 1);
    assert_eq!(exit_code(&[]), 0);
}

#[test]
fn lusin_alpha_must_sit_below_every_audited_exponent() {
    let err = parse_config_str(
        r#"
space = "hermite"
audits = ["lusin"]
p_values = [1.5]

[audit.lusin]
alpha = 1.7
"#,
    )
    .unwrap_err();
    assert!(err.to_string().contains("alpha"), "{err}");
}

#[test]
fn laguerre_bellman_sweeps_pass_through_the_runner() {
    let cfg = parse_config_str(
        r#"
space = "laguerre"
alpha = 0.0
audits = ["bellman"]
p_values = [2.0, 4.0]

[audit.bellman]
samples = 2000
mollified_samples = 100
"#,
    )
    .unwrap();
    let reports = run_suite(&cfg);
    assert_eq!(reports.len(), 2);
    for r in &reports {
        assert!(r.passed, "p={:?} margin={}", r.parameter("p"), r.margin);
        assert!(r.observation("worst_slack").unwrap() >= -1e-12);
    }
}

#[test]
fn bessel_semigroup_audit_records_the_subordination_gap() {
    let cfg = parse_config_str(
        r#"
space = "bessel"
alpha = 0.0
audits = ["semigroup"]
a_values = [0.0]

[audit.semigroup]
test_count = 5
"#,
    )
    .unwrap();
    let reports = run_suite(&cfg);
    assert_eq!(reports.len(), 1);
    assert!(reports[0].passed);
    let gap = reports[0].observation("max_subordination_gap").unwrap();
    assert!(gap <= 1e-6, "gap {gap}");
}
