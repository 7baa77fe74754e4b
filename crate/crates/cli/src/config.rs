//! Experiment configuration: flat TOML key-values with one optional table
//! per audit. Unknown keys are rejected by name; invalid values produce a
//! message naming the offending key. Missing values fall back to the
//! defaults baked into [`ExperimentConfig::default_full`].

use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("key `space`: unknown space `{0}` (expected laguerre, bessel, hermite or tensor)")]
    UnknownSpace(String),
    #[error("key `audits`: unknown audit `{0}` (see `riesz-lab list-audits`)")]
    UnknownAudit(String),
    #[error("key `p_values`: p must exceed 1 (got {0})")]
    BadExponent(f64),
    #[error("key `a_values`: shifts must be non-negative (got {0})")]
    BadShift(f64),
    #[error("key `alpha`: Laguerre type must exceed -1 (got {0})")]
    BadLaguerreAlpha(f64),
    #[error("key `alpha`: Bessel type must be non-negative (got {0})")]
    BadBesselAlpha(f64),
    #[error("key `radius`: must be positive (got {0})")]
    BadRadius(f64),
    #[error("key `{key}`: must be at least {min} (got {got})")]
    TooSmall {
        key: &'static str,
        min: usize,
        got: usize,
    },
    #[error("key `audit.{audit}.{key}`: {message}")]
    BadAuditParam {
        audit: &'static str,
        key: &'static str,
        message: String,
    },
    #[error("audit `{0}` runs on one-dimensional systems only")]
    AuditNeedsOneDim(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditKind {
    Bellman,
    Semigroup,
    RieszMain,
    IntegralRep,
    Bilinear,
    Lusin,
}

impl AuditKind {
    pub const ALL: [AuditKind; 6] = [
        AuditKind::Bellman,
        AuditKind::Semigroup,
        AuditKind::RieszMain,
        AuditKind::IntegralRep,
        AuditKind::Bilinear,
        AuditKind::Lusin,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AuditKind::Bellman => "bellman",
            AuditKind::Semigroup => "semigroup",
            AuditKind::RieszMain => "riesz-main",
            AuditKind::IntegralRep => "integral-rep",
            AuditKind::Bilinear => "bilinear",
            AuditKind::Lusin => "lusin",
        }
    }

    pub fn parse(name: &str) -> Option<AuditKind> {
        Self::ALL.iter().copied().find(|k| k.name() == name)
    }

    pub fn description(&self) -> &'static str {
        match self {
            AuditKind::Bellman => {
                "Bellman derivative/Hessian lower bounds and their mollified analogues"
            }
            AuditKind::Semigroup => {
                "Poisson subordination vs spectral route, contraction, commutation, continuity"
            }
            AuditKind::RieszMain => {
                "two-sided L^p bound with the explicit constant 16 max(p, p/(p-1))"
            }
            AuditKind::IntegralRep => {
                "magnitude identity between the Riesz pairing and its space-time integral"
            }
            AuditKind::Bilinear => "bilinear embedding bound 4 max(p, q) ||f||_p ||omega||_q",
            AuditKind::Lusin => {
                "Lusin approximation: pointwise Lipschitz bound from heat maximal functions"
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum SpaceConfig {
    Laguerre {
        alpha: f64,
        n_modes: usize,
    },
    Bessel {
        alpha: f64,
        radius: f64,
        grid_size: usize,
        n_modes: usize,
    },
    Hermite {
        n_modes: usize,
    },
    Tensor {
        alphas: Vec<f64>,
        n_modes: usize,
        max_total_degree: usize,
    },
}

impl SpaceConfig {
    pub fn label(&self) -> String {
        match self {
            SpaceConfig::Laguerre { alpha, .. } => format!("laguerre(alpha={alpha})"),
            SpaceConfig::Bessel { alpha, .. } => format!("bessel(alpha={alpha})"),
            SpaceConfig::Hermite { .. } => "hermite".to_string(),
            SpaceConfig::Tensor { .. } => "tensor".to_string(),
        }
    }

    pub fn is_one_dimensional(&self) -> bool {
        !matches!(self, SpaceConfig::Tensor { .. })
    }
}

/// Per-audit knobs, all resolved to concrete values.
#[derive(Debug, Clone)]
pub struct AuditParams {
    pub riesz_main_count: usize,
    pub riesz_main_decay: f64,
    pub semigroup_count: usize,
    pub semigroup_t_values: Vec<f64>,
    pub semigroup_contraction_p: Vec<f64>,
    pub integral_rep_pairs: usize,
    pub integral_rep_decay: f64,
    pub bilinear_pairs: usize,
    pub bilinear_decay: f64,
    pub lusin_functions: usize,
    pub lusin_pairs: usize,
    pub lusin_alpha: Option<f64>,
    pub lusin_s_grid: Vec<f64>,
    pub bellman_samples: usize,
    pub bellman_mollified_samples: usize,
    pub bellman_epsilons: Vec<f64>,
    /// report-level slack overrides, by audit name
    pub slack: BTreeMap<String, f64>,
}

pub fn default_s_grid() -> Vec<f64> {
    let lo = 0.01_f64.ln();
    let hi = 10.0_f64.ln();
    (0..8)
        .map(|i| (lo + (hi - lo) * i as f64 / 7.0).exp())
        .collect()
}

impl Default for AuditParams {
    fn default() -> Self {
        AuditParams {
            riesz_main_count: 50,
            riesz_main_decay: 1.0,
            semigroup_count: 20,
            semigroup_t_values: vec![0.1, 1.0, 5.0],
            semigroup_contraction_p: vec![1.5, 2.0, 4.0, f64::INFINITY],
            integral_rep_pairs: 10,
            integral_rep_decay: 2.0,
            bilinear_pairs: 10,
            bilinear_decay: 2.0,
            lusin_functions: 10,
            lusin_pairs: 200,
            lusin_alpha: None,
            lusin_s_grid: default_s_grid(),
            bellman_samples: 10_000,
            bellman_mollified_samples: 400,
            bellman_epsilons: vec![1e-1, 1e-3],
            slack: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub space: SpaceConfig,
    pub audits: Vec<AuditKind>,
    pub p_values: Vec<f64>,
    pub a_values: Vec<f64>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub params: AuditParams,
    pub warnings: Vec<String>,
}

impl ExperimentConfig {
    /// The full default run: every audit on the Hermite system.
    pub fn default_full() -> Self {
        ExperimentConfig {
            space: SpaceConfig::Hermite { n_modes: 32 },
            audits: AuditKind::ALL.to_vec(),
            p_values: vec![2.0, 4.0],
            a_values: vec![0.0, 1.0],
            seed: 42,
            output_dir: PathBuf::from("reports"),
            params: AuditParams::default(),
            warnings: Vec::new(),
        }
    }
}

// ---------------------------------------------------------------------------
// raw TOML shape
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    space: String,
    audits: Vec<String>,
    p_values: Option<Vec<f64>>,
    a_values: Option<Vec<f64>>,
    seed: Option<u64>,
    output_dir: Option<String>,
    n_modes: Option<usize>,
    alpha: Option<f64>,
    radius: Option<f64>,
    grid_size: Option<usize>,
    alphas: Option<Vec<f64>>,
    max_total_degree: Option<usize>,
    audit: Option<BTreeMap<String, RawAuditParams>>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawAuditParams {
    test_count: Option<usize>,
    decay: Option<f64>,
    t_values: Option<Vec<f64>>,
    contraction_p: Option<Vec<f64>>,
    pairs: Option<usize>,
    functions: Option<usize>,
    alpha: Option<f64>,
    s_grid: Option<Vec<f64>>,
    samples: Option<usize>,
    mollified_samples: Option<usize>,
    epsilons: Option<Vec<f64>>,
    slack: Option<f64>,
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    resolve(raw)
}

fn resolve(raw: RawConfig) -> Result<ExperimentConfig, ConfigError> {
    let mut warnings = Vec::new();

    let mut audits = Vec::new();
    for name in &raw.audits {
        let kind = AuditKind::parse(name).ok_or_else(|| ConfigError::UnknownAudit(name.clone()))?;
        if !audits.contains(&kind) {
            audits.push(kind);
        }
    }

    let n_modes = raw.n_modes.unwrap_or(32);
    if n_modes < 2 {
        return Err(ConfigError::TooSmall {
            key: "n_modes",
            min: 2,
            got: n_modes,
        });
    }
    let space = match raw.space.as_str() {
        "laguerre" => {
            let alpha = raw.alpha.unwrap_or(0.0);
            if !(alpha > -1.0) {
                return Err(ConfigError::BadLaguerreAlpha(alpha));
            }
            if alpha < -0.5 && audits.iter().any(|k| *k != AuditKind::Bellman) {
                warnings.push(format!(
                    "alpha = {alpha} lies outside the curvature range alpha >= -1/2; the audited \
                     bounds are not guaranteed there, reports are flagged"
                ));
            }
            SpaceConfig::Laguerre { alpha, n_modes }
        }
        "bessel" => {
            let alpha = raw.alpha.unwrap_or(0.0);
            if !(alpha >= 0.0) {
                return Err(ConfigError::BadBesselAlpha(alpha));
            }
            let radius = raw.radius.unwrap_or(40.0);
            if !(radius > 0.0) {
                return Err(ConfigError::BadRadius(radius));
            }
            let grid_size = raw.grid_size.unwrap_or(400);
            if grid_size < 3 {
                return Err(ConfigError::TooSmall {
                    key: "grid_size",
                    min: 3,
                    got: grid_size,
                });
            }
            SpaceConfig::Bessel {
                alpha,
                radius,
                grid_size,
                n_modes: n_modes.min(grid_size),
            }
        }
        "hermite" => SpaceConfig::Hermite { n_modes },
        "tensor" => {
            let alphas = raw.alphas.unwrap_or_else(|| vec![0.0, 1.0]);
            if alphas.len() < 2 {
                return Err(ConfigError::TooSmall {
                    key: "alphas",
                    min: 2,
                    got: alphas.len(),
                });
            }
            for &alpha in &alphas {
                if !(alpha > -1.0) {
                    return Err(ConfigError::BadLaguerreAlpha(alpha));
                }
            }
            SpaceConfig::Tensor {
                alphas,
                n_modes: raw.n_modes.unwrap_or(8),
                max_total_degree: raw.max_total_degree.unwrap_or(8),
            }
        }
        other => return Err(ConfigError::UnknownSpace(other.to_string())),
    };

    for kind in [AuditKind::Bilinear, AuditKind::Lusin] {
        if audits.contains(&kind) && !space.is_one_dimensional() {
            return Err(ConfigError::AuditNeedsOneDim(kind.name()));
        }
    }

    let p_values = raw.p_values.unwrap_or_else(|| vec![2.0, 4.0]);
    for &p in &p_values {
        if !(p > 1.0) || !p.is_finite() {
            return Err(ConfigError::BadExponent(p));
        }
    }
    let a_values = raw.a_values.unwrap_or_else(|| vec![0.0, 1.0]);
    for &a in &a_values {
        if !(a >= 0.0) {
            return Err(ConfigError::BadShift(a));
        }
    }

    let mut params = AuditParams::default();
    if let Some(tables) = raw.audit {
        for (name, table) in tables {
            let kind =
                AuditKind::parse(&name).ok_or_else(|| ConfigError::UnknownAudit(name.clone()))?;
            apply_audit_table(&mut params, kind, table)?;
        }
    }
    if audits.contains(&AuditKind::Lusin) {
        if let Some(alpha) = params.lusin_alpha {
            for &p in &p_values {
                if alpha >= p.min(2.0) {
                    return Err(ConfigError::BadAuditParam {
                        audit: "lusin",
                        key: "alpha",
                        message: format!(
                            "must lie below min(2, p) for every audited p (got {alpha} with p = {p})"
                        ),
                    });
                }
            }
        }
    }

    Ok(ExperimentConfig {
        space,
        audits,
        p_values,
        a_values,
        seed: raw.seed.unwrap_or(42),
        output_dir: PathBuf::from(raw.output_dir.unwrap_or_else(|| "reports".to_string())),
        params,
        warnings,
    })
}

fn apply_audit_table(
    params: &mut AuditParams,
    kind: AuditKind,
    table: RawAuditParams,
) -> Result<(), ConfigError> {
    if let Some(slack) = table.slack {
        if !(slack >= 0.0) {
            return Err(ConfigError::BadAuditParam {
                audit: kind.name(),
                key: "slack",
                message: format!("must be non-negative (got {slack})"),
            });
        }
        params.slack.insert(kind.name().to_string(), slack);
    }
    match kind {
        AuditKind::RieszMain => {
            if let Some(c) = table.test_count {
                params.riesz_main_count = c;
            }
            if let Some(d) = table.decay {
                params.riesz_main_decay = positive(kind, "decay", d)?;
            }
        }
        AuditKind::Semigroup => {
            if let Some(c) = table.test_count {
                params.semigroup_count = c;
            }
            if let Some(t) = table.t_values {
                params.semigroup_t_values = t;
            }
            if let Some(p) = table.contraction_p {
                for &pi in &p {
                    if !(pi >= 1.0) {
                        return Err(ConfigError::BadAuditParam {
                            audit: kind.name(),
                            key: "contraction_p",
                            message: format!("exponents must be >= 1 (got {pi})"),
                        });
                    }
                }
                params.semigroup_contraction_p = p;
            }
        }
        AuditKind::IntegralRep => {
            if let Some(c) = table.pairs {
                params.integral_rep_pairs = c;
            }
            if let Some(d) = table.decay {
                if d < 2.0 {
                    return Err(ConfigError::BadAuditParam {
                        audit: kind.name(),
                        key: "decay",
                        message: format!(
                            "the represented function must lie in the generator's range; \
                             decay >= 2 required (got {d})"
                        ),
                    });
                }
                params.integral_rep_decay = d;
            }
        }
        AuditKind::Bilinear => {
            if let Some(c) = table.pairs {
                params.bilinear_pairs = c;
            }
            if let Some(d) = table.decay {
                params.bilinear_decay = positive(kind, "decay", d)?;
            }
        }
        AuditKind::Lusin => {
            if let Some(c) = table.functions {
                params.lusin_functions = c;
            }
            if let Some(c) = table.pairs {
                params.lusin_pairs = c;
            }
            if let Some(alpha) = table.alpha {
                if !(alpha > 1.0 && alpha < 2.0) {
                    return Err(ConfigError::BadAuditParam {
                        audit: kind.name(),
                        key: "alpha",
                        message: format!(
                            "must lie in (1, 2) and below every audited p (got {alpha})"
                        ),
                    });
                }
                params.lusin_alpha = Some(alpha);
            }
            if let Some(grid) = table.s_grid {
                if grid.iter().any(|&s| !(s > 0.0)) {
                    return Err(ConfigError::BadAuditParam {
                        audit: kind.name(),
                        key: "s_grid",
                        message: "heat times must be positive".to_string(),
                    });
                }
                params.lusin_s_grid = grid;
            }
        }
        AuditKind::Bellman => {
            if let Some(c) = table.samples {
                params.bellman_samples = c;
            }
            if let Some(c) = table.mollified_samples {
                params.bellman_mollified_samples = c;
            }
            if let Some(e) = table.epsilons {
                if e.iter().any(|&x| !(x > 0.0 && x <= 1.0)) {
                    return Err(ConfigError::BadAuditParam {
                        audit: kind.name(),
                        key: "epsilons",
                        message: "mollifier widths must lie in (0, 1]".to_string(),
                    });
                }
                params.bellman_epsilons = e;
            }
        }
    }
    Ok(())
}

fn positive(kind: AuditKind, key: &'static str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::BadAuditParam {
            audit: kind.name(),
            key,
            message: format!("must be positive (got {v})"),
        })
    }
}
