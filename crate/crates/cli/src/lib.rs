//! Batch driver for the riesz-core audit suites: parse experiment configs,
//! construct spectral systems, run audits and persist reports.

// `!(x > c)` guards reject NaN parameters, which `x <= c` would accept
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod runner;

pub use config::{parse_config, parse_config_str, AuditKind, ConfigError, ExperimentConfig};
pub use runner::{build_system, run_suite, write_reports};
