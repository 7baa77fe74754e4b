use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use riesz_lab::config::{AuditKind, ExperimentConfig, SpaceConfig};
use riesz_lab::runner::exit_code;
use riesz_lab::{parse_config, run_suite, write_reports};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "riesz-lab",
    about = "Runs numerical audits of Riesz transform bounds on truncated spectral systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every audit from an experiment config and persist reports
    Run {
        /// Path to a TOML experiment config
        config: PathBuf,
        /// Output directory (overrides the config's output_dir)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed override
        #[arg(long)]
        seed: Option<u64>,
        /// Cap on concurrent audit jobs
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run a single audit with default parameters
    Audit {
        /// Audit name (see list-audits)
        name: String,
        /// Space: laguerre, bessel, hermite or tensor
        #[arg(long)]
        space: String,
        /// Exponent p
        #[arg(long)]
        p: Option<f64>,
        /// Semigroup shift a
        #[arg(long)]
        a: Option<f64>,
        /// Type parameter for laguerre / bessel spaces
        #[arg(long)]
        alpha: Option<f64>,
        /// Seed
        #[arg(long)]
        seed: Option<u64>,
        /// Persist the report here as well as printing it
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the available audits
    ListAudits,
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            jobs,
        } => {
            let mut cfg = parse_config(&config)
                .with_context(|| format!("loading config {}", config.display()))?;
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            for warning in &cfg.warnings {
                eprintln!("warning: {warning}");
            }
            let reports = run_with_jobs(&cfg, jobs)?;
            let paths = write_reports(&reports, &cfg.output_dir)
                .with_context(|| format!("writing reports to {}", cfg.output_dir.display()))?;
            for r in &reports {
                let verdict = if r.passed { "PASS" } else { "FAIL" };
                println!(
                    "{verdict}  {:<14} {:<22} p={:<6} a={:<4} margin={:.3e}",
                    r.audit_name,
                    r.space,
                    display_param(r.parameter("p")),
                    display_param(r.parameter("a")),
                    r.margin
                );
            }
            println!(
                "{} report(s) written under {}",
                paths.len(),
                cfg.output_dir.display()
            );
            Ok(exit_code(&reports))
        }
        Command::Audit {
            name,
            space,
            p,
            a,
            alpha,
            seed,
            out,
        } => {
            let kind = AuditKind::parse(&name)
                .with_context(|| format!("unknown audit `{name}`, see `riesz-lab list-audits`"))?;
            let space = one_shot_space(&space, alpha)?;
            let mut cfg = ExperimentConfig::default_full();
            cfg.space = space;
            cfg.audits = vec![kind];
            if let Some(p) = p {
                if p <= 1.0 {
                    bail!("key `p`: p must exceed 1 (got {p})");
                }
                cfg.p_values = vec![p];
            }
            cfg.a_values = vec![a.unwrap_or(0.0)];
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let reports = run_suite(&cfg);
            println!("{}", serde_json::to_string_pretty(&reports)?);
            if let Some(out) = out {
                write_reports(&reports, &out)?;
            }
            Ok(exit_code(&reports))
        }
        Command::ListAudits => {
            for kind in AuditKind::ALL {
                println!("{:<14} {}", kind.name(), kind.description());
            }
            Ok(0)
        }
    }
}

fn run_with_jobs(
    cfg: &ExperimentConfig,
    jobs: Option<usize>,
) -> Result<Vec<riesz_core::AuditReport>> {
    match jobs {
        Some(n) if n >= 1 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .context("building the audit thread pool")?;
            Ok(pool.install(|| run_suite(cfg)))
        }
        Some(_) => bail!("--jobs must be at least 1"),
        None => Ok(run_suite(cfg)),
    }
}

fn one_shot_space(space: &str, alpha: Option<f64>) -> Result<SpaceConfig> {
    Ok(match space {
        "laguerre" => SpaceConfig::Laguerre {
            alpha: alpha.unwrap_or(0.0),
            n_modes: 32,
        },
        "bessel" => SpaceConfig::Bessel {
            alpha: alpha.unwrap_or(0.0),
            radius: 40.0,
            grid_size: 400,
            n_modes: 32,
        },
        "hermite" => SpaceConfig::Hermite { n_modes: 32 },
        "tensor" => SpaceConfig::Tensor {
            alphas: vec![alpha.unwrap_or(0.0), 1.0],
            n_modes: 8,
            max_total_degree: 8,
        },
        other => bail!("key `space`: unknown space `{other}`"),
    })
}

fn display_param(v: Option<f64>) -> String {
    match v {
        None => "-".to_string(),
        Some(v) => format!("{v}"),
    }
}
