use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{error, info};

use simrsf::cli::{self, Method, RunManifest};
use simrsf::config::KvConfig;
use simrsf::evaluation::{compare_auc, parse_grid, AucCurve};
use simrsf::simgen::SimConfig;
use simrsf::Result;

#[derive(Parser)]
#[command(name = "simrsf", version, about = "Similarity-based random survival forests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides the `seed` key
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Extra `key=value` overrides, applied after the config file
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Number of records; overrides the `n` key
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run RSF and SB-RSF on one split and compare their AUC curves
    Run {
        #[command(flatten)]
        common: Common,
        /// Rerun from an earlier manifest's resolved configuration
        #[arg(long, conflicts_with = "config")]
        from_manifest: Option<PathBuf>,
    },
    /// Compute SB-RSF sampling weights
    Fit {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArgs,
    },
    /// Predict cumulative hazard functions for the test file
    Predict {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Sbrsf)]
        method: MethodArg,
        /// Precomputed weight matrix from `fit`
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Time-varying AUC of stored predictions
    Evaluate {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long, default_value = "1:20:1")]
        grid: String,
        /// Comma-separated categorical covariates
        #[arg(long, value_delimiter = ',')]
        categorical: Vec<String>,
        /// Output CSV
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare two AUC curves on their shared grid
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Clone)]
struct DataArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, value_delimiter = ',')]
    categorical: Vec<String>,
}

#[derive(ValueEnum, Clone, Copy)]
enum MethodArg {
    Rsf,
    Sbrsf,
}

fn load_config(common: &Common) -> Result<(KvConfig, PathBuf)> {
    let (mut cfg, base) = match &common.config {
        Some(p) => (
            KvConfig::load(p)?,
            p.parent().map(Path::to_path_buf).unwrap_or_default(),
        ),
        None => (KvConfig::new(), PathBuf::from(".")),
    };
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| simrsf::Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v.trim());
    }
    if let Some(s) = common.seed {
        cfg.set("seed", s);
    }
    Ok((cfg, base))
}

fn load_pair(data: &DataArgs) -> Result<(simrsf::Dataset, simrsf::Dataset)> {
    Ok((
        cli::load_dataset(&data.train, &data.categorical)?,
        cli::load_dataset(&data.test, &data.categorical)?,
    ))
}

fn report(m: &RunManifest) {
    for s in &m.stages {
        info!("stage {} {:.3}s", s.name, s.seconds);
    }
    if !m.summary.is_empty() {
        println!("{}", serde_json::Value::Object(m.summary.clone()));
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { common, n } => {
            let (mut cfg, _) = load_config(&common)?;
            if let Some(n) = n {
                cfg.set("n", n);
            }
            let sim = SimConfig::from_kv(&cfg)?;
            report(&cli::cmd_simulate(&sim, &common.out, common.workers)?);
        }
        Command::Run { common, from_manifest } => {
            let (cfg, base) = match &from_manifest {
                Some(p) => {
                    let m = RunManifest::load(p)?;
                    let mut cfg = KvConfig::parse(&m.config)?;
                    if let Some(s) = common.seed {
                        cfg.set("seed", s);
                    }
                    (cfg, PathBuf::from("."))
                }
                None => load_config(&common)?,
            };
            let outcome = cli::cmd_run(&cfg, &base, &common.out, common.workers)?;
            report(&outcome.manifest);
        }
        Command::Fit { common, data } => {
            let (cfg, _) = load_config(&common)?;
            let (train, test) = load_pair(&data)?;
            report(&cli::cmd_fit(&cfg, &train, &test, &common.out, common.workers)?);
        }
        Command::Predict {
            common,
            data,
            method,
            weights,
        } => {
            let (cfg, _) = load_config(&common)?;
            let (train, test) = load_pair(&data)?;
            let method = match method {
                MethodArg::Rsf => Method::Rsf,
                MethodArg::Sbrsf => Method::Sbrsf,
            };
            let m = cli::cmd_predict(
                &cfg,
                &train,
                &test,
                method,
                weights.as_deref(),
                &common.out,
                common.workers,
            )?;
            report(&m);
        }
        Command::Evaluate {
            predictions,
            test,
            grid,
            categorical,
            out,
        } => {
            let test = cli::load_dataset(&test, &categorical)?;
            let curve = cli::cmd_evaluate(&predictions, &test, &parse_grid(&grid)?)?;
            curve.write_csv(&out)?;
            match curve.mean() {
                Some(m) => println!("mean AUC {m:.4} over {} grid points", curve.n_defined()),
                None => println!("AUC undefined at every grid point"),
            }
        }
        Command::Compare { a, b, out } => {
            let cmp = compare_auc(&AucCurve::read_csv(&a)?, &AucCurve::read_csv(&b)?)?;
            cmp.write_csv(&out)?;
            match (cmp.mean_diff(), cmp.win_fraction()) {
                (Some(d), Some(w)) => println!(
                    "mean diff {d:+.4}, a higher at {}/{} grid points ({w:.2})",
                    cmp.n_a_wins, cmp.n_compared
                ),
                _ => println!("no grid points where both curves are defined"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
