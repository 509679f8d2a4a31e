//! Command-line runner for the cooperative cell-free ISAC simulator.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use cfisac::harness::{
    emit_results, run_sweep, run_trial, EmitFormat, Method, SweepSpec, TrialStatus,
};
use cfisac::scenario::NetworkConfig;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "cfisac",
    version,
    about = "Joint BS mode selection, beamforming and receive-filter design \
             for cooperative cell-free ISAC networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one selection method on one scenario draw and print the record
    Run {
        /// Network config (JSON)
        #[arg(long)]
        config: PathBuf,
        /// cc | sc | joint | random | exhaustive
        #[arg(long)]
        method: String,
        /// Scenario seed; defaults to the config's seed field
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a Monte Carlo sweep from a spec file and write result files
    Sweep {
        /// Sweep spec (JSON)
        #[arg(long)]
        spec: PathBuf,
        /// Output directory for results.csv / results.json
        #[arg(long)]
        out: PathBuf,
        /// csv | json | both
        #[arg(long, default_value = "both")]
        format: String,
        /// Worker threads (0 = automatic)
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Compare every heuristic against the exhaustive oracle (J <= 10)
    OracleCompare {
        /// Network config (JSON)
        #[arg(long)]
        config: PathBuf,
        /// Number of paired trials
        #[arg(long)]
        trials: usize,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config, method, seed } => {
            let cfg = NetworkConfig::from_json_file(&config)
                .with_context(|| format!("loading config {}", config.display()))?;
            let method = Method::parse(&method)?;
            let seed = seed.unwrap_or(cfg.seed);
            let record = run_trial(&cfg, method, seed)?;
            println!("{}", serde_json::to_string_pretty(&record)?);
            Ok(())
        }
        Command::Sweep { spec, out, format, workers } => {
            let spec = SweepSpec::from_json_file(&spec)
                .with_context(|| format!("loading sweep spec {}", spec.display()))?;
            let format = EmitFormat::parse(&format)?;
            let result = run_sweep(&spec, workers)?;
            let written = emit_results(&result, &out, format)?;
            println!(
                "{:<12} {:>10} {:>6} {:>14} {:>12}",
                "method", "value", "ok", "mean_obj_db", "std_err"
            );
            for agg in &result.aggregates {
                println!(
                    "{:<12} {:>10.4} {:>3}/{:<3} {:>14} {:>12}",
                    agg.method.as_str(),
                    agg.value,
                    agg.num_ok,
                    agg.num_trials,
                    agg.mean_objective_db
                        .map(|v| format!("{v:.4}"))
                        .unwrap_or_else(|| "-".into()),
                    agg.std_error
                        .map(|v| format!("{v:.3e}"))
                        .unwrap_or_else(|| "-".into()),
                );
            }
            for path in written {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::OracleCompare { config, trials } => {
            let cfg = NetworkConfig::from_json_file(&config)
                .with_context(|| format!("loading config {}", config.display()))?;
            if cfg.num_bs > 10 {
                bail!("oracle-compare requires J <= 10, got {}", cfg.num_bs);
            }
            if trials == 0 {
                bail!("oracle-compare needs at least one trial");
            }
            oracle_compare(&cfg, trials)
        }
    }
}

fn oracle_compare(cfg: &NetworkConfig<f64>, trials: usize) -> Result<()> {
    let heuristics = [
        Method::CommCentric,
        Method::SensingCentric,
        Method::Joint,
        Method::Random,
    ];
    struct Tally {
        ok: usize,
        sum: f64,
        gap_db_sum: f64,
        mode_hits: usize,
    }
    let mut tallies: Vec<Tally> = (0..heuristics.len())
        .map(|_| Tally { ok: 0, sum: 0.0, gap_db_sum: 0.0, mode_hits: 0 })
        .collect();
    let mut oracle_ok = 0usize;
    let mut oracle_sum = 0.0;

    for t in 0..trials {
        let seed = cfg.seed + t as u64;
        let oracle = run_trial(cfg, Method::Exhaustive, seed)?;
        let (oracle_obj, oracle_mode) = match (oracle.status, oracle.objective) {
            (TrialStatus::Ok, Some(obj)) => {
                oracle_ok += 1;
                oracle_sum += obj;
                (obj, oracle.mode_bits.clone())
            }
            _ => continue,
        };
        for (mi, &method) in heuristics.iter().enumerate() {
            let record = run_trial(cfg, method, seed)?;
            if let (TrialStatus::Ok, Some(obj)) = (record.status, record.objective) {
                tallies[mi].ok += 1;
                tallies[mi].sum += obj;
                tallies[mi].gap_db_sum +=
                    10.0 * (oracle_obj.max(1e-300) / obj.max(1e-300)).log10();
                if record.mode_bits == oracle_mode {
                    tallies[mi].mode_hits += 1;
                }
            }
        }
    }

    println!(
        "{:<12} {:>6} {:>14} {:>12} {:>12}",
        "method", "ok", "mean_obj_db", "gap_db", "oracle_mode"
    );
    if oracle_ok > 0 {
        println!(
            "{:<12} {:>6} {:>14.4} {:>12.4} {:>9}/{}",
            "exhaustive",
            oracle_ok,
            10.0 * (oracle_sum / oracle_ok as f64).log10(),
            0.0,
            oracle_ok,
            oracle_ok
        );
    }
    for (mi, &method) in heuristics.iter().enumerate() {
        let t = &tallies[mi];
        if t.ok > 0 {
            println!(
                "{:<12} {:>6} {:>14.4} {:>12.4} {:>9}/{}",
                method.as_str(),
                t.ok,
                10.0 * (t.sum / t.ok as f64).log10(),
                t.gap_db_sum / t.ok as f64,
                t.mode_hits,
                t.ok
            );
        } else {
            println!("{:<12} {:>6} {:>14} {:>12} {:>12}", method.as_str(), 0, "-", "-", "-");
        }
    }
    Ok(())
}
