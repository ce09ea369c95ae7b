//! Experiment runner CLI.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use subcdm::batch::{execute_manifest, Manifest};
use subcdm::{Error, SimConfig};

/// Swarm collective-decision simulator: seeded batches, disturbance
/// scenarios, and parameter sweeps.
#[derive(Parser, Debug)]
#[command(name = "subcdm", version, about)]
struct Cli {
    /// TOML config file; unset fields keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Decision strategy: full-swarm | leader-based | distributed.
    #[arg(long)]
    strategy: Option<String>,

    /// Fraction of black tiles (task difficulty).
    #[arg(long)]
    black_fraction: Option<f64>,

    /// Base seed; repetition r runs with seed + r.
    #[arg(long)]
    seed: Option<u64>,

    /// Repetitions per scenario.
    #[arg(long)]
    reps: Option<u32>,

    /// Ground-sensor flip probability.
    #[arg(long)]
    noise_p: Option<f64>,

    /// Ticks between message exchanges.
    #[arg(long)]
    delivery_period: Option<u32>,

    /// Per-message per-receiver drop probability.
    #[arg(long)]
    drop_prob: Option<f64>,

    /// Malfunction probability per role-reassignment trial.
    #[arg(long)]
    fault_prob: Option<f64>,

    /// Malfunction duration in seconds.
    #[arg(long)]
    fault_duration: Option<f64>,

    /// Elect the leader by min-id flooding instead of picking one at random.
    #[arg(long)]
    leader_election: bool,

    /// Maximum run duration in seconds.
    #[arg(long)]
    max_duration: Option<f64>,

    /// Output directory for manifest, per-run records, and aggregates.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Sweep one config field: AXIS=V1,V2,...
    #[arg(long)]
    sweep: Option<String>,

    /// Re-run every scenario recorded in an existing manifest.
    #[arg(long, conflicts_with = "sweep")]
    from_manifest: Option<PathBuf>,

    /// Write per-run CSV traces (large).
    #[arg(long)]
    trace: bool,

    /// Generic override, repeatable: KEY=VALUE (any config field).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn build_config(cli: &Cli) -> Result<SimConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => SimConfig::from_toml_str(&std::fs::read_to_string(path)?)?,
        None => SimConfig::default(),
    };
    if let Some(v) = &cli.strategy {
        cfg.strategy = v.parse()?;
    }
    if let Some(v) = cli.black_fraction {
        cfg.black_fraction = v;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.reps {
        cfg.repetitions = v;
    }
    if let Some(v) = cli.noise_p {
        cfg.noise_p = v;
    }
    if let Some(v) = cli.delivery_period {
        cfg.delivery_period = v;
    }
    if let Some(v) = cli.drop_prob {
        cfg.drop_probability = v;
    }
    if let Some(v) = cli.fault_prob {
        cfg.fault_prob = v;
    }
    if let Some(v) = cli.fault_duration {
        cfg.fault_duration_s = v;
    }
    if cli.leader_election {
        cfg.leader_election = true;
    }
    if let Some(v) = cli.max_duration {
        cfg.max_duration_s = v;
    }
    for kv in &cli.set {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| Error::config("set", format!("`{kv}` is not KEY=VALUE")))?;
        cfg.apply_kv(key.trim(), value.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_sweep(spec: &str) -> Result<(String, Vec<String>), Error> {
    let (axis, values) = spec
        .split_once('=')
        .ok_or_else(|| Error::config("sweep", format!("`{spec}` is not AXIS=V1,V2,...")))?;
    let values: Vec<String> = values
        .split(',')
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .collect();
    if values.is_empty() {
        return Err(Error::config("sweep", "empty value list"));
    }
    Ok((axis.trim().to_string(), values))
}

fn real_main() -> Result<(), Error> {
    let cli = Cli::parse();

    let manifest = if let Some(path) = &cli.from_manifest {
        Manifest::load(path)?
    } else {
        let cfg = build_config(&cli)?;
        match &cli.sweep {
            Some(spec) => {
                let (axis, values) = parse_sweep(spec)?;
                Manifest::plan(&cfg, Some((&axis, &values)))?
            }
            None => Manifest::plan(&cfg, None)?,
        }
    };

    let results = execute_manifest(&manifest, cli.out.as_deref(), cli.trace)?;

    println!(
        "scenario | runs | accuracy | undecided | conv-time med [p25,p75] s | subset med [p25,p75] | Moran's I"
    );
    for result in &results {
        let a = &result.aggregate;
        println!(
            "{} | {} | {:.2} | {:.2} | {:.1} [{:.1}, {:.1}] | {:.1} [{:.1}, {:.1}] | {}",
            result.label,
            a.runs,
            a.accuracy,
            a.undecided_fraction,
            a.convergence_time_median_s,
            a.convergence_time_p25_s,
            a.convergence_time_p75_s,
            a.steady_subset_median,
            a.steady_subset_p25,
            a.steady_subset_p75,
            a.morans_i_median
                .map(|m| format!("{m:.3}"))
                .unwrap_or_else(|| "-".into()),
        );
    }
    if let Some(out) = &cli.out {
        println!("outputs written to {}", out.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
