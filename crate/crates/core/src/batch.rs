//! Batch execution: repeated seeded runs, scenario sweeps, aggregation, and
//! the manifest that makes every output reproducible.
//!
//! A sweep writes its manifest *before* any run starts; re-running from the
//! manifest regenerates identical outputs, since each run is a pure function
//! of its embedded config and seed.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::engine::{run_one, Simulation};
use crate::metrics::{AccuracyOutcome, RunSummary};
use crate::stats::{median, percentile};
use crate::trace::CsvTraceWriter;
use crate::Error;

/// Aggregate statistics over one scenario's repetitions.
#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    pub runs: usize,
    pub accuracy: f64,
    pub undecided_fraction: f64,
    pub convergence_time_median_s: f64,
    pub convergence_time_p25_s: f64,
    pub convergence_time_p75_s: f64,
    pub steady_subset_median: f64,
    pub steady_subset_p25: f64,
    pub steady_subset_p75: f64,
    pub morans_i_median: Option<f64>,
    pub messages_sent_median: f64,
}

/// Medians and quartiles over run summaries. Undecided runs count against
/// accuracy and are censored at the run horizon for time statistics.
pub fn aggregate(summaries: &[RunSummary], horizon_s: f64) -> Aggregate {
    assert!(!summaries.is_empty());
    let n = summaries.len() as f64;
    let correct = summaries
        .iter()
        .filter(|s| s.outcome == AccuracyOutcome::Correct)
        .count() as f64;
    let undecided = summaries
        .iter()
        .filter(|s| s.outcome == AccuracyOutcome::Undecided)
        .count() as f64;
    let times: Vec<f64> = summaries
        .iter()
        .map(|s| s.convergence_time_or(horizon_s))
        .collect();
    let subsets: Vec<f64> = summaries.iter().map(|s| s.steady_subset_size).collect();
    let morans: Vec<f64> = summaries.iter().filter_map(|s| s.morans_i).collect();
    let msgs: Vec<f64> = summaries.iter().map(|s| s.messages_sent as f64).collect();
    Aggregate {
        runs: summaries.len(),
        accuracy: correct / n,
        undecided_fraction: undecided / n,
        convergence_time_median_s: median(&times),
        convergence_time_p25_s: percentile(&times, 0.25),
        convergence_time_p75_s: percentile(&times, 0.75),
        steady_subset_median: median(&subsets),
        steady_subset_p25: percentile(&subsets, 0.25),
        steady_subset_p75: percentile(&subsets, 0.75),
        morans_i_median: if morans.is_empty() {
            None
        } else {
            Some(median(&morans))
        },
        messages_sent_median: median(&msgs),
    }
}

/// Runs `cfg.repetitions` seeds (`seed`, `seed+1`, ...), optionally in
/// parallel. Results are ordered by seed either way.
pub fn run_batch(cfg: &SimConfig, parallel: bool) -> Result<Vec<RunSummary>, Error> {
    cfg.validate()?;
    let seeds: Vec<u64> = (0..cfg.repetitions as u64).map(|r| cfg.seed + r).collect();
    if parallel {
        seeds.par_iter().map(|&s| run_one(cfg, s)).collect()
    } else {
        seeds.iter().map(|&s| run_one(cfg, s)).collect()
    }
}

/// Like [`run_batch`], writing per-run trace directories under `out_dir`.
pub fn run_batch_traced(cfg: &SimConfig, out_dir: &Path) -> Result<Vec<RunSummary>, Error> {
    cfg.validate()?;
    let seeds: Vec<u64> = (0..cfg.repetitions as u64).map(|r| cfg.seed + r).collect();
    seeds
        .par_iter()
        .map(|&seed| {
            let run_dir = out_dir.join(format!("run_{seed:05}"));
            let mut writer = CsvTraceWriter::create(&run_dir)?;
            Simulation::new(cfg, seed)?.run(Some(&mut writer))
        })
        .collect()
}

/// One sweep scenario: a label, the full effective config, and its seeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub label: String,
    pub config: SimConfig,
}

impl Scenario {
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.config.repetitions as u64)
            .map(|r| self.config.seed + r)
            .collect()
    }
}

/// The audit record written before execution; fully determines every run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub axis: Option<String>,
    pub base: SimConfig,
    pub scenarios: Vec<Scenario>,
}

impl Manifest {
    /// Expands a sweep axis into scenarios. With no axis, the manifest holds
    /// the single base scenario.
    pub fn plan(base: &SimConfig, sweep: Option<(&str, &[String])>) -> Result<Manifest, Error> {
        base.validate()?;
        let scenarios = match sweep {
            None => vec![Scenario {
                label: "base".to_string(),
                config: base.clone(),
            }],
            Some((_, [])) => {
                return Err(Error::config("sweep", "empty value list"));
            }
            Some((axis, values)) => values
                .iter()
                .map(|value| {
                    let mut config = base.clone();
                    config.apply_kv(axis, value)?;
                    config.validate()?;
                    Ok(Scenario {
                        label: format!("{axis}={value}"),
                        config,
                    })
                })
                .collect::<Result<Vec<_>, Error>>()?,
        };
        Ok(Manifest {
            axis: sweep.map(|(a, _)| a.to_string()),
            base: base.clone(),
            scenarios,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), Error> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| Error::Parse(format!("manifest serialization: {e}")))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Manifest, Error> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Parse(format!("manifest: {e}")))
    }
}

/// Result of one executed scenario.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub label: String,
    pub summaries: Vec<RunSummary>,
    pub aggregate: Aggregate,
}

/// Executes every scenario of a manifest, writing `runs.csv`,
/// `aggregate.csv`, and optional traces into per-scenario directories.
pub fn execute_manifest(
    manifest: &Manifest,
    out_dir: Option<&Path>,
    traces: bool,
) -> Result<Vec<ScenarioResult>, Error> {
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        manifest.save(&dir.join("manifest.toml"))?;
    }
    let mut results = Vec::new();
    for scenario in &manifest.scenarios {
        let scenario_dir = out_dir.map(|d| d.join(sanitize(&scenario.label)));
        let summaries = match (&scenario_dir, traces) {
            (Some(dir), true) => {
                std::fs::create_dir_all(dir)?;
                run_batch_traced(&scenario.config, dir)?
            }
            _ => run_batch(&scenario.config, true)?,
        };
        let agg = aggregate(&summaries, scenario.config.max_duration_s);
        if let Some(dir) = &scenario_dir {
            std::fs::create_dir_all(dir)?;
            write_runs_csv(&dir.join("runs.csv"), &summaries)?;
            write_aggregate_csv(&dir.join("aggregate.csv"), &scenario.label, &agg)?;
        }
        results.push(ScenarioResult {
            label: scenario.label.clone(),
            summaries,
            aggregate: agg,
        });
    }
    if let Some(dir) = out_dir {
        let mut table = BufWriter::new(File::create(dir.join("sweep_aggregate.csv"))?);
        writeln!(table, "{}", aggregate_header())?;
        for result in &results {
            writeln!(table, "{}", aggregate_row(&result.label, &result.aggregate))?;
        }
    }
    Ok(results)
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '.' || c == '-' || c == '=' { c } else { '_' })
        .collect()
}

pub fn write_runs_csv(path: &Path, summaries: &[RunSummary]) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record([
        "seed", "converged", "decision", "outcome", "convergence_time_s",
        "steady_subset_size", "morans_i", "messages_sent", "ticks",
        "final_subset_param",
    ])?;
    for s in summaries {
        w.write_record([
            s.seed.to_string(),
            (s.converged as u8).to_string(),
            s.decision.map(|c| c.as_index().to_string()).unwrap_or_else(|| "".into()),
            format!("{:?}", s.outcome).to_lowercase(),
            s.convergence_time_s.map(|t| format!("{t:.1}")).unwrap_or_else(|| "".into()),
            format!("{:.1}", s.steady_subset_size),
            s.morans_i.map(|m| format!("{m:.4}")).unwrap_or_else(|| "".into()),
            s.messages_sent.to_string(),
            s.ticks.to_string(),
            s.final_subset_param.map(|v| v.to_string()).unwrap_or_else(|| "".into()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn aggregate_header() -> String {
    "scenario,runs,accuracy,undecided_fraction,conv_time_median_s,conv_time_p25_s,conv_time_p75_s,\
     subset_median,subset_p25,subset_p75,morans_i_median,messages_median"
        .to_string()
}

fn aggregate_row(label: &str, a: &Aggregate) -> String {
    format!(
        "{label},{},{:.4},{:.4},{:.1},{:.1},{:.1},{:.1},{:.1},{:.1},{},{:.0}",
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
            .map(|m| format!("{m:.4}"))
            .unwrap_or_else(|| "".into()),
        a.messages_sent_median,
    )
}

pub fn write_aggregate_csv(path: &Path, label: &str, agg: &Aggregate) -> Result<(), Error> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", aggregate_header())?;
    writeln!(out, "{}", aggregate_row(label, agg))?;
    Ok(())
}
