//! Trace and summary output.
//!
//! A traced run writes four artifacts into its directory:
//!
//! * `robots.csv` - one row per tick per robot (pose, role, opinion,
//!   strategy fields),
//! * `ticks.csv` - one row per tick (subset size, opinion counts, message
//!   counters, leader evaluation state),
//! * `grid.txt` - the arena in the plain-text tile format,
//! * `summary.toml` and `heatmap.txt` - end-of-run record and the
//!   decision-maker dwell-time field.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::SimConfig;
use crate::environment::{Color, TileGrid};
use crate::metrics::{CoverageHeatmap, RunSummary};
use crate::roles::Role;
use crate::{Error, RobotId};

/// Per-robot trace row for one tick.
#[derive(Debug, Clone)]
pub struct RobotRow {
    pub id: RobotId,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub role: Role,
    pub opinion: Color,
    pub faulty: bool,
    pub disseminating: bool,
    pub hop: Option<u32>,
    pub subset_param: u32,
    pub alpha: f64,
    pub selection_p: f64,
}

/// Leader evaluation snapshot for one tick.
#[derive(Debug, Clone, Copy)]
pub struct LeaderRow {
    pub leader: RobotId,
    pub subset_param: u32,
    pub collected: usize,
    pub majority_ratio: Option<f64>,
    pub hold_timer: f64,
    pub decisions: usize,
}

/// Everything a sink sees about one tick.
pub struct TickView<'a> {
    pub tick: u64,
    pub time_s: f64,
    pub robots: &'a [RobotRow],
    pub leader: Option<LeaderRow>,
    pub members: u32,
    pub opinion_black: usize,
    pub opinion_white: usize,
    pub messages_sent: u64,
    pub messages_delivered: u64,
}

/// Receiver of per-run trace data.
pub trait TraceSink {
    fn on_start(&mut self, grid: &TileGrid, cfg: &SimConfig) -> Result<(), Error>;
    fn on_tick(&mut self, view: &TickView<'_>) -> Result<(), Error>;
    fn on_finish(&mut self, summary: &RunSummary, heatmap: &CoverageHeatmap) -> Result<(), Error>;
}

fn opinion_code(c: Color) -> usize {
    c.as_index()
}

/// CSV trace writer rooted at a run directory.
pub struct CsvTraceWriter {
    dir: PathBuf,
    robots: csv::Writer<BufWriter<File>>,
    ticks: csv::Writer<BufWriter<File>>,
}

impl CsvTraceWriter {
    pub fn create(dir: &Path) -> Result<CsvTraceWriter, Error> {
        std::fs::create_dir_all(dir)?;
        let robots = csv::Writer::from_writer(BufWriter::new(File::create(dir.join("robots.csv"))?));
        let ticks = csv::Writer::from_writer(BufWriter::new(File::create(dir.join("ticks.csv"))?));
        let mut writer = CsvTraceWriter {
            dir: dir.to_path_buf(),
            robots,
            ticks,
        };
        writer.robots.write_record([
            "tick", "robot", "x", "y", "heading", "role", "opinion", "faulty",
            "disseminating", "hop", "subset_param", "alpha", "selection_p",
        ])?;
        writer.ticks.write_record([
            "tick", "time_s", "members", "opinion_black", "opinion_white",
            "messages_sent", "messages_delivered", "leader", "leader_s",
            "collected", "majority_ratio", "hold_timer", "decisions",
        ])?;
        Ok(writer)
    }
}

impl TraceSink for CsvTraceWriter {
    fn on_start(&mut self, grid: &TileGrid, cfg: &SimConfig) -> Result<(), Error> {
        let mut grid_file = BufWriter::new(File::create(self.dir.join("grid.txt"))?);
        grid.write_text(&mut grid_file)?;
        std::fs::write(self.dir.join("config.toml"), cfg.to_toml_string())?;
        Ok(())
    }

    fn on_tick(&mut self, view: &TickView<'_>) -> Result<(), Error> {
        for row in view.robots {
            self.robots.write_record([
                view.tick.to_string(),
                row.id.to_string(),
                format!("{:.4}", row.x),
                format!("{:.4}", row.y),
                format!("{:.4}", row.heading),
                row.role.code().to_string(),
                opinion_code(row.opinion).to_string(),
                (row.faulty as u8).to_string(),
                (row.disseminating as u8).to_string(),
                row.hop.map(|h| h.to_string()).unwrap_or_else(|| "-1".into()),
                row.subset_param.to_string(),
                format!("{:.6}", row.alpha),
                format!("{:.3}", row.selection_p),
            ])?;
        }
        let leader = view.leader;
        self.ticks.write_record([
            view.tick.to_string(),
            format!("{:.1}", view.time_s),
            view.members.to_string(),
            view.opinion_black.to_string(),
            view.opinion_white.to_string(),
            view.messages_sent.to_string(),
            view.messages_delivered.to_string(),
            leader.map(|l| l.leader.to_string()).unwrap_or_else(|| "-1".into()),
            leader.map(|l| l.subset_param.to_string()).unwrap_or_else(|| "0".into()),
            leader.map(|l| l.collected.to_string()).unwrap_or_else(|| "0".into()),
            leader
                .and_then(|l| l.majority_ratio)
                .map(|r| format!("{r:.4}"))
                .unwrap_or_else(|| "".into()),
            leader.map(|l| format!("{:.1}", l.hold_timer)).unwrap_or_else(|| "0.0".into()),
            leader.map(|l| l.decisions.to_string()).unwrap_or_else(|| "0".into()),
        ])?;
        Ok(())
    }

    fn on_finish(&mut self, summary: &RunSummary, heatmap: &CoverageHeatmap) -> Result<(), Error> {
        self.robots.flush()?;
        self.ticks.flush()?;
        write_summary(&self.dir.join("summary.toml"), summary)?;
        write_heatmap(&self.dir.join("heatmap.txt"), heatmap)?;
        Ok(())
    }
}

/// One run summary as a TOML record.
pub fn write_summary(path: &Path, summary: &RunSummary) -> Result<(), Error> {
    let text = toml::to_string_pretty(summary)
        .map_err(|e| Error::Parse(format!("summary serialization: {e}")))?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Heatmap as a plain-text numeric grid, one row per line.
pub fn write_heatmap(path: &Path, heatmap: &CoverageHeatmap) -> Result<(), Error> {
    let mut out = BufWriter::new(File::create(path)?);
    let dim = heatmap.dim();
    for y in 0..dim {
        let row: Vec<String> = (0..dim)
            .map(|x| format!("{:.3}", heatmap.cells()[y * dim + x]))
            .collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}
