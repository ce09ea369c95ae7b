//! Run instrumentation: convergence detection, spatial statistics, and
//! end-of-run summaries. Everything here observes the simulation; nothing
//! feeds back into robot behavior.

use serde::Serialize;

use crate::environment::Color;
use crate::stats::median;

#[derive(Debug, Clone, Copy)]
pub struct ConvergenceParams {
    /// Opinion share that counts as converging.
    pub share_threshold: f64,
    /// How long the share must hold, in seconds.
    pub hold_s: f64,
}

impl Default for ConvergenceParams {
    fn default() -> Self {
        ConvergenceParams {
            share_threshold: 0.8,
            hold_s: 30.0,
        }
    }
}

/// Streaming convergence detector over per-tick opinion counts of the
/// observed population (the decision-making subset, or the full swarm for
/// the baseline).
///
/// Converges at the earliest tick `t` such that one opinion's share stays at
/// or above the threshold for every tick in `[t, t + hold]`; the reported
/// convergence time is `t + hold`. An empty population satisfies nothing.
#[derive(Debug, Clone)]
pub struct ConvergenceTracker {
    params: ConvergenceParams,
    dt: f64,
    hold_ticks: u64,
    run_start: [Option<u64>; 2],
    result: Option<(Color, f64)>,
    tick: u64,
}

impl ConvergenceTracker {
    pub fn new(params: ConvergenceParams, dt: f64) -> ConvergenceTracker {
        ConvergenceTracker {
            params,
            dt,
            hold_ticks: (params.hold_s / dt).round() as u64,
            run_start: [None, None],
            result: None,
            tick: 0,
        }
    }

    /// Feeds one tick of opinion counts. Returns the decision once the hold
    /// window completes.
    pub fn observe(&mut self, black: usize, white: usize) -> Option<(Color, f64)> {
        if self.result.is_some() {
            return self.result;
        }
        let total = black + white;
        for (idx, count) in [(0usize, black), (1usize, white)] {
            let satisfied =
                total > 0 && count as f64 / total as f64 >= self.params.share_threshold;
            if satisfied {
                let start = *self.run_start[idx].get_or_insert(self.tick);
                if self.tick - start >= self.hold_ticks {
                    let color = if idx == 0 { Color::Black } else { Color::White };
                    let time = self.tick as f64 * self.dt;
                    self.result = Some((color, time));
                    return self.result;
                }
            } else {
                self.run_start[idx] = None;
            }
        }
        self.tick += 1;
        None
    }

    pub fn result(&self) -> Option<(Color, f64)> {
        self.result
    }
}

/// Batch form of the detector, for trace fixtures: the series holds per-tick
/// `(black, white)` counts.
pub fn detect_convergence(
    series: &[(usize, usize)],
    dt: f64,
    params: ConvergenceParams,
) -> Option<(Color, f64)> {
    let mut tracker = ConvergenceTracker::new(params, dt);
    for &(black, white) in series {
        if let Some(hit) = tracker.observe(black, white) {
            return Some(hit);
        }
    }
    None
}

/// Contiguity scheme for Moran's I.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightScheme {
    /// 4-neighborhood.
    Rook,
    /// 8-neighborhood.
    Queen,
}

/// Moran's I over a `w x h` grid of values with binary contiguity weights.
/// Returns `None` when the field has no variance (the statistic is
/// undefined).
pub fn morans_index(values: &[f64], w: usize, h: usize, scheme: WeightScheme) -> Option<f64> {
    assert_eq!(values.len(), w * h, "grid shape mismatch");
    let n = values.len();
    if n < 2 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let denom: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    if denom == 0.0 {
        return None;
    }
    let offsets: &[(isize, isize)] = match scheme {
        WeightScheme::Rook => &[(-1, 0), (1, 0), (0, -1), (0, 1)],
        WeightScheme::Queen => &[
            (-1, -1),
            (-1, 0),
            (-1, 1),
            (0, -1),
            (0, 1),
            (1, -1),
            (1, 0),
            (1, 1),
        ],
    };
    let mut num = 0.0;
    let mut weight_sum = 0.0;
    for y in 0..h {
        for x in 0..w {
            let vi = values[y * w + x] - mean;
            for &(dy, dx) in offsets {
                let ny = y as isize + dy;
                let nx = x as isize + dx;
                if ny < 0 || nx < 0 || ny >= h as isize || nx >= w as isize {
                    continue;
                }
                let vj = values[ny as usize * w + nx as usize] - mean;
                num += vi * vj;
                weight_sum += 1.0;
            }
        }
    }
    Some((n as f64 / weight_sum) * (num / denom))
}

/// Cumulative dwell time of decision-making robots on a square cell grid.
#[derive(Debug, Clone)]
pub struct CoverageHeatmap {
    cells: Vec<f64>,
    dim: usize,
    cell_size: f64,
}

impl CoverageHeatmap {
    pub fn new(arena_side: f64, cell_size: f64) -> CoverageHeatmap {
        let dim = (arena_side / cell_size).round().max(1.0) as usize;
        CoverageHeatmap {
            cells: vec![0.0; dim * dim],
            dim,
            cell_size,
        }
    }

    pub fn deposit(&mut self, x: f64, y: f64, dt: f64) {
        let cx = ((x / self.cell_size) as usize).min(self.dim - 1);
        let cy = ((y / self.cell_size) as usize).min(self.dim - 1);
        self.cells[cy * self.dim + cx] += dt;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn total_mass(&self) -> f64 {
        self.cells.iter().sum()
    }

    pub fn morans_index(&self, scheme: WeightScheme) -> Option<f64> {
        morans_index(&self.cells, self.dim, self.dim, scheme)
    }
}

/// Median decision-maker count over the trailing window before the cutoff
/// tick (the convergence tick, or the last tick of an undecided run).
pub fn steady_subset_size(counts: &[u32], dt: f64, window_s: f64, cutoff_tick: usize) -> f64 {
    if counts.is_empty() {
        return 0.0;
    }
    let end = cutoff_tick.min(counts.len() - 1) + 1;
    let window_ticks = (window_s / dt).round().max(1.0) as usize;
    let start = end.saturating_sub(window_ticks);
    let window: Vec<f64> = counts[start..end].iter().map(|&c| c as f64).collect();
    median(&window)
}

/// How a run counts toward decision accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AccuracyOutcome {
    Correct,
    Incorrect,
    Undecided,
}

/// End-of-run aggregate record.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub converged: bool,
    /// Wire encoding of the decision: 0 black, 1 white; absent if undecided.
    pub decision: Option<Color>,
    /// Seconds until the hold window completed; absent if undecided.
    pub convergence_time_s: Option<f64>,
    pub steady_subset_size: f64,
    pub morans_i: Option<f64>,
    pub outcome: AccuracyOutcome,
    pub ticks: u64,
    pub messages_sent: u64,
    pub messages_delivered: u64,
    /// Final subset size parameter at the leader, when one existed.
    pub final_subset_param: Option<u32>,
    /// The leader's own final decision, where the strategy produces one.
    pub leader_final_decision: Option<Color>,
}

impl RunSummary {
    /// Convergence time with undecided runs censored at the run horizon,
    /// for rank statistics.
    pub fn convergence_time_or(&self, horizon: f64) -> f64 {
        self.convergence_time_s.unwrap_or(horizon)
    }
}
