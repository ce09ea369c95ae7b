//! Verification suite: one test per claim the simulator must reproduce,
//! each printing a `criterion NN ... PASS` line with the measured values
//! (run with `--nocapture` to see them).
//!
//! Heavy scenario batches are shared across criteria through lazy statics,
//! so the suite's cost stays at a few minutes.

use std::sync::OnceLock;

use rand::Rng;

use subcdm::batch::run_batch;
use subcdm::comms::NeighborIndex;
use subcdm::distributed::update_confidence;
use subcdm::dmvd::{begin_dissemination, begin_exploration, DecisionPhase};
use subcdm::engine::Simulation;
use subcdm::leader::{update_hop, HopState};
use subcdm::metrics::{
    detect_convergence, morans_index, AccuracyOutcome, ConvergenceParams, CoverageHeatmap,
    RunSummary, WeightScheme,
};
use subcdm::motion::{sample_rotation_duration, sample_straight_duration};
use subcdm::rng::{global_stream, robot_stream, sample_exp_mean, StreamKind};
use subcdm::stats::{
    exp_cdf, ks_critical, ks_statistic, mann_whitney_z, median, uniform_cdf, Z_ONE_SIDED_05,
};
use subcdm::trace::CsvTraceWriter;
use subcdm::{RobotId, SimConfig, Strategy};

const EASY: f64 = 0.34;
const HARD: f64 = 0.46;
const MATRIX_REPS: u32 = 30;

fn base_cfg(strategy: Strategy, black_fraction: f64) -> SimConfig {
    SimConfig {
        strategy,
        black_fraction,
        ..SimConfig::default()
    }
}

/// Strategy x difficulty batches shared by criteria 6, 7, and 8.
fn matrix(strategy: Strategy, black_fraction: f64) -> &'static [RunSummary] {
    static MATRIX: OnceLock<Vec<(Strategy, f64, Vec<RunSummary>)>> = OnceLock::new();
    let cells = MATRIX.get_or_init(|| {
        let mut cells = Vec::new();
        for (s_idx, strategy) in [Strategy::FullSwarm, Strategy::LeaderBased, Strategy::Distributed]
            .into_iter()
            .enumerate()
        {
            for (d_idx, difficulty) in [EASY, HARD].into_iter().enumerate() {
                let mut cfg = base_cfg(strategy, difficulty);
                cfg.repetitions = MATRIX_REPS;
                cfg.seed = 50_000 + 1_000 * s_idx as u64 + 100 * d_idx as u64;
                let summaries = run_batch(&cfg, true).expect("matrix batch");
                cells.push((strategy, difficulty, summaries));
            }
        }
        cells
    });
    &cells
        .iter()
        .find(|(s, d, _)| *s == strategy && *d == black_fraction)
        .expect("matrix cell")
        .2
}

fn subset_sizes(summaries: &[RunSummary]) -> Vec<f64> {
    summaries.iter().map(|s| s.steady_subset_size).collect()
}

fn convergence_times(summaries: &[RunSummary], horizon: f64) -> Vec<f64> {
    summaries
        .iter()
        .map(|s| s.convergence_time_or(horizon))
        .collect()
}

fn accuracy(summaries: &[RunSummary]) -> f64 {
    summaries
        .iter()
        .filter(|s| s.outcome == AccuracyOutcome::Correct)
        .count() as f64
        / summaries.len() as f64
}

#[test]
fn c01_determinism() {
    // Byte-identical traces for identical (config, seed).
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = base_cfg(Strategy::LeaderBased, EASY);
    cfg.max_duration_s = 150.0;
    cfg.stop_at_convergence = false;
    for (dir, seed) in [("a", 777u64), ("b", 777), ("c", 778)] {
        let mut writer = CsvTraceWriter::create(&tmp.path().join(dir)).unwrap();
        Simulation::new(&cfg, seed)
            .unwrap()
            .run(Some(&mut writer))
            .unwrap();
    }
    let read = |d: &str, f: &str| std::fs::read(tmp.path().join(d).join(f)).unwrap();
    for file in ["robots.csv", "ticks.csv", "grid.txt", "summary.toml", "heatmap.txt"] {
        assert_eq!(read("a", file), read("b", file), "{file} differs");
    }
    assert_ne!(read("a", "robots.csv"), read("c", "robots.csv"));

    // Batch aggregates independent of concurrency.
    let mut cfg = base_cfg(Strategy::Distributed, EASY);
    cfg.repetitions = 6;
    cfg.seed = 777;
    cfg.max_duration_s = 120.0;
    let par = run_batch(&cfg, true).unwrap();
    let ser = run_batch(&cfg, false).unwrap();
    for (p, s) in par.iter().zip(&ser) {
        assert_eq!(p.ticks, s.ticks);
        assert_eq!(p.messages_sent, s.messages_sent);
        assert_eq!(p.steady_subset_size, s.steady_subset_size);
        assert_eq!(p.morans_i, s.morans_i);
    }
    println!("criterion 01 (determinism): PASS - byte-identical traces, concurrency-independent aggregates");
}

#[test]
fn c02_hop_counts_equal_bfs_distances() {
    let graphs = 50;
    let n = 100usize;
    let mut total_checked = 0usize;
    for g in 0..graphs {
        let mut rng = global_stream(60_000 + g, StreamKind::Placement);
        let positions: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.gen::<f64>() * 8.0, rng.gen::<f64>() * 8.0))
            .collect();
        let index = NeighborIndex::build(&positions, 1.0, 8.0);
        let mut out = Vec::new();
        let adjacency: Vec<Vec<RobotId>> = (0..n)
            .map(|i| {
                index.neighbors_of(i as RobotId, &positions, 1.0, &mut out);
                out.clone()
            })
            .collect();

        // Drive the production hop-update protocol to convergence.
        let mut states: Vec<HopState> = (0..n).map(|_| HopState::unset()).collect();
        states[0] = HopState::leader_root(1);
        for _ in 0..2 * n {
            let snapshot: Vec<Option<u32>> = states.iter().map(|s| s.hop).collect();
            for i in 1..n {
                let beacons: Vec<(u32, u32)> = adjacency[i]
                    .iter()
                    .filter_map(|&j| snapshot[j as usize].map(|h| (h, 1)))
                    .collect();
                update_hop(&mut states[i], &beacons, 0.1);
            }
        }

        // Independent BFS oracle.
        let mut dist: Vec<Option<u32>> = vec![None; n];
        dist[0] = Some(0);
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                if dist[v as usize].is_none() {
                    dist[v as usize] = Some(dist[u].unwrap() + 1);
                    queue.push_back(v as usize);
                }
            }
        }

        for i in 0..n {
            assert_eq!(
                states[i].hop, dist[i],
                "graph {g} robot {i}: hop {:?} vs bfs {:?}",
                states[i].hop, dist[i]
            );
            if dist[i].is_some() {
                total_checked += 1;
            }
        }
    }
    println!(
        "criterion 02 (hop counts vs BFS): PASS - {total_checked} reachable robots across {graphs} graphs, 100% agreement"
    );
}

#[test]
fn c03_confidence_update_properties() {
    use subcdm::environment::Color;
    let gain = 0.01;

    // Exact fixed points.
    assert_eq!(update_confidence(1.0, Color::Black, Color::Black, gain), 1.0);
    assert_eq!(update_confidence(0.0, Color::Black, Color::White, gain), 0.0);

    let mut rng = global_stream(61_000, StreamKind::Decision);
    let mut max_err: f64 = 0.0;
    for _ in 0..100_000 {
        let alpha: f64 = rng.gen();
        let matches = rng.gen::<bool>();
        let (own, seen) = if matches {
            (Color::Black, Color::Black)
        } else {
            (Color::Black, Color::White)
        };
        let next = update_confidence(alpha, own, seen, gain);
        assert!((0.0..=1.0).contains(&next), "alpha escaped: {next}");
        // Independent scalar evaluation, associated the other way.
        let oracle = if matches {
            alpha * (1.0 - gain) + gain
        } else {
            alpha * (1.0 - gain)
        };
        max_err = max_err.max((next - oracle).abs());
    }
    assert!(max_err < 1e-12, "max single-step error {max_err}");

    // Random walks never escape the unit interval.
    for walk in 0..50 {
        let mut alpha: f64 = rng.gen();
        for _ in 0..2_000 {
            let matches = rng.gen::<bool>();
            let (own, seen) = if matches {
                (Color::White, Color::White)
            } else {
                (Color::White, Color::Black)
            };
            alpha = update_confidence(alpha, own, seen, gain);
            assert!((0.0..=1.0).contains(&alpha), "walk {walk} escaped");
        }
    }
    println!("criterion 03 (confidence update properties): PASS - max single-step error {max_err:.2e}");
}

#[test]
fn c04_distributed_subset_sizing_with_forced_s() {
    let mut cfg = base_cfg(Strategy::Distributed, EASY);
    cfg.fixed_s = Some(3);
    cfg.stop_at_convergence = false;
    cfg.max_duration_s = 300.0;
    cfg.steady_window_s = 100.0;
    cfg.repetitions = 20;
    cfg.seed = 10_000;
    let summaries = run_batch(&cfg, true).unwrap();

    let expectation = 100.0 * 0.3;
    let band = 3.0 * (100.0f64 * 0.3 * 0.7).sqrt();
    let in_band = summaries
        .iter()
        .filter(|s| (s.steady_subset_size - expectation).abs() <= band)
        .count();
    let sizes = subset_sizes(&summaries);
    assert!(
        in_band >= 18,
        "only {in_band}/20 runs inside {expectation} ± {band:.2}: {sizes:?}"
    );
    println!(
        "criterion 04 (distributed sizing, s=3): PASS - {in_band}/20 runs in 30 ± {band:.1}, median {:.1}",
        median(&sizes)
    );
}

#[test]
fn c05_leader_subset_saturation() {
    let mut medians = Vec::new();
    for (idx, s) in [1u32, 3, 5, 9].into_iter().enumerate() {
        let mut cfg = base_cfg(Strategy::LeaderBased, EASY);
        cfg.fixed_s = Some(s);
        cfg.stop_at_convergence = false;
        cfg.max_duration_s = 300.0;
        cfg.steady_window_s = 100.0;
        cfg.repetitions = 20;
        cfg.seed = 20_000 + 100 * idx as u64;
        let summaries = run_batch(&cfg, true).unwrap();
        medians.push((s, median(&subset_sizes(&summaries))));
    }
    for pair in medians.windows(2) {
        assert!(
            pair[1].1 > pair[0].1,
            "subset size not strictly increasing: s={} gives {:.1}, s={} gives {:.1}",
            pair[0].0,
            pair[0].1,
            pair[1].0,
            pair[1].1
        );
    }
    let at_nine = medians.last().unwrap().1;
    assert!(at_nine >= 90.0, "median at s=9 is {at_nine:.1}, need >= 90");
    println!(
        "criterion 05 (leader saturation): PASS - medians {:?}",
        medians
            .iter()
            .map(|(s, m)| format!("s={s}:{m:.1}"))
            .collect::<Vec<_>>()
    );
}

#[test]
fn c06_easy_task_accuracy() {
    let mut report = Vec::new();
    for strategy in [Strategy::FullSwarm, Strategy::LeaderBased, Strategy::Distributed] {
        let acc = accuracy(matrix(strategy, EASY));
        assert!(
            acc >= 0.9,
            "{strategy} accuracy {acc:.2} at black fraction {EASY}, need >= 0.9"
        );
        report.push(format!("{strategy}: {acc:.2}"));
    }
    println!("criterion 06 (easy-task accuracy): PASS - {}", report.join(", "));
}

#[test]
fn c07_subset_size_scales_with_difficulty() {
    let mut report = Vec::new();
    for strategy in [Strategy::LeaderBased, Strategy::Distributed] {
        let easy = subset_sizes(matrix(strategy, EASY));
        let hard = subset_sizes(matrix(strategy, HARD));
        let z = mann_whitney_z(&easy, &hard);
        let (m_easy, m_hard) = (median(&easy), median(&hard));
        assert!(
            m_hard > m_easy && z > Z_ONE_SIDED_05,
            "{strategy}: medians {m_easy:.1} -> {m_hard:.1}, z = {z:.2} (need > {Z_ONE_SIDED_05:.3})"
        );
        report.push(format!("{strategy}: {m_easy:.1} -> {m_hard:.1} (z={z:.1})"));
    }
    println!("criterion 07 (subset size vs difficulty): PASS - {}", report.join(", "));
}

#[test]
fn c08_convergence_time_ordering() {
    let horizon = SimConfig::default().max_duration_s;
    let mut report = Vec::new();
    for difficulty in [EASY, HARD] {
        let full = median(&convergence_times(matrix(Strategy::FullSwarm, difficulty), horizon));
        for strategy in [Strategy::LeaderBased, Strategy::Distributed] {
            let sub = median(&convergence_times(matrix(strategy, difficulty), horizon));
            assert!(
                full <= sub,
                "at {difficulty}: full-swarm median {full:.0}s exceeds {strategy} {sub:.0}s"
            );
        }
        report.push(format!("bf={difficulty}: full {full:.0}s fastest"));
    }
    for strategy in [Strategy::FullSwarm, Strategy::LeaderBased, Strategy::Distributed] {
        let easy = convergence_times(matrix(strategy, EASY), horizon);
        let hard = convergence_times(matrix(strategy, HARD), horizon);
        let z = mann_whitney_z(&easy, &hard);
        assert!(
            z > Z_ONE_SIDED_05,
            "{strategy}: times do not increase with difficulty (z = {z:.2})"
        );
        report.push(format!("{strategy} slows with difficulty (z={z:.1})"));
    }
    println!("criterion 08 (convergence-time ordering): PASS - {}", report.join("; "));
}

#[test]
fn c09_spatial_clustering_gap() {
    let run = |strategy: Strategy, seed: u64| {
        // Coverage comparison on subset-construction runs: fixed s, fixed
        // 500 s horizon. Adaptive runs grow both subsets toward the whole
        // swarm and wash out the spatial contrast this measures.
        let mut cfg = base_cfg(strategy, EASY);
        cfg.fixed_s = Some(2);
        cfg.stop_at_convergence = false;
        cfg.max_duration_s = 500.0;
        cfg.repetitions = 20;
        cfg.seed = seed;
        run_batch(&cfg, true).unwrap()
    };
    let leader: Vec<f64> = run(Strategy::LeaderBased, 30_000)
        .iter()
        .filter_map(|s| s.morans_i)
        .collect();
    let distributed: Vec<f64> = run(Strategy::Distributed, 31_000)
        .iter()
        .filter_map(|s| s.morans_i)
        .collect();
    assert!(leader.len() >= 18 && distributed.len() >= 18, "too many undefined indices");
    let (m_leader, m_dist) = (median(&leader), median(&distributed));
    let gap = m_leader - m_dist;
    assert!(
        gap >= 0.2,
        "Moran's I gap {gap:.3} (leader {m_leader:.3} vs distributed {m_dist:.3}), need >= 0.2"
    );
    println!(
        "criterion 09 (spatial clustering): PASS - leader {m_leader:.3} vs distributed {m_dist:.3}, gap {gap:.3}"
    );
}

#[test]
fn c10_fault_robustness() {
    // Fault scenario: 10% trials at role renewals with 20 s outages, which
    // keeps roughly a tenth of the swarm frozen at any time.
    let run = |strategy: Strategy, fault: bool, seed: u64| {
        let mut cfg = base_cfg(strategy, EASY);
        cfg.leader_election = strategy == Strategy::LeaderBased;
        if fault {
            cfg.fault_prob = 0.1;
            cfg.fault_duration_s = 20.0;
        }
        cfg.repetitions = 30;
        cfg.seed = seed;
        run_batch(&cfg, true).unwrap()
    };

    let dist_ok = median(&subset_sizes(&run(Strategy::Distributed, false, 40_000)));
    let dist_fault = median(&subset_sizes(&run(Strategy::Distributed, true, 40_500)));
    let dist_drop = (dist_ok - dist_fault) / dist_ok;
    assert!(
        (0.05..=0.20).contains(&dist_drop),
        "distributed relative drop {dist_drop:.3} ({dist_ok:.1} -> {dist_fault:.1}), need within [0.05, 0.20]"
    );

    let leader_ok = median(&subset_sizes(&run(Strategy::LeaderBased, false, 41_000)));
    let leader_fault = median(&subset_sizes(&run(Strategy::LeaderBased, true, 41_500)));
    let leader_drop = (leader_ok - leader_fault) / leader_ok;
    assert!(
        leader_drop > dist_drop,
        "leader-based drop {leader_drop:.3} not larger than distributed {dist_drop:.3}"
    );
    println!(
        "criterion 10 (fault robustness): PASS - distributed drop {:.1}% ({dist_ok:.1} -> {dist_fault:.1}), leader-based drop {:.1}% ({leader_ok:.1} -> {leader_fault:.1})",
        100.0 * dist_drop,
        100.0 * leader_drop
    );
}

#[test]
fn c11_metric_oracles() {
    // Moran's I: checkerboard under rook weights is exactly -1.
    let mut checker = vec![0.0; 16];
    for y in 0..4 {
        for x in 0..4 {
            checker[y * 4 + x] = if (x + y) % 2 == 0 { 1.0 } else { -1.0 };
        }
    }
    let i = morans_index(&checker, 4, 4, WeightScheme::Rook).unwrap();
    assert!((i + 1.0).abs() < 1e-12, "checkerboard I = {i}");

    // Direct double-sum reference on random 4x4 grids.
    let mut rng = global_stream(62_000, StreamKind::EnvLayout);
    let mut max_err: f64 = 0.0;
    for _ in 0..50 {
        let values: Vec<f64> = (0..16).map(|_| rng.gen::<f64>() * 5.0).collect();
        for scheme in [WeightScheme::Rook, WeightScheme::Queen] {
            let fast = morans_index(&values, 4, 4, scheme).unwrap();
            let reference = morans_double_sum(&values, 4, 4, scheme);
            max_err = max_err.max((fast - reference).abs());
        }
    }
    assert!(max_err < 1e-12, "Moran's I mismatch {max_err}");

    // Permutation null mean ~ -1/(N-1).
    use rand::seq::SliceRandom;
    let mut values: Vec<f64> = (0..16).map(|i| i as f64).collect();
    let mut sum = 0.0;
    for _ in 0..1_000 {
        values.shuffle(&mut rng);
        sum += morans_index(&values, 4, 4, WeightScheme::Queen).unwrap();
    }
    let null_mean = sum / 1_000.0;
    assert!(
        (null_mean - (-1.0 / 15.0)).abs() < 0.02,
        "null mean {null_mean:.4}"
    );

    // Convergence detector fixtures.
    let params = ConvergenceParams::default();
    let unanimous = vec![(10usize, 0usize); 400];
    let (_, t) = detect_convergence(&unanimous, 0.1, params).unwrap();
    assert!((t - 30.0).abs() < 1e-9);
    let mut stepped = Vec::new();
    for tick in 0..2_000 {
        let black = if (tick as f64) * 0.1 < 100.0 { 50 } else { 80 };
        stepped.push((black, 100 - black));
    }
    let (_, t) = detect_convergence(&stepped, 0.1, params).unwrap();
    assert!((t - 130.0).abs() < 1e-9, "step fixture converged at {t}");
    let mut oscillating = Vec::new();
    for second in 0..600 {
        let black = if second % 2 == 0 { 81 } else { 79 };
        for _ in 0..10 {
            oscillating.push((black, 100 - black));
        }
    }
    assert!(detect_convergence(&oscillating, 0.1, params).is_none());

    // Heatmap mass conservation: total mass equals deposited member-seconds
    // to within float-summation noise (1e-9 relative).
    let mut heatmap = CoverageHeatmap::new(8.0, 0.4);
    let mut mass_rng = global_stream(62_001, StreamKind::Placement);
    let mut expected = 0.0;
    for _ in 0..100_000 {
        heatmap.deposit(mass_rng.gen::<f64>() * 8.0, mass_rng.gen::<f64>() * 8.0, 0.1);
        expected += 0.1;
    }
    let mass_err = (heatmap.total_mass() - expected).abs() / expected;
    assert!(mass_err < 1e-9, "relative mass error {mass_err:.2e}");

    println!("criterion 11 (metric oracles): PASS - Moran max err {max_err:.2e}, null mean {null_mean:.4}, detector and heatmap exact");
}

fn morans_double_sum(values: &[f64], w: usize, _h: usize, scheme: WeightScheme) -> f64 {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let weight = |a: usize, b: usize| -> f64 {
        if a == b {
            return 0.0;
        }
        let (ay, ax) = (a / w, a % w);
        let (by, bx) = (b / w, b % w);
        let dy = (ay as isize - by as isize).abs();
        let dx = (ax as isize - bx as isize).abs();
        let adjacent = match scheme {
            WeightScheme::Rook => dy + dx == 1,
            WeightScheme::Queen => dy.max(dx) == 1,
        };
        if adjacent {
            1.0
        } else {
            0.0
        }
    };
    let mut num = 0.0;
    let mut wsum = 0.0;
    for a in 0..n {
        for b in 0..n {
            let wab = weight(a, b);
            num += wab * (values[a] - mean) * (values[b] - mean);
            wsum += wab;
        }
    }
    let denom: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (n as f64 / wsum) * (num / denom)
}

#[test]
fn c12_sampler_statistics() {
    let n = 10_000;
    let alpha = 0.01;
    let critical = ks_critical(n, alpha);
    let mut report = Vec::new();

    // Exploration duration t_e ~ Exp(10 s), through the decision module.
    let mut rng = robot_stream(63_000, 0, StreamKind::Decision);
    let te: Vec<f64> = (0..n)
        .map(|_| match begin_exploration(10.0, &mut rng) {
            DecisionPhase::Exploration { total, .. } => total,
            _ => unreachable!(),
        })
        .collect();
    let d = ks_statistic(&te, exp_cdf(10.0));
    assert!(d < critical, "t_e KS D = {d:.4} >= {critical:.4}");
    report.push(format!("t_e D={d:.4}"));

    // Dissemination duration t_d ~ Exp(quality * 10 s). Each sample set
    // gets its own stream.
    for (idx, (quality, mean)) in [(1.0, 10.0), (0.5, 5.0)].into_iter().enumerate() {
        let mut rng = robot_stream(63_000, 10 + idx as u32, StreamKind::Decision);
        let td: Vec<f64> = (0..n)
            .map(|_| match begin_dissemination(quality, 10.0, &mut rng) {
                DecisionPhase::Dissemination { total, .. } => total,
                _ => unreachable!(),
            })
            .collect();
        let d = ks_statistic(&td, exp_cdf(mean));
        assert!(d < critical, "t_d(q={quality}) KS D = {d:.4} >= {critical:.4}");
        report.push(format!("t_d(q={quality}) D={d:.4}"));
    }

    // Role duration ~ Exp(20 s).
    let mut rng = robot_stream(63_000, 1, StreamKind::Membership);
    let roles: Vec<f64> = (0..n).map(|_| sample_exp_mean(&mut rng, 20.0)).collect();
    let d = ks_statistic(&roles, exp_cdf(20.0));
    assert!(d < critical, "tau_role KS D = {d:.4} >= {critical:.4}");
    report.push(format!("tau_role D={d:.4}"));

    // Straight-phase duration ~ Exp(40 s) and rotation ~ U(0, 4.5 s).
    let mut rng = robot_stream(63_000, 2, StreamKind::Motion);
    let straight: Vec<f64> = (0..n).map(|_| sample_straight_duration(&mut rng)).collect();
    let d = ks_statistic(&straight, exp_cdf(40.0));
    assert!(d < critical, "straight KS D = {d:.4} >= {critical:.4}");
    report.push(format!("straight D={d:.4}"));

    let rotation: Vec<f64> = (0..n).map(|_| sample_rotation_duration(&mut rng)).collect();
    let d = ks_statistic(&rotation, uniform_cdf(0.0, 4.5));
    assert!(d < critical, "rotation KS D = {d:.4} >= {critical:.4}");
    report.push(format!("rotation D={d:.4}"));

    println!(
        "criterion 12 (sampler statistics): PASS at alpha={alpha} (critical {critical:.4}) - {}",
        report.join(", ")
    );
}
