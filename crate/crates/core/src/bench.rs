//! Evaluation throughput across worker counts.
//!
//! Every worker replays the same seeded sequence of jittered frames and
//! scores the goal on each, so the digest of a worker's reports does not
//! depend on how many workers run beside it.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::logic::{compile, score_goal, CompiledCondition, LogicError};
use crate::parser::{parse_activity, Activity};
use crate::predicates::{EvalError, PredicateParams};
use crate::scene::{Pose, Room, SceneObject, SceneState};
use crate::taxonomy::{ground_terms, load_taxonomy, GroundScope, Taxonomy, TaxonomyError};

/// Per-axis position jitter bound, meters.
pub const JITTER: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BenchError {
    #[error("invalid bench configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Grounding(#[from] TaxonomyError),
    #[error(transparent)]
    Compile(#[from] LogicError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("bench exceeded its duration cap of {0:?}")]
    Timeout(Duration),
    #[error("workers produced differing report digests")]
    Nondeterministic,
    #[error("worker lists differ: {baseline:?} vs {candidate:?}")]
    MismatchedConfigs { baseline: Vec<usize>, candidate: Vec<usize> },
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub workers: Vec<usize>,
    pub frames_per_worker: usize,
    pub scene: SceneState,
    pub activity: Activity,
    pub taxonomy: Taxonomy,
    /// Term bindings; grounded from `seed` when absent.
    pub scope: Option<GroundScope>,
    pub predicate_params: PredicateParams,
    pub seed: u64,
    pub duration_cap: Duration,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.workers.is_empty() {
            return Err(BenchError::Config("worker list is empty".into()));
        }
        if self.workers.contains(&0) {
            return Err(BenchError::Config("worker counts must be positive".into()));
        }
        if !self.workers.windows(2).all(|w| w[0] < w[1]) {
            return Err(BenchError::Config("worker counts must be strictly ascending".into()));
        }
        if self.frames_per_worker == 0 {
            return Err(BenchError::Config("frames_per_worker must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub workers: usize,
    pub total_frames: usize,
    pub wall_seconds: f64,
    pub frames_per_second: f64,
    pub checksum: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub seed: u64,
    pub frames_per_worker: usize,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Aligned plain-text table, one line per row.
    pub fn render_table(&self) -> String {
        let header = ["workers", "frames", "wall_s", "fps", "checksum"];
        let body: Vec<[String; 5]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.workers.to_string(),
                    r.total_frames.to_string(),
                    format!("{:.3}", r.wall_seconds),
                    format!("{:.1}", r.frames_per_second),
                    r.checksum[..12.min(r.checksum.len())].to_string(),
                ]
            })
            .collect();
        render_aligned(&header, &body)
    }
}

fn render_aligned<const N: usize>(header: &[&str; N], body: &[[String; N]]) -> String {
    let mut widths = header.map(str::len);
    for row in body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: Vec<&str>| {
        let parts: Vec<String> = cells.iter().zip(widths).map(|(c, w)| format!("{c:>w$}")).collect();
        writeln!(out, "{}", parts.join("  ").trim_end()).unwrap();
    };
    line(&mut out, header.to_vec());
    for row in body {
        line(&mut out, row.iter().map(String::as_str).collect());
    }
    out
}

/// Scene for frame `index`: every object's position displaced by a uniform
/// offset in `[-JITTER, JITTER]` per axis.
pub fn jittered_frame(base: &SceneState, seed: u64, index: u64) -> SceneState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut scene = base.clone();
    for obj in scene.objects.values_mut() {
        let d = Vector3::from_fn(|_, _| rng.random_range(-JITTER..=JITTER));
        obj.pose.position += d;
    }
    scene
}

fn run_worker(
    compiled: &CompiledCondition,
    config: &BenchConfig,
    start: Instant,
    abort: &AtomicBool,
) -> Result<String, BenchError> {
    let mut hasher = Sha256::new();
    for j in 0..config.frames_per_worker {
        if abort.load(Ordering::Relaxed) {
            return Err(BenchError::Timeout(config.duration_cap));
        }
        let scene = jittered_frame(&config.scene, config.seed, j as u64);
        let report = score_goal(compiled, &scene, &config.predicate_params)?;
        hasher.update(report.to_json().as_bytes());
        hasher.update(b"\n");
        if start.elapsed() > config.duration_cap {
            abort.store(true, Ordering::Relaxed);
            return Err(BenchError::Timeout(config.duration_cap));
        }
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

/// Runs the goal-scoring loop once per configured worker count.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport, BenchError> {
    config.validate()?;
    let scope = match &config.scope {
        Some(s) => s.clone(),
        None => ground_terms(&config.activity, &config.taxonomy, &config.scene, config.seed)?,
    };
    let compiled = compile(&config.activity.goal, &scope, &config.taxonomy, &config.scene)?;
    let start = Instant::now();
    let abort = AtomicBool::new(false);

    let mut rows = Vec::with_capacity(config.workers.len());
    for &n in &config.workers {
        let t0 = Instant::now();
        let digests: Vec<Result<String, BenchError>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..n).map(|_| s.spawn(|| run_worker(&compiled, config, start, &abort))).collect();
            handles.into_iter().map(|h| h.join().expect("bench worker panicked")).collect()
        });
        let wall_seconds = t0.elapsed().as_secs_f64().max(f64::MIN_POSITIVE);
        let digests = digests.into_iter().collect::<Result<Vec<_>, _>>()?;
        if digests.windows(2).any(|w| w[0] != w[1]) {
            return Err(BenchError::Nondeterministic);
        }
        let total_frames = n * config.frames_per_worker;
        rows.push(BenchRow {
            workers: n,
            total_frames,
            wall_seconds,
            frames_per_second: total_frames as f64 / wall_seconds,
            checksum: digests.into_iter().next().expect("at least one worker"),
        });
    }
    Ok(BenchReport { seed: config.seed, frames_per_worker: config.frames_per_worker, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupRow {
    pub workers: usize,
    pub baseline_fps: f64,
    pub candidate_fps: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupTable {
    pub rows: Vec<SpeedupRow>,
}

impl SpeedupTable {
    /// Ratios as printed, two decimals.
    pub fn formatted_ratios(&self) -> Vec<String> {
        self.rows.iter().map(|r| format!("{:.2}", r.ratio)).collect()
    }

    pub fn render_table(&self) -> String {
        let header = ["workers", "baseline_fps", "candidate_fps", "speedup"];
        let body: Vec<[String; 4]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.workers.to_string(),
                    format!("{:.1}", r.baseline_fps),
                    format!("{:.1}", r.candidate_fps),
                    format!("{:.2}x", r.ratio),
                ]
            })
            .collect();
        render_aligned(&header, &body)
    }
}

/// Candidate throughput relative to baseline for each worker count.
pub fn speedup_table(baseline: &BenchReport, candidate: &BenchReport) -> Result<SpeedupTable, BenchError> {
    let workers = |r: &BenchReport| r.rows.iter().map(|row| row.workers).collect::<Vec<_>>();
    if workers(baseline) != workers(candidate) {
        return Err(BenchError::MismatchedConfigs { baseline: workers(baseline), candidate: workers(candidate) });
    }
    let rows = baseline
        .rows
        .iter()
        .zip(&candidate.rows)
        .map(|(b, c)| SpeedupRow {
            workers: b.workers,
            baseline_fps: b.frames_per_second,
            candidate_fps: c.frames_per_second,
            ratio: c.frames_per_second / b.frames_per_second,
        })
        .collect();
    Ok(SpeedupTable { rows })
}

const SYNTHETIC_TAXONOMY: &str = "[hierarchy]\nfloor.n.01\nfurniture.n.01\ntable.n.02 furniture.n.01\n\
    food.n.01\napple.n.01 food.n.01\ntableware.n.01\nplate.n.04 tableware.n.01\n";

const SYNTHETIC_ACTIVITY: &str = "(define (problem synthetic_tabletop-0) (:domain synthetic)
    (:objects apple.n.01_1 - apple.n.01 plate.n.04_1 - plate.n.04 table.n.02_1 - table.n.02
        floor.n.01_1 - floor.n.01)
    (:init (ontop apple.n.01_1 table.n.02_1) (onfloor table.n.02_1 floor.n.01_1))
    (:goal (and
        (forall (?apple.n.01 - apple.n.01)
            (exists (?table.n.02 - table.n.02) (ontop ?apple.n.01 ?table.n.02)))
        (forall (?plate.n.04 - plate.n.04)
            (or (ontop ?plate.n.04 ?table.n.02_1) (nextto ?plate.n.04 ?apple.n.01_1)))
        (not (touching ?apple.n.01_1 ?plate.n.04_1)))))";

/// A single-room scene of `tables` table blocks, each carrying two apples
/// and two plates (`5 * tables` objects), with a matching activity and
/// taxonomy.
pub fn synthetic_workload(tables: usize, seed: u64) -> (SceneState, Activity, Taxonomy) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols = (tables as f64).sqrt().ceil().max(1.0) as usize;
    let side = 2.0 * cols as f64 + 2.0;
    let mut objects = Vec::with_capacity(tables * 5);
    let add = |objects: &mut Vec<SceneObject>, id: String, category: &str, c: [f64; 3], h: [f64; 3]| {
        objects.push(SceneObject {
            id,
            category: category.into(),
            pose: Pose::at(Vector3::from(c)),
            half_extents: Vector3::from(h),
            room_id: None,
        });
    };
    for t in 0..tables {
        let (x, y) = (2.0 * (t % cols) as f64 + 2.0, 2.0 * (t / cols) as f64 + 2.0);
        add(&mut objects, format!("table_{t}"), "table.n.02", [x, y, 0.375], [0.5, 0.4, 0.375]);
        for k in 0..2 {
            let dx = -0.25 + 0.5 * k as f64 + rng.random_range(-0.02..0.02);
            let z = 0.75 + 0.005 + 0.04;
            add(&mut objects, format!("apple_{t}_{k}"), "apple.n.01", [x + dx, y - 0.2, z], [0.04, 0.04, 0.04]);
            let z = 0.75 + 0.005 + 0.01;
            add(&mut objects, format!("plate_{t}_{k}"), "plate.n.04", [x + dx, y + 0.2, z], [0.1, 0.1, 0.01]);
        }
    }
    let room = Room {
        id: "kitchen_0".into(),
        floor_polygon: vec![[0.0, 0.0], [side, 0.0], [side, side], [0.0, side]],
        floor_z: 0.0,
    };
    let scene = SceneState::new(objects, vec![room]).expect("synthetic scene is valid");
    let activity = parse_activity(SYNTHETIC_ACTIVITY).expect("synthetic activity parses");
    let taxonomy = load_taxonomy(SYNTHETIC_TAXONOMY).expect("synthetic taxonomy loads");
    (scene, activity, taxonomy)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(workers: Vec<usize>, frames: usize) -> BenchConfig {
        let (scene, activity, taxonomy) = synthetic_workload(4, 7);
        BenchConfig {
            workers,
            frames_per_worker: frames,
            scene,
            activity,
            taxonomy,
            scope: None,
            predicate_params: PredicateParams::default(),
            seed: 3,
            duration_cap: Duration::from_secs(60),
        }
    }

    fn report(fps: &[(usize, f64)]) -> BenchReport {
        let rows = fps
            .iter()
            .map(|&(workers, f)| BenchRow {
                workers,
                total_frames: 100,
                wall_seconds: 100.0 / f,
                frames_per_second: f,
                checksum: String::new(),
            })
            .collect();
        BenchReport { seed: 0, frames_per_worker: 100, rows }
    }

    #[test]
    fn single_worker_row() {
        let r = run_bench(&config(vec![1], 100)).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].total_frames, 100);
        assert!(r.rows[0].frames_per_second > 0.0);
    }

    #[test]
    fn checksums_agree_across_worker_counts() {
        let r = run_bench(&config(vec![1, 4], 20)).unwrap();
        assert_eq!(r.rows[0].checksum, r.rows[1].checksum);
        assert_eq!(r.rows[1].total_frames, 80);
    }

    #[test]
    fn seed_changes_checksum() {
        let a = run_bench(&config(vec![1], 20)).unwrap();
        let b = run_bench(&BenchConfig { seed: 4, ..config(vec![1], 20) }).unwrap();
        assert_ne!(a.rows[0].checksum, b.rows[0].checksum);
    }

    #[test]
    fn config_errors() {
        assert!(matches!(run_bench(&config(vec![], 1)), Err(BenchError::Config(_))));
        assert!(matches!(run_bench(&config(vec![4, 1], 1)), Err(BenchError::Config(_))));
        assert!(matches!(run_bench(&config(vec![0], 1)), Err(BenchError::Config(_))));
        assert!(matches!(run_bench(&config(vec![1], 0)), Err(BenchError::Config(_))));
    }

    #[test]
    fn zero_cap_times_out() {
        let c = BenchConfig { duration_cap: Duration::ZERO, ..config(vec![1], 10) };
        assert!(matches!(run_bench(&c), Err(BenchError::Timeout(_))));
    }

    #[test]
    fn speedup_ratios() {
        let base = report(&[(1, 50.0), (16, 400.0)]);
        assert_eq!(speedup_table(&base, &base).unwrap().formatted_ratios(), ["1.00", "1.00"]);
        let double = report(&[(1, 100.0), (16, 800.0)]);
        assert_eq!(speedup_table(&base, &double).unwrap().formatted_ratios(), ["2.00", "2.00"]);
        let other = report(&[(1, 50.0)]);
        assert!(matches!(speedup_table(&base, &other), Err(BenchError::MismatchedConfigs { .. })));
    }

    #[test]
    fn published_ratio_formatting() {
        let base = report(&[(1, 10.0), (16, 100.0), (32, 200.0), (64, 500.0)]);
        let cand = report(&[(1, 104.0), (16, 150.0), (32, 250.0), (64, 470.0)]);
        let t = speedup_table(&base, &cand).unwrap();
        assert_eq!(t.formatted_ratios(), ["10.40", "1.50", "1.25", "0.94"]);
        assert!(t.render_table().contains("10.40x"));
    }

    #[test]
    fn synthetic_scene_size() {
        let (scene, activity, tax) = synthetic_workload(20, 1);
        assert_eq!(scene.objects.len(), 100);
        let scope = ground_terms(&activity, &tax, &scene, 0).unwrap();
        let compiled = compile(&activity.goal, &scope, &tax, &scene).unwrap();
        let report = score_goal(&compiled, &scene, &PredicateParams::default()).unwrap();
        // one leaf per apple, two per plate, one for the negation
        assert_eq!(report.leaves.len(), 40 + 2 * 40 + 1);
        assert!(report.q_score > 0.0 && report.q_score < 1.0, "{}", report.q_score);
    }
}
