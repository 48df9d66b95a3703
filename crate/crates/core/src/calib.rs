//! Threshold calibration by exhaustive grid search against QA accuracy, and
//! the collision-analysis table exports.
//!
//! Per-scene kinematics tables (positions, displacements, velocity changes)
//! are computed once and shared across every grid point; each point only
//! re-runs thresholding, event detection and answering.

use serde::{Deserialize, Serialize};

use crate::events::{causal_graph, compute_fluents, detect_from_kinematics, Variant};
use crate::facts::FactBase;
use crate::physics::{Kinematics, Thresholds};
use crate::query::{answer_batch, compile_batch, make_question_facts, Answer, CompiledBatch, QuestionAst};
use crate::scene::Vocabulary;
use crate::sim::GroundTruth;

/// Candidate threshold values per dimension (quantized units squared).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Grid {
    pub d_move: Vec<i64>,
    pub d_stop: Vec<i64>,
    pub d_prox: Vec<i64>,
    pub d_vel: Vec<i64>,
}

impl Grid {
    /// Default 4x4x4x4 grid for the given quantization scale, derived from
    /// the simulator's speed range (~0.25..3 units/frame) and contact
    /// distance (~2 units).
    pub fn default_for_scale(scale: u32) -> Grid {
        let s = scale as i64;
        let sq = |units_tenths: i64| (units_tenths * s / 10).pow(2);
        Grid {
            // between rest (0) and the slowest launch speed (~1.2 u/f)
            d_move: vec![sq(2), sq(5), sq(10), sq(20)],
            // strictly below the rest floor displacement (~0.25 u/f)
            d_stop: vec![sq(1), sq(2), sq(4), sq(10)],
            // around the contact distance (~2 u) with noise headroom
            d_prox: vec![sq(22), sq(30), sq(40), sq(60)],
            // collision velocity changes are large; noise changes are not
            d_vel: vec![sq(3), sq(7), sq(12), sq(25)],
        }
    }

    /// The Cartesian product, in deterministic order.
    pub fn points(&self, persistence_window: u8) -> Vec<Thresholds> {
        let mut out = Vec::new();
        for &d_move in &self.d_move {
            for &d_stop in &self.d_stop {
                for &d_prox in &self.d_prox {
                    for &d_vel in &self.d_vel {
                        out.push(Thresholds {
                            d_move,
                            d_stop,
                            d_prox,
                            d_vel,
                            persistence_window,
                        });
                    }
                }
            }
        }
        out
    }
}

/// One scene prepared for calibration: reconstructed facts, cached
/// kinematics, and the questions with oracle answers.
pub struct CalibScene {
    pub fb: FactBase,
    pub kin: Kinematics,
    pub questions: Vec<(String, QuestionAst)>,
    pub oracle: Vec<(String, Answer)>,
    batch: CompiledBatch,
}

impl CalibScene {
    pub fn new(fb: FactBase, questions: Vec<(String, QuestionAst, Answer)>) -> CalibScene {
        let kin = Kinematics::from_facts(&fb);
        let oracle: Vec<(String, Answer)> = questions
            .iter()
            .map(|(id, _, a)| (id.clone(), a.clone()))
            .collect();
        let questions: Vec<(String, QuestionAst)> = questions
            .into_iter()
            .map(|(id, ast, _)| (id, ast))
            .collect();
        let batch = compile_batch(&questions, &Vocabulary::default());
        CalibScene {
            fb,
            kin,
            questions,
            oracle,
            batch,
        }
    }
}

/// Accuracy of one grid point.
#[derive(Clone, Debug)]
pub struct GridPointResult {
    pub thresholds: Thresholds,
    pub correct: usize,
    pub total: usize,
}

impl GridPointResult {
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }
}

/// Score one threshold point over the prepared scenes.
pub fn score_point(scenes: &[CalibScene], th: &Thresholds, variant: Variant) -> (usize, usize) {
    let mut correct = 0;
    let mut total = 0;
    for scene in scenes {
        let events = detect_from_kinematics(&scene.kin, th, variant);
        let (timeline, _) = compute_fluents(&events, &scene.fb);
        let cause = causal_graph(&events);
        let facts = make_question_facts(&scene.fb, &events, &timeline, &cause);
        let answers = answer_batch(&facts, &scene.batch);
        for ((id, result), (oid, expected)) in answers.iter().zip(&scene.oracle) {
            debug_assert_eq!(id, oid);
            total += 1;
            if let Ok(a) = result {
                if a == expected {
                    correct += 1;
                }
            }
        }
    }
    (correct, total)
}

/// Exhaustive grid search; returns the winning thresholds and the full
/// table. Ties break toward the smallest d_prox, then d_vel, then d_move,
/// then d_stop.
pub fn grid_search(
    scenes: &[CalibScene],
    grid: &Grid,
    variant: Variant,
    persistence_window: u8,
) -> (Thresholds, Vec<GridPointResult>) {
    let mut table = Vec::new();
    for th in grid.points(persistence_window) {
        let (correct, total) = score_point(scenes, &th, variant);
        table.push(GridPointResult {
            thresholds: th,
            correct,
            total,
        });
    }
    let best = table
        .iter()
        .min_by(|a, b| {
            b.accuracy()
                .partial_cmp(&a.accuracy())
                .unwrap()
                .then(a.thresholds.d_prox.cmp(&b.thresholds.d_prox))
                .then(a.thresholds.d_vel.cmp(&b.thresholds.d_vel))
                .then(a.thresholds.d_move.cmp(&b.thresholds.d_move))
                .then(a.thresholds.d_stop.cmp(&b.thresholds.d_stop))
        })
        .expect("grid is nonempty");
    (best.thresholds, table)
}

// ---------------------------------------------------------------------------
// Collision analysis exports
// ---------------------------------------------------------------------------

/// Per pair-frame absolute coordinate distances with the collision flag.
#[derive(Clone, Debug, PartialEq)]
pub struct DistRow {
    pub pair_id: String,
    pub frame: usize,
    pub dx: i64,
    pub dy: i64,
    pub dz: i64,
    pub colliding: bool,
}

/// Velocity-change samples around ground-truth collisions plus a control
/// bucket from frames away from any collision.
#[derive(Clone, Debug, PartialEq)]
pub struct VelRow {
    /// "-2", "-1", "0", "1", or "control".
    pub offset: String,
    pub object: i64,
    pub velocity_change: i64,
}

/// Build both analysis tables from prepared scenes and their ground truth.
pub fn analyze_collisions(scenes: &[(Kinematics, GroundTruth)]) -> (Vec<DistRow>, Vec<VelRow>) {
    let mut dist = Vec::new();
    let mut vel = Vec::new();
    for (scene_idx, (kin, gt)) in scenes.iter().enumerate() {
        let collisions: Vec<_> = gt
            .events_of(crate::events::EventKind::Collision)
            .copied()
            .collect();
        for (i, &a) in kin.objects.iter().enumerate() {
            for &b in &kin.objects[i + 1..] {
                for t in 0..kin.horizon {
                    let (Some(pa), Some(pb)) = (kin.position(a, t), kin.position(b, t)) else {
                        continue;
                    };
                    let colliding = collisions
                        .iter()
                        .any(|e| e.t == t && e.a == a && e.b == Some(b));
                    dist.push(DistRow {
                        pair_id: format!("s{scene_idx}:{}-{}", a.0, b.0),
                        frame: t,
                        dx: (pa[0] - pb[0]).abs(),
                        dy: (pa[1] - pb[1]).abs(),
                        dz: (pa[2] - pb[2]).abs(),
                        colliding,
                    });
                }
            }
        }
        for &v in &kin.objects {
            let my_collisions: Vec<usize> = collisions
                .iter()
                .filter(|e| e.a == v || e.b == Some(v))
                .map(|e| e.t)
                .collect();
            for t in 0..kin.horizon {
                let Some(change) = kin.vel_change(v, t) else {
                    continue;
                };
                let mut bucketed = false;
                for &tc in &my_collisions {
                    let dt = t as i64 - tc as i64;
                    if (-2..=1).contains(&dt) {
                        vel.push(VelRow {
                            offset: dt.to_string(),
                            object: v.0,
                            velocity_change: change,
                        });
                        bucketed = true;
                    }
                }
                if !bucketed && my_collisions.iter().all(|&tc| (t as i64 - tc as i64).abs() > 4)
                {
                    vel.push(VelRow {
                        offset: "control".into(),
                        object: v.0,
                        velocity_change: change,
                    });
                }
            }
        }
    }
    (dist, vel)
}

pub fn dist_csv(rows: &[DistRow]) -> String {
    let mut out = String::from("pair_id,frame,dx,dy,dz,colliding\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.pair_id, r.frame, r.dx, r.dy, r.dz, r.colliding as u8
        ));
    }
    out
}

pub fn vel_csv(rows: &[VelRow]) -> String {
    let mut out = String::from("offset,object,velocity_change\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.offset, r.object, r.velocity_change));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facts::reconstruct;
    use crate::scene::quantize;
    use crate::sim::{generate_scene, generate_descriptive, GenSpec};

    fn prepare(seed: u64, questions: usize) -> CalibScene {
        let spec = GenSpec {
            frame_count: 48,
            ..Default::default()
        };
        let (_, trace, truth) = generate_scene(&spec, seed).unwrap();
        let quantized = quantize(&trace, Default::default()).unwrap();
        let fb = reconstruct(&quantized).unwrap();
        let qs = generate_descriptive(&truth, questions, seed)
            .into_iter()
            .enumerate()
            .map(|(i, (ast, ans))| (format!("q{i}"), ast, ans))
            .collect();
        CalibScene::new(fb, qs)
    }

    #[test]
    fn grid_of_one_returns_that_point() {
        let scenes = vec![prepare(3, 10)];
        let grid = Grid {
            d_move: vec![2500],
            d_stop: vec![400],
            d_prox: vec![90_000],
            d_vel: vec![2500],
        };
        let (best, table) = grid_search(&scenes, &grid, Variant::H0, 2);
        assert_eq!(table.len(), 1);
        assert_eq!(best.d_move, 2500);
        assert!(table[0].total >= 10);
    }

    #[test]
    fn adding_a_worse_point_never_changes_the_argmax() {
        let scenes = vec![prepare(5, 25), prepare(6, 25)];
        let grid = Grid {
            d_move: vec![2500],
            d_stop: vec![400],
            d_prox: vec![90_000],
            d_vel: vec![2500],
        };
        let (best, _) = grid_search(&scenes, &grid, Variant::H0, 2);
        // A point where nothing ever counts as moving scores strictly worse
        // on these movement-heavy scenes.
        let worse_th = Thresholds {
            d_move: 1 << 40,
            d_stop: 400,
            d_prox: 90_000,
            d_vel: 2500,
            persistence_window: 2,
        };
        let (bc, bt) = score_point(&scenes, &best, Variant::H0);
        let (wc, wt) = score_point(&scenes, &worse_th, Variant::H0);
        assert_eq!(bt, wt);
        assert!(wc < bc, "worse point must be strictly worse: {wc} vs {bc}");
        let extended = Grid {
            d_move: vec![2500, 1 << 40],
            d_stop: vec![400],
            d_prox: vec![90_000],
            d_vel: vec![2500],
        };
        let (best2, _) = grid_search(&scenes, &extended, Variant::H0, 2);
        assert_eq!(best2, best);
    }

    #[test]
    fn repeated_scoring_is_pure() {
        let scenes = vec![prepare(9, 8)];
        let th = Thresholds::default();
        let a = score_point(&scenes, &th, Variant::H1);
        let b = score_point(&scenes, &th, Variant::H1);
        assert_eq!(a, b);
    }

    #[test]
    fn analysis_tables_empty_scene() {
        // A scene with no collisions produces only non-colliding rows and
        // only the control bucket.
        let spec = GenSpec {
            frame_count: 24,
            objects_min: 2,
            objects_max: 2,
            aimed_pairs_max: 1,
            stationary_prob: 1.0,
            late_spawn_prob: 0.0,
            speed_min: 0.0,
            speed_max: 0.0,
            ..Default::default()
        };
        // All objects stationary: aimed pair gets no mover, no collisions.
        let (_, trace, truth) = generate_scene(&spec, 1).unwrap();
        let quantized = quantize(&trace, Default::default()).unwrap();
        let fb = reconstruct(&quantized).unwrap();
        let kin = Kinematics::from_facts(&fb);
        let (dist, vel) = analyze_collisions(&[(kin, truth)]);
        assert!(dist.iter().all(|r| !r.colliding));
        assert!(vel.iter().all(|r| r.offset == "control"));
    }
}
