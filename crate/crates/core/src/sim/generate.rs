//! Seeded random scene generation: spawn layouts, aimed collision courses,
//! and optional perception noise on the emitted trace.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::scene::{perturb, NoiseSpec, SceneTrace, Vocabulary};

use super::config::{Arena, ObjectSpec, SimConfig, SimError};
use super::simulate::simulate;
use super::truth::GroundTruth;

/// Noise applied to the emitted trace (ground truth stays clean).
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct TraceNoise {
    pub position_sigma: f64,
    pub flicker_prob: f64,
}

/// Parameters of the random scene family.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GenSpec {
    pub dims: u8,
    pub frame_count: usize,
    pub arena: Arena,
    pub objects_min: usize,
    pub objects_max: usize,
    pub speed_min: f64,
    pub speed_max: f64,
    /// Probability an object enters mid-video instead of starting present.
    pub late_spawn_prob: f64,
    pub spawn_frame_max: usize,
    /// Probability an initially-present object starts at rest.
    pub stationary_prob: f64,
    /// Probability an object bounces off the arena walls instead of exiting.
    pub bounce_prob: f64,
    /// Pairs re-aimed onto collision courses.
    pub aimed_pairs_max: usize,
    pub friction_min: f64,
    pub friction_max: f64,
    pub restitution: f64,
    pub rest_speed: f64,
    pub scale: u32,
    pub noise: Option<TraceNoise>,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            dims: 3,
            frame_count: 128,
            arena: Arena {
                min: [0.0, 0.0],
                max: [100.0, 100.0],
            },
            objects_min: 3,
            objects_max: 6,
            speed_min: 1.2,
            speed_max: 2.8,
            late_spawn_prob: 0.35,
            spawn_frame_max: 40,
            stationary_prob: 0.35,
            bounce_prob: 0.3,
            aimed_pairs_max: 2,
            friction_min: 0.012,
            friction_max: 0.035,
            restitution: 1.0,
            rest_speed: 0.25,
            scale: 100,
            noise: None,
        }
    }
}

fn attr_tuples(vocab: &Vocabulary) -> Vec<(String, String, String)> {
    let mut out = Vec::new();
    for c in &vocab.colors {
        for s in &vocab.shapes {
            for m in &vocab.materials {
                out.push((c.clone(), s.clone(), m.clone()));
            }
        }
    }
    out
}

fn draw_config(spec: &GenSpec, rng: &mut ChaCha8Rng, video_id: String, seed: u64) -> SimConfig {
    let dims = spec.dims as usize;
    let vocab = Vocabulary::default();
    let mut tuples = attr_tuples(&vocab);
    let n_obj = rng.random_range(spec.objects_min..=spec.objects_max);
    // Fisher-Yates prefix for distinct attribute tuples.
    for i in 0..n_obj {
        let j = rng.random_range(i..tuples.len());
        tuples.swap(i, j);
    }
    let friction = rng.random_range(spec.friction_min..=spec.friction_max);
    let margin = 8.0;
    let center = [
        (spec.arena.min[0] + spec.arena.max[0]) / 2.0,
        (spec.arena.min[1] + spec.arena.max[1]) / 2.0,
    ];

    let mut objects: Vec<ObjectSpec> = Vec::new();
    for i in 0..n_obj {
        let (color, shape, material) = tuples[i].clone();
        // Keep at least two objects present from the start.
        let late = i >= 2 && rng.random::<f64>() < spec.late_spawn_prob;
        let spawn_frame = if late {
            rng.random_range(1..=spec.spawn_frame_max)
        } else {
            0
        };
        // Rejection-sample a spawn position away from existing spawns.
        let mut pos;
        loop {
            pos = [
                rng.random_range(spec.arena.min[0] + margin..spec.arena.max[0] - margin),
                rng.random_range(spec.arena.min[1] + margin..spec.arena.max[1] - margin),
            ];
            let ok = objects.iter().all(|o| {
                let dx = o.spawn_pos[0] - pos[0];
                let dy = o.spawn_pos[1] - pos[1];
                (dx * dx + dy * dy).sqrt() > 7.0
            });
            if ok {
                break;
            }
        }
        let stationary = !late && rng.random::<f64>() < spec.stationary_prob;
        let (vx, vy) = if stationary {
            (0.0, 0.0)
        } else {
            let speed = rng.random_range(spec.speed_min..=spec.speed_max);
            // Head roughly toward the center so objects interact.
            let base = (center[1] - pos[1]).atan2(center[0] - pos[0]);
            let angle = base + rng.random_range(-1.0..1.0);
            (speed * angle.cos(), speed * angle.sin())
        };
        let mut spawn_pos = vec![pos[0], pos[1]];
        let mut velocity = vec![vx, vy];
        if dims == 3 {
            spawn_pos.push(1.0);
            velocity.push(0.0);
        }
        objects.push(ObjectSpec {
            id: i as i64,
            color,
            shape,
            material,
            radius: 1.0,
            spawn_frame,
            spawn_pos,
            velocity,
            exits: rng.random::<f64>() >= spec.bounce_prob,
        });
    }

    // Aim some movers at targets so scenes actually contain collisions.
    let aimed = rng.random_range(1..=spec.aimed_pairs_max.max(1));
    let mut used: Vec<usize> = Vec::new();
    for _ in 0..aimed {
        let movers: Vec<usize> = (0..objects.len())
            .filter(|&i| {
                !used.contains(&i)
                    && objects[i].velocity.iter().map(|v| v * v).sum::<f64>() > 0.0
            })
            .collect();
        // Prefer stationary targets; fall back to any initially-present one.
        let mut targets: Vec<usize> = (0..objects.len())
            .filter(|&i| {
                !used.contains(&i)
                    && objects[i].spawn_frame == 0
                    && objects[i].velocity.iter().map(|v| v * v).sum::<f64>() == 0.0
            })
            .collect();
        if targets.is_empty() {
            targets = (0..objects.len())
                .filter(|&i| !used.contains(&i) && objects[i].spawn_frame == 0)
                .collect();
        }
        if movers.is_empty() || targets.is_empty() {
            break;
        }
        let m = movers[rng.random_range(0..movers.len())];
        let candidates: Vec<usize> = targets.iter().copied().filter(|&t| t != m).collect();
        if candidates.is_empty() {
            break;
        }
        let target = candidates[rng.random_range(0..candidates.len())];

        // Friction-aware path length of k frames at launch speed 1.
        let mu = friction;
        let path = |k: f64| (1.0 - mu) * (1.0 - (1.0 - mu).powf(k)) / mu;
        let (mx, my) = (objects[m].spawn_pos[0], objects[m].spawn_pos[1]);
        let (tvx, tvy) = (objects[target].velocity[0], objects[target].velocity[1]);
        let mut aimed_ok = false;
        for k in [14.0f64, 22.0, 32.0, 44.0, 58.0] {
            // Predicted target position when the mover arrives.
            let tp = path(k);
            let tx = objects[target].spawn_pos[0] + tvx * tp;
            let ty = objects[target].spawn_pos[1] + tvy * tp;
            if tx < spec.arena.min[0] + 3.0
                || tx > spec.arena.max[0] - 3.0
                || ty < spec.arena.min[1] + 3.0
                || ty > spec.arena.max[1] - 3.0
            {
                continue;
            }
            let dist = ((tx - mx).powi(2) + (ty - my).powi(2)).sqrt();
            let v0 = dist / tp;
            let fast_enough = v0 * (1.0 - mu).powf(k) > spec.rest_speed * 1.4;
            if v0 >= spec.speed_min * 0.6 && v0 <= spec.speed_max * 1.8 && fast_enough {
                let angle = (ty - my).atan2(tx - mx);
                objects[m].velocity[0] = v0 * angle.cos();
                objects[m].velocity[1] = v0 * angle.sin();
                objects[m].spawn_frame = 0;
                aimed_ok = true;
                break;
            }
        }
        if aimed_ok {
            used.push(m);
            used.push(target);
        }
    }

    SimConfig {
        video_id,
        dims: spec.dims,
        frame_count: spec.frame_count,
        arena: spec.arena,
        objects,
        friction,
        restitution: spec.restitution,
        rest_speed: spec.rest_speed,
        scale: spec.scale,
        seed,
    }
}

/// Generate one scene deterministically from a seed: the config, the
/// (optionally noisy) trace, and the clean ground truth. Invalid draws
/// (spawn overlaps) are retried with derived sub-seeds.
pub fn generate_scene(
    spec: &GenSpec,
    seed: u64,
) -> Result<(SimConfig, SceneTrace, GroundTruth), SimError> {
    let mut attempt: u64 = 0;
    loop {
        let sub_seed = seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
        let config = draw_config(spec, &mut rng, format!("scene_{seed:08}"), seed);
        match simulate(&config) {
            Ok((trace, truth)) => {
                let trace = match spec.noise {
                    Some(noise) => perturb(
                        &trace,
                        &NoiseSpec {
                            position_sigma: noise.position_sigma,
                            flicker_prob: noise.flicker_prob,
                            seed: sub_seed ^ 0xD00D_F00D_5EED_5EED,
                        },
                    ),
                    None => trace,
                };
                return Ok((config, trace, truth));
            }
            Err(SimError::OverlapAtSpawn { .. }) if attempt < 32 => {
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}
