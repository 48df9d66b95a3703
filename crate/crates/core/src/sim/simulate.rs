//! Fixed-timestep kinematic integration with elastic sphere contacts.
//!
//! The step order at every frame t is: spawn, record positions (frame t),
//! resolve contacts (impulses affect the step into t+1), apply friction and
//! the rest floor, integrate, handle arena bounds. Contact at frame t means
//! the collision event is stamped t and the velocity discontinuity shows up
//! in the displacement from t to t+1 — exactly where the detection rules
//! look for it.

use std::collections::BTreeMap;

use crate::events::{Event, EventKind};
use crate::scene::{Detection, Frame, ObjId, SceneTrace};

use super::config::{ObjectSpec, SimConfig, SimError};
use super::truth::GroundTruth;

struct Body {
    spec: ObjectSpec,
    pos: Vec<f64>,
    vel: Vec<f64>,
    active: bool,
    spawned: bool,
    /// Velocity actually used for the step t -> t+1, per frame.
    step_speed: Vec<f64>,
    last_present: Option<usize>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Run one scene. Deterministic: the trajectory depends only on the config.
pub fn simulate(config: &SimConfig) -> Result<(SceneTrace, GroundTruth), SimError> {
    config.validate()?;
    let dims = config.dims_enum()?;
    let n = config.frame_count;

    let mut bodies: Vec<Body> = config
        .objects
        .iter()
        .map(|spec| Body {
            pos: spec.spawn_pos.clone(),
            vel: spec.velocity.clone(),
            active: false,
            spawned: false,
            step_speed: vec![0.0; n],
            last_present: None,
            spec: spec.clone(),
        })
        .collect();

    let mut frames: Vec<Frame> = Vec::with_capacity(n);
    let mut trajectories: BTreeMap<i64, Vec<Option<Vec<f64>>>> = config
        .objects
        .iter()
        .map(|o| (o.id, vec![None; n]))
        .collect();
    let mut events: Vec<Event> = Vec::new();
    let mut collided: std::collections::BTreeSet<(ObjId, ObjId)> = Default::default();

    for t in 0..n {
        // Spawn.
        for body in bodies.iter_mut() {
            if !body.spawned && body.spec.spawn_frame == t {
                body.spawned = true;
                body.active = true;
                if body.spec.spawn_frame > 0 {
                    events.push(Event::unary(EventKind::Entry, ObjId(body.spec.id), t - 1));
                }
            }
        }
        // Spawn overlap check.
        for i in 0..bodies.len() {
            for j in i + 1..bodies.len() {
                if bodies[i].active
                    && bodies[j].active
                    && (bodies[i].spec.spawn_frame == t || bodies[j].spec.spawn_frame == t)
                {
                    let d: f64 = bodies[i]
                        .pos
                        .iter()
                        .zip(&bodies[j].pos)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    if d < bodies[i].spec.radius + bodies[j].spec.radius {
                        return Err(SimError::OverlapAtSpawn {
                            a: ObjId(bodies[i].spec.id),
                            b: ObjId(bodies[j].spec.id),
                            t,
                        });
                    }
                }
            }
        }

        // Record frame t.
        let mut detections = Vec::new();
        for body in bodies.iter_mut() {
            if body.active {
                detections.push(Detection {
                    id: ObjId(body.spec.id),
                    color: body.spec.color.clone(),
                    shape: body.spec.shape.clone(),
                    material: body.spec.material.clone(),
                    pos: body.pos.clone(),
                    score: 1.0,
                });
                trajectories.get_mut(&body.spec.id).unwrap()[t] = Some(body.pos.clone());
                body.last_present = Some(t);
            }
        }
        detections.sort_by_key(|d| d.id);
        frames.push(Frame { t, detections });

        // Contacts: pairwise, ordered by id for determinism.
        for i in 0..bodies.len() {
            for j in i + 1..bodies.len() {
                if !bodies[i].active || !bodies[j].active {
                    continue;
                }
                let (a, b) = split_pair(&mut bodies, i, j);
                let delta: Vec<f64> = b.pos.iter().zip(&a.pos).map(|(x, y)| x - y).collect();
                let dist = norm(&delta);
                let contact = a.spec.radius + b.spec.radius;
                if dist >= contact || dist == 0.0 {
                    continue;
                }
                let normal: Vec<f64> = delta.iter().map(|x| x / dist).collect();
                let rel: Vec<f64> = a.vel.iter().zip(&b.vel).map(|(x, y)| x - y).collect();
                let closing: f64 = rel.iter().zip(&normal).map(|(x, y)| x * y).sum();
                if closing <= 0.0 {
                    continue; // already separating
                }
                let impulse = (1.0 + config.restitution) / 2.0 * closing;
                for k in 0..a.vel.len() {
                    a.vel[k] -= impulse * normal[k];
                    b.vel[k] += impulse * normal[k];
                }
                // Positional correction: separate to contact distance.
                let push = (contact - dist) / 2.0 + 1e-9;
                for k in 0..a.pos.len() {
                    a.pos[k] -= push * normal[k];
                    b.pos[k] += push * normal[k];
                }
                let pair = canonical(ObjId(a.spec.id), ObjId(b.spec.id));
                if collided.insert(pair) {
                    events.push(Event::collision(pair.0, pair.1, t));
                }
            }
        }

        // Friction, rest floor, integration, bounds.
        for body in bodies.iter_mut() {
            if !body.active {
                continue;
            }
            for v in body.vel.iter_mut() {
                *v *= 1.0 - config.friction;
            }
            if norm(&body.vel) < config.rest_speed {
                for v in body.vel.iter_mut() {
                    *v = 0.0;
                }
            }
            body.step_speed[t] = norm(&body.vel);
            for k in 0..body.pos.len() {
                body.pos[k] += body.vel[k];
            }
            if !config.arena.contains(&body.pos) {
                if body.spec.exits {
                    body.active = false;
                    if t + 1 < n {
                        events.push(Event::unary(EventKind::Exit, ObjId(body.spec.id), t));
                    }
                } else {
                    for k in 0..2 {
                        if body.pos[k] < config.arena.min[k] {
                            body.pos[k] = 2.0 * config.arena.min[k] - body.pos[k];
                            body.vel[k] = -body.vel[k];
                        } else if body.pos[k] > config.arena.max[k] {
                            body.pos[k] = 2.0 * config.arena.max[k] - body.pos[k];
                            body.vel[k] = -body.vel[k];
                        }
                    }
                }
            }
        }
    }

    // Move/stop events from the exact step speeds, replayed through the
    // effect table, plus the fluent tables.
    let truth = GroundTruth::build(config, n, &bodies_view(&bodies), events, trajectories);

    let trace = SceneTrace {
        video_id: config.video_id.clone(),
        dims,
        frame_count: n,
        frames,
    };
    Ok((trace, truth))
}

fn canonical(a: ObjId, b: ObjId) -> (ObjId, ObjId) {
    if a.0 <= b.0 {
        (a, b)
    } else {
        (b, a)
    }
}

fn split_pair<'a>(bodies: &'a mut [Body], i: usize, j: usize) -> (&'a mut Body, &'a mut Body) {
    debug_assert!(i < j);
    let (left, right) = bodies.split_at_mut(j);
    (&mut left[i], &mut right[0])
}

pub(super) struct BodyView {
    pub id: i64,
    pub spawn_frame: usize,
    pub spawned: bool,
    pub step_speed: Vec<f64>,
    pub last_present: Option<usize>,
}

fn bodies_view(bodies: &[Body]) -> Vec<BodyView> {
    bodies
        .iter()
        .map(|b| BodyView {
            id: b.spec.id,
            spawn_frame: b.spec.spawn_frame,
            spawned: b.spawned,
            step_speed: b.step_speed.clone(),
            last_present: b.last_present,
        })
        .collect()
}

/// Re-run the scene with one object removed; everything else identical.
pub fn resimulate_without(
    config: &SimConfig,
    remove: ObjId,
) -> Result<(SceneTrace, GroundTruth), SimError> {
    if config.object(remove).is_none() {
        return Err(SimError::UnknownObject(remove));
    }
    let mut cf = config.clone();
    cf.objects.retain(|o| o.id != remove.0);
    simulate(&cf)
}
