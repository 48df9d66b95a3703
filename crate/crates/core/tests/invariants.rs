//! Cross-module invariants: noise statistics against an exact probabilistic
//! oracle, simulator/trace consistency, detection monotonicity across
//! variants, evaluation causality, and what-if behavior.

use std::collections::BTreeSet;

use seer_core::engine::{evaluate, parse_program, EvalOptions, Justification};
use seer_core::events::{detect_events, EventKind, Variant};
use seer_core::facts::reconstruct;
use seer_core::logic::{Sym, Term};
use seer_core::physics::{displacement, Thresholds};
use seer_core::pipeline::{analyze_trace, PipelineConfig};
use seer_core::query::whatif::{answer_whatif, WhatIfOpts};
use seer_core::query::{Answer, EventStatement, ObjFilter, QuestionAst};
use seer_core::scene::{
    load_trace, perturb, quantize, save_trace, Dims, LoadOptions, NoiseSpec, ObjId, QuantSpec,
};
use seer_core::sim::{
    generate_scene, minimal_filter, simulate, Arena, GenSpec, ObjectSpec, SimConfig,
};

fn flat_scene(objects: usize, frames: usize) -> SimConfig {
    SimConfig {
        video_id: "flat".into(),
        dims: 3,
        frame_count: frames,
        arena: Arena {
            min: [0.0, 0.0],
            max: [400.0, 400.0],
        },
        objects: (0..objects)
            .map(|i| ObjectSpec {
                id: i as i64,
                color: ["red", "blue", "green", "gray", "cyan", "brown"][i % 6].into(),
                shape: ["cube", "sphere", "cylinder"][(i / 6) % 3].into(),
                material: ["metal", "rubber"][(i / 18) % 2].into(),
                radius: 1.0,
                spawn_frame: 0,
                spawn_pos: vec![20.0 + 40.0 * i as f64, 50.0, 1.0],
                velocity: vec![0.0, 0.0, 0.0],
                exits: false,
            })
            .collect(),
        friction: 0.0,
        restitution: 1.0,
        rest_speed: 0.1,
        scale: 100,
        seed: 0,
    }
}

/// Flicker statistics against the exact sequential-corruption expectation.
///
/// Interior presence frames are corrupted with probability p unless the
/// previous interior frame was corrupted: d_1 = p, d_i = p * (1 - d_{i-1}).
/// The observed total over many seeds must land within 3 sigma of the exact
/// expectation (the no-repeat constraint makes draws negatively correlated,
/// so the independent-Bernoulli sigma is conservative).
#[test]
fn flicker_rate_matches_exact_expectation() {
    let config = flat_scene(5, 128);
    let (trace, _) = simulate(&config).unwrap();
    let p = 0.05f64;

    let interior = 126; // presence run of 128: first and last protected
    let mut expected_per_object = 0.0;
    let mut variance_per_object = 0.0;
    let mut d_prev = 0.0;
    for _ in 0..interior {
        let d = p * (1.0 - d_prev);
        expected_per_object += d;
        variance_per_object += d * (1.0 - d);
        d_prev = d;
    }
    let seeds = 1000u64;
    let expectation = expected_per_object * 5.0 * seeds as f64;
    let sigma = (variance_per_object * 5.0 * seeds as f64).sqrt();

    let mut drops = 0usize;
    for seed in 0..seeds {
        let noisy = perturb(
            &trace,
            &NoiseSpec {
                position_sigma: 0.0,
                flicker_prob: p,
                seed,
            },
        );
        for id in trace.object_ids() {
            drops += 128 - noisy.presence(id).len();
        }
    }
    let diff = (drops as f64 - expectation).abs();
    assert!(
        diff <= 3.0 * sigma,
        "observed {drops} drops, expected {expectation:.1} +/- {:.1}",
        3.0 * sigma
    );
    // And the headline approximation: about p * (total presence).
    let naive = p * (5 * 128 * seeds as usize) as f64;
    assert!((drops as f64) / naive > 0.9 && (drops as f64) / naive < 1.05);
}

/// A 128-frame, 5-object simulator output reloads to the trace that was
/// serialized (byte comparison after canonical re-serialization).
#[test]
fn simulator_trace_roundtrips_bytewise() {
    let spec = GenSpec {
        objects_min: 5,
        objects_max: 5,
        ..Default::default()
    };
    let (_, trace, _) = generate_scene(&spec, 17).unwrap();
    assert_eq!(trace.frame_count, 128);
    let text = save_trace(&trace);
    let back = load_trace(text.as_bytes(), &LoadOptions::default()).unwrap();
    assert_eq!(save_trace(&back), text);
}

/// Reconstruction emits exactly k object atoms and one on_camera atom per
/// ground-truth presence.
#[test]
fn fact_counts_match_ground_truth() {
    let spec = GenSpec::default();
    for seed in 0..5u64 {
        let (config, trace, truth) = generate_scene(&spec, seed).unwrap();
        let quantized = quantize(&trace, QuantSpec::default()).unwrap();
        let fb = reconstruct(&quantized).unwrap();
        let k = config.objects.len();
        assert_eq!(fb.atoms_of(Sym::new("object")).len(), k);
        let presence: usize = truth
            .present
            .values()
            .map(|row| row[..config.frame_count].iter().filter(|&&b| b).count())
            .sum();
        assert_eq!(fb.atoms_of(Sym::new("on_camera")).len(), presence);
        assert_eq!(
            fb.atoms_of(Sym::new("position")).len(),
            fb.atoms_of(Sym::new("on_camera")).len()
        );
    }
}

/// A constant-velocity object's squared displacement matches
/// (vx^2+vy^2) * scale^2 up to quantization slack (each coordinate rounds
/// by at most one quantized unit, so the distance is off by at most 2).
#[test]
fn constant_velocity_displacement_slack() {
    let mut config = flat_scene(1, 40);
    config.objects[0].velocity = vec![1.3, 0.7, 0.0];
    let (trace, _) = simulate(&config).unwrap();
    let quantized = quantize(&trace, QuantSpec { scale: 100 }).unwrap();
    let fb = reconstruct(&quantized).unwrap();
    let speed = (1.3f64 * 1.3 + 0.7 * 0.7).sqrt() * 100.0;
    for t in 0..39 {
        let d = displacement(&fb, ObjId(0), t, t + 1).unwrap();
        assert!(
            ((d as f64).sqrt() - speed).abs() <= 2.0,
            "t={t}: displacement {d} vs expected speed {speed}"
        );
    }
}

/// Entry-rule hardening only strengthens the body: H1 entries are a subset
/// of H0 entries on the same facts, noisy or not.
#[test]
fn h1_entries_subset_of_h0() {
    let th = Thresholds::default();
    for seed in 0..10u64 {
        let spec = GenSpec {
            frame_count: 64,
            noise: Some(seer_core::sim::TraceNoise {
                position_sigma: 0.5,
                flicker_prob: 0.05,
            }),
            ..Default::default()
        };
        let (_, trace, _) = generate_scene(&spec, seed).unwrap();
        let fb = reconstruct(&quantize(&trace, QuantSpec::default()).unwrap()).unwrap();
        let h0: BTreeSet<_> = detect_events(&fb, &th, Variant::H0)
            .events_of(EventKind::Entry)
            .copied()
            .collect();
        let h1: BTreeSet<_> = detect_events(&fb, &th, Variant::H1)
            .events_of(EventKind::Entry)
            .copied()
            .collect();
        assert!(
            h1.is_subset(&h0),
            "seed {seed}: H1 entries not a subset of H0"
        );
    }
}

/// On noiseless scenes the move-rule hardening changes nothing, and every
/// object is present over one contiguous interval.
#[test]
fn noiseless_moves_equal_and_presence_contiguous() {
    let th = Thresholds::default();
    for seed in 0..10u64 {
        let spec = GenSpec {
            frame_count: 64,
            ..Default::default()
        };
        let (_, trace, _) = generate_scene(&spec, seed).unwrap();
        let fb = reconstruct(&quantize(&trace, QuantSpec::default()).unwrap()).unwrap();
        let h1: BTreeSet<_> = detect_events(&fb, &th, Variant::H1)
            .events_of(EventKind::Move)
            .copied()
            .collect();
        let h2: BTreeSet<_> = detect_events(&fb, &th, Variant::H2)
            .events_of(EventKind::Move)
            .copied()
            .collect();
        assert!(h2.is_subset(&h1), "seed {seed}: H2 moves exceed H1");
        for id in trace.object_ids() {
            let presence = trace.presence(id);
            let (first, last) = (presence[0], *presence.last().unwrap());
            assert_eq!(
                presence.len(),
                last - first + 1,
                "seed {seed}: object {id} presence has gaps"
            );
        }
    }
}

/// Ground-truth events line up with the emitted trace: exits are the last
/// present frame, entries the last absent one, collisions happen on camera.
#[test]
fn ground_truth_consistent_with_trace() {
    let spec = GenSpec::default();
    for seed in 20..30u64 {
        let (_, trace, truth) = generate_scene(&spec, seed).unwrap();
        let on = |id: ObjId, t: usize| {
            trace
                .frames
                .get(t)
                .is_some_and(|f| f.detections.iter().any(|d| d.id == id))
        };
        for e in &truth.events {
            match e.kind {
                EventKind::Entry => {
                    assert!(!on(e.a, e.t), "entry while visible");
                    assert!(on(e.a, e.t + 1), "entered object not visible after");
                }
                EventKind::Exit => {
                    assert!(on(e.a, e.t), "exit while absent");
                    assert!(!on(e.a, e.t + 1), "exited object still visible");
                }
                EventKind::Move | EventKind::Stop => {
                    assert!(on(e.a, e.t) && on(e.a, e.t + 1));
                }
                EventKind::Collision => {
                    assert!(on(e.a, e.t) && on(e.b.unwrap(), e.t));
                }
            }
        }
    }
}

/// Causality of temporal evaluation: the event-calculus fluents at times
/// strictly before t do not change when `happens` facts at times >= t are
/// added. (Detection rules read one or two frames ahead of their head time,
/// so the analogous property for scene facts holds with that offset.)
#[test]
fn temporal_evaluation_is_causal() {
    let base = "\
time(0). time(1). time(2). time(3). time(4). time(5).
object(0).
initially(moving(0)).
initiates(move(V), moving(V)) :- object(V).
terminates(stop(V), moving(V)) :- object(V).
clipped(F, T) :- happens(E, T), terminates(E, F), time(T).
holdsAt(F, 0) :- initially(F).
holdsAt(F, T+1) :- happens(E, T), initiates(E, F), not clipped(F, T), time(T).
holdsAt(F, T+1) :- holdsAt(F, T), not clipped(F, T), time(T).
happens(stop(0), 1).
";
    let horizon = 6i64;
    let fb = seer_core::facts::FactBase::new(Dims::Three, horizon as usize);
    let model_a = evaluate(
        &parse_program(base).unwrap(),
        &fb,
        &EvalOptions::default(),
    )
    .unwrap();
    // Add events at times >= 3.
    let extended = format!("{base}happens(move(0), 3).\nhappens(stop(0), 4).\n");
    let model_b = evaluate(
        &parse_program(&extended).unwrap(),
        &fb,
        &EvalOptions::default(),
    )
    .unwrap();
    for pred in ["holdsAt", "clipped", "happens"] {
        let restrict = |m: &seer_core::engine::Model| -> BTreeSet<String> {
            m.atoms_of(Sym::new(pred))
                .iter()
                .filter(|a| {
                    a.args
                        .last()
                        .and_then(Term::as_int)
                        .is_some_and(|t| t < 3)
                })
                .map(|a| a.to_string())
                .collect()
        };
        assert_eq!(
            restrict(&model_a),
            restrict(&model_b),
            "{pred} atoms before t=3 changed"
        );
    }
}

/// Every derived atom's recorded witness has a fully satisfied body.
#[test]
fn provenance_bodies_hold_in_the_model() {
    let spec = GenSpec {
        frame_count: 32,
        ..Default::default()
    };
    let (_, trace, _) = generate_scene(&spec, 3).unwrap();
    let fb = reconstruct(&quantize(&trace, QuantSpec::default()).unwrap()).unwrap();
    let th = Thresholds::default();
    let program = parse_program(&seer_core::rules::full_program(
        Variant::H2,
        &th,
        fb.dims,
    ))
    .unwrap();
    let model = evaluate(&program, &fb, &EvalOptions::default()).unwrap();
    let mut derived = 0;
    for atom in model.all_atoms() {
        if let Some(Justification::Derived { rule_idx, body }) = model.justification(atom) {
            assert!(rule_idx < program.rules.len());
            for b in body {
                assert!(model.contains(&b), "witness body {b} of {atom} not in model");
            }
            derived += 1;
        }
    }
    assert!(derived > 100, "expected plenty of derived atoms");
}

/// Counterfactuals: removing a non-interacting object leaves every other
/// answer unchanged; removing one collider flips the collision option.
#[test]
fn counterfactual_noninterference_and_flip() {
    let config = SimConfig {
        video_id: "cf".into(),
        dims: 3,
        frame_count: 30,
        arena: Arena {
            min: [0.0, 0.0],
            max: [200.0, 200.0],
        },
        objects: vec![
            ObjectSpec {
                id: 0,
                color: "red".into(),
                shape: "sphere".into(),
                material: "metal".into(),
                radius: 1.0,
                spawn_frame: 0,
                spawn_pos: vec![10.0, 50.0, 1.0],
                velocity: vec![2.5, 0.0, 0.0],
                exits: false,
            },
            ObjectSpec {
                id: 1,
                color: "blue".into(),
                shape: "sphere".into(),
                material: "metal".into(),
                radius: 1.0,
                spawn_frame: 0,
                spawn_pos: vec![50.7, 50.0, 1.0],
                velocity: vec![0.0, 0.0, 0.0],
                exits: false,
            },
            ObjectSpec {
                id: 2,
                color: "green".into(),
                shape: "cube".into(),
                material: "rubber".into(),
                radius: 1.0,
                spawn_frame: 0,
                spawn_pos: vec![100.0, 180.0, 1.0],
                velocity: vec![0.0, -0.8, 0.0],
                exits: false,
            },
        ],
        friction: 0.0,
        restitution: 1.0,
        rest_speed: 0.1,
        scale: 100,
        seed: 0,
    };
    let (_, truth) = simulate(&config).unwrap();
    assert_eq!(truth.events_of(EventKind::Collision).count(), 1);

    let opts = WhatIfOpts {
        observed_frames: config.frame_count,
        thresholds: Thresholds::default(),
        variant: Variant::H2,
        quant: QuantSpec::default(),
        dims: None,
    };
    let collide_opt = EventStatement::Collides(
        minimal_filter(&truth, ObjId(0), None),
        minimal_filter(&truth, ObjId(1), None),
    );
    let green_moves_far = EventStatement::Exits(minimal_filter(&truth, ObjId(2), None));

    // Removing the never-interacting green cube: factual answers hold.
    let remove_green = QuestionAst::Counterfactual {
        remove: minimal_filter(&truth, ObjId(2), None),
        options: vec![collide_opt.clone(), green_moves_far.clone()],
    };
    let got = answer_whatif(&remove_green, &config, &opts).unwrap();
    assert_eq!(got, Answer::Options(vec![true, false]));

    // Removing one collider: the collision option flips to no.
    let remove_blue = QuestionAst::Counterfactual {
        remove: minimal_filter(&truth, ObjId(1), None),
        options: vec![collide_opt, green_moves_far],
    };
    let got = answer_whatif(&remove_blue, &config, &opts).unwrap();
    assert_eq!(got, Answer::Options(vec![false, false]));

    // Trace-only input: unsupported, reported.
    let bad = answer_whatif(
        &QuestionAst::Counterfactual {
            remove: ObjFilter {
                color: Some("purple".into()),
                ..Default::default()
            },
            options: vec![
                EventStatement::Enters(ObjFilter::default()),
                EventStatement::Exits(ObjFilter::default()),
            ],
        },
        &config,
        &opts,
    );
    assert!(bad.is_err(), "nonexistent removal target must error");
}

/// The analysis tables separate colliding from non-colliding pairs: with
/// the default proximity bound, recall on collision rows is >= 0.95, and
/// the control velocity-change bucket is concentrated at zero.
#[test]
fn collision_analysis_separation() {
    use seer_core::calib::analyze_collisions;
    use seer_core::physics::Kinematics;
    let spec = GenSpec {
        frame_count: 64,
        ..Default::default()
    };
    let mut inputs = Vec::new();
    for seed in 100..300u64 {
        let (_, trace, truth) = generate_scene(&spec, seed).unwrap();
        let fb = reconstruct(&quantize(&trace, QuantSpec::default()).unwrap()).unwrap();
        inputs.push((Kinematics::from_facts(&fb), truth));
    }
    let (dist, vel) = analyze_collisions(&inputs);
    let d_prox = Thresholds::default().d_prox;
    let colliding: Vec<_> = dist.iter().filter(|r| r.colliding).collect();
    assert!(colliding.len() >= 100, "not enough collision rows");
    let within = colliding
        .iter()
        .filter(|r| r.dx * r.dx + r.dy * r.dy + r.dz * r.dz <= d_prox)
        .count();
    let recall = within as f64 / colliding.len() as f64;
    assert!(recall >= 0.95, "proximity recall {recall:.3} below 0.95");

    let control: Vec<i64> = vel
        .iter()
        .filter(|r| r.offset == "control")
        .map(|r| r.velocity_change)
        .collect();
    let at_collision: Vec<i64> = vel
        .iter()
        .filter(|r| r.offset == "0")
        .map(|r| r.velocity_change)
        .collect();
    assert!(!control.is_empty() && !at_collision.is_empty());
    let median = |mut v: Vec<i64>| {
        v.sort_unstable();
        v[v.len() / 2]
    };
    // Centered around zero: friction contributes a small per-frame decay,
    // far below the impulse at a collision.
    let control_median = median(control.clone());
    let collision_median = median(at_collision);
    assert!(
        control_median <= 1_000,
        "control median {control_median} not near zero"
    );
    assert!(
        collision_median >= 20 * control_median.max(1),
        "collision changes ({collision_median}) do not dominate the control bucket ({control_median})"
    );
    let near_zero = control.iter().filter(|&&c| c <= 2_500).count();
    assert!(
        near_zero as f64 / control.len() as f64 >= 0.8,
        "control bucket not concentrated near zero"
    );
}

/// Full pipeline equality of answers between the dedicated path and the
/// engine path on a sample scene (the acceptance suite checks atom sets on
/// 50 scenes; this checks the wired answer layer).
#[test]
fn rule_route_supports_question_answering() {
    let spec = GenSpec {
        frame_count: 48,
        ..Default::default()
    };
    let (_, trace, truth) = generate_scene(&spec, 8).unwrap();
    let cfg = PipelineConfig::default();
    let analysis = analyze_trace(&trace, &cfg).unwrap();
    // The engine route's model answers a direct goal identically to the
    // dedicated EventLog.
    let model = seer_core::pipeline::evaluate_rules_path(&trace, &cfg).unwrap();
    let engine_collisions = model.query("happens(collision(A, B), T)").unwrap().len();
    let dedicated_collisions = analysis
        .events
        .events_of(EventKind::Collision)
        .count();
    assert_eq!(engine_collisions, dedicated_collisions);
    let _ = truth;
}
