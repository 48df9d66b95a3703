//! Deterministic kinematic scene simulator, ground truth, brute-force QA
//! oracle, and the seeded scene/question generators: the test bed standing
//! in for real video data.

mod config;
mod generate;
mod oracle;
mod qgen;
mod simulate;
mod truth;

pub use config::{Arena, ObjectSpec, SimConfig, SimError};
pub use generate::{generate_scene, GenSpec, TraceNoise};
pub use oracle::{
    causes, filter_matches_object, oracle_answer, oracle_counterfactual, oracle_predictive,
    statement_holds, Node, OracleError,
};
pub use qgen::{
    generate_counterfactual, generate_descriptive, generate_explanatory, generate_predictive,
    minimal_filter,
};
pub use simulate::{resimulate_without, simulate};
pub use truth::GroundTruth;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::EventKind;
    use crate::scene::ObjId;

    fn two_ball_head_on() -> SimConfig {
        SimConfig {
            video_id: "headon".into(),
            dims: 3,
            frame_count: 20,
            arena: Arena {
                min: [0.0, 0.0],
                max: [100.0, 100.0],
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
                    velocity: vec![2.0, 0.0, 0.0],
                    exits: false,
                },
                ObjectSpec {
                    id: 1,
                    color: "blue".into(),
                    shape: "sphere".into(),
                    material: "metal".into(),
                    radius: 1.0,
                    spawn_frame: 0,
                    spawn_pos: vec![31.0, 50.0, 1.0],
                    velocity: vec![-2.0, 0.0, 0.0],
                    exits: false,
                },
            ],
            friction: 0.0,
            restitution: 1.0,
            rest_speed: 0.1,
            scale: 100,
            seed: 1,
        }
    }

    #[test]
    fn static_object_never_moves() {
        let config = SimConfig {
            video_id: "static".into(),
            dims: 3,
            frame_count: 10,
            arena: Arena {
                min: [0.0, 0.0],
                max: [100.0, 100.0],
            },
            objects: vec![ObjectSpec {
                id: 0,
                color: "red".into(),
                shape: "cube".into(),
                material: "metal".into(),
                radius: 1.0,
                spawn_frame: 0,
                spawn_pos: vec![50.0, 50.0, 1.0],
                velocity: vec![0.0, 0.0, 0.0],
                exits: true,
            }],
            friction: 0.01,
            restitution: 1.0,
            rest_speed: 0.25,
            scale: 100,
            seed: 0,
        };
        let (trace, truth) = simulate(&config).unwrap();
        assert_eq!(trace.frames.len(), 10);
        let positions: Vec<_> = trace
            .frames
            .iter()
            .map(|f| f.detections[0].pos.clone())
            .collect();
        assert!(positions.iter().all(|p| p == &positions[0]));
        assert!(truth.events.is_empty());
        assert!(!truth.moving_at(ObjId(0), 5));
        assert!(truth.present_at(ObjId(0), 9));
    }

    #[test]
    fn head_on_collision_swaps_velocities() {
        let (_, truth) = simulate(&two_ball_head_on()).unwrap();
        let collisions: Vec<_> = truth.events_of(EventKind::Collision).collect();
        assert_eq!(collisions.len(), 1);
        let tc = collisions[0].t;
        // Approach at 4 units/frame from a 21-unit gap minus 2 contact:
        // contact around frame 5.
        assert!((4..=6).contains(&tc), "collision at {tc}");
        // After an elastic head-on swap, both keep moving (no stop events).
        assert!(truth.events_of(EventKind::Stop).next().is_none());
        let t0 = &truth.trajectories[&0];
        // Object 0 reverses direction after the impact.
        let before = t0[tc].as_ref().unwrap()[0];
        let after = t0[tc + 2].as_ref().unwrap()[0];
        assert!(after < before);
    }

    #[test]
    fn simulation_is_deterministic() {
        let (t1, g1) = simulate(&two_ball_head_on()).unwrap();
        let (t2, g2) = simulate(&two_ball_head_on()).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(g1.to_json(), g2.to_json());
    }

    #[test]
    fn removing_isolated_object_keeps_others_bit_identical() {
        let mut config = two_ball_head_on();
        config.objects.push(ObjectSpec {
            id: 2,
            color: "green".into(),
            shape: "cube".into(),
            material: "rubber".into(),
            radius: 1.0,
            spawn_frame: 0,
            spawn_pos: vec![80.0, 90.0, 1.0],
            velocity: vec![0.0, -0.5, 0.0],
            exits: true,
        });
        let (_, full) = simulate(&config).unwrap();
        let (_, without) = resimulate_without(&config, ObjId(2)).unwrap();
        assert_eq!(full.trajectories[&0], without.trajectories[&0]);
        assert_eq!(full.trajectories[&1], without.trajectories[&1]);
        assert!(resimulate_without(&config, ObjId(99)).is_err());
    }

    #[test]
    fn removing_a_collider_cancels_the_collision() {
        let config = two_ball_head_on();
        let (_, full) = simulate(&config).unwrap();
        assert_eq!(full.events_of(EventKind::Collision).count(), 1);
        let (_, without) = resimulate_without(&config, ObjId(1)).unwrap();
        assert_eq!(without.events_of(EventKind::Collision).count(), 0);
    }

    #[test]
    fn chain_removal_cascades() {
        // 0 hits 1, which then hits 2. Removing 0 cancels both collisions.
        let config = SimConfig {
            video_id: "chain".into(),
            dims: 3,
            frame_count: 40,
            arena: Arena {
                min: [0.0, 0.0],
                max: [200.0, 100.0],
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
                    velocity: vec![3.0, 0.0, 0.0],
                    exits: false,
                },
                ObjectSpec {
                    id: 1,
                    color: "blue".into(),
                    shape: "sphere".into(),
                    material: "metal".into(),
                    radius: 1.0,
                    spawn_frame: 0,
                    spawn_pos: vec![40.7, 50.0, 1.0],
                    velocity: vec![0.0, 0.0, 0.0],
                    exits: false,
                },
                ObjectSpec {
                    id: 2,
                    color: "green".into(),
                    shape: "sphere".into(),
                    material: "metal".into(),
                    radius: 1.0,
                    spawn_frame: 0,
                    spawn_pos: vec![81.9, 50.0, 1.0],
                    velocity: vec![0.0, 0.0, 0.0],
                    exits: false,
                },
            ],
            friction: 0.0,
            restitution: 1.0,
            rest_speed: 0.1,
            scale: 100,
            seed: 0,
        };
        let (_, full) = simulate(&config).unwrap();
        assert_eq!(full.events_of(EventKind::Collision).count(), 2);
        let (_, without) = resimulate_without(&config, ObjId(0)).unwrap();
        assert_eq!(without.events_of(EventKind::Collision).count(), 0);
    }

    #[test]
    fn energy_never_increases() {
        // With restitution <= 1 and friction >= 0, total kinetic energy
        // (from the recorded per-step speeds) is non-increasing.
        for seed in 0..60u64 {
            let spec = GenSpec {
                frame_count: 60,
                ..Default::default()
            };
            let (config, _, truth) = generate_scene(&spec, seed).unwrap();
            let n = config.frame_count;
            let mut prev: Option<f64> = None;
            for t in 0..n {
                // Skip frames where an object spawns: it adds its energy.
                if config.objects.iter().any(|o| o.spawn_frame == t) {
                    prev = None;
                }
                let energy: f64 = truth
                    .speeds
                    .values()
                    .map(|row| row[t] * row[t])
                    .sum();
                if let Some(p) = prev {
                    assert!(
                        energy <= p + 1e-9,
                        "energy grew at seed {seed} t={t}: {p} -> {energy}"
                    );
                }
                prev = Some(energy);
            }
        }
    }

    #[test]
    fn entry_event_at_last_absent_frame() {
        let mut config = two_ball_head_on();
        config.objects[1].spawn_frame = 7;
        config.objects[1].spawn_pos = vec![70.0, 20.0, 1.0];
        config.objects[1].velocity = vec![1.0, 0.0, 0.0];
        let (trace, truth) = simulate(&config).unwrap();
        let entries: Vec<_> = truth.events_of(EventKind::Entry).collect();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].t, 6);
        assert_eq!(entries[0].a, ObjId(1));
        // Consistency with the trace: absent at 6, present at 7.
        assert!(!trace.frames[6].detections.iter().any(|d| d.id == ObjId(1)));
        assert!(trace.frames[7].detections.iter().any(|d| d.id == ObjId(1)));
    }

    #[test]
    fn exit_event_at_last_present_frame() {
        let mut config = two_ball_head_on();
        config.objects[1].spawn_pos = vec![95.0, 50.0, 1.0];
        config.objects[1].velocity = vec![3.0, 0.0, 0.0];
        config.objects[1].exits = true;
        let (trace, truth) = simulate(&config).unwrap();
        let exits: Vec<_> = truth.events_of(EventKind::Exit).collect();
        assert_eq!(exits.len(), 1);
        let te = exits[0].t;
        assert!(trace.frames[te].detections.iter().any(|d| d.id == ObjId(1)));
        assert!(!trace.frames[te + 1]
            .detections
            .iter()
            .any(|d| d.id == ObjId(1)));
    }

    #[test]
    fn ground_truth_json_roundtrip() {
        let (_, truth) = simulate(&two_ball_head_on()).unwrap();
        let json = truth.to_json();
        let back = GroundTruth::from_json(&json).unwrap();
        assert_eq!(truth, back);
    }

    #[test]
    fn generated_scenes_have_events() {
        let spec = GenSpec::default();
        let mut with_collision = 0;
        for seed in 0..20u64 {
            let (_, _, truth) = generate_scene(&spec, seed).unwrap();
            if truth.events_of(EventKind::Collision).next().is_some() {
                with_collision += 1;
            }
        }
        assert!(
            with_collision >= 12,
            "only {with_collision}/20 scenes had collisions"
        );
    }

    #[test]
    fn oracle_fixture_hand_checked() {
        use crate::query::{
            Answer, ObjFilter, QuestionAst, StatePred, TimeRef,
        };
        // Head-on scene: both balls keep moving the whole video (elastic
        // swap, no friction), nobody enters or exits.
        let (_, truth) = simulate(&two_ball_head_on()).unwrap();
        let count_moving_end = QuestionAst::CountState {
            filter: ObjFilter::default(),
            state: StatePred::Moving,
            time: TimeRef::End,
        };
        assert_eq!(
            oracle_answer(&count_moving_end, &truth).unwrap(),
            Answer::Count(2)
        );
        let exist_enter = QuestionAst::ExistEvent {
            filter: ObjFilter::default(),
            event: crate::query::EventClause::Enters,
            window: None,
        };
        assert_eq!(oracle_answer(&exist_enter, &truth).unwrap(), Answer::No);
        let red_collides = QuestionAst::ExistEvent {
            filter: ObjFilter {
                color: Some("red".into()),
                ..Default::default()
            },
            event: crate::query::EventClause::CollidesWith(ObjFilter {
                color: Some("blue".into()),
                ..Default::default()
            }),
            window: None,
        };
        assert_eq!(oracle_answer(&red_collides, &truth).unwrap(), Answer::Yes);
    }
}
