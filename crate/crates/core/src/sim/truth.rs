//! Ground truth: exact events, fluent tables, and trajectories, plus the
//! generating config (needed for counterfactual re-simulation).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::events::{Event, EventKind};
use crate::scene::ObjId;

use super::config::SimConfig;
use super::simulate::BodyView;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GroundTruth {
    pub video_id: String,
    pub config: SimConfig,
    /// All events with exact frames, sorted by (t, kind, participants).
    pub events: Vec<Event>,
    /// Per-object presence, rows t in [0, N].
    pub present: BTreeMap<i64, Vec<bool>>,
    /// Per-object moving fluent, rows t in [0, N].
    pub moving: BTreeMap<i64, Vec<bool>>,
    /// Raw trajectories; None when off camera.
    pub trajectories: BTreeMap<i64, Vec<Option<Vec<f64>>>>,
    /// Speed used for the step t -> t+1, per object per frame (zero once
    /// despawned).
    pub speeds: BTreeMap<i64, Vec<f64>>,
}

impl GroundTruth {
    /// Replay events through the effect table to produce the fluent tables,
    /// deriving move/stop events from the exact per-step speeds first.
    pub(super) fn build(
        config: &SimConfig,
        n: usize,
        bodies: &[BodyView],
        mut events: Vec<Event>,
        trajectories: BTreeMap<i64, Vec<Option<Vec<f64>>>>,
    ) -> GroundTruth {
        // Presence rows straight from the trajectories.
        let mut present: BTreeMap<i64, Vec<bool>> = BTreeMap::new();
        for (&id, track) in &trajectories {
            let mut row = vec![false; n + 1];
            for (t, p) in track.iter().enumerate() {
                row[t] = p.is_some();
            }
            present.insert(id, row);
        }

        // moving(v, t): the object moved into frame t (speed of the step
        // t-1 -> t), with the spawn frame seeded from its first step. This
        // matches the event-calculus convention that an event at t changes
        // state at t+1.
        let mut moving: BTreeMap<i64, Vec<bool>> = BTreeMap::new();
        for body in bodies {
            let mut row = vec![false; n + 1];
            if body.spawned {
                let s = body.spawn_frame;
                let last = body.last_present.unwrap_or(s);
                row[s] = body.step_speed[s] > 0.0;
                for t in (s + 1)..=(n.min(last + 1)) {
                    row[t] = body.step_speed[t - 1] > 0.0;
                }
                // moving cannot outlive presence
                for t in (last + 1)..=n {
                    row[t] = false;
                }
            }
            moving.insert(body.id, row);
        }

        // move/stop events: transitions of the moving row while present at
        // both ends of the step (mirroring the displacement precondition).
        for body in bodies {
            if !body.spawned {
                continue;
            }
            let row = &moving[&body.id];
            let pres = &present[&body.id];
            let last = body.last_present.unwrap_or(0);
            for t in body.spawn_frame..last {
                debug_assert!(pres[t] && pres[t + 1]);
                let was = row[t];
                let now = row[t + 1];
                if !was && now {
                    events.push(Event::unary(EventKind::Move, ObjId(body.id), t));
                } else if was && !now {
                    events.push(Event::unary(EventKind::Stop, ObjId(body.id), t));
                }
            }
        }

        let events = crate::events::EventLog::sorted(events);
        let speeds = bodies
            .iter()
            .map(|b| (b.id, b.step_speed.clone()))
            .collect();
        GroundTruth {
            video_id: config.video_id.clone(),
            config: config.clone(),
            events,
            present,
            moving,
            trajectories,
            speeds,
        }
    }

    pub fn horizon(&self) -> usize {
        self.config.frame_count
    }

    pub fn present_at(&self, id: ObjId, t: usize) -> bool {
        self.present
            .get(&id.0)
            .and_then(|r| r.get(t))
            .copied()
            .unwrap_or(false)
    }

    pub fn moving_at(&self, id: ObjId, t: usize) -> bool {
        self.moving
            .get(&id.0)
            .and_then(|r| r.get(t))
            .copied()
            .unwrap_or(false)
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ground truth serializes")
    }

    pub fn from_json(text: &str) -> Result<GroundTruth, serde_json::Error> {
        serde_json::from_str(text)
    }
}
