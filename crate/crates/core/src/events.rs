//! Event detection, fluent timelines, and the causal graph.
//!
//! Detection mirrors the rule formulation exactly, evaluated frame by frame
//! so the `moving`/`collided` guards read the same state the rule engine
//! would. Variant H0 uses the plain entry and move rules; H1 requires an
//! object to be on camera for two consecutive frames to enter; H2 further
//! requires the displacement bound to hold over two consecutive frame pairs
//! to move.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::facts::FactBase;
use crate::logic::{Atom, Sym, Term};
use crate::physics::{Kinematics, Thresholds};
use crate::scene::ObjId;

/// Event-detection rule set variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Variant {
    H0,
    H1,
    H2,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::H0, Variant::H1, Variant::H2];

    /// Consecutive on-camera frames required after an entry.
    pub fn entry_window(self, th: &Thresholds) -> usize {
        match self {
            Variant::H0 => 1,
            Variant::H1 | Variant::H2 => th.persistence_window.max(1) as usize,
        }
    }

    /// Consecutive displacement pairs required for a move.
    pub fn move_window(self, th: &Thresholds) -> usize {
        match self {
            Variant::H0 | Variant::H1 => 1,
            Variant::H2 => th.persistence_window.max(1) as usize,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::H0 => write!(f, "H0"),
            Variant::H1 => write!(f, "H1"),
            Variant::H2 => write!(f, "H2"),
        }
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "H0" | "h0" | "0" => Ok(Variant::H0),
            "H1" | "h1" | "1" => Ok(Variant::H1),
            "H2" | "h2" | "2" => Ok(Variant::H2),
            other => Err(format!("unknown variant `{other}` (expected H0, H1, H2)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Entry,
    Exit,
    Move,
    Stop,
    Collision,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Entry => "entry",
            EventKind::Exit => "exit",
            EventKind::Move => "move",
            EventKind::Stop => "stop",
            EventKind::Collision => "collision",
        }
    }
}

/// A detected event. Collision participants are canonically ordered
/// (smaller id first); other kinds have a single participant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Event {
    pub t: usize,
    pub kind: EventKind,
    pub a: ObjId,
    pub b: Option<ObjId>,
}

impl Event {
    pub fn unary(kind: EventKind, a: ObjId, t: usize) -> Event {
        debug_assert!(kind != EventKind::Collision);
        Event { t, kind, a, b: None }
    }

    pub fn collision(a: ObjId, b: ObjId, t: usize) -> Event {
        let (a, b) = if a.0 <= b.0 { (a, b) } else { (b, a) };
        debug_assert!(a != b);
        Event {
            t,
            kind: EventKind::Collision,
            a,
            b: Some(b),
        }
    }

    pub fn participants(&self) -> impl Iterator<Item = ObjId> + '_ {
        std::iter::once(self.a).chain(self.b)
    }

    /// The event term, e.g. `entry(3)` or `collision(1,2)`.
    pub fn term(&self) -> Term {
        let mut args = vec![Term::Int(self.a.0)];
        if let Some(b) = self.b {
            args.push(Term::Int(b.0));
        }
        Term::app(self.kind.name(), args)
    }

    /// `happens(kind(args), t).`
    pub fn happens_atom(&self) -> Atom {
        Atom::new("happens", vec![self.term(), Term::Int(self.t as i64)])
    }
}

/// Detected events plus the initial-state seeds needed to replay the fluent
/// timeline without re-deciding thresholds.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EventLog {
    /// Sorted by (t, kind, participants).
    pub events: Vec<Event>,
    /// Objects moving from t = 0 (displacement over the first frame pair
    /// above the move threshold).
    pub initially_moving: BTreeSet<ObjId>,
    /// Objects on camera at t = 0.
    pub initially_present: BTreeSet<ObjId>,
}

impl EventLog {
    pub fn sorted(mut events: Vec<Event>) -> Vec<Event> {
        events.sort_by_key(|e| (e.t, e.kind, e.a, e.b));
        events
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    /// One line per event, `happens(kind(args), t).`, sorted by
    /// (t, kind, args) — directly loadable as engine facts.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut sorted = self.events.clone();
        sorted.sort_by_key(|e| (e.t, e.kind, e.a, e.b));
        for e in &sorted {
            out.push_str(&format!("{}.\n", e.happens_atom()));
        }
        out
    }
}

/// Detect all events over a reconstructed fact base.
pub fn detect_events(fb: &FactBase, th: &Thresholds, variant: Variant) -> EventLog {
    detect_from_kinematics(&Kinematics::from_facts(fb), th, variant)
}

/// Detection against a precomputed kinematics table (used by calibration to
/// share tables across threshold choices).
pub fn detect_from_kinematics(kin: &Kinematics, th: &Thresholds, variant: Variant) -> EventLog {
    let n = kin.horizon;
    let entry_w = variant.entry_window(th);
    let move_w = variant.move_window(th);

    let mut initially_present = BTreeSet::new();
    let mut initially_moving = BTreeSet::new();
    for &v in &kin.objects {
        if kin.on_camera(v, 0) {
            initially_present.insert(v);
            if kin.disp(v, 0).is_some_and(|d| d > th.d_move) {
                initially_moving.insert(v);
            }
        }
    }

    let mut timeline = TimelineState::new(&initially_present, &initially_moving);
    let mut events = Vec::new();

    for t in 0..n {
        // Fluent state at t is already final: events at t-1 were applied.
        let mut frame_events = Vec::new();

        for &v in &kin.objects {
            // entry: absent at t, present for entry_w consecutive frames.
            if !kin.on_camera(v, t)
                && (1..=entry_w).all(|k| t + k < n && kin.on_camera(v, t + k))
            {
                frame_events.push(Event::unary(EventKind::Entry, v, t));
            }
            // exit: present at t, absent at t+1 (within horizon).
            if t + 1 < n && kin.on_camera(v, t) && !kin.on_camera(v, t + 1) {
                frame_events.push(Event::unary(EventKind::Exit, v, t));
            }
            // move: displacement above bound over move_w consecutive pairs,
            // and not already moving.
            if !timeline.moving.contains(&v)
                && (0..move_w).all(|k| kin.disp(v, t + k).is_some_and(|d| d > th.d_move))
            {
                frame_events.push(Event::unary(EventKind::Move, v, t));
            }
            // stop: displacement at or below bound, currently moving.
            if timeline.moving.contains(&v)
                && kin.disp(v, t).is_some_and(|d| d <= th.d_stop)
            {
                frame_events.push(Event::unary(EventKind::Stop, v, t));
            }
        }
        // collision: proximity plus velocity change on both objects, once
        // per unordered pair per video.
        for (i, &v1) in kin.objects.iter().enumerate() {
            for &v2 in &kin.objects[i + 1..] {
                if timeline.collided.contains(&(v1, v2)) {
                    continue;
                }
                let close = kin
                    .sq_distance(v1, v2, t)
                    .is_some_and(|d| d <= th.d_prox);
                if close
                    && kin.vel_change(v1, t).is_some_and(|c| c >= th.d_vel)
                    && kin.vel_change(v2, t).is_some_and(|c| c >= th.d_vel)
                {
                    frame_events.push(Event::collision(v1, v2, t));
                }
            }
        }

        timeline.apply(&frame_events);
        events.extend(frame_events);
    }

    EventLog {
        events: EventLog::sorted(events),
        initially_moving,
        initially_present,
    }
}

/// Mutable fluent state driven by the event-calculus effect table.
struct TimelineState {
    present: BTreeSet<ObjId>,
    moving: BTreeSet<ObjId>,
    collided: BTreeSet<(ObjId, ObjId)>,
}

impl TimelineState {
    fn new(present: &BTreeSet<ObjId>, moving: &BTreeSet<ObjId>) -> Self {
        TimelineState {
            present: present.clone(),
            moving: moving.clone(),
            collided: BTreeSet::new(),
        }
    }

    /// Apply the effect table for events at t, producing the state at t+1.
    /// Termination wins over initiation at the same time point (the clipped
    /// check precedes initiation).
    fn apply(&mut self, events: &[Event]) {
        let mut initiate_present = Vec::new();
        let mut initiate_moving = Vec::new();
        let mut clip_present = BTreeSet::new();
        let mut clip_moving = BTreeSet::new();
        for e in events {
            match e.kind {
                EventKind::Entry => {
                    initiate_present.push(e.a);
                    initiate_moving.push(e.a);
                }
                EventKind::Exit => {
                    clip_present.insert(e.a);
                    clip_moving.insert(e.a);
                }
                EventKind::Move => initiate_moving.push(e.a),
                EventKind::Stop => {
                    clip_moving.insert(e.a);
                }
                EventKind::Collision => {
                    self.collided.insert((e.a, e.b.unwrap()));
                }
            }
        }
        for v in initiate_present {
            if !clip_present.contains(&v) {
                self.present.insert(v);
            }
        }
        for v in initiate_moving {
            if !clip_moving.contains(&v) {
                self.moving.insert(v);
            }
        }
        for v in &clip_present {
            self.present.remove(v);
        }
        for v in &clip_moving {
            self.moving.remove(v);
        }
    }
}

// ---------------------------------------------------------------------------
// Fluent timeline
// ---------------------------------------------------------------------------

/// Per-frame truth values of the `present`, `moving` and `collided` fluents.
///
/// Rows cover t in [0, N]; the row at N is the state following the last
/// frame's events (used when a question samples state right after an event
/// in the final frame).
#[derive(Clone, Debug, PartialEq)]
pub struct FluentTimeline {
    pub horizon: usize,
    present: BTreeMap<ObjId, Vec<bool>>,
    moving: BTreeMap<ObjId, Vec<bool>>,
    /// Frame from which `collided(a,b)` holds (event frame + 1).
    collided_from: BTreeMap<(ObjId, ObjId), usize>,
}

impl FluentTimeline {
    pub fn present_at(&self, v: ObjId, t: usize) -> bool {
        self.present
            .get(&v)
            .and_then(|row| row.get(t))
            .copied()
            .unwrap_or(false)
    }

    pub fn moving_at(&self, v: ObjId, t: usize) -> bool {
        self.moving
            .get(&v)
            .and_then(|row| row.get(t))
            .copied()
            .unwrap_or(false)
    }

    pub fn collided_at(&self, a: ObjId, b: ObjId, t: usize) -> bool {
        let key = if a.0 <= b.0 { (a, b) } else { (b, a) };
        self.collided_from.get(&key).is_some_and(|&from| t >= from)
    }

    pub fn objects(&self) -> impl Iterator<Item = ObjId> + '_ {
        self.present.keys().copied()
    }

    pub fn collided_pairs(&self) -> impl Iterator<Item = ((ObjId, ObjId), usize)> + '_ {
        self.collided_from.iter().map(|(&k, &v)| (k, v))
    }

    /// `holdsAt(fluent, t)` atoms for t in [0, limit].
    pub fn holds_atoms(&self, limit: usize) -> Vec<Atom> {
        let mut out = Vec::new();
        for (&v, row) in &self.present {
            for (t, &h) in row.iter().enumerate().take(limit + 1) {
                if h {
                    out.push(Atom::new(
                        "holdsAt",
                        vec![
                            Term::app("present", vec![Term::Int(v.0)]),
                            Term::Int(t as i64),
                        ],
                    ));
                }
            }
        }
        for (&v, row) in &self.moving {
            for (t, &h) in row.iter().enumerate().take(limit + 1) {
                if h {
                    out.push(Atom::new(
                        "holdsAt",
                        vec![
                            Term::app("moving", vec![Term::Int(v.0)]),
                            Term::Int(t as i64),
                        ],
                    ));
                }
            }
        }
        for (&(a, b), &from) in &self.collided_from {
            for t in from..=limit {
                out.push(Atom::new(
                    "holdsAt",
                    vec![
                        Term::app("collided", vec![Term::Int(a.0), Term::Int(b.0)]),
                        Term::Int(t as i64),
                    ],
                ));
            }
        }
        out.sort();
        out
    }
}

/// Replay an event log through the event-calculus axioms and effect table.
///
/// Returns the timeline plus warnings for any simultaneous
/// initiate/terminate conflicts (resolved termination-first).
pub fn compute_fluents(events: &EventLog, fb: &FactBase) -> (FluentTimeline, Vec<String>) {
    let n = fb.time_horizon;
    let mut objects: BTreeSet<ObjId> = fb
        .atoms_of(Sym::new("object"))
        .iter()
        .map(|a| ObjId(a.args[0].as_int().expect("object id")))
        .collect();
    for e in &events.events {
        objects.extend(e.participants());
    }

    let mut warnings = Vec::new();
    let mut present: BTreeMap<ObjId, Vec<bool>> =
        objects.iter().map(|&v| (v, vec![false; n + 1])).collect();
    let mut moving: BTreeMap<ObjId, Vec<bool>> =
        objects.iter().map(|&v| (v, vec![false; n + 1])).collect();
    let mut collided_from: BTreeMap<(ObjId, ObjId), usize> = BTreeMap::new();

    let mut state = TimelineState::new(&events.initially_present, &events.initially_moving);
    let mut by_t: BTreeMap<usize, Vec<Event>> = BTreeMap::new();
    for e in &events.events {
        by_t.entry(e.t).or_default().push(*e);
    }

    for t in 0..=n {
        for &v in &state.present {
            if let Some(row) = present.get_mut(&v) {
                row[t] = true;
            }
        }
        for &v in &state.moving {
            if let Some(row) = moving.get_mut(&v) {
                row[t] = true;
            }
        }
        if t < n {
            let frame = by_t.get(&t).cloned().unwrap_or_default();
            // Conflict report: same fluent initiated and terminated at t.
            for e in &frame {
                if e.kind == EventKind::Move
                    && frame
                        .iter()
                        .any(|o| o.kind == EventKind::Stop && o.a == e.a)
                {
                    warnings.push(format!(
                        "simultaneous initiate+terminate of moving({}) at t={t}; \
                         termination wins",
                        e.a
                    ));
                }
                if e.kind == EventKind::Entry
                    && frame
                        .iter()
                        .any(|o| o.kind == EventKind::Exit && o.a == e.a)
                {
                    warnings.push(format!(
                        "simultaneous initiate+terminate of present({}) at t={t}; \
                         termination wins",
                        e.a
                    ));
                }
                if e.kind == EventKind::Collision {
                    collided_from.insert((e.a, e.b.unwrap()), t + 1);
                }
            }
            state.apply(&frame);
        }
    }

    (
        FluentTimeline {
            horizon: n,
            present,
            moving,
            collided_from,
        },
        warnings,
    )
}

// ---------------------------------------------------------------------------
// Causal graph
// ---------------------------------------------------------------------------

/// A node of the cause relation: an object or a specific event instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CauseNode {
    Object(ObjId),
    Event(Event),
}

impl CauseNode {
    /// The term form used by the rule formulation: `object(v)` or
    /// `event(kind(args), t)`.
    pub fn term(&self) -> Term {
        match self {
            CauseNode::Object(v) => Term::app("object", vec![Term::Int(v.0)]),
            CauseNode::Event(e) => {
                Term::app("event", vec![e.term(), Term::Int(e.t as i64)])
            }
        }
    }
}

/// The transitive cause relation over objects and event instances.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CauseRelation {
    pub edges: BTreeSet<(CauseNode, CauseNode)>,
}

impl CauseRelation {
    pub fn causes(&self, from: CauseNode, to: CauseNode) -> bool {
        self.edges.contains(&(from, to))
    }

    /// `cause(a, b)` atoms.
    pub fn atoms(&self) -> Vec<Atom> {
        let mut out: Vec<Atom> = self
            .edges
            .iter()
            .map(|(a, b)| Atom::new("cause", vec![a.term(), b.term()]))
            .collect();
        out.sort();
        out
    }
}

/// Build the cause relation: objects are responsible for their events;
/// an event causes a later event when they share a participant; the
/// relation is closed under transitivity.
pub fn causal_graph(events: &EventLog) -> CauseRelation {
    let mut edges: BTreeSet<(CauseNode, CauseNode)> = BTreeSet::new();
    for e in &events.events {
        for p in e.participants() {
            edges.insert((CauseNode::Object(p), CauseNode::Event(*e)));
        }
    }
    for e1 in &events.events {
        for e2 in &events.events {
            if e1.t < e2.t
                && e1
                    .participants()
                    .any(|p| e2.participants().any(|q| q == p))
            {
                edges.insert((CauseNode::Event(*e1), CauseNode::Event(*e2)));
            }
        }
    }
    // Transitive closure by iterated composition.
    loop {
        let mut added = Vec::new();
        for (a, b) in &edges {
            for (c, d) in &edges {
                if b == c && !edges.contains(&(*a, *d)) {
                    added.push((*a, *d));
                }
            }
        }
        if added.is_empty() {
            break;
        }
        edges.extend(added);
    }
    CauseRelation { edges }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facts::reconstruct;
    use crate::scene::{Detection, Dims, Frame, SceneTrace};

    fn trace(tracks: &[(i64, Vec<Option<[i64; 3]>>)]) -> SceneTrace {
        let n = tracks.iter().map(|(_, v)| v.len()).max().unwrap();
        let frames = (0..n)
            .map(|t| Frame {
                t,
                detections: tracks
                    .iter()
                    .filter_map(|(id, track)| {
                        track.get(t).copied().flatten().map(|p| Detection {
                            id: ObjId(*id),
                            color: "red".into(),
                            shape: "cube".into(),
                            material: "metal".into(),
                            pos: vec![p[0] as f64, p[1] as f64, p[2] as f64],
                            score: 1.0,
                        })
                    })
                    .collect(),
            })
            .collect();
        SceneTrace {
            video_id: "ev".into(),
            dims: Dims::Three,
            frame_count: n,
            frames,
        }
    }

    fn th() -> Thresholds {
        Thresholds {
            d_move: 100,
            d_stop: 50,
            d_prox: 10_000,
            d_vel: 100,
            persistence_window: 2,
        }
    }

    #[test]
    fn always_present_object_has_no_entry_or_exit() {
        let t = trace(&[(0, vec![Some([0, 0, 0]); 5])]);
        let fb = reconstruct(&t).unwrap();
        let log = detect_events(&fb, &th(), Variant::H0);
        assert!(log.events_of(EventKind::Entry).next().is_none());
        assert!(log.events_of(EventKind::Exit).next().is_none());
        assert!(log.initially_present.contains(&ObjId(0)));
    }

    #[test]
    fn entry_at_last_absent_frame() {
        // Absent at 0..=4, present from 5 on.
        let mut track = vec![None; 5];
        track.extend([Some([0, 0, 0]); 4]);
        let t = trace(&[(0, track)]);
        let fb = reconstruct(&t).unwrap();
        for variant in [Variant::H0, Variant::H1] {
            let log = detect_events(&fb, &th(), variant);
            let entries: Vec<&Event> = log.events_of(EventKind::Entry).collect();
            assert_eq!(entries.len(), 1, "{variant}");
            assert_eq!(entries[0].t, 4, "{variant}");
        }
    }

    #[test]
    fn h1_requires_two_present_frames() {
        // Present only at t=2 (single-frame phantom).
        let t = trace(&[
            (0, vec![Some([0, 0, 0]); 6]),
            (1, vec![None, None, Some([500, 0, 0]), None, None, None]),
        ]);
        let fb = reconstruct(&t).unwrap();
        let h0 = detect_events(&fb, &th(), Variant::H0);
        let h1 = detect_events(&fb, &th(), Variant::H1);
        assert!(h0
            .events_of(EventKind::Entry)
            .any(|e| e.a == ObjId(1) && e.t == 1));
        assert!(h1.events_of(EventKind::Entry).all(|e| e.a != ObjId(1)));
        // Exit of the phantom still fires under both.
        assert!(h1
            .events_of(EventKind::Exit)
            .any(|e| e.a == ObjId(1) && e.t == 2));
    }

    #[test]
    fn move_and_stop_toggle_moving() {
        // Stationary 0..=2, moving 3..=5, stationary 6..
        let track = vec![
            Some([0, 0, 0]),
            Some([0, 0, 0]),
            Some([0, 0, 0]),
            Some([20, 0, 0]),
            Some([40, 0, 0]),
            Some([60, 0, 0]),
            Some([60, 0, 0]),
            Some([60, 0, 0]),
        ];
        let t = trace(&[(0, track)]);
        let fb = reconstruct(&t).unwrap();
        let log = detect_events(&fb, &th(), Variant::H0);
        let moves: Vec<&Event> = log.events_of(EventKind::Move).collect();
        let stops: Vec<&Event> = log.events_of(EventKind::Stop).collect();
        assert_eq!(moves.len(), 1);
        assert_eq!(moves[0].t, 2); // displacement [2,3] is the first above bound
        assert_eq!(stops.len(), 1);
        assert_eq!(stops[0].t, 5); // displacement [5,6] back below bound
        let (tl, warn) = compute_fluents(&log, &fb);
        assert!(warn.is_empty());
        for t in 0..=2 {
            assert!(!tl.moving_at(ObjId(0), t));
        }
        for t in 3..=5 {
            assert!(tl.moving_at(ObjId(0), t));
        }
        for t in 6..8 {
            assert!(!tl.moving_at(ObjId(0), t));
        }
    }

    #[test]
    fn h2_requires_two_displacement_pairs() {
        // One single-frame jump: disp big over [2,3] only.
        let track = vec![
            Some([0, 0, 0]),
            Some([0, 0, 0]),
            Some([0, 0, 0]),
            Some([20, 0, 0]),
            Some([20, 0, 0]),
            Some([20, 0, 0]),
        ];
        let t = trace(&[(0, track)]);
        let fb = reconstruct(&t).unwrap();
        let h1 = detect_events(&fb, &th(), Variant::H1);
        let h2 = detect_events(&fb, &th(), Variant::H2);
        assert_eq!(h1.events_of(EventKind::Move).count(), 1);
        assert_eq!(h2.events_of(EventKind::Move).count(), 0);
    }

    #[test]
    fn initially_moving_seeds_the_timeline() {
        let track = vec![Some([0, 0, 0]), Some([20, 0, 0]), Some([40, 0, 0])];
        let t = trace(&[(0, track)]);
        let fb = reconstruct(&t).unwrap();
        let log = detect_events(&fb, &th(), Variant::H0);
        assert!(log.initially_moving.contains(&ObjId(0)));
        // No move event: the object was moving from the start.
        assert_eq!(log.events_of(EventKind::Move).count(), 0);
        let (tl, _) = compute_fluents(&log, &fb);
        assert!(tl.moving_at(ObjId(0), 0));
    }

    #[test]
    fn collision_detected_once_per_pair() {
        // Two objects approach, touch at t=2, and separate; the velocity
        // change at the impact frame plus proximity triggers exactly one
        // collision even though conditions may hold for two frames.
        let t = trace(&[
            (
                0,
                vec![
                    Some([0, 0, 0]),
                    Some([40, 0, 0]),
                    Some([80, 0, 0]),
                    Some([80, 0, 0]),
                    Some([80, 0, 0]),
                ],
            ),
            (
                1,
                vec![
                    Some([160, 0, 0]),
                    Some([120, 0, 0]),
                    Some([100, 0, 0]),
                    Some([140, 0, 0]),
                    Some([180, 0, 0]),
                ],
            ),
        ]);
        let fb = reconstruct(&t).unwrap();
        let log = detect_events(&fb, &th(), Variant::H0);
        let collisions: Vec<&Event> = log.events_of(EventKind::Collision).collect();
        assert_eq!(collisions.len(), 1);
        assert_eq!(collisions[0].a, ObjId(0));
        assert_eq!(collisions[0].b, Some(ObjId(1)));
        let (tl, _) = compute_fluents(&log, &fb);
        let tc = collisions[0].t;
        assert!(!tl.collided_at(ObjId(0), ObjId(1), tc));
        assert!(tl.collided_at(ObjId(1), ObjId(0), tc + 1));
    }

    #[test]
    fn fluent_replay_matches_hand_enumeration() {
        // move at 3, stop at 7: moving on [4,7], false on [8,N).
        let fb = reconstruct(&trace(&[(0, vec![Some([0, 0, 0]); 10])])).unwrap();
        let log = EventLog {
            events: vec![
                Event::unary(EventKind::Move, ObjId(0), 3),
                Event::unary(EventKind::Stop, ObjId(0), 7),
            ],
            initially_moving: BTreeSet::new(),
            initially_present: [ObjId(0)].into(),
        };
        let (tl, _) = compute_fluents(&log, &fb);
        for t in 0..=3 {
            assert!(!tl.moving_at(ObjId(0), t), "t={t}");
        }
        for t in 4..=7 {
            assert!(tl.moving_at(ObjId(0), t), "t={t}");
        }
        for t in 8..10 {
            assert!(!tl.moving_at(ObjId(0), t), "t={t}");
        }
    }

    #[test]
    fn simultaneous_initiate_terminate_warns_and_terminates() {
        let fb = reconstruct(&trace(&[(0, vec![Some([0, 0, 0]); 4])])).unwrap();
        let log = EventLog {
            events: vec![
                Event::unary(EventKind::Move, ObjId(0), 1),
                Event::unary(EventKind::Stop, ObjId(0), 1),
            ],
            initially_moving: BTreeSet::new(),
            initially_present: [ObjId(0)].into(),
        };
        let (tl, warnings) = compute_fluents(&log, &fb);
        assert_eq!(warnings.len(), 1);
        assert!(!tl.moving_at(ObjId(0), 2));
    }

    #[test]
    fn persistence_window_one_degrades_to_h0() {
        let mut track = vec![None, None];
        track.extend([Some([0, 0, 0]); 2]);
        track.extend([Some([20, 0, 0]), Some([20, 0, 0])]);
        let t = trace(&[(0, track)]);
        let fb = reconstruct(&t).unwrap();
        let th1 = Thresholds {
            persistence_window: 1,
            ..th()
        };
        let h0 = detect_events(&fb, &th(), Variant::H0);
        let h2_narrow = detect_events(&fb, &th1, Variant::H2);
        assert_eq!(h0.events, h2_narrow.events);
    }

    #[test]
    fn causal_chain_through_shared_participant() {
        let e1 = Event::collision(ObjId(1), ObjId(2), 10);
        let e2 = Event::collision(ObjId(2), ObjId(3), 20);
        let log = EventLog {
            events: vec![e1, e2],
            ..Default::default()
        };
        let g = causal_graph(&log);
        assert!(g.causes(CauseNode::Event(e1), CauseNode::Event(e2)));
        assert!(g.causes(CauseNode::Object(ObjId(1)), CauseNode::Event(e1)));
        // Transitivity: object 1 causes the second collision too.
        assert!(g.causes(CauseNode::Object(ObjId(1)), CauseNode::Event(e2)));
        // Time-forward only.
        assert!(!g.causes(CauseNode::Event(e2), CauseNode::Event(e1)));
    }

    #[test]
    fn disjoint_participants_unrelated() {
        let e1 = Event::collision(ObjId(1), ObjId(2), 10);
        let e2 = Event::collision(ObjId(3), ObjId(4), 20);
        let log = EventLog {
            events: vec![e1, e2],
            ..Default::default()
        };
        let g = causal_graph(&log);
        assert!(!g.causes(CauseNode::Event(e1), CauseNode::Event(e2)));
    }

    #[test]
    fn event_dump_is_sorted_and_loadable() {
        let log = EventLog {
            events: EventLog::sorted(vec![
                Event::collision(ObjId(2), ObjId(1), 7),
                Event::unary(EventKind::Entry, ObjId(0), 3),
            ]),
            ..Default::default()
        };
        let dump = log.dump();
        assert_eq!(dump, "happens(entry(0),3).\nhappens(collision(1,2),7).\n");
        let program = crate::engine::parse_program(&dump).unwrap();
        assert_eq!(program.facts.len(), 2);
    }
}
