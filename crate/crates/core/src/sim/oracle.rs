//! Brute-force question answering straight off the ground truth.
//!
//! No rules and no engine: object attributes come from the config, events
//! and fluent rows from the ground truth, and the cause relation is
//! breadth-first reachability over the one-step responsibility edges. This
//! is the independent verification path for the reasoner.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::events::{Event, EventKind};
use crate::query::{
    Answer, AnchorEvent, AnchorKind, CauseOption, EventClause, EventStatement, ObjFilter,
    QuestionAst, StatePred, TargetEvent, TimeRef, Window,
};
use crate::scene::ObjId;

use super::truth::GroundTruth;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("ambiguous referent: {found} distinct attribute values")]
    Ambiguous { found: usize },
    #[error("no referent matches the attribute question")]
    NoReferent,
    #[error("predictive and counterfactual questions need the simulator context")]
    NeedsSimulation,
}

/// Does the filter match this particular object?
pub fn filter_matches_object(gt: &GroundTruth, f: &ObjFilter, id: ObjId) -> bool {
    matches(gt, f).contains(&id)
}

fn matches(gt: &GroundTruth, f: &ObjFilter) -> Vec<ObjId> {
    gt.config
        .objects
        .iter()
        .filter(|o| {
            f.color.as_deref().is_none_or(|c| c == o.color)
                && f.material.as_deref().is_none_or(|m| m == o.material)
                && f.shape.as_deref().is_none_or(|s| s == o.shape)
        })
        .map(|o| ObjId(o.id))
        .collect()
}

fn first_entry(gt: &GroundTruth, v: ObjId) -> Option<usize> {
    gt.events_of(EventKind::Entry)
        .filter(|e| e.a == v)
        .map(|e| e.t)
        .min()
}

fn last_exit(gt: &GroundTruth, v: ObjId) -> Option<usize> {
    gt.events_of(EventKind::Exit)
        .filter(|e| e.a == v)
        .map(|e| e.t)
        .max()
}

/// Frames at which a state question samples fluents; one per anchor binding.
fn sample_times(gt: &GroundTruth, time: &TimeRef) -> Vec<usize> {
    match time {
        TimeRef::Begin => vec![0],
        TimeRef::End => vec![gt.horizon() - 1],
        TimeRef::After(anchor) => anchor_times(gt, anchor)
            .into_iter()
            .map(|t| t + 1)
            .collect(),
        TimeRef::Before(anchor) => anchor_times(gt, anchor)
            .into_iter()
            .filter(|&t| t > 0)
            .map(|t| t - 1)
            .collect(),
    }
}

fn anchor_times(gt: &GroundTruth, anchor: &AnchorEvent) -> Vec<usize> {
    matches(gt, &anchor.obj)
        .into_iter()
        .filter_map(|v| match anchor.kind {
            AnchorKind::Enters => first_entry(gt, v),
            AnchorKind::Exits => last_exit(gt, v),
        })
        .collect()
}

fn state_at(gt: &GroundTruth, v: ObjId, state: StatePred, t: usize) -> bool {
    match state {
        StatePred::Moving => gt.moving_at(v, t),
        StatePred::Present => gt.present_at(v, t),
        StatePred::Stationary => gt.present_at(v, t) && !gt.moving_at(v, t),
    }
}

/// Objects satisfying a state question: state true at some anchor-derived
/// sample frame.
fn state_objects(gt: &GroundTruth, filter: &ObjFilter, state: StatePred, time: &TimeRef) -> Vec<ObjId> {
    let times = sample_times(gt, time);
    matches(gt, filter)
        .into_iter()
        .filter(|&v| times.iter().any(|&t| state_at(gt, v, state, t)))
        .collect()
}

fn window_contains(gt: &GroundTruth, window: &Option<Window>, t: usize) -> bool {
    match window {
        None => true,
        Some(Window::Before(anchor)) => anchor_times(gt, anchor).iter().any(|&ta| t < ta),
        Some(Window::After(anchor)) => anchor_times(gt, anchor).iter().any(|&ta| t > ta),
    }
}

/// Objects with a qualifying event participation.
fn event_objects(
    gt: &GroundTruth,
    filter: &ObjFilter,
    clause: &EventClause,
    window: &Option<Window>,
) -> Vec<ObjId> {
    let candidates = matches(gt, filter);
    candidates
        .into_iter()
        .filter(|&v| match clause {
            EventClause::Enters => gt
                .events_of(EventKind::Entry)
                .any(|e| e.a == v && window_contains(gt, window, e.t)),
            EventClause::Exits => gt
                .events_of(EventKind::Exit)
                .any(|e| e.a == v && window_contains(gt, window, e.t)),
            EventClause::CollidesWith(f2) => {
                let others = matches(gt, f2);
                gt.events_of(EventKind::Collision).any(|e| {
                    let (a, b) = (e.a, e.b.unwrap());
                    let hit = (a == v && others.contains(&b) && b != v)
                        || (b == v && others.contains(&a) && a != v);
                    hit && window_contains(gt, window, e.t)
                })
            }
        })
        .collect()
}

fn attr_of(gt: &GroundTruth, v: ObjId, attr: crate::query::AttrKind) -> String {
    let o = gt.config.object(v).expect("object in config");
    match attr {
        crate::query::AttrKind::Color => o.color.clone(),
        crate::query::AttrKind::Shape => o.shape.clone(),
        crate::query::AttrKind::Material => o.material.clone(),
    }
}

fn unique_attr(
    gt: &GroundTruth,
    objs: &[ObjId],
    attr: crate::query::AttrKind,
) -> Result<Answer, OracleError> {
    let mut values: BTreeSet<String> = BTreeSet::new();
    for &v in objs {
        values.insert(attr_of(gt, v, attr));
    }
    match values.len() {
        0 => Err(OracleError::NoReferent),
        1 => Ok(Answer::Attr(values.into_iter().next().unwrap())),
        n => Err(OracleError::Ambiguous { found: n }),
    }
}

// ---------------------------------------------------------------------------
// Cause reachability (independent of events::causal_graph)
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Node {
    Object(ObjId),
    Event(Event),
}

/// One-step responsibility edges: object -> its events; earlier event ->
/// later event sharing a participant.
fn successors(gt: &GroundTruth, node: Node) -> Vec<Node> {
    match node {
        Node::Object(v) => gt
            .events
            .iter()
            .filter(|e| e.participants().any(|p| p == v))
            .map(|e| Node::Event(*e))
            .collect(),
        Node::Event(e1) => gt
            .events
            .iter()
            .filter(|e2| {
                e1.t < e2.t && e1.participants().any(|p| e2.participants().any(|q| q == p))
            })
            .map(|e| Node::Event(*e))
            .collect(),
    }
}

/// Breadth-first reachability: does `from` cause `to`?
pub fn causes(gt: &GroundTruth, from: Node, to: Node) -> bool {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    for s in successors(gt, from) {
        if seen.insert(s) {
            queue.push_back(s);
        }
    }
    while let Some(n) = queue.pop_front() {
        if n == to {
            return true;
        }
        for s in successors(gt, n) {
            if seen.insert(s) {
                queue.push_back(s);
            }
        }
    }
    false
}

/// Resolve the explanatory target to concrete event nodes (one per matching
/// binding).
fn target_events(gt: &GroundTruth, target: &TargetEvent) -> Vec<Event> {
    match target {
        TargetEvent::Exit(f) => matches(gt, f)
            .into_iter()
            .filter_map(|v| {
                let t = last_exit(gt, v)?;
                Some(Event::unary(EventKind::Exit, v, t))
            })
            .collect(),
        TargetEvent::Collision(f1, f2) => {
            let xs = matches(gt, f1);
            let ys = matches(gt, f2);
            gt.events_of(EventKind::Collision)
                .filter(|e| {
                    let (a, b) = (e.a, e.b.unwrap());
                    (xs.contains(&a) && ys.contains(&b)) || (xs.contains(&b) && ys.contains(&a))
                })
                .copied()
                .collect()
        }
    }
}

fn option_nodes(gt: &GroundTruth, option: &CauseOption) -> Vec<Node> {
    match option {
        CauseOption::Object(f) => matches(gt, f).into_iter().map(Node::Object).collect(),
        CauseOption::Entry(f) => {
            let objs = matches(gt, f);
            gt.events_of(EventKind::Entry)
                .filter(|e| objs.contains(&e.a))
                .map(|e| Node::Event(*e))
                .collect()
        }
        CauseOption::Exit(f) => {
            let objs = matches(gt, f);
            gt.events_of(EventKind::Exit)
                .filter(|e| objs.contains(&e.a))
                .map(|e| Node::Event(*e))
                .collect()
        }
        CauseOption::Collision(f1, f2) => {
            let xs = matches(gt, f1);
            let ys = matches(gt, f2);
            gt.events_of(EventKind::Collision)
                .filter(|e| {
                    let (a, b) = (e.a, e.b.unwrap());
                    (xs.contains(&a) && ys.contains(&b)) || (xs.contains(&b) && ys.contains(&a))
                })
                .map(|e| Node::Event(*e))
                .collect()
        }
    }
}

/// Does an event statement hold anywhere at or after `from_t`?
pub fn statement_holds(gt: &GroundTruth, stmt: &EventStatement, from_t: usize) -> bool {
    match stmt {
        EventStatement::Enters(f) => {
            let objs = matches(gt, f);
            gt.events_of(EventKind::Entry)
                .any(|e| e.t >= from_t && objs.contains(&e.a))
        }
        EventStatement::Exits(f) => {
            let objs = matches(gt, f);
            gt.events_of(EventKind::Exit)
                .any(|e| e.t >= from_t && objs.contains(&e.a))
        }
        EventStatement::Collides(f1, f2) => {
            let xs = matches(gt, f1);
            let ys = matches(gt, f2);
            gt.events_of(EventKind::Collision).any(|e| {
                let (a, b) = (e.a, e.b.unwrap());
                e.t >= from_t
                    && ((xs.contains(&a) && ys.contains(&b))
                        || (xs.contains(&b) && ys.contains(&a)))
            })
        }
    }
}

/// Answer a descriptive or explanatory question by direct enumeration.
pub fn oracle_answer(ast: &QuestionAst, gt: &GroundTruth) -> Result<Answer, OracleError> {
    Ok(match ast {
        QuestionAst::CountState {
            filter,
            state,
            time,
        } => Answer::Count(state_objects(gt, filter, *state, time).len() as u64),
        QuestionAst::ExistState {
            filter,
            state,
            time,
        } => Answer::from_bool(!state_objects(gt, filter, *state, time).is_empty()),
        QuestionAst::CountThere { filter } => {
            let n = gt.horizon();
            Answer::Count(
                matches(gt, filter)
                    .into_iter()
                    .filter(|&v| (0..n).any(|t| gt.present_at(v, t)))
                    .count() as u64,
            )
        }
        QuestionAst::ExistEvent {
            filter,
            event,
            window,
        } => Answer::from_bool(!event_objects(gt, filter, event, window).is_empty()),
        QuestionAst::AttrState {
            attr,
            of,
            state,
            time,
        } => {
            let objs = state_objects(gt, of, *state, time);
            unique_attr(gt, &objs, *attr)?
        }
        QuestionAst::AttrEvent {
            attr,
            of,
            event,
            window,
        } => {
            let objs = event_objects(gt, of, event, window);
            unique_attr(gt, &objs, *attr)?
        }
        QuestionAst::Explanatory { target, options } => {
            let targets = target_events(gt, target);
            let answers = options
                .iter()
                .map(|opt| {
                    let nodes = option_nodes(gt, opt);
                    targets.iter().any(|te| {
                        nodes
                            .iter()
                            .any(|&n| causes(gt, n, Node::Event(*te)))
                    })
                })
                .collect();
            Answer::Options(answers)
        }
        QuestionAst::Predictive { .. } | QuestionAst::Counterfactual { .. } => {
            return Err(OracleError::NeedsSimulation)
        }
    })
}

/// Oracle path for predictive questions: check each option strictly after
/// the observed horizon against the full-horizon ground truth.
pub fn oracle_predictive(gt: &GroundTruth, options: &[EventStatement], observed: usize) -> Answer {
    Answer::Options(
        options
            .iter()
            .map(|s| statement_holds(gt, s, observed))
            .collect(),
    )
}

/// Oracle path for counterfactual questions, given the re-simulated truth.
pub fn oracle_counterfactual(gt_without: &GroundTruth, options: &[EventStatement]) -> Answer {
    Answer::Options(
        options
            .iter()
            .map(|s| statement_holds(gt_without, s, 0))
            .collect(),
    )
}
