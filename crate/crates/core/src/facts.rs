//! Symbolic scene reconstruction: ground facts describing a quantized trace.
//!
//! The reconstruction emits `object/1`, `on_camera/2`, `position/5` (or
//! `position/4` in 2D mode), one attribute atom per object (`color/2`,
//! `shape/2`, `material/2`) and the temporal scaffolding `time/1`,
//! `next_time/2`.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::logic::{Atom, Sym, Term};
use crate::scene::{Dims, ObjId, SceneTrace};

#[derive(Debug, Error)]
pub enum FactsError {
    #[error("trace is not quantized: coordinate {value} of object {id} at t={t} is fractional")]
    NotQuantized { id: ObjId, t: usize, value: f64 },
    #[error("attribute conflict for object {id}: no strict majority for {class}")]
    AttributeConflict { id: ObjId, class: &'static str },
    #[error("unknown predicate {0}")]
    UnknownPredicate(String),
    #[error("predicate {0} has no time argument")]
    NoTimeArgument(String),
}

/// Immutable set of ground atoms indexed by predicate and by
/// (predicate, time argument).
#[derive(Clone, Debug)]
pub struct FactBase {
    atoms: BTreeMap<Sym, Vec<Atom>>,
    by_time: HashMap<(Sym, i64), Vec<usize>>,
    /// Declared time-argument position per predicate, where known.
    time_pos: BTreeMap<Sym, usize>,
    pub time_horizon: usize,
    pub dims: Dims,
}

impl FactBase {
    pub fn new(dims: Dims, time_horizon: usize) -> FactBase {
        FactBase {
            atoms: BTreeMap::new(),
            by_time: HashMap::new(),
            time_pos: BTreeMap::new(),
            time_horizon,
            dims,
        }
    }

    /// Build a fact base from raw atoms, registering the time-argument
    /// position of any predicate in `time_positions`.
    pub fn from_atoms(
        dims: Dims,
        time_horizon: usize,
        atoms: impl IntoIterator<Item = Atom>,
        time_positions: &[(&str, usize)],
    ) -> FactBase {
        let mut fb = FactBase::new(dims, time_horizon);
        for (pred, pos) in time_positions {
            fb.time_pos.insert(Sym::new(pred), *pos);
        }
        for atom in atoms {
            fb.insert(atom);
        }
        fb
    }

    pub fn insert(&mut self, atom: Atom) {
        debug_assert!(atom.is_ground(), "fact base atoms must be ground");
        let entry = self.atoms.entry(atom.pred).or_default();
        if let Some(&pos) = self.time_pos.get(&atom.pred) {
            if let Some(t) = atom.args.get(pos).and_then(Term::as_int) {
                self.by_time
                    .entry((atom.pred, t))
                    .or_default()
                    .push(entry.len());
            }
        }
        entry.push(atom);
    }

    pub fn register_time_pos(&mut self, pred: &str, pos: usize) {
        self.time_pos.insert(Sym::new(pred), pos);
    }

    pub fn predicates(&self) -> impl Iterator<Item = Sym> + '_ {
        self.atoms.keys().copied()
    }

    pub fn atoms_of(&self, pred: Sym) -> &[Atom] {
        self.atoms.get(&pred).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn all_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.values().flatten()
    }

    pub fn len(&self) -> usize {
        self.atoms.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time_pos_of(&self, pred: Sym) -> Option<usize> {
        self.time_pos.get(&pred).copied()
    }

    /// Ground atoms of `pred` whose time argument equals `t`.
    pub fn facts_at(&self, pred: &str, t: i64) -> Result<Vec<Atom>, FactsError> {
        let sym = Sym::new(pred);
        if !self.atoms.contains_key(&sym) {
            return Err(FactsError::UnknownPredicate(pred.to_string()));
        }
        if !self.time_pos.contains_key(&sym) {
            return Err(FactsError::NoTimeArgument(pred.to_string()));
        }
        let idx = match self.by_time.get(&(sym, t)) {
            Some(v) => v,
            None => return Ok(Vec::new()),
        };
        let all = &self.atoms[&sym];
        Ok(idx.iter().map(|&i| all[i].clone()).collect())
    }

    /// One atom per line, `pred(args).`, sorted lexicographically.
    pub fn dump(&self) -> String {
        let mut lines: Vec<String> = self
            .all_atoms()
            .map(|a| format!("{a}."))
            .collect();
        lines.sort();
        let mut out = lines.join("\n");
        if !out.is_empty() {
            out.push('\n');
        }
        out
    }
}

fn majority<'a>(votes: impl Iterator<Item = &'a str>) -> Option<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for v in votes {
        *counts.entry(v).or_default() += 1;
    }
    let (&best, &n) = counts.iter().max_by_key(|(_, &n)| n)?;
    // Strict majority only; ties are a conflict.
    let runner_up = counts
        .iter()
        .filter(|(&k, _)| k != best)
        .map(|(_, &n)| n)
        .max()
        .unwrap_or(0);
    if n > runner_up {
        Some(best.to_string())
    } else {
        None
    }
}

/// Reconstruct a quantized trace into a ground fact base.
pub fn reconstruct(trace: &SceneTrace) -> Result<FactBase, FactsError> {
    let n = trace.frame_count;
    let mut fb = FactBase::new(trace.dims, n);
    for (pred, pos) in [("on_camera", 1), ("time", 0), ("next_time", 0)] {
        fb.register_time_pos(pred, pos);
    }
    fb.register_time_pos("position", trace.dims.arity() + 1);

    for t in 0..n {
        fb.insert(Atom::new("time", vec![Term::Int(t as i64)]));
    }
    for t in 0..n.saturating_sub(1) {
        fb.insert(Atom::new(
            "next_time",
            vec![Term::Int(t as i64), Term::Int(t as i64 + 1)],
        ));
    }

    let mut attr_votes: BTreeMap<ObjId, (Vec<String>, Vec<String>, Vec<String>)> =
        BTreeMap::new();

    for frame in &trace.frames {
        for d in &frame.detections {
            let mut args = vec![Term::Int(d.id.0)];
            for &c in &d.pos {
                if c.fract() != 0.0 {
                    return Err(FactsError::NotQuantized {
                        id: d.id,
                        t: frame.t,
                        value: c,
                    });
                }
                args.push(Term::Int(c as i64));
            }
            args.push(Term::Int(frame.t as i64));
            fb.insert(Atom::new("position", args));
            fb.insert(Atom::new(
                "on_camera",
                vec![Term::Int(d.id.0), Term::Int(frame.t as i64)],
            ));
            let votes = attr_votes.entry(d.id).or_default();
            votes.0.push(d.color.clone());
            votes.1.push(d.shape.clone());
            votes.2.push(d.material.clone());
        }
    }

    for (id, (colors, shapes, materials)) in &attr_votes {
        fb.insert(Atom::new("object", vec![Term::Int(id.0)]));
        for (class, votes, pred) in [
            ("color", colors, "color"),
            ("shape", shapes, "shape"),
            ("material", materials, "material"),
        ] {
            let value = majority(votes.iter().map(String::as_str))
                .ok_or(FactsError::AttributeConflict { id: *id, class })?;
            fb.insert(Atom::new(
                pred,
                vec![Term::Int(id.0), Term::sym(&value)],
            ));
        }
    }

    Ok(fb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{Detection, Frame};

    fn one_object_trace() -> SceneTrace {
        SceneTrace {
            video_id: "t".into(),
            dims: Dims::Three,
            frame_count: 2,
            frames: vec![
                Frame {
                    t: 0,
                    detections: vec![Detection {
                        id: ObjId(0),
                        color: "red".into(),
                        shape: "cube".into(),
                        material: "metal".into(),
                        pos: vec![1.0, 2.0, 3.0],
                        score: 1.0,
                    }],
                },
                Frame {
                    t: 1,
                    detections: vec![],
                },
            ],
        }
    }

    #[test]
    fn empty_trace_yields_only_time() {
        let trace = SceneTrace {
            video_id: "e".into(),
            dims: Dims::Three,
            frame_count: 1,
            frames: vec![Frame {
                t: 0,
                detections: vec![],
            }],
        };
        let fb = reconstruct(&trace).unwrap();
        assert_eq!(fb.dump(), "time(0).\n");
    }

    #[test]
    fn one_object_maps_directly() {
        let fb = reconstruct(&one_object_trace()).unwrap();
        let dump = fb.dump();
        for expected in [
            "object(0).",
            "on_camera(0,0).",
            "position(0,1,2,3,0).",
            "time(0).",
            "time(1).",
            "next_time(0,1).",
            "color(0,red).",
            "shape(0,cube).",
            "material(0,metal).",
        ] {
            assert!(dump.contains(expected), "missing {expected} in:\n{dump}");
        }
        assert_eq!(fb.len(), 9);
    }

    #[test]
    fn facts_at_selects_by_time() {
        let fb = reconstruct(&one_object_trace()).unwrap();
        let hits = fb.facts_at("on_camera", 0).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].to_string(), "on_camera(0,0)");
        assert!(fb.facts_at("on_camera", 99).unwrap().is_empty());
        assert!(fb.facts_at("nonexistent", 0).is_err());
    }

    #[test]
    fn facts_at_union_covers_index() {
        let fb = reconstruct(&one_object_trace()).unwrap();
        let mut union = Vec::new();
        for t in 0..fb.time_horizon as i64 {
            union.extend(fb.facts_at("on_camera", t).unwrap());
        }
        let mut all: Vec<Atom> = fb.atoms_of(Sym::new("on_camera")).to_vec();
        union.sort();
        all.sort();
        assert_eq!(union, all);
    }

    #[test]
    fn attribute_conflict_without_majority_is_error() {
        let mut trace = one_object_trace();
        trace.frames[1].detections.push(Detection {
            id: ObjId(0),
            color: "blue".into(),
            shape: "cube".into(),
            material: "metal".into(),
            pos: vec![1.0, 2.0, 3.0],
            score: 1.0,
        });
        let err = reconstruct(&trace).unwrap_err();
        assert!(matches!(
            err,
            FactsError::AttributeConflict { class: "color", .. }
        ));
    }

    #[test]
    fn majority_vote_resolves_disagreement() {
        let mut trace = one_object_trace();
        trace.frame_count = 3;
        trace.frames[1].detections.push(Detection {
            id: ObjId(0),
            color: "blue".into(),
            shape: "cube".into(),
            material: "metal".into(),
            pos: vec![1.0, 2.0, 3.0],
            score: 1.0,
        });
        trace.frames.push(Frame {
            t: 2,
            detections: vec![Detection {
                id: ObjId(0),
                color: "red".into(),
                shape: "cube".into(),
                material: "metal".into(),
                pos: vec![1.0, 2.0, 3.0],
                score: 1.0,
            }],
        });
        let fb = reconstruct(&trace).unwrap();
        assert!(fb.dump().contains("color(0,red)."));
    }

    #[test]
    fn unquantized_positions_rejected() {
        let mut trace = one_object_trace();
        trace.frames[0].detections[0].pos = vec![1.5, 2.0, 3.0];
        assert!(matches!(
            reconstruct(&trace),
            Err(FactsError::NotQuantized { .. })
        ));
    }

    #[test]
    fn position_count_matches_on_camera() {
        let fb = reconstruct(&one_object_trace()).unwrap();
        assert_eq!(
            fb.atoms_of(Sym::new("position")).len(),
            fb.atoms_of(Sym::new("on_camera")).len()
        );
    }
}
