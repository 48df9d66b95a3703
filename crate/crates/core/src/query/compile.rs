//! Compilation of question ASTs into `answer(Q, X)` goal programs in the
//! rule language.
//!
//! Counting questions aggregate distinct bindings of the answer variable,
//! existence questions test nonemptiness, attribute questions require a
//! unique binding, and each multiple-choice option derives its own index
//! so one goal covers all options.

use thiserror::Error;

use crate::scene::Vocabulary;

use super::ast::*;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum CompileError {
    #[error("attribute `{0}` is outside the vocabulary")]
    UnknownAttribute(String),
    #[error("predictive and counterfactual questions answer through re-simulation, not compilation")]
    NeedsSimulation,
}

/// How the goal's bindings map to an answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GoalKind {
    Count,
    Exist,
    Attr,
    Options(usize),
}

/// A compiled question: rules to add to the program and the goal to query.
#[derive(Clone, Debug)]
pub struct GoalProgram {
    pub qid: String,
    pub rules_text: String,
    pub goal: String,
    pub kind: GoalKind,
}

struct Body {
    parts: Vec<String>,
    counter: usize,
}

impl Body {
    fn new() -> Body {
        Body {
            parts: Vec::new(),
            counter: 0,
        }
    }

    fn fresh(&mut self, prefix: &str) -> String {
        self.counter += 1;
        format!("{prefix}{}", self.counter)
    }

    fn push(&mut self, part: String) {
        self.parts.push(part);
    }

    /// Bind a fresh object variable constrained by the filter.
    fn object(&mut self, filter: &ObjFilter, vocab: &Vocabulary) -> Result<String, CompileError> {
        let v = self.fresh("V");
        self.push(format!("object({v})"));
        self.filter_on(&v, filter, vocab)?;
        Ok(v)
    }

    /// Apply filter constraints to an existing variable.
    fn filter_on(
        &mut self,
        var: &str,
        filter: &ObjFilter,
        vocab: &Vocabulary,
    ) -> Result<(), CompileError> {
        if let Some(c) = &filter.color {
            if !vocab.contains_color(c) {
                return Err(CompileError::UnknownAttribute(c.clone()));
            }
            self.push(format!("color({var}, {c})"));
        }
        if let Some(m) = &filter.material {
            if !vocab.contains_material(m) {
                return Err(CompileError::UnknownAttribute(m.clone()));
            }
            self.push(format!("material({var}, {m})"));
        }
        if let Some(s) = &filter.shape {
            if !vocab.contains_shape(s) {
                return Err(CompileError::UnknownAttribute(s.clone()));
            }
            self.push(format!("shape({var}, {s})"));
        }
        Ok(())
    }

    /// Bind the anchor event's time: the referent's first entry or last exit.
    fn anchor_time(
        &mut self,
        anchor: &AnchorEvent,
        vocab: &Vocabulary,
    ) -> Result<String, CompileError> {
        let a = self.object(&anchor.obj, vocab)?;
        let t = self.fresh("TA");
        match anchor.kind {
            AnchorKind::Enters => self.push(format!("first_entry({a}, {t})")),
            AnchorKind::Exits => self.push(format!("last_exit({a}, {t})")),
        }
        Ok(t)
    }

    /// The frame at which a state question samples fluents.
    fn sample_time(
        &mut self,
        time: &TimeRef,
        vocab: &Vocabulary,
    ) -> Result<String, CompileError> {
        Ok(match time {
            TimeRef::Begin => "0".to_string(),
            TimeRef::End => {
                let t = self.fresh("TE");
                self.push(format!("end_time({t})"));
                t
            }
            TimeRef::After(anchor) => {
                let ta = self.anchor_time(anchor, vocab)?;
                let ts = self.fresh("TS");
                self.push(format!("{ts} = {ta} + 1"));
                ts
            }
            TimeRef::Before(anchor) => {
                let ta = self.anchor_time(anchor, vocab)?;
                let ts = self.fresh("TS");
                self.push(format!("{ts} = {ta} - 1"));
                ts
            }
        })
    }

    fn state_cond(&mut self, var: &str, state: StatePred, at: &str) {
        match state {
            StatePred::Moving => self.push(format!("holdsAt(moving({var}), {at})")),
            StatePred::Present => self.push(format!("holdsAt(present({var}), {at})")),
            StatePred::Stationary => {
                self.push(format!("holdsAt(present({var}), {at})"));
                self.push(format!("not holdsAt(moving({var}), {at})"));
            }
        }
    }

    /// Event participation condition; returns the event time variable.
    fn event_cond(
        &mut self,
        var: &str,
        clause: &EventClause,
        vocab: &Vocabulary,
    ) -> Result<String, CompileError> {
        let t = self.fresh("TC");
        match clause {
            EventClause::Enters => self.push(format!("happens(entry({var}), {t})")),
            EventClause::Exits => self.push(format!("happens(exit({var}), {t})")),
            EventClause::CollidesWith(f2) => {
                let u = self.object(f2, vocab)?;
                self.push(format!("{var} != {u}"));
                self.push(format!("collides({var}, {u}, {t})"));
            }
        }
        Ok(t)
    }

    fn window_cond(
        &mut self,
        t: &str,
        window: &Option<Window>,
        vocab: &Vocabulary,
    ) -> Result<(), CompileError> {
        if let Some(w) = window {
            let (anchor, op) = match w {
                Window::Before(a) => (a, "<"),
                Window::After(a) => (a, ">"),
            };
            let ta = self.anchor_time(anchor, vocab)?;
            self.push(format!("{t} {op} {ta}"));
        }
        Ok(())
    }

    fn rule(&self, head: &str) -> String {
        format!("{head} :- {}.\n", self.parts.join(", "))
    }
}

/// The two participant-to-filter assignments of an unordered collision
/// pattern; the stored atom is canonical so both must be generated.
fn collision_orders(a: &ObjFilter, b: &ObjFilter) -> [(ObjFilter, ObjFilter); 2] {
    [(a.clone(), b.clone()), (b.clone(), a.clone())]
}

/// Compile a descriptive or explanatory question; predictive and
/// counterfactual questions route through the simulator instead.
pub fn compile(
    ast: &QuestionAst,
    qid: &str,
    vocab: &Vocabulary,
) -> Result<GoalProgram, CompileError> {
    let mut rules_text = String::new();
    let kind;
    match ast {
        QuestionAst::CountState {
            filter,
            state,
            time,
        }
        | QuestionAst::ExistState {
            filter,
            state,
            time,
        } => {
            let mut b = Body::new();
            let v = b.object(filter, vocab)?;
            let at = b.sample_time(time, vocab)?;
            b.state_cond(&v, *state, &at);
            rules_text.push_str(&b.rule(&format!("answer({qid}, {v})")));
            kind = if matches!(ast, QuestionAst::CountState { .. }) {
                GoalKind::Count
            } else {
                GoalKind::Exist
            };
        }
        QuestionAst::CountThere { filter } => {
            let mut b = Body::new();
            let v = b.object(filter, vocab)?;
            let t = b.fresh("T");
            b.push(format!("holdsAt(present({v}), {t})"));
            b.push(format!("time({t})"));
            rules_text.push_str(&b.rule(&format!("answer({qid}, {v})")));
            kind = GoalKind::Count;
        }
        QuestionAst::ExistEvent {
            filter,
            event,
            window,
        } => {
            let mut b = Body::new();
            let v = b.object(filter, vocab)?;
            let t = b.event_cond(&v, event, vocab)?;
            b.window_cond(&t, window, vocab)?;
            rules_text.push_str(&b.rule(&format!("answer({qid}, {v})")));
            kind = GoalKind::Exist;
        }
        QuestionAst::AttrState {
            attr,
            of,
            state,
            time,
        } => {
            let mut b = Body::new();
            let v = b.object(of, vocab)?;
            let at = b.sample_time(time, vocab)?;
            b.state_cond(&v, *state, &at);
            b.push(format!("{}({v}, C)", attr.pred()));
            rules_text.push_str(&b.rule(&format!("answer({qid}, C)")));
            kind = GoalKind::Attr;
        }
        QuestionAst::AttrEvent {
            attr,
            of,
            event,
            window,
        } => {
            let mut b = Body::new();
            let v = b.object(of, vocab)?;
            let t = b.event_cond(&v, event, vocab)?;
            b.window_cond(&t, window, vocab)?;
            b.push(format!("{}({v}, C)", attr.pred()));
            rules_text.push_str(&b.rule(&format!("answer({qid}, C)")));
            kind = GoalKind::Attr;
        }
        QuestionAst::Explanatory { target, options } => {
            for (i, option) in options.iter().enumerate() {
                // Each (target order, option order) pair becomes one rule
                // deriving the same option index.
                let target_cases: Vec<(Body, String)> = match target {
                    TargetEvent::Exit(f) => {
                        let mut b = Body::new();
                        let v = b.object(f, vocab)?;
                        let t = b.fresh("TX");
                        b.push(format!("last_exit({v}, {t})"));
                        vec![(b, format!("event(exit({v}), {t})"))]
                    }
                    TargetEvent::Collision(f1, f2) => collision_orders(f1, f2)
                        .into_iter()
                        .map(|(fa, fb)| {
                            let mut b = Body::new();
                            let x = b.object(&fa, vocab)?;
                            let y = b.object(&fb, vocab)?;
                            let t = b.fresh("TX");
                            b.push(format!("{x} != {y}"));
                            b.push(format!("happens(collision({x}, {y}), {t})"));
                            Ok((b, format!("event(collision({x}, {y}), {t})")))
                        })
                        .collect::<Result<Vec<_>, CompileError>>()?,
                };
                for (base, target_node) in target_cases {
                    let option_cases: Vec<(Body, String)> = match option {
                        CauseOption::Object(f) => {
                            let mut b = clone_body(&base);
                            let o = b.object(f, vocab)?;
                            vec![(b, format!("object({o})"))]
                        }
                        CauseOption::Entry(f) => {
                            let mut b = clone_body(&base);
                            let o = b.object(f, vocab)?;
                            let t = b.fresh("TO");
                            b.push(format!("happens(entry({o}), {t})"));
                            vec![(b, format!("event(entry({o}), {t})"))]
                        }
                        CauseOption::Exit(f) => {
                            let mut b = clone_body(&base);
                            let o = b.object(f, vocab)?;
                            let t = b.fresh("TO");
                            b.push(format!("happens(exit({o}), {t})"));
                            vec![(b, format!("event(exit({o}), {t})"))]
                        }
                        CauseOption::Collision(f1, f2) => collision_orders(f1, f2)
                            .into_iter()
                            .map(|(fa, fb)| {
                                let mut b = clone_body(&base);
                                let x = b.object(&fa, vocab)?;
                                let y = b.object(&fb, vocab)?;
                                let t = b.fresh("TO");
                                b.push(format!("{x} != {y}"));
                                b.push(format!("happens(collision({x}, {y}), {t})"));
                                Ok((b, format!("event(collision({x}, {y}), {t})")))
                            })
                            .collect::<Result<Vec<_>, CompileError>>()?,
                    };
                    for (mut b, option_node) in option_cases {
                        b.push(format!("cause({option_node}, {target_node})"));
                        rules_text.push_str(&b.rule(&format!("answer({qid}, {i})")));
                    }
                }
            }
            kind = GoalKind::Options(options.len());
        }
        QuestionAst::Predictive { .. } | QuestionAst::Counterfactual { .. } => {
            return Err(CompileError::NeedsSimulation)
        }
    }
    Ok(GoalProgram {
        qid: qid.to_string(),
        rules_text,
        goal: format!("answer({qid}, X)"),
        kind,
    })
}

fn clone_body(b: &Body) -> Body {
    Body {
        parts: b.parts.clone(),
        counter: b.counter,
    }
}
