//! Answer extraction: compile question batches once, evaluate the combined
//! goal program over the scene's derived atoms, and read the answers off
//! the model.

use thiserror::Error;

use crate::engine::{
    evaluate, parse_program, EvalError, EvalOptions, Model, ParseError, Program,
};
use crate::events::{CauseRelation, EventLog, FluentTimeline};
use crate::facts::FactBase;
use crate::logic::Term;
use crate::rules::support_rules;
use crate::scene::Vocabulary;

use super::ast::{Answer, QuestionAst};
use super::compile::{compile, CompileError, GoalKind, GoalProgram};

#[derive(Debug, Error)]
pub enum AnswerError {
    #[error("ambiguous referent: {found} distinct bindings for a unique-attribute question")]
    Ambiguous { found: usize },
    #[error("no referent matches the attribute question")]
    NoReferent,
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("question requires simulator ground truth, which is unavailable for this scene")]
    NeedsSimulation,
}

/// Read an answer off the model for one compiled goal.
pub fn answer(goal: &GoalProgram, model: &Model) -> Result<Answer, AnswerError> {
    let subs = model
        .query(&goal.goal)
        .map_err(|e| match e {
            crate::engine::QueryError::Parse(p) => AnswerError::Parse(p),
            crate::engine::QueryError::UnknownPredicate(_) => AnswerError::NoReferent,
        })
        .or_else(|e| match (&goal.kind, e) {
            (GoalKind::Attr, e) => Err(e),
            (_, AnswerError::NoReferent) => Ok(Vec::new()),
            (_, e) => Err(e),
        })?;
    let mut values: Vec<Term> = subs
        .into_iter()
        .filter_map(|m| m.get("X").cloned())
        .collect();
    values.sort();
    values.dedup();
    Ok(match goal.kind {
        GoalKind::Count => Answer::Count(values.len() as u64),
        GoalKind::Exist => Answer::from_bool(!values.is_empty()),
        GoalKind::Attr => match values.len() {
            0 => return Err(AnswerError::NoReferent),
            1 => match &values[0] {
                Term::Sym(s) => Answer::Attr(s.to_string()),
                other => Answer::Attr(other.to_string()),
            },
            n => return Err(AnswerError::Ambiguous { found: n }),
        },
        GoalKind::Options(n) => {
            let mut opts = vec![false; n];
            for v in &values {
                if let Term::Int(i) = v {
                    if let Ok(idx) = usize::try_from(*i) {
                        if idx < n {
                            opts[idx] = true;
                        }
                    }
                }
            }
            Answer::Options(opts)
        }
    })
}

/// The facts a question program runs over: scene objects, attributes and
/// times plus the derived `happens`/`holdsAt`/`cause` atoms. Raw position
/// atoms are not needed by any question rule and are left out.
pub fn make_question_facts(
    fb: &FactBase,
    events: &EventLog,
    timeline: &FluentTimeline,
    cause: &CauseRelation,
) -> FactBase {
    let mut facts = FactBase::new(fb.dims, fb.time_horizon);
    for (pred, pos) in [
        ("on_camera", 1),
        ("time", 0),
        ("next_time", 0),
        ("happens", 1),
        ("holdsAt", 1),
    ] {
        facts.register_time_pos(pred, pos);
    }
    let position = crate::logic::Sym::new("position");
    for atom in fb.all_atoms() {
        if atom.pred != position {
            facts.insert(atom.clone());
        }
    }
    for event in &events.events {
        facts.insert(event.happens_atom());
    }
    for atom in timeline.holds_atoms(fb.time_horizon) {
        facts.insert(atom);
    }
    for atom in cause.atoms() {
        facts.insert(atom);
    }
    facts
}

/// A question batch compiled and parsed once; reusable across scenes with
/// the same question set (and across calibration grid points).
pub struct CompiledBatch {
    program: Program,
    goals: Vec<(String, Result<GoalProgram, CompileError>)>,
}

pub fn compile_batch(questions: &[(String, QuestionAst)], vocab: &Vocabulary) -> CompiledBatch {
    let mut rules_text = support_rules();
    let mut goals = Vec::new();
    for (qid, ast) in questions {
        match compile(ast, qid, vocab) {
            Ok(gp) => {
                rules_text.push_str(&gp.rules_text);
                goals.push((qid.clone(), Ok(gp)));
            }
            Err(e) => goals.push((qid.clone(), Err(e))),
        }
    }
    let program = parse_program(&rules_text).expect("compiled question rules parse");
    CompiledBatch { program, goals }
}

/// Evaluate a compiled batch against one scene's derived atoms.
pub fn answer_batch(
    facts: &FactBase,
    batch: &CompiledBatch,
) -> Vec<(String, Result<Answer, AnswerError>)> {
    let evaluated = evaluate(&batch.program, facts, &EvalOptions::default());
    match evaluated {
        Ok(model) => batch
            .goals
            .iter()
            .map(|(qid, gp)| {
                let result = match gp {
                    Ok(gp) => answer(gp, &model),
                    Err(CompileError::NeedsSimulation) => Err(AnswerError::NeedsSimulation),
                    Err(e) => Err(e.clone().into()),
                };
                (qid.clone(), result)
            })
            .collect(),
        Err(e) => {
            let msg = format!("{e}");
            batch
                .goals
                .iter()
                .map(|(qid, _)| {
                    (
                        qid.clone(),
                        Err(AnswerError::Eval(EvalError::Type(msg.clone()))),
                    )
                })
                .collect()
        }
    }
}

/// Build the question-answering model for one scene (the question facts
/// closed under the query-support rules). Kept for direct goal queries and
/// debugging; batch answering goes through [`compile_batch`]/[`answer_batch`].
pub fn build_scene_model(
    fb: &FactBase,
    events: &EventLog,
    timeline: &FluentTimeline,
    cause: &CauseRelation,
) -> Result<Model, EvalError> {
    let facts = make_question_facts(fb, events, timeline, cause);
    let support = parse_program(&support_rules()).expect("support rules parse");
    evaluate(&support, &facts, &EvalOptions::default())
}

/// Answer a batch of descriptive/explanatory questions for one scene.
pub fn answer_questions(
    fb: &FactBase,
    events: &EventLog,
    timeline: &FluentTimeline,
    cause: &CauseRelation,
    questions: &[(String, QuestionAst)],
    vocab: &Vocabulary,
) -> Vec<(String, Result<Answer, AnswerError>)> {
    let facts = make_question_facts(fb, events, timeline, cause);
    let batch = compile_batch(questions, vocab);
    answer_batch(&facts, &batch)
}
