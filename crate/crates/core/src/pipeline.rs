//! The end-to-end answering pipeline: trace -> facts -> events -> fluents ->
//! cause graph -> question answering, plus the rule-engine route over the
//! same scene for dual-path checking.

use thiserror::Error;

use crate::engine::{evaluate, parse_program, EvalError, EvalOptions, Model, ParseError};
use crate::events::{
    causal_graph, compute_fluents, detect_events, CauseRelation, EventLog, FluentTimeline,
    Variant,
};
use crate::facts::{reconstruct, FactBase, FactsError};
use crate::physics::Thresholds;
use crate::query::whatif::{answer_whatif, WhatIfError, WhatIfOpts};
use crate::query::{answer_questions, Answer, QType, QuestionAst};
use crate::rules::full_program;
use crate::scene::{project_2d, quantize, Dims, QuantSpec, SceneError, SceneTrace, Vocabulary};
use crate::sim::SimConfig;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Facts(#[from] FactsError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    WhatIf(#[from] WhatIfError),
}

/// Fixed parameters of one answering run.
#[derive(Clone, Copy, Debug)]
pub struct PipelineConfig {
    pub thresholds: Thresholds,
    pub variant: Variant,
    pub quant: QuantSpec,
    /// Project 3D traces down to 2D before reasoning when set to 2D.
    pub dims: Option<Dims>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            thresholds: Thresholds::default(),
            variant: Variant::H2,
            quant: QuantSpec::default(),
            dims: None,
        }
    }
}

/// Everything the dedicated path derives from one trace.
pub struct SceneAnalysis {
    pub fb: FactBase,
    pub events: EventLog,
    pub timeline: FluentTimeline,
    pub cause: CauseRelation,
    pub warnings: Vec<String>,
}

/// Run the dedicated detection path on a raw trace.
pub fn analyze_trace(
    trace: &SceneTrace,
    cfg: &PipelineConfig,
) -> Result<SceneAnalysis, PipelineError> {
    let trace = match cfg.dims {
        Some(Dims::Two) => project_2d(trace),
        _ => trace.clone(),
    };
    let quantized = quantize(&trace, cfg.quant)?;
    let fb = reconstruct(&quantized)?;
    let events = detect_events(&fb, &cfg.thresholds, cfg.variant);
    let (timeline, warnings) = compute_fluents(&events, &fb);
    let cause = causal_graph(&events);
    Ok(SceneAnalysis {
        fb,
        events,
        timeline,
        cause,
        warnings,
    })
}

/// Answer a batch of questions on one trace. Predictive and counterfactual
/// questions need the simulator config (`whatif`); without it they are
/// recorded as unanswered.
pub fn answer_trace(
    trace: &SceneTrace,
    questions: &[(String, QuestionAst)],
    cfg: &PipelineConfig,
    whatif: Option<(&SimConfig, usize)>,
) -> Result<Vec<(String, Option<Answer>)>, PipelineError> {
    let analysis = analyze_trace(trace, cfg)?;
    let vocab = Vocabulary::default();

    let descriptive: Vec<(String, QuestionAst)> = questions
        .iter()
        .filter(|(_, ast)| {
            !matches!(ast.qtype(), QType::Predictive | QType::Counterfactual)
        })
        .cloned()
        .collect();
    let mut answered: std::collections::BTreeMap<String, Option<Answer>> =
        answer_questions(
            &analysis.fb,
            &analysis.events,
            &analysis.timeline,
            &analysis.cause,
            &descriptive,
            &vocab,
        )
        .into_iter()
        .map(|(id, r)| (id, r.ok()))
        .collect();

    for (id, ast) in questions {
        if matches!(ast.qtype(), QType::Predictive | QType::Counterfactual) {
            let result = match whatif {
                Some((config, observed)) => answer_whatif(
                    ast,
                    config,
                    &WhatIfOpts {
                        observed_frames: observed,
                        thresholds: cfg.thresholds,
                        variant: cfg.variant,
                        quant: cfg.quant,
                        dims: cfg.dims,
                    },
                )
                .ok(),
                None => None,
            };
            answered.insert(id.clone(), result);
        }
    }

    Ok(questions
        .iter()
        .map(|(id, _)| (id.clone(), answered.get(id).cloned().flatten()))
        .collect())
}

/// The rule-engine route: evaluate the full transcribed program over the
/// reconstructed facts and return the model (for dual-path comparison).
pub fn evaluate_rules_path(
    trace: &SceneTrace,
    cfg: &PipelineConfig,
) -> Result<Model, PipelineError> {
    let trace = match cfg.dims {
        Some(Dims::Two) => project_2d(trace),
        _ => trace.clone(),
    };
    let quantized = quantize(&trace, cfg.quant)?;
    let fb = reconstruct(&quantized)?;
    let dims = fb.dims;
    let program = parse_program(&full_program(cfg.variant, &cfg.thresholds, dims))?;
    Ok(evaluate(&program, &fb, &EvalOptions::default())?)
}

/// Predicates shared by both routes, compared atom-for-atom.
pub const DUAL_PATH_PREDS: [&str; 8] = [
    "happens",
    "holdsAt",
    "cause",
    "initially",
    "disp_greater",
    "disp_smaller",
    "euc_distance",
    "velocity_change",
];

/// The dedicated path's atoms over the shared vocabulary.
pub fn dedicated_atoms(analysis: &SceneAnalysis, th: &Thresholds) -> Vec<crate::logic::Atom> {
    use crate::logic::{Atom, Term};
    let mut out = crate::physics::materialize_kinematics(&analysis.fb, th);
    for e in &analysis.events.events {
        out.push(e.happens_atom());
    }
    out.extend(analysis.timeline.holds_atoms(analysis.fb.time_horizon));
    for &v in &analysis.events.initially_present {
        out.push(Atom::new(
            "initially",
            vec![Term::app("present", vec![Term::Int(v.0)])],
        ));
    }
    for &v in &analysis.events.initially_moving {
        out.push(Atom::new(
            "initially",
            vec![Term::app("moving", vec![Term::Int(v.0)])],
        ));
    }
    out.extend(analysis.cause.atoms());
    out.sort();
    out.dedup();
    out
}

/// The engine model's atoms over the shared vocabulary.
pub fn engine_atoms(model: &Model) -> Vec<crate::logic::Atom> {
    let mut out = Vec::new();
    for pred in DUAL_PATH_PREDS {
        out.extend(model.atoms_of(crate::logic::Sym::new(pred)).to_vec());
    }
    out.sort();
    out.dedup();
    out
}
