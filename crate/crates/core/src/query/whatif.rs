//! Predictive and counterfactual answering through ground-truth
//! re-simulation: the reasoner pipeline runs on the (re-)simulated trace and
//! each option is checked against the detected events.

use thiserror::Error;

use crate::events::{detect_events, EventKind, EventLog, Variant};
use crate::facts::{reconstruct, FactsError};
use crate::physics::Thresholds;
use crate::scene::{project_2d, quantize, Dims, ObjId, QuantSpec, SceneError, SceneTrace};
use crate::sim::{resimulate_without, simulate, SimConfig, SimError};

use super::ast::{Answer, EventStatement, ObjFilter, QuestionAst};

#[derive(Debug, Error)]
pub enum WhatIfError {
    #[error("removal target matches {0} objects, expected exactly 1")]
    BadRemovalTarget(usize),
    #[error("not a predictive or counterfactual question")]
    WrongKind,
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Facts(#[from] FactsError),
}

#[derive(Clone, Copy, Debug)]
pub struct WhatIfOpts {
    /// Frames of the observed video; predictive options are checked at and
    /// after this horizon.
    pub observed_frames: usize,
    pub thresholds: Thresholds,
    pub variant: Variant,
    pub quant: QuantSpec,
    /// Project to 2D before reasoning when set.
    pub dims: Option<Dims>,
}

fn detect_on(
    trace: &SceneTrace,
    opts: &WhatIfOpts,
) -> Result<EventLog, WhatIfError> {
    let trace = match opts.dims {
        Some(Dims::Two) => project_2d(trace),
        _ => trace.clone(),
    };
    let quantized = quantize(&trace, opts.quant)?;
    let fb = reconstruct(&quantized)?;
    Ok(detect_events(&fb, &opts.thresholds, opts.variant))
}

fn filter_ids(config: &SimConfig, f: &ObjFilter) -> Vec<ObjId> {
    config
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

/// Does a statement hold among detected events at or after `from_t`?
fn statement_detected(
    log: &EventLog,
    config: &SimConfig,
    stmt: &EventStatement,
    from_t: usize,
) -> bool {
    match stmt {
        EventStatement::Enters(f) => {
            let objs = filter_ids(config, f);
            log.events_of(EventKind::Entry)
                .any(|e| e.t >= from_t && objs.contains(&e.a))
        }
        EventStatement::Exits(f) => {
            let objs = filter_ids(config, f);
            log.events_of(EventKind::Exit)
                .any(|e| e.t >= from_t && objs.contains(&e.a))
        }
        EventStatement::Collides(f1, f2) => {
            let xs = filter_ids(config, f1);
            let ys = filter_ids(config, f2);
            log.events_of(EventKind::Collision).any(|e| {
                let (a, b) = (e.a, e.b.unwrap());
                e.t >= from_t
                    && ((xs.contains(&a) && ys.contains(&b))
                        || (xs.contains(&b) && ys.contains(&a)))
            })
        }
    }
}

/// Answer a predictive or counterfactual question by re-simulation.
///
/// Predictive: the full-horizon simulation extends the observed video; each
/// option is tested in the extension window. Counterfactual: the scene is
/// re-simulated without the named object and options are tested over the
/// whole horizon.
pub fn answer_whatif(
    ast: &QuestionAst,
    config: &SimConfig,
    opts: &WhatIfOpts,
) -> Result<Answer, WhatIfError> {
    match ast {
        QuestionAst::Predictive { options } => {
            let (trace, _) = simulate(config)?;
            let log = detect_on(&trace, opts)?;
            Ok(Answer::Options(
                options
                    .iter()
                    .map(|s| statement_detected(&log, config, s, opts.observed_frames))
                    .collect(),
            ))
        }
        QuestionAst::Counterfactual { remove, options } => {
            let ids = filter_ids(config, remove);
            if ids.len() != 1 {
                return Err(WhatIfError::BadRemovalTarget(ids.len()));
            }
            let (trace, _) = resimulate_without(config, ids[0])?;
            let mut cf_config = config.clone();
            cf_config.objects.retain(|o| o.id != ids[0].0);
            let log = detect_on(&trace, opts)?;
            Ok(Answer::Options(
                options
                    .iter()
                    .map(|s| statement_detected(&log, &cf_config, s, 0))
                    .collect(),
            ))
        }
        _ => Err(WhatIfError::WrongKind),
    }
}
