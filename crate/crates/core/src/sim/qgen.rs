//! Grammar-driven question generation with oracle answers.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::events::EventKind;
use crate::query::{
    Answer, AnchorEvent, AnchorKind, AttrKind, CauseOption, EventClause, EventStatement,
    ObjFilter, QuestionAst, StatePred, TargetEvent, TimeRef, Window,
};
use crate::scene::{ObjId, Vocabulary};

use super::oracle::{oracle_answer, oracle_counterfactual, oracle_predictive, OracleError};
use super::simulate::resimulate_without;
use super::truth::GroundTruth;

/// The smallest filter (fewest stated attributes) uniquely identifying the
/// object among the scene's objects. Attribute tuples are unique per scene,
/// so the full tuple always works.
pub fn minimal_filter(gt: &GroundTruth, id: ObjId, exclude: Option<AttrKind>) -> ObjFilter {
    let o = gt.config.object(id).expect("object in config");
    let color = Some(o.color.clone());
    let material = Some(o.material.clone());
    let shape = Some(o.shape.clone());
    let mut candidates: Vec<ObjFilter> = vec![
        ObjFilter {
            shape: shape.clone(),
            ..Default::default()
        },
        ObjFilter {
            color: color.clone(),
            ..Default::default()
        },
        ObjFilter {
            color: color.clone(),
            shape: shape.clone(),
            ..Default::default()
        },
        ObjFilter {
            material: material.clone(),
            shape: shape.clone(),
            ..Default::default()
        },
        ObjFilter {
            color: color.clone(),
            material: material.clone(),
            ..Default::default()
        },
        ObjFilter {
            color,
            material,
            shape,
        },
    ];
    if let Some(k) = exclude {
        candidates.retain(|f| match k {
            AttrKind::Color => f.color.is_none(),
            AttrKind::Material => f.material.is_none(),
            AttrKind::Shape => f.shape.is_none(),
        });
    }
    for f in candidates {
        let hits = gt
            .config
            .objects
            .iter()
            .filter(|o| {
                f.color.as_deref().is_none_or(|c| c == o.color)
                    && f.material.as_deref().is_none_or(|m| m == o.material)
                    && f.shape.as_deref().is_none_or(|s| s == o.shape)
            })
            .count();
        if hits == 1 {
            return f;
        }
    }
    // Full tuple minus the excluded attribute may be ambiguous only if two
    // objects differ solely in that attribute; fall back to the fullest
    // allowed filter.
    let o = gt.config.object(id).unwrap();
    let mut f = ObjFilter {
        color: Some(o.color.clone()),
        material: Some(o.material.clone()),
        shape: Some(o.shape.clone()),
    };
    match exclude {
        Some(AttrKind::Color) => f.color = None,
        Some(AttrKind::Material) => f.material = None,
        Some(AttrKind::Shape) => f.shape = None,
        None => {}
    }
    f
}

fn random_filter(rng: &mut ChaCha8Rng, vocab: &Vocabulary) -> ObjFilter {
    let pick = |rng: &mut ChaCha8Rng, set: &std::collections::BTreeSet<String>| {
        let items: Vec<&String> = set.iter().collect();
        items[rng.random_range(0..items.len())].clone()
    };
    ObjFilter {
        color: (rng.random::<f64>() < 0.45).then(|| pick(rng, &vocab.colors)),
        material: (rng.random::<f64>() < 0.2).then(|| pick(rng, &vocab.materials)),
        shape: (rng.random::<f64>() < 0.4).then(|| pick(rng, &vocab.shapes)),
    }
}

fn random_object(gt: &GroundTruth, rng: &mut ChaCha8Rng) -> ObjId {
    let objs = &gt.config.objects;
    ObjId(objs[rng.random_range(0..objs.len())].id)
}

fn random_timeref(gt: &GroundTruth, rng: &mut ChaCha8Rng) -> TimeRef {
    let entering: Vec<ObjId> = gt
        .events_of(EventKind::Entry)
        .map(|e| e.a)
        .collect();
    let exiting: Vec<ObjId> = gt.events_of(EventKind::Exit).map(|e| e.a).collect();
    match rng.random_range(0..10) {
        0..=2 => TimeRef::Begin,
        3..=5 => TimeRef::End,
        6 | 7 if !entering.is_empty() => {
            let v = entering[rng.random_range(0..entering.len())];
            let anchor = AnchorEvent {
                obj: minimal_filter(gt, v, None),
                kind: AnchorKind::Enters,
            };
            if rng.random::<f64>() < 0.7 {
                TimeRef::After(anchor)
            } else {
                TimeRef::Before(anchor)
            }
        }
        8 | 9 if !exiting.is_empty() => {
            let v = exiting[rng.random_range(0..exiting.len())];
            let anchor = AnchorEvent {
                obj: minimal_filter(gt, v, None),
                kind: AnchorKind::Exits,
            };
            if rng.random::<f64>() < 0.7 {
                TimeRef::Before(anchor)
            } else {
                TimeRef::After(anchor)
            }
        }
        _ => TimeRef::End,
    }
}

fn random_window(gt: &GroundTruth, rng: &mut ChaCha8Rng) -> Option<Window> {
    if rng.random::<f64>() < 0.65 {
        return None;
    }
    match random_timeref(gt, rng) {
        TimeRef::Before(a) => Some(Window::Before(a)),
        TimeRef::After(a) => Some(Window::After(a)),
        _ => None,
    }
}

fn random_state(rng: &mut ChaCha8Rng) -> StatePred {
    match rng.random_range(0..3) {
        0 => StatePred::Moving,
        1 => StatePred::Stationary,
        _ => StatePred::Present,
    }
}

fn random_event_clause(gt: &GroundTruth, rng: &mut ChaCha8Rng) -> EventClause {
    match rng.random_range(0..3) {
        0 => EventClause::Enters,
        1 => EventClause::Exits,
        _ => {
            let v = random_object(gt, rng);
            EventClause::CollidesWith(minimal_filter(gt, v, None))
        }
    }
}

/// Generate descriptive questions with oracle answers. Existence answers
/// are roughly balanced between yes and no.
pub fn generate_descriptive(
    gt: &GroundTruth,
    count: usize,
    seed: u64,
) -> Vec<(QuestionAst, Answer)> {
    let vocab = Vocabulary::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut yes = 0usize;
    let mut no = 0usize;
    let mut attempts = 0usize;
    while out.len() < count && attempts < count * 60 {
        attempts += 1;
        let ast = match rng.random_range(0..100) {
            0..=24 => QuestionAst::CountState {
                filter: random_filter(&mut rng, &vocab),
                state: random_state(&mut rng),
                time: random_timeref(gt, &mut rng),
            },
            25..=32 => QuestionAst::CountThere {
                filter: random_filter(&mut rng, &vocab),
            },
            33..=54 => QuestionAst::ExistState {
                filter: random_filter(&mut rng, &vocab),
                state: random_state(&mut rng),
                time: random_timeref(gt, &mut rng),
            },
            55..=74 => QuestionAst::ExistEvent {
                filter: random_filter(&mut rng, &vocab),
                event: random_event_clause(gt, &mut rng),
                window: random_window(gt, &mut rng),
            },
            75..=85 => {
                let v = random_object(gt, &mut rng);
                let attr = match rng.random_range(0..3) {
                    0 => AttrKind::Color,
                    1 => AttrKind::Shape,
                    _ => AttrKind::Material,
                };
                QuestionAst::AttrState {
                    attr,
                    of: minimal_filter(gt, v, Some(attr)),
                    state: random_state(&mut rng),
                    time: random_timeref(gt, &mut rng),
                }
            }
            _ => {
                let v = random_object(gt, &mut rng);
                let attr = match rng.random_range(0..3) {
                    0 => AttrKind::Color,
                    1 => AttrKind::Shape,
                    _ => AttrKind::Material,
                };
                QuestionAst::AttrEvent {
                    attr,
                    of: minimal_filter(gt, v, Some(attr)),
                    event: random_event_clause(gt, &mut rng),
                    window: random_window(gt, &mut rng),
                }
            }
        };
        match oracle_answer(&ast, gt) {
            Ok(answer) => {
                // Keep existence answers roughly balanced.
                match &answer {
                    Answer::Yes if yes > no + count / 4 => continue,
                    Answer::No if no > yes + count / 4 => continue,
                    Answer::Yes => yes += 1,
                    Answer::No => no += 1,
                    _ => {}
                }
                out.push((ast, answer));
            }
            Err(OracleError::Ambiguous { .. }) | Err(OracleError::NoReferent) => continue,
            Err(OracleError::NeedsSimulation) => unreachable!("descriptive only"),
        }
    }
    out
}

/// Generate explanatory questions (responsibility for a collision or exit).
pub fn generate_explanatory(
    gt: &GroundTruth,
    count: usize,
    seed: u64,
) -> Vec<(QuestionAst, Answer)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xE0E0_E0E0);
    let collisions: Vec<_> = gt.events_of(EventKind::Collision).copied().collect();
    let exits: Vec<_> = gt.events_of(EventKind::Exit).copied().collect();
    if collisions.is_empty() && exits.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < count * 40 {
        attempts += 1;
        let use_collision = !collisions.is_empty() && (exits.is_empty() || rng.random_range(0..3) > 0);
        let target = if use_collision {
            let e = collisions[rng.random_range(0..collisions.len())];
            let (a, b) = (e.a, e.b.unwrap());
            let (a, b) = if rng.random::<bool>() { (a, b) } else { (b, a) };
            TargetEvent::Collision(
                minimal_filter(gt, a, None),
                minimal_filter(gt, b, None),
            )
        } else {
            let e = exits[rng.random_range(0..exits.len())];
            TargetEvent::Exit(minimal_filter(gt, e.a, None))
        };
        // Candidate options: objects plus entry/exit/collision events.
        let mut pool: Vec<CauseOption> = Vec::new();
        for o in &gt.config.objects {
            pool.push(CauseOption::Object(minimal_filter(gt, ObjId(o.id), None)));
        }
        for e in &gt.events {
            match e.kind {
                EventKind::Entry => {
                    pool.push(CauseOption::Entry(minimal_filter(gt, e.a, None)))
                }
                EventKind::Exit => pool.push(CauseOption::Exit(minimal_filter(gt, e.a, None))),
                EventKind::Collision => pool.push(CauseOption::Collision(
                    minimal_filter(gt, e.a, None),
                    minimal_filter(gt, e.b.unwrap(), None),
                )),
                _ => {}
            }
        }
        // Shuffle and take 3-4 distinct options.
        for i in (1..pool.len()).rev() {
            let j = rng.random_range(0..=i);
            pool.swap(i, j);
        }
        let want = 3 + (rng.random_range(0..2)) as usize;
        let mut options: Vec<CauseOption> = Vec::new();
        for o in pool {
            if options.len() >= want {
                break;
            }
            if !options.contains(&o) {
                options.push(o);
            }
        }
        if options.len() < 2 {
            continue;
        }
        let ast = QuestionAst::Explanatory { target, options };
        if let Ok(answer) = oracle_answer(&ast, gt) {
            // Prefer questions whose options are not all identical.
            if let Answer::Options(v) = &answer {
                let mixed = v.iter().any(|&b| b) && v.iter().any(|&b| !b);
                if mixed || rng.random::<f64>() < 0.25 {
                    out.push((ast, answer));
                }
            }
        }
    }
    out
}

fn random_statement(gt: &GroundTruth, rng: &mut ChaCha8Rng) -> EventStatement {
    let v = random_object(gt, rng);
    match rng.random_range(0..4) {
        0 => EventStatement::Enters(minimal_filter(gt, v, None)),
        1 => EventStatement::Exits(minimal_filter(gt, v, None)),
        _ => {
            let mut u = random_object(gt, rng);
            let mut guard = 0;
            while u == v && guard < 8 {
                u = random_object(gt, rng);
                guard += 1;
            }
            EventStatement::Collides(
                minimal_filter(gt, v, None),
                minimal_filter(gt, u, None),
            )
        }
    }
}

/// Predictive questions: options checked strictly after the observed prefix.
pub fn generate_predictive(
    gt: &GroundTruth,
    observed: usize,
    count: usize,
    seed: u64,
) -> Vec<(QuestionAst, Answer)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9D1C_71FE);
    let mut out = Vec::new();
    for _ in 0..count * 20 {
        if out.len() >= count {
            break;
        }
        let n_opt = 3 + rng.random_range(0..2) as usize;
        let mut options = Vec::new();
        for _ in 0..n_opt {
            options.push(random_statement(gt, &mut rng));
        }
        let ast = QuestionAst::Predictive {
            options: options.clone(),
        };
        let answer = oracle_predictive(gt, &options, observed);
        if let Answer::Options(v) = &answer {
            if v.iter().any(|&b| b) || rng.random::<f64>() < 0.3 {
                out.push((ast, answer));
            }
        }
    }
    out
}

/// Counterfactual questions: the oracle answers against the re-simulated
/// world without the removed object.
pub fn generate_counterfactual(
    gt: &GroundTruth,
    count: usize,
    seed: u64,
) -> Vec<(QuestionAst, Answer)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xCF00);
    let mut out = Vec::new();
    for _ in 0..count * 20 {
        if out.len() >= count {
            break;
        }
        let remove = random_object(gt, &mut rng);
        let Ok((_, gt_cf)) = resimulate_without(&gt.config, remove) else {
            continue;
        };
        let n_opt = 3 + rng.random_range(0..2) as usize;
        let mut options = Vec::new();
        let mut guard = 0;
        while options.len() < n_opt && guard < 40 {
            guard += 1;
            let s = random_statement(gt, &mut rng);
            let mentions_removed = |f: &ObjFilter| {
                super::oracle::filter_matches_object(gt, f, remove)
            };
            let skip = match &s {
                EventStatement::Enters(f) | EventStatement::Exits(f) => mentions_removed(f),
                EventStatement::Collides(a, b) => mentions_removed(a) || mentions_removed(b),
            };
            if !skip && !options.contains(&s) {
                options.push(s);
            }
        }
        if options.len() < 2 {
            continue;
        }
        let ast = QuestionAst::Counterfactual {
            remove: minimal_filter(gt, remove, None),
            options: options.clone(),
        };
        let answer = oracle_counterfactual(&gt_cf, &options);
        out.push((ast, answer));
    }
    out
}
