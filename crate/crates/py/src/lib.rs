//! Python bindings: the reasoner's main operations over its wire formats
//! (trace JSON, ground-truth JSON, question files, thresholds files).

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use seer_core::engine::{evaluate, parse_program, EvalOptions};
use seer_core::events::Variant;
use seer_core::facts::{reconstruct, FactBase};
use seer_core::physics::Thresholds;
use seer_core::pipeline::{analyze_trace, answer_trace, PipelineConfig};
use seer_core::query::{parse_question, read_question_file, render, QuestionAst};
use seer_core::report::{evaluate_answers, read_answers, write_answers};
use seer_core::scene::{
    load_trace, perturb, project_2d, quantize, save_trace, Dims, LoadOptions, NoiseSpec,
    QuantSpec, SceneTrace, Vocabulary,
};
use seer_core::sim::{generate_scene, simulate, GenSpec, GroundTruth, SimConfig};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn trace_from_json(text: &str) -> PyResult<SceneTrace> {
    load_trace(text.as_bytes(), &LoadOptions::default()).map_err(err)
}

fn parse_thresholds(text: Option<&str>) -> PyResult<Thresholds> {
    match text {
        Some(t) => t.parse().map_err(err),
        None => Ok(Thresholds::default()),
    }
}

fn parse_variant(text: &str) -> PyResult<Variant> {
    text.parse().map_err(err)
}

fn parse_dims(dims: Option<u8>) -> PyResult<Option<Dims>> {
    match dims {
        None => Ok(None),
        Some(d) => Dims::from_arity(d)
            .map(Some)
            .ok_or_else(|| err(format!("dims must be 2 or 3, found {d}"))),
    }
}

/// Simulate one scripted scene config (JSON); returns (trace, truth) JSON.
#[pyfunction]
fn simulate_config(config_json: &str) -> PyResult<(String, String)> {
    let config: SimConfig = serde_json::from_str(config_json).map_err(err)?;
    let (trace, truth) = simulate(&config).map_err(err)?;
    Ok((save_trace(&trace), truth.to_json()))
}

/// Draw a random scene from a generator spec (JSON, `{}` for defaults);
/// returns (config, trace, truth) JSON.
#[pyfunction]
fn generate(spec_json: &str, seed: u64) -> PyResult<(String, String, String)> {
    let spec: GenSpec = if spec_json.trim().is_empty() || spec_json.trim() == "{}" {
        GenSpec::default()
    } else {
        serde_json::from_str(spec_json).map_err(err)?
    };
    let (config, trace, truth) = generate_scene(&spec, seed).map_err(err)?;
    Ok((
        serde_json::to_string_pretty(&config).map_err(err)?,
        save_trace(&trace),
        truth.to_json(),
    ))
}

/// Apply seeded perception noise to a trace.
#[pyfunction]
fn perturb_trace(
    trace_json: &str,
    position_sigma: f64,
    flicker_prob: f64,
    seed: u64,
) -> PyResult<String> {
    let trace = trace_from_json(trace_json)?;
    let noisy = perturb(
        &trace,
        &NoiseSpec {
            position_sigma,
            flicker_prob,
            seed,
        },
    );
    Ok(save_trace(&noisy))
}

/// Quantize raw coordinates to integers at the given scale.
#[pyfunction]
fn quantize_trace(trace_json: &str, scale: u32) -> PyResult<String> {
    let trace = trace_from_json(trace_json)?;
    Ok(save_trace(&quantize(&trace, QuantSpec { scale }).map_err(err)?))
}

/// Reconstruct the symbolic fact base; returns the sorted fact dump.
#[pyfunction]
#[pyo3(signature = (trace_json, scale = 100, dims = None))]
fn reconstruct_facts(trace_json: &str, scale: u32, dims: Option<u8>) -> PyResult<String> {
    let mut trace = trace_from_json(trace_json)?;
    if parse_dims(dims)? == Some(Dims::Two) {
        trace = project_2d(&trace);
    }
    let quantized = quantize(&trace, QuantSpec { scale }).map_err(err)?;
    let fb: FactBase = reconstruct(&quantized).map_err(err)?;
    Ok(fb.dump())
}

/// Detect events; returns the `happens(...)` dump.
#[pyfunction]
#[pyo3(signature = (trace_json, thresholds = None, variant = "H2", dims = None))]
fn detect(
    trace_json: &str,
    thresholds: Option<&str>,
    variant: &str,
    dims: Option<u8>,
) -> PyResult<String> {
    let trace = trace_from_json(trace_json)?;
    let cfg = PipelineConfig {
        thresholds: parse_thresholds(thresholds)?,
        variant: parse_variant(variant)?,
        quant: QuantSpec::default(),
        dims: parse_dims(dims)?,
    };
    let analysis = analyze_trace(&trace, &cfg).map_err(err)?;
    Ok(analysis.events.dump())
}

/// Answer a question file against a trace; returns the answers TSV.
/// Pass the ground-truth JSON to enable predictive/counterfactual
/// questions.
#[pyfunction]
#[pyo3(signature = (trace_json, questions, thresholds = None, variant = "H2", dims = None, truth_json = None, observed = None))]
#[allow(clippy::too_many_arguments)]
fn answer(
    trace_json: &str,
    questions: &str,
    thresholds: Option<&str>,
    variant: &str,
    dims: Option<u8>,
    truth_json: Option<&str>,
    observed: Option<usize>,
) -> PyResult<String> {
    let trace = trace_from_json(trace_json)?;
    let cfg = PipelineConfig {
        thresholds: parse_thresholds(thresholds)?,
        variant: parse_variant(variant)?,
        quant: QuantSpec::default(),
        dims: parse_dims(dims)?,
    };
    let vocab = Vocabulary::default();
    let mut parsed: Vec<(String, QuestionAst)> = Vec::new();
    let mut failed: Vec<String> = Vec::new();
    for (id, q) in read_question_file(questions, &vocab) {
        match q {
            Ok(ast) => parsed.push((id, ast)),
            Err(_) => failed.push(id),
        }
    }
    let truth = match truth_json {
        Some(t) => Some(GroundTruth::from_json(t).map_err(err)?),
        None => None,
    };
    let whatif = truth
        .as_ref()
        .map(|t| (&t.config, observed.unwrap_or(t.config.frame_count)));
    let mut rows = answer_trace(&trace, &parsed, &cfg, whatif).map_err(err)?;
    for id in failed {
        rows.push((id, None));
    }
    Ok(write_answers(&rows))
}

/// Brute-force oracle answers for a question file, straight off the ground
/// truth.
#[pyfunction]
fn oracle_answers(truth_json: &str, questions: &str) -> PyResult<String> {
    let truth = GroundTruth::from_json(truth_json).map_err(err)?;
    let vocab = Vocabulary::default();
    let mut rows = Vec::new();
    for (id, parsed) in read_question_file(questions, &vocab) {
        let answer = parsed
            .ok()
            .and_then(|ast| match ast {
                QuestionAst::Predictive { options } => Some(
                    seer_core::sim::oracle_predictive(&truth, &options, truth.config.frame_count),
                ),
                QuestionAst::Counterfactual { .. } => None,
                ast => seer_core::sim::oracle_answer(&ast, &truth).ok(),
            });
        rows.push((id, answer));
    }
    Ok(write_answers(&rows))
}

/// Generate grammar questions with oracle answers from a ground truth;
/// returns (questions file, oracle answers TSV).
#[pyfunction]
#[pyo3(signature = (truth_json, descriptive = 20, explanatory = 5, seed = 0))]
fn generate_questions(
    truth_json: &str,
    descriptive: usize,
    explanatory: usize,
    seed: u64,
) -> PyResult<(String, String)> {
    let truth = GroundTruth::from_json(truth_json).map_err(err)?;
    let mut questions = seer_core::sim::generate_descriptive(&truth, descriptive, seed);
    questions.extend(seer_core::sim::generate_explanatory(
        &truth,
        explanatory,
        seed,
    ));
    let mut qtext = String::new();
    let mut answers = Vec::new();
    for (i, (ast, ans)) in questions.into_iter().enumerate() {
        let id = format!("q{i}");
        qtext.push_str(&seer_core::query::question_line(&id, &ast));
        qtext.push('\n');
        answers.push((id, Some(ans)));
    }
    Ok((qtext, write_answers(&answers)))
}

/// Parse a rule program (syntax and safety check); returns the canonical
/// re-rendering.
#[pyfunction]
fn check_program(text: &str) -> PyResult<String> {
    let program = parse_program(text).map_err(err)?;
    Ok(program.to_string())
}

/// Evaluate a rule program over optional extra facts; returns the sorted
/// model dump.
#[pyfunction]
#[pyo3(signature = (program_text, facts_text = ""))]
fn evaluate_program(program_text: &str, facts_text: &str) -> PyResult<String> {
    let mut full = String::from(program_text);
    full.push('\n');
    full.push_str(facts_text);
    let program = parse_program(&full).map_err(err)?;
    let horizon = program
        .facts
        .iter()
        .filter(|a| a.pred == seer_core::logic::Sym::new("time"))
        .filter_map(|a| a.args[0].as_int())
        .max()
        .map(|t| t as usize + 1)
        .unwrap_or(0);
    let fb = FactBase::new(Dims::Three, horizon);
    let model = evaluate(&program, &fb, &EvalOptions::default()).map_err(err)?;
    Ok(model.dump())
}

/// The full rule file for a variant (the program the engine route runs).
#[pyfunction]
#[pyo3(signature = (variant = "H2", thresholds = None, dims = 3))]
fn rule_file(variant: &str, thresholds: Option<&str>, dims: u8) -> PyResult<String> {
    let dims = Dims::from_arity(dims).ok_or_else(|| err("dims must be 2 or 3"))?;
    Ok(seer_core::rules::full_program(
        parse_variant(variant)?,
        &parse_thresholds(thresholds)?,
        dims,
    ))
}

/// Validate one question sentence; returns (qtype, canonical rendering).
#[pyfunction]
fn check_question(text: &str) -> PyResult<(String, String)> {
    let ast = parse_question(text, &Vocabulary::default()).map_err(err)?;
    Ok((ast.qtype().to_string(), render(&ast)))
}

/// Score predicted answers against oracle answers; returns the report text.
#[pyfunction]
#[pyo3(signature = (predicted_tsv, oracle_tsv, questions = None))]
fn score(predicted_tsv: &str, oracle_tsv: &str, questions: Option<&str>) -> PyResult<String> {
    let vocab = Vocabulary::default();
    let predicted = read_answers(predicted_tsv, &vocab);
    let oracle = read_answers(oracle_tsv, &vocab);
    let mut qtypes = std::collections::BTreeMap::new();
    if let Some(qs) = questions {
        for (id, parsed) in read_question_file(qs, &vocab) {
            if let Ok(ast) = parsed {
                qtypes.insert(id, ast.qtype());
            }
        }
    }
    let report = evaluate_answers(&predicted, &oracle, &qtypes).map_err(err)?;
    Ok(report.render())
}

#[pymodule]
fn seer(m: &Bound<PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(simulate_config, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(perturb_trace, m)?)?;
    m.add_function(wrap_pyfunction!(quantize_trace, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct_facts, m)?)?;
    m.add_function(wrap_pyfunction!(detect, m)?)?;
    m.add_function(wrap_pyfunction!(answer, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_answers, m)?)?;
    m.add_function(wrap_pyfunction!(generate_questions, m)?)?;
    m.add_function(wrap_pyfunction!(check_program, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_program, m)?)?;
    m.add_function(wrap_pyfunction!(rule_file, m)?)?;
    m.add_function(wrap_pyfunction!(check_question, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    Ok(())
}
