//! Subcommand implementations.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use serde::Deserialize;

use seer_core::calib::{analyze_collisions, dist_csv, grid_search, vel_csv, CalibScene, Grid};
use seer_core::events::Variant;
use seer_core::facts::reconstruct;
use seer_core::physics::{Kinematics, Thresholds};
use seer_core::pipeline::{answer_trace, PipelineConfig};
use seer_core::query::{read_question_file, QType, QuestionAst};
use seer_core::report::{evaluate_answers, read_answers, write_answers};
use seer_core::scene::{load_trace, quantize, Dims, LoadOptions, QuantSpec, SceneTrace, Vocabulary};
use seer_core::sim::{generate_scene, GenSpec, GroundTruth, SimConfig};

use crate::guard_overwrite;

pub enum CliError {
    /// Bad user input: missing or malformed files, unknown flags values.
    Input(String),
    /// A violated internal invariant (evaluation failure, poisoned state).
    Internal(String),
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

fn internal<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Internal(e.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str, force: bool) -> Result<(), CliError> {
    guard_overwrite(path, force)?;
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| input(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, contents).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn setup_pool(jobs: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(internal)?;
    }
    Ok(())
}

pub struct ReasonerSetup {
    pub thresholds: Option<PathBuf>,
    pub variant: String,
    pub dims: Option<u8>,
    pub stride: usize,
}

impl ReasonerSetup {
    fn pipeline_config(&self) -> Result<PipelineConfig, CliError> {
        let thresholds = match &self.thresholds {
            Some(path) => read(path)?
                .parse::<Thresholds>()
                .map_err(|e| input(format!("{}: {e}", path.display())))?,
            None => Thresholds::default(),
        };
        for w in thresholds.warnings() {
            eprintln!("warning: {w}");
        }
        let variant: Variant = self.variant.parse().map_err(input)?;
        let dims = match self.dims {
            None => None,
            Some(d) => Some(
                Dims::from_arity(d)
                    .ok_or_else(|| input(format!("dims must be 2 or 3, found {d}")))?,
            ),
        };
        Ok(PipelineConfig {
            thresholds,
            variant,
            quant: QuantSpec::default(),
            dims,
        })
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SimInput {
    Scripted { scene: SimConfig },
    Generated(GenSpec),
}

pub fn simulate_cmd(
    config_path: &Path,
    count: usize,
    seed: u64,
    out: &Path,
    force: bool,
    jobs: Option<usize>,
) -> Result<ExitCode, CliError> {
    setup_pool(jobs)?;
    let text = read(config_path)?;
    let parsed: SimInput = serde_json::from_str(&text)
        .map_err(|e| input(format!("{}: {e}", config_path.display())))?;

    // Validate output paths up front so --force semantics are atomic-ish.
    for i in 0..count {
        guard_overwrite(&out.join(format!("scene_{i:04}.trace.json")), force)?;
        guard_overwrite(&out.join(format!("scene_{i:04}.truth.json")), force)?;
    }
    fs::create_dir_all(out).map_err(|e| input(format!("{}: {e}", out.display())))?;

    use rayon::prelude::*;
    let results: Vec<Result<(), CliError>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let (trace, truth): (SceneTrace, GroundTruth) = match &parsed {
                SimInput::Scripted { scene } => {
                    let mut scene = scene.clone();
                    scene.seed = seed + i as u64;
                    seer_core::sim::simulate(&scene).map_err(input)?
                }
                SimInput::Generated(spec) => {
                    let (_, trace, truth) =
                        generate_scene(spec, seed + i as u64).map_err(input)?;
                    (trace, truth)
                }
            };
            let trace_path = out.join(format!("scene_{i:04}.trace.json"));
            let truth_path = out.join(format!("scene_{i:04}.truth.json"));
            fs::write(&trace_path, seer_core::scene::save_trace(&trace))
                .map_err(|e| input(format!("{}: {e}", trace_path.display())))?;
            fs::write(&truth_path, truth.to_json())
                .map_err(|e| input(format!("{}: {e}", truth_path.display())))?;
            Ok(())
        })
        .collect();
    for r in results {
        r?;
    }
    println!("wrote {count} scenes to {}", out.display());
    Ok(ExitCode::SUCCESS)
}


fn truth_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    let entries = fs::read_dir(dir).map_err(|e| input(format!("{}: {e}", dir.display())))?;
    for entry in entries {
        let path = entry.map_err(input)?.path();
        if path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.ends_with(".truth.json"))
        {
            out.push(path);
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(input(format!(
            "no *.truth.json files in {}",
            dir.display()
        )));
    }
    Ok(out)
}

pub fn genq(
    scenes: &Path,
    descriptive: usize,
    explanatory: usize,
    seed: u64,
    force: bool,
    jobs: Option<usize>,
) -> Result<ExitCode, CliError> {
    setup_pool(jobs)?;
    let files = truth_files(scenes)?;
    use rayon::prelude::*;
    let results: Vec<Result<usize, CliError>> = files
        .par_iter()
        .enumerate()
        .map(|(i, path)| {
            let truth = GroundTruth::from_json(&read(path)?)
                .map_err(|e| input(format!("{}: {e}", path.display())))?;
            let scene_seed = seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let mut questions =
                seer_core::sim::generate_descriptive(&truth, descriptive, scene_seed);
            questions.extend(seer_core::sim::generate_explanatory(
                &truth,
                explanatory,
                scene_seed,
            ));
            let mut qtext = String::new();
            let mut answers = Vec::new();
            for (k, (ast, answer)) in questions.iter().enumerate() {
                let id = format!("q{k}");
                qtext.push_str(&seer_core::query::question_line(&id, ast));
                qtext.push('\n');
                answers.push((id, Some(answer.clone())));
            }
            let base = path
                .to_str()
                .unwrap()
                .trim_end_matches(".truth.json")
                .to_string();
            let qpath = PathBuf::from(format!("{base}.questions.txt"));
            let apath = PathBuf::from(format!("{base}.oracle.tsv"));
            guard_overwrite(&qpath, force)?;
            guard_overwrite(&apath, force)?;
            fs::write(&qpath, qtext).map_err(input)?;
            fs::write(&apath, write_answers(&answers)).map_err(input)?;
            Ok(questions.len())
        })
        .collect();
    let mut total = 0;
    for r in results {
        total += r?;
    }
    println!(
        "wrote questions for {} scenes ({total} questions)",
        files.len()
    );
    Ok(ExitCode::SUCCESS)
}

pub fn answer(
    trace_path: &Path,
    questions_path: &Path,
    setup: &ReasonerSetup,
    truth_path: Option<&Path>,
    observed: Option<usize>,
    out: &Path,
    force: bool,
) -> Result<ExitCode, CliError> {
    guard_overwrite(out, force)?;
    let cfg = setup.pipeline_config()?;
    let vocab = Vocabulary::default();
    let trace = load_trace(read(trace_path)?.as_bytes(), &LoadOptions::default())
        .map_err(|e| input(format!("{}: {e}", trace_path.display())))?;
    let trace = seer_core::scene::stride_trace(&trace, setup.stride);
    let parsed = read_question_file(&read(questions_path)?, &vocab);
    let mut questions: Vec<(String, QuestionAst)> = Vec::new();
    let mut unparsed: Vec<String> = Vec::new();
    for (id, result) in parsed {
        match result {
            Ok(ast) => questions.push((id, ast)),
            Err(e) => {
                eprintln!("warning: question {id}: {e}");
                unparsed.push(id);
            }
        }
    }

    let truth = match truth_path {
        Some(p) => Some(
            GroundTruth::from_json(&read(p)?)
                .map_err(|e| input(format!("{}: {e}", p.display())))?,
        ),
        None => None,
    };
    let whatif = truth
        .as_ref()
        .map(|t| (&t.config, observed.unwrap_or(t.config.frame_count)));

    let mut rows = answer_trace(&trace, &questions, &cfg, whatif).map_err(internal)?;
    for id in unparsed {
        rows.push((id, None));
    }
    write(out, &write_answers(&rows), force)?;

    let unanswered = rows.iter().filter(|(_, a)| a.is_none()).count();
    println!(
        "answered {}/{} questions -> {}",
        rows.len() - unanswered,
        rows.len(),
        out.display()
    );
    if unanswered > 0 {
        println!("{unanswered} unanswered (recorded as error:unanswered)");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

pub fn eval(
    answers_path: &Path,
    oracle_path: &Path,
    questions_path: Option<&Path>,
) -> Result<ExitCode, CliError> {
    let vocab = Vocabulary::default();
    let predicted = read_answers(&read(answers_path)?, &vocab);
    let oracle = read_answers(&read(oracle_path)?, &vocab);
    let mut qtypes: BTreeMap<String, QType> = BTreeMap::new();
    if let Some(qp) = questions_path {
        for (id, parsed) in read_question_file(&read(qp)?, &vocab) {
            if let Ok(ast) = parsed {
                qtypes.insert(id, ast.qtype());
            }
        }
    }
    let report = evaluate_answers(&predicted, &oracle, &qtypes).map_err(input)?;
    print!("{}", report.render());
    Ok(ExitCode::SUCCESS)
}

fn scene_stem(path: &Path) -> String {
    path.to_str()
        .unwrap()
        .trim_end_matches(".trace.json")
        .to_string()
}

fn load_scene_traces(dir: &Path) -> Result<Vec<(String, SceneTrace)>, CliError> {
    let mut out = Vec::new();
    let entries = fs::read_dir(dir).map_err(|e| input(format!("{}: {e}", dir.display())))?;
    for entry in entries {
        let path = entry.map_err(input)?.path();
        if path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.ends_with(".trace.json"))
        {
            let trace = load_trace(read(&path)?.as_bytes(), &LoadOptions::default())
                .map_err(|e| input(format!("{}: {e}", path.display())))?;
            out.push((scene_stem(&path), trace));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    if out.is_empty() {
        return Err(input(format!("no *.trace.json files in {}", dir.display())));
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
pub fn calibrate(
    scenes_dir: &Path,
    grid_path: Option<&Path>,
    variant: &str,
    dims: Option<u8>,
    out: &Path,
    table_out: Option<&Path>,
    force: bool,
    jobs: Option<usize>,
) -> Result<ExitCode, CliError> {
    setup_pool(jobs)?;
    guard_overwrite(out, force)?;
    if let Some(t) = table_out {
        guard_overwrite(t, force)?;
    }
    let variant: Variant = variant.parse().map_err(input)?;
    let quant = QuantSpec::default();
    let grid = match grid_path {
        Some(p) => serde_json::from_str(&read(p)?)
            .map_err(|e| input(format!("{}: {e}", p.display())))?,
        None => Grid::default_for_scale(quant.scale),
    };
    let vocab = Vocabulary::default();

    let mut scenes = Vec::new();
    for (stem, trace) in load_scene_traces(scenes_dir)? {
        let qpath = PathBuf::from(format!("{stem}.questions.txt"));
        let apath = PathBuf::from(format!("{stem}.oracle.tsv"));
        if !qpath.exists() || !apath.exists() {
            return Err(input(format!(
                "{stem}: missing questions/oracle files (run `seer genq` first)"
            )));
        }
        let trace = match dims {
            Some(2) => seer_core::scene::project_2d(&trace),
            _ => trace,
        };
        let quantized = quantize(&trace, quant).map_err(input)?;
        let fb = reconstruct(&quantized).map_err(input)?;
        let mut questions = Vec::new();
        let answers = read_answers(&read(&apath)?, &vocab);
        let answer_map: BTreeMap<String, _> = answers.into_iter().collect();
        for (id, parsed) in read_question_file(&read(&qpath)?, &vocab) {
            let ast = parsed.map_err(|e| input(format!("{stem}: {e}")))?;
            let oracle = answer_map
                .get(&id)
                .cloned()
                .flatten()
                .ok_or_else(|| input(format!("{stem}: no oracle answer for {id}")))?;
            questions.push((id, ast, oracle));
        }
        scenes.push(CalibScene::new(fb, questions));
    }

    let (best, table) = grid_search(&scenes, &grid, variant, 2);
    write(out, &best.to_text(), force)?;
    if let Some(tpath) = table_out {
        let mut csv = String::from("d_move,d_stop,d_prox,d_vel,correct,total,accuracy\n");
        for row in &table {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{:.4}\n",
                row.thresholds.d_move,
                row.thresholds.d_stop,
                row.thresholds.d_prox,
                row.thresholds.d_vel,
                row.correct,
                row.total,
                row.accuracy()
            ));
        }
        write(tpath, &csv, force)?;
    }
    let best_row = table
        .iter()
        .find(|r| r.thresholds == best)
        .expect("winner in table");
    println!(
        "best thresholds ({}/{} = {:.2}%): {best}",
        best_row.correct,
        best_row.total,
        100.0 * best_row.accuracy()
    );
    Ok(ExitCode::SUCCESS)
}

pub fn analyze(scenes_dir: &Path, out_dir: &Path, force: bool) -> Result<ExitCode, CliError> {
    let dist_path = out_dir.join("distances.csv");
    let vel_path = out_dir.join("velocity_changes.csv");
    guard_overwrite(&dist_path, force)?;
    guard_overwrite(&vel_path, force)?;

    let quant = QuantSpec::default();
    let mut inputs = Vec::new();
    for (stem, trace) in load_scene_traces(scenes_dir)? {
        let tpath = PathBuf::from(format!("{stem}.truth.json"));
        let truth = GroundTruth::from_json(&read(&tpath)?)
            .map_err(|e| input(format!("{}: {e}", tpath.display())))?;
        let quantized = quantize(&trace, quant).map_err(input)?;
        let fb = reconstruct(&quantized).map_err(input)?;
        inputs.push((Kinematics::from_facts(&fb), truth));
    }
    let (dist, vel) = analyze_collisions(&inputs);
    write(&dist_path, &dist_csv(&dist), force)?;
    write(&vel_path, &vel_csv(&vel), force)?;
    println!(
        "wrote {} distance rows and {} velocity rows to {}",
        dist.len(),
        vel.len(),
        out_dir.display()
    );
    Ok(ExitCode::SUCCESS)
}
