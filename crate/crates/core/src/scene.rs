//! Scene traces: the perception output contract.
//!
//! A trace is a per-frame list of object detections with attributes and
//! positions. Traces are loaded from and saved to a canonical UTF-8 JSON
//! document, quantized to integer coordinates for the rule engine, and
//! optionally perturbed with deterministic seeded noise.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Opaque integer object identifier.
#[derive(
    Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize,
)]
pub struct ObjId(pub i64);

impl fmt::Display for ObjId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Scene dimensionality: 2D (x, y) or 3D (x, y, z).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Dims {
    Two,
    Three,
}

impl Dims {
    pub fn arity(self) -> usize {
        match self {
            Dims::Two => 2,
            Dims::Three => 3,
        }
    }

    pub fn from_arity(n: u8) -> Option<Dims> {
        match n {
            2 => Some(Dims::Two),
            3 => Some(Dims::Three),
            _ => None,
        }
    }
}

/// Attribute vocabulary for detections. The defaults follow the usual
/// synthetic-scene palette; callers may extend or replace any class.
#[derive(Clone, Debug)]
pub struct Vocabulary {
    pub colors: BTreeSet<String>,
    pub shapes: BTreeSet<String>,
    pub materials: BTreeSet<String>,
}

impl Default for Vocabulary {
    fn default() -> Self {
        let set = |items: &[&str]| items.iter().map(|s| s.to_string()).collect();
        Vocabulary {
            colors: set(&[
                "gray", "red", "blue", "green", "brown", "cyan", "purple", "yellow",
            ]),
            shapes: set(&["cube", "sphere", "cylinder"]),
            materials: set(&["metal", "rubber"]),
        }
    }
}

impl Vocabulary {
    pub fn contains_color(&self, c: &str) -> bool {
        self.colors.contains(c)
    }
    pub fn contains_shape(&self, s: &str) -> bool {
        self.shapes.contains(s)
    }
    pub fn contains_material(&self, m: &str) -> bool {
        self.materials.contains(m)
    }
}

/// One detected object in one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Detection {
    pub id: ObjId,
    pub color: String,
    pub shape: String,
    pub material: String,
    /// Raw coordinates in scene units; length matches the trace's dims.
    pub pos: Vec<f64>,
    /// Detection confidence in [0, 1].
    pub score: f64,
}

/// One frame: its index and the detections present in it.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub t: usize,
    pub detections: Vec<Detection>,
}

/// An ordered sequence of frames for one video.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneTrace {
    pub video_id: String,
    pub dims: Dims,
    pub frame_count: usize,
    pub frames: Vec<Frame>,
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("malformed trace document at byte {offset} (line {line}, column {column}): {msg}")]
    Malformed {
        offset: usize,
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("non-contiguous frames: expected t={expected}, found t={found}")]
    NonContiguousFrames { expected: usize, found: usize },
    #[error("duplicate object id {id} in frame {t}")]
    DuplicateObject { id: ObjId, t: usize },
    #[error("frame count {declared} does not match {actual} frames")]
    FrameCountMismatch { declared: usize, actual: usize },
    #[error("detection score {score} outside [0,1] for object {id} in frame {t}")]
    BadScore { id: ObjId, t: usize, score: f64 },
    #[error("position arity {found} does not match dims {dims} for object {id} in frame {t}")]
    BadArity {
        id: ObjId,
        t: usize,
        dims: usize,
        found: usize,
    },
    #[error("unknown {class} token `{token}` for object {id}")]
    UnknownAttribute {
        class: &'static str,
        token: String,
        id: ObjId,
    },
    #[error("dims must be 2 or 3, found {0}")]
    BadDims(u8),
    #[error("quantized coordinate {value} exceeds the engine integer range")]
    QuantOverflow { value: f64 },
    #[error("quantization scale must be >= 1")]
    BadScale,
}

/// Options governing trace loading.
#[derive(Clone, Debug)]
pub struct LoadOptions {
    /// Detections scoring below this floor are dropped.
    pub score_floor: f64,
    pub vocab: Vocabulary,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            score_floor: 0.5,
            vocab: Vocabulary::default(),
        }
    }
}

/// Integer quantization: every raw coordinate becomes `round(c * scale)`,
/// rounding half away from zero.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct QuantSpec {
    pub scale: u32,
}

impl Default for QuantSpec {
    fn default() -> Self {
        QuantSpec { scale: 100 }
    }
}

/// Seeded perception noise.
///
/// `position_sigma` jitters every coordinate i.i.d. (scene units).
/// `flicker_prob` corrupts a present object's detection for one isolated
/// frame: the object is dropped from that frame and a phantom detection with
/// a fresh id and a distinct attribute tuple appears in its place, the way a
/// single-frame misclassification looks to downstream consumers. The same
/// object is never corrupted in two consecutive frames, and the first and
/// last frames of its presence are never touched, so ground-truth entry and
/// exit are preserved.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct NoiseSpec {
    pub position_sigma: f64,
    pub flicker_prob: f64,
    pub seed: u64,
}

impl SceneTrace {
    /// Validate the structural invariants: contiguous frames 0..N-1, no
    /// duplicate object id within a frame, scores and arities in range,
    /// attribute tokens in the vocabulary.
    pub fn validate(&self, vocab: &Vocabulary) -> Result<(), SceneError> {
        if self.frames.len() != self.frame_count {
            return Err(SceneError::FrameCountMismatch {
                declared: self.frame_count,
                actual: self.frames.len(),
            });
        }
        let mut seen_t: Vec<usize> = self.frames.iter().map(|f| f.t).collect();
        seen_t.sort_unstable();
        for (expected, &found) in seen_t.iter().enumerate() {
            if found != expected {
                return Err(SceneError::NonContiguousFrames { expected, found });
            }
        }
        for frame in &self.frames {
            let mut ids = HashSet::new();
            for d in &frame.detections {
                if !ids.insert(d.id) {
                    return Err(SceneError::DuplicateObject {
                        id: d.id,
                        t: frame.t,
                    });
                }
                if !(0.0..=1.0).contains(&d.score) {
                    return Err(SceneError::BadScore {
                        id: d.id,
                        t: frame.t,
                        score: d.score,
                    });
                }
                if d.pos.len() != self.dims.arity() {
                    return Err(SceneError::BadArity {
                        id: d.id,
                        t: frame.t,
                        dims: self.dims.arity(),
                        found: d.pos.len(),
                    });
                }
                if !vocab.contains_color(&d.color) {
                    return Err(SceneError::UnknownAttribute {
                        class: "color",
                        token: d.color.clone(),
                        id: d.id,
                    });
                }
                if !vocab.contains_shape(&d.shape) {
                    return Err(SceneError::UnknownAttribute {
                        class: "shape",
                        token: d.shape.clone(),
                        id: d.id,
                    });
                }
                if !vocab.contains_material(&d.material) {
                    return Err(SceneError::UnknownAttribute {
                        class: "material",
                        token: d.material.clone(),
                        id: d.id,
                    });
                }
            }
        }
        Ok(())
    }

    /// Sort frames by index and detections by object id (canonical order).
    pub fn normalize(&mut self) {
        self.frames.sort_by_key(|f| f.t);
        for f in &mut self.frames {
            f.detections.sort_by_key(|d| d.id);
        }
    }

    /// All object ids appearing anywhere in the trace, sorted.
    pub fn object_ids(&self) -> Vec<ObjId> {
        let mut ids: BTreeSet<ObjId> = BTreeSet::new();
        for f in &self.frames {
            for d in &f.detections {
                ids.insert(d.id);
            }
        }
        ids.into_iter().collect()
    }

    /// Frames in which `id` is present, ascending.
    pub fn presence(&self, id: ObjId) -> Vec<usize> {
        self.frames
            .iter()
            .filter(|f| f.detections.iter().any(|d| d.id == id))
            .map(|f| f.t)
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Loading and canonical serialization
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct TraceDoc {
    video_id: String,
    dims: u8,
    frame_count: usize,
    frames: Vec<FrameDoc>,
}

#[derive(Deserialize)]
struct FrameDoc {
    t: usize,
    detections: Vec<DetectionDoc>,
}

#[derive(Deserialize)]
struct DetectionDoc {
    id: i64,
    color: String,
    shape: String,
    material: String,
    pos: Vec<f64>,
    score: f64,
}

/// Parse a trace document, dropping detections below the score floor and
/// validating every invariant.
pub fn load_trace(source: &[u8], opts: &LoadOptions) -> Result<SceneTrace, SceneError> {
    let doc: TraceDoc = serde_json::from_slice(source).map_err(|e| {
        let (line, column) = (e.line(), e.column());
        SceneError::Malformed {
            offset: byte_offset(source, line, column),
            line,
            column,
            msg: e.to_string(),
        }
    })?;
    let dims = Dims::from_arity(doc.dims).ok_or(SceneError::BadDims(doc.dims))?;
    let mut trace = SceneTrace {
        video_id: doc.video_id,
        dims,
        frame_count: doc.frame_count,
        frames: doc
            .frames
            .into_iter()
            .map(|f| Frame {
                t: f.t,
                detections: f
                    .detections
                    .into_iter()
                    .filter(|d| d.score >= opts.score_floor)
                    .map(|d| Detection {
                        id: ObjId(d.id),
                        color: d.color,
                        shape: d.shape,
                        material: d.material,
                        pos: d.pos,
                        score: d.score,
                    })
                    .collect(),
            })
            .collect(),
    };
    trace.validate(&opts.vocab)?;
    trace.normalize();
    Ok(trace)
}

fn byte_offset(source: &[u8], line: usize, column: usize) -> usize {
    let mut l = 1;
    for (i, &b) in source.iter().enumerate() {
        if l == line {
            return i + column.saturating_sub(1);
        }
        if b == b'\n' {
            l += 1;
        }
    }
    source.len()
}

fn fmt_coord(x: f64) -> String {
    let mut s = format!("{:.6}", x);
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

/// Serialize a trace in canonical form: fixed key order, frames sorted by t,
/// detections sorted by id, coordinates with up to 6 decimals.
pub fn save_trace(trace: &SceneTrace) -> String {
    let mut sorted = trace.clone();
    sorted.normalize();
    let mut out = String::new();
    out.push_str(&format!(
        "{{\"video_id\": {}, \"dims\": {}, \"frame_count\": {}, \"frames\": [",
        serde_json::to_string(&sorted.video_id).unwrap(),
        sorted.dims.arity(),
        sorted.frame_count
    ));
    for (i, frame) in sorted.frames.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&format!("\n  {{\"t\": {}, \"detections\": [", frame.t));
        for (j, d) in frame.detections.iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            let pos = d
                .pos
                .iter()
                .map(|&c| fmt_coord(c))
                .collect::<Vec<_>>()
                .join(", ");
            out.push_str(&format!(
                "\n    {{\"id\": {}, \"color\": {}, \"shape\": {}, \"material\": {}, \"pos\": [{}], \"score\": {}}}",
                d.id.0,
                serde_json::to_string(&d.color).unwrap(),
                serde_json::to_string(&d.shape).unwrap(),
                serde_json::to_string(&d.material).unwrap(),
                pos,
                fmt_coord(d.score)
            ));
        }
        if frame.detections.is_empty() {
            out.push_str("]}");
        } else {
            out.push_str("\n  ]}");
        }
    }
    if sorted.frames.is_empty() {
        out.push_str("]}");
    } else {
        out.push_str("\n]}");
    }
    out.push('\n');
    out
}

// ---------------------------------------------------------------------------
// Quantization
// ---------------------------------------------------------------------------

/// Coordinates above this bound cannot be represented exactly; quantization
/// refuses them rather than silently losing precision.
const MAX_QUANT_COORD: f64 = 9_007_199_254_740_992.0; // 2^53

fn round_half_away(x: f64) -> f64 {
    if x >= 0.0 {
        (x + 0.5).floor()
    } else {
        (x - 0.5).ceil()
    }
}

/// Replace every coordinate with `round(c * scale)`, half away from zero.
pub fn quantize(trace: &SceneTrace, spec: QuantSpec) -> Result<SceneTrace, SceneError> {
    if spec.scale < 1 {
        return Err(SceneError::BadScale);
    }
    let mut out = trace.clone();
    for frame in &mut out.frames {
        for d in &mut frame.detections {
            for c in &mut d.pos {
                let scaled = *c * spec.scale as f64;
                let rounded = round_half_away(scaled);
                if !rounded.is_finite() || rounded.abs() > MAX_QUANT_COORD {
                    return Err(SceneError::QuantOverflow { value: scaled });
                }
                *c = rounded;
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Perturbation
// ---------------------------------------------------------------------------

/// Apply seeded Gaussian position jitter and single-frame identity flicker.
///
/// Deterministic for a fixed seed. With `position_sigma == 0` and
/// `flicker_prob == 0` the output equals the input.
pub fn perturb(trace: &SceneTrace, noise: &NoiseSpec) -> SceneTrace {
    let mut out = trace.clone();
    if noise.position_sigma == 0.0 && noise.flicker_prob == 0.0 {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);

    // Flicker pass: pick corrupted (object, frame) pairs first so the
    // position-noise stream does not depend on which frames flicker.
    let mut corrupted: BTreeMap<ObjId, BTreeSet<usize>> = BTreeMap::new();
    if noise.flicker_prob > 0.0 {
        for id in trace.object_ids() {
            let presence = trace.presence(id);
            if presence.len() < 3 {
                continue;
            }
            let mut frames = BTreeSet::new();
            let mut prev_dropped = false;
            // Interior presence frames only: first and last stay intact.
            for &t in &presence[1..presence.len() - 1] {
                let roll: f64 = rand::Rng::random(&mut rng);
                if !prev_dropped && roll < noise.flicker_prob {
                    frames.insert(t);
                    prev_dropped = true;
                } else {
                    prev_dropped = false;
                }
            }
            if !frames.is_empty() {
                corrupted.insert(id, frames);
            }
        }
    }

    // Attribute tuples already taken by real objects; phantoms must differ.
    let vocab = Vocabulary::default();
    let colors: Vec<&String> = vocab.colors.iter().collect();
    let shapes: Vec<&String> = vocab.shapes.iter().collect();
    let materials: Vec<&String> = vocab.materials.iter().collect();
    let mut taken: BTreeSet<(String, String, String)> = BTreeSet::new();
    for f in &trace.frames {
        for d in &f.detections {
            taken.insert((d.color.clone(), d.shape.clone(), d.material.clone()));
        }
    }

    let max_id = trace.object_ids().iter().map(|i| i.0).max().unwrap_or(0);
    let mut next_phantom = max_id + 1000;

    let normal = if noise.position_sigma > 0.0 {
        Some(Normal::new(0.0, noise.position_sigma).expect("sigma >= 0"))
    } else {
        None
    };

    for frame in &mut out.frames {
        let mut phantoms = Vec::new();
        frame.detections.retain_mut(|d| {
            let is_corrupt = corrupted
                .get(&d.id)
                .is_some_and(|frames| frames.contains(&frame.t));
            if let Some(n) = &normal {
                for c in &mut d.pos {
                    *c += n.sample(&mut rng);
                }
            }
            if is_corrupt {
                // Replace with a phantom: fresh id, distinct attribute tuple,
                // same (jittered) position.
                let mut attrs;
                loop {
                    let c = colors[rand::Rng::random_range(&mut rng, 0..colors.len())].clone();
                    let s = shapes[rand::Rng::random_range(&mut rng, 0..shapes.len())].clone();
                    let m =
                        materials[rand::Rng::random_range(&mut rng, 0..materials.len())].clone();
                    attrs = (c, s, m);
                    if !taken.contains(&attrs) {
                        break;
                    }
                }
                phantoms.push(Detection {
                    id: ObjId(next_phantom),
                    color: attrs.0,
                    shape: attrs.1,
                    material: attrs.2,
                    pos: d.pos.clone(),
                    score: d.score,
                });
                next_phantom += 1;
                false
            } else {
                true
            }
        });
        frame.detections.extend(phantoms);
        frame.detections.sort_by_key(|d| d.id);
    }
    out
}

/// Subsample a trace, keeping every `stride`-th frame (starting at 0) and
/// renumbering frames contiguously. Stride 1 returns the trace unchanged.
pub fn stride_trace(trace: &SceneTrace, stride: usize) -> SceneTrace {
    let stride = stride.max(1);
    if stride == 1 {
        return trace.clone();
    }
    let mut out = trace.clone();
    out.frames = trace
        .frames
        .iter()
        .filter(|f| f.t % stride == 0)
        .enumerate()
        .map(|(i, f)| Frame {
            t: i,
            detections: f.detections.clone(),
        })
        .collect();
    out.frame_count = out.frames.len();
    out
}

/// Project a 3D trace down to 2D by dropping the z coordinate.
pub fn project_2d(trace: &SceneTrace) -> SceneTrace {
    let mut out = trace.clone();
    if out.dims == Dims::Two {
        return out;
    }
    out.dims = Dims::Two;
    for f in &mut out.frames {
        for d in &mut f.detections {
            d.pos.truncate(2);
        }
    }
    out
}
