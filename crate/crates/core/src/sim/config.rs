//! Simulator scene configuration.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::{Dims, ObjId};

fn default_true() -> bool {
    true
}

fn default_radius() -> f64 {
    1.0
}

/// One scripted object: attributes, spawn state, and boundary behavior.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ObjectSpec {
    pub id: i64,
    pub color: String,
    pub shape: String,
    pub material: String,
    #[serde(default = "default_radius")]
    pub radius: f64,
    pub spawn_frame: usize,
    /// Position at the spawn frame (length = dims).
    pub spawn_pos: Vec<f64>,
    /// Velocity per frame (length = dims).
    pub velocity: Vec<f64>,
    /// Leave the scene when crossing the arena bounds; bounce otherwise.
    #[serde(default = "default_true")]
    pub exits: bool,
}

/// Axis-aligned arena bounds in the x/y plane.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct Arena {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Arena {
    pub fn contains(&self, p: &[f64]) -> bool {
        p[0] >= self.min[0] && p[0] <= self.max[0] && p[1] >= self.min[1] && p[1] <= self.max[1]
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }
}

/// A complete deterministic scene description.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SimConfig {
    pub video_id: String,
    pub dims: u8,
    pub frame_count: usize,
    pub arena: Arena,
    pub objects: Vec<ObjectSpec>,
    /// Per-frame velocity decay: v *= (1 - friction).
    pub friction: f64,
    /// Collision restitution in [0, 1]; 1 is perfectly elastic.
    pub restitution: f64,
    /// Objects slower than this snap to rest.
    pub rest_speed: f64,
    /// Quantization scale the reasoner is expected to use.
    pub scale: u32,
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("objects {a} and {b} overlap at spawn (frame {t})")]
    OverlapAtSpawn { a: ObjId, b: ObjId, t: usize },
    #[error("objects {a} and {b} share the attribute tuple {attrs}")]
    DuplicateAttributes { a: ObjId, b: ObjId, attrs: String },
    #[error("object {id}: spawn frame {frame} is not before frame_count {n}")]
    BadSpawnFrame { id: ObjId, frame: usize, n: usize },
    #[error("object {id}: expected {dims}-vector for {field}, found {found} components")]
    BadVector {
        id: ObjId,
        dims: usize,
        field: &'static str,
        found: usize,
    },
    #[error("duplicate object id {0}")]
    DuplicateId(ObjId),
    #[error("unknown object {0}")]
    UnknownObject(ObjId),
    #[error("invalid config: {0}")]
    BadConfig(String),
}

impl SimConfig {
    pub fn dims_enum(&self) -> Result<Dims, SimError> {
        Dims::from_arity(self.dims)
            .ok_or_else(|| SimError::BadConfig(format!("dims must be 2 or 3, found {}", self.dims)))
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let dims = self.dims_enum()?.arity();
        if self.frame_count == 0 {
            return Err(SimError::BadConfig("frame_count must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.friction) {
            return Err(SimError::BadConfig("friction must be in [0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&self.restitution) {
            return Err(SimError::BadConfig("restitution must be in [0, 1]".into()));
        }
        let mut ids = std::collections::BTreeSet::new();
        for o in &self.objects {
            if !ids.insert(o.id) {
                return Err(SimError::DuplicateId(ObjId(o.id)));
            }
            if o.spawn_frame >= self.frame_count {
                return Err(SimError::BadSpawnFrame {
                    id: ObjId(o.id),
                    frame: o.spawn_frame,
                    n: self.frame_count,
                });
            }
            if o.spawn_pos.len() != dims {
                return Err(SimError::BadVector {
                    id: ObjId(o.id),
                    dims,
                    field: "spawn_pos",
                    found: o.spawn_pos.len(),
                });
            }
            if o.velocity.len() != dims {
                return Err(SimError::BadVector {
                    id: ObjId(o.id),
                    dims,
                    field: "velocity",
                    found: o.velocity.len(),
                });
            }
        }
        for (i, a) in self.objects.iter().enumerate() {
            for b in &self.objects[i + 1..] {
                if a.color == b.color && a.shape == b.shape && a.material == b.material {
                    return Err(SimError::DuplicateAttributes {
                        a: ObjId(a.id),
                        b: ObjId(b.id),
                        attrs: format!("({}, {}, {})", a.color, a.shape, a.material),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn object(&self, id: ObjId) -> Option<&ObjectSpec> {
        self.objects.iter().find(|o| o.id == id.0)
    }
}
