//! A hybrid spatio-temporal event reasoner over object-trace videos.
//!
//! The crate turns per-frame object detections into a symbolic fact base,
//! evaluates a locally-stratified logic program built from event-calculus
//! axioms, physics background rules and event-detection rules, and answers
//! template questions about the physical events (entry, exit, move, stop,
//! collision) in the scene. A deterministic kinematic simulator and a
//! brute-force oracle make every claim checkable without any video data.

pub mod calib;
pub mod engine;
pub mod events;
pub mod facts;
pub mod logic;
pub mod physics;
pub mod pipeline;
pub mod query;
pub mod report;
pub mod rules;
pub mod scene;
pub mod sim;

pub use events::Variant;
pub use physics::Thresholds;
pub use scene::{Dims, SceneTrace};
