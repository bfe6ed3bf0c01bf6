//! Planning and evaluation stack for block re-configuration problems.
//!
//! The pipeline has three stages: a symbolic planner enumerates timestamped
//! Grasp/Place/Fix sequences over a support-graph abstraction of the scene,
//! a geometric solver compiles each plan into joint-space keyframes for a
//! two-arm robot, and a rigid-body stability check filters plans whose
//! intermediate configurations collapse. Scored solution sets feed a softmax
//! choice model that predicts whether a solver uses one hand or two, with
//! lesioned variants for attribution studies.

pub mod behavior;
pub mod choice;
pub mod config;
pub mod export;
pub mod geom;
pub mod pipeline;
pub mod plan;
pub mod scene;
pub mod stability;
pub mod stats;

pub use config::Config;
