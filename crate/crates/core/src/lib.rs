//! Near-field beam training for uniform planar arrays through the
//! beam-diverging effect.
//!
//! A UPA driven by the conjugate-phase profile of a point focuses power at
//! that point; driven by the phase profile of a virtual point *behind* the
//! array it spreads power over the projection of its aperture instead — a
//! wide, controllable bright region. This crate builds the geometry, the
//! hierarchical diverging codebooks that exploit the effect for coarse UE
//! localization, the near-field refinement sweep, four benchmark trainers,
//! and seeded Monte Carlo harnesses for accuracy, overhead, and SNR-loss
//! evaluation.

pub mod channel;
pub mod codebook;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod training;
pub mod wavefield;

mod seed;

pub use channel::{MultipathChannel, PathComponent, PilotObservation, SnrMetrics};
pub use codebook::{FrustumIndex, RefinementPlan, RegionKind, ShellIndex};
pub use error::{Error, Result};
pub use experiments::{ExperimentSpec, Method, Preset, ResultTable, UeSampler};
pub use geometry::{ArrayConfig, DirectionTriplet, Point3};
pub use training::{BenchmarkMethod, Identified, PilotOracle, TrainingOutcome};
pub use wavefield::{Axis, Codeword, CodewordLabel};
