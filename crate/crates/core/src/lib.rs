//! Summarization of time-varying fields.
//!
//! Timesteps where a feature trigger fires are kept verbatim. The quiet
//! timesteps between them are folded into one summary by comparing, sample
//! by sample, how much information each value carries about the other
//! timestep, keeping the more informative value and remembering which
//! timestep it came from.

pub mod error;
pub mod features;
pub mod field;
pub mod fusion;
pub mod infotheory;
pub mod io;
pub mod pipeline;
pub mod probability;
pub mod render;
pub mod synth;

pub use error::{Error, Result};
pub use features::{
    connected_components, evaluate_trigger, segment_threshold, BinaryMask, ComponentSet,
    Connectivity, Polarity, TriggerConfig, TriggerKind, TriggerState,
};
pub use field::{Field, LabelField, Shape, SummaryBundle, TimestepRecord};
pub use fusion::{create_fusion_fields, fuse_run, ConfidenceRule, FusionConfig, RunFuser};
pub use infotheory::{
    information_field, mutual_information, pmi, predictability, ssi, surprise, InformationField,
    MeasureKind, Reference,
};
pub use pipeline::{reduction_stats, run_pipeline, Manifest, ManifestEntry, ReductionStats, Sink};
pub use probability::{build_binning, build_joint, BinningSpec, JointDistribution};
