//! Evaluation protocol, ablations, sweeps, profiles and synthetic data.

pub mod metrics;
pub mod profile;
pub mod protocol;
pub mod report;
pub mod synth;

#[cfg(test)]
mod tests;

pub use metrics::{compute_metrics, MeanMetrics, Metrics};
pub use profile::{aggregate_profiles, GroupProfile, GroupStats, PROFILE_STATISTICS};
pub use protocol::{
    run_ablation_suite, run_paid_troll_eval, sweep_min_comments, sweep_min_mentions, AblationMode,
    AblationRow, AblationSpec, CommentsSweepPoint, EvalMode, ExperimentConfig, ExperimentReport,
    FeatureTable, MentionsSweepRow, Protocol, TestSet, FEATURE_SET_KEY,
};
pub use synth::{generate_synthetic, Archetype, ArchetypeParams, SyntheticCorpus, SyntheticSpec};
