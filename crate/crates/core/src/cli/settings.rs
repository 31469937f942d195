//! Resolved run configuration: defaults, then the config file, then flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::GlobalArgs;
use crate::corpus::DEFAULT_TIMEZONE;
use crate::experiments::protocol::{DEFAULT_FOLDS, DEFAULT_TEST_MIN_COMMENTS};
use crate::experiments::synth::PAID_TROLLS_FILE;
use crate::experiments::{ExperimentConfig, SyntheticSpec};
use crate::features::FeatureConfig;
use crate::labeling::{AccusationLexicon, LabelConfig};
use crate::svm::{KernelParams, TrainConfig, DEFAULT_C, DEFAULT_GAMMA, DEFAULT_TOLERANCE};

pub const DEFAULT_OUT: &str = "trollscope-out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub corpus: Option<PathBuf>,
    pub timezone: String,
    /// Keyword file; the built-in lexicon when absent.
    pub lexicon: Option<PathBuf>,
    pub min_mentions: u32,
    pub min_comments: u64,
    pub test_min_comments: u64,
    /// Defaults to `<corpus>/paid_trolls.txt` when that file exists.
    pub paid_trolls: Option<PathBuf>,
    pub c: f64,
    pub gamma: f64,
    pub kkt_tolerance: f64,
    pub folds: usize,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub out: PathBuf,
    pub features: FeatureConfig,
    pub synth: SyntheticSpec,
}

impl Default for Settings {
    fn default() -> Self {
        let label = LabelConfig::default();
        Settings {
            corpus: None,
            timezone: DEFAULT_TIMEZONE.to_string(),
            lexicon: None,
            min_mentions: label.min_mentions,
            min_comments: label.min_comments,
            test_min_comments: DEFAULT_TEST_MIN_COMMENTS,
            paid_trolls: None,
            c: DEFAULT_C,
            gamma: DEFAULT_GAMMA,
            kkt_tolerance: DEFAULT_TOLERANCE,
            folds: DEFAULT_FOLDS,
            seed: label.seed,
            jobs: None,
            out: PathBuf::from(DEFAULT_OUT),
            features: FeatureConfig::default(),
            synth: SyntheticSpec::default(),
        }
    }
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Applies flags over `self` and fills derived defaults.
    pub fn resolve(mut self, flags: &GlobalArgs) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = &flags.$f { self.$f = v.clone().into(); } )* };
        }
        take!(corpus, lexicon, paid_trolls, jobs);
        take!(timezone, min_mentions, min_comments, test_min_comments, c, gamma, folds, seed, out);
        if self.paid_trolls.is_none() {
            if let Some(dir) = &self.corpus {
                let p = dir.join(PAID_TROLLS_FILE);
                if p.is_file() {
                    self.paid_trolls = Some(p);
                }
            }
        }
        self.synth.seed = self.seed;
        self.synth.timezone = self.timezone.clone();
        self
    }

    pub fn corpus_dir(&self) -> Option<&Path> {
        self.corpus.as_deref()
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            c: self.c,
            kernel: KernelParams { gamma: self.gamma },
            kkt_tolerance: self.kkt_tolerance,
            max_passes: None,
            seed: self.seed,
        }
    }

    pub fn experiment_config(&self, paid_troll_ids: Vec<String>) -> crate::error::Result<ExperimentConfig> {
        let lexicon = match &self.lexicon {
            Some(p) => AccusationLexicon::from_file(p)?,
            None => AccusationLexicon::default(),
        };
        Ok(ExperimentConfig {
            lexicon,
            label: LabelConfig {
                min_mentions: self.min_mentions,
                min_comments: self.min_comments,
                paid_troll_ids,
                seed: self.seed,
            },
            features: self.features.clone(),
            train: self.train_config(),
            test_min_comments: self.test_min_comments,
            folds: self.folds,
        })
    }
}
