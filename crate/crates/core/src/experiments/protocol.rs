//! Train on "mentioned" trolls vs. non-trolls, test on known paid trolls.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::metrics::{compute_metrics, MeanMetrics, Metrics};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::features::{FeatureConfig, FeatureContext, FeatureGroup, FeatureManifest};
use crate::labeling::{
    assign_labels, build_training_pair, detect_accusations, mention_counts, AccusationLexicon,
    LabelConfig, LabeledDataset, TrainingPair,
};
use crate::svm::{cross_validate, train, SvmModel, TrainConfig};
use crate::textsim::Vocabulary;

pub const DEFAULT_TEST_MIN_COMMENTS: u64 = 100;
pub const DEFAULT_FOLDS: usize = 5;
/// Model metadata key naming the feature set a model was trained on.
pub const FEATURE_SET_KEY: &str = "feature_set";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub lexicon: AccusationLexicon,
    pub label: LabelConfig,
    pub features: FeatureConfig,
    pub train: TrainConfig,
    /// Paid trolls need at least this many comments to enter the test set.
    pub test_min_comments: u64,
    pub folds: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            lexicon: AccusationLexicon::default(),
            label: LabelConfig::default(),
            features: FeatureConfig::default(),
            train: TrainConfig::default(),
            test_min_comments: DEFAULT_TEST_MIN_COMMENTS,
            folds: DEFAULT_FOLDS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationMode {
    AllScaled,
    AllScaledMinusGroup,
    OnlyGroup,
    AllScaledPlusNonScaled,
    AllNonScaled,
}

impl AblationMode {
    pub fn name(self) -> &'static str {
        match self {
            AblationMode::AllScaled => "all_scaled",
            AblationMode::AllScaledMinusGroup => "all_scaled_minus_group",
            AblationMode::OnlyGroup => "only_group",
            AblationMode::AllScaledPlusNonScaled => "all_scaled_plus_nonscaled",
            AblationMode::AllNonScaled => "all_nonscaled",
        }
    }
}

/// Which manifest columns a model sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AblationSpec {
    mode: AblationMode,
    group: Option<FeatureGroup>,
}

impl AblationSpec {
    pub fn all_scaled() -> Self {
        AblationSpec { mode: AblationMode::AllScaled, group: None }
    }

    /// `group` must be one of the scaled groups.
    pub fn minus(group: FeatureGroup) -> Result<Self> {
        Self::with_group(AblationMode::AllScaledMinusGroup, group)
    }

    pub fn only(group: FeatureGroup) -> Result<Self> {
        Self::with_group(AblationMode::OnlyGroup, group)
    }

    pub fn plus_non_scaled() -> Self {
        AblationSpec { mode: AblationMode::AllScaledPlusNonScaled, group: None }
    }

    pub fn all_non_scaled() -> Self {
        AblationSpec { mode: AblationMode::AllNonScaled, group: None }
    }

    fn with_group(mode: AblationMode, group: FeatureGroup) -> Result<Self> {
        if group == FeatureGroup::NonScaled {
            return Err(Error::InvalidConfig(format!(
                "{} needs a scaled feature group",
                mode.name()
            )));
        }
        Ok(AblationSpec { mode, group: Some(group) })
    }

    pub fn mode(&self) -> AblationMode {
        self.mode
    }

    pub fn group(&self) -> Option<FeatureGroup> {
        self.group
    }

    /// Every row of the ablation tables, in report order before sorting.
    pub fn suite() -> Vec<AblationSpec> {
        let scaled = FeatureGroup::scaled();
        let mut v = vec![Self::all_scaled()];
        v.extend(scaled.iter().map(|&g| AblationSpec {
            mode: AblationMode::AllScaledMinusGroup,
            group: Some(g),
        }));
        v.extend(scaled.iter().map(|&g| AblationSpec {
            mode: AblationMode::OnlyGroup,
            group: Some(g),
        }));
        v.push(Self::plus_non_scaled());
        v.push(Self::all_non_scaled());
        v
    }

    /// Human-readable row label.
    pub fn label(&self) -> String {
        match (self.mode, self.group) {
            (AblationMode::AllScaled, _) => "All Scaled (AS)".into(),
            (AblationMode::AllScaledMinusGroup, Some(g)) => format!("AS - {} (S)", g.label()),
            (AblationMode::OnlyGroup, Some(g)) => format!("only {} (S)", g.label()),
            (AblationMode::AllScaledPlusNonScaled, _) => "AS + Non Scaled (NS)".into(),
            (AblationMode::AllNonScaled, _) => "All Unscaled".into(),
            (_, None) => unreachable!("group modes always carry a group"),
        }
    }

    /// Manifest columns selected by group tags.
    pub fn columns(&self, manifest: &FeatureManifest) -> Result<Vec<usize>> {
        let cols = manifest.select(|s| match (self.mode, self.group) {
            (AblationMode::AllScaled, _) => s.scaled,
            (AblationMode::AllScaledMinusGroup, Some(g)) => s.scaled && s.group != g,
            (AblationMode::OnlyGroup, Some(g)) => s.scaled && s.group == g,
            (AblationMode::AllScaledPlusNonScaled, _) => true,
            (AblationMode::AllNonScaled, _) => !s.scaled,
            (_, None) => false,
        });
        if cols.is_empty() {
            return Err(Error::EmptyFeatureSubset(self.to_string()));
        }
        Ok(cols)
    }
}

/// `all_scaled`, `minus:<group>`, `only:<group>`, `plus_non_scaled`,
/// `all_non_scaled`.
impl fmt::Display for AblationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.mode, self.group) {
            (AblationMode::AllScaled, _) => f.write_str("all_scaled"),
            (AblationMode::AllScaledMinusGroup, Some(g)) => write!(f, "minus:{}", g.name()),
            (AblationMode::OnlyGroup, Some(g)) => write!(f, "only:{}", g.name()),
            (AblationMode::AllScaledPlusNonScaled, _) => f.write_str("plus_non_scaled"),
            (AblationMode::AllNonScaled, _) => f.write_str("all_non_scaled"),
            (_, None) => unreachable!("group modes always carry a group"),
        }
    }
}

impl FromStr for AblationSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all_scaled" => return Ok(Self::all_scaled()),
            "plus_non_scaled" => return Ok(Self::plus_non_scaled()),
            "all_non_scaled" => return Ok(Self::all_non_scaled()),
            _ => {}
        }
        match s.split_once(':') {
            Some(("minus", g)) => Self::minus(g.parse()?),
            Some(("only", g)) => Self::only(g.parse()?),
            _ => Err(Error::InvalidConfig(format!("unknown feature set {s:?}"))),
        }
    }
}

/// Feature rows for a set of users, keyed by user id.
#[derive(Debug, Clone)]
pub struct FeatureTable {
    pub manifest: FeatureManifest,
    pub rows: BTreeMap<String, Vec<f64>>,
}

impl FeatureTable {
    pub fn build<'s>(
        corpus: &Corpus,
        config: &FeatureConfig,
        user_ids: impl IntoIterator<Item = &'s String>,
    ) -> Result<Self> {
        let vocabulary = Vocabulary::fit_corpus(corpus)?;
        let ctx = FeatureContext::new(corpus, &vocabulary, config.clone())?;
        let ids: Vec<String> = user_ids.into_iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let vectors = ctx.assemble_many(&ids)?;
        Ok(FeatureTable {
            manifest: ctx.manifest().clone(),
            rows: vectors.into_iter().map(|v| (v.user_id, v.values)).collect(),
        })
    }

    pub fn matrix(&self, ids: &[String], columns: &[usize]) -> Result<Vec<Vec<f64>>> {
        ids.iter()
            .map(|id| {
                let row = self
                    .rows
                    .get(id)
                    .ok_or_else(|| Error::UnknownUser(id.clone()))?;
                Ok(columns.iter().map(|&c| row[c]).collect())
            })
            .collect()
    }
}

/// Labels, training pair and mention counts for one labeling configuration.
#[derive(Debug, Clone)]
pub struct Protocol<'a> {
    corpus: &'a Corpus,
    config: ExperimentConfig,
    counts: BTreeMap<String, u32>,
    dataset: LabeledDataset,
    pair: TrainingPair,
}

/// Users and gold labels of a test set.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TestSet {
    pub paid_trolls: Vec<String>,
    pub non_trolls: Vec<String>,
}

impl TestSet {
    pub fn len(&self) -> usize {
        self.paid_trolls.len() + self.non_trolls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Paid trolls first (label 1), then non-trolls (label -1).
    pub fn ids_and_labels(&self) -> (Vec<String>, Vec<i8>) {
        let ids = self.paid_trolls.iter().chain(&self.non_trolls).cloned().collect();
        let labels = std::iter::repeat_n(1, self.paid_trolls.len())
            .chain(std::iter::repeat_n(-1, self.non_trolls.len()))
            .collect();
        (ids, labels)
    }
}

impl<'a> Protocol<'a> {
    pub fn new(corpus: &'a Corpus, config: &ExperimentConfig) -> Result<Self> {
        let accusations = detect_accusations(corpus, &config.lexicon);
        let counts = mention_counts(&accusations);
        let dataset = assign_labels(corpus, &counts, &config.label)?;
        let (pair, _) = build_training_pair(&dataset, &config.label)?;
        Ok(Protocol {
            corpus,
            config: config.clone(),
            counts,
            dataset,
            pair,
        })
    }

    pub fn dataset(&self) -> &LabeledDataset {
        &self.dataset
    }

    pub fn pair(&self) -> &TrainingPair {
        &self.pair
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn training_set(&self) -> (Vec<String>, Vec<i8>) {
        let ids = self.pair.trolls.iter().chain(&self.pair.non_trolls).cloned().collect();
        let labels = std::iter::repeat_n(1, self.pair.trolls.len())
            .chain(std::iter::repeat_n(-1, self.pair.non_trolls.len()))
            .collect();
        (ids, labels)
    }

    fn comments_of(&self, id: &str) -> u64 {
        self.corpus
            .user_idx(id)
            .map_or(0, |u| self.corpus.comments_of(u).len() as u64)
    }

    /// Paid trolls with at least `min_comments` comments, and as many of the
    /// most active never-accused users outside the training set. The paid
    /// list may come back empty.
    pub fn test_set(&self, min_comments: u64) -> Result<TestSet> {
        let paid: BTreeSet<&str> = self.config.label.paid_troll_ids.iter().map(String::as_str).collect();
        let paid_trolls: Vec<String> = paid
            .iter()
            .filter(|id| self.corpus.has_user(id) && self.comments_of(id) >= min_comments.max(1))
            .map(|s| s.to_string())
            .collect();
        let training: BTreeSet<&str> = self.pair.non_trolls.iter().map(String::as_str).collect();
        let mut candidates: Vec<(u64, &str)> = self
            .corpus
            .users()
            .iter()
            .map(|u| u.id.as_str())
            .filter(|id| {
                !paid.contains(id)
                    && !training.contains(id)
                    && !self.counts.contains_key(*id)
                    && !self.pair.trolls.iter().any(|t| t == id)
            })
            .map(|id| (self.comments_of(id), id))
            .filter(|(n, _)| *n > 0)
            .collect();
        candidates.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(b.1)));
        if candidates.len() < paid_trolls.len() {
            return Err(Error::InsufficientNonTrolls {
                needed: paid_trolls.len(),
                available: candidates.len(),
            });
        }
        Ok(TestSet {
            non_trolls: candidates[..paid_trolls.len()]
                .iter()
                .map(|(_, id)| id.to_string())
                .collect(),
            paid_trolls,
        })
    }

    /// Feature table covering the training pair and the given test sets.
    pub fn feature_table<'t>(&self, tests: impl IntoIterator<Item = &'t TestSet>) -> Result<FeatureTable> {
        let mut ids: BTreeSet<String> = self.pair.trolls.iter().chain(&self.pair.non_trolls).cloned().collect();
        for t in tests {
            ids.extend(t.paid_trolls.iter().cloned());
            ids.extend(t.non_trolls.iter().cloned());
        }
        FeatureTable::build(self.corpus, &self.config.features, &ids)
    }

    /// Paid-troll test set at the configured threshold; errors when no paid
    /// troll qualifies.
    pub fn paid_test_set(&self) -> Result<TestSet> {
        let min = self.config.test_min_comments;
        let test = self.test_set(min)?;
        if test.paid_trolls.is_empty() {
            return Err(Error::NoEligiblePaidTrolls(min as usize));
        }
        Ok(test)
    }

    /// Trains on the pair with `ablation`'s columns. The model carries the
    /// full manifest fingerprint and the feature set in its metadata.
    pub fn train_model(&self, table: &FeatureTable, ablation: AblationSpec) -> Result<SvmModel> {
        let columns = ablation.columns(&table.manifest)?;
        let (ids, labels) = self.training_set();
        let mut model = train(&table.matrix(&ids, &columns)?, &labels, &self.config.train)?
            .with_fingerprint(table.manifest.fingerprint());
        let meta = [
            (FEATURE_SET_KEY, ablation.to_string()),
            ("train_trolls", self.pair.trolls.len().to_string()),
            ("train_non_trolls", self.pair.non_trolls.len().to_string()),
            ("min_mentions", self.config.label.min_mentions.to_string()),
            ("min_comments", self.config.label.min_comments.to_string()),
        ];
        model.metadata.extend(meta.map(|(k, v)| (k.to_string(), v)));
        Ok(model)
    }

    /// Trains on the pair with `ablation`'s columns and scores `test`.
    pub fn evaluate(&self, table: &FeatureTable, ablation: AblationSpec, test: &TestSet) -> Result<Metrics> {
        let columns = ablation.columns(&table.manifest)?;
        let model = self.train_model(table, ablation)?;
        let (test_ids, gold) = test.ids_and_labels();
        let predicted: Vec<i8> = model
            .predict_many(&table.matrix(&test_ids, &columns)?)?
            .iter()
            .map(|p| p.label)
            .collect();
        compute_metrics(&predicted, &gold, 1)
    }

    /// Cross-validation on the training pair alone.
    pub fn cross_validate(&self, table: &FeatureTable, ablation: AblationSpec) -> Result<MeanMetrics> {
        let columns = ablation.columns(&table.manifest)?;
        let (ids, labels) = self.training_set();
        Ok(cross_validate(&table.matrix(&ids, &columns)?, &labels, &self.config.train, self.config.folds)?.mean)
    }
}

pub fn run_paid_troll_eval(corpus: &Corpus, config: &ExperimentConfig, ablation: AblationSpec) -> Result<Metrics> {
    let protocol = Protocol::new(corpus, config)?;
    let test = protocol.paid_test_set()?;
    let table = protocol.feature_table([&test])?;
    protocol.evaluate(&table, ablation, &test)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub feature_set: String,
    pub mode: AblationMode,
    pub group: Option<&'static str>,
    pub label: String,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub train_trolls: usize,
    pub train_non_trolls: usize,
    pub test: TestSet,
    pub rows: Vec<AblationRow>,
}

/// All ablation rows; within each mode rows are ordered by F-score,
/// highest first, keeping suite order among equal scores.
pub fn run_ablation_suite(corpus: &Corpus, config: &ExperimentConfig) -> Result<ExperimentReport> {
    let protocol = Protocol::new(corpus, config)?;
    let test = protocol.paid_test_set()?;
    let table = protocol.feature_table([&test])?;
    let mut rows = AblationSpec::suite()
        .into_par_iter()
        .map(|spec| {
            Ok(AblationRow {
                feature_set: spec.to_string(),
                mode: spec.mode(),
                group: spec.group().map(FeatureGroup::name),
                label: spec.label(),
                metrics: protocol.evaluate(&table, spec, &test)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.mode.cmp(&b.mode).then(b.metrics.f_score.total_cmp(&a.metrics.f_score)));
    Ok(ExperimentReport {
        train_trolls: protocol.pair.trolls.len(),
        train_non_trolls: protocol.pair.non_trolls.len(),
        test,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommentsSweepPoint {
    pub min_comments: u64,
    pub paid_trolls: usize,
    pub n_test: usize,
    /// `None` when no paid troll reaches the threshold.
    pub metrics: Option<Metrics>,
}

/// Test-set threshold sweep with an all-scaled model trained once.
pub fn sweep_min_comments(
    corpus: &Corpus,
    config: &ExperimentConfig,
    thresholds: &[u64],
) -> Result<Vec<CommentsSweepPoint>> {
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("thresholds must be strictly increasing".into()));
    }
    let protocol = Protocol::new(corpus, config)?;
    let tests = thresholds
        .iter()
        .map(|&t| protocol.test_set(t))
        .collect::<Result<Vec<_>>>()?;
    let table = protocol.feature_table(&tests)?;
    let ablation = AblationSpec::all_scaled();
    let columns = ablation.columns(&table.manifest)?;
    let (train_ids, train_labels) = protocol.training_set();
    let model = train(&table.matrix(&train_ids, &columns)?, &train_labels, &config.train)?;
    thresholds
        .iter()
        .zip(tests)
        .map(|(&t, test)| {
            let metrics = if test.paid_trolls.is_empty() {
                None
            } else {
                let (ids, gold) = test.ids_and_labels();
                let predicted: Vec<i8> = model
                    .predict_many(&table.matrix(&ids, &columns)?)?
                    .iter()
                    .map(|p| p.label)
                    .collect();
                Some(compute_metrics(&predicted, &gold, 1)?)
            };
            Ok(CommentsSweepPoint {
                min_comments: t,
                paid_trolls: test.paid_trolls.len(),
                n_test: test.len(),
                metrics,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    PaidTest,
    CrossValidation,
}

impl FromStr for EvalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paid_test" | "paid-test" => Ok(EvalMode::PaidTest),
            "cross_validation" | "cross-validation" | "cv" => Ok(EvalMode::CrossValidation),
            _ => Err(Error::InvalidConfig(format!("unknown evaluation mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MentionsSweepRow {
    pub min_mentions: u32,
    pub trolls: usize,
    pub non_trolls: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

/// Relabels the corpus at each minimum-mentions value and evaluates an
/// all-scaled model either on paid trolls or by cross-validation.
pub fn sweep_min_mentions(
    corpus: &Corpus,
    config: &ExperimentConfig,
    mention_values: &[u32],
    mode: EvalMode,
) -> Result<Vec<MentionsSweepRow>> {
    if mention_values.is_empty() {
        return Err(Error::InvalidConfig("no min-mentions values given".into()));
    }
    mention_values
        .par_iter()
        .map(|&m| {
            let mut cfg = config.clone();
            cfg.label.min_mentions = m;
            let protocol = Protocol::new(corpus, &cfg)?;
            let ablation = AblationSpec::all_scaled();
            let (accuracy, precision, recall, f_score) = match mode {
                EvalMode::PaidTest => {
                    let test = protocol.paid_test_set()?;
                    let table = protocol.feature_table([&test])?;
                    let r = protocol.evaluate(&table, ablation, &test)?;
                    (r.accuracy, r.precision, r.recall, r.f_score)
                }
                EvalMode::CrossValidation => {
                    let table = protocol.feature_table([])?;
                    let r = protocol.cross_validate(&table, ablation)?;
                    (r.accuracy, r.precision, r.recall, r.f_score)
                }
            };
            Ok(MentionsSweepRow {
                min_mentions: m,
                trolls: protocol.pair.trolls.len(),
                non_trolls: protocol.pair.non_trolls.len(),
                accuracy,
                precision,
                recall,
                f_score,
            })
        })
        .collect()
}
