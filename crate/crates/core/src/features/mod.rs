//! Per-user behavioral features.
//!
//! Every raw statistic is computed once per user and then emitted several
//! times: divided by each applicable activity denominator (the scaled
//! features), and as-is under [`FeatureGroup::NonScaled`]. The resulting
//! column layout is described by a [`FeatureManifest`], which depends only on
//! the [`FeatureConfig`].

mod extract;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use extract::{FeatureContext, NamedValue, StatKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    VoteUpdownAll,
    VoteUpdownTotal,
    VoteUpdownReplyStatus,
    VoteUpdownIsReply,
    CommentOrder,
    IsReply,
    IsReplyToHasReply,
    TriggeredRepliesTotal,
    TriggeredRepliesRange,
    Similarity,
    SimilarityTop,
    TopLovedHated,
    TotalComments,
    Time,
    TimeHours,
    TimeDayOfWeek,
    NonScaled,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 17] = [
        FeatureGroup::VoteUpdownAll,
        FeatureGroup::VoteUpdownTotal,
        FeatureGroup::VoteUpdownReplyStatus,
        FeatureGroup::VoteUpdownIsReply,
        FeatureGroup::CommentOrder,
        FeatureGroup::IsReply,
        FeatureGroup::IsReplyToHasReply,
        FeatureGroup::TriggeredRepliesTotal,
        FeatureGroup::TriggeredRepliesRange,
        FeatureGroup::Similarity,
        FeatureGroup::SimilarityTop,
        FeatureGroup::TopLovedHated,
        FeatureGroup::TotalComments,
        FeatureGroup::Time,
        FeatureGroup::TimeHours,
        FeatureGroup::TimeDayOfWeek,
        FeatureGroup::NonScaled,
    ];

    /// Groups of scaled features, i.e. everything except `NonScaled`.
    pub fn scaled() -> &'static [FeatureGroup] {
        &Self::ALL[..16]
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::VoteUpdownAll => "vote_updown_all",
            FeatureGroup::VoteUpdownTotal => "vote_updown_total",
            FeatureGroup::VoteUpdownReplyStatus => "vote_updown_reply_status",
            FeatureGroup::VoteUpdownIsReply => "vote_updown_is_reply",
            FeatureGroup::CommentOrder => "comment_order",
            FeatureGroup::IsReply => "is_reply",
            FeatureGroup::IsReplyToHasReply => "is_reply_to_has_reply",
            FeatureGroup::TriggeredRepliesTotal => "triggered_replies_total",
            FeatureGroup::TriggeredRepliesRange => "triggered_replies_range",
            FeatureGroup::Similarity => "similarity",
            FeatureGroup::SimilarityTop => "similarity_top",
            FeatureGroup::TopLovedHated => "top_loved_hated",
            FeatureGroup::TotalComments => "total_comments",
            FeatureGroup::Time => "time",
            FeatureGroup::TimeHours => "time_hours",
            FeatureGroup::TimeDayOfWeek => "time_day_of_week",
            FeatureGroup::NonScaled => "non_scaled",
        }
    }

    /// Row label used in ablation reports.
    pub fn label(self) -> &'static str {
        match self {
            FeatureGroup::VoteUpdownAll => "vote up/down all",
            FeatureGroup::VoteUpdownTotal => "vote updown total",
            FeatureGroup::VoteUpdownReplyStatus => "vote up/down reply status",
            FeatureGroup::VoteUpdownIsReply => "vote updown is reply",
            FeatureGroup::CommentOrder => "comment order",
            FeatureGroup::IsReply => "is reply",
            FeatureGroup::IsReplyToHasReply => "is reply to has reply",
            FeatureGroup::TriggeredRepliesTotal => "triggered replies total",
            FeatureGroup::TriggeredRepliesRange => "triggered replies range",
            FeatureGroup::Similarity => "similarity",
            FeatureGroup::SimilarityTop => "similarity top",
            FeatureGroup::TopLovedHated => "top loved hated",
            FeatureGroup::TotalComments => "total comments",
            FeatureGroup::Time => "time",
            FeatureGroup::TimeHours => "time hours",
            FeatureGroup::TimeDayOfWeek => "day of week",
            FeatureGroup::NonScaled => "non scaled",
        }
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown feature group {s:?}")))
    }
}

/// Activity statistic a raw count can be divided by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Denominator {
    Comments,
    DaysInForum,
    ActiveDays,
    MultiCommentDays,
    Publications,
}

impl Denominator {
    pub const ALL: [Denominator; 5] = [
        Denominator::Comments,
        Denominator::DaysInForum,
        Denominator::ActiveDays,
        Denominator::MultiCommentDays,
        Denominator::Publications,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Denominator::Comments => "comments",
            Denominator::DaysInForum => "days_in_forum",
            Denominator::ActiveDays => "active_days",
            Denominator::MultiCommentDays => "multi_comment_days",
            Denominator::Publications => "publications",
        }
    }
}

/// Scaling bases for one user.
///
/// `multi_comment_days` is floored at 1 so that users without any
/// multi-comment day still get finite features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScalingDenominators {
    pub total_comments: u64,
    pub days_in_forum: u64,
    pub active_days: u64,
    pub multi_comment_days: u64,
    pub publications_commented: u64,
}

impl ScalingDenominators {
    pub fn from_stats(s: &crate::corpus::UserActivityStats) -> Self {
        ScalingDenominators {
            total_comments: s.total_comments,
            days_in_forum: s.days_in_forum,
            active_days: s.active_days,
            multi_comment_days: s.multi_comment_days.max(1),
            publications_commented: s.publications_commented,
        }
    }

    pub fn get(&self, d: Denominator) -> u64 {
        match d {
            Denominator::Comments => self.total_comments,
            Denominator::DaysInForum => self.days_in_forum,
            Denominator::ActiveDays => self.active_days,
            Denominator::MultiCommentDays => self.multi_comment_days,
            Denominator::Publications => self.publications_commented,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub order_ks: Vec<usize>,
    pub top_ks: Vec<usize>,
    pub ratio_thresholds: Vec<f64>,
    /// Local working hours `[start, end)`.
    pub work_hours: (u32, u32),
    pub similarity_cuts: Vec<f64>,
    /// Thread rank below which a comment counts as "top" for similarity_top.
    pub similarity_top_k: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            order_ks: vec![1, 3, 5, 10],
            top_ks: vec![1, 3, 5, 10],
            ratio_thresholds: vec![0.25, 0.50, 1.0, 2.0],
            work_hours: (9, 18),
            similarity_cuts: vec![0.1, 0.3, 0.5],
            similarity_top_k: 10,
        }
    }
}

fn strictly_increasing<T: PartialOrd>(v: &[T]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.order_ks.is_empty() || self.order_ks[0] == 0 || !strictly_increasing(&self.order_ks) {
            return bad("order_ks must be positive and strictly increasing");
        }
        if self.top_ks.is_empty() || self.top_ks[0] == 0 || !strictly_increasing(&self.top_ks) {
            return bad("top_ks must be positive and strictly increasing");
        }
        if self.ratio_thresholds.iter().any(|r| !r.is_finite() || *r <= 0.0)
            || !strictly_increasing(&self.ratio_thresholds)
        {
            return bad("ratio_thresholds must be positive and strictly increasing");
        }
        if self.similarity_cuts.iter().any(|c| !c.is_finite())
            || !strictly_increasing(&self.similarity_cuts)
        {
            return bad("similarity_cuts must be strictly increasing");
        }
        let (s, e) = self.work_hours;
        if s >= e || e > 24 {
            return bad("work_hours must satisfy start < end <= 24");
        }
        if self.similarity_top_k == 0 {
            return bad("similarity_top_k must be >= 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureSpec {
    /// `group:stat/denominator` for scaled counts, `group:stat` for
    /// intensive values, `non_scaled:group.stat` for raw counts.
    pub name: String,
    pub group: FeatureGroup,
    pub scaled: bool,
    pub denominator: Option<Denominator>,
    /// Position of the underlying raw statistic.
    pub stat: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureManifest {
    specs: Vec<FeatureSpec>,
}

impl FeatureManifest {
    pub(crate) fn from_stats(stats: &[NamedValue]) -> Self {
        let mut scaled = Vec::new();
        let mut raw = Vec::new();
        for (i, s) in stats.iter().enumerate() {
            let base = format!("{}:{}", s.group.name(), s.name);
            match s.kind {
                StatKind::Intensive => scaled.push(FeatureSpec {
                    name: base,
                    group: s.group,
                    scaled: true,
                    denominator: None,
                    stat: i,
                }),
                StatKind::Count | StatKind::Days(_) => {
                    for d in s.kind.denominators(&s.name) {
                        scaled.push(FeatureSpec {
                            name: format!("{base}/{}", d.name()),
                            group: s.group,
                            scaled: true,
                            denominator: Some(d),
                            stat: i,
                        });
                    }
                    raw.push(FeatureSpec {
                        name: format!("{}:{}.{}", FeatureGroup::NonScaled.name(), s.group.name(), s.name),
                        group: FeatureGroup::NonScaled,
                        scaled: false,
                        denominator: None,
                        stat: i,
                    });
                }
            }
        }
        scaled.extend(raw);
        FeatureManifest { specs: scaled }
    }

    pub fn specs(&self) -> &[FeatureSpec] {
        &self.specs
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.specs.iter().map(|s| s.name.as_str())
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.specs.iter().position(|s| s.name == name)
    }

    /// Column indices whose spec satisfies `pred`, in manifest order.
    pub fn select(&self, pred: impl Fn(&FeatureSpec) -> bool) -> Vec<usize> {
        (0..self.specs.len()).filter(|&i| pred(&self.specs[i])).collect()
    }

    pub fn subset(&self, columns: &[usize]) -> FeatureManifest {
        FeatureManifest {
            specs: columns.iter().map(|&c| self.specs[c].clone()).collect(),
        }
    }

    /// Sidecar CSV: `name,group,scaled,denominator`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let _ = w.write_record(["name", "group", "scaled", "denominator"]);
        for s in &self.specs {
            let _ = w.write_record([
                s.name.as_str(),
                s.group.name(),
                if s.scaled { "true" } else { "false" },
                s.denominator.map_or("none", Denominator::name),
            ]);
        }
        String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
    }

    /// SHA-256 of the sidecar CSV, hex encoded.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_csv().as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub user_id: String,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn get(&self, manifest: &FeatureManifest, name: &str) -> Option<f64> {
        manifest.position(name).map(|i| self.values[i])
    }

    pub fn select(&self, columns: &[usize]) -> Vec<f64> {
        columns.iter().map(|&c| self.values[c]).collect()
    }
}

/// Feature matrix CSV: header `user_id,<manifest names>`, one row per user.
///
/// Values use the shortest representation that parses back to the same
/// `f64`, so output is bit-exact across runs.
pub fn write_feature_csv<W: Write>(
    w: W,
    manifest: &FeatureManifest,
    rows: &[FeatureVector],
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["user_id"];
    header.extend(manifest.names());
    out.write_record(&header)?;
    for r in rows {
        let mut rec = Vec::with_capacity(r.values.len() + 1);
        rec.push(r.user_id.clone());
        rec.extend(r.values.iter().map(|v| v.to_string()));
        out.write_record(&rec)?;
    }
    out.flush().map_err(|e| Error::Csv(e.into()))
}
