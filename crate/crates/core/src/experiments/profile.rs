//! Average behavior of paid trolls, "mentioned" trolls and non-trolls.

use chrono::{Datelike, Timelike, Weekday};
use serde::Serialize;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::labeling::{most_active_first, Label, LabeledDataset};

/// Profile statistics in report order.
pub const PROFILE_STATISTICS: [&str; 11] = [
    "active_days_rate",
    "comments_per_active_day",
    "comments_per_publication",
    "neg_voted_rate",
    "pos_voted_rate",
    "high_neg_voted_rate",
    "med_neg_voted_rate",
    "replies_rate",
    "workday_rate",
    "work_hours_rate",
    "non_work_hours_rate",
];

/// Up/down ratio below which a down-voted comment counts as strongly
/// negative; at or above it but below [`MED_NEG_RATIO`] as moderately so.
pub const HIGH_NEG_RATIO: f64 = 0.25;
pub const MED_NEG_RATIO: f64 = 1.0;

const WORK_HOURS: (u32, u32) = (9, 18);

pub const PROFILE_GROUPS: [Label; 3] = [Label::PaidTroll, Label::MentionedTroll, Label::NonTroll];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupStats {
    pub group: Label,
    pub users: Vec<String>,
    /// Per-statistic averages over `users`.
    pub raw: Vec<f64>,
    /// `raw / max over groups`, 0 when every group is 0.
    pub normalized: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupProfile {
    pub statistics: Vec<&'static str>,
    pub groups: Vec<GroupStats>,
}

/// The statistics of one user, in [`PROFILE_STATISTICS`] order.
pub fn user_profile(corpus: &Corpus, user: usize) -> [f64; 11] {
    let stats = corpus.activity_stats_idx(user);
    let cs = corpus.comments_of(user);
    let n = cs.len() as f64;
    let per = |k: usize| if n > 0.0 { k as f64 / n } else { 0.0 };
    let ratio = |a: u64, b: u64| if b > 0 { a as f64 / b as f64 } else { 0.0 };
    let tz = corpus.timezone();
    let (mut neg, mut pos, mut high, mut med, mut replies, mut workday, mut work) = (0, 0, 0, 0, 0, 0, 0);
    for &c in cs {
        let cm = &corpus.comments()[c];
        if cm.votes_up >= 1 {
            pos += 1;
        }
        if cm.votes_down >= 1 {
            neg += 1;
            let r = f64::from(cm.votes_up) / f64::from(cm.votes_down);
            if r < HIGH_NEG_RATIO {
                high += 1;
            } else if r < MED_NEG_RATIO {
                med += 1;
            }
        }
        if cm.is_reply() {
            replies += 1;
        }
        let local = cm.posted_at.with_timezone(&tz);
        if !matches!(local.weekday(), Weekday::Sat | Weekday::Sun) {
            workday += 1;
        }
        if (WORK_HOURS.0..WORK_HOURS.1).contains(&local.hour()) {
            work += 1;
        }
    }
    [
        ratio(stats.active_days, stats.days_in_forum),
        ratio(stats.total_comments, stats.active_days),
        ratio(stats.total_comments, stats.publications_commented),
        per(neg),
        per(pos),
        per(high),
        per(med),
        per(replies),
        per(workday),
        per(work),
        if n > 0.0 { per(cs.len() - work) } else { 0.0 },
    ]
}

/// `value / max` per column; a column that is 0 everywhere stays 0.
pub fn normalize_by_max(raw: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let width = raw.first().map_or(0, Vec::len);
    let max: Vec<f64> = (0..width)
        .map(|k| raw.iter().map(|r| r[k]).fold(0.0, f64::max))
        .collect();
    raw.iter()
        .map(|r| {
            r.iter()
                .zip(&max)
                .map(|(&v, &m)| if m > 0.0 { v / m } else { 0.0 })
                .collect()
        })
        .collect()
}

/// Averages over the `top_n` most active users of each group, then
/// normalizes every statistic by its maximum across groups.
pub fn aggregate_profiles(corpus: &Corpus, dataset: &LabeledDataset, top_n: usize) -> Result<GroupProfile> {
    if top_n == 0 {
        return Err(Error::InvalidConfig("top_n must be positive".into()));
    }
    let mut groups = Vec::new();
    let mut raws = Vec::new();
    for label in PROFILE_GROUPS {
        let mut members: Vec<_> = dataset.with_label(label).collect();
        if members.is_empty() {
            return Err(Error::EmptyGroup(label.as_str().to_string()));
        }
        members.sort_by(|a, b| most_active_first(a, b));
        members.truncate(top_n);
        let mut sum = [0.0; 11];
        let mut users = Vec::with_capacity(members.len());
        for m in &members {
            let u = corpus
                .user_idx(&m.user_id)
                .ok_or_else(|| Error::UnknownUser(m.user_id.clone()))?;
            for (s, v) in sum.iter_mut().zip(user_profile(corpus, u)) {
                *s += v;
            }
            users.push(m.user_id.clone());
        }
        let n = members.len() as f64;
        raws.push(sum.iter().map(|s| s / n).collect::<Vec<f64>>());
        groups.push((label, users));
    }
    let normalized = normalize_by_max(&raws);
    Ok(GroupProfile {
        statistics: PROFILE_STATISTICS.to_vec(),
        groups: groups
            .into_iter()
            .zip(raws.into_iter().zip(normalized))
            .map(|((group, users), (raw, normalized))| GroupStats {
                group,
                users,
                raw,
                normalized,
            })
            .collect(),
    })
}
