use chrono::{Datelike, Timelike};
use rayon::prelude::*;

use super::{
    Denominator, FeatureConfig, FeatureGroup, FeatureManifest, FeatureVector, ScalingDenominators,
};
use crate::corpus::{Corpus, UserActivityStats, VoteDirection};
use crate::error::{Error, Result};
use crate::textsim::{cosine, publication_text, tokenize, SparseVector, Vocabulary};

/// How a raw statistic is turned into features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatKind {
    /// Extensive in the number of comments: divided by every denominator
    /// except the one it is itself, and emitted raw.
    Count,
    /// A day count: divided only by the listed day-based denominators, and
    /// emitted raw.
    Days(&'static [Denominator]),
    /// Already a per-comment quantity (mean, min, max): emitted once.
    Intensive,
}

impl StatKind {
    pub fn denominators(self, stat_name: &str) -> Vec<Denominator> {
        match self {
            StatKind::Count => Denominator::ALL
                .into_iter()
                .filter(|d| d.name() != stat_name)
                .collect(),
            StatKind::Days(list) => list.to_vec(),
            StatKind::Intensive => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedValue {
    pub group: FeatureGroup,
    pub name: String,
    pub kind: StatKind,
    pub value: f64,
}

struct Out(Vec<NamedValue>);

impl Out {
    fn count(&mut self, group: FeatureGroup, name: impl Into<String>, value: u64) {
        self.push(group, name, StatKind::Count, value as f64);
    }

    fn push(&mut self, group: FeatureGroup, name: impl Into<String>, kind: StatKind, value: f64) {
        self.0.push(NamedValue {
            group,
            name: name.into(),
            kind,
            value,
        });
    }
}

const WEEKDAYS: [&str; 7] = ["mon", "tue", "wed", "thu", "fri", "sat", "sun"];

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SimilaritySummary {
    pub mean: f64,
    pub max: f64,
    pub min: f64,
    /// `(below, at_or_above)` per cut point.
    pub split: Vec<(u64, u64)>,
}

/// Mean, max, min, and cut-point counts; all zero for an empty list.
pub(crate) fn summarize_similarities(sims: &[f64], cuts: &[f64]) -> SimilaritySummary {
    let (mean, max, min) = if sims.is_empty() {
        (0.0, 0.0, 0.0)
    } else {
        (
            sims.iter().sum::<f64>() / sims.len() as f64,
            sims.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            sims.iter().copied().fold(f64::INFINITY, f64::min),
        )
    };
    let split = cuts
        .iter()
        .map(|&cut| {
            let below = sims.iter().filter(|&&s| s < cut).count() as u64;
            (below, sims.len() as u64 - below)
        })
        .collect();
    SimilaritySummary { mean, max, min, split }
}

/// Corpus-wide precomputation shared by all users: publication vectors and
/// per-thread vote ranks.
pub struct FeatureContext<'a> {
    corpus: &'a Corpus,
    vocabulary: &'a Vocabulary,
    config: FeatureConfig,
    publication_vectors: Vec<SparseVector>,
    loved_rank: Vec<u32>,
    hated_rank: Vec<u32>,
    manifest: FeatureManifest,
}

impl<'a> FeatureContext<'a> {
    pub fn new(corpus: &'a Corpus, vocabulary: &'a Vocabulary, config: FeatureConfig) -> Result<Self> {
        config.validate()?;
        let publication_vectors = corpus
            .publications()
            .par_iter()
            .map(|p| vocabulary.vectorize(&tokenize(&publication_text(p))))
            .collect();
        let n = corpus.comments().len();
        let mut loved_rank = vec![0u32; n];
        let mut hated_rank = vec![0u32; n];
        for p in 0..corpus.publications().len() {
            let thread = corpus.thread_comments(p);
            for (dir, ranks) in [
                (VoteDirection::Loved, &mut loved_rank),
                (VoteDirection::Hated, &mut hated_rank),
            ] {
                for (r, c) in corpus.vote_ranking(thread, dir).into_iter().enumerate() {
                    ranks[c] = r as u32;
                }
            }
        }
        let mut ctx = FeatureContext {
            corpus,
            vocabulary,
            config,
            publication_vectors,
            loved_rank,
            hated_rank,
            manifest: FeatureManifest { specs: Vec::new() },
        };
        let template = ctx.statistics_of(&[], &UserActivityStats::default());
        ctx.manifest = FeatureManifest::from_stats(&template);
        Ok(ctx)
    }

    pub fn corpus(&self) -> &'a Corpus {
        self.corpus
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn manifest(&self) -> &FeatureManifest {
        &self.manifest
    }

    fn comments_of(&self, user_id: &str) -> Result<&'a [usize]> {
        let u = self
            .corpus
            .user_idx(user_id)
            .ok_or_else(|| Error::UnknownUser(user_id.to_string()))?;
        Ok(self.corpus.comments_of(u))
    }

    /// Cosine between a comment and its publication.
    pub fn comment_similarity(&self, comment: usize) -> f64 {
        let c = &self.corpus.comments()[comment];
        let v = self.vocabulary.vectorize(&tokenize(&c.body));
        cosine(&v, &self.publication_vectors[self.corpus.publication_of(comment)])
    }

    /// 0-based position of a comment in its thread's loved/hated ranking.
    pub fn vote_rank(&self, comment: usize, direction: VoteDirection) -> u32 {
        match direction {
            VoteDirection::Loved => self.loved_rank[comment],
            VoteDirection::Hated => self.hated_rank[comment],
        }
    }

    pub fn vote_features(&self, user_id: &str) -> Result<Vec<NamedValue>> {
        let cs = self.comments_of(user_id)?;
        let mut out = Out(Vec::new());
        self.votes_into(cs, &mut out);
        Ok(out.0)
    }

    pub fn similarity_features(&self, user_id: &str) -> Result<Vec<NamedValue>> {
        let cs = self.comments_of(user_id)?;
        let mut out = Out(Vec::new());
        self.similarity_into(cs, &mut out);
        Ok(out.0)
    }

    pub fn order_features(&self, user_id: &str) -> Result<Vec<NamedValue>> {
        let cs = self.comments_of(user_id)?;
        let mut out = Out(Vec::new());
        self.order_into(cs, &mut out);
        Ok(out.0)
    }

    pub fn top_loved_hated_features(&self, user_id: &str) -> Result<Vec<NamedValue>> {
        let cs = self.comments_of(user_id)?;
        let mut out = Out(Vec::new());
        self.top_into(cs, &mut out);
        Ok(out.0)
    }

    pub fn reply_features(&self, user_id: &str) -> Result<Vec<NamedValue>> {
        let cs = self.comments_of(user_id)?;
        let mut out = Out(Vec::new());
        self.replies_into(cs, &mut out);
        Ok(out.0)
    }

    /// Local-time posting statistics, in the corpus timezone.
    pub fn time_features(&self, user_id: &str) -> Result<Vec<NamedValue>> {
        let cs = self.comments_of(user_id)?;
        let mut out = Out(Vec::new());
        self.time_into(cs, &mut out);
        Ok(out.0)
    }

    /// Every raw statistic for a user, grouped in [`FeatureGroup`] order.
    pub fn raw_statistics(&self, user_id: &str) -> Result<Vec<NamedValue>> {
        let u = self
            .corpus
            .user_idx(user_id)
            .ok_or_else(|| Error::UnknownUser(user_id.to_string()))?;
        Ok(self.statistics_of(self.corpus.comments_of(u), &self.corpus.activity_stats_idx(u)))
    }

    fn statistics_of(&self, cs: &[usize], stats: &UserActivityStats) -> Vec<NamedValue> {
        let mut out = Out(Vec::new());
        self.votes_into(cs, &mut out);
        self.similarity_into(cs, &mut out);
        self.order_into(cs, &mut out);
        self.top_into(cs, &mut out);
        self.replies_into(cs, &mut out);
        self.activity_into(stats, &mut out);
        self.time_into(cs, &mut out);
        let mut v = out.0;
        v.sort_by_key(|s| s.group);
        v
    }

    pub fn assemble(&self, user_id: &str) -> Result<FeatureVector> {
        let u = self
            .corpus
            .user_idx(user_id)
            .ok_or_else(|| Error::UnknownUser(user_id.to_string()))?;
        let stats = self.corpus.activity_stats_idx(u);
        let denominators = ScalingDenominators::from_stats(&stats);
        for d in Denominator::ALL {
            if denominators.get(d) == 0 {
                return Err(Error::ZeroDenominator {
                    user: user_id.to_string(),
                    denominator: d.name().to_string(),
                });
            }
        }
        let raw = self.statistics_of(self.corpus.comments_of(u), &stats);
        let values = self
            .manifest
            .specs()
            .iter()
            .map(|spec| {
                let v = raw[spec.stat].value;
                match spec.denominator {
                    Some(d) if spec.scaled => v / denominators.get(d) as f64,
                    _ => v,
                }
            })
            .collect();
        Ok(FeatureVector {
            user_id: user_id.to_string(),
            values,
        })
    }

    /// Assembles many users in parallel; output follows input order.
    pub fn assemble_many(&self, user_ids: &[String]) -> Result<Vec<FeatureVector>> {
        user_ids.par_iter().map(|u| self.assemble(u)).collect()
    }

    fn vote_block(&self, cs: &[usize], group: FeatureGroup, prefix: &str, out: &mut Out) {
        let comments = self.corpus.comments();
        let pos = cs.iter().filter(|&&c| comments[c].votes_up >= 1).count();
        let neg = cs.iter().filter(|&&c| comments[c].votes_down >= 1).count();
        out.count(group, format!("{prefix}pos_voted"), pos as u64);
        out.count(group, format!("{prefix}neg_voted"), neg as u64);
        for &r in &self.config.ratio_thresholds {
            let n = cs
                .iter()
                .filter(|&&c| {
                    let (up, down) = (comments[c].votes_up, comments[c].votes_down);
                    down >= 1 && (up as f64 / down as f64) < r
                })
                .count();
            out.count(group, format!("{prefix}ratio_lt_{r}"), n as u64);
        }
    }

    fn votes_into(&self, cs: &[usize], out: &mut Out) {
        let comments = self.corpus.comments();
        self.vote_block(cs, FeatureGroup::VoteUpdownAll, "", out);
        let up: u64 = cs.iter().map(|&c| comments[c].votes_up as u64).sum();
        let down: u64 = cs.iter().map(|&c| comments[c].votes_down as u64).sum();
        out.count(FeatureGroup::VoteUpdownTotal, "votes_up", up);
        out.count(FeatureGroup::VoteUpdownTotal, "votes_down", down);
        let (top, replies): (Vec<usize>, Vec<usize>) =
            cs.iter().partition(|&&c| self.corpus.depth_of(c) == 0);
        self.vote_block(&top, FeatureGroup::VoteUpdownIsReply, "top_level_", out);
        self.vote_block(&replies, FeatureGroup::VoteUpdownIsReply, "reply_", out);
    }

    fn similarity_block(&self, sims: &[f64], group: FeatureGroup, prefix: &str, out: &mut Out) {
        let summary = summarize_similarities(sims, &self.config.similarity_cuts);
        out.push(group, format!("{prefix}mean"), StatKind::Intensive, summary.mean);
        out.push(group, format!("{prefix}max"), StatKind::Intensive, summary.max);
        out.push(group, format!("{prefix}min"), StatKind::Intensive, summary.min);
        for (&cut, (below, at_or_above)) in self.config.similarity_cuts.iter().zip(summary.split) {
            out.count(group, format!("{prefix}lt_{cut}"), below);
            out.count(group, format!("{prefix}ge_{cut}"), at_or_above);
        }
    }

    fn similarity_into(&self, cs: &[usize], out: &mut Out) {
        let k = self.config.similarity_top_k as u32;
        let mut all = Vec::with_capacity(cs.len());
        let mut top = Vec::new();
        for &c in cs {
            let s = self.comment_similarity(c);
            all.push(s);
            if self.loved_rank[c] < k || self.hated_rank[c] < k {
                top.push(s);
            }
        }
        self.similarity_block(&all, FeatureGroup::Similarity, "", out);
        self.similarity_block(&top, FeatureGroup::SimilarityTop, "top_", out);
    }

    fn order_into(&self, cs: &[usize], out: &mut Out) {
        for &k in &self.config.order_ks {
            let n = cs
                .iter()
                .filter(|&&c| self.corpus.ordinal_of(c) as usize <= k)
                .count();
            out.count(FeatureGroup::CommentOrder, format!("first_{k}"), n as u64);
        }
    }

    fn top_into(&self, cs: &[usize], out: &mut Out) {
        for (dir, ranks) in [
            (VoteDirection::Loved, &self.loved_rank),
            (VoteDirection::Hated, &self.hated_rank),
        ] {
            for &k in &self.config.top_ks {
                let n = cs.iter().filter(|&&c| (ranks[c] as usize) < k).count();
                out.count(FeatureGroup::TopLovedHated, format!("{dir}_top_{k}"), n as u64);
            }
        }
    }

    fn replies_into(&self, cs: &[usize], out: &mut Out) {
        let corpus = self.corpus;
        let comments = corpus.comments();
        let depth = |c: usize| corpus.depth_of(c);
        let top_level = cs.iter().filter(|&&c| depth(c) == 0).count() as u64;
        out.count(FeatureGroup::IsReply, "top_level", top_level);
        out.count(FeatureGroup::IsReply, "replies", cs.len() as u64 - top_level);

        out.count(
            FeatureGroup::IsReplyToHasReply,
            "reply_to_reply",
            cs.iter().filter(|&&c| depth(c) >= 2).count() as u64,
        );
        out.count(
            FeatureGroup::IsReplyToHasReply,
            "reply_with_replies",
            cs.iter()
                .filter(|&&c| depth(c) >= 1 && !corpus.children_of(c).is_empty())
                .count() as u64,
        );

        let mut buckets = [0u64; 4];
        let mut triggered = 0u64;
        let mut triggering = 0u64;
        for &c in cs {
            let author = corpus.author_of(c);
            let t = corpus
                .children_of(c)
                .iter()
                .filter(|&&ch| corpus.author_of(ch) != author)
                .count() as u64;
            triggered += t;
            triggering += u64::from(t > 0);
            buckets[match t {
                0 => 0,
                1..=2 => 1,
                3..=5 => 2,
                _ => 3,
            }] += 1;
        }
        out.count(FeatureGroup::TriggeredRepliesTotal, "triggered_replies", triggered);
        out.count(FeatureGroup::TriggeredRepliesTotal, "triggering_comments", triggering);
        for (name, v) in ["triggered_0", "triggered_1_2", "triggered_3_5", "triggered_6_plus"]
            .into_iter()
            .zip(buckets)
        {
            out.count(FeatureGroup::TriggeredRepliesRange, name, v);
        }

        let sum = |pred: &dyn Fn(usize) -> bool, up: bool| -> u64 {
            cs.iter()
                .filter(|&&c| pred(c))
                .map(|&c| {
                    if up {
                        comments[c].votes_up as u64
                    } else {
                        comments[c].votes_down as u64
                    }
                })
                .sum()
        };
        let is_top = |c: usize| depth(c) == 0;
        let is_reply = |c: usize| depth(c) >= 1;
        let g = FeatureGroup::VoteUpdownReplyStatus;
        out.count(g, "top_level_votes_up", sum(&is_top, true));
        out.count(g, "top_level_votes_down", sum(&is_top, false));
        out.count(g, "reply_votes_up", sum(&is_reply, true));
        out.count(g, "reply_votes_down", sum(&is_reply, false));
    }

    fn activity_into(&self, s: &UserActivityStats, out: &mut Out) {
        const BY_TENURE: &[Denominator] = &[Denominator::DaysInForum];
        const BY_TENURE_AND_ACTIVE: &[Denominator] =
            &[Denominator::DaysInForum, Denominator::ActiveDays];
        let g = FeatureGroup::TotalComments;
        out.count(g, Denominator::Comments.name(), s.total_comments);
        out.count(g, Denominator::Publications.name(), s.publications_commented);
        out.push(g, "active_days", StatKind::Days(BY_TENURE), s.active_days as f64);
        out.push(
            g,
            "multi_comment_days",
            StatKind::Days(BY_TENURE_AND_ACTIVE),
            s.multi_comment_days as f64,
        );
        out.push(g, "days_in_forum", StatKind::Days(&[]), s.days_in_forum as f64);
    }

    fn time_into(&self, cs: &[usize], out: &mut Out) {
        let tz = self.corpus.timezone();
        let (start, end) = self.config.work_hours;
        let mut hours = [0u64; 24];
        let mut days = [0u64; 7];
        for &c in cs {
            let local = self.corpus.comments()[c].posted_at.with_timezone(&tz);
            hours[local.hour() as usize] += 1;
            days[local.weekday().num_days_from_monday() as usize] += 1;
        }
        let work: u64 = hours[start as usize..end as usize].iter().sum();
        out.count(FeatureGroup::Time, "work_hours", work);
        out.count(FeatureGroup::Time, "non_work_hours", cs.len() as u64 - work);
        for (h, n) in hours.iter().enumerate() {
            out.count(FeatureGroup::TimeHours, format!("hour_{h:02}"), *n);
        }
        for (name, n) in WEEKDAYS.iter().zip(days) {
            out.count(FeatureGroup::TimeDayOfWeek, *name, n);
        }
        let weekday: u64 = days[..5].iter().sum();
        out.count(FeatureGroup::TimeDayOfWeek, "weekday", weekday);
        out.count(FeatureGroup::TimeDayOfWeek, "weekend", days[5] + days[6]);
    }
}
