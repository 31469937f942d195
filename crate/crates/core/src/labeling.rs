//! Distant-supervision labels from troll accusations.
//!
//! A comment that contains an accusation keyword accuses the author of the
//! comment it replies to, and any user whose display name it addresses in
//! quotation marks. Users accused by enough distinct people become
//! "mentioned" trolls; active users never accused become non-trolls.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Keywords matched as substrings of case-folded comment text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccusationLexicon {
    keywords: Vec<String>,
}

impl Default for AccusationLexicon {
    fn default() -> Self {
        AccusationLexicon {
            keywords: ["трол", "тролове", "troll", "trolls"]
                .map(String::from)
                .to_vec(),
        }
    }
}

impl AccusationLexicon {
    pub fn new<I, S>(keywords: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let keywords: Vec<String> = keywords.into_iter().map(Into::into).collect();
        if keywords.is_empty() {
            return Err(Error::InvalidConfig("accusation lexicon is empty".into()));
        }
        if let Some(k) = keywords.iter().find(|k| k.to_lowercase() != **k || k.is_empty()) {
            return Err(Error::InvalidConfig(format!(
                "lexicon keyword {k:?} must be non-empty and lowercase"
            )));
        }
        Ok(AccusationLexicon { keywords })
    }

    /// Parses the lexicon file format: one keyword per line, `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        Self::new(
            text.lines()
                .map(|l| l.split('#').next().unwrap_or("").trim())
                .filter(|l| !l.is_empty())
                .map(str::to_lowercase),
        )
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn keywords(&self) -> &[String] {
        &self.keywords
    }

    pub fn matches(&self, folded_text: &str) -> bool {
        self.keywords.iter().any(|k| folded_text.contains(k.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelConfig {
    pub min_mentions: u32,
    pub min_comments: u64,
    #[serde(default)]
    pub paid_troll_ids: Vec<String>,
    pub seed: u64,
}

impl Default for LabelConfig {
    fn default() -> Self {
        LabelConfig {
            min_mentions: 5,
            min_comments: 150,
            paid_troll_ids: Vec::new(),
            seed: 42,
        }
    }
}

impl LabelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_mentions < 1 {
            return Err(Error::InvalidConfig("min_mentions must be >= 1".into()));
        }
        if self.min_comments < 1 {
            return Err(Error::InvalidConfig("min_comments must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    MentionedTroll,
    PaidTroll,
    NonTroll,
    Excluded,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::MentionedTroll => "mentioned_troll",
            Label::PaidTroll => "paid_troll",
            Label::NonTroll => "non_troll",
            Label::Excluded => "excluded",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "mentioned_troll" => Label::MentionedTroll,
            "paid_troll" => Label::PaidTroll,
            "non_troll" => Label::NonTroll,
            "excluded" => Label::Excluded,
            other => return Err(Error::InvalidConfig(format!("unknown label {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Accusation {
    pub accuser_id: String,
    pub accused_id: String,
    pub comment_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledUser {
    pub user_id: String,
    pub label: Label,
    pub mention_count: u32,
    pub total_comments: u64,
}

/// One entry per corpus user, ordered by user id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabeledDataset {
    pub entries: Vec<LabeledUser>,
}

impl LabeledDataset {
    pub fn with_label(&self, label: Label) -> impl Iterator<Item = &LabeledUser> + '_ {
        self.entries.iter().filter(move |e| e.label == label)
    }

    pub fn count(&self, label: Label) -> usize {
        self.with_label(label).count()
    }

    pub fn get(&self, user_id: &str) -> Option<&LabeledUser> {
        self.entries
            .binary_search_by(|e| e.user_id.as_str().cmp(user_id))
            .ok()
            .map(|i| &self.entries[i])
    }

    /// Labels export: `user_id,label,mention_count,total_comments`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["user_id", "label", "mention_count", "total_comments"])?;
        for e in &self.entries {
            out.write_record([
                e.user_id.as_str(),
                e.label.as_str(),
                &e.mention_count.to_string(),
                &e.total_comments.to_string(),
            ])?;
        }
        out.flush().map_err(|e| Error::Csv(e.into()))
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let mut entries = Vec::new();
        for rec in csv::Reader::from_reader(r).deserialize::<(String, String, u32, u64)>() {
            let (user_id, label, mention_count, total_comments) = rec?;
            entries.push(LabeledUser {
                user_id,
                label: label.parse()?,
                mention_count,
                total_comments,
            });
        }
        entries.sort_by(|a, b| a.user_id.cmp(&b.user_id));
        Ok(LabeledDataset { entries })
    }
}

/// Extracts every display name enclosed in a pair of quotation marks.
fn quoted_spans(text: &str) -> Vec<&str> {
    const PAIRS: [(char, char); 5] = [
        ('"', '"'),
        ('\u{201c}', '\u{201d}'),
        ('\u{201e}', '\u{201c}'),
        ('\u{00ab}', '\u{00bb}'),
        ('\'', '\''),
    ];
    let mut spans = Vec::new();
    for (open, close) in PAIRS {
        let mut rest = text;
        while let Some(start) = rest.find(open) {
            let after = &rest[start + open.len_utf8()..];
            let Some(end) = after.find(close) else { break };
            let span = after[..end].trim();
            if !span.is_empty() {
                spans.push(span);
            }
            rest = &after[end + close.len_utf8()..];
        }
    }
    spans
}

/// Finds troll accusations between users.
///
/// Output is sorted and free of exact duplicates, so it does not depend on
/// the order in which comments were stored.
pub fn detect_accusations(corpus: &Corpus, lexicon: &AccusationLexicon) -> Vec<Accusation> {
    let mut by_name: HashMap<String, Vec<usize>> = HashMap::new();
    for (i, u) in corpus.users().iter().enumerate() {
        let name = u.display_name.trim().to_lowercase();
        if !name.is_empty() {
            by_name.entry(name).or_default().push(i);
        }
    }

    let mut found = BTreeSet::new();
    for (ci, comment) in corpus.comments().iter().enumerate() {
        let folded = comment.body.to_lowercase();
        if !lexicon.matches(&folded) {
            continue;
        }
        let accuser = corpus.author_of(ci);
        let mut targets = BTreeSet::new();
        if let Some(p) = corpus.parent_of(ci) {
            targets.insert(corpus.author_of(p));
        }
        for span in quoted_spans(&comment.body) {
            if let Some(users) = by_name.get(&span.to_lowercase()) {
                targets.extend(users.iter().copied());
            }
        }
        for t in targets.into_iter().filter(|&t| t != accuser) {
            found.insert(Accusation {
                accuser_id: corpus.users()[accuser].id.clone(),
                accused_id: corpus.users()[t].id.clone(),
                comment_id: comment.id.clone(),
            });
        }
    }
    found.into_iter().collect()
}

/// Number of distinct accusers per accused user.
pub fn mention_counts(accusations: &[Accusation]) -> BTreeMap<String, u32> {
    let mut accusers: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for a in accusations {
        accusers
            .entry(&a.accused_id)
            .or_default()
            .insert(&a.accuser_id);
    }
    accusers
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.len() as u32))
        .collect()
}

pub fn assign_labels(
    corpus: &Corpus,
    counts: &BTreeMap<String, u32>,
    config: &LabelConfig,
) -> Result<LabeledDataset> {
    config.validate()?;
    let mut unknown: Vec<String> = config
        .paid_troll_ids
        .iter()
        .filter(|id| !corpus.has_user(id))
        .cloned()
        .collect();
    if !unknown.is_empty() {
        unknown.sort();
        unknown.dedup();
        return Err(Error::UnknownPaidTrolls(unknown));
    }
    let paid: BTreeSet<&str> = config.paid_troll_ids.iter().map(String::as_str).collect();

    let mut entries: Vec<LabeledUser> = corpus
        .users()
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let total_comments = corpus.comments_of(i).len() as u64;
            let mention_count = counts.get(&u.id).copied().unwrap_or(0);
            let label = if total_comments < config.min_comments {
                Label::Excluded
            } else if paid.contains(u.id.as_str()) {
                Label::PaidTroll
            } else if mention_count >= config.min_mentions {
                Label::MentionedTroll
            } else if mention_count == 0 {
                Label::NonTroll
            } else {
                Label::Excluded
            };
            LabeledUser {
                user_id: u.id.clone(),
                label,
                mention_count,
                total_comments,
            }
        })
        .collect();
    entries.sort_by(|a, b| a.user_id.cmp(&b.user_id));
    Ok(LabeledDataset { entries })
}

/// Ordering used whenever "most active users" are selected.
pub(crate) fn most_active_first(a: &LabeledUser, b: &LabeledUser) -> std::cmp::Ordering {
    b.total_comments
        .cmp(&a.total_comments)
        .then_with(|| a.user_id.cmp(&b.user_id))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingPair {
    /// Positive class, ordered by user id.
    pub trolls: Vec<String>,
    /// Negative class: the most active non-trolls, most active first.
    pub non_trolls: Vec<String>,
}

/// Users left out of training and available for evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Holdout {
    pub paid_trolls: Vec<String>,
    /// Non-trolls not used for training, most active first.
    pub spare_non_trolls: Vec<String>,
}

pub fn build_training_pair(
    dataset: &LabeledDataset,
    config: &LabelConfig,
) -> Result<(TrainingPair, Holdout)> {
    config.validate()?;
    let trolls: Vec<String> = dataset
        .with_label(Label::MentionedTroll)
        .map(|e| e.user_id.clone())
        .collect();
    if trolls.is_empty() {
        return Err(Error::NoMentionedTrolls);
    }
    let mut non: Vec<&LabeledUser> = dataset.with_label(Label::NonTroll).collect();
    if non.len() < trolls.len() {
        return Err(Error::InsufficientNonTrolls {
            needed: trolls.len(),
            available: non.len(),
        });
    }
    non.sort_by(|a, b| most_active_first(a, b));
    let (train, spare) = non.split_at(trolls.len());
    Ok((
        TrainingPair {
            non_trolls: train.iter().map(|e| e.user_id.clone()).collect(),
            trolls,
        },
        Holdout {
            paid_trolls: dataset
                .with_label(Label::PaidTroll)
                .map(|e| e.user_id.clone())
                .collect(),
            spare_non_trolls: spare.iter().map(|e| e.user_id.clone()).collect(),
        },
    ))
}
