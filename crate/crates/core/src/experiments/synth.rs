//! Synthetic forum corpora with planted user archetypes.
//!
//! Every user belongs to one archetype whose parameters drive how often they
//! post, when, how they are voted on and how often they reply. Troll
//! accusations are planted explicitly, so the set of users that labeling
//! should recover is known.

use std::collections::BTreeSet;
use std::path::Path;

use chrono::{DateTime, Datelike, Duration, NaiveDate, TimeZone, Utc, Weekday};
use chrono_tz::Tz;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::corpus::{parse_timezone, write_corpus, Comment, Publication, User, DEFAULT_TIMEZONE};
use crate::error::{Error, Result};

pub const GROUND_TRUTH_FILE: &str = "ground_truth.csv";
pub const PAID_TROLLS_FILE: &str = "paid_trolls.txt";
pub const METADATA_FILE: &str = "synth_metadata.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Archetype {
    PaidTroll,
    MentionedTroll,
    NonTroll,
    /// Low-activity background users; they write most accusations.
    Casual,
}

impl Archetype {
    pub fn as_str(self) -> &'static str {
        match self {
            Archetype::PaidTroll => "paid_troll",
            Archetype::MentionedTroll => "mentioned_troll",
            Archetype::NonTroll => "non_troll",
            Archetype::Casual => "casual",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchetypeParams {
    pub users: usize,
    /// Probability of posting on any given day.
    pub active_day_rate: f64,
    /// Mean comments on an active day (at least 1).
    pub comments_per_active_day: f64,
    /// Share of active days falling on Monday to Friday.
    pub workday_prob: f64,
    /// Probability that a comment is posted between 9:00 and 18:00 local time.
    pub work_hours_prob: f64,
    /// Probability that a comment replies to an earlier comment.
    pub reply_rate: f64,
    /// Probability that another comment on the same day goes under the
    /// publication of the previous one.
    pub same_publication_prob: f64,
    /// Mean up and down votes per comment.
    pub up_votes: f64,
    pub down_votes: f64,
    /// Inclusive range of distinct users planted as accusers of each member.
    pub accusers: (u32, u32),
}

const UNIFORM_WORKDAY: f64 = 5.0 / 7.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub start: NaiveDate,
    pub days: u32,
    pub timezone: String,
    pub publications_per_day: u32,
    /// Each user's rates and vote means are scaled by a factor drawn
    /// uniformly from `[1 - h, 1 + h]`.
    pub heterogeneity: f64,
    pub paid_troll: ArchetypeParams,
    /// Paid trolls with too few comments to be recoverable.
    pub low_activity_paid_troll: ArchetypeParams,
    pub mentioned_troll: ArchetypeParams,
    pub non_troll: ArchetypeParams,
    pub casual: ArchetypeParams,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        let base = ArchetypeParams {
            users: 0,
            active_day_rate: 0.36,
            comments_per_active_day: 2.0,
            workday_prob: UNIFORM_WORKDAY,
            work_hours_prob: 0.3,
            reply_rate: 0.4,
            same_publication_prob: 0.1,
            up_votes: 2.0,
            down_votes: 0.3,
            accusers: (0, 0),
        };
        SyntheticSpec {
            seed: 42,
            start: NaiveDate::from_ymd_opt(2013, 1, 1).expect("valid date"),
            days: 365,
            timezone: DEFAULT_TIMEZONE.to_string(),
            publications_per_day: 6,
            heterogeneity: 0.5,
            paid_troll: ArchetypeParams {
                users: 4,
                active_day_rate: 0.15,
                comments_per_active_day: 6.0,
                workday_prob: 0.95,
                work_hours_prob: 0.9,
                reply_rate: 0.2,
                same_publication_prob: 0.6,
                up_votes: 0.8,
                down_votes: 3.0,
                accusers: (0, 2),
            },
            low_activity_paid_troll: ArchetypeParams {
                users: 2,
                active_day_rate: 0.03,
                comments_per_active_day: 4.0,
                workday_prob: 0.95,
                work_hours_prob: 0.9,
                reply_rate: 0.2,
                same_publication_prob: 0.6,
                up_votes: 0.8,
                down_votes: 3.0,
                accusers: (0, 0),
            },
            mentioned_troll: ArchetypeParams {
                users: 20,
                active_day_rate: 0.52,
                comments_per_active_day: 4.0,
                workday_prob: 0.8,
                work_hours_prob: 0.45,
                reply_rate: 0.6,
                same_publication_prob: 0.6,
                up_votes: 1.0,
                down_votes: 2.5,
                accusers: (5, 8),
            },
            non_troll: ArchetypeParams {
                users: 30,
                ..base.clone()
            },
            casual: ArchetypeParams {
                users: 60,
                active_day_rate: 0.05,
                comments_per_active_day: 1.0,
                reply_rate: 0.3,
                up_votes: 1.0,
                down_votes: 0.5,
                ..base
            },
        }
    }
}

impl SyntheticSpec {
    fn archetypes(&self) -> [(Archetype, &ArchetypeParams); 5] {
        [
            (Archetype::PaidTroll, &self.paid_troll),
            (Archetype::PaidTroll, &self.low_activity_paid_troll),
            (Archetype::MentionedTroll, &self.mentioned_troll),
            (Archetype::NonTroll, &self.non_troll),
            (Archetype::Casual, &self.casual),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InfeasibleSpec(m));
        if self.days == 0 {
            return bad("days must be positive".into());
        }
        if self.publications_per_day == 0 {
            return bad("publications_per_day must be positive".into());
        }
        parse_timezone(&self.timezone)?;
        if !(0.0..1.0).contains(&self.heterogeneity) {
            return bad(format!("heterogeneity {} must be in [0, 1)", self.heterogeneity));
        }
        for (a, p) in self.archetypes() {
            let name = a.as_str();
            for (field, v) in [
                ("active_day_rate", p.active_day_rate),
                ("workday_prob", p.workday_prob),
                ("work_hours_prob", p.work_hours_prob),
                ("reply_rate", p.reply_rate),
                ("same_publication_prob", p.same_publication_prob),
            ] {
                if !(0.0..=1.0).contains(&v) {
                    return bad(format!("{name}.{field} = {v} is not a probability"));
                }
            }
            for (field, v) in [("up_votes", p.up_votes), ("down_votes", p.down_votes)] {
                if !(v >= 0.0 && v.is_finite()) {
                    return bad(format!("{name}.{field} = {v} must be non-negative"));
                }
            }
            if !(p.comments_per_active_day >= 1.0 && p.comments_per_active_day.is_finite()) {
                return bad(format!("{name}.comments_per_active_day must be at least 1"));
            }
            if p.accusers.0 > p.accusers.1 {
                return bad(format!("{name}.accusers range is empty"));
            }
        }
        let pool = self.non_troll.users + self.casual.users;
        let needed = self
            .archetypes()
            .iter()
            .filter(|(_, p)| p.users > 0)
            .map(|(_, p)| p.accusers.1 as usize)
            .max()
            .unwrap_or(0);
        if needed > pool {
            return bad(format!(
                "{needed} distinct accusers demanded but only {pool} non-troll and casual users exist"
            ));
        }
        Ok(())
    }
}

/// A generated corpus together with its planted truth.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub publications: Vec<Publication>,
    pub comments: Vec<Comment>,
    pub users: Vec<User>,
    /// `(user_id, archetype)` ordered by user id.
    pub ground_truth: Vec<(String, Archetype)>,
    pub paid_troll_ids: Vec<String>,
    /// Planted accuser count per user, ordered by user id.
    pub planted_accusers: Vec<(String, u32)>,
}

const TOPIC_WORDS: &[&str] = &[
    "government", "parliament", "minister", "election", "budget", "energy", "gas", "pipeline",
    "russia", "europe", "union", "sofia", "protest", "reform", "court", "police", "economy",
    "tax", "pension", "health", "school", "road", "border", "bank", "market", "price", "salary",
    "party", "coalition", "vote", "mayor", "city", "village", "farm", "factory", "tourism",
    "sea", "mountain", "football", "weather", "winter", "summer", "report", "media", "news",
    "plan", "law", "contract", "deal", "crisis",
];

const FILLER_WORDS: &[&str] = &[
    "the", "this", "that", "is", "was", "not", "very", "again", "why", "who", "all", "they",
    "we", "you", "think", "know", "see", "say", "good", "bad", "true", "false", "never",
    "always", "more", "less", "people", "country", "today", "now", "what", "how", "really",
];

const NAME_SYLLABLES: &[&str] = &[
    "ivan", "petar", "maria", "elena", "georgi", "dimitar", "nikola", "vesela", "stoyan",
    "boyan", "rada", "kalin", "mira", "todor", "zlatka", "yordan",
];

const ACCUSATIONS: &[&str] = &[
    "you are a paid troll",
    "troll detected again",
    "ти си платен трол",
    "поредният трол",
    "stop feeding the trolls",
];

fn words(rng: &mut ChaCha8Rng, n: usize, topic: &[&str]) -> String {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let pool = if rng.random_bool(0.5) { topic } else { FILLER_WORDS };
        out.push(*pool.choose(rng).expect("non-empty word list"));
    }
    out.join(" ")
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map_or(0, |d| d.sample(rng) as u64)
}

/// Local wall-clock time converted to UTC; times skipped by a DST jump move
/// forward one hour.
fn local_to_utc(tz: Tz, date: NaiveDate, hour: u32, minute: u32, second: u32) -> DateTime<Utc> {
    let naive = date.and_hms_opt(hour, minute, second).expect("valid time");
    match tz.from_local_datetime(&naive).earliest() {
        Some(t) => t.with_timezone(&Utc),
        None => {
            let shifted = naive + Duration::hours(1);
            tz.from_local_datetime(&shifted)
                .earliest()
                .map_or_else(|| Utc.from_utc_datetime(&naive), |t| t.with_timezone(&Utc))
        }
    }
}

struct Draft {
    publication: usize,
    author: usize,
    at: DateTime<Utc>,
    reply: bool,
    up: u32,
    down: u32,
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let tz = parse_timezone(&spec.timezone)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // Users: archetypes are assigned to shuffled ids so ids carry no signal.
    let mut roles: Vec<(Archetype, &ArchetypeParams)> = Vec::new();
    for (a, p) in spec.archetypes() {
        roles.extend(std::iter::repeat_n((a, p), p.users));
    }
    roles.shuffle(&mut rng);
    let n_users = roles.len();
    let width = n_users.to_string().len().max(4);
    let mut used_names = BTreeSet::new();
    let users: Vec<User> = (0..n_users)
        .map(|i| {
            let name = loop {
                let s = NAME_SYLLABLES.choose(&mut rng).expect("non-empty");
                let candidate = format!("{s}{}", rng.random_range(10..10_000));
                if used_names.insert(candidate.clone()) {
                    break candidate;
                }
            };
            User {
                id: format!("u{i:0width$}"),
                display_name: name,
            }
        })
        .collect();

    // Publications start three days before the first comment day, so every
    // comment has a publication from an earlier day to go under.
    let lead = 3i64;
    let mut publications = Vec::new();
    let mut pub_topics: Vec<Vec<&str>> = Vec::new();
    for d in 0..(spec.days as i64 + lead) {
        let date = spec.start + Duration::days(d - lead);
        for k in 0..spec.publications_per_day {
            let topic: Vec<&str> = TOPIC_WORDS.choose_multiple(&mut rng, 6).copied().collect();
            let title_len = rng.random_range(3..=6);
            let body_len = rng.random_range(20..=40);
            let title = words(&mut rng, title_len, &topic);
            let body = words(&mut rng, body_len, &topic);
            publications.push(Publication {
                id: format!("p{:05}", publications.len()),
                category: "Bulgaria".to_string(),
                subcategory: ["Politics", "Economy", "Society"][k as usize % 3].to_string(),
                tags: topic[..2].iter().map(|s| s.to_string()).collect(),
                title,
                body,
                published_at: local_to_utc(tz, date, rng.random_range(6..12), rng.random_range(0..60), 0),
            });
            pub_topics.push(topic);
        }
    }
    let per_day = spec.publications_per_day as usize;

    let h = spec.heterogeneity;
    let mut drafts: Vec<Draft> = Vec::new();
    for (u, (_, base)) in roles.iter().enumerate() {
        let mut jitter = || if h > 0.0 { rng.random_range(1.0 - h..=1.0 + h) } else { 1.0 };
        let p = ArchetypeParams {
            active_day_rate: (base.active_day_rate * jitter()).min(1.0),
            reply_rate: (base.reply_rate * jitter()).min(1.0),
            up_votes: base.up_votes * jitter(),
            down_votes: base.down_votes * jitter(),
            ..(*base).clone()
        };
        for d in 0..spec.days as i64 {
            let date = spec.start + Duration::days(d);
            let weekday = !matches!(date.weekday(), Weekday::Sat | Weekday::Sun);
            let factor = if weekday {
                p.workday_prob / UNIFORM_WORKDAY
            } else {
                (1.0 - p.workday_prob) / (1.0 - UNIFORM_WORKDAY)
            };
            if !rng.random_bool((p.active_day_rate * factor).clamp(0.0, 1.0)) {
                continue;
            }
            let n = 1 + poisson(&mut rng, p.comments_per_active_day - 1.0);
            let mut previous: Option<usize> = None;
            for _ in 0..n {
                let hour = if rng.random_bool(p.work_hours_prob) {
                    rng.random_range(9..18)
                } else {
                    let h = rng.random_range(0..15);
                    if h < 9 { h } else { h + 9 }
                };
                let at = local_to_utc(tz, date, hour, rng.random_range(0..60), rng.random_range(0..60));
                let publication = match previous {
                    Some(p_idx) if rng.random_bool(p.same_publication_prob) => p_idx,
                    _ => {
                        // A publication from the previous three days.
                        let day = (d + lead - rng.random_range(1..=lead)) as usize;
                        day * per_day + rng.random_range(0..per_day)
                    }
                };
                previous = Some(publication);
                drafts.push(Draft {
                    publication,
                    author: u,
                    at,
                    reply: rng.random_bool(p.reply_rate),
                    up: poisson(&mut rng, p.up_votes) as u32,
                    down: poisson(&mut rng, p.down_votes) as u32,
                });
            }
        }
    }
    drafts.sort_by(|a, b| a.at.cmp(&b.at).then(a.author.cmp(&b.author)));

    let mut comments: Vec<Comment> = Vec::with_capacity(drafts.len());
    let mut by_publication: Vec<Vec<usize>> = vec![Vec::new(); publications.len()];
    for dr in &drafts {
        let earlier = &by_publication[dr.publication];
        let parent = if dr.reply {
            let candidates: Vec<usize> = earlier
                .iter()
                .copied()
                .filter(|&c| comments[c].author_id != users[dr.author].id && comments[c].posted_at < dr.at)
                .collect();
            candidates.choose(&mut rng).copied()
        } else {
            None
        };
        let len = rng.random_range(5..=20);
        let body = words(&mut rng, len, &pub_topics[dr.publication]);
        let idx = comments.len();
        comments.push(Comment {
            id: format!("c{idx:07}"),
            publication_id: publications[dr.publication].id.clone(),
            author_id: users[dr.author].id.clone(),
            parent_comment_id: parent.map(|p| comments[p].id.clone()),
            body,
            posted_at: dr.at,
            votes_up: dr.up,
            votes_down: dr.down,
        });
        by_publication[dr.publication].push(idx);
    }

    // Planted accusations, either replying to one of the target's comments
    // or naming the target in quotes under the same publication.
    let pool: Vec<usize> = (0..n_users)
        .filter(|&u| matches!(roles[u].0, Archetype::NonTroll | Archetype::Casual))
        .collect();
    let mut by_author: Vec<Vec<usize>> = vec![Vec::new(); n_users];
    for (i, dr) in drafts.iter().enumerate() {
        by_author[dr.author].push(i);
    }
    let mut planted = Vec::with_capacity(n_users);
    let mut extra = Vec::new();
    for target in 0..n_users {
        let p = roles[target].1;
        let k = rng.random_range(p.accusers.0..=p.accusers.1);
        planted.push((users[target].id.clone(), k));
        if k == 0 {
            continue;
        }
        if by_author[target].is_empty() {
            return Err(Error::InfeasibleSpec(format!(
                "user {} has no comments to accuse",
                users[target].id
            )));
        }
        let accusers: Vec<usize> = pool
            .iter()
            .copied()
            .filter(|&a| a != target)
            .collect::<Vec<_>>()
            .choose_multiple(&mut rng, k as usize)
            .copied()
            .collect();
        if accusers.len() < k as usize {
            return Err(Error::InfeasibleSpec(format!(
                "{k} accusers demanded for {} but only {} available",
                users[target].id,
                accusers.len()
            )));
        }
        for a in accusers {
            let &victim = by_author[target].choose(&mut rng).expect("non-empty");
            let base = &comments[victim];
            let phrase = ACCUSATIONS.choose(&mut rng).expect("non-empty");
            let quoted = rng.random_bool(0.3);
            let body = if quoted {
                format!("to \"{}\": {phrase}", users[target].display_name)
            } else {
                phrase.to_string()
            };
            extra.push(Comment {
                id: String::new(),
                publication_id: base.publication_id.clone(),
                author_id: users[a].id.clone(),
                parent_comment_id: if quoted { None } else { Some(base.id.clone()) },
                body,
                posted_at: base.posted_at + Duration::minutes(rng.random_range(1..=180)),
                votes_up: poisson(&mut rng, 1.0) as u32,
                votes_down: poisson(&mut rng, 1.0) as u32,
            });
        }
    }
    for (i, mut c) in extra.into_iter().enumerate() {
        c.id = format!("a{i:07}");
        comments.push(c);
    }

    let mut ground_truth: Vec<(String, Archetype)> =
        users.iter().zip(&roles).map(|(u, r)| (u.id.clone(), r.0)).collect();
    ground_truth.sort();
    planted.sort();
    let paid_troll_ids = ground_truth
        .iter()
        .filter(|(_, a)| *a == Archetype::PaidTroll)
        .map(|(u, _)| u.clone())
        .collect();
    Ok(SyntheticCorpus {
        publications,
        comments,
        users,
        ground_truth,
        paid_troll_ids,
        planted_accusers: planted,
    })
}

#[derive(Serialize)]
struct Metadata<'a> {
    generator: &'static str,
    version: &'static str,
    note: &'static str,
    spec: &'a SyntheticSpec,
    users: usize,
    publications: usize,
    comments: usize,
}

impl SyntheticCorpus {
    /// Writes the corpus files, `ground_truth.csv`, `paid_trolls.txt` and
    /// `synth_metadata.json` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>, spec: &SyntheticSpec) -> Result<()> {
        let dir = dir.as_ref();
        write_corpus(dir, &self.publications, &self.comments, &self.users)?;

        let mut w = csv::Writer::from_path(dir.join(GROUND_TRUTH_FILE))?;
        w.write_record(["user_id", "archetype"])?;
        for (u, a) in &self.ground_truth {
            w.write_record([u.as_str(), a.as_str()])?;
        }
        w.flush().map_err(|e| Error::io(dir.join(GROUND_TRUTH_FILE), e))?;

        let mut paid = self.paid_troll_ids.join("\n");
        paid.push('\n');
        let path = dir.join(PAID_TROLLS_FILE);
        std::fs::write(&path, paid).map_err(|e| Error::io(&path, e))?;

        let meta = Metadata {
            generator: "trollscope synth",
            version: env!("CARGO_PKG_VERSION"),
            note: "archetype parameters are a modeling choice, not measurements of a real forum",
            spec,
            users: self.users.len(),
            publications: self.publications.len(),
            comments: self.comments.len(),
        };
        let path = dir.join(METADATA_FILE);
        let mut text = serde_json::to_string_pretty(&meta)?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}

/// Reads a paid-troll id list: one id per line, `#` comments and blank lines
/// ignored.
pub fn read_id_list(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}
