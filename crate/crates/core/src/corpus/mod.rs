//! In-memory forum corpus: publications, threaded comments, and users.
//!
//! A [`Corpus`] is validated once at construction and is immutable afterwards.
//! All indices (per-user comment lists, per-publication threads, reply depths,
//! thread ordinals) are built eagerly so that feature extraction can run over
//! shared references from many threads.

mod io;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use chrono::{DateTime, NaiveDate, Utc};
use chrono_tz::Tz;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{load_corpus, write_corpus, COMMENTS_FILE, PUBLICATIONS_FILE, USERS_FILE};

pub const DEFAULT_TIMEZONE: &str = "Europe/Sofia";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Publication {
    pub id: String,
    pub category: String,
    pub subcategory: String,
    pub tags: Vec<String>,
    pub title: String,
    pub body: String,
    pub published_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comment {
    pub id: String,
    pub publication_id: String,
    pub author_id: String,
    pub parent_comment_id: Option<String>,
    pub body: String,
    pub posted_at: DateTime<Utc>,
    pub votes_up: u32,
    pub votes_down: u32,
}

impl Comment {
    pub fn is_reply(&self) -> bool {
        self.parent_comment_id.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct User {
    pub id: String,
    pub display_name: String,
}

/// Per-user activity counts used both as features and as scaling bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct UserActivityStats {
    pub total_comments: u64,
    /// Calendar days from the first comment to the corpus end date, inclusive.
    pub days_in_forum: u64,
    pub active_days: u64,
    /// Days with more than one comment.
    pub multi_comment_days: u64,
    pub publications_commented: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThreadEntry {
    /// Index into [`Corpus::comments`].
    pub comment: usize,
    /// 1-based position in posting order.
    pub ordinal: u32,
    /// 0 for top-level comments.
    pub depth: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreadView {
    pub publication_id: String,
    pub entries: Vec<ThreadEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoteDirection {
    Loved,
    Hated,
}

impl fmt::Display for VoteDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VoteDirection::Loved => "loved",
            VoteDirection::Hated => "hated",
        })
    }
}

/// Summary counts echoed by `ingest`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CorpusCounts {
    pub publications: usize,
    pub comments: usize,
    pub replies: usize,
    pub users: usize,
}

pub struct Corpus {
    publications: Vec<Publication>,
    comments: Vec<Comment>,
    users: Vec<User>,
    timezone: Tz,
    publication_index: HashMap<String, usize>,
    comment_index: HashMap<String, usize>,
    user_index: HashMap<String, usize>,
    comment_publication: Vec<usize>,
    comment_author: Vec<usize>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    depth: Vec<u32>,
    ordinal: Vec<u32>,
    threads: Vec<Vec<usize>>,
    user_comments: Vec<Vec<usize>>,
    end: Option<DateTime<Utc>>,
}

impl fmt::Debug for Corpus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Corpus")
            .field("counts", &self.counts())
            .field("timezone", &self.timezone)
            .finish()
    }
}

pub fn parse_timezone(name: &str) -> Result<Tz> {
    name.parse::<Tz>()
        .map_err(|_| Error::UnknownTimezone(name.to_string()))
}

fn by_time_then_id(comments: &[Comment]) -> impl Fn(&usize, &usize) -> std::cmp::Ordering + '_ {
    move |&a, &b| {
        let (ca, cb) = (&comments[a], &comments[b]);
        ca.posted_at
            .cmp(&cb.posted_at)
            .then_with(|| ca.id.cmp(&cb.id))
    }
}

impl Corpus {
    /// Validates the records and builds every index.
    pub fn new(
        publications: Vec<Publication>,
        comments: Vec<Comment>,
        users: Vec<User>,
        timezone: Tz,
    ) -> Result<Self> {
        let publication_index = unique_index("publication", publications.iter().map(|p| &p.id))?;
        let comment_index = unique_index("comment", comments.iter().map(|c| &c.id))?;
        let user_index = unique_index("user", users.iter().map(|u| &u.id))?;

        let n = comments.len();
        let mut comment_publication = Vec::with_capacity(n);
        let mut comment_author = Vec::with_capacity(n);
        let mut parent = Vec::with_capacity(n);
        for c in &comments {
            let p = *publication_index.get(&c.publication_id).ok_or_else(|| {
                Error::DanglingReference(format!(
                    "comment {} references unknown publication {}",
                    c.id, c.publication_id
                ))
            })?;
            let a = *user_index.get(&c.author_id).ok_or_else(|| {
                Error::DanglingReference(format!(
                    "comment {} references unknown user {}",
                    c.id, c.author_id
                ))
            })?;
            if c.posted_at < publications[p].published_at {
                return Err(Error::CommentBeforePublication {
                    comment: c.id.clone(),
                    publication: c.publication_id.clone(),
                });
            }
            let parent_idx = match &c.parent_comment_id {
                None => None,
                Some(pid) => {
                    let pi = *comment_index.get(pid).ok_or_else(|| {
                        Error::DanglingReference(format!(
                            "comment {} replies to unknown comment {}",
                            c.id, pid
                        ))
                    })?;
                    if comments[pi].publication_id != c.publication_id {
                        return Err(Error::DanglingReference(format!(
                            "comment {} (publication {}) replies to comment {} on a different publication {}",
                            c.id, c.publication_id, pid, comments[pi].publication_id
                        )));
                    }
                    Some(pi)
                }
            };
            comment_publication.push(p);
            comment_author.push(a);
            parent.push(parent_idx);
        }

        let depth = reply_depths(&comments, &parent)?;

        let mut children = vec![Vec::new(); n];
        let mut threads = vec![Vec::new(); publications.len()];
        let mut user_comments = vec![Vec::new(); users.len()];
        for i in 0..n {
            if let Some(p) = parent[i] {
                children[p].push(i);
            }
            threads[comment_publication[i]].push(i);
            user_comments[comment_author[i]].push(i);
        }
        {
            let order = by_time_then_id(&comments);
            for list in children.iter_mut().chain(&mut threads).chain(&mut user_comments) {
                list.sort_by(&order);
            }
        }
        let mut ordinal = vec![0u32; n];
        for thread in &threads {
            for (pos, &c) in thread.iter().enumerate() {
                ordinal[c] = pos as u32 + 1;
            }
        }
        let end = comments.iter().map(|c| c.posted_at).max();

        Ok(Corpus {
            publications,
            comments,
            users,
            timezone,
            publication_index,
            comment_index,
            user_index,
            comment_publication,
            comment_author,
            parent,
            children,
            depth,
            ordinal,
            threads,
            user_comments,
            end,
        })
    }

    pub fn publications(&self) -> &[Publication] {
        &self.publications
    }

    pub fn comments(&self) -> &[Comment] {
        &self.comments
    }

    pub fn users(&self) -> &[User] {
        &self.users
    }

    pub fn timezone(&self) -> Tz {
        self.timezone
    }

    /// Latest comment timestamp; `None` for a corpus without comments.
    pub fn end(&self) -> Option<DateTime<Utc>> {
        self.end
    }

    pub fn end_date(&self) -> Option<NaiveDate> {
        self.end.map(|t| self.local_date(t))
    }

    pub fn local_date(&self, t: DateTime<Utc>) -> NaiveDate {
        t.with_timezone(&self.timezone).date_naive()
    }

    pub fn counts(&self) -> CorpusCounts {
        CorpusCounts {
            publications: self.publications.len(),
            comments: self.comments.len(),
            replies: self.comments.iter().filter(|c| c.is_reply()).count(),
            users: self.users.len(),
        }
    }

    pub fn user_idx(&self, id: &str) -> Option<usize> {
        self.user_index.get(id).copied()
    }

    pub fn publication_idx(&self, id: &str) -> Option<usize> {
        self.publication_index.get(id).copied()
    }

    pub fn comment_idx(&self, id: &str) -> Option<usize> {
        self.comment_index.get(id).copied()
    }

    pub fn has_user(&self, id: &str) -> bool {
        self.user_index.contains_key(id)
    }

    /// Indices of the user's comments, ordered by posting time then id.
    pub fn comments_of(&self, user: usize) -> &[usize] {
        &self.user_comments[user]
    }

    /// Indices of a publication's comments, in thread order.
    pub fn thread_comments(&self, publication: usize) -> &[usize] {
        &self.threads[publication]
    }

    pub fn parent_of(&self, comment: usize) -> Option<usize> {
        self.parent[comment]
    }

    pub fn children_of(&self, comment: usize) -> &[usize] {
        &self.children[comment]
    }

    pub fn depth_of(&self, comment: usize) -> u32 {
        self.depth[comment]
    }

    pub fn ordinal_of(&self, comment: usize) -> u32 {
        self.ordinal[comment]
    }

    pub fn author_of(&self, comment: usize) -> usize {
        self.comment_author[comment]
    }

    pub fn publication_of(&self, comment: usize) -> usize {
        self.comment_publication[comment]
    }

    pub fn activity_stats(&self, user_id: &str) -> Result<UserActivityStats> {
        let u = self
            .user_idx(user_id)
            .ok_or_else(|| Error::UnknownUser(user_id.to_string()))?;
        Ok(self.activity_stats_idx(u))
    }

    pub fn activity_stats_idx(&self, user: usize) -> UserActivityStats {
        let list = &self.user_comments[user];
        let Some(end) = self.end_date() else {
            return UserActivityStats::default();
        };
        if list.is_empty() {
            return UserActivityStats::default();
        }
        let mut per_day: HashMap<NaiveDate, u64> = HashMap::new();
        let mut pubs = HashSet::new();
        for &c in list {
            *per_day
                .entry(self.local_date(self.comments[c].posted_at))
                .or_default() += 1;
            pubs.insert(self.comment_publication[c]);
        }
        // `list` is time-ordered, so its head is the first comment.
        let first = self.local_date(self.comments[list[0]].posted_at);
        UserActivityStats {
            total_comments: list.len() as u64,
            days_in_forum: (end - first).num_days() as u64 + 1,
            active_days: per_day.len() as u64,
            multi_comment_days: per_day.values().filter(|&&n| n > 1).count() as u64,
            publications_commented: pubs.len() as u64,
        }
    }

    pub fn thread_view(&self, publication_id: &str) -> Result<ThreadView> {
        let p = self
            .publication_idx(publication_id)
            .ok_or_else(|| Error::UnknownPublication(publication_id.to_string()))?;
        Ok(self.thread_view_idx(p))
    }

    pub fn thread_view_idx(&self, publication: usize) -> ThreadView {
        ThreadView {
            publication_id: self.publications[publication].id.clone(),
            entries: self.threads[publication]
                .iter()
                .map(|&c| ThreadEntry {
                    comment: c,
                    ordinal: self.ordinal[c],
                    depth: self.depth[c],
                })
                .collect(),
        }
    }

    /// Comment indices of a thread ranked by votes in `direction`, best first.
    ///
    /// Ties fall back to earlier posting time, then comment id, so every
    /// top-k set is a prefix of this ranking.
    pub fn vote_ranking(&self, thread: &[usize], direction: VoteDirection) -> Vec<usize> {
        let mut ranked = thread.to_vec();
        let votes = |c: usize| match direction {
            VoteDirection::Loved => self.comments[c].votes_up,
            VoteDirection::Hated => self.comments[c].votes_down,
        };
        let order = by_time_then_id(&self.comments);
        ranked.sort_by(|a, b| votes(*b).cmp(&votes(*a)).then_with(|| order(a, b)));
        ranked
    }

    /// Ids of the `k` most up-voted (loved) or down-voted (hated) comments.
    pub fn top_k_by_votes(
        &self,
        thread: &ThreadView,
        k: usize,
        direction: VoteDirection,
    ) -> Result<BTreeSet<String>> {
        if k == 0 {
            return Err(Error::InvalidConfig("top-k requires k >= 1".into()));
        }
        let indices: Vec<usize> = thread.entries.iter().map(|e| e.comment).collect();
        Ok(self
            .vote_ranking(&indices, direction)
            .into_iter()
            .take(k)
            .map(|c| self.comments[c].id.clone())
            .collect())
    }

    pub fn into_parts(self) -> (Vec<Publication>, Vec<Comment>, Vec<User>) {
        (self.publications, self.comments, self.users)
    }
}

fn unique_index<'a>(
    kind: &'static str,
    ids: impl Iterator<Item = &'a String>,
) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::new();
    for (i, id) in ids.enumerate() {
        if index.insert(id.clone(), i).is_some() {
            return Err(Error::DuplicateId {
                kind,
                id: id.clone(),
            });
        }
    }
    Ok(index)
}

fn reply_depths(comments: &[Comment], parent: &[Option<usize>]) -> Result<Vec<u32>> {
    const UNSEEN: u8 = 0;
    const ON_PATH: u8 = 1;
    const DONE: u8 = 2;
    let n = comments.len();
    let mut state = vec![UNSEEN; n];
    let mut depth = vec![0u32; n];
    let mut path: Vec<usize> = Vec::new();
    for start in 0..n {
        if state[start] == DONE {
            continue;
        }
        path.clear();
        let mut cur = Some(start);
        let base = loop {
            match cur {
                None => break None,
                Some(c) if state[c] == DONE => break Some(c),
                Some(c) if state[c] == ON_PATH => {
                    let pos = path.iter().position(|&p| p == c).unwrap_or(0);
                    let mut ids: Vec<String> =
                        path[pos..].iter().map(|&p| comments[p].id.clone()).collect();
                    ids.sort();
                    return Err(Error::ReplyCycle(ids));
                }
                Some(c) => {
                    state[c] = ON_PATH;
                    path.push(c);
                    cur = parent[c];
                }
            }
        };
        // `path` runs child-to-ancestor; assign depths from the ancestor end.
        let mut d = base.map_or(0, |b| depth[b] + 1);
        for &c in path.iter().rev() {
            depth[c] = d;
            state[c] = DONE;
            d += 1;
        }
    }
    Ok(depth)
}
