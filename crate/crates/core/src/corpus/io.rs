//! JSONL corpus files: `publications.jsonl`, `comments.jsonl`, `users.jsonl`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{parse_timezone, Comment, Corpus, Publication, User};
use crate::error::{Error, Result};

pub const PUBLICATIONS_FILE: &str = "publications.jsonl";
pub const COMMENTS_FILE: &str = "comments.jsonl";
pub const USERS_FILE: &str = "users.jsonl";

#[derive(Deserialize)]
struct RawPublication {
    id: String,
    category: String,
    subcategory: String,
    #[serde(default)]
    tags: Vec<String>,
    title: String,
    body: String,
    published_at: String,
}

#[derive(Deserialize)]
struct RawComment {
    id: String,
    publication_id: String,
    author_id: String,
    #[serde(default)]
    parent_comment_id: Option<String>,
    body: String,
    posted_at: String,
    votes_up: u32,
    votes_down: u32,
}

fn read_jsonl<R: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, R)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => Error::MalformedRecord {
                file: name.clone(),
                line: line_no,
                message: "invalid UTF-8".into(),
            },
            _ => Error::io(path, e),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            file: name.clone(),
            line: line_no,
            message: e.to_string(),
        })?;
        out.push((line_no, record));
    }
    Ok(out)
}

fn parse_time(file: &str, line: usize, value: &str) -> Result<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(value)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| Error::Timestamp {
            file: file.to_string(),
            line,
            value: value.to_string(),
            message: e.to_string(),
        })
}

/// Loads and validates a corpus directory.
///
/// `timezone` is an IANA zone id used for all calendar-day and local-hour
/// computations.
pub fn load_corpus(dir: impl AsRef<Path>, timezone: &str) -> Result<Corpus> {
    let dir = dir.as_ref();
    let tz = parse_timezone(timezone)?;

    let publications = read_jsonl::<RawPublication>(&dir.join(PUBLICATIONS_FILE))?
        .into_iter()
        .map(|(line, r)| {
            Ok(Publication {
                published_at: parse_time(PUBLICATIONS_FILE, line, &r.published_at)?,
                id: r.id,
                category: r.category,
                subcategory: r.subcategory,
                tags: r.tags,
                title: r.title,
                body: r.body,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let comments = read_jsonl::<RawComment>(&dir.join(COMMENTS_FILE))?
        .into_iter()
        .map(|(line, r)| {
            Ok(Comment {
                posted_at: parse_time(COMMENTS_FILE, line, &r.posted_at)?,
                id: r.id,
                publication_id: r.publication_id,
                author_id: r.author_id,
                parent_comment_id: r.parent_comment_id,
                body: r.body,
                votes_up: r.votes_up,
                votes_down: r.votes_down,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let users = read_jsonl::<User>(&dir.join(USERS_FILE))?
        .into_iter()
        .map(|(_, u)| u)
        .collect();

    Corpus::new(publications, comments, users, tz)
}

fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes the three corpus files into `dir`, creating it if needed.
pub fn write_corpus(
    dir: impl AsRef<Path>,
    publications: &[Publication],
    comments: &[Comment],
    users: &[User],
) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_jsonl(&dir.join(PUBLICATIONS_FILE), publications)?;
    write_jsonl(&dir.join(COMMENTS_FILE), comments)?;
    write_jsonl(&dir.join(USERS_FILE), users)
}
