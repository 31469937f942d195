//! Small constructors shared by unit tests.

use chrono::{DateTime, Utc};
use chrono_tz::Tz;

use crate::corpus::{Comment, Corpus, Publication, User};

pub fn ts(s: &str) -> DateTime<Utc> {
    DateTime::parse_from_rfc3339(s).unwrap().with_timezone(&Utc)
}

pub fn publication(id: &str, at: &str) -> Publication {
    Publication {
        id: id.into(),
        category: "Bulgaria".into(),
        subcategory: "Politics".into(),
        tags: vec![],
        title: format!("title {id}"),
        body: String::new(),
        published_at: ts(at),
    }
}

pub fn user(id: &str) -> User {
    User {
        id: id.into(),
        display_name: format!("name-{id}"),
    }
}

pub struct C<'a> {
    pub id: &'a str,
    pub publication: &'a str,
    pub author: &'a str,
    pub parent: Option<&'a str>,
    pub at: &'a str,
    pub up: u32,
    pub down: u32,
    pub body: &'a str,
}

impl Default for C<'_> {
    fn default() -> Self {
        C {
            id: "c",
            publication: "p1",
            author: "u1",
            parent: None,
            at: "2013-01-01T10:00:00Z",
            up: 0,
            down: 0,
            body: "",
        }
    }
}

impl C<'_> {
    pub fn build(&self) -> Comment {
        Comment {
            id: self.id.into(),
            publication_id: self.publication.into(),
            author_id: self.author.into(),
            parent_comment_id: self.parent.map(Into::into),
            body: self.body.into(),
            posted_at: ts(self.at),
            votes_up: self.up,
            votes_down: self.down,
        }
    }
}

pub fn corpus(pubs: Vec<Publication>, comments: Vec<Comment>, users: Vec<User>) -> Corpus {
    Corpus::new(pubs, comments, users, "UTC".parse::<Tz>().unwrap()).unwrap()
}
