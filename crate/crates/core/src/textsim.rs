//! TF-IDF vectors and cosine similarity between comments and publications.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use unicode_segmentation::UnicodeSegmentation;

use crate::corpus::{Corpus, Publication};
use crate::error::{Error, Result};

const VOCABULARY_HEADER: &str = "# trollscope-vocabulary v1";

/// Case-folded Unicode words; punctuation is dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.unicode_words().map(|w| w.to_lowercase()).collect()
}

/// Text of a publication as used for similarity: title, body, then tags.
pub fn publication_text(p: &Publication) -> String {
    let mut s = String::with_capacity(p.title.len() + p.body.len() + 16);
    s.push_str(&p.title);
    s.push('\n');
    s.push_str(&p.body);
    for t in &p.tags {
        s.push('\n');
        s.push_str(t);
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    index: HashMap<String, usize>,
    terms: Vec<String>,
    document_frequency: Vec<u64>,
    documents: u64,
}

impl Vocabulary {
    /// Counts, for each term, the number of documents containing it.
    ///
    /// Term indices follow lexicographic term order.
    pub fn fit<D, T>(documents: D) -> Result<Self>
    where
        D: IntoIterator<Item = T>,
        T: AsRef<[String]>,
    {
        let mut df: BTreeMap<String, u64> = BTreeMap::new();
        let mut n = 0u64;
        for doc in documents {
            let doc = doc.as_ref();
            n += 1;
            let mut seen: Vec<&str> = doc.iter().map(String::as_str).collect();
            seen.sort_unstable();
            seen.dedup();
            for t in &seen {
                match df.get_mut(*t) {
                    Some(c) => *c += 1,
                    None => {
                        df.insert(t.to_string(), 1);
                    }
                }
            }
        }
        if n == 0 {
            return Err(Error::EmptyDocuments);
        }
        Ok(Self::from_counts(df.into_iter().collect(), n))
    }

    /// Fits on every publication and comment of a corpus.
    pub fn fit_corpus(corpus: &Corpus) -> Result<Self> {
        let docs = corpus
            .publications()
            .iter()
            .map(|p| tokenize(&publication_text(p)))
            .chain(corpus.comments().iter().map(|c| tokenize(&c.body)));
        Self::fit(docs)
    }

    fn from_counts(mut pairs: Vec<(String, u64)>, documents: u64) -> Self {
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let (terms, document_frequency): (Vec<String>, Vec<u64>) = pairs.into_iter().unzip();
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            index,
            terms,
            document_frequency,
            documents,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn documents(&self) -> u64 {
        self.documents
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn df(&self, term: &str) -> Option<u64> {
        self.index_of(term).map(|i| self.document_frequency[i])
    }

    /// Smoothed inverse document frequency `ln((1+N)/(1+df)) + 1`.
    pub fn idf_at(&self, index: usize) -> f64 {
        let n = self.documents as f64;
        let df = self.document_frequency[index] as f64;
        ((1.0 + n) / (1.0 + df)).ln() + 1.0
    }

    /// Raw term count times smoothed IDF; unknown tokens are dropped.
    pub fn vectorize(&self, tokens: &[String]) -> SparseVector {
        let mut tf: BTreeMap<usize, u64> = BTreeMap::new();
        for t in tokens {
            if let Some(i) = self.index_of(t) {
                *tf.entry(i).or_default() += 1;
            }
        }
        SparseVector {
            entries: tf
                .into_iter()
                .map(|(i, c)| (i, c as f64 * self.idf_at(i)))
                .collect(),
        }
    }

    /// Serialized form: a version header, `N<TAB>count`, then `term<TAB>df`
    /// lines in index order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{VOCABULARY_HEADER}");
        let _ = writeln!(s, "N\t{}", self.documents);
        for (t, df) in self.terms.iter().zip(&self.document_frequency) {
            let _ = writeln!(s, "{t}\t{df}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |m: String| Error::VocabularyFormat(m);
        let mut lines = text.lines();
        if lines.next() != Some(VOCABULARY_HEADER) {
            return Err(bad(format!("missing header {VOCABULARY_HEADER:?}")));
        }
        let n = lines
            .next()
            .and_then(|l| l.strip_prefix("N\t"))
            .and_then(|v| v.parse::<u64>().ok())
            .ok_or_else(|| bad("missing document count line".into()))?;
        let mut pairs = Vec::new();
        for (i, line) in lines.enumerate() {
            let (t, df) = line
                .split_once('\t')
                .ok_or_else(|| bad(format!("line {}: expected term<TAB>df", i + 3)))?;
            let df: u64 = df
                .parse()
                .map_err(|_| bad(format!("line {}: bad df {df:?}", i + 3)))?;
            if df == 0 || df > n {
                return Err(bad(format!("line {}: df {df} outside 1..={n}", i + 3)));
            }
            pairs.push((t.to_string(), df));
        }
        if n == 0 {
            return Err(bad("document count must be positive".into()));
        }
        Ok(Self::from_counts(pairs, n))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

/// Sorted `(index, weight)` pairs with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    /// Sorts by index and sums duplicate indices.
    pub fn new(mut entries: Vec<(usize, f64)>) -> Self {
        entries.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (i, w) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += w,
                _ => merged.push((i, w)),
            }
        }
        SparseVector { entries: merged }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn scaled(&self, c: f64) -> SparseVector {
        SparseVector {
            entries: self.entries.iter().map(|&(i, w)| (i, w * c)).collect(),
        }
    }
}

/// Cosine similarity; 0 when either vector has zero norm.
///
/// The denominator is `sqrt(|a|² |b|²)`, which makes `cosine(v, v)` exactly
/// 1. The result is clamped to `[0, 1]` since weights are non-negative.
pub fn cosine(a: &SparseVector, b: &SparseVector) -> f64 {
    let (sa, sb) = (a.dot(a), b.dot(b));
    if sa == 0.0 || sb == 0.0 {
        return 0.0;
    }
    (a.dot(b) / (sa * sb).sqrt()).clamp(0.0, 1.0)
}
