//! Loading, tokenizing, filtering and splitting labeled short-text corpora.
//!
//! A corpus on disk is a text file with one whitespace-tokenized document per
//! line and an optional label file with one label per line. Documents that end
//! up with no tokens after filtering are kept (and reported as empty) so that
//! document indices stay aligned with the label file.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense word identifier, `0..V`.
pub type WordId = u32;

const ENGLISH_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

/// Unfiltered documents as string tokens, paired with optional labels.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawCorpus {
    pub documents: Vec<Vec<String>>,
    pub labels: Option<Vec<String>>,
}

impl RawCorpus {
    /// Indices of documents that had no tokens at all in the source file.
    pub fn empty_lines(&self) -> Vec<usize> {
        self.documents
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_empty())
            .map(|(i, _)| i)
            .collect()
    }
}

/// Lowercased whitespace tokenization.
pub fn tokenize(line: &str) -> Vec<String> {
    line.split_whitespace().map(str::to_lowercase).collect()
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut lines = Vec::new();
    for (idx, raw) in bytes.split(|&b| b == b'\n').enumerate() {
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        let line = std::str::from_utf8(raw).map_err(|_| Error::InvalidUtf8 {
            path: path.to_path_buf(),
            line: idx + 1,
        })?;
        lines.push(line.to_owned());
    }
    // A trailing newline terminates the last line rather than opening a new one.
    if bytes.ends_with(b"\n") || bytes.is_empty() {
        lines.pop();
    }
    Ok(lines)
}

/// Reads a corpus file and, when given, its aligned label file.
pub fn load_corpus(text_path: &Path, label_path: Option<&Path>) -> Result<RawCorpus> {
    let documents: Vec<Vec<String>> = read_lines(text_path)?
        .iter()
        .map(|l| tokenize(l))
        .collect();
    let labels = match label_path {
        Some(p) => {
            let labels: Vec<String> = read_lines(p)?
                .into_iter()
                .map(|l| l.trim().to_owned())
                .collect();
            if labels.len() != documents.len() {
                return Err(Error::LabelCountMismatch {
                    documents: documents.len(),
                    labels: labels.len(),
                });
            }
            Some(labels)
        }
        None => None,
    };
    let raw = RawCorpus { documents, labels };
    let empty = raw.empty_lines().len();
    if empty > 0 {
        log::warn!("{}: {empty} empty document(s)", text_path.display());
    }
    Ok(raw)
}

/// The shipped English stopword list.
pub fn english_stopwords() -> HashSet<String> {
    parse_stopwords(ENGLISH_STOPWORDS)
}

pub fn load_stopwords(path: &Path) -> Result<HashSet<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_stopwords(&text))
}

fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect()
}

/// Word ↔ id bijection with corpus frequencies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    frequencies: Vec<u64>,
    index: HashMap<String, WordId>,
}

impl Vocabulary {
    /// Builds a vocabulary from `(word, frequency)` pairs; ids follow input order.
    pub fn from_counts(counts: impl IntoIterator<Item = (String, u64)>) -> Self {
        let (words, frequencies): (Vec<_>, Vec<_>) = counts.into_iter().unzip();
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as WordId))
            .collect();
        Vocabulary {
            words,
            frequencies,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<WordId> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: WordId) -> &str {
        &self.words[id as usize]
    }

    pub fn frequency(&self, id: WordId) -> u64 {
        self.frequencies[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

/// A filtered document: word ids in original order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: usize,
    pub tokens: Vec<WordId>,
    pub label: Option<String>,
}

impl Document {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Multiplicity of `word` in this document.
    pub fn count(&self, word: WordId) -> usize {
        self.tokens.iter().filter(|&&t| t == word).count()
    }
}

/// Filtered documents sharing one vocabulary.
///
/// `Document::id` is the document's line index in the source corpus and is
/// preserved by [`split_unbalanced`], so subsets can be matched back to
/// per-document results computed on the full corpus.
#[derive(Debug, Clone)]
pub struct Corpus {
    documents: Vec<Document>,
    vocabulary: Arc<Vocabulary>,
}

impl Corpus {
    /// Assembles a corpus from already-encoded documents.
    pub fn new(documents: Vec<Document>, vocabulary: Arc<Vocabulary>) -> Result<Self> {
        let v = vocabulary.len();
        if let Some(d) = documents
            .iter()
            .find(|d| d.tokens.iter().any(|&t| t as usize >= v))
        {
            return Err(Error::config(format!(
                "document {} references a word id outside the vocabulary of size {v}",
                d.id
            )));
        }
        let labeled = documents.iter().filter(|d| d.label.is_some()).count();
        if labeled != 0 && labeled != documents.len() {
            return Err(Error::Unlabeled {
                labeled,
                documents: documents.len(),
            });
        }
        Ok(Corpus {
            documents,
            vocabulary,
        })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn shared_vocabulary(&self) -> Arc<Vocabulary> {
        Arc::clone(&self.vocabulary)
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn is_labeled(&self) -> bool {
        !self.documents.is_empty() && self.documents.iter().all(|d| d.label.is_some())
    }

    /// Distinct labels in lexical order.
    pub fn label_set(&self) -> Vec<String> {
        self.documents
            .iter()
            .filter_map(|d| d.label.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Per-document labels; fails if any document is unlabeled.
    pub fn labels(&self) -> Result<Vec<&str>> {
        let labels: Vec<&str> = self
            .documents
            .iter()
            .filter_map(|d| d.label.as_deref())
            .collect();
        if labels.len() != self.documents.len() || labels.is_empty() {
            return Err(Error::Unlabeled {
                labeled: labels.len(),
                documents: self.documents.len(),
            });
        }
        Ok(labels)
    }

    pub fn empty_documents(&self) -> usize {
        self.documents.iter().filter(|d| d.is_empty()).count()
    }

    pub fn token_count(&self) -> usize {
        self.documents.iter().map(Document::len).sum()
    }

    /// Decodes back to string tokens.
    pub fn to_raw(&self) -> RawCorpus {
        let documents = self
            .documents
            .iter()
            .map(|d| {
                d.tokens
                    .iter()
                    .map(|&t| self.vocabulary.word(t).to_owned())
                    .collect()
            })
            .collect();
        let labels = self
            .is_labeled()
            .then(|| self.documents.iter().filter_map(|d| d.label.clone()).collect());
        RawCorpus { documents, labels }
    }
}

/// Removes rare words and stopwords, then assigns dense ids in lexical order.
pub fn build_vocabulary(
    raw: &RawCorpus,
    min_count: u64,
    stopwords: &HashSet<String>,
) -> Result<Corpus> {
    if min_count < 1 {
        return Err(Error::config("min_count must be at least 1"));
    }
    let mut freq: BTreeMap<&str, u64> = BTreeMap::new();
    for doc in &raw.documents {
        for tok in doc {
            *freq.entry(tok.as_str()).or_default() += 1;
        }
    }
    let vocabulary = Vocabulary::from_counts(
        freq.into_iter()
            .filter(|&(w, c)| c >= min_count && !stopwords.contains(w))
            .map(|(w, c)| (w.to_owned(), c)),
    );

    let documents: Vec<Document> = raw
        .documents
        .iter()
        .enumerate()
        .map(|(i, doc)| Document {
            id: i,
            tokens: doc.iter().filter_map(|t| vocabulary.id(t)).collect(),
            label: raw.labels.as_ref().map(|l| l[i].clone()),
        })
        .collect();

    let corpus = Corpus::new(documents, Arc::new(vocabulary))?;
    if corpus.token_count() == 0 {
        log::warn!("every document is empty after vocabulary filtering");
    } else if corpus.empty_documents() > 0 {
        log::warn!(
            "{} document(s) empty after vocabulary filtering",
            corpus.empty_documents()
        );
    }
    Ok(corpus)
}

/// Splits a labeled corpus by topic size: labels with at most
/// `scarce_threshold` documents form the scarce subset, the rest the abundant
/// one. Both subsets keep the full vocabulary and original document ids.
pub fn split_unbalanced(corpus: &Corpus, scarce_threshold: usize) -> Result<(Corpus, Corpus)> {
    let labels = corpus.labels()?;
    let mut sizes: HashMap<&str, usize> = HashMap::new();
    for &l in &labels {
        *sizes.entry(l).or_default() += 1;
    }
    let (scarce, abundant): (Vec<Document>, Vec<Document>) = corpus
        .documents
        .iter()
        .cloned()
        .partition(|d| sizes[d.label.as_deref().unwrap_or_default()] <= scarce_threshold);
    Ok((
        Corpus {
            documents: scarce,
            vocabulary: corpus.shared_vocabulary(),
        },
        Corpus {
            documents: abundant,
            vocabulary: corpus.shared_vocabulary(),
        },
    ))
}

/// Named datasets with their scarce/abundant split thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetPreset {
    GoogleNews,
    SearchSnippets,
    Tweet,
    Synthetic,
}

impl DatasetPreset {
    /// Largest per-topic document count that still counts as scarce.
    pub fn scarce_threshold(self) -> usize {
        match self {
            DatasetPreset::GoogleNews => 80,
            // strictly fewer than 1200 documents
            DatasetPreset::SearchSnippets => 1199,
            DatasetPreset::Tweet => 15,
            DatasetPreset::Synthetic => 25,
        }
    }

    /// Number of gold topics in the full dataset.
    pub fn topics(self) -> usize {
        match self {
            DatasetPreset::GoogleNews => 152,
            DatasetPreset::SearchSnippets => 8,
            DatasetPreset::Tweet => 89,
            DatasetPreset::Synthetic => 4,
        }
    }
}

impl FromStr for DatasetPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "googlenews" => Ok(DatasetPreset::GoogleNews),
            "searchsnippets" => Ok(DatasetPreset::SearchSnippets),
            "tweet" => Ok(DatasetPreset::Tweet),
            "synthetic" => Ok(DatasetPreset::Synthetic),
            other => Err(Error::config(format!("unknown dataset preset `{other}`"))),
        }
    }
}
