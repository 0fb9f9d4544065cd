//! Synthetic unbalanced corpora with a known topic structure.
//!
//! Each topic owns a block of `vocab_per_topic` words. A token is drawn from a
//! shared pool of common words with probability `overlap_fraction` and from
//! the document's own topic block otherwise, uniformly in both cases.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::RawCorpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub abundant_topics: usize,
    pub scarce_topics: usize,
    pub docs_per_abundant: usize,
    pub docs_per_scarce: usize,
    pub vocab_per_topic: usize,
    pub doc_len: usize,
    pub overlap_fraction: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Two abundant topics of 500 documents, two scarce topics of 25, with
    /// nearly disjoint vocabularies.
    pub fn unbalanced_preset() -> Self {
        SyntheticSpec {
            abundant_topics: 2,
            scarce_topics: 2,
            docs_per_abundant: 500,
            docs_per_scarce: 25,
            vocab_per_topic: 40,
            doc_len: 10,
            overlap_fraction: 0.1,
            seed: 2024,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("abundant_topics", self.abundant_topics),
            ("scarce_topics", self.scarce_topics),
            ("docs_per_abundant", self.docs_per_abundant),
            ("docs_per_scarce", self.docs_per_scarce),
            ("vocab_per_topic", self.vocab_per_topic),
            ("doc_len", self.doc_len),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::config(format!("{name} must be at least 1")));
        }
        if !(0.0..1.0).contains(&self.overlap_fraction) {
            return Err(Error::config(format!(
                "overlap_fraction must lie in [0, 1), got {}",
                self.overlap_fraction
            )));
        }
        Ok(())
    }

    /// Topic labels, abundant first.
    pub fn labels(&self) -> Vec<String> {
        (0..self.abundant_topics)
            .map(|i| format!("abundant_{i}"))
            .chain((0..self.scarce_topics).map(|i| format!("scarce_{i}")))
            .collect()
    }

    pub fn generate(&self) -> Result<RawCorpus> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let labels = self.labels();
        let mut docs: Vec<(Vec<String>, String)> = Vec::new();
        for (t, label) in labels.iter().enumerate() {
            let n = if t < self.abundant_topics {
                self.docs_per_abundant
            } else {
                self.docs_per_scarce
            };
            for _ in 0..n {
                let words = (0..self.doc_len)
                    .map(|_| {
                        let i = rng.random_range(0..self.vocab_per_topic);
                        if self.overlap_fraction > 0.0 && rng.random::<f64>() < self.overlap_fraction {
                            format!("common_w{i}")
                        } else {
                            format!("{label}_w{i}")
                        }
                    })
                    .collect();
                docs.push((words, label.clone()));
            }
        }
        docs.shuffle(&mut rng);
        let (documents, labels) = docs.into_iter().unzip();
        Ok(RawCorpus {
            documents,
            labels: Some(labels),
        })
    }
}

/// Writes a raw corpus as `corpus.txt` and, if labeled, `labels.txt` under `dir`.
pub fn write_corpus(raw: &RawCorpus, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut text = String::new();
    for d in &raw.documents {
        text.push_str(&d.join(" "));
        text.push('\n');
    }
    let path = dir.join("corpus.txt");
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    if let Some(labels) = &raw.labels {
        let mut text = labels.join("\n");
        text.push('\n');
        let path = dir.join("labels.txt");
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocabulary, load_corpus, split_unbalanced};
    use std::collections::HashSet;

    fn small(overlap: f64) -> SyntheticSpec {
        SyntheticSpec {
            abundant_topics: 2,
            scarce_topics: 2,
            docs_per_abundant: 500,
            docs_per_scarce: 25,
            vocab_per_topic: 20,
            doc_len: 10,
            overlap_fraction: overlap,
            seed: 3,
        }
    }

    #[test]
    fn split_sizes_follow_construction() {
        let raw = small(0.0).generate().unwrap();
        let c = build_vocabulary(&raw, 1, &HashSet::new()).unwrap();
        let (s, a) = split_unbalanced(&c, 25).unwrap();
        assert_eq!(s.len(), 50);
        assert_eq!(a.len(), 1000);
    }

    #[test]
    fn disjoint_blocks_without_overlap() {
        let raw = small(0.0).generate().unwrap();
        for (doc, label) in raw.documents.iter().zip(raw.labels.as_ref().unwrap()) {
            assert_eq!(doc.len(), 10);
            assert!(doc.iter().all(|w| w.starts_with(&format!("{label}_w"))));
        }
    }

    #[test]
    fn overlap_draws_from_common_pool() {
        let raw = small(0.5).generate().unwrap();
        let common = raw.documents.iter().flatten().filter(|w| w.starts_with("common_")).count();
        let total: usize = raw.documents.iter().map(Vec::len).sum();
        let frac = common as f64 / total as f64;
        assert!((frac - 0.5).abs() < 0.03, "{frac}");
    }

    #[test]
    fn seeded_files_are_identical() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        write_corpus(&small(0.1).generate().unwrap(), a.path()).unwrap();
        write_corpus(&small(0.1).generate().unwrap(), b.path()).unwrap();
        for f in ["corpus.txt", "labels.txt"] {
            assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
        }
        let back = load_corpus(&a.path().join("corpus.txt"), Some(&a.path().join("labels.txt"))).unwrap();
        assert_eq!(back, small(0.1).generate().unwrap());
    }

    #[test]
    fn invalid_parameters_rejected() {
        let mut s = small(0.0);
        s.docs_per_scarce = 0;
        assert!(s.generate().is_err());
        assert!(small(1.0).generate().is_err());
        assert!(small(-0.1).generate().is_err());
    }
}
