//! Point estimates of the topic-word (`phi`) and document-topic (`theta`)
//! distributions, and their text dumps.

use std::io::{self, Write};

use crate::corpus::{Vocabulary, WordId};

/// `phi` is `K × V` and `theta` is `D × K`, both row-major and row-stochastic.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    topics: usize,
    vocab_size: usize,
    phi: Vec<f64>,
    theta: Vec<f64>,
    trained: Vec<bool>,
}

impl TopicModel {
    pub(crate) fn new(
        topics: usize,
        vocab_size: usize,
        phi: Vec<f64>,
        theta: Vec<f64>,
        trained: Vec<bool>,
    ) -> Self {
        debug_assert_eq!(phi.len(), topics * vocab_size);
        debug_assert_eq!(theta.len(), trained.len() * topics);
        TopicModel {
            topics,
            vocab_size,
            phi,
            theta,
            trained,
        }
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn documents(&self) -> usize {
        self.trained.len()
    }

    pub fn phi(&self, topic: usize) -> &[f64] {
        &self.phi[topic * self.vocab_size..(topic + 1) * self.vocab_size]
    }

    pub fn theta(&self, doc: usize) -> &[f64] {
        &self.theta[doc * self.topics..(doc + 1) * self.topics]
    }

    /// Whether document `doc` had any tokens during training. Untrained rows
    /// carry the prior-only (uniform) theta.
    pub fn is_trained(&self, doc: usize) -> bool {
        self.trained[doc]
    }

    /// The `n` most probable words of a topic, highest first; ties by id.
    pub fn top_words(&self, topic: usize, n: usize) -> Vec<(WordId, f64)> {
        let mut ranked: Vec<(WordId, f64)> = self
            .phi(topic)
            .iter()
            .enumerate()
            .map(|(w, &p)| (w as WordId, p))
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked.truncate(n);
        ranked
    }

    pub(crate) fn add_scaled(&mut self, other: &TopicModel, weight: f64) {
        for (a, b) in self.phi.iter_mut().zip(&other.phi) {
            *a += weight * b;
        }
        for (a, b) in self.theta.iter_mut().zip(&other.theta) {
            *a += weight * b;
        }
    }

    pub(crate) fn zeroed_like(other: &TopicModel) -> Self {
        TopicModel {
            phi: vec![0.0; other.phi.len()],
            theta: vec![0.0; other.theta.len()],
            ..other.clone()
        }
    }

    /// One topic per line: `topic_<k>` followed by its top words.
    pub fn write_top_words<W: Write>(&self, out: &mut W, vocab: &Vocabulary, n: usize) -> io::Result<()> {
        for k in 0..self.topics {
            write!(out, "topic_{k}")?;
            for (w, _) in self.top_words(k, n) {
                write!(out, " {}", vocab.word(w))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// `phi` as CSV: a `K=..,V=..,D=..` header line, then one row per topic.
    pub fn write_phi_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        self.write_header(out)?;
        write_rows(out, &self.phi, self.vocab_size)
    }

    /// `theta` as CSV: a `K=..,V=..,D=..` header line, then one row per document.
    pub fn write_theta_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        self.write_header(out)?;
        write_rows(out, &self.theta, self.topics)
    }

    fn write_header<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "K={},V={},D={}", self.topics, self.vocab_size, self.documents())
    }
}

fn write_rows<W: Write>(out: &mut W, values: &[f64], width: usize) -> io::Result<()> {
    for row in values.chunks(width.max(1)) {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.write_all(b",")?;
            }
            write!(out, "{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let m = TopicModel::new(2, 3, vec![0.5, 0.25, 0.25, 0.2, 0.2, 0.6], vec![0.9, 0.1], vec![true]);
        let mut buf = Vec::new();
        m.write_phi_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "K=2,V=3,D=1\n0.5,0.25,0.25\n0.2,0.2,0.6\n");
        let mut buf = Vec::new();
        m.write_theta_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "K=2,V=3,D=1\n0.9,0.1\n");
    }

    #[test]
    fn top_words_ranked_with_id_tiebreak() {
        let m = TopicModel::new(1, 4, vec![0.1, 0.4, 0.1, 0.4], vec![], vec![]);
        let ids: Vec<WordId> = m.top_words(0, 3).into_iter().map(|(w, _)| w).collect();
        assert_eq!(ids, vec![1, 3, 0]);
        let vocab = Vocabulary::from_counts(["a", "b", "c", "d"].map(|w| (w.to_string(), 1)));
        let mut buf = Vec::new();
        m.write_top_words(&mut buf, &vocab, 2).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "topic_0 b d\n");
    }
}
