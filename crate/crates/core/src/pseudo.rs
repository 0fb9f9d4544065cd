//! Turning a co-occurrence network into pseudo-documents: one per word, made
//! of that word's neighbors repeated by edge multiplicity.

use std::io::{self, Write};

use crate::cooc::{RawCoocNetwork, WeightedCoocNetwork, WordPair};
use crate::corpus::{Vocabulary, WordId};
use crate::error::{Error, Result};

/// Scale applied to activity degrees before rounding to multiplicities.
pub const DEFAULT_SCALE: f64 = 10.0;

/// Pseudo-document `i` is the adjacency list of word `i`, neighbors sorted by
/// id and each repeated contiguously by its multiplicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoCorpus {
    docs: Vec<Vec<WordId>>,
}

impl PseudoCorpus {
    fn from_edges(vocab_size: usize, edges: impl IntoIterator<Item = (WordPair, u64)>) -> Self {
        let mut adjacency: Vec<Vec<(WordId, u64)>> = vec![Vec::new(); vocab_size];
        for (pair, m) in edges {
            adjacency[pair.first() as usize].push((pair.second(), m));
            adjacency[pair.second() as usize].push((pair.first(), m));
        }
        let docs = adjacency
            .into_iter()
            .map(|mut nbrs| {
                nbrs.sort_unstable_by_key(|&(w, _)| w);
                nbrs.into_iter()
                    .flat_map(|(w, m)| std::iter::repeat_n(w, m as usize))
                    .collect()
            })
            .collect();
        PseudoCorpus { docs }
    }

    /// Number of pseudo-documents, which equals the vocabulary size.
    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn doc(&self, word: WordId) -> &[WordId] {
        &self.docs[word as usize]
    }

    pub fn docs(&self) -> &[Vec<WordId>] {
        &self.docs
    }

    /// Multiplicity of `neighbor` in the pseudo-document of `word`.
    pub fn multiplicity(&self, word: WordId, neighbor: WordId) -> usize {
        let d = self.doc(word);
        let start = d.partition_point(|&w| w < neighbor);
        d[start..].iter().take_while(|&&w| w == neighbor).count()
    }

    pub fn token_count(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }

    /// Writes one pseudo-document per line in the corpus text format.
    pub fn write_text<W: Write>(&self, out: &mut W, vocab: &Vocabulary) -> io::Result<()> {
        for doc in &self.docs {
            let mut first = true;
            for &w in doc {
                if !first {
                    out.write_all(b" ")?;
                }
                out.write_all(vocab.word(w).as_bytes())?;
                first = false;
            }
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Multiplicity `max(round(scale · degree), 1)` for a surviving edge.
pub fn multiplicity(degree: f64, scale: f64) -> u64 {
    ((scale * degree).round() as u64).max(1)
}

/// Pseudo-documents for the PMI-weighted model.
pub fn from_weighted_network(net: &WeightedCoocNetwork, scale: f64) -> Result<PseudoCorpus> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::config(format!("pseudo-document scale must be positive, got {scale}")));
    }
    Ok(PseudoCorpus::from_edges(
        net.vocab_size(),
        net.edges().iter().map(|e| (e.pair, multiplicity(e.degree, scale))),
    ))
}

/// Pseudo-documents for the raw-count baseline: multiplicity is the raw count.
pub fn from_raw_network(net: &RawCoocNetwork) -> PseudoCorpus {
    PseudoCorpus::from_edges(net.vocab_size(), net.sorted_edges())
}
