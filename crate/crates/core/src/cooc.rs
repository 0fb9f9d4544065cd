//! Sliding-window word co-occurrence networks and their PMI-style activity
//! degree weighting.

use std::collections::HashMap;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::corpus::{Corpus, Vocabulary, WordId};
use crate::error::{Error, Result};

/// Window size used by every model unless overridden.
pub const DEFAULT_WINDOW: usize = 10;

/// Unordered pair of distinct words, stored as `(smaller, larger)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WordPair(WordId, WordId);

impl WordPair {
    /// `None` for a self pair.
    pub fn new(a: WordId, b: WordId) -> Option<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(WordPair(a, b)),
            std::cmp::Ordering::Greater => Some(WordPair(b, a)),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn first(self) -> WordId {
        self.0
    }

    pub fn second(self) -> WordId {
        self.1
    }
}

fn check_window(window: usize) -> Result<()> {
    if window < 2 {
        return Err(Error::config(format!("window size must be at least 2, got {window}")));
    }
    Ok(())
}

/// Calls `emit(pair, n)` where `n` is the number of window positions in which
/// the two token positions co-occur. A window starting at `s` covers
/// `s..s + window`; starts run over `0..=len - window`, and a document shorter
/// than the window is a single window.
fn for_each_position_pair(tokens: &[WordId], window: usize, mut emit: impl FnMut(WordPair, u64)) {
    let len = tokens.len();
    if len < 2 {
        return;
    }
    let last_start = len.saturating_sub(window);
    for j in 1..len {
        let lo_i = j.saturating_sub(window - 1);
        for i in lo_i..j {
            let Some(pair) = WordPair::new(tokens[i], tokens[j]) else {
                continue;
            };
            // starts s with s <= i and s + window > j, clipped to valid starts
            let first = (j + 1).saturating_sub(window);
            let last = i.min(last_start);
            if last >= first {
                emit(pair, (last - first + 1) as u64);
            }
        }
    }
}

/// Pair-count increments contributed by one document.
pub fn scan_windows(tokens: &[WordId], window: usize) -> Result<HashMap<WordPair, u64>> {
    check_window(window)?;
    let mut out = HashMap::new();
    for_each_position_pair(tokens, window, |p, n| *out.entry(p).or_default() += n);
    Ok(out)
}

/// Raw co-occurrence counts with per-word marginals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawCoocNetwork {
    vocab_size: usize,
    counts: HashMap<WordPair, u64>,
    node_marginal: Vec<u64>,
    total_pairs: u64,
}

impl RawCoocNetwork {
    /// Builds a network from explicit pair counts. Zero counts are dropped.
    pub fn from_counts(vocab_size: usize, counts: HashMap<WordPair, u64>) -> Result<Self> {
        let mut node_marginal = vec![0u64; vocab_size];
        let mut total_pairs = 0u64;
        let counts: HashMap<WordPair, u64> = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        for (&p, &c) in &counts {
            if p.1 as usize >= vocab_size {
                return Err(Error::config(format!(
                    "pair ({}, {}) outside vocabulary of size {vocab_size}",
                    p.0, p.1
                )));
            }
            node_marginal[p.0 as usize] += c;
            node_marginal[p.1 as usize] += c;
            total_pairs += c;
        }
        Ok(RawCoocNetwork {
            vocab_size,
            counts,
            node_marginal,
            total_pairs,
        })
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// Raw count of a pair; 0 for unseen pairs and self pairs.
    pub fn count(&self, a: WordId, b: WordId) -> u64 {
        WordPair::new(a, b)
            .and_then(|p| self.counts.get(&p).copied())
            .unwrap_or(0)
    }

    pub fn node_marginal(&self, w: WordId) -> u64 {
        self.node_marginal[w as usize]
    }

    pub fn total_pairs(&self) -> u64 {
        self.total_pairs
    }

    pub fn edge_count(&self) -> usize {
        self.counts.len()
    }

    /// Edges in ascending pair order.
    pub fn sorted_edges(&self) -> Vec<(WordPair, u64)> {
        let mut edges: Vec<_> = self.counts.iter().map(|(&p, &c)| (p, c)).collect();
        edges.sort_unstable_by_key(|&(p, _)| p);
        edges
    }
}

/// Accumulates window scans over every document of the corpus.
pub fn build_raw_network(corpus: &Corpus, window: usize) -> Result<RawCoocNetwork> {
    check_window(window)?;
    let counts = corpus
        .documents()
        .par_iter()
        .fold(HashMap::new, |mut acc: HashMap<WordPair, u64>, doc| {
            for_each_position_pair(&doc.tokens, window, |p, n| *acc.entry(p).or_default() += n);
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            let (mut big, small) = if a.len() >= b.len() { (a, b) } else { (b, std::mem::take(&mut a)) };
            for (p, c) in small {
                *big.entry(p).or_default() += c;
            }
            big
        });
    RawCoocNetwork::from_counts(corpus.vocabulary().len(), counts)
}

/// A surviving edge of the weighted network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedEdge {
    pub pair: WordPair,
    pub raw_count: u64,
    /// Activity degree in nats, always > 0.
    pub degree: f64,
}

/// The pruned network: only pairs with positive activity degree remain.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCoocNetwork {
    vocab_size: usize,
    edges: Vec<WeightedEdge>,
    lookup: HashMap<WordPair, usize>,
}

impl WeightedCoocNetwork {
    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// Surviving edges in ascending pair order.
    pub fn edges(&self) -> &[WeightedEdge] {
        &self.edges
    }

    /// Activity degree of a pair; 0 for pruned, unseen or self pairs.
    pub fn degree(&self, a: WordId, b: WordId) -> f64 {
        WordPair::new(a, b)
            .and_then(|p| self.lookup.get(&p))
            .map_or(0.0, |&i| self.edges[i].degree)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Activity degree `max(ln(p(x,y) / (p(x) p(y))), 0)` with
/// `p(x,y) = count / T` and `p(w) = marginal(w) / 2T`.
///
/// The ratio reduces to `4·count·T / (m_x·m_y)`; its sign test is done in
/// exact integer arithmetic so independent pairs come out at exactly zero.
pub fn activity_degree(count: u64, marginal_x: u64, marginal_y: u64, total_pairs: u64) -> f64 {
    let num = 4 * count as u128 * total_pairs as u128;
    let den = marginal_x as u128 * marginal_y as u128;
    if count == 0 || num <= den {
        return 0.0;
    }
    (num as f64 / den as f64).ln()
}

/// Weights every raw edge by its activity degree and drops non-positive ones.
pub fn weight_and_prune(raw: &RawCoocNetwork) -> WeightedCoocNetwork {
    if raw.total_pairs == 0 {
        log::warn!("co-occurrence network has no pairs; weighted network is empty");
    }
    let edges: Vec<WeightedEdge> = raw
        .sorted_edges()
        .into_iter()
        .filter_map(|(pair, c)| {
            let degree = activity_degree(
                c,
                raw.node_marginal(pair.0),
                raw.node_marginal(pair.1),
                raw.total_pairs,
            );
            (degree > 0.0).then_some(WeightedEdge {
                pair,
                raw_count: c,
                degree,
            })
        })
        .collect();
    let lookup = edges.iter().enumerate().map(|(i, e)| (e.pair, i)).collect();
    WeightedCoocNetwork {
        vocab_size: raw.vocab_size,
        edges,
        lookup,
    }
}

/// Writes `word_x<TAB>word_y<TAB>raw_count<TAB>degree`, one line per raw edge,
/// sorted lexically by word. Pruned edges are written with degree 0.
pub fn write_edge_list<W: Write>(
    out: &mut W,
    raw: &RawCoocNetwork,
    weighted: &WeightedCoocNetwork,
    vocab: &Vocabulary,
) -> io::Result<()> {
    let mut rows: Vec<(&str, &str, u64, f64)> = raw
        .counts
        .iter()
        .map(|(&p, &c)| {
            let (a, b) = (vocab.word(p.0), vocab.word(p.1));
            let (x, y) = if a <= b { (a, b) } else { (b, a) };
            (x, y, c, weighted.degree(p.0, p.1))
        })
        .collect();
    rows.sort_unstable_by(|l, r| (l.0, l.1).cmp(&(r.0, r.1)));
    for (x, y, c, g) in rows {
        writeln!(out, "{x}\t{y}\t{c}\t{g}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocabulary, RawCorpus};
    use std::collections::HashSet;

    fn corpus(docs: &[&str]) -> Corpus {
        let raw = RawCorpus {
            documents: docs.iter().map(|d| crate::corpus::tokenize(d)).collect(),
            labels: None,
        };
        build_vocabulary(&raw, 1, &HashSet::new()).unwrap()
    }

    fn id(c: &Corpus, w: &str) -> WordId {
        c.vocabulary().id(w).unwrap()
    }

    #[test]
    fn sliding_window_counts_adjacent_pairs_more_often() {
        // W0..W8 under a window of 8: two window positions
        let doc: Vec<WordId> = (0..9).collect();
        let m = scan_windows(&doc, 8).unwrap();
        assert_eq!(m[&WordPair::new(2, 3).unwrap()], 2);
        assert_eq!(m[&WordPair::new(0, 7).unwrap()], 1);
        assert_eq!(m[&WordPair::new(0, 1).unwrap()], 1);
        assert_eq!(m[&WordPair::new(7, 8).unwrap()], 1);
        assert!(!m.contains_key(&WordPair::new(0, 8).unwrap()));
    }

    #[test]
    fn short_document_is_one_window() {
        let m = scan_windows(&[0, 1], 10).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m[&WordPair::new(0, 1).unwrap()], 1);
    }

    #[test]
    fn repeated_tokens_skip_self_pairs() {
        // windows [a,b] and [b,a]
        let m = scan_windows(&[0, 1, 0], 2).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m[&WordPair::new(0, 1).unwrap()], 2);
    }

    #[test]
    fn degenerate_documents_yield_nothing() {
        assert!(scan_windows(&[], 3).unwrap().is_empty());
        assert!(scan_windows(&[4], 3).unwrap().is_empty());
        assert!(scan_windows(&[4, 4, 4], 3).unwrap().is_empty());
    }

    #[test]
    fn window_below_two_rejected() {
        assert!(scan_windows(&[0, 1], 1).is_err());
    }

    #[test]
    fn raw_network_from_identical_documents() {
        let c = corpus(&["a b", "a b"]);
        let net = build_raw_network(&c, 10).unwrap();
        assert_eq!(net.count(id(&c, "a"), id(&c, "b")), 2);
        assert_eq!(net.total_pairs(), 2);
    }

    #[test]
    fn raw_network_single_window_triangle() {
        let c = corpus(&["a b c"]);
        let net = build_raw_network(&c, 10).unwrap();
        let (a, b, cc) = (id(&c, "a"), id(&c, "b"), id(&c, "c"));
        assert_eq!(net.count(a, b), 1);
        assert_eq!(net.count(a, cc), 1);
        assert_eq!(net.count(b, cc), 1);
        assert_eq!(net.total_pairs(), 3);
        assert_eq!(net.node_marginal(b), 2);
        assert_eq!(net.count(a, a), 0);
    }

    #[test]
    fn independent_pair_is_pruned() {
        // 4·1·16 = 8·8, so (a, b) is exactly independent
        let mut docs = vec!["a b", "c d"];
        docs.extend(std::iter::repeat("a c").take(7));
        docs.extend(std::iter::repeat("b d").take(7));
        let c = corpus(&docs);
        let raw = build_raw_network(&c, 10).unwrap();
        assert_eq!(raw.total_pairs(), 16);
        let net = weight_and_prune(&raw);
        assert_eq!(net.degree(id(&c, "a"), id(&c, "b")), 0.0);
        assert_eq!(net.degree(id(&c, "c"), id(&c, "d")), 0.0);
        assert!((net.degree(id(&c, "a"), id(&c, "c")) - 7f64.ln()).abs() < 1e-12);
        assert_eq!(net.len(), 2);
    }

    #[test]
    fn exclusive_pair_degree_by_hand() {
        // T = 4, count(a,b) = 2, m_a = m_b = 2: p(a,b) = 1/2, p(a) = p(b) = 1/4
        let c = corpus(&["a b", "a b", "c d", "c d"]);
        let net = weight_and_prune(&build_raw_network(&c, 10).unwrap());
        let expected = (0.5f64).ln() - (0.25f64).ln() - (0.25f64).ln();
        assert!((net.degree(id(&c, "a"), id(&c, "b")) - expected).abs() < 1e-12);
        assert_eq!(net.degree(id(&c, "a"), id(&c, "c")), 0.0);
    }

    #[test]
    fn anti_correlated_pair_is_pruned() {
        let mut docs = vec!["a b", "c d"];
        docs.extend(std::iter::repeat("a c").take(9));
        docs.extend(std::iter::repeat("b d").take(9));
        let c = corpus(&docs);
        let raw = build_raw_network(&c, 10).unwrap();
        let (a, b) = (id(&c, "a"), id(&c, "b"));
        assert_eq!(raw.count(a, b), 1);
        assert!(4 * raw.total_pairs() < raw.node_marginal(a) * raw.node_marginal(b));
        assert_eq!(weight_and_prune(&raw).degree(a, b), 0.0);
    }

    #[test]
    fn empty_network_weights_to_empty() {
        let c = corpus(&["a", "b"]);
        let raw = build_raw_network(&c, 10).unwrap();
        assert_eq!(raw.total_pairs(), 0);
        assert!(weight_and_prune(&raw).is_empty());
    }

    #[test]
    fn edge_list_is_lexically_sorted() {
        let c = corpus(&["zebra apple", "apple mango zebra"]);
        let raw = build_raw_network(&c, 10).unwrap();
        let net = weight_and_prune(&raw);
        let mut buf = Vec::new();
        write_edge_list(&mut buf, &raw, &net, c.vocabulary()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("apple\tmango\t1\t"));
        assert!(lines[1].starts_with("apple\tzebra\t2\t"));
        assert!(lines[2].starts_with("mango\tzebra\t1\t"));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn docs() -> impl Strategy<Value = Vec<Vec<WordId>>> {
            prop::collection::vec(prop::collection::vec(0u32..12, 0..15), 1..20)
        }

        fn net_of(docs: &[Vec<WordId>], window: usize) -> RawCoocNetwork {
            let mut counts = HashMap::new();
            for d in docs {
                for (p, c) in scan_windows(d, window).unwrap() {
                    *counts.entry(p).or_default() += c;
                }
            }
            RawCoocNetwork::from_counts(12, counts).unwrap()
        }

        proptest! {
            #[test]
            fn marginals_are_consistent(docs in docs(), window in 2usize..12) {
                let net = net_of(&docs, window);
                let sum: u64 = (0..12).map(|w| net.node_marginal(w)).sum();
                prop_assert_eq!(sum, 2 * net.total_pairs());
            }

            #[test]
            fn degrees_survive_duplication(docs in docs(), window in 2usize..12) {
                let once = weight_and_prune(&net_of(&docs, window));
                let doubled: Vec<_> = docs.iter().chain(docs.iter()).cloned().collect();
                let twice = weight_and_prune(&net_of(&doubled, window));
                prop_assert_eq!(once.len(), twice.len());
                for (a, b) in once.edges().iter().zip(twice.edges()) {
                    prop_assert_eq!(a.pair, b.pair);
                    prop_assert!((a.degree - b.degree).abs() < 1e-12);
                }
            }

            #[test]
            fn stored_degrees_positive_and_symmetric(docs in docs(), window in 2usize..12) {
                let net = weight_and_prune(&net_of(&docs, window));
                for e in net.edges() {
                    prop_assert!(e.degree > 0.0);
                    prop_assert_eq!(net.degree(e.pair.first(), e.pair.second()),
                                    net.degree(e.pair.second(), e.pair.first()));
                }
            }
        }
    }
}
