//! Document topic proportions and hard cluster assignment.
//!
//! For the network models a document's topic mixture is the frequency-weighted
//! average of its words' pseudo-document topic rows:
//! `P(z|d) = Σ_w θ_{w,z} · n_d(w) / Len(d)`.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::corpus::{Corpus, WordId};
use crate::model::TopicModel;

#[derive(Debug, Clone, PartialEq)]
pub struct DocTopicDistribution {
    pub probs: Vec<f64>,
    pub cluster: usize,
}

impl DocTopicDistribution {
    pub fn new(probs: Vec<f64>) -> Self {
        let cluster = assign_cluster(&probs);
        DocTopicDistribution { probs, cluster }
    }

    fn uniform(k: usize) -> Self {
        Self::new(vec![1.0 / k as f64; k])
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn assign_cluster(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = i;
        }
    }
    best
}

/// Topic mixture of a document under a model trained on pseudo-documents,
/// where theta row `w` belongs to word `w`.
///
/// Words whose pseudo-document was empty during training are skipped and the
/// mixture renormalized over the rest; a document with no usable words gets
/// the uniform vector.
pub fn doc_topics(tokens: &[WordId], model: &TopicModel) -> DocTopicDistribution {
    let k = model.topics();
    let mut probs = vec![0.0; k];
    let mut used = 0usize;
    for &w in tokens {
        let w = w as usize;
        if w >= model.documents() || !model.is_trained(w) {
            continue;
        }
        for (p, &t) in probs.iter_mut().zip(model.theta(w)) {
            *p += t;
        }
        used += 1;
    }
    if used == 0 {
        return DocTopicDistribution::uniform(k);
    }
    let n = used as f64;
    probs.iter_mut().for_each(|p| *p /= n);
    DocTopicDistribution::new(probs)
}

/// Clusters every corpus document through its words' topic rows.
pub fn cluster_via_words(corpus: &Corpus, model: &TopicModel) -> Vec<usize> {
    corpus
        .documents()
        .par_iter()
        .map(|d| doc_topics(&d.tokens, model).cluster)
        .collect()
}

/// Clusters training documents by their own theta rows (the LDA path).
pub fn cluster_via_theta(model: &TopicModel) -> Vec<usize> {
    (0..model.documents())
        .map(|d| assign_cluster(model.theta(d)))
        .collect()
}

/// Folds an unseen document into an LDA model: each word contributes its
/// topic posterior `φ(z,w) / Σ_z' φ(z',w)` and contributions are averaged by
/// frequency, as for the network models.
pub fn fold_in(tokens: &[WordId], model: &TopicModel) -> DocTopicDistribution {
    let k = model.topics();
    let mut probs = vec![0.0; k];
    let mut used = 0usize;
    for &w in tokens {
        let w = w as usize;
        if w >= model.vocab_size() {
            continue;
        }
        let col: Vec<f64> = (0..k).map(|t| model.phi(t)[w]).collect();
        let norm: f64 = col.iter().sum();
        for (p, c) in probs.iter_mut().zip(col) {
            *p += c / norm;
        }
        used += 1;
    }
    if used == 0 {
        return DocTopicDistribution::uniform(k);
    }
    let n = used as f64;
    probs.iter_mut().for_each(|p| *p /= n);
    DocTopicDistribution::new(probs)
}

/// Writes `doc_id,cluster,label` rows for every corpus document.
pub fn write_assignments<W: Write>(out: &mut W, corpus: &Corpus, clusters: &[usize]) -> io::Result<()> {
    writeln!(out, "doc_id,cluster,label")?;
    for (d, c) in corpus.documents().iter().zip(clusters) {
        writeln!(out, "{},{c},{}", d.id, d.label.as_deref().unwrap_or_default())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A word-indexed model whose theta rows are given directly.
    fn word_model(rows: &[&[f64]], trained: &[bool]) -> TopicModel {
        let k = rows[0].len();
        let theta = rows.iter().flat_map(|r| r.iter().copied()).collect();
        let v = rows.len();
        TopicModel::new(k, v, vec![1.0 / v as f64; k * v], theta, trained.to_vec())
    }

    #[test]
    fn single_word_document_copies_its_row() {
        let m = word_model(&[&[0.7, 0.3]], &[true]);
        assert_eq!(doc_topics(&[0], &m).probs, vec![0.7, 0.3]);
    }

    #[test]
    fn frequency_weighting_by_hand() {
        let m = word_model(&[&[1.0, 0.0], &[0.0, 1.0]], &[true, true]);
        let p = doc_topics(&[0, 0, 1], &m).probs;
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn untrained_words_fall_back_to_uniform() {
        let m = word_model(&[&[0.9, 0.05, 0.05], &[0.2, 0.7, 0.1]], &[false, false]);
        let d = doc_topics(&[0, 1], &m);
        assert_eq!(d.probs, vec![1.0 / 3.0; 3]);
        assert_eq!(d.cluster, 0);
        assert_eq!(doc_topics(&[], &m).probs, vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn untrained_words_are_skipped_and_renormalized() {
        let m = word_model(&[&[0.9, 0.1], &[0.5, 0.5]], &[true, false]);
        assert_eq!(doc_topics(&[0, 1, 1], &m).probs, vec![0.9, 0.1]);
    }

    #[test]
    fn argmax_with_low_index_tiebreak() {
        assert_eq!(assign_cluster(&[0.1, 0.8, 0.1]), 1);
        assert_eq!(assign_cluster(&[0.5, 0.5]), 0);
        assert_eq!(assign_cluster(&[1.0 / 3.0; 3]), 0);
    }

    #[test]
    fn fold_in_uses_phi_columns() {
        // phi rows: topic 0 favors word 0, topic 1 favors word 1
        let m = TopicModel::new(2, 2, vec![0.75, 0.25, 0.25, 0.75], vec![], vec![]);
        let d = fold_in(&[0], &m);
        assert!((d.probs[0] - 0.75).abs() < 1e-15);
        let d = fold_in(&[0, 1], &m);
        assert!((d.probs[0] - 0.5).abs() < 1e-15);
        assert_eq!(fold_in(&[], &m).probs, vec![0.5, 0.5]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn model() -> impl Strategy<Value = TopicModel> {
            (2usize..5).prop_flat_map(|k| {
                prop::collection::vec(prop::collection::vec(0.01f64..1.0, k), 6).prop_map(move |rows| {
                    let theta: Vec<f64> = rows
                        .iter()
                        .flat_map(|r| {
                            let s: f64 = r.iter().sum();
                            r.iter().map(move |x| x / s)
                        })
                        .collect();
                    TopicModel::new(k, 6, vec![1.0 / 6.0; k * 6], theta, vec![true, true, false, true, true, true])
                })
            })
        }

        proptest! {
            #[test]
            fn mixture_is_a_distribution(m in model(), doc in prop::collection::vec(0u32..6, 0..20)) {
                let d = doc_topics(&doc, &m);
                prop_assert!((d.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                prop_assert!(d.probs.iter().all(|&p| (0.0..=1.0 + 1e-12).contains(&p)));
                prop_assert!(d.cluster < m.topics());
            }

            #[test]
            fn duplicating_tokens_changes_nothing(m in model(), doc in prop::collection::vec(0u32..6, 1..20)) {
                let doubled: Vec<u32> = doc.iter().chain(doc.iter()).copied().collect();
                let a = doc_topics(&doc, &m);
                let b = doc_topics(&doubled, &m);
                for (x, y) in a.probs.iter().zip(&b.probs) {
                    prop_assert!((x - y).abs() < 1e-12);
                }
                prop_assert_eq!(a.cluster, b.cluster);
            }
        }
    }
}
