//! Collapsed Gibbs sampling for LDA-style models.
//!
//! The same sampler trains all three models: on the real documents (LDA), on
//! raw-count pseudo-documents and on PMI-weighted pseudo-documents. Each token
//! `i` in document `d` is resampled from
//!
//! ```text
//! p(z_i = k | z_-i, w) ∝ (n_dk + α) · (n_kw + β) / (n_k + V·β)
//! ```
//!
//! with all counts excluding token `i`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, WordId};
use crate::error::{Error, Result};
use crate::model::TopicModel;
use crate::pseudo::PseudoCorpus;

pub type Topic = u32;

/// Default sweep count.
pub const DEFAULT_ITERATIONS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsConfig {
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    /// When set, phi/theta are averaged over every sweep after this many
    /// burn-in sweeps instead of being taken from the final state alone.
    #[serde(default)]
    pub burn_in: Option<usize>,
}

impl GibbsConfig {
    pub fn new(topics: usize, alpha: f64, beta: f64) -> Self {
        GibbsConfig {
            topics,
            alpha,
            beta,
            iterations: DEFAULT_ITERATIONS,
            seed: 0,
            burn_in: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.topics == 0 {
            return Err(Error::config("topic count must be at least 1"));
        }
        if self.topics > Topic::MAX as usize {
            return Err(Error::config("topic count too large"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::config(format!("beta must be positive, got {}", self.beta)));
        }
        if self.iterations == 0 {
            return Err(Error::config("iterations must be at least 1"));
        }
        if let Some(b) = self.burn_in {
            if b >= self.iterations {
                return Err(Error::config(format!(
                    "burn-in ({b}) must be smaller than iterations ({})",
                    self.iterations
                )));
            }
        }
        Ok(())
    }
}

/// Documents flattened into one token buffer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingSet {
    vocab_size: usize,
    offsets: Vec<usize>,
    tokens: Vec<WordId>,
}

impl TrainingSet {
    pub fn new<I, D>(vocab_size: usize, docs: I) -> Result<Self>
    where
        I: IntoIterator<Item = D>,
        D: AsRef<[WordId]>,
    {
        let mut offsets = vec![0];
        let mut tokens = Vec::new();
        for d in docs {
            let d = d.as_ref();
            if let Some(&bad) = d.iter().find(|&&w| w as usize >= vocab_size) {
                return Err(Error::config(format!(
                    "word id {bad} outside vocabulary of size {vocab_size}"
                )));
            }
            tokens.extend_from_slice(d);
            offsets.push(tokens.len());
        }
        Ok(TrainingSet {
            vocab_size,
            offsets,
            tokens,
        })
    }

    pub fn from_corpus(corpus: &Corpus) -> Self {
        TrainingSet::new(
            corpus.vocabulary().len(),
            corpus.documents().iter().map(|d| &d.tokens),
        )
        .expect("corpus ids are validated on construction")
    }

    pub fn from_pseudo(pseudo: &PseudoCorpus) -> Self {
        TrainingSet::new(pseudo.len(), pseudo.docs()).expect("pseudo-document ids index the vocabulary")
    }

    pub fn documents(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn token_count(&self) -> usize {
        self.tokens.len()
    }

    pub fn doc(&self, d: usize) -> &[WordId] {
        &self.tokens[self.offsets[d]..self.offsets[d + 1]]
    }
}

/// Sampler state: assignments, the count tables they imply, and the RNG.
#[derive(Debug, Clone)]
pub struct GibbsState {
    topics: usize,
    alpha: f64,
    beta: f64,
    data: TrainingSet,
    z: Vec<Topic>,
    /// `D × K`
    doc_topic: Vec<u32>,
    /// `V × K`, word-major so one token's row is contiguous.
    word_topic: Vec<u32>,
    topic_total: Vec<u64>,
    rng: ChaCha8Rng,
    sweeps: usize,
    cumulative: Vec<f64>,
}

impl GibbsState {
    /// Assigns every token a uniformly random topic.
    pub fn init(data: TrainingSet, cfg: &GibbsConfig) -> Result<Self> {
        cfg.validate()?;
        if data.token_count() == 0 {
            return Err(Error::NoTrainingData);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let k = cfg.topics as Topic;
        let z = (0..data.token_count()).map(|_| rng.random_range(0..k)).collect();
        Ok(Self::with_assignments(data, cfg, z, rng))
    }

    /// Builds a state from explicit assignments, one per token in document order.
    pub fn from_assignments(data: TrainingSet, cfg: &GibbsConfig, z: Vec<Topic>) -> Result<Self> {
        cfg.validate()?;
        if z.len() != data.token_count() {
            return Err(Error::config(format!(
                "{} assignments for {} tokens",
                z.len(),
                data.token_count()
            )));
        }
        if z.iter().any(|&t| t as usize >= cfg.topics) {
            return Err(Error::config("assignment outside topic range"));
        }
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(Self::with_assignments(data, cfg, z, rng))
    }

    fn with_assignments(data: TrainingSet, cfg: &GibbsConfig, z: Vec<Topic>, rng: ChaCha8Rng) -> Self {
        let k = cfg.topics;
        let (doc_topic, word_topic, topic_total) = tally(&data, &z, k);
        GibbsState {
            topics: k,
            alpha: cfg.alpha,
            beta: cfg.beta,
            data,
            z,
            doc_topic,
            word_topic,
            topic_total,
            rng,
            sweeps: 0,
            cumulative: vec![0.0; k],
        }
    }

    pub fn assignments(&self) -> &[Topic] {
        &self.z
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn training_set(&self) -> &TrainingSet {
        &self.data
    }

    pub fn doc_topic_count(&self, doc: usize, topic: usize) -> u32 {
        self.doc_topic[doc * self.topics + topic]
    }

    pub fn topic_word_count(&self, topic: usize, word: WordId) -> u32 {
        self.word_topic[word as usize * self.topics + topic]
    }

    pub fn topic_total(&self, topic: usize) -> u64 {
        self.topic_total[topic]
    }

    /// Resamples every token once, in document order then token order.
    pub fn sweep(&mut self) -> Result<()> {
        let k = self.topics;
        let v_beta = self.data.vocab_size as f64 * self.beta;
        for d in 0..self.data.documents() {
            let dt = d * k;
            for i in self.data.offsets[d]..self.data.offsets[d + 1] {
                let w = self.data.tokens[i] as usize;
                let wt = w * k;
                let old = self.z[i] as usize;

                let (Some(a), Some(b), Some(c)) = (
                    self.doc_topic[dt + old].checked_sub(1),
                    self.word_topic[wt + old].checked_sub(1),
                    self.topic_total[old].checked_sub(1),
                ) else {
                    return Err(Error::Invariant(format!(
                        "negative count removing token {i} (doc {d}, topic {old})"
                    )));
                };
                self.doc_topic[dt + old] = a;
                self.word_topic[wt + old] = b;
                self.topic_total[old] = c;

                let mut acc = 0.0;
                for t in 0..k {
                    acc += (self.doc_topic[dt + t] as f64 + self.alpha)
                        * (self.word_topic[wt + t] as f64 + self.beta)
                        / (self.topic_total[t] as f64 + v_beta);
                    self.cumulative[t] = acc;
                }
                if !(acc.is_finite() && acc > 0.0) {
                    return Err(Error::Invariant(format!(
                        "degenerate conditional mass {acc} at token {i}"
                    )));
                }
                let u = self.rng.random::<f64>() * acc;
                let new = self.cumulative.iter().position(|&c| u < c).unwrap_or(k - 1);

                self.z[i] = new as Topic;
                self.doc_topic[dt + new] += 1;
                self.word_topic[wt + new] += 1;
                self.topic_total[new] += 1;
            }
        }
        self.sweeps += 1;
        debug_assert!(self.check_invariants().is_ok());
        Ok(())
    }

    /// Recounts everything from `z` and compares against the live tables.
    pub fn check_invariants(&self) -> Result<()> {
        let k = self.topics;
        if let Some(i) = self.z.iter().position(|&t| t as usize >= k) {
            return Err(Error::Invariant(format!("assignment {i} out of range")));
        }
        for d in 0..self.data.documents() {
            let row: u64 = self.doc_topic[d * k..(d + 1) * k].iter().map(|&c| c as u64).sum();
            if row != self.data.doc(d).len() as u64 {
                return Err(Error::Invariant(format!(
                    "document {d}: topic counts sum to {row}, length is {}",
                    self.data.doc(d).len()
                )));
            }
        }
        for t in 0..k {
            let col: u64 = self.word_topic.iter().skip(t).step_by(k).map(|&c| c as u64).sum();
            if col != self.topic_total[t] {
                return Err(Error::Invariant(format!(
                    "topic {t}: word counts sum to {col}, total is {}",
                    self.topic_total[t]
                )));
            }
        }
        let all: u64 = self.topic_total.iter().sum();
        if all != self.data.token_count() as u64 {
            return Err(Error::Invariant(format!(
                "topic totals sum to {all}, corpus has {} tokens",
                self.data.token_count()
            )));
        }
        let (dt, wt, tt) = tally(&self.data, &self.z, k);
        if dt != self.doc_topic || wt != self.word_topic || tt != self.topic_total {
            return Err(Error::Invariant("count tables disagree with assignments".into()));
        }
        Ok(())
    }

    /// `phi(k,w) = (n_kw + β)/(n_k + Vβ)`, `theta(d,k) = (n_dk + α)/(n_d + Kα)`.
    pub fn estimate(&self) -> TopicModel {
        let k = self.topics;
        let v = self.data.vocab_size;
        let v_beta = v as f64 * self.beta;
        let mut phi = vec![0.0; k * v];
        for t in 0..k {
            let denom = self.topic_total[t] as f64 + v_beta;
            for w in 0..v {
                phi[t * v + w] = (self.word_topic[w * k + t] as f64 + self.beta) / denom;
            }
        }
        let docs = self.data.documents();
        let k_alpha = k as f64 * self.alpha;
        let mut theta = vec![0.0; docs * k];
        let mut trained = Vec::with_capacity(docs);
        for d in 0..docs {
            let len = self.data.doc(d).len();
            trained.push(len > 0);
            let denom = len as f64 + k_alpha;
            for t in 0..k {
                theta[d * k + t] = (self.doc_topic[d * k + t] as f64 + self.alpha) / denom;
            }
        }
        TopicModel::new(k, v, phi, theta, trained)
    }
}

fn tally(data: &TrainingSet, z: &[Topic], k: usize) -> (Vec<u32>, Vec<u32>, Vec<u64>) {
    let mut doc_topic = vec![0u32; data.documents() * k];
    let mut word_topic = vec![0u32; data.vocab_size * k];
    let mut topic_total = vec![0u64; k];
    for d in 0..data.documents() {
        for i in data.offsets[d]..data.offsets[d + 1] {
            let t = z[i] as usize;
            doc_topic[d * k + t] += 1;
            word_topic[data.tokens[i] as usize * k + t] += 1;
            topic_total[t] += 1;
        }
    }
    (doc_topic, word_topic, topic_total)
}

/// Initializes, sweeps `cfg.iterations` times and estimates.
pub fn run(data: TrainingSet, cfg: &GibbsConfig) -> Result<TopicModel> {
    run_with(data, cfg, |_| Ok(()))
}

/// Like [`run`], calling `after_sweep` on the state after every sweep.
pub fn run_with(
    data: TrainingSet,
    cfg: &GibbsConfig,
    mut after_sweep: impl FnMut(&GibbsState) -> Result<()>,
) -> Result<TopicModel> {
    let mut state = GibbsState::init(data, cfg)?;
    let mut averaged: Option<TopicModel> = None;
    for it in 1..=cfg.iterations {
        state.sweep()?;
        after_sweep(&state)?;
        if let Some(b) = cfg.burn_in {
            if it > b {
                let sample = state.estimate();
                averaged
                    .get_or_insert_with(|| TopicModel::zeroed_like(&sample))
                    .add_scaled(&sample, 1.0 / (cfg.iterations - b) as f64);
            }
        }
    }
    Ok(averaged.unwrap_or_else(|| state.estimate()))
}
