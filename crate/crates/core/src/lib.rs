//! Topic models for unbalanced short-text corpora.
//!
//! Three models share one collapsed Gibbs sampler:
//!
//! * **LDA** samples the documents directly.
//! * **WNTM** builds a sliding-window word co-occurrence network, turns each
//!   word's neighborhood into a pseudo-document weighted by raw co-occurrence
//!   counts, and samples those.
//! * **CWUTM** does the same but weights edges by a clipped pointwise mutual
//!   information ("activity degree") and drops edges between words that are
//!   independent or anti-correlated, which keeps rare topics from being
//!   swamped by frequent ones.
//!
//! Document topics for the network models are the frequency-weighted average
//! of their words' pseudo-document topic mixtures. The [`experiment`] module
//! runs all three over seeded repetitions and scores them with purity and NMI
//! on the full corpus and on its scarce/abundant topic subsets.

pub mod cooc;
pub mod corpus;
mod error;
pub mod evaluation;
pub mod experiment;
pub mod gibbs;
pub mod inference;
pub mod model;
pub mod pseudo;
pub mod report;
pub mod synthetic;

pub use cooc::{RawCoocNetwork, WeightedCoocNetwork, WordPair};
pub use corpus::{Corpus, DatasetPreset, Document, RawCorpus, Vocabulary, WordId};
pub use error::{Error, Result};
pub use evaluation::ContingencyTable;
pub use experiment::{EvalReport, ExperimentConfig, ModelKind, ModelSelection, Subset};
pub use gibbs::{GibbsConfig, GibbsState, TrainingSet};
pub use inference::DocTopicDistribution;
pub use model::TopicModel;
pub use pseudo::PseudoCorpus;
pub use synthetic::SyntheticSpec;
