//! Shared fixtures for the criterion benchmarks.

use std::collections::HashSet;

use cwutm::corpus::build_vocabulary;
use cwutm::{Corpus, SyntheticSpec};

/// The unbalanced synthetic preset scaled by `factor` in document count.
pub fn synthetic_corpus(factor: usize) -> Corpus {
    let mut spec = SyntheticSpec::unbalanced_preset();
    spec.docs_per_abundant *= factor;
    spec.docs_per_scarce *= factor;
    let raw = spec.generate().expect("preset is valid");
    build_vocabulary(&raw, 1, &HashSet::new()).expect("synthetic corpus is well formed")
}
