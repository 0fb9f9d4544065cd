//! Purity and normalized mutual information of a hard clustering against gold
//! labels.

use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};

/// Documents per (gold class, cluster) cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    /// `classes × clusters`, row-major.
    cells: Vec<u64>,
    classes: usize,
    clusters: usize,
    class_sizes: Vec<u64>,
    cluster_sizes: Vec<u64>,
    total: u64,
}

impl ContingencyTable {
    /// Tabulates `assignments[i]` against `labels[i]`. Classes and clusters are
    /// indexed by first appearance.
    pub fn new<C, L>(assignments: &[C], labels: &[L]) -> Result<Self>
    where
        C: Eq + Hash,
        L: Eq + Hash,
    {
        if assignments.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: assignments.len(),
                right: labels.len(),
            });
        }
        if assignments.is_empty() {
            return Err(Error::EmptyEvaluation);
        }
        let class_idx = index_of(labels);
        let cluster_idx = index_of(assignments);
        let mut pairs = Vec::with_capacity(labels.len());
        for (c, l) in assignments.iter().zip(labels) {
            pairs.push((class_idx[l], cluster_idx[c]));
        }
        let mut cells = vec![0u64; class_idx.len() * cluster_idx.len()];
        for (h, l) in pairs {
            cells[h * cluster_idx.len() + l] += 1;
        }
        Ok(Self::from_cells(cells, class_idx.len(), cluster_idx.len()))
    }

    /// Builds a table from explicit counts (`classes × clusters`, row-major).
    pub fn from_counts(rows: &[Vec<u64>]) -> Result<Self> {
        let classes = rows.len();
        let clusters = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != clusters) {
            return Err(Error::config("ragged contingency table"));
        }
        let cells: Vec<u64> = rows.iter().flatten().copied().collect();
        if cells.iter().sum::<u64>() == 0 {
            return Err(Error::EmptyEvaluation);
        }
        Ok(Self::from_cells(cells, classes, clusters))
    }

    fn from_cells(cells: Vec<u64>, classes: usize, clusters: usize) -> Self {
        let mut class_sizes = vec![0u64; classes];
        let mut cluster_sizes = vec![0u64; clusters];
        for h in 0..classes {
            for l in 0..clusters {
                let n = cells[h * clusters + l];
                class_sizes[h] += n;
                cluster_sizes[l] += n;
            }
        }
        let total = class_sizes.iter().sum();
        ContingencyTable {
            cells,
            classes,
            clusters,
            class_sizes,
            cluster_sizes,
            total,
        }
    }

    pub fn get(&self, class: usize, cluster: usize) -> u64 {
        self.cells[class * self.clusters + cluster]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// `(1/N) Σ_clusters max_class |cluster ∩ class|`.
    pub fn purity(&self) -> f64 {
        let hits: u64 = (0..self.clusters)
            .map(|l| (0..self.classes).map(|h| self.get(h, l)).max().unwrap_or(0))
            .sum();
        hits as f64 / self.total as f64
    }

    /// Mutual information over the geometric mean of the two entropies, all in
    /// nats. Returns 0 when either partition has zero entropy.
    pub fn nmi(&self) -> f64 {
        let n = self.total as f64;
        let mut mutual = 0.0;
        for h in 0..self.classes {
            for l in 0..self.clusters {
                let c = self.get(h, l);
                if c > 0 {
                    let c = c as f64;
                    mutual += c * (n * c / (self.class_sizes[h] as f64 * self.cluster_sizes[l] as f64)).ln();
                }
            }
        }
        let entropy = |sizes: &[u64]| -> f64 {
            sizes
                .iter()
                .filter(|&&s| s > 0)
                .map(|&s| s as f64 * (n / s as f64).ln())
                .sum()
        };
        let denom = (entropy(&self.class_sizes) * entropy(&self.cluster_sizes)).sqrt();
        if denom == 0.0 {
            return 0.0;
        }
        if self.is_bijection() {
            return 1.0;
        }
        (mutual / denom).clamp(0.0, 1.0)
    }

    /// Every non-empty class maps onto exactly one non-empty cluster and back.
    fn is_bijection(&self) -> bool {
        let row_ok = (0..self.classes).all(|h| (0..self.clusters).filter(|&l| self.get(h, l) > 0).count() <= 1);
        let col_ok = (0..self.clusters).all(|l| (0..self.classes).filter(|&h| self.get(h, l) > 0).count() <= 1);
        row_ok && col_ok
    }
}

fn index_of<T: Eq + Hash>(items: &[T]) -> HashMap<&T, usize> {
    let mut idx = HashMap::new();
    for it in items {
        let next = idx.len();
        idx.entry(it).or_insert(next);
    }
    idx
}

pub fn purity<C: Eq + Hash, L: Eq + Hash>(assignments: &[C], labels: &[L]) -> Result<f64> {
    Ok(ContingencyTable::new(assignments, labels)?.purity())
}

pub fn nmi<C: Eq + Hash, L: Eq + Hash>(assignments: &[C], labels: &[L]) -> Result<f64> {
    Ok(ContingencyTable::new(assignments, labels)?.nmi())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_clustering_scores_one() {
        let labels = ["a", "a", "b", "c", "c", "c"];
        let clusters = [7, 7, 2, 0, 0, 0];
        assert_eq!(purity(&clusters, &labels).unwrap(), 1.0);
        assert_eq!(nmi(&clusters, &labels).unwrap(), 1.0);
    }

    #[test]
    fn purity_by_hand() {
        // clusters {A,A,B} and {B,B}
        let labels = ["A", "A", "B", "B", "B"];
        let clusters = [0, 0, 0, 1, 1];
        assert!((purity(&clusters, &labels).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn single_cluster_over_balanced_classes() {
        let labels: Vec<usize> = (0..40).map(|i| i % 4).collect();
        let clusters = vec![0; 40];
        assert_eq!(purity(&clusters, &labels).unwrap(), 0.25);
        assert_eq!(nmi(&clusters, &labels).unwrap(), 0.0);
    }

    #[test]
    fn two_by_two_table_against_entropy_arithmetic() {
        // [[2,0],[1,1]]; frozen from an entropy computation in probability units
        // (I = ½ln(4/3) + ¼ln(2/3) + ¼ln2, H(class) = ln2, H(cluster) = H(¾,¼))
        let t = ContingencyTable::from_counts(&[vec![2, 0], vec![1, 1]]).unwrap();
        let expected = 0.345_592_029_944_211_3;
        assert!((t.nmi() - expected).abs() < 1e-12, "{} vs {expected}", t.nmi());
    }

    #[test]
    fn near_independent_partition_scores_near_zero() {
        let n = 20_000;
        let clusters: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let labels: Vec<usize> = (0..n).map(|i| (i / 2) % 2).collect();
        assert!(nmi(&clusters, &labels).unwrap() < 1e-6);
    }

    #[test]
    fn errors() {
        assert!(matches!(purity(&[0, 1], &["a"]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(nmi(&[0, 1], &["a"]), Err(Error::LengthMismatch { .. })));
        let empty: [usize; 0] = [];
        assert!(matches!(purity(&empty, &empty), Err(Error::EmptyEvaluation)));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn labelling() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
            (1usize..120).prop_flat_map(|n| {
                (prop::collection::vec(0usize..6, n), prop::collection::vec(0usize..6, n))
            })
        }

        proptest! {
            #[test]
            fn bounded((c, l) in labelling()) {
                let t = ContingencyTable::new(&c, &l).unwrap();
                prop_assert!((0.0..=1.0).contains(&t.purity()));
                prop_assert!((0.0..=1.0).contains(&t.nmi()));
            }

            #[test]
            fn cluster_relabeling_invariant((c, l) in labelling(), shift in 1usize..6) {
                let relabeled: Vec<usize> = c.iter().map(|&x| (x + shift) % 6 + 100).collect();
                prop_assert_eq!(purity(&c, &l).unwrap(), purity(&relabeled, &l).unwrap());
                prop_assert!((nmi(&c, &l).unwrap() - nmi(&relabeled, &l).unwrap()).abs() < 1e-12);
            }

            #[test]
            fn nmi_symmetric((c, l) in labelling()) {
                prop_assert!((nmi(&c, &l).unwrap() - nmi(&l, &c).unwrap()).abs() < 1e-12);
            }

            #[test]
            fn splitting_never_lowers_purity((c, l) in labelling(), victim in 0usize..6) {
                // move every other member of one cluster into a fresh cluster
                let mut flip = false;
                let split: Vec<usize> = c.iter().map(|&x| {
                    if x == victim { flip = !flip; if flip { 99 } else { x } } else { x }
                }).collect();
                prop_assert!(purity(&split, &l).unwrap() >= purity(&c, &l).unwrap());
            }

            #[test]
            fn log_base_cancels((c, l) in labelling()) {
                let t = ContingencyTable::new(&c, &l).unwrap();
                let n = t.total() as f64;
                let base = 2f64;
                let lg = |x: f64| x.ln() / base.ln();
                let mut mi = 0.0;
                for h in 0..t.classes { for k in 0..t.clusters {
                    let x = t.get(h, k) as f64;
                    if x > 0.0 {
                        mi += x * lg(n * x / (t.class_sizes[h] as f64 * t.cluster_sizes[k] as f64));
                    }
                }}
                let hx: f64 = t.class_sizes.iter().filter(|&&s| s > 0).map(|&s| s as f64 * lg(s as f64 / n)).sum();
                let hy: f64 = t.cluster_sizes.iter().filter(|&&s| s > 0).map(|&s| s as f64 * lg(s as f64 / n)).sum();
                let d = (hx * hy).abs().sqrt();
                let base2 = if d == 0.0 { 0.0 } else { mi / d };
                prop_assert!((t.nmi() - base2).abs() < 1e-9);
            }
        }
    }
}
