//! Seeded multi-run experiments comparing LDA, WNTM and CWUTM on a full corpus
//! and its scarce/abundant subsets.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cooc::{self, DEFAULT_WINDOW};
use crate::corpus::{self, Corpus, DatasetPreset};
use crate::error::{Error, Result};
use crate::evaluation::ContingencyTable;
use crate::gibbs::{self, GibbsConfig, TrainingSet, DEFAULT_ITERATIONS};
use crate::inference;
use crate::model::TopicModel;
use crate::pseudo::{self, DEFAULT_SCALE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lda,
    Wntm,
    Cwutm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Lda, ModelKind::Wntm, ModelKind::Cwutm];

    pub fn default_alpha(self) -> f64 {
        match self {
            ModelKind::Lda => 0.05,
            ModelKind::Wntm | ModelKind::Cwutm => 0.1,
        }
    }

    pub fn default_beta(self) -> f64 {
        match self {
            ModelKind::Lda => 0.01,
            ModelKind::Wntm | ModelKind::Cwutm => 0.1,
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Lda => "LDA",
            ModelKind::Wntm => "WNTM",
            ModelKind::Cwutm => "CWUTM",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Lda => "lda",
            ModelKind::Wntm => "wntm",
            ModelKind::Cwutm => "cwutm",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lda" => Ok(ModelKind::Lda),
            "wntm" => Ok(ModelKind::Wntm),
            "cwutm" => Ok(ModelKind::Cwutm),
            other => Err(Error::config(format!("unknown model `{other}`"))),
        }
    }
}

/// Which models an experiment runs. Serialized as `all` or the model name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ModelSelection {
    One(ModelKind),
    All,
}

impl ModelSelection {
    pub fn models(self) -> Vec<ModelKind> {
        match self {
            ModelSelection::One(m) => vec![m],
            ModelSelection::All => ModelKind::ALL.to_vec(),
        }
    }
}

impl fmt::Display for ModelSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSelection::One(m) => m.fmt(f),
            ModelSelection::All => f.write_str("all"),
        }
    }
}

impl From<ModelSelection> for String {
    fn from(m: ModelSelection) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for ModelSelection {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for ModelSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("all") {
            Ok(ModelSelection::All)
        } else {
            s.parse().map(ModelSelection::One)
        }
    }
}

/// Where stopwords come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopwordSource {
    English,
    None,
    File(PathBuf),
}

impl StopwordSource {
    pub fn load(&self) -> Result<HashSet<String>> {
        match self {
            StopwordSource::English => Ok(corpus::english_stopwords()),
            StopwordSource::None => Ok(HashSet::new()),
            StopwordSource::File(p) => corpus::load_stopwords(p),
        }
    }
}

impl FromStr for StopwordSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "english" => StopwordSource::English,
            "none" => StopwordSource::None,
            path => StopwordSource::File(PathBuf::from(path)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelSelection,
    pub corpus: PathBuf,
    pub labels: PathBuf,
    pub preset: Option<DatasetPreset>,
    /// Topic count; defaults to the number of gold labels.
    pub topics: Option<usize>,
    /// Overrides the per-model default when set.
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub window_size: usize,
    pub lambda: f64,
    pub iterations: usize,
    pub burn_in: Option<usize>,
    pub runs: usize,
    pub seed: u64,
    pub scarce_threshold: Option<usize>,
    pub min_count: u64,
    pub stopwords: StopwordSource,
    pub retrain_per_subset: bool,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelSelection::All,
            corpus: PathBuf::new(),
            labels: PathBuf::new(),
            preset: None,
            topics: None,
            alpha: None,
            beta: None,
            window_size: DEFAULT_WINDOW,
            lambda: DEFAULT_SCALE,
            iterations: DEFAULT_ITERATIONS,
            burn_in: None,
            runs: 10,
            seed: 1,
            scarce_threshold: None,
            min_count: 1,
            stopwords: StopwordSource::English,
            retrain_per_subset: false,
            output: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(format!("invalid value `{value}` for `{key}`")))
}

impl ExperimentConfig {
    /// Sets one field from its kebab-case key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        match key.as_str() {
            "model" => self.model = value.parse()?,
            "corpus" => self.corpus = PathBuf::from(value),
            "labels" => self.labels = PathBuf::from(value),
            "preset" => self.preset = Some(value.parse()?),
            "topics" | "k" => self.topics = Some(parse(&key, value)?),
            "alpha" => self.alpha = Some(parse(&key, value)?),
            "beta" => self.beta = Some(parse(&key, value)?),
            "window-size" => self.window_size = parse(&key, value)?,
            "lambda" => self.lambda = parse(&key, value)?,
            "iterations" => self.iterations = parse(&key, value)?,
            "burn-in" => self.burn_in = Some(parse(&key, value)?),
            "runs" => self.runs = parse(&key, value)?,
            "seed" => self.seed = parse(&key, value)?,
            "scarce-threshold" => self.scarce_threshold = Some(parse(&key, value)?),
            "min-count" => self.min_count = parse(&key, value)?,
            "stopwords" => self.stopwords = value.parse()?,
            "retrain-per-subset" => self.retrain_per_subset = parse(&key, value)?,
            "output" => self.output = Some(PathBuf::from(value)),
            _ => return Err(Error::config(format!("unknown configuration key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file; `#` starts a comment.
    pub fn apply_kv_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .or_else(|| line.split_once(':'))
                .ok_or_else(|| Error::config(format!("line {}: expected `key = value`", n + 1)))?;
            self.set(k, v)
                .map_err(|e| Error::config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn threshold(&self) -> Option<usize> {
        self.scarce_threshold.or(self.preset.map(DatasetPreset::scarce_threshold))
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::config("runs must be at least 1"));
        }
        if self.window_size < 2 {
            return Err(Error::config("window-size must be at least 2"));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::config("lambda must be positive"));
        }
        if self.min_count == 0 {
            return Err(Error::config("min-count must be at least 1"));
        }
        Ok(())
    }

    fn gibbs(&self, kind: ModelKind, topics: usize, seed: u64) -> GibbsConfig {
        GibbsConfig {
            topics,
            alpha: self.alpha.unwrap_or(kind.default_alpha()),
            beta: self.beta.unwrap_or(kind.default_beta()),
            iterations: self.iterations,
            seed,
            burn_in: self.burn_in,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    Full,
    Scarce,
    Abundant,
}

impl Subset {
    pub fn title(self) -> &'static str {
        match self {
            Subset::Full => "Full",
            Subset::Scarce => "Scarce",
            Subset::Abundant => "Abundant",
        }
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subset::Full => "full",
            Subset::Scarce => "scarce",
            Subset::Abundant => "abundant",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetSummary {
    pub subset: Subset,
    pub documents: usize,
    pub topics: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetScore {
    pub subset: Subset,
    pub purity: f64,
    pub nmi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub scores: Vec<SubsetScore>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample (n − 1) standard deviation; 0 for a single run.
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Summary { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateScore {
    pub subset: Subset,
    pub purity: Summary,
    pub nmi: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model: ModelKind,
    pub alpha: f64,
    pub beta: f64,
    pub topics: usize,
    pub runs: Vec<RunRecord>,
    pub aggregate: Vec<AggregateScore>,
}

impl ModelReport {
    pub fn aggregate_for(&self, subset: Subset) -> Option<&AggregateScore> {
        self.aggregate.iter().find(|a| a.subset == subset)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub documents: usize,
    pub vocabulary: usize,
    pub labels: usize,
    pub empty_documents: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTiming {
    pub model: ModelKind,
    /// `None` for work shared by all runs.
    pub run: Option<usize>,
    pub phase: String,
    pub millis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: ExperimentConfig,
    pub corpus: CorpusSummary,
    pub subsets: Vec<SubsetSummary>,
    pub models: Vec<ModelReport>,
    /// Wall-clock measurements; the only non-deterministic part of a report.
    pub timing: Vec<PhaseTiming>,
}

impl EvalReport {
    pub fn model(&self, kind: ModelKind) -> Option<&ModelReport> {
        self.models.iter().find(|m| m.model == kind)
    }

    /// A copy with the timing section cleared, for reproducibility checks.
    pub fn without_timing(&self) -> EvalReport {
        EvalReport {
            timing: Vec::new(),
            ..self.clone()
        }
    }
}

/// Everything a model needs before sampling, computed once per corpus.
pub struct Prepared {
    kind: ModelKind,
    data: TrainingSet,
}

impl Prepared {
    pub fn new(kind: ModelKind, corpus: &Corpus, window: usize, lambda: f64) -> Result<Self> {
        let data = match kind {
            ModelKind::Lda => TrainingSet::from_corpus(corpus),
            ModelKind::Wntm => {
                let raw = cooc::build_raw_network(corpus, window)?;
                TrainingSet::from_pseudo(&pseudo::from_raw_network(&raw))
            }
            ModelKind::Cwutm => {
                let raw = cooc::build_raw_network(corpus, window)?;
                let weighted = cooc::weight_and_prune(&raw);
                TrainingSet::from_pseudo(&pseudo::from_weighted_network(&weighted, lambda)?)
            }
        };
        Ok(Prepared { kind, data })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn training_set(&self) -> &TrainingSet {
        &self.data
    }

    pub fn train(&self, cfg: &GibbsConfig) -> Result<TopicModel> {
        gibbs::run(self.data.clone(), cfg)
    }

    /// Hard cluster for every document of `corpus`, which must be the corpus
    /// this model was prepared from.
    pub fn cluster(&self, model: &TopicModel, corpus: &Corpus) -> Vec<usize> {
        match self.kind {
            ModelKind::Lda => inference::cluster_via_theta(model),
            ModelKind::Wntm | ModelKind::Cwutm => inference::cluster_via_words(corpus, model),
        }
    }
}

/// A single trained model and the clusters it assigns to the corpus.
pub struct Fit {
    pub model: TopicModel,
    pub clusters: Vec<usize>,
}

/// Trains one model of `kind` on `corpus` with the given seed.
pub fn fit(cfg: &ExperimentConfig, kind: ModelKind, corpus: &Corpus, seed: u64) -> Result<Fit> {
    cfg.validate()?;
    let topics = match cfg.topics {
        Some(k) => k,
        None if corpus.is_labeled() => corpus.label_set().len(),
        None => return Err(Error::config("topic count required for an unlabeled corpus")),
    };
    let prepared = Prepared::new(kind, corpus, cfg.window_size, cfg.lambda)?;
    let model = prepared.train(&cfg.gibbs(kind, topics, seed))?;
    let clusters = prepared.cluster(&model, corpus);
    Ok(Fit { model, clusters })
}

/// Loads the configured dataset with the configured filtering.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Corpus> {
    let raw = corpus::load_corpus(&cfg.corpus, Some(&cfg.labels))?;
    let stop = cfg.stopwords.load()?;
    corpus::build_vocabulary(&raw, cfg.min_count, &stop)
}

/// Loads the dataset named in `cfg` and runs the experiment on it.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let corpus = load_dataset(cfg)?;
    run_on_corpus(cfg, &corpus)
}

fn score(clusters: &[usize], labels: &[&str]) -> Result<(f64, f64)> {
    let t = ContingencyTable::new(clusters, labels)?;
    Ok((t.purity(), t.nmi()))
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64() * 1e3))
}

struct Evaluated {
    records: Vec<RunRecord>,
    timing: Vec<PhaseTiming>,
}

/// Runs the experiment on an already-loaded corpus.
pub fn run_on_corpus(cfg: &ExperimentConfig, corpus: &Corpus) -> Result<EvalReport> {
    cfg.validate()?;
    let labels = corpus.labels()?;
    let label_count = corpus.label_set().len();
    let topics = cfg.topics.unwrap_or(label_count);

    let mut subsets = vec![(Subset::Full, corpus.clone())];
    match cfg.threshold() {
        Some(t) => {
            let (scarce, abundant) = corpus::split_unbalanced(corpus, t)?;
            subsets.push((Subset::Scarce, scarce));
            subsets.push((Subset::Abundant, abundant));
        }
        None => log::warn!("no scarce threshold configured; evaluating the full corpus only"),
    }
    let summaries: Vec<SubsetSummary> = subsets
        .iter()
        .map(|(s, c)| SubsetSummary {
            subset: *s,
            documents: c.len(),
            topics: c.label_set().len(),
        })
        .collect();
    // an empty subset has nothing to score
    subsets.retain(|(_, c)| !c.is_empty());

    let mut models = Vec::new();
    let mut timing = Vec::new();
    for kind in cfg.model.models() {
        let eval = if cfg.retrain_per_subset {
            evaluate_retrained(cfg, kind, &subsets)?
        } else {
            evaluate_train_once(cfg, kind, corpus, &labels, topics, &subsets)?
        };
        timing.extend(eval.timing);
        let aggregate = subsets
            .iter()
            .map(|(s, _)| {
                let pick = |f: fn(&SubsetScore) -> f64| -> Vec<f64> {
                    eval.records
                        .iter()
                        .flat_map(|r| r.scores.iter().filter(|x| x.subset == *s).map(f))
                        .collect()
                };
                AggregateScore {
                    subset: *s,
                    purity: Summary::of(&pick(|x| x.purity)),
                    nmi: Summary::of(&pick(|x| x.nmi)),
                }
            })
            .collect();
        models.push(ModelReport {
            model: kind,
            alpha: cfg.alpha.unwrap_or(kind.default_alpha()),
            beta: cfg.beta.unwrap_or(kind.default_beta()),
            topics,
            runs: eval.records,
            aggregate,
        });
    }

    Ok(EvalReport {
        config: cfg.clone(),
        corpus: CorpusSummary {
            documents: corpus.len(),
            vocabulary: corpus.vocabulary().len(),
            labels: label_count,
            empty_documents: corpus.empty_documents(),
        },
        subsets: summaries,
        models,
        timing,
    })
}

fn seeds(cfg: &ExperimentConfig) -> Vec<(usize, u64)> {
    (0..cfg.runs).map(|r| (r, cfg.seed + r as u64)).collect()
}

fn evaluate_train_once(
    cfg: &ExperimentConfig,
    kind: ModelKind,
    corpus: &Corpus,
    labels: &[&str],
    topics: usize,
    subsets: &[(Subset, Corpus)],
) -> Result<Evaluated> {
    let (prepared, prep_ms) = timed(|| Prepared::new(kind, corpus, cfg.window_size, cfg.lambda))?;
    let position: HashMap<usize, usize> =
        corpus.documents().iter().enumerate().map(|(i, d)| (d.id, i)).collect();

    let per_run: Vec<(RunRecord, Vec<PhaseTiming>)> = seeds(cfg)
        .into_par_iter()
        .map(|(run, seed)| {
            let gcfg = cfg.gibbs(kind, topics, seed);
            let (model, train_ms) = timed(|| prepared.train(&gcfg))?;
            let (clusters, infer_ms) = timed(|| Ok(prepared.cluster(&model, corpus)))?;
            let mut scores = Vec::new();
            for (subset, sub) in subsets {
                let (c, l): (Vec<usize>, Vec<&str>) =
                    sub.documents().iter().map(|d| {
                        let i = position[&d.id];
                        (clusters[i], labels[i])
                    }).unzip();
                let (purity, nmi) = score(&c, &l)?;
                scores.push(SubsetScore {
                    subset: *subset,
                    purity,
                    nmi,
                });
            }
            let timing = vec![
                PhaseTiming { model: kind, run: Some(run), phase: "train".into(), millis: train_ms },
                PhaseTiming { model: kind, run: Some(run), phase: "infer".into(), millis: infer_ms },
            ];
            Ok((RunRecord { seed, scores }, timing))
        })
        .collect::<Result<_>>()?;

    let mut timing = vec![PhaseTiming {
        model: kind,
        run: None,
        phase: "prepare".into(),
        millis: prep_ms,
    }];
    let mut records = Vec::new();
    for (r, t) in per_run {
        records.push(r);
        timing.extend(t);
    }
    Ok(Evaluated { records, timing })
}

/// Alternative protocol: every subset gets its own model with one topic per
/// gold label in that subset.
fn evaluate_retrained(cfg: &ExperimentConfig, kind: ModelKind, subsets: &[(Subset, Corpus)]) -> Result<Evaluated> {
    let mut timing = Vec::new();
    let mut prepared = Vec::new();
    for (subset, sub) in subsets {
        let (p, ms) = timed(|| Prepared::new(kind, sub, cfg.window_size, cfg.lambda))?;
        timing.push(PhaseTiming {
            model: kind,
            run: None,
            phase: format!("prepare-{subset}"),
            millis: ms,
        });
        prepared.push(p);
    }
    let per_run: Vec<(RunRecord, Vec<PhaseTiming>)> = seeds(cfg)
        .into_par_iter()
        .map(|(run, seed)| {
            let mut scores = Vec::new();
            let mut timing = Vec::new();
            for ((subset, sub), prep) in subsets.iter().zip(&prepared) {
                let topics = match subset {
                    Subset::Full => cfg.topics.unwrap_or(sub.label_set().len()),
                    _ => sub.label_set().len(),
                };
                let gcfg = cfg.gibbs(kind, topics, seed);
                let (model, ms) = timed(|| prep.train(&gcfg))?;
                timing.push(PhaseTiming {
                    model: kind,
                    run: Some(run),
                    phase: format!("train-{subset}"),
                    millis: ms,
                });
                let clusters = prep.cluster(&model, sub);
                let (purity, nmi) = score(&clusters, &sub.labels()?)?;
                scores.push(SubsetScore {
                    subset: *subset,
                    purity,
                    nmi,
                });
            }
            Ok((RunRecord { seed, scores }, timing))
        })
        .collect::<Result<_>>()?;
    let mut records = Vec::new();
    for (r, t) in per_run {
        records.push(r);
        timing.extend(t);
    }
    Ok(Evaluated { records, timing })
}
