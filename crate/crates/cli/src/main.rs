use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cwutm::cooc::{build_raw_network, weight_and_prune, write_edge_list};
use cwutm::corpus::{build_vocabulary, load_corpus, split_unbalanced};
use cwutm::experiment::{fit, load_dataset, run_experiment, ExperimentConfig, StopwordSource};
use cwutm::inference::write_assignments;
use cwutm::pseudo::{from_raw_network, from_weighted_network};
use cwutm::report::{emit_report, to_text_table};
use cwutm::synthetic::{write_corpus, SyntheticSpec};
use cwutm::{Corpus, ModelKind};

#[derive(Parser)]
#[command(name = "cwutm", version, about = "Topic models for unbalanced short-text corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded experiments and write report.json, report.csv and report.txt.
    Run(RunArgs),
    /// Generate a synthetic unbalanced corpus.
    Synth(SynthArgs),
    /// Split a labeled corpus into scarce and abundant topic subsets.
    Split(SplitArgs),
    /// Write the co-occurrence network as a tab-separated edge list.
    DumpNetwork(DumpNetworkArgs),
    /// Train one model and write its top words, phi, theta and assignments.
    DumpTopics(DumpTopicsArgs),
}

#[derive(Args)]
struct DatasetArgs {
    /// Corpus file, one document per line.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Label file aligned with the corpus.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Drop words seen fewer times than this.
    #[arg(long)]
    min_count: Option<u64>,
    /// `english`, `none`, or a path to a one-word-per-line file.
    #[arg(long)]
    stopwords: Option<String>,
}

#[derive(Args)]
struct ModelArgs {
    /// Number of topics (default: number of gold labels).
    #[arg(long)]
    topics: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    window_size: Option<usize>,
    /// Scale turning activity degrees into pseudo-document multiplicities.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Average estimates over sweeps after this many burn-in sweeps.
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// lda, wntm, cwutm or all.
    #[arg(long)]
    model: Option<String>,
    /// googlenews, searchsnippets, tweet or synthetic.
    #[arg(long)]
    preset: Option<String>,
    #[command(flatten)]
    dataset: DatasetArgs,
    #[command(flatten)]
    params: ModelArgs,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    scarce_threshold: Option<usize>,
    /// Train a separate model per subset instead of once on the full corpus.
    #[arg(long)]
    retrain_per_subset: bool,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write per-model top words and assignments from the first seed.
    #[arg(long)]
    dump_extras: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 2)]
    k_abundant: usize,
    #[arg(long, default_value_t = 2)]
    k_scarce: usize,
    #[arg(long, default_value_t = 500)]
    docs_per_abundant: usize,
    #[arg(long, default_value_t = 25)]
    docs_per_scarce: usize,
    #[arg(long, default_value_t = 40)]
    vocab_per_topic: usize,
    #[arg(long, default_value_t = 10)]
    doc_len: usize,
    #[arg(long, default_value_t = 0.1)]
    overlap_fraction: f64,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Directory for corpus.txt and labels.txt.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct SplitArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    #[arg(long)]
    scarce_threshold: Option<usize>,
    #[arg(long)]
    preset: Option<String>,
    /// Receives scarce/ and abundant/ subdirectories.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum PseudoKind {
    Raw,
    Weighted,
}

#[derive(Args)]
struct DumpNetworkArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    #[arg(long, default_value_t = 10)]
    window_size: usize,
    #[arg(long, default_value = "network.tsv")]
    output: PathBuf,
    /// Also write the pseudo-documents in corpus format to this path.
    #[arg(long)]
    pseudo: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "weighted")]
    pseudo_kind: PseudoKind,
    #[arg(long, default_value_t = 10.0)]
    lambda: f64,
}

#[derive(Args)]
struct DumpTopicsArgs {
    #[arg(long, default_value = "cwutm")]
    model: String,
    #[command(flatten)]
    dataset: DatasetArgs,
    #[command(flatten)]
    params: ModelArgs,
    /// Words listed per topic.
    #[arg(long, default_value_t = 20)]
    top: usize,
    #[arg(long)]
    output: PathBuf,
}

fn apply_dataset(cfg: &mut ExperimentConfig, d: &DatasetArgs) -> Result<()> {
    if let Some(p) = &d.corpus {
        cfg.corpus = p.clone();
    }
    if let Some(p) = &d.labels {
        cfg.labels = p.clone();
    }
    if let Some(m) = d.min_count {
        cfg.min_count = m;
    }
    if let Some(s) = &d.stopwords {
        cfg.stopwords = s.parse::<StopwordSource>()?;
    }
    Ok(())
}

fn apply_params(cfg: &mut ExperimentConfig, p: &ModelArgs) {
    if p.topics.is_some() {
        cfg.topics = p.topics;
    }
    if p.alpha.is_some() {
        cfg.alpha = p.alpha;
    }
    if p.beta.is_some() {
        cfg.beta = p.beta;
    }
    if let Some(w) = p.window_size {
        cfg.window_size = w;
    }
    if let Some(l) = p.lambda {
        cfg.lambda = l;
    }
    if let Some(i) = p.iterations {
        cfg.iterations = i;
    }
    if p.burn_in.is_some() {
        cfg.burn_in = p.burn_in;
    }
    if let Some(s) = p.seed {
        cfg.seed = s;
    }
}

fn require_dataset(cfg: &ExperimentConfig, labels: bool) -> Result<()> {
    if cfg.corpus.as_os_str().is_empty() {
        bail!("--corpus is required");
    }
    if labels && cfg.labels.as_os_str().is_empty() {
        bail!("--labels is required");
    }
    Ok(())
}

/// Loads the corpus, with labels when a label file was given.
fn load(cfg: &ExperimentConfig) -> Result<Corpus> {
    require_dataset(cfg, false)?;
    if cfg.labels.as_os_str().is_empty() {
        let raw = load_corpus(&cfg.corpus, None)?;
        Ok(build_vocabulary(&raw, cfg.min_count, &cfg.stopwords.load()?)?)
    } else {
        Ok(load_dataset(cfg)?)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        cfg.apply_kv_text(&text)
            .with_context(|| format!("in {}", path.display()))?;
    }
    if let Some(m) = &args.model {
        cfg.set("model", m)?;
    }
    if let Some(p) = &args.preset {
        cfg.set("preset", p)?;
    }
    apply_dataset(&mut cfg, &args.dataset)?;
    apply_params(&mut cfg, &args.params);
    if let Some(r) = args.runs {
        cfg.runs = r;
    }
    if args.scarce_threshold.is_some() {
        cfg.scarce_threshold = args.scarce_threshold;
    }
    if args.retrain_per_subset {
        cfg.retrain_per_subset = true;
    }
    if let Some(o) = &args.output {
        cfg.output = Some(o.clone());
    }
    require_dataset(&cfg, true)?;

    let report = run_experiment(&cfg)?;
    print!("{}", to_text_table(&report));
    let out = cfg.output.clone().unwrap_or_else(|| PathBuf::from("."));
    for p in emit_report(&report, &out)? {
        log::info!("wrote {}", p.display());
    }

    if args.dump_extras {
        let corpus = load_dataset(&cfg)?;
        for kind in cfg.model.models() {
            let f = fit(&cfg, kind, &corpus, cfg.seed)?;
            let dir = out.join(kind.to_string());
            let mut w = create(&dir.join("topics_top20.txt"))?;
            f.model.write_top_words(&mut w, corpus.vocabulary(), 20)?;
            w.flush()?;
            let mut w = create(&dir.join("assignments.csv"))?;
            write_assignments(&mut w, &corpus, &f.clusters)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let spec = SyntheticSpec {
        abundant_topics: args.k_abundant,
        scarce_topics: args.k_scarce,
        docs_per_abundant: args.docs_per_abundant,
        docs_per_scarce: args.docs_per_scarce,
        vocab_per_topic: args.vocab_per_topic,
        doc_len: args.doc_len,
        overlap_fraction: args.overlap_fraction,
        seed: args.seed,
    };
    let raw = spec.generate()?;
    write_corpus(&raw, &args.output)?;
    println!(
        "wrote {} documents over {} topics to {}",
        raw.documents.len(),
        spec.labels().len(),
        args.output.display()
    );
    Ok(())
}

fn write_subset(corpus: &Corpus, dir: &Path) -> Result<()> {
    write_corpus(&corpus.to_raw(), dir)?;
    Ok(())
}

fn split(args: SplitArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::default();
    apply_dataset(&mut cfg, &args.dataset)?;
    if let Some(p) = &args.preset {
        cfg.set("preset", p)?;
    }
    cfg.scarce_threshold = args.scarce_threshold.or(cfg.scarce_threshold);
    require_dataset(&cfg, true)?;
    let threshold = cfg
        .threshold()
        .context("--scarce-threshold or --preset is required")?;
    let corpus = load_dataset(&cfg)?;
    let (scarce, abundant) = split_unbalanced(&corpus, threshold)?;
    write_subset(&scarce, &args.output.join("scarce"))?;
    write_subset(&abundant, &args.output.join("abundant"))?;
    for (name, c) in [("scarce", &scarce), ("abundant", &abundant)] {
        println!("{name}: {} topics, {} documents", c.label_set().len(), c.len());
    }
    Ok(())
}

fn dump_network(args: DumpNetworkArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::default();
    apply_dataset(&mut cfg, &args.dataset)?;
    let corpus = load(&cfg)?;
    let raw = build_raw_network(&corpus, args.window_size)?;
    let weighted = weight_and_prune(&raw);
    let mut w = create(&args.output)?;
    write_edge_list(&mut w, &raw, &weighted, corpus.vocabulary())?;
    w.flush()?;
    println!(
        "{} raw edges, {} after pruning; wrote {}",
        raw.edge_count(),
        weighted.len(),
        args.output.display()
    );
    if let Some(path) = &args.pseudo {
        let pc = match args.pseudo_kind {
            PseudoKind::Raw => from_raw_network(&raw),
            PseudoKind::Weighted => from_weighted_network(&weighted, args.lambda)?,
        };
        let mut w = create(path)?;
        pc.write_text(&mut w, corpus.vocabulary())?;
        w.flush()?;
    }
    Ok(())
}

fn dump_topics(args: DumpTopicsArgs) -> Result<()> {
    let kind: ModelKind = args.model.parse()?;
    let mut cfg = ExperimentConfig::default();
    apply_dataset(&mut cfg, &args.dataset)?;
    apply_params(&mut cfg, &args.params);
    let corpus = load(&cfg)?;
    let f = fit(&cfg, kind, &corpus, cfg.seed)?;
    let out = &args.output;
    let mut w = create(&out.join(format!("topics_top{}.txt", args.top)))?;
    f.model.write_top_words(&mut w, corpus.vocabulary(), args.top)?;
    w.flush()?;
    let mut w = create(&out.join("phi.csv"))?;
    f.model.write_phi_csv(&mut w)?;
    w.flush()?;
    let mut w = create(&out.join("theta.csv"))?;
    f.model.write_theta_csv(&mut w)?;
    w.flush()?;
    let mut w = create(&out.join("assignments.csv"))?;
    write_assignments(&mut w, &corpus, &f.clusters)?;
    w.flush()?;
    println!("wrote {kind} topics to {}", out.display());
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run(a) => run(a),
        Command::Synth(a) => synth(a),
        Command::Split(a) => split(a),
        Command::DumpNetwork(a) => dump_network(a),
        Command::DumpTopics(a) => dump_topics(a),
    }
}
