use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use evidencer::config::{ConfigError, RunConfig};
use evidencer::corpus::{read_corpus_file, segment_sentences};
use evidencer::eval::{average_curves, diversity_at_k, emit_report, precision_at_k, Provenance};
use evidencer::index::{load_index, save_index, SemanticIndex};
use evidencer::labeling::{
    aggregate_labels, filter_annotators, read_label_records, read_snapshot, run_loop, weighted_overall_kappa,
    write_label_records, write_needs_labels, write_snapshot, AnnotationSource, DatasetSnapshot, FileSource,
    FilterConfig, GoldPair, Label, LoopConfig, PairKey,
};
use evidencer::pipeline::{
    self, build_pool, corpus_name, load_cascades, load_motions, load_redirects, rank_candidates, read_candidates,
    read_ranking, read_truth, retrieve_all, simulated_crowd, write_candidates, write_ranking, PipelineError,
    RankSettings,
};
use evidencer::ranker::{LogisticModel, ScorerSpec, TrainConfig};

/// Sentence-level evidence retrieval pipeline.
///
/// Stages communicate through files under the configured output directory:
/// index → retrieve → rank → label-loop → eval.
#[derive(Parser)]
#[command(name = "evidencer", version)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(short, long, global = true, env = "EVIDENCER_CONFIG", default_value = "evidencer.toml")]
    config: PathBuf,

    /// Seed for all randomness; overrides the config's `seed`.
    #[arg(long, global = true, env = "EVIDENCER_SEED")]
    seed: Option<u64>,

    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and segment the corpus; write one JSON line per sentence.
    Ingest {
        /// Output file [default: <out>/sentences.jsonl]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Annotate the corpus and write the binary index.
    Index,
    /// Run the query cascades for each motion and write candidates.
    Retrieve {
        /// Only this motion.
        #[arg(long)]
        motion: Option<String>,
        /// Output file [default: <out>/candidates.csv]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score, sort and deduplicate candidates.
    Rank(RankArgs),
    /// Run the retrospective-labeling loop.
    LabelLoop(LoopArgs),
    /// Filter annotators and aggregate crowd labels into gold labels.
    AggregateLabels {
        /// Label records [default: paths.labels]
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Gold label file [default: <out>/gold.csv]
        #[arg(long)]
        out: Option<PathBuf>,
        /// Maximum discarding passes [default: until stable]
        #[arg(long)]
        max_passes: Option<usize>,
        /// Discard annotators that share too few items with everyone.
        #[arg(long)]
        distrust_isolated: bool,
    },
    /// Precision@k and diversity reports for a ranking.
    Eval {
        /// Ranking file [default: <out>/ranking.csv]
        #[arg(long)]
        ranking: Option<PathBuf>,
        /// Gold labels in snapshot format [default: <out>/snapshot.csv]
        #[arg(long)]
        gold: Option<PathBuf>,
        /// Model name used in report file names.
        #[arg(long, default_value = "builtin")]
        model: String,
        /// Skip motions whose ranked prefix is short or unlabeled instead of failing.
        #[arg(long)]
        skip_incomplete: bool,
    },
    /// Check the configuration and that its input files exist.
    ValidateConfig,
}

#[derive(Args)]
struct RankArgs {
    /// Candidates file [default: <out>/candidates.csv]
    #[arg(long)]
    candidates: Option<PathBuf>,
    /// Output file [default: <out>/ranking.csv]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep near-duplicate sentences.
    #[arg(long)]
    no_dedup: bool,
}

#[derive(Args)]
struct LoopArgs {
    /// Iterations [default: config `iterations`]
    #[arg(long)]
    iterations: Option<usize>,
    /// Pairs labeled per motion (and evidence type) [default: config `k`]
    #[arg(long)]
    k: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(path: &Path) -> Result<RunConfig, PipelineError> {
    let cfg = RunConfig::from_file(path)?;
    cfg.validate()?;
    Ok(cfg)
}

fn seed(cli_seed: Option<u64>, cfg: &RunConfig) -> u64 {
    cli_seed.or(cfg.seed).unwrap_or(0)
}

fn out_path(cfg: &RunConfig, given: Option<PathBuf>, default: &str) -> PathBuf {
    given.unwrap_or_else(|| cfg.paths.out.join(default))
}

fn open_index(cfg: &RunConfig) -> Result<SemanticIndex, PipelineError> {
    Ok(load_index(&cfg.paths.index)?)
}

fn bootstrap_model(cfg: &RunConfig) -> Result<LogisticModel, PipelineError> {
    Ok(match &cfg.paths.model {
        Some(p) => LogisticModel::from_file(p)?,
        None => LogisticModel::default(),
    })
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let cfg = load_config(&cli.config)?;
    let seed = seed(cli.seed, &cfg);
    log::info!("config {} (seed {seed})", cli.config.display());
    match cli.command {
        Command::ValidateConfig => {
            cfg.check_inputs()?;
            load_cascades(&cfg.paths.cascades, cfg.cap)?;
            let redirects = load_redirects(&cfg)?;
            load_motions(&cfg.paths.motions, &redirects)?;
            println!("ok");
        }
        Command::Ingest { out } => {
            #[derive(Serialize)]
            struct Row<'a> {
                doc_id: &'a str,
                index: u32,
                text: &'a str,
            }
            let docs = read_corpus_file(&cfg.paths.corpus)?;
            let path = out_path(&cfg, out, "sentences.jsonl");
            let mut buf = Vec::new();
            let mut n = 0;
            for doc in &docs {
                for s in segment_sentences(doc) {
                    let row = Row { doc_id: &s.id.doc_id, index: s.id.index, text: &s.text };
                    serde_json::to_writer(&mut buf, &row).expect("sentence serializes");
                    buf.push(b'\n');
                    n += 1;
                }
            }
            write_file(&path, &buf)?;
            println!("{} documents, {n} sentences -> {}", docs.len(), path.display());
        }
        Command::Index => {
            let docs = read_corpus_file(&cfg.paths.corpus)?;
            let annotator = pipeline::load_annotator(&cfg)?;
            let index = pipeline::index_corpus(&docs, &annotator)?;
            ensure_parent(&cfg.paths.index)?;
            save_index(&index, &cfg.paths.index)?;
            println!(
                "{} documents, {} sentences, {} keys -> {}",
                index.doc_count(),
                index.sentence_count(),
                index.keys().count(),
                cfg.paths.index.display()
            );
        }
        Command::Retrieve { motion, out } => {
            let index = open_index(&cfg)?;
            let redirects = load_redirects(&cfg)?;
            let cascades = load_cascades(&cfg.paths.cascades, cfg.cap)?;
            let mut motions = load_motions(&cfg.paths.motions, &redirects)?;
            if let Some(id) = &motion {
                motions.retain(|m| &m.motion_id == id);
                if motions.is_empty() {
                    return Err(PipelineError::Data(format!("no motion `{id}` in {}", cfg.paths.motions.display())));
                }
            }
            let candidates = retrieve_all(&index, &cascades, &motions)?;
            let path = out_path(&cfg, out, "candidates.csv");
            write_candidates(&path, &index, &candidates)?;
            println!("{} candidates for {} motions -> {}", candidates.len(), motions.len(), path.display());
        }
        Command::Rank(args) => {
            let index = open_index(&cfg)?;
            let redirects = load_redirects(&cfg)?;
            let motions = load_motions(&cfg.paths.motions, &redirects)?;
            let candidates = read_candidates(&out_path(&cfg, args.candidates, "candidates.csv"))?;
            let spec = match cfg.scorer_spec()? {
                Some(ext) => ScorerSpec::External(ext),
                None => ScorerSpec::Builtin(bootstrap_model(&cfg)?),
            };
            let mut scorer = spec.connect()?;
            let stop_words = pipeline::load_stop_words(&cfg)?;
            let settings = RankSettings {
                mask_token: &cfg.mask_token,
                dedup_threshold: (!args.no_dedup).then_some(cfg.thresholds.dedup),
                binarize_threshold: cfg.thresholds.binarize,
                stop_words: &stop_words,
            };
            let rows = rank_candidates(&index, &motions, &candidates, scorer.as_mut(), &settings)?;
            let path = out_path(&cfg, args.out, "ranking.csv");
            write_ranking(&path, &rows)?;
            println!("{} ranked candidates ({}) -> {}", rows.len(), scorer.name(), path.display());
        }
        Command::LabelLoop(args) => label_loop(&cfg, seed, args)?,
        Command::AggregateLabels { labels, out, max_passes, distrust_isolated } => {
            let labels = labels.or_else(|| cfg.paths.labels.clone()).ok_or_else(|| {
                ConfigError::Invalid("no label records: pass --labels or set paths.labels".into())
            })?;
            let records = read_label_records(&labels)?;
            let filter_cfg = FilterConfig {
                min_common: cfg.thresholds.min_common,
                min_avg_kappa: cfg.thresholds.kappa,
                max_passes,
                trust_isolated: !distrust_isolated,
            };
            let filter = filter_annotators(&records, &filter_cfg);
            let agg = aggregate_labels(&records, &filter.trusted, cfg.thresholds.min_trusted);
            let gold_path = out_path(&cfg, out, "gold.csv");
            ensure_parent(&gold_path)?;
            let pairs = agg.labels.iter().map(|l| GoldPair { pair: l.pair.clone(), gold: l.gold, iteration: 1 }).collect();
            write_snapshot(&gold_path, &DatasetSnapshot::from_pairs(1, pairs))?;
            let needs = cfg.paths.out.join("needs_labels.csv");
            write_needs_labels(&needs, agg.under_labeled.iter().map(|(p, _)| p))?;
            write_annotator_report(&cfg.paths.out.join("annotators.csv"), &filter.reports)?;
            let overall = weighted_overall_kappa(&filter.reports)
                .map(|k| format!("{k:.4}"))
                .unwrap_or_else(|_| "n/a".into());
            println!(
                "{} of {} annotators trusted (overall kappa {overall}); {} gold pairs, {} need labels -> {}",
                filter.trusted.len(),
                filter.reports.len(),
                agg.labels.len(),
                agg.under_labeled.len(),
                gold_path.display()
            );
        }
        Command::Eval { ranking, gold, model, skip_incomplete } => {
            let index = open_index(&cfg)?;
            let ranking = read_ranking(&out_path(&cfg, ranking, "ranking.csv"))?;
            let gold_snapshot = read_snapshot(&out_path(&cfg, gold, "snapshot.csv"))?;
            let gold: BTreeMap<PairKey, Label> = gold_snapshot.pairs.into_iter().map(|g| (g.pair, g.gold)).collect();
            let mut curves = Vec::new();
            let mut provenance = Vec::new();
            for (motion, list) in &ranking {
                match precision_at_k(list, &gold, &cfg.eval_ks) {
                    Ok(c) => curves.push(c),
                    Err(e) if skip_incomplete => log::warn!("motion {motion} skipped: {e}"),
                    Err(e) => return Err(e.into()),
                }
                provenance.push(
                    list.iter()
                        .map(|p| Provenance {
                            doc_id: p.sentence.doc_id.clone(),
                            source: index.document(&p.sentence.doc_id).map(|d| d.source.clone()).unwrap_or_default(),
                        })
                        .collect(),
                );
            }
            let precision = if curves.is_empty() { Default::default() } else { average_curves(&curves)? };
            let diversity = diversity_at_k(&provenance, &cfg.eval_ks)?;
            let files = emit_report(&cfg.reports_dir(), &model, &corpus_name(&cfg), &precision, &diversity)?;
            println!("{} of {} motions evaluated -> {}", curves.len(), ranking.len(), files[0].parent().unwrap().display());
        }
    }
    Ok(())
}

fn label_loop(cfg: &RunConfig, seed: u64, args: LoopArgs) -> Result<(), PipelineError> {
    let index = open_index(cfg)?;
    let redirects = load_redirects(cfg)?;
    let cascades = load_cascades(&cfg.paths.cascades, cfg.cap)?;
    let motions = load_motions(&cfg.paths.motions, &redirects)?;
    let pool = build_pool(&index, &cascades, &motions, &cfg.mask_token)?;
    let mut source: Box<dyn AnnotationSource> = match (&cfg.paths.truth, &cfg.paths.labels) {
        (Some(truth), _) => Box::new(simulated_crowd(read_truth(truth)?, &pool, cfg, seed)?),
        (None, Some(labels)) => Box::new(FileSource::from_file(labels)?),
        (None, None) => {
            return Err(ConfigError::Invalid("label-loop needs paths.truth (simulated crowd) or paths.labels".into()).into())
        }
    };
    let loop_cfg = LoopConfig {
        k: args.k.unwrap_or(cfg.k),
        per_type: cfg.per_type,
        iterations: args.iterations.unwrap_or(cfg.iterations),
        filter: FilterConfig { min_common: cfg.thresholds.min_common, min_avg_kappa: cfg.thresholds.kappa, ..Default::default() },
        min_trusted: cfg.thresholds.min_trusted,
        top_up_rounds: 3,
        train: TrainConfig::default(),
    };
    let outcome = run_loop(&pool, &bootstrap_model(cfg)?, source.as_mut(), &loop_cfg)?;
    let out = &cfg.paths.out;
    std::fs::create_dir_all(out).map_err(|source| PipelineError::Io { path: out.clone(), source })?;
    let last = outcome.snapshots.last().expect("at least one iteration");
    write_snapshot(&out.join("snapshot.csv"), last)?;
    write_label_records(&out.join("label_records.csv"), &outcome.records)?;
    write_needs_labels(&out.join("needs_labels.csv"), outcome.under_labeled.iter().map(|(p, _)| p))?;
    for (i, model) in outcome.models.iter().enumerate() {
        model.save(&out.join(format!("model_iter{}.txt", i + 1)))?;
    }
    for s in &outcome.snapshots {
        let new: Vec<Label> = s.added_in(s.iteration).map(|g| g.gold).collect();
        println!(
            "iteration {}: {} pairs ({:.3} positive), {} new ({:.3} positive)",
            s.iteration,
            s.len(),
            s.positive_fraction,
            new.len(),
            evidencer::labeling::positive_fraction(new.iter().copied())
        );
    }
    Ok(())
}

fn write_annotator_report(path: &Path, reports: &[evidencer::labeling::AnnotatorReport]) -> Result<(), PipelineError> {
    let mut buf = String::from("annotator_id,weighted_avg_kappa,qualifying_pairs,trusted\n");
    for r in reports {
        let avg = r.weighted_avg_kappa.map(|k| k.to_string()).unwrap_or_default();
        buf.push_str(&format!("{},{avg},{},{}\n", r.annotator_id, r.pairwise.len(), r.trusted));
    }
    write_file(path, buf.as_bytes())
}

fn ensure_parent(path: &Path) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| PipelineError::Io { path: dir.to_path_buf(), source })?;
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    ensure_parent(path)?;
    let io = |source| PipelineError::Io { path: path.to_path_buf(), source };
    let mut f = std::fs::File::create(path).map_err(io)?;
    f.write_all(bytes).map_err(io)
}
