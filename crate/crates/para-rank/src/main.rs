use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use para_rank::pipeline::{
    checkpoint_load, checkpoint_save, load_eval_records, load_train_records, AskOutcome,
    Pipeline, PipelineConfig, PipelineError,
};
use para_rank::ranker::{
    train, EmbeddingContext, ModelConfig, NoiseDistribution, RankerModel, ScorerKind,
    TrainExample, TrainingConfig,
};
use para_rank::reader::{ExternalAnswers, LexicalReader, Reader};
use para_rank::retriever::{Corpus, IndexOptions, TfIdfIndex};
use para_rank::text::{load_embeddings, tokenize, Token, Vocabulary};

#[derive(Parser)]
#[command(
    name = "para-rank",
    version,
    about = "Open-domain QA: TF-IDF retrieval, Bi-LSTM paragraph ranking, answer aggregation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a TF-IDF document index from a JSON-lines corpus
    Index(IndexArgs),
    /// Train the paragraph ranker with negative sampling
    Train(TrainArgs),
    /// Answer a single question and print the top-paragraph trace
    Ask(AskArgs),
    /// Evaluate exact match and recall on a QA set (JSON report to stdout)
    Eval(EvalArgs),
    /// Grid-search aggregation weights on a validation QA set
    Gridsearch(GridArgs),
}

#[derive(Args)]
struct IndexArgs {
    /// Corpus JSON-lines file: {"id", "title", "paragraphs": [...]}
    #[arg(long)]
    corpus: PathBuf,
    /// Output index path
    #[arg(long)]
    out: PathBuf,
    /// Highest n-gram order to index (1 or 2)
    #[arg(long, default_value_t = 2)]
    ngrams: usize,
    /// Hash terms into 2^bits bins instead of an explicit vocabulary
    /// (0 disables hashing)
    #[arg(long = "hash-bits", default_value_t = 0)]
    hash_bits: u32,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScorerArg {
    Dot,
    Bilinear,
    Mlp,
}

impl From<ScorerArg> for ScorerKind {
    fn from(value: ScorerArg) -> Self {
        match value {
            ScorerArg::Dot => ScorerKind::Dot,
            ScorerArg::Bilinear => ScorerKind::Bilinear,
            ScorerArg::Mlp => ScorerKind::Mlp,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Training QA JSON-lines: {"question", "answers", "positive"}
    #[arg(long)]
    qa: PathBuf,
    /// Pretrained embeddings in word2vec text format
    #[arg(long)]
    emb: PathBuf,
    /// Output checkpoint path
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = ScorerArg::Dot)]
    scorer: ScorerArg,
    #[arg(long, default_value_t = 3)]
    layers: usize,
    /// Hidden units per direction
    #[arg(long, default_value_t = 128)]
    hidden: usize,
    /// Negatives sampled per positive
    #[arg(long, default_value_t = 4)]
    kneg: usize,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.002)]
    lr: f64,
    #[arg(long, default_value_t = 0.4)]
    dropout: f64,
    /// Global gradient-norm clip
    #[arg(long, default_value_t = 10.0)]
    clip: f64,
    /// MLP scorer hidden width (0 means 2 x hidden)
    #[arg(long = "mlp-hidden", default_value_t = 0)]
    mlp_hidden: usize,
    /// Embedding width to assume when the embeddings file is empty
    #[arg(long, default_value_t = 300)]
    dim: usize,
}

/// Paths and overrides shared by ask/eval/gridsearch. Anything not given
/// as a flag falls back to the config file, then to the defaults.
#[derive(Args)]
struct RuntimeArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    emb: Option<PathBuf>,
    /// TOML or JSON pipeline config
    #[arg(long)]
    config: Option<PathBuf>,
    /// Documents to retrieve (N)
    #[arg(short = 'n', long = "n-docs")]
    n_docs: Option<usize>,
    /// Paragraphs to read (M)
    #[arg(short = 'm', long = "m-paragraphs")]
    m_paragraphs: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long = "max-span")]
    max_span: Option<usize>,
}

#[derive(Args)]
struct AskArgs {
    /// The question to answer
    question: String,
    #[command(flatten)]
    runtime: RuntimeArgs,
}

#[derive(Args)]
struct EvalArgs {
    /// Evaluation QA JSON-lines: {"id", "question", "answers"}
    #[arg(long)]
    qa: PathBuf,
    /// Precomputed external-reader answers (JSON-lines); replaces the
    /// lexical baseline
    #[arg(long)]
    answers: Option<PathBuf>,
    #[command(flatten)]
    runtime: RuntimeArgs,
}

#[derive(Args)]
struct GridArgs {
    /// Validation QA JSON-lines
    #[arg(long)]
    qa: PathBuf,
    #[arg(long)]
    answers: Option<PathBuf>,
    #[command(flatten)]
    runtime: RuntimeArgs,
}

enum CliError {
    Usage(String),
    Pipeline(PipelineError),
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError::Pipeline(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Index(args) => run_index(args),
        Command::Train(args) => run_train(args),
        Command::Ask(args) => run_ask(args),
        Command::Eval(args) => run_eval(args),
        Command::Gridsearch(args) => run_gridsearch(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Pipeline(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn open_buffered(path: &Path) -> Result<BufReader<File>, PipelineError> {
    Ok(BufReader::new(File::open(path)?))
}

fn run_index(args: IndexArgs) -> Result<(), CliError> {
    if !(1..=2).contains(&args.ngrams) {
        return Err(CliError::Usage("--ngrams must be 1 or 2".to_string()));
    }
    if args.hash_bits > 30 {
        return Err(CliError::Usage("--hash-bits must be at most 30".to_string()));
    }
    let corpus = Corpus::ingest(open_buffered(&args.corpus)?).map_err(PipelineError::from)?;
    let index = TfIdfIndex::build(
        &corpus,
        IndexOptions {
            ngram_max: args.ngrams,
            hash_bits: args.hash_bits,
        },
    )
    .map_err(PipelineError::from)?;
    index.save_to_path(&args.out).map_err(PipelineError::from)?;
    println!(
        "indexed {} documents ({} paragraphs) -> {}",
        corpus.len(),
        corpus.paragraph_count(),
        args.out.display()
    );
    Ok(())
}

fn run_train(args: TrainArgs) -> Result<(), CliError> {
    let corpus = Corpus::ingest(open_buffered(&args.corpus)?).map_err(PipelineError::from)?;
    let records = load_train_records(open_buffered(&args.qa)?).map_err(PipelineError::from)?;
    if records.is_empty() {
        return Err(CliError::Usage("training file contains no records".into()));
    }

    // Vocabulary: corpus paragraphs plus question and answer tokens, in
    // deterministic first-seen order.
    let mut vocab = Vocabulary::new();
    fn add_all(tokens: &[Token], vocab: &mut Vocabulary) {
        for t in tokens {
            vocab.add(t);
        }
    }
    for p in corpus.paragraphs() {
        add_all(&p.tokens, &mut vocab);
    }
    for r in &records {
        add_all(&tokenize(&r.question), &mut vocab);
        for a in &r.answers {
            add_all(&tokenize(a), &mut vocab);
        }
    }

    let table = load_embeddings(open_buffered(&args.emb)?, &vocab, args.dim)
        .map_err(PipelineError::from)?;

    let mut dataset = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        let positive = corpus
            .paragraph(&r.positive.doc_id, r.positive.para_index)
            .ok_or_else(|| {
                PipelineError::Config(format!(
                    "training record {i}: positive paragraph {}#{} not found in corpus",
                    r.positive.doc_id, r.positive.para_index
                ))
            })?;
        dataset.push(TrainExample {
            question: tokenize(&r.question),
            answers: r.answers.clone(),
            positive,
        });
    }

    let model_config = ModelConfig {
        embedding_dim: table.dim(),
        hidden_dim: args.hidden,
        num_layers: args.layers,
        dropout: args.dropout,
        scorer: args.scorer.into(),
        mlp_hidden: if args.mlp_hidden == 0 {
            2 * args.hidden
        } else {
            args.mlp_hidden
        },
    };
    let mut init_rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut model = RankerModel::init(&model_config, &mut init_rng);
    let noise = NoiseDistribution::from_corpus(&corpus);
    let ctx = EmbeddingContext::new(&vocab, &table);
    let train_config = TrainingConfig {
        k_neg: args.kneg,
        learning_rate: args.lr,
        epochs: args.epochs,
        seed: args.seed,
        clip_norm: args.clip,
        ..TrainingConfig::default()
    };
    let log = train(&mut model, &ctx, &dataset, &noise, &train_config)
        .map_err(PipelineError::from)?;
    for e in &log.epochs {
        eprintln!("epoch {}: mean loss {:.6}", e.epoch, e.mean_loss);
    }
    checkpoint_save(&model, &vocab, &args.out).map_err(PipelineError::from)?;
    println!(
        "trained {} examples for {} epochs -> {}",
        dataset.len(),
        args.epochs,
        args.out.display()
    );
    Ok(())
}

fn resolve(
    flag: Option<PathBuf>,
    config_value: &Option<PathBuf>,
    name: &str,
) -> Result<PathBuf, CliError> {
    flag.or_else(|| config_value.clone()).ok_or_else(|| {
        CliError::Usage(format!(
            "missing {name}: pass --{name} or set {name}_path in the config"
        ))
    })
}

fn build_pipeline(args: RuntimeArgs) -> Result<Pipeline, CliError> {
    let mut config = match &args.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(n) = args.n_docs {
        config.n_docs = n;
    }
    if let Some(m) = args.m_paragraphs {
        config.m_paragraphs = m;
    }
    if let Some(a) = args.alpha {
        config.weights.alpha = a;
    }
    if let Some(b) = args.beta {
        config.weights.beta = b;
    }
    if let Some(g) = args.gamma {
        config.weights.gamma = g;
    }
    if let Some(s) = args.max_span {
        config.max_span = s;
    }
    config.validate()?;

    let corpus_path = resolve(args.corpus, &config.corpus_path, "corpus")?;
    let index_path = resolve(args.index, &config.index_path, "index")?;
    let model_path = resolve(args.model, &config.model_path, "model")?;
    let emb_path = resolve(args.emb, &config.embeddings_path, "emb")?;

    let corpus = Corpus::ingest(open_buffered(&corpus_path)?).map_err(PipelineError::from)?;
    let index = TfIdfIndex::load_from_path(&index_path).map_err(PipelineError::from)?;
    let checkpoint = checkpoint_load(&model_path).map_err(PipelineError::from)?;
    let embeddings = load_embeddings(
        open_buffered(&emb_path)?,
        &checkpoint.vocab,
        config.embedding_dim,
    )
    .map_err(PipelineError::from)?;
    Ok(Pipeline::new(
        config,
        corpus,
        index,
        checkpoint.vocab,
        embeddings,
        checkpoint.model,
    )?)
}

fn run_ask(args: AskArgs) -> Result<(), CliError> {
    let pipeline = build_pipeline(args.runtime)?;
    let reader = LexicalReader::from_index(&pipeline.index, pipeline.config.max_span);
    let outcome = pipeline.answer(&reader, "cli", &args.question)?;
    match outcome {
        AskOutcome::Answered {
            answer,
            score,
            trace,
        } => {
            println!("answer: {answer}");
            println!("score: {score:.6}");
            println!("trace:");
            for t in trace {
                let mut text = t.text.clone();
                if text.len() > 100 {
                    let cut = text
                        .char_indices()
                        .take_while(|(i, _)| *i < 100)
                        .last()
                        .map(|(i, c)| i + c.len_utf8())
                        .unwrap_or(100);
                    text.truncate(cut);
                    text.push_str("...");
                }
                println!(
                    "  {}. {}#{} combined={:.6} ranker={:.6} doc={:.6} | {}",
                    t.rank, t.doc_id, t.para_index, t.combined, t.ranker_prob, t.doc_score, text
                );
            }
        }
        AskOutcome::NoAnswer { reason } => {
            println!("no answer: {reason}");
        }
    }
    Ok(())
}

fn eval_reader<'a>(
    answers: &Option<PathBuf>,
    pipeline: &'a Pipeline,
) -> Result<Box<dyn Reader + 'a>, CliError> {
    match answers {
        Some(path) => {
            let external = ExternalAnswers::load(open_buffered(path)?)
                .map_err(PipelineError::from)?;
            Ok(Box::new(external))
        }
        None => Ok(Box::new(LexicalReader::from_index(
            &pipeline.index,
            pipeline.config.max_span,
        ))),
    }
}

fn run_eval(args: EvalArgs) -> Result<(), CliError> {
    let items = load_eval_records(open_buffered(&args.qa)?)
        .map_err(PipelineError::from)?;
    let pipeline = build_pipeline(args.runtime)?;
    let reader = eval_reader(&args.answers, &pipeline)?;
    let report = pipeline.evaluate(reader.as_ref(), &items)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    Ok(())
}

fn run_gridsearch(args: GridArgs) -> Result<(), CliError> {
    let items = load_eval_records(open_buffered(&args.qa)?)
        .map_err(PipelineError::from)?;
    let pipeline = build_pipeline(args.runtime)?;
    let reader = eval_reader(&args.answers, &pipeline)?;
    let report = pipeline.grid_search(reader.as_ref(), &items)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    Ok(())
}
