//! `lexalign` command-line front end. Exit status: 0 on success, 1 on usage
//! or configuration errors, 2 on data errors.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lexalign::alignment::{fit, load_map, pair_matrices, project_shared, project_space, save_map, Method, Ridge, Side};
use lexalign::dictionary::{load_pair_dictionary, validate_pairs, write_drop_report, Band, PairFormat, SourceKind};
use lexalign::embedding::{load_embeddings_with, save_embeddings, EmbeddingSpace, FrequencyTable, LoadOptions};
use lexalign::experiments::{
    benchmark, generate_bundle, run_data_scaling, run_factor_grid, write_report, CellKey, DictionarySources, DocCount,
    ExperimentConfig, ExperimentReport, ValidationCriterion,
};
use lexalign::intrinsic::{load_test_set, precision_at_1};
use lexalign::synthetic::{ExportConfig, MapKind};
use lexalign::tagger::{evaluate_f1, load_conll, train_tagger, TaggerModel};

#[derive(Parser)]
#[command(
    name = "lexalign",
    version,
    about = "Domain seed dictionaries, cross-lingual maps and their evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic bilingual world and its manifest.
    GenWorld(GenWorldArgs),
    /// Build a seed dictionary.
    BuildDict(BuildDictArgs),
    /// Fit a projection map on a seed dictionary.
    FitMap(FitMapArgs),
    /// Apply a projection map to an embedding space.
    Project(ProjectArgs),
    /// Word-translation precision@1 of a projected space.
    EvalP1(EvalP1Args),
    /// Train a BIO tagger.
    TrainTagger(TrainTaggerArgs),
    /// Span F1 of a tagger on a corpus.
    EvalF1(EvalF1Args),
    /// Run the dictionary factor grid.
    Grid(RunArgs),
    /// Run the low-resource data-scaling experiment.
    Scaling(RunArgs),
}

/// Config file plus path overrides shared by every subcommand.
#[derive(Args, Clone, Default)]
struct Common {
    /// Experiment config or world manifest (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    source_embeddings: Option<PathBuf>,
    #[arg(long)]
    target_embeddings: Option<PathBuf>,
    #[arg(long)]
    source_frequencies: Option<PathBuf>,
    #[arg(long)]
    target_frequencies: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    muse_dictionary: Option<PathBuf>,
    #[arg(long)]
    idp_dictionary: Option<PathBuf>,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long)]
    test_set: Option<PathBuf>,
    #[arg(long)]
    pivot_corpus: Option<PathBuf>,
    #[arg(long)]
    low_resource_corpus: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    master_seed: Option<u64>,
    /// Embedding files have no `n d` header line.
    #[arg(long)]
    no_header: bool,
}

#[derive(Args)]
struct GenWorldArgs {
    #[command(flatten)]
    common: Common,
    /// Directory for the generated files and manifest.
    #[arg(long)]
    out: PathBuf,
    /// Start from a published benchmark world.
    #[arg(long, value_parser = ["factor", "noise"])]
    benchmark: Option<String>,
    #[arg(long)]
    vocab_size: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    noise_sigma: Option<f64>,
    #[arg(long)]
    map_kind: Option<MapKind>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dict_train: Option<usize>,
    #[arg(long)]
    dict_test: Option<usize>,
    #[arg(long)]
    pivot_docs: Option<usize>,
    #[arg(long)]
    low_resource_docs: Option<usize>,
    #[arg(long)]
    generic_size: Option<usize>,
}

#[derive(Args)]
struct BuildDictArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "domain")]
    source: SourceKind,
    #[arg(long)]
    size: usize,
    /// Frequency band; generic dictionaries without a band keep file order.
    #[arg(long)]
    band: Option<Band>,
    /// Drop pairs whose target word occurs fewer times than this.
    #[arg(long)]
    threshold: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "tsv")]
    format: PairFormat,
}

#[derive(Args)]
struct FitMapArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    dictionary: PathBuf,
    #[arg(long, default_value = "tsv")]
    dictionary_format: PairFormat,
    #[arg(long)]
    method: Option<Method>,
    /// Least-squares ridge.
    #[arg(long)]
    ridge: Option<f64>,
    /// Fixed CCA ridge instead of the automatic one.
    #[arg(long)]
    cca_ridge: Option<f64>,
    #[arg(long)]
    keep_ratio: Option<f64>,
    #[arg(long)]
    center: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ProjectArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    map: PathBuf,
    /// Project into the shared canonical space of a CCA map instead.
    #[arg(long, value_parser = ["source", "target"])]
    shared: Option<String>,
    /// Space to project; defaults to the source embeddings.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalP1Args {
    #[command(flatten)]
    common: Common,
    /// Source space already projected into the target space.
    #[arg(long)]
    projected: PathBuf,
    /// Per-word results as TSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainTaggerArgs {
    #[command(flatten)]
    common: Common,
    /// Pivot-language corpus; defaults to the configured pivot corpus.
    #[arg(long)]
    train: Option<PathBuf>,
    /// Space for `--train`; defaults to the target embeddings.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Additional low-resource corpus for joint training.
    #[arg(long, requires = "joint_embeddings")]
    joint: Option<PathBuf>,
    /// Projected space for `--joint`.
    #[arg(long)]
    joint_embeddings: Option<PathBuf>,
    /// Use only the first N documents of `--joint`.
    #[arg(long)]
    joint_docs: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    radius: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalF1Args {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    model: PathBuf,
    /// Test corpus; defaults to the configured low-resource corpus.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Space the test tokens are looked up in.
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Full Cartesian grid instead of one factor at a time.
    #[arg(long)]
    cartesian: bool,
    /// Tune validation thresholds on dev zero-shot F1 instead of held-out P@1.
    #[arg(long)]
    tune_on_f1: bool,
    /// Override `scaling.doc_counts`, e.g. `0,200,full`.
    #[arg(long, value_delimiter = ',')]
    doc_counts: Option<Vec<DocCount>>,
}

/// Distinguishes usage mistakes from data problems for the exit status.
enum Failure {
    Usage(String),
    Data(lexalign::Error),
}

impl From<lexalign::Error> for Failure {
    fn from(e: lexalign::Error) -> Self {
        match e {
            lexalign::Error::Config(m) => Failure::Usage(m),
            other => Failure::Data(other),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

impl Common {
    fn config(&self) -> CliResult<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) if !path.is_file() => return usage(format!("config file not found: {}", path.display())),
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let p = &mut c.paths;
        let set = |dst: &mut PathBuf, src: &Option<PathBuf>| {
            if let Some(s) = src {
                *dst = s.clone();
            }
        };
        set(&mut p.source_embeddings, &self.source_embeddings);
        set(&mut p.target_embeddings, &self.target_embeddings);
        set(&mut p.pivot_corpus, &self.pivot_corpus);
        set(&mut p.low_resource_corpus, &self.low_resource_corpus);
        let opt = |dst: &mut Option<PathBuf>, src: &Option<PathBuf>| {
            if src.is_some() {
                *dst = src.clone();
            }
        };
        opt(&mut p.source_frequencies, &self.source_frequencies);
        opt(&mut p.target_frequencies, &self.target_frequencies);
        opt(&mut p.lexicon, &self.lexicon);
        opt(&mut p.muse_dictionary, &self.muse_dictionary);
        opt(&mut p.idp_dictionary, &self.idp_dictionary);
        opt(&mut p.stopwords, &self.stopwords);
        opt(&mut p.test_set, &self.test_set);
        if let Some(d) = &self.output_dir {
            c.output_dir = d.clone();
        }
        if let Some(s) = self.master_seed {
            c.master_seed = s;
        }
        if self.no_header {
            c.embeddings.header = false;
        }
        Ok(c)
    }
}

fn required<'a>(path: &'a Path, flag: &str) -> CliResult<&'a Path> {
    if path.as_os_str().is_empty() {
        return usage(format!("missing {flag} (flag or config path)"));
    }
    Ok(path)
}

fn load_space(config: &ExperimentConfig, path: &Path) -> CliResult<EmbeddingSpace> {
    let opts = LoadOptions {
        expect_header: config.embeddings.header,
        lowercase: config.embeddings.lowercase,
        language: None,
    };
    Ok(load_embeddings_with(path, &opts)?)
}

fn gen_world(a: GenWorldArgs) -> CliResult<()> {
    let template = a.common.config()?;
    let (mut world, mut export) = match a.benchmark.as_deref() {
        Some("factor") => (benchmark::factor_world(), benchmark::factor_export()),
        Some(_) => (benchmark::noise_world(0.0), ExportConfig::default()),
        None => (
            template.world.clone().unwrap_or_default(),
            template.export.clone().unwrap_or_default(),
        ),
    };
    let mut template = if a.benchmark.as_deref() == Some("factor") && a.common.config.is_none() {
        benchmark::factor_experiment()
    } else {
        template
    };
    macro_rules! apply {
        ($dst:expr, $src:expr) => {
            if let Some(v) = $src {
                $dst = v;
            }
        };
    }
    apply!(world.vocab_size, a.vocab_size);
    apply!(world.dim, a.dim);
    apply!(world.noise_sigma, a.noise_sigma);
    apply!(world.map_kind, a.map_kind);
    apply!(world.seed, a.seed);
    apply!(world.dict_train, a.dict_train);
    apply!(world.dict_test, a.dict_test);
    apply!(export.pivot_docs, a.pivot_docs);
    apply!(export.low_resource_docs, a.low_resource_docs);
    apply!(export.generic_size, a.generic_size);
    if world.seed > i64::MAX as u64 {
        return usage(format!("--seed must be at most {}", i64::MAX));
    }
    // Bundle paths are relative to the bundle; drop any inherited ones.
    template.paths = Default::default();
    template.output_dir = PathBuf::new();
    let manifest = generate_bundle(&world, &export, &template, &a.out)?;
    println!("{}", manifest.display());
    Ok(())
}

fn build_dict(a: BuildDictArgs) -> CliResult<()> {
    let config = a.common.config()?;
    if a.size == 0 {
        return usage("--size must be positive");
    }
    let band = match (a.source, a.band) {
        (SourceKind::Domain, b) => Some(b.unwrap_or(Band::High)),
        (SourceKind::Synthetic, _) => return usage("--source must be domain, muse or idp"),
        (_, b) => b,
    };
    let key = CellKey {
        source: a.source,
        size: a.size,
        band,
        method: config.alignment.method,
    };
    let dict = DictionarySources::load(&config)?.build(&key)?;
    let dict = match a.threshold {
        Some(t) => {
            let freqs = match &config.paths.target_frequencies {
                Some(p) => FrequencyTable::load(p)?,
                None => return usage("--threshold needs --target-frequencies"),
            };
            let (kept, drops) = validate_pairs(&dict, &freqs, t);
            let mut report = a.out.clone().into_os_string();
            report.push(".drops.tsv");
            write_drop_report(&drops, PathBuf::from(report))?;
            eprintln!("validation threshold {t}: kept {} of {} pairs", kept.len(), dict.len());
            kept
        }
        None => dict,
    };
    dict.save(&a.out, a.format)?;
    println!(
        "{} pairs ({}) -> {}",
        dict.len(),
        dict.provenance_notes,
        a.out.display()
    );
    Ok(())
}

fn fit_map(a: FitMapArgs) -> CliResult<()> {
    let config = a.common.config()?;
    let source = load_space(
        &config,
        required(&config.paths.source_embeddings, "--source-embeddings")?,
    )?;
    let target = load_space(
        &config,
        required(&config.paths.target_embeddings, "--target-embeddings")?,
    )?;
    let dict = load_pair_dictionary(&a.dictionary, a.dictionary_format, SourceKind::Domain)?;
    let mut settings = config.alignment.settings();
    if let Some(r) = a.ridge {
        settings.ridge = r;
    }
    if let Some(r) = a.cca_ridge {
        settings.cca.ridge = Ridge::Fixed(r);
    }
    if let Some(k) = a.keep_ratio {
        settings.cca.keep_ratio = k;
    }
    settings.center |= a.center;
    let method = a.method.unwrap_or(config.alignment.method);
    let pm = pair_matrices(&dict, &source, &target)?;
    let map = fit(method, &pm, &settings)?;
    save_map(&map, &a.out)?;
    println!(
        "{method} map {}x{} from {} pairs ({} skipped) -> {}",
        map.source_dim(),
        map.target_dim(),
        pm.n(),
        pm.skipped,
        a.out.display()
    );
    Ok(())
}

fn project(a: ProjectArgs) -> CliResult<()> {
    let config = a.common.config()?;
    let input = match &a.input {
        Some(p) => p.clone(),
        None => required(&config.paths.source_embeddings, "--input or --source-embeddings")?.to_path_buf(),
    };
    let space = load_space(&config, &input)?;
    let map = load_map(&a.map)?;
    let projected = match a.shared.as_deref() {
        None => project_space(&space, &map)?,
        Some("target") => project_shared(&space, &map, Side::Target)?,
        Some(_) => project_shared(&space, &map, Side::Source)?,
    };
    save_embeddings(&projected, &a.out)?;
    println!(
        "{} vectors of dimension {} -> {}",
        projected.len(),
        projected.dim(),
        a.out.display()
    );
    Ok(())
}

fn eval_p1(a: EvalP1Args) -> CliResult<()> {
    let config = a.common.config()?;
    let test_path = match &config.paths.test_set {
        Some(p) => p.clone(),
        None => return usage("missing --test-set (flag or config path)"),
    };
    let target = load_space(
        &config,
        required(&config.paths.target_embeddings, "--target-embeddings")?,
    )?;
    let projected = load_space(&config, &a.projected)?;
    let report = precision_at_1(&projected, &target, &load_test_set(&test_path)?)?;
    if let Some(out) = &a.out {
        report.save(out)?;
    }
    println!("{}", report.summary());
    Ok(())
}

fn train(a: TrainTaggerArgs) -> CliResult<()> {
    let config = a.common.config()?;
    let train_path = a.train.clone().unwrap_or_else(|| config.paths.pivot_corpus.clone());
    let emb_path = a
        .embeddings
        .clone()
        .unwrap_or_else(|| config.paths.target_embeddings.clone());
    let space = load_space(&config, required(&emb_path, "--embeddings or --target-embeddings")?)?;
    let mut corpus = load_conll(required(&train_path, "--train or --pivot-corpus")?)?;
    corpus.language = space.language().to_string();
    let mut joint = None;
    if let (Some(jp), Some(je)) = (&a.joint, &a.joint_embeddings) {
        let jspace = load_space(&config, je)?;
        let mut jc = load_conll(jp)?;
        jc.language = jspace.language().to_string();
        if jc.language == corpus.language {
            return usage("--joint-embeddings and --embeddings need different language tags (file stems)");
        }
        if let Some(n) = a.joint_docs {
            if n > jc.len() {
                return usage(format!("--joint-docs {n} exceeds the {} documents available", jc.len()));
            }
            jc.sequences.truncate(n);
        }
        joint = Some((jc, jspace));
    }
    let mut spaces = HashMap::from([(space.language().to_string(), &space)]);
    let mut corpora = vec![&corpus];
    if let Some((jc, jspace)) = &joint {
        spaces.insert(jspace.language().to_string(), jspace);
        corpora.push(jc);
    }
    let mut tc = config.tagger.train_config(a.seed);
    if let Some(e) = a.epochs {
        tc.epochs = e;
    }
    if let Some(r) = a.radius {
        tc.radius = r;
    }
    let model = train_tagger(&corpora, &spaces, &tc)?;
    model.save(&a.out)?;
    let docs: usize = corpora.iter().map(|c| c.len()).sum();
    println!("trained on {docs} documents -> {}", a.out.display());
    Ok(())
}

fn eval_f1(a: EvalF1Args) -> CliResult<()> {
    let config = a.common.config()?;
    let test_path = a
        .test
        .clone()
        .unwrap_or_else(|| config.paths.low_resource_corpus.clone());
    let test = load_conll(required(&test_path, "--test or --low-resource-corpus")?)?;
    let space = load_space(&config, &a.embeddings)?;
    let model = TaggerModel::load(&a.model)?;
    let report = evaluate_f1(&model, &test, &space)?;
    if let Some(out) = &a.out {
        report.save(out)?;
    }
    println!("{} OOV {}", report.summary(), report.oov_rate);
    Ok(())
}

fn run_experiment(a: RunArgs, grid: bool) -> CliResult<()> {
    if a.common.config.is_none() {
        return usage("--config is required");
    }
    let mut config = a.common.config()?;
    if a.cartesian {
        config.grid.sequential = false;
    }
    if a.tune_on_f1 {
        config.dictionary.validation_criterion = ValidationCriterion::DevF1;
    }
    if let Some(counts) = a.doc_counts {
        config.scaling.doc_counts = counts;
    }
    let report = if grid {
        ExperimentReport::Grid(run_factor_grid(&config)?)
    } else {
        ExperimentReport::Scaling(run_data_scaling(&config)?)
    };
    let files = write_report(&config, &report)?;
    print!("{}", report.to_tsv());
    eprintln!("report written to {}", files.report.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::GenWorld(a) => gen_world(a),
        Command::BuildDict(a) => build_dict(a),
        Command::FitMap(a) => fit_map(a),
        Command::Project(a) => project(a),
        Command::EvalP1(a) => eval_p1(a),
        Command::TrainTagger(a) => train(a),
        Command::EvalF1(a) => eval_f1(a),
        Command::Grid(a) => run_experiment(a, true),
        Command::Scaling(a) => run_experiment(a, false),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            eprintln!("run `lexalign <command> --help` for usage");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
