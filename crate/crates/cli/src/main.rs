use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use taxoeval_core::embedding::remote::ENDPOINT_ENV;
use taxoeval_core::eval::{self, EncoderSpec, EvaluationConfig, Mode};
use taxoeval_core::perturb::Perturbation;
use taxoeval_core::taxonomy::{read_directory, read_taxonomy_file, validate_json, ParseMode, TaxonomyError};

#[derive(Parser)]
#[command(name = "taxoeval", version, about = "Evaluate generated taxonomies against expert references")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score model taxonomies against expert taxonomies.
    Evaluate(EvaluateArgs),
    /// Write a perturbed copy of a taxonomy.
    Perturb(PerturbArgs),
    /// List constraint violations in a taxonomy file or directory.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    BottomUp,
    DeepResearch,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncoderArg {
    Test,
    Remote,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParseArg {
    Strict,
    Lenient,
}

impl From<ParseArg> for ParseMode {
    fn from(p: ParseArg) -> Self {
        match p {
            ParseArg::Strict => ParseMode::Strict,
            ParseArg::Lenient => ParseMode::Lenient,
        }
    }
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Expert taxonomy file, or a directory with one entry per survey.
    #[arg(long)]
    expert: PathBuf,
    /// Model taxonomy file, or a directory paired with --expert by survey id.
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum, default_value = "test")]
    encoder: EncoderArg,
    /// Base URL of the embedding service.
    #[arg(long, env = ENDPOINT_ENV)]
    endpoint: Option<String>,
    /// Model id sent to the embedding service.
    #[arg(long)]
    encoder_id: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.6)]
    threshold: f64,
    #[arg(long, value_enum, default_value = "strict")]
    parse: ParseArg,
    /// JSON report path.
    #[arg(long)]
    out: PathBuf,
    /// Optional flat CSV export.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Persistent embedding cache file.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Include one optimal edit script per survey.
    #[arg(long)]
    witness: bool,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    SiblingShuffle,
    RewireSwap,
    SplitLeaf,
    ContractNode,
    Relabel,
}

#[derive(Args)]
struct PerturbArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Seed for sibling-shuffle.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Target node as `>`-separated labels below the root.
    #[arg(long)]
    path: Option<String>,
    /// First subtree for rewire-swap.
    #[arg(long)]
    a: Option<String>,
    /// Second subtree for rewire-swap.
    #[arg(long)]
    b: Option<String>,
    /// Number of parts for split-leaf.
    #[arg(long, default_value_t = 2)]
    parts: usize,
    /// New label for relabel.
    #[arg(long)]
    label: Option<String>,
    #[arg(long, value_enum, default_value = "strict")]
    parse: ParseArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long = "in")]
    input: PathBuf,
}

fn encoder_spec(args: &EvaluateArgs) -> Result<EncoderSpec> {
    Ok(match args.encoder {
        EncoderArg::Test => EncoderSpec::Test,
        EncoderArg::Remote => {
            let Some(endpoint) = args.endpoint.clone().filter(|e| !e.trim().is_empty()) else {
                bail!("--encoder remote needs --endpoint or {ENDPOINT_ENV}");
            };
            let Some(model) = args.encoder_id.clone() else {
                bail!("--encoder remote needs --encoder-id");
            };
            EncoderSpec::Remote { model, endpoint }
        }
    })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn run_evaluate(args: EvaluateArgs) -> Result<u8> {
    let mode = match args.mode {
        ModeArg::BottomUp => Mode::BottomUp,
        ModeArg::DeepResearch => Mode::DeepResearch,
    };
    let mut config = EvaluationConfig::new(mode, &args.expert, &args.model);
    config.encoder = encoder_spec(&args)?;
    config.lambda = args.lambda;
    config.alignment_threshold = args.threshold;
    config.parse_mode = args.parse.into();
    config.cache_path = args.cache.clone();
    config.witness = args.witness;
    config.workers = args.jobs;

    let report = eval::evaluate(&config)?;
    write_file(&args.out, report.to_json().as_bytes())?;
    if let Some(csv_path) = &args.csv {
        let mut buf = Vec::new();
        report.write_csv(&mut buf).context("rendering CSV")?;
        write_file(csv_path, &buf)?;
    }
    let m = &report.macro_avg;
    eprintln!(
        "evaluated {} surveys ({} failed); report written to {}",
        m.surveys_evaluated,
        m.surveys_failed,
        args.out.display()
    );
    if !report.complete {
        eprintln!("report is incomplete: the encoder failed");
    }
    Ok(eval::exit_code(&report) as u8)
}

fn run_perturb(args: PerturbArgs) -> Result<u8> {
    let require = |v: &Option<String>, flag: &str| -> Result<String> {
        v.clone().with_context(|| format!("--kind needs {flag}"))
    };
    let perturbation = match args.kind {
        KindArg::SiblingShuffle => Perturbation::SiblingShuffle { seed: args.seed },
        KindArg::RewireSwap => Perturbation::RewireSwap {
            a: require(&args.a, "--a")?,
            b: require(&args.b, "--b")?,
        },
        KindArg::SplitLeaf => Perturbation::SplitLeaf {
            path: require(&args.path, "--path")?,
            parts: args.parts,
        },
        KindArg::ContractNode => Perturbation::ContractNode {
            path: require(&args.path, "--path")?,
        },
        KindArg::Relabel => Perturbation::Relabel {
            path: require(&args.path, "--path")?,
            label: require(&args.label, "--label")?,
        },
    };
    let parsed = read_taxonomy_file(&args.input, args.parse.into())
        .with_context(|| format!("reading {}", args.input.display()))?;
    let out = perturbation.apply(&parsed.taxonomy)?;
    write_file(&args.out, out.to_json().as_bytes())?;
    Ok(0)
}

fn run_validate(args: ValidateArgs) -> Result<u8> {
    let survey_id = args
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let diagnostics = if args.input.is_dir() {
        match read_directory(&args.input, &survey_id, ParseMode::Strict) {
            Ok(p) => p.warnings,
            Err(TaxonomyError::Invalid { diagnostics }) => diagnostics,
            Err(e) => return Err(e.into()),
        }
    } else {
        let text = fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
        validate_json(&text, &survey_id)?
    };
    for d in &diagnostics {
        println!("{d}");
    }
    let violations = diagnostics.iter().filter(|d| d.kind.is_violation()).count();
    if violations > 0 {
        eprintln!("{violations} violation(s)");
        Ok(1)
    } else {
        Ok(0)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Evaluate(a) => run_evaluate(a),
        Command::Perturb(a) => run_perturb(a),
        Command::Validate(a) => run_validate(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
