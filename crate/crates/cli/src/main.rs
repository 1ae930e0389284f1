use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use adaptive_ogd::data::synthetic::{ctr, sentiment, CtrSpec, SentimentSpec};
use adaptive_ogd::data::{to_libsvm_string, write_libsvm};
use adaptive_ogd::harness::{self, Experiment, RunConfig};
use adaptive_ogd::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Online gradient descent experiments over box feasible sets.
///
/// Exit status: 0 when every requested check passed and every comparator
/// converged, 1 when a check failed or a comparator did not converge,
/// 2 on usage or configuration errors, 3 on data or I/O errors.
#[derive(Parser)]
#[command(name = "aogd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hinge-loss classification with progressive validation.
    Classify(RunArgs),
    /// Online logistic regression; regret against the static optimum.
    Logreg(RunArgs),
    /// Fixed-rate vs per-coordinate regret on the interleaved adversarial family.
    Separation(RunArgs),
    /// Randomised check of the regret bounds.
    BoundsAudit(RunArgs),
    /// Write a synthetic dataset in LIBSVM format (gzip when the name ends in .gz).
    Generate(GenerateArgs),
}

/// Each flag sets the config key of the same name; flags override `--config`.
#[derive(Args, Default)]
struct RunArgs {
    /// Key-value config file (`key = value` per line, `#` comments).
    #[arg(long)]
    config: Option<PathBuf>,
    /// LIBSVM file (optionally gzipped), `synthetic:ctr` or `synthetic:sentiment`.
    #[arg(long)]
    dataset: Option<String>,
    /// Comma-separated subset of global, per-coord, pa.
    #[arg(long)]
    algorithms: Option<String>,
    /// Box radius R; the feasible set is [-R, R]^n.
    #[arg(long)]
    radius: Option<String>,
    #[arg(long)]
    scale_per_coord: Option<String>,
    #[arg(long)]
    scale_global: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Comma-separated oscillation lengths for the separation sweep.
    #[arg(long)]
    t0: Option<String>,
    #[arg(long)]
    eta_min: Option<String>,
    #[arg(long)]
    eta_max: Option<String>,
    #[arg(long)]
    eta_points: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    /// Shuffle examples before the pass (true/false).
    #[arg(long)]
    shuffle: Option<String>,
    /// Fill the wall_ms column (true/false); output is then not reproducible.
    #[arg(long)]
    timing: Option<String>,
    /// Output path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn pairs(&self) -> Vec<(&'static str, &str)> {
        let fields = [
            ("dataset", &self.dataset),
            ("algorithms", &self.algorithms),
            ("radius", &self.radius),
            ("scale-per-coord", &self.scale_per_coord),
            ("scale-global", &self.scale_global),
            ("lambda", &self.lambda),
            ("seed", &self.seed),
            ("t0", &self.t0),
            ("eta-min", &self.eta_min),
            ("eta-max", &self.eta_max),
            ("eta-points", &self.eta_points),
            ("epsilon", &self.epsilon),
            ("shuffle", &self.shuffle),
            ("timing", &self.timing),
        ];
        fields
            .into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    Ctr,
    Sentiment,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(value_enum)]
    kind: Generator,
    /// Generator seed; each generator has its own default.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of examples; each generator has its own default.
    #[arg(long)]
    examples: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build_config(experiment: Experiment, args: &RunArgs) -> Result<RunConfig, Error> {
    let mut config = RunConfig::new(experiment);
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)?;
        config
            .apply_text(&text)
            .map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?;
        if config.experiment != experiment {
            return Err(Error::Usage(format!(
                "{} names experiment `{}` but the subcommand is `{}`",
                path.display(),
                config.experiment.as_str(),
                experiment.as_str()
            )));
        }
    }
    for (key, value) in args.pairs() {
        config.set(key, value)?;
    }
    if let Some(out) = &args.out {
        config.out = Some(out.clone());
    }
    Ok(config.resolve())
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn generate(args: &GenerateArgs) -> Result<(), Error> {
    let ds = match args.kind {
        Generator::Ctr => {
            let mut spec = CtrSpec::default();
            spec.seed = args.seed.unwrap_or(spec.seed);
            spec.examples = args.examples.unwrap_or(spec.examples);
            ctr(&spec)?
        }
        Generator::Sentiment => {
            let mut spec = SentimentSpec::default();
            spec.seed = args.seed.unwrap_or(spec.seed);
            spec.documents = args.examples.unwrap_or(spec.documents);
            sentiment(&spec)?
        }
    };
    log::info!("generated {} examples over {} features", ds.len(), ds.dim);
    match &args.out {
        Some(path) => write_libsvm(&ds, path),
        None => emit(&to_libsvm_string(&ds), None),
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) | Error::Csv(_) | Error::Parse { .. } | Error::EmptyDataset => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (experiment, args) = match &cli.command {
        Command::Classify(a) => (Experiment::Classify, a),
        Command::Logreg(a) => (Experiment::Logreg, a),
        Command::Separation(a) => (Experiment::Separation, a),
        Command::BoundsAudit(a) => (Experiment::BoundsAudit, a),
        Command::Generate(g) => {
            return match generate(g) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(exit_code(&e))
                }
            }
        }
    };
    let result = build_config(experiment, args).and_then(|config| {
        let report = harness::run(&config)?;
        emit(&report.text, config.out.as_ref())?;
        Ok(report.success)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: a check failed or a comparator did not converge");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
