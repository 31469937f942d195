//! The `trollscope` command line.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors.

mod commands;
pub mod manifest;
pub mod settings;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::experiments::AblationSpec;
pub use manifest::{RunManifest, RUN_MANIFEST_FILE};
pub use settings::Settings;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

pub const CONFIG_ENV: &str = "TROLLSCOPE_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "trollscope", version, about = "Troll detection experiments on news-forum comments")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand. Each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// TOML config file
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Corpus directory with publications/comments/users JSONL files
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    #[arg(long, global = true)]
    pub timezone: Option<String>,
    /// Accusation keyword file, one keyword per line
    #[arg(long, global = true)]
    pub lexicon: Option<PathBuf>,
    #[arg(long, global = true)]
    pub min_mentions: Option<u32>,
    /// Minimum comments for a user to be labeled
    #[arg(long, global = true)]
    pub min_comments: Option<u64>,
    /// Minimum comments for a paid troll to be tested
    #[arg(long, global = true)]
    pub test_min_comments: Option<u64>,
    /// Paid troll id list [default: <corpus>/paid_trolls.txt if present]
    #[arg(long, global = true)]
    pub paid_trolls: Option<PathBuf>,
    #[arg(long = "c", global = true)]
    pub c: Option<f64>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true)]
    pub folds: Option<usize>,
    /// Seed for every random choice [default: 42]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker thread cap
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory [default: trollscope-out]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepKind {
    Comments,
    Mentions,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic corpus with planted ground truth
    Synth,
    /// Validate and summarize a corpus
    Ingest,
    /// Detect accusations and write user labels
    Label,
    /// Write the feature matrix and its manifest
    Featurize {
        /// Every user with a comment instead of the experiment users
        #[arg(long)]
        all_users: bool,
    },
    /// Train a model on mentioned trolls vs. non-trolls
    Train {
        /// all_scaled, minus:<group>, only:<group>, plus_non_scaled, all_non_scaled
        #[arg(long, default_value = "all_scaled")]
        features: AblationSpec,
        /// Pick C and gamma by cross-validated grid search
        #[arg(long)]
        grid: bool,
    },
    /// Score a trained model on paid trolls vs. non-trolls
    Evaluate {
        #[arg(long)]
        model: PathBuf,
    },
    /// Run every feature-group ablation
    Ablate,
    /// Sweep the test-set comment threshold or the mention threshold
    Sweep {
        #[arg(long, value_enum, default_value = "comments")]
        by: SweepKind,
        /// Comma-separated thresholds
        #[arg(long, value_delimiter = ',')]
        values: Vec<u64>,
        /// paid-test or cv (mention sweeps only)
        #[arg(long, default_value = "paid-test")]
        mode: String,
    },
    /// Compare average behavior of the user groups
    Profile {
        /// Most active users per group
        #[arg(long, default_value_t = 100)]
        top: usize,
    },
}

enum Failure {
    Usage(String),
    Data(crate::error::Error),
}

impl From<crate::error::Error> for Failure {
    fn from(e: crate::error::Error) -> Self {
        Failure::Data(e)
    }
}

type CmdResult = Result<(), Failure>;

/// Runs one command line and returns its exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            eprintln!("\nFor more information, try '--help'.");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

fn load_settings(global: &GlobalArgs) -> Result<Settings, Failure> {
    let base = match &global.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
            Settings::from_toml(&text)
                .map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?
        }
        None => Settings::default(),
    };
    Ok(base.resolve(global))
}

fn run(cli: Cli) -> CmdResult {
    let settings = load_settings(&cli.global)?;
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = settings.jobs {
            if n == 0 {
                return Err(Failure::Usage("--jobs must be at least 1".into()));
            }
            b = b.num_threads(n);
        }
        b.build().map_err(|e| Failure::Usage(e.to_string()))?
    };
    let ctx = commands::Context {
        settings,
        config_file: cli.global.config.clone(),
    };
    pool.install(|| match cli.command {
        Command::Synth => commands::synth(&ctx),
        Command::Ingest => commands::ingest(&ctx),
        Command::Label => commands::label(&ctx),
        Command::Featurize { all_users } => commands::featurize(&ctx, all_users),
        Command::Train { features, grid } => commands::train(&ctx, features, grid),
        Command::Evaluate { model } => commands::evaluate(&ctx, &model),
        Command::Ablate => commands::ablate(&ctx),
        Command::Sweep { by, values, mode } => match by {
            SweepKind::Comments => commands::sweep_comments(&ctx, values),
            SweepKind::Mentions => commands::sweep_mentions(&ctx, values, &mode),
        },
        Command::Profile { top } => commands::profile(&ctx, top),
    })
}
