mod config;
mod error;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use readlens_core::clustering::Method;
use readlens_core::synth::SynthConfig;

use config::{parse_k_range, Config};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "readlens",
    version,
    about = "Gaze logs to clustered reading profiles and a teacher report"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Kmeans,
    Gmm,
    Spectral,
    All,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Clustering seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: logical cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Use the offline template backend instead of the HTTP API.
    #[arg(long)]
    mock_llm: bool,
    /// Cluster counts to try, e.g. `2-8`.
    #[arg(long, value_parser = parse_k_range)]
    k_range: Option<(usize, usize)>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Detect fixations in every gaze log.
    Fixations(Common),
    /// Compute raw and standardized feature tables.
    Features(Common),
    /// Sweep cluster counts, validate and profile the selected models.
    Cluster(Common),
    /// Build the curator prompt and generate the Markdown report.
    Report(Common),
    /// Score the report with the evaluator agent.
    Evaluate(Common),
    /// Run every stage in order.
    Pipeline(Common),
    /// Write the synthetic cohort dataset.
    GenFixture {
        /// Target directory (default: the config's data_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = readlens_core::synth::COHORT_SIZE)]
        students: usize,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load_config(common: &Common) -> Result<Config, CliError> {
    let mut cfg = match &common.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(d) = &common.data_dir {
        cfg.data_dir = d.clone();
    }
    if let Some(d) = &common.out_dir {
        cfg.out_dir = d.clone();
    }
    if let Some(s) = common.seed {
        cfg.clustering.seed = s;
    }
    if let Some(j) = common.jobs {
        cfg.jobs = Some(j);
    }
    if common.mock_llm {
        cfg.llm.mock = true;
    }
    if let Some((a, b)) = common.k_range {
        cfg.clustering.k_min = a;
        cfg.clustering.k_max = b;
    }
    match common.method {
        Some(MethodArg::All) => cfg.clustering.methods = Method::ALL.to_vec(),
        Some(m) => {
            let m = match m {
                MethodArg::Kmeans => Method::Kmeans,
                MethodArg::Gmm => Method::Gmm,
                _ => Method::Spectral,
            };
            cfg.clustering.methods = vec![m];
            cfg.clustering.report_method = m;
        }
        None => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn init_pool(jobs: Option<usize>) -> Result<(), CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        b = b.num_threads(j);
    }
    b.build_global().map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Command::GenFixture {
        out,
        seed,
        students,
        config,
    } = &cli.command
    {
        let dir = match (out, config) {
            (Some(o), _) => o.clone(),
            (None, Some(c)) => Config::load(c)?.data_dir,
            (None, None) => Config::default().data_dir,
        };
        init_pool(None)?;
        let synth = SynthConfig {
            n_students: *students,
            seed: *seed,
            ..SynthConfig::default()
        };
        stages::gen_fixture(&dir, &synth)?;
        println!("wrote {students} synthetic students to {}", dir.display());
        return Ok(());
    }

    let common = match &cli.command {
        Command::Fixations(c)
        | Command::Features(c)
        | Command::Cluster(c)
        | Command::Report(c)
        | Command::Evaluate(c)
        | Command::Pipeline(c) => c,
        Command::GenFixture { .. } => unreachable!("handled above"),
    };
    let cfg = load_config(common)?;
    init_pool(cfg.jobs)?;
    match cli.command {
        Command::Fixations(_) => {
            stages::fixations(&cfg)?;
        }
        Command::Features(_) => {
            stages::features(&cfg)?;
        }
        Command::Cluster(_) => {
            stages::cluster(&cfg)?;
        }
        Command::Report(_) => stages::report(&cfg, stages::make_backend(&cfg)?.as_ref())?,
        Command::Evaluate(_) => stages::evaluate(&cfg, stages::make_backend(&cfg)?.as_ref())?,
        Command::Pipeline(_) => stages::pipeline(&cfg, stages::make_backend(&cfg)?.as_ref())?,
        Command::GenFixture { .. } => unreachable!("handled above"),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
