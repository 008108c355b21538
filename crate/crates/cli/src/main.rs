use clap::{Args, Parser, Subcommand};
use diracsim::scenario::{self, Manifest, Model, RunStatus, ScenarioConfig, ScenarioId};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "diracsim", version, about = "Dirac-fermion dynamics and circuit-QED emulation scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a configuration file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Override the model selector.
        #[arg(long)]
        model: Option<Model>,
        /// Override the random seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a configuration file and print the resolved parameters.
    Validate { config: PathBuf },
    /// Compare the full and effective circuit models using the circuit
    /// parameters of a configuration file.
    Compare {
        config: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Output directory.
    #[arg(long = "out", env = "DIRACSIM_OUT")]
    out: Option<PathBuf>,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, env = "DIRACSIM_THREADS")]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Validate { config } => validate(config),
        Command::Run { config, run, model, seed } => execute(config, run, |cfg| {
            if model.is_some() {
                cfg.model = model;
            }
            if seed.is_some() {
                cfg.seed = seed;
            }
        }),
        Command::Compare { config, run } => execute(config, run, |cfg| {
            if cfg.scenario != Some(ScenarioId::Compare) {
                cfg.scenario = Some(ScenarioId::Compare);
                cfg.model = None;
                cfg.initial = None;
                cfg.times = None;
            }
        }),
    };
    ExitCode::from(code as u8)
}

fn validate(path: PathBuf) -> i32 {
    match ScenarioConfig::load(&path).and_then(|c| c.resolve()) {
        Ok(cfg) => {
            println!("{}", serde_json::to_string_pretty(&cfg).expect("resolved configuration serialises"));
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn execute(path: PathBuf, args: RunArgs, adjust: impl FnOnce(&mut ScenarioConfig)) -> i32 {
    let mut raw = match ScenarioConfig::load(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    adjust(&mut raw);
    if let Some(out) = args.out {
        raw.output_dir = Some(out);
    }
    let cfg = match raw.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Some(n) = args.threads {
        if n == 0 {
            eprintln!("error: threads: must be at least 1");
            return 2;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not configure the thread pool: {e}");
        }
    }
    log::info!("running {} ({}) into {}", cfg.scenario, cfg.model, cfg.output_dir.display());
    match scenario::run(&cfg) {
        Ok(manifest) => {
            report(&manifest);
            if manifest.status == RunStatus::Partial {
                4
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn report(m: &Manifest) {
    for w in &m.warnings {
        log::warn!("{w}");
    }
    for f in &m.failures {
        log::error!("{f}");
    }
    println!("status: {:?}", m.status);
    println!("files: {}", m.files.len());
    for (name, value) in &m.metrics {
        println!("{name} = {value}");
    }
}
