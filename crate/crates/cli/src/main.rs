use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use favar::config::{parse_entries, validate_config, ConfigError};
use favar::pipeline::{run_from_path, summarize};
use favar::synth::{write_fixture, FixtureSpec};

#[derive(Parser)]
#[command(name = "favar", version, about = "State-level FAVAR pipeline with sign-restricted tax shocks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline described by a config file.
    Run {
        config: PathBuf,
        /// Worker threads (overrides `workers`).
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check a config file and report every problem found.
    Validate { config: PathBuf },
    /// Write a synthetic fixture described by a `key=value` spec file.
    Synth { spec: PathBuf },
    /// Print a digest of an output directory.
    Summarize { dir: PathBuf },
}

const SYNTH_KEYS: [&str; 6] = ["seed", "t", "n_aggregate", "n_regional", "start_period", "output.dir"];

fn synth_spec(path: &Path) -> Result<(FixtureSpec, PathBuf), ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Unparseable(format!("{}: {e}", path.display())))?;
    let entries = parse_entries(&text)?;
    let mut errors = Vec::new();
    for k in entries.keys() {
        if !SYNTH_KEYS.contains(&k.as_str()) {
            errors.push(format!("{k}: unknown key"));
        }
    }
    let mut spec = FixtureSpec::default();
    let mut num = |key: &str, slot: &mut dyn FnMut(&str) -> bool| {
        if let Some(v) = entries.get(key) {
            if !slot(v) {
                errors.push(format!("{key}: cannot parse {v:?}"));
            }
        }
    };
    num("seed", &mut |v| v.parse().map(|x| spec.seed = x).is_ok());
    num("t", &mut |v| v.parse().map(|x| spec.t = x).is_ok());
    num("n_aggregate", &mut |v| v.parse().map(|x| spec.n_aggregate = x).is_ok());
    num("n_regional", &mut |v| v.parse().map(|x| spec.n_regional = x).is_ok());
    num("start_period", &mut |v| v.parse().map(|x| spec.start_period = x).is_ok());
    if !entries.contains_key("seed") {
        errors.push("seed is required".into());
    }
    if !errors.is_empty() {
        return Err(ConfigError::Invalid(errors));
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let out = base.join(entries.get("output.dir").map(String::as_str).unwrap_or("fixture"));
    Ok((spec, out))
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, workers, output } => match run_from_path(&config, workers, output.as_deref()) {
            Ok(s) => {
                println!("wrote {} files to {}", s.files.len(), s.output_dir.display());
                ExitCode::SUCCESS
            }
            Err(e) => fail(e.exit_code() as u8, e),
        },
        Command::Validate { config } => match validate_config(&config) {
            Ok(_) => {
                println!("{}: ok", config.display());
                ExitCode::SUCCESS
            }
            Err(e) => fail(1, e),
        },
        Command::Synth { spec } => {
            let (fixture, out) = match synth_spec(&spec) {
                Ok(v) => v,
                Err(e) => return fail(1, e),
            };
            match write_fixture(&out, &fixture) {
                Ok(cfg) => {
                    println!("fixture config: {}", cfg.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(2, e),
            }
        }
        Command::Summarize { dir } => match summarize(&dir) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(e.exit_code() as u8, e),
        },
    }
}
