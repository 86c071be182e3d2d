use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tanbun::bundle_file::parse_bundle_file;
use tanbun::corpus::{self, render_outcome, run_entry};
use tanbun::expr::SamplerConfig;
use tanbun::runner::{exit_code, render_text, run_check, RunOptions, Suite};

/// Exit code for bad arguments, unreadable files and malformed bundles.
const USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "tanbun", version, about = "Check differential bundle structure on coordinate charts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run check suites on a bundle file.
    Check {
        file: PathBuf,
        /// `all`, or one suite (its prerequisites run too).
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        /// Sampling seed; falls back to TANBUN_SEED, then the file, then 42.
        #[arg(long)]
        seed: Option<u64>,
        /// Tangent depth for the universality squares.
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=2))]
        depth: Option<u8>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Run suites whose prerequisites failed; their results are marked untrusted.
        #[arg(long)]
        force: bool,
    },
    /// The built-in example bundles.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Subcommand)]
enum CorpusAction {
    /// List entries with their expected verdicts.
    List,
    /// Run one entry, or `all`.
    Run {
        name: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Write to stdout, treating a closed pipe as success.
fn emit(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(USAGE)
}

fn env_seed() -> Result<Option<u64>, String> {
    match std::env::var("TANBUN_SEED") {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| format!("TANBUN_SEED must be an integer, got `{s}`")),
        Err(_) => Ok(None),
    }
}

fn parse_suites(name: &str) -> Option<Vec<Suite>> {
    if name == "all" {
        Some(Suite::ALL.to_vec())
    } else {
        Suite::from_name(name).map(|s| vec![s])
    }
}

#[allow(clippy::too_many_arguments)]
fn check(
    file: PathBuf,
    suite: String,
    samples: Option<usize>,
    tol: Option<f64>,
    seed: Option<u64>,
    depth: Option<u8>,
    format: Format,
    force: bool,
) -> ExitCode {
    let bytes = match std::fs::read(&file) {
        Ok(b) => b,
        Err(e) => return usage(format!("cannot read {}: {e}", file.display())),
    };
    let Ok(text) = std::str::from_utf8(&bytes) else {
        return usage(format!("{} is not UTF-8", file.display()));
    };
    let bf = match parse_bundle_file(text) {
        Ok(b) => b,
        Err(e) => return usage(format!("{}: {e}", file.display())),
    };
    let env = match env_seed() {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    // The command line wins, then the file; `all` on the command line is
    // the default and defers to a suite named in the file.
    let suite_name = if suite == "all" { bf.suite.clone().unwrap_or(suite) } else { suite };
    let Some(suites) = parse_suites(&suite_name) else {
        return usage(format!("unknown suite `{suite_name}`"));
    };
    let defaults = SamplerConfig::default();
    let cfg = SamplerConfig {
        samples: samples.or(bf.samples).unwrap_or(defaults.samples),
        tol: tol.or(bf.tol).unwrap_or(defaults.tol),
        seed: seed.or(env).or(bf.seed).unwrap_or(defaults.seed),
    };
    if cfg.samples == 0 || !(cfg.tol > 0.0) {
        return usage("samples and tol must be positive");
    }
    let depth = depth.map(usize::from).or(bf.depth).unwrap_or(RunOptions::default().depth);
    if depth > 2 {
        return usage("depth must be 0, 1 or 2");
    }
    let opts = RunOptions { cfg, depth, force };
    let report = run_check(&bf.spec, &file.display().to_string(), &bytes, &suites, &opts);
    match format {
        Format::Text => emit(&render_text(&report)),
        Format::Json => emit(&(serde_json::to_string_pretty(&report).expect("report serializes") + "\n")),
    }
    ExitCode::from(exit_code(&report.aggregate) as u8)
}

fn corpus_run(name: &str, format: Format) -> ExitCode {
    let chosen = if name == "all" {
        corpus::entries()
    } else {
        match corpus::find(name) {
            Some(e) => vec![e],
            None => return usage(format!("no corpus entry `{name}`; see `tanbun corpus list`")),
        }
    };
    let mut opts = RunOptions::default();
    match env_seed() {
        Ok(Some(s)) => opts.cfg.seed = s,
        Ok(None) => {}
        Err(e) => return usage(e),
    }
    let outcomes: Vec<_> = chosen.iter().map(|e| run_entry(e, &opts)).collect();
    let all_met = outcomes.iter().all(|o| o.met);
    match format {
        Format::Text => {
            let mut out = String::new();
            for o in &outcomes {
                out += &format!("== {}\n{}\n", o.name, render_outcome(o));
            }
            let met = outcomes.iter().filter(|o| o.met).count();
            out += &format!("{met}/{} entries met their expectation\n", outcomes.len());
            emit(&out);
        }
        Format::Json => emit(&(serde_json::to_string_pretty(&outcomes).expect("outcomes serialize") + "\n")),
    }
    ExitCode::from(if all_met { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Check {
            file,
            suite,
            samples,
            tol,
            seed,
            depth,
            format,
            force,
        } => check(file, suite, samples, tol, seed, depth, format, force),
        Command::Corpus { action: CorpusAction::List } => {
            let mut out = String::new();
            for e in corpus::entries() {
                out += &format!("{:<34} {:<5} {}\n", e.name, format!("{:?}", e.expected).to_lowercase(), e.description);
            }
            emit(&out);
            ExitCode::SUCCESS
        }
        Command::Corpus {
            action: CorpusAction::Run { name, format },
        } => corpus_run(&name, format),
    }
}
