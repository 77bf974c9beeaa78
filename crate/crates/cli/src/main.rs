//! `tdspace`: word counts, extension counts, count-table rows, verification
//! sweeps and graph export for the tandem-duplication process.
//!
//! Exit codes: 0 when every requested check passes, 1 on usage or input
//! errors, 2 when a budget is exceeded, 3 when two routes disagree.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::mpsc;
use std::time::Duration;

use clap::{Parser, Subcommand};
use tdspace::count::DEFAULT_DP_MAX_NODES;

use commands::{Failure, Output, Suite, What};
use config::{Format, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "tdspace", version, about = "Enumerate and count tandem-duplication evolutions")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the result here instead of stdout.
    #[arg(long, short = 'o', global = true)]
    output: Option<PathBuf>,
    /// Node limit for the brute-force extension oracle.
    #[arg(long, global = true, default_value_t = DEFAULT_DP_MAX_NODES)]
    max_nodes: usize,
    /// Cap on simulator dedup records (also see TD_MAX_MEM).
    #[arg(long, global = true)]
    max_records: Option<u64>,
    /// Wall-clock limit in seconds; exceeding it exits with code 2.
    #[arg(long, global = true)]
    time_limit: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count words via the length recursion and/or exhaustive enumeration.
    Words {
        #[arg(short = 'n')]
        n: usize,
        #[arg(long)]
        recursion: bool,
        #[arg(long)]
        enumerate: bool,
        #[arg(long)]
        deep: bool,
    },
    /// Linear-extension count of one word evolution, with its factor trace.
    Count {
        /// Evolution JSON: {"steps": [[a, b], ...]}.
        file: Option<PathBuf>,
        /// Words instead of a file, e.g. "1 121 3121".
        #[arg(long, conflicts_with = "file")]
        words: Option<String>,
        /// Cross-check with the brute-force order-ideal count.
        #[arg(long)]
        oracle: bool,
    },
    /// Words, CNVs, TD-Graphs and TD-Evolutions from the simulator.
    Table {
        #[arg(short = 'n')]
        n: usize,
        /// Rows 1..=n instead of row n only.
        #[arg(long)]
        all: bool,
        #[arg(long)]
        deep: bool,
        /// Also write every distinct record of row n as JSON lines.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Run a verification suite and report per-check PASS/FAIL.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(short = 'n', default_value_t = 4)]
        n: usize,
        #[arg(long)]
        deep: bool,
    },
    /// Export the tree, Hasse diagram, major graph or β-tree of an evolution.
    Export {
        /// Evolution JSON, or a tree previously exported with --format json.
        file: PathBuf,
        #[arg(long, value_enum, default_value = "tree")]
        what: What,
    },
    /// List the induced evolutions of one evolution with their 1-nodesets.
    Induce {
        file: Option<PathBuf>,
        #[arg(long, conflicts_with = "file")]
        words: Option<String>,
    },
    /// Kernel-identity sweep over seeded random β-trees.
    Beta {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trees: usize,
        #[arg(long, default_value_t = 12)]
        max_size: usize,
        /// Include the fenced seven-node example.
        #[arg(long)]
        example: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Words { .. } => "words",
            Command::Count { .. } => "count",
            Command::Table { .. } => "table",
            Command::Verify { .. } => "verify",
            Command::Export { .. } => "export",
            Command::Induce { .. } => "induce",
            Command::Beta { .. } => "beta",
        }
    }

    fn n(&self) -> Option<usize> {
        match self {
            Command::Words { n, .. } | Command::Table { n, .. } | Command::Verify { n, .. } => Some(*n),
            _ => None,
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Command::Beta { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

fn config(cli: &Cli) -> Result<RunConfig, Failure> {
    let time_limit = match cli.time_limit {
        Some(s) if !(s.is_finite() && s >= 0.0) => {
            return Err(Failure::Usage("--time-limit must be a positive number".into()))
        }
        Some(s) => Some(Duration::from_secs_f64(s)),
        None => None,
    };
    let cfg = RunConfig {
        command: cli.command.name(),
        n: cli.command.n(),
        max_nodes: cli.max_nodes,
        max_records: cli.max_records,
        time_limit,
        workers: cli.workers,
        output: cli.output.clone(),
        format: cli.format,
        seed: cli.command.seed(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cfg: &RunConfig, command: Command) -> Result<Output, Failure> {
    match command {
        Command::Words {
            n,
            recursion,
            enumerate,
            deep,
        } => commands::words(cfg, n, recursion, enumerate, deep),
        Command::Count { file, words, oracle } => {
            let evo = commands::load_evolution(file.as_deref(), words.as_deref())?;
            commands::count(cfg, &evo, oracle)
        }
        Command::Table { n, all, deep, records } => commands::table(cfg, n, all, deep, records.as_deref()),
        Command::Verify { suite, n, deep } => commands::verify(cfg, suite, n, deep),
        Command::Export { file, what } => commands::export(cfg, &file, what),
        Command::Induce { file, words } => {
            let evo = commands::load_evolution(file.as_deref(), words.as_deref())?;
            commands::induce(cfg, &evo)
        }
        Command::Beta {
            trees,
            max_size,
            example,
            ..
        } => commands::beta(cfg, trees, max_size, example),
    }
}

fn run(cli: Cli, cfg: &RunConfig) -> Result<Output, Failure> {
    if let Some(w) = cfg.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| Failure::Other(e.to_string()))?;
    }
    let Some(limit) = cfg.time_limit else {
        return dispatch(cfg, cli.command);
    };
    let (tx, rx) = mpsc::channel();
    let worker_cfg = cfg.clone();
    std::thread::spawn(move || {
        let _ = tx.send(dispatch(&worker_cfg, cli.command));
    });
    match rx.recv_timeout(limit) {
        Ok(result) => result,
        Err(mpsc::RecvTimeoutError::Timeout) => Err(Failure::Budget(format!("time limit of {limit:?} exceeded"))),
        Err(mpsc::RecvTimeoutError::Disconnected) => Err(Failure::Other("worker thread panicked".into())),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = config(&cli).and_then(|cfg| run(cli, &cfg).map(|out| (out, cfg.output)));
    match result {
        Ok((out, output_path)) => {
            let written = match &output_path {
                Some(p) => std::fs::write(p, &out.body),
                None => std::io::stdout().lock().write_all(out.body.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
