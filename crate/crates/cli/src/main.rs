use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use derlab::report::{exit, explain, Report};
use derlab::{run_path, RunOptions};

#[derive(Parser)]
#[command(name = "derlab", version, about = "Run derlab scenarios and inspect their reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every suite of a scenario file.
    Run {
        scenario: PathBuf,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Override the scenario's search seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Record wall time in the report (makes it non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Print one item of a report with its witnesses.
    Explain { report: PathBuf, item: String },
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::INPUT as u8)
        }
    }
}

fn real_main() -> anyhow::Result<i32> {
    match Cli::parse().command {
        Command::Run { scenario, workers, seed, report, timing } => {
            let start = std::time::Instant::now();
            let r = run_path(&scenario, RunOptions { workers, seed, timing });
            print!("{}", r.render());
            eprintln!("finished in {:.2}s", start.elapsed().as_secs_f64());
            if let Some(path) = report {
                let text = serde_json::to_string_pretty(&r)?;
                fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(r.exit_code)
        }
        Command::Explain { report, item } => {
            let text = fs::read_to_string(&report).with_context(|| format!("reading {}", report.display()))?;
            let r: Report = serde_json::from_str(&text).with_context(|| format!("parsing {}", report.display()))?;
            match explain(&r, &item) {
                Some(s) => {
                    print!("{s}");
                    Ok(exit::PASS)
                }
                None => anyhow::bail!("no item {item} in {}", report.display()),
            }
        }
    }
}
