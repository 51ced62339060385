use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};

use qie_bench::data::{gen_high_rank_noise, gen_parity, write_csv};
use qie_bench::harness::{
    accuracy_summary, cells_table, cka_table, comparisons_table, emit_report, forest_table, read_report,
    render_markdown, run_benchmark, RunConfig,
};
use qie_bench::RandomStream;

#[derive(Parser)]
#[command(
    name = "qie-bench",
    version,
    about = "Benchmark quantum-inspired feature encodings against classical baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated seeds replacing the config's list.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Comma-separated dataset names to keep.
        #[arg(long, value_delimiter = ',')]
        datasets: Option<Vec<String>>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Write a synthetic dataset to CSV.
    GenData {
        #[arg(long, value_enum)]
        task: Task,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        /// Parity order (parity only).
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Render tables from a saved results.json.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Markdown)]
        format: Format,
        /// Table to print in csv format.
        #[arg(long, value_enum, default_value_t = TableKind::Comparisons)]
        table: TableKind,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Task {
    Parity,
    Highrank,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableKind {
    Cells,
    Comparisons,
    Cka,
    Forest,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            seeds,
            datasets,
            out,
            jobs,
        } => {
            let mut cfg = RunConfig::from_file(&config)?;
            if let Some(seeds) = seeds {
                cfg.seeds = seeds;
            }
            if let Some(names) = datasets {
                cfg.restrict_datasets(&names)?;
            }
            if let Some(out) = out {
                cfg.out_dir = out;
            }
            if jobs.is_some() {
                cfg.jobs = jobs;
            }
            cfg.validate()?;
            let report = run_benchmark(&cfg)?;
            emit_report(&report, &cfg.out_dir)?;
            print!("{}", accuracy_summary(&report));
            for e in &report.errors {
                eprintln!("error: {} ({}): {}", e.dataset, e.stage, e.message);
            }
            eprintln!("wrote {}", cfg.out_dir.display());
        }
        Command::GenData {
            task,
            out,
            n,
            d,
            k,
            seed,
        } => {
            let ds = match task {
                Task::Parity => {
                    let mut s = RandomStream::derive(seed, "parity/data");
                    gen_parity(n.unwrap_or(10_000), d.unwrap_or(20), k.unwrap_or(10), &mut s)?
                }
                Task::Highrank => {
                    anyhow::ensure!(k.is_none(), "--k applies only to the parity task");
                    let mut s = RandomStream::derive(seed, "high_rank_noise/data");
                    gen_high_rank_noise(n.unwrap_or(5_000), d.unwrap_or(200), &mut s)?
                }
            };
            write_csv(&ds, &out)?;
            eprintln!("wrote {} rows to {}", ds.n(), out.display());
        }
        Command::Report { input, format, table } => {
            let report = read_report(&input)?;
            let text = match format {
                Format::Markdown => render_markdown(&report)?,
                Format::Csv => match table {
                    TableKind::Cells => cells_table(&report),
                    TableKind::Comparisons => comparisons_table(&report),
                    TableKind::Cka => cka_table(&report),
                    TableKind::Forest => forest_table(&report),
                }
                .to_csv()?,
            };
            print!("{text}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
