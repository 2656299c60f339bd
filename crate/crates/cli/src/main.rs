//! `netsimp` command line.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use netsimp::graph::load_edge_list_file;
use netsimp::netprops::{full_report, BetweennessMode, LocalProperty};
use netsimp::pipeline::{comparison_stage, emit_reports, load_store, run_experiment, validate_config, ReportFormat};
use netsimp::simplify::{simplify, SizeParameter};
use netsimp::Method;

#[derive(Parser)]
#[command(
    name = "netsimp",
    version,
    about = "Simplify networks and score how well the simplifications preserve structure"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Rn,
    Rd,
    Rl,
    Bf,
    Cg,
    Bp,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Rn => Method::Rn,
            MethodArg::Rd => Method::Rd,
            MethodArg::Rl => Method::Rl,
            MethodArg::Bf => Method::Bf,
            MethodArg::Cg => Method::Cg,
            MethodArg::Bp => Method::Bp,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full experiment grid described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Simplify one edge list.
    Simplify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Fraction of nodes to keep (RN, RD, RL, BF).
        #[arg(long, conflicts_with = "c")]
        s: Option<f64>,
        /// Box radius (CG).
        #[arg(long)]
        c: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        directed: bool,
        /// Also write the node mapping as CSV.
        #[arg(long)]
        mapping: Option<PathBuf>,
    },
    /// Compute structural properties of one edge list.
    Props {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        directed: bool,
        /// Estimate betweenness from this many pivot sources instead of exactly.
        #[arg(long)]
        pivots: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for per-node distributions; globals go to stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the method comparison of a finished run at another size.
    Assess {
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        at_size: f64,
        #[arg(long, default_value_t = 2)]
        at_c: usize,
        /// Write the comparison as JSON here instead of printing a summary.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run { config, out, jobs, format } => run(&config, out, jobs, format),
        Command::Simplify { input, method, s, c, seed, out, directed, mapping } => {
            let method = Method::from(method);
            let size = match (method, s, c) {
                (Method::Cg, None, Some(c)) => SizeParameter::Radius(c),
                (Method::Cg, _, _) => bail!("CG takes --c"),
                (Method::Bp, None, None) => SizeParameter::Unset,
                (Method::Bp, _, _) => bail!("BP takes neither --s nor --c"),
                (_, Some(s), None) => SizeParameter::Fraction(s),
                _ => bail!("{method} takes --s"),
            };
            let g = load_edge_list_file(&input, directed).with_context(|| format!("reading {}", input.display()))?;
            let net = simplify(&g, method, size, seed)?;
            net.graph.write_edge_list(BufWriter::new(File::create(&out)?))?;
            if let Some(path) = mapping {
                net.write_mapping_csv(&g, BufWriter::new(File::create(path)?))?;
            }
            for flag in &net.flags {
                eprintln!("note: {}", serde_json::to_string(flag)?);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Props { input, directed, pivots, seed, out } => {
            let g = load_edge_list_file(&input, directed).with_context(|| format!("reading {}", input.display()))?;
            let mode = pivots.map_or(BetweennessMode::Exact, |k| BetweennessMode::Pivots { k, seed });
            let report = full_report::<f64>(&g, mode);
            let globals = serde_json::to_string_pretty(&report.globals_json())?;
            match out {
                None => println!("{globals}"),
                Some(dir) => {
                    fs::create_dir_all(&dir)?;
                    fs::write(dir.join("globals.json"), globals + "\n")?;
                    for p in report.local_properties() {
                        let file = File::create(dir.join(format!("{p}.csv")))?;
                        report.write_distribution_csv(&g, p, BufWriter::new(file))?;
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Assess { store, at_size, at_c, out } => {
            let store = load_store(&store).with_context(|| format!("loading {}", store.display()))?;
            let cmp = comparison_stage(&store, at_size, at_c)?;
            if let Some(path) = out {
                fs::write(path, serde_json::to_string_pretty(&cmp)? + "\n")?;
                return Ok(ExitCode::SUCCESS);
            }
            let mut w = io::stdout().lock();
            for n in &cmp.per_network {
                writeln!(w, "{}: {}", n.network, ordered(&n.verdict.ordered))?;
            }
            for p in &cmp.per_property {
                let tag = if LocalProperty::ALL.iter().any(|l| l.as_str() == p.property) { "A" } else { "rho" };
                writeln!(w, "{} ({tag}): {}", p.property, ordered(&p.verdict.ordered))?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn ordered(list: &[(Method, f64)]) -> String {
    list.iter().map(|(m, v)| format!("{m}={v:.4}")).collect::<Vec<_>>().join(" ")
}

fn run(config: &Path, out: Option<PathBuf>, jobs: Option<usize>, format: Format) -> anyhow::Result<ExitCode> {
    let mut cfg = validate_config(config)?;
    if let Some(out) = out {
        cfg.output_dir = out;
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build()?;
    let store = pool.install(|| run_experiment(&cfg))?;
    let format = match format {
        Format::Csv => ReportFormat::Csv,
        Format::Json => ReportFormat::Json,
    };
    emit_reports(&store, &cfg.output_dir, format).with_context(|| format!("writing {}", cfg.output_dir.display()))?;
    let m = &store.manifest;
    eprintln!("{} of {} tasks completed, results in {}", m.completed_tasks, m.planned_tasks, cfg.output_dir.display());
    if let Err(e) = &store.comparison {
        eprintln!("note: comparison stage skipped: {e}");
    }
    if m.failed_tasks > 0 {
        eprintln!("{} tasks failed", m.failed_tasks);
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}
