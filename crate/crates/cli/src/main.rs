use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use phasepotts::batch::{derive_seed, solve_batch, BatchSpec, Execution};
use phasepotts::dynamics::TrajectoryRecorder;
use phasepotts::graph::{kings_graph, load_graph, save_graph, Graph, GraphFormat};
use phasepotts::metrics::{aggregate, RunStats};
use phasepotts::oracle::{exact_coloring_with, ColoringSearch};
use phasepotts::scheduler::{SolveResult, Solver, Window};
use phasepotts::Error;

mod config;

use config::{RunConfig, CONFIG_ENV};

#[derive(Parser)]
#[command(name = "phasepotts", version, about = "Staged coupled-oscillator Potts machine for graph coloring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a King's-graph instance.
    Gen(GenArgs),
    /// Run a batch of staged solves on a graph.
    Solve(SolveArgs),
    /// Decide K-colorability exactly.
    Oracle(OracleArgs),
    /// Solve King's graphs of several sizes and tabulate the results.
    Bench(BenchArgs),
    /// Re-aggregate saved result files.
    Stats(StatsArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Side length of the King's graph.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    kings: u64,
    #[arg(short, long)]
    out: PathBuf,
    /// `dimacs` or `json`; inferred from the extension when omitted.
    #[arg(long)]
    format: Option<GraphFormat>,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Key-value config file.
    #[arg(long, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    #[arg(long)]
    colors: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    /// Master seed; iteration seeds are derived from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Coupling strength K_c.
    #[arg(long)]
    coupling: Option<f64>,
    /// SHIL strength K_s.
    #[arg(long)]
    shil: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    sigma_relax: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Override a config key, e.g. `--set t_anneal1=30`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Run iterations on the calling thread only.
    #[arg(long)]
    sequential: bool,
    /// Record wall-clock times in output files (makes them non-reproducible).
    #[arg(long)]
    timing: bool,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let numeric = [
            ("coupling", self.coupling),
            ("shil", self.shil),
            ("sigma", self.sigma),
            ("sigma_relax", self.sigma_relax),
            ("dt", self.dt),
        ];
        for (key, value) in numeric {
            if let Some(v) = value {
                config.set(key, &v.to_string())?;
            }
        }
        if let Some(c) = self.colors {
            config.colors = c;
        }
        if let Some(i) = self.iters {
            config.iterations = i;
        }
        if let Some(s) = self.seed {
            config.master_seed = s;
        }
        for entry in &self.overrides {
            let (k, v) = entry.split_once('=').with_context(|| format!("--set expects KEY=VALUE, got `{entry}`"))?;
            config.set(k.trim(), v.trim())?;
        }
        config.validate()?;
        Ok(config)
    }

    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(short, long)]
    graph: PathBuf,
    #[arg(long)]
    format: Option<GraphFormat>,
    /// Output directory for result and statistics files.
    #[arg(short, long, default_value = "results")]
    out: PathBuf,
    /// Write the phase trajectory of iteration 0 as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Sample every N integration steps in the trace.
    #[arg(long, default_value_t = 10)]
    trace_every: u64,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(short, long)]
    graph: PathBuf,
    #[arg(long)]
    format: Option<GraphFormat>,
    #[arg(long, default_value_t = 4)]
    colors: usize,
    /// Maximum color assignments before giving up.
    #[arg(long, default_value_t = phasepotts::oracle::DEFAULT_SEARCH_BUDGET)]
    budget: u64,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated King's-graph side lengths.
    #[arg(long, value_delimiter = ',', required = true)]
    sides: Vec<usize>,
    /// CSV output; printed to stdout as well.
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(short, long)]
    graph: PathBuf,
    #[arg(long)]
    format: Option<GraphFormat>,
    /// Result JSON files, or directories holding `result_*.json`.
    #[arg(required = true)]
    results: Vec<PathBuf>,
    /// Statistics JSON path; a CSV is written next to it.
    #[arg(short, long, default_value = "stats.json")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Stats(args) => cmd_stats(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn format_for(path: &Path, explicit: Option<GraphFormat>) -> Result<GraphFormat> {
    explicit
        .or_else(|| GraphFormat::from_path(path))
        .with_context(|| format!("cannot infer graph format of {}; pass --format", path.display()))
}

fn read_graph(path: &Path, format: Option<GraphFormat>) -> Result<Graph> {
    let format = format_for(path, format)?;
    load_graph(path, format).with_context(|| format!("loading graph {}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode> {
    let graph = kings_graph(args.kings as usize)?;
    let format = format_for(&args.out, args.format)?;
    save_graph(&graph, &args.out, format)?;
    println!("nodes {} edges {}", graph.node_count(), graph.edge_count());
    Ok(ExitCode::SUCCESS)
}

fn strip_timing(results: &mut [SolveResult], keep: bool) {
    if !keep {
        results.iter_mut().for_each(|r| r.wall_time = None);
    }
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode> {
    let config = args.run.resolve()?;
    let graph = read_graph(&args.graph, args.format)?;
    let solver = Solver::new(&graph, config.dynamics, config.plan)?;
    let stages = config.stages().expect("validated");
    let spec = BatchSpec {
        stages,
        iterations: config.iterations,
        master_seed: config.master_seed,
        execution: args.run.execution(),
    };

    let started = Instant::now();
    let mut results = solve_batch(&solver, &spec)?;
    let elapsed = started.elapsed().as_secs_f64();
    strip_timing(&mut results, args.run.timing);
    let stats = aggregate(&results, &graph)?;

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    for (i, r) in results.iter().enumerate() {
        write_file(&args.out.join(format!("result_{i:03}.json")), &r.to_json()?)?;
    }
    write_file(&args.out.join("stats.json"), &stats.to_json()?)?;
    write_file(&args.out.join("stats.csv"), &stats.to_csv())?;
    write_file(&args.out.join("config.txt"), &config.to_text())?;

    if let Some(trace_path) = &args.trace {
        let mut recorder = TrajectoryRecorder::new(args.trace_every);
        let seed = derive_seed(config.master_seed, 0);
        let mut observe = |_: Window, s: &phasepotts::PhaseState| recorder.record(s);
        solver.solve_kcoloring_observed(stages, seed, &mut observe)?;
        write_file(trace_path, &recorder.to_csv())?;
    }

    print_summary(&stats);
    let unlocked = results.iter().filter(|r| !r.all_locked()).count();
    if unlocked > 0 {
        eprintln!("warning: {unlocked} of {} runs ended a lock window unlocked", results.len());
    }
    eprintln!("wall time {elapsed:.2} s");
    Ok(ExitCode::SUCCESS)
}

fn print_summary(stats: &RunStats) {
    println!(
        "iterations {} best_accuracy {:.4} mean_accuracy {:.4}",
        stats.per_iteration.len(),
        stats.best_accuracy,
        stats.mean_accuracy
    );
    println!(
        "stage1_cut_accuracy mean {:.4} ({} baseline {})",
        stats.mean_cut_accuracy,
        stats.cut_baseline.label(),
        stats.cut_baseline.value()
    );
    println!(
        "stage_correlation pearson {:.4} spearman {:.4}{}",
        stats.stage_correlation,
        stats.stage_correlation_spearman,
        if stats.correlation_degenerate { " (degenerate)" } else { "" }
    );
    println!("distinct_colorings {}", stats.distinct_colorings);
}

fn cmd_oracle(args: OracleArgs) -> Result<ExitCode> {
    let graph = read_graph(&args.graph, args.format)?;
    let search = ColoringSearch {
        budget: args.budget,
        ..Default::default()
    };
    match exact_coloring_with(&graph, args.colors, search) {
        Ok(Some(coloring)) => {
            println!("colorable");
            let witness: Vec<String> = coloring.iter().map(usize::to_string).collect();
            println!("{}", witness.join(" "));
        }
        Ok(None) => println!("not colorable"),
        Err(Error::BudgetExhausted { budget }) => bail!("search gave up after {budget} assignments"),
        Err(e) => return Err(e.into()),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    let config = args.run.resolve()?;
    let stages = config.stages().expect("validated");
    let mut sides = args.sides.clone();
    sides.sort_unstable();
    sides.dedup();
    if sides.contains(&0) {
        bail!("King's graph sides must be at least 1");
    }

    let mut csv = String::from("nodes,edges,search_space,search_space_bits,iterations,best_accuracy,mean_accuracy,mean_cut_accuracy,wall_time_s\n");
    for side in sides {
        let graph = kings_graph(side)?;
        let solver = Solver::new(&graph, config.dynamics, config.plan)?;
        let spec = BatchSpec {
            stages,
            iterations: config.iterations,
            master_seed: config.master_seed,
            execution: args.run.execution(),
        };
        let started = Instant::now();
        let results = solve_batch(&solver, &spec).with_context(|| format!("side {side}"))?;
        let elapsed = started.elapsed().as_secs_f64();
        let stats = aggregate(&results, &graph)?;
        let n = graph.node_count();
        writeln!(
            csv,
            "{n},{},{}^{n},{},{},{:.6},{:.6},{:.6},{}",
            graph.edge_count(),
            config.colors,
            n * stages as usize,
            config.iterations,
            stats.best_accuracy,
            stats.mean_accuracy,
            stats.mean_cut_accuracy,
            if args.run.timing { format!("{elapsed:.3}") } else { String::new() }
        )?;
        eprintln!("side {side}: best {:.4} mean {:.4} in {elapsed:.2} s", stats.best_accuracy, stats.mean_accuracy);
    }
    print!("{csv}");
    if let Some(out) = &args.out {
        write_file(out, &csv)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn collect_result_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(input)
                .with_context(|| format!("listing {}", input.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    p.file_name()
                        .and_then(|n| n.to_str())
                        .is_some_and(|n| n.starts_with("result_") && n.ends_with(".json"))
                })
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(input.clone());
        }
    }
    if files.is_empty() {
        bail!("no result files found");
    }
    Ok(files)
}

fn cmd_stats(args: StatsArgs) -> Result<ExitCode> {
    let graph = read_graph(&args.graph, args.format)?;
    let mut results = Vec::new();
    for path in collect_result_files(&args.results)? {
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        results.push(SolveResult::from_json(&text).with_context(|| format!("parsing {}", path.display()))?);
    }
    let stats = aggregate(&results, &graph)?;
    write_file(&args.out, &stats.to_json()?)?;
    write_file(&args.out.with_extension("csv"), &stats.to_csv())?;
    print_summary(&stats);
    Ok(ExitCode::SUCCESS)
}
