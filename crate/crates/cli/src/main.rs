use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use mst_moea::exec::Parallelism;
use mst_moea::experiment::{
    generate_instance, instance_id, run_trial, sweep, verify, write_csv, write_sweep_csv, Algorithm, Check,
    ExperimentConfig, SweepConfig,
};
use mst_moea::graph::{parse_instance, Genotype, Graph};
use mst_moea::objective::FitnessVector;
use mst_moea::oracle::{brute_force_pareto, conv_hull_extremals, extremal_trees};
use mst_moea::run::StopRule;
use mst_moea::variation::{MechanismConfig, Mutation};

#[derive(Parser)]
#[command(name = "mst-moea", version, about = "Evolutionary bi-objective minimum spanning trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random connected instance.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        wmax: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the extremal points with one witness tree each.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Parametric)]
        method: Method,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one trial and print its CSV record.
    Run(RunArgs),
    /// Run a parameter sweep described by a TOML file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run invariant checks; exits nonzero if any fails.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "oracle,elitism,antichain,drift")]
        checks: Vec<String>,
        #[arg(long, default_value_t = 5)]
        seeds: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Parametric,
    Bruteforce,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Nsga2,
    Gsemo,
}

#[derive(Clone, Copy, ValueEnum)]
enum MutationArg {
    Standard,
    Balanced,
}

#[derive(Clone, Copy, ValueEnum)]
enum StopArg {
    Coverage,
    FirstTree,
    BudgetOnly,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    algo: AlgoArg,
    #[arg(long, value_enum, default_value_t = MutationArg::Standard)]
    mutation: MutationArg,
    /// Expected number of flipped bits for standard mutation.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long)]
    crossover_q: Option<f64>,
    #[arg(long)]
    pop_size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Generations (NSGA-II) or steps (GSEMO).
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, value_enum, default_value_t = StopArg::Coverage)]
    stop: StopArg,
    #[arg(long)]
    monitors: bool,
    #[arg(long)]
    trace_potential: Option<PathBuf>,
    /// Allow NSGA-II populations below the elitism threshold.
    #[arg(long)]
    allow_unsafe_population: bool,
    /// GSEMO per-bit mutation probability (default 1/m).
    #[arg(long)]
    rate: Option<f64>,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen { n, m, wmax, seed, out } => {
            let g = generate_instance(n, m, wmax, seed)?;
            let text = format!("# {}\n{}", instance_id(n, m, wmax, seed), g.to_instance_text());
            emit(out.as_deref(), &text)?;
        }
        Command::Oracle { instance, method, out } => {
            let g = load(&instance)?;
            emit(out.as_deref(), &oracle_text(&g, method)?)?;
        }
        Command::Run(args) => run(args)?,
        Command::Sweep { config, out, jobs } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let cfg = SweepConfig::from_toml(&text)?;
            let rows = sweep(&cfg, Parallelism::from_jobs(jobs))?;
            let file = fs::File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            write_sweep_csv(&rows, io::BufWriter::new(file))?;
            let failed: Vec<_> = rows.iter().filter_map(|r| r.as_ref().err()).collect();
            for (instance, algo, seed, reason) in &failed {
                eprintln!("row failed: {instance} {} seed {seed}: {reason}", algo.name());
            }
            let hit = rows.iter().filter(|r| r.as_ref().is_ok_and(|r| r.summary.budget_hit)).count();
            eprintln!("{} rows written, {hit} hit the budget, {} failed", rows.len(), failed.len());
        }
        Command::Verify { instance, checks, seeds } => {
            let g = load(&instance)?;
            let checks =
                checks.iter().map(|c| c.parse::<Check>().map_err(anyhow::Error::msg)).collect::<Result<Vec<_>>>()?;
            let mut ok = true;
            for report in verify(&g, &checks, seeds) {
                let status = if report.passed() { "PASS" } else { "FAIL" };
                println!("{:?}: {status}", report.check);
                for failure in &report.failures {
                    println!("  {failure}");
                }
                ok &= report.passed();
            }
            return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn load(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => io::stdout().write_all(text.as_bytes()).context("writing to stdout"),
    }
}

/// One "f1 f2" line per extremal point followed by its witness edges as
/// 1-indexed vertex pairs.
fn oracle_text(g: &Graph, method: Method) -> Result<String> {
    let witnessed: Vec<(FitnessVector, Genotype)> = match method {
        Method::Parametric => extremal_trees(g)?.trees.into_iter().map(|t| (t.weights, t.genotype)).collect(),
        Method::Bruteforce => {
            let pareto = brute_force_pareto(g)?;
            let hull = conv_hull_extremals(&pareto.points)?;
            hull.points
                .iter()
                .map(|q| {
                    let k = pareto.points.iter().position(|p| p == q).expect("hull vertices are Pareto points");
                    (*q, pareto.witnesses[k].clone())
                })
                .collect()
        }
    };
    let mut out = String::new();
    for (point, tree) in witnessed {
        out.push_str(&format!("{} {}\n", point.f1, point.f2));
        let edges: Vec<String> = tree
            .selected()
            .map(|j| {
                let e = g.edge(j);
                format!("{}-{}", e.u + 1, e.v + 1)
            })
            .collect();
        out.push_str(&format!("  {}\n", edges.join(" ")));
    }
    Ok(out)
}

fn run(args: RunArgs) -> Result<()> {
    let g = load(&args.instance)?;
    let algorithm = match args.algo {
        AlgoArg::Nsga2 => Algorithm::Nsga2,
        AlgoArg::Gsemo => Algorithm::Gsemo,
    };
    let mutation = match args.mutation {
        MutationArg::Standard => Mutation::Standard { c: args.c },
        MutationArg::Balanced => Mutation::Balanced,
    };
    if algorithm == Algorithm::Gsemo && (args.crossover_q.is_some() || args.pop_size.is_some()) {
        bail!("--crossover-q and --pop-size apply to nsga2 only");
    }
    let mechanism = MechanismConfig { mutation, crossover_q: args.crossover_q };
    mechanism.validate(&g)?;
    let mut cfg = ExperimentConfig::new(algorithm, args.seed);
    cfg.mechanism = mechanism;
    cfg.pop_size = args.pop_size;
    cfg.budget = args.budget;
    cfg.stop = match args.stop {
        StopArg::Coverage => StopRule::Coverage,
        StopArg::FirstTree => StopRule::FirstTree,
        StopArg::BudgetOnly => StopRule::BudgetOnly,
    };
    cfg.monitors = args.monitors;
    cfg.trace = args.trace_potential.is_some();
    cfg.allow_unsafe_population = args.allow_unsafe_population;
    cfg.gsemo_rate = args.rate;

    let name = args.instance.file_stem().map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned());
    let record = run_trial(&g, &name, &cfg)?;
    if let Some(path) = &args.trace_potential {
        let mut text = String::new();
        for point in record.trace() {
            text.push_str(&point.line());
            text.push('\n');
        }
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    write_csv(std::slice::from_ref(&record), io::stdout().lock())?;
    for violation in record.violations() {
        eprintln!("violation: {violation}");
    }
    if !record.summary.elitism_checked {
        eprintln!("warning: population below the elitism threshold; elitism checks skipped");
    }
    Ok(())
}
