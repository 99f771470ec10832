use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mgsurrogate::optimize::OptimizerConfig;
use mgsurrogate::verify::{run_verification, VerifyOptions};
use mgsurrogate::Graph;
use mgsurrogate_cli::{
    bench, gen_graph, parse_sectors, parse_sizes, reference_energy, solve, success_table,
    write_json, write_trace, GraphKind,
};

#[derive(Parser, Debug)]
#[command(
    name = "mgsurrogate",
    version,
    about = "Projected matchgate surrogate for variational MaxCut"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random graph in "n m / u v w" format
    GenGraph {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "three-regular")]
        kind: Kind,
        /// Edge probability for erdos-renyi
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout if absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimize one instance and write its trace and summary
    Solve {
        /// Graph file
        graph: PathBuf,
        #[command(flatten)]
        opt: OptArgs,
        /// Known optimal cut value used to certify success
        #[arg(long)]
        known_optimum: Option<i64>,
        /// Largest n for automatic brute-force certification
        #[arg(long, default_value_t = 26)]
        brute_force_max_n: usize,
        /// Output directory for trace.csv and summary.json; summary to stdout if absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Success rate over random 3-regular instances per size
    SuccessTable {
        #[arg(long, default_value = "4,8,12")]
        sizes: String,
        #[arg(long, default_value_t = 10)]
        instances: usize,
        #[command(flatten)]
        opt: OptArgs,
        /// Worker threads; 0 uses every core
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time one cost-plus-gradient evaluation per size
    Bench {
        #[arg(long, default_value = "16,24,32,40,48")]
        sizes: String,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the dense-oracle verification suites
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest n used by any dense check (4..=12)
        #[arg(long, default_value_t = 10)]
        max_n: usize,
        /// Flip one sign in every gate table; oracle checks must then fail
        #[arg(long, hide = true)]
        corrupt_tables: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    ThreeRegular,
    ErdosRenyi,
}

#[derive(Args, Debug)]
struct OptArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trials per parity sector
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Comma-separated sectors to alternate over
    #[arg(long, default_value = "even,odd")]
    sectors: String,
    #[arg(long, default_value_t = 0.05)]
    lr: f64,
    #[arg(long, default_value_t = 50)]
    patience: usize,
    #[arg(long, default_value_t = 1e-5)]
    threshold: f64,
    #[arg(long)]
    checkpoint_stride: Option<usize>,
    /// Ansatz blocks; defaults to n
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long, default_value_t = 20_000)]
    max_iterations: usize,
    /// Apply the 100-step guard after every decay instead of once
    #[arg(long)]
    guard_per_decay: bool,
}

impl OptArgs {
    fn config(&self) -> Result<OptimizerConfig> {
        let c = OptimizerConfig {
            lr_initial: self.lr,
            plateau_patience: self.patience,
            improvement_threshold: self.threshold,
            max_trials_per_sector: self.trials,
            checkpoint_stride: self.checkpoint_stride,
            blocks: self.blocks,
            max_iterations: self.max_iterations,
            min_steps_per_decay: self.guard_per_decay,
            ..OptimizerConfig::default()
        };
        c.validate()?;
        Ok(c)
    }
}

fn emit_json<T: serde::Serialize>(out: Option<&PathBuf>, name: &str, value: &T) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            write_json(&dir.join(name), value)
        }
        None => {
            println!("{}", serde_json::to_string_pretty(value)?);
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::GenGraph {
            n,
            kind,
            p,
            seed,
            out,
        } => {
            let kind = match kind {
                Kind::ThreeRegular => GraphKind::ThreeRegular,
                Kind::ErdosRenyi => GraphKind::ErdosRenyi(p),
            };
            let g = gen_graph(n, kind, seed)?;
            match out {
                Some(path) => g.write(&path)?,
                None => print!("{}", g.to_text()),
            }
            Ok(true)
        }
        Command::Solve {
            graph,
            opt,
            known_optimum,
            brute_force_max_n,
            out,
        } => {
            let g = Graph::read(&graph).with_context(|| format!("reading {}", graph.display()))?;
            let config = opt.config()?;
            let sectors = parse_sectors(&opt.sectors)?;
            let reference = reference_energy(&g, known_optimum, brute_force_max_n)?;
            let name = graph
                .file_stem()
                .map_or("instance".into(), |s| s.to_string_lossy().into_owned());
            let res = solve(&name, &g, &config, opt.seed, reference, &sectors)?;
            if let Some(dir) = &out {
                fs::create_dir_all(dir)?;
                write_trace(fs::File::create(dir.join("trace.csv"))?, &res.result.best)?;
            }
            emit_json(out.as_ref(), "summary.json", &res.summary)?;
            eprintln!(
                "best cost {:.6}, cut {:?}, optimum {:?}, trials {}, {} ms",
                res.summary.best_cost,
                res.summary.cut,
                res.summary.optimum_cut,
                res.summary.trials,
                res.summary.wall_ms
            );
            Ok(true)
        }
        Command::SuccessTable {
            sizes,
            instances,
            opt,
            threads,
            out,
        } => {
            if threads > 0 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global()?;
            }
            let config = opt.config()?;
            let table = success_table(
                &parse_sizes(&sizes)?,
                instances,
                opt.seed,
                &config,
                &parse_sectors(&opt.sectors)?,
            )?;
            for row in &table.rows {
                eprintln!(
                    "n={:<3} rate {:.2} ({}/{}) mean trials {:.1}",
                    row.n, row.rate, row.successes, row.instances, row.mean_trials
                );
            }
            emit_json(out.as_ref(), "success_table.json", &table)?;
            Ok(true)
        }
        Command::Bench {
            sizes,
            reps,
            seed,
            out,
        } => {
            let report = bench(&parse_sizes(&sizes)?, reps, seed)?;
            match &out {
                Some(dir) => {
                    fs::create_dir_all(dir)?;
                    let mut w = csv::Writer::from_path(dir.join("bench.csv"))?;
                    for row in &report.rows {
                        w.serialize(row)?;
                    }
                    w.flush()?;
                    write_json(&dir.join("bench.json"), &report)?;
                }
                None => println!("{}", serde_json::to_string_pretty(&report)?),
            }
            if let Some(s) = report.slope {
                eprintln!("log-log slope {s:.3}");
            }
            Ok(true)
        }
        Command::Verify {
            seed,
            max_n,
            corrupt_tables,
            out,
        } => {
            if !(4..=12).contains(&max_n) {
                bail!("--max-n must be within 4..=12 for dense checks, got {max_n}");
            }
            let report = run_verification(&VerifyOptions {
                seed,
                max_n,
                corrupt_tables,
            })?;
            for c in &report.checks {
                eprintln!(
                    "{} {:<36} value {:.3e} tol {:.0e}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.tolerance
                );
            }
            emit_json(out.as_ref(), "verify.json", &report)?;
            Ok(report.all_passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
