use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pinwheel_core::fast::{fast_solve, FastConfig, DEFAULT_MAX_PARTITIONS, DEFAULT_PER_ATTEMPT_MS};
use pinwheel_core::proof::{enumerate_base, schedule_via_proof, theta_generator, BaseMode, ProofParams};
use pinwheel_core::unfold::{unfold, UnfoldRule};
use pinwheel_core::{generate, solve, FoldParameter, Instance, Rational, Schedule, SolveConfig, SolveOutcome};

use pinwheel::artifacts::{certify_dir, read_chain, read_instances, write_instances};
use pinwheel::bench::{bench_run, summarize, write_csv, BenchSpec};
use pinwheel::error::io_at;
use pinwheel::pipeline::{prove_to_dir, ProveOptions, SolverKind};
use pinwheel::{Error, Result, StdClock};

#[derive(Parser)]
#[command(name = "pinwheel", version, about = "Pinwheel scheduling solvers, proofs and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Foresight,
    Fast,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenMode {
    Density,
    Scaling,
}

#[derive(Subcommand)]
enum Command {
    /// Decide one instance, e.g. `5,7,17/2,9`. Exit code 0 schedulable,
    /// 1 unschedulable, 2 timeout, 3 error.
    Solve {
        instance: String,
        #[arg(long, value_enum, default_value = "foresight")]
        solver: SolverArg,
        /// Never evict remembered failed states.
        #[arg(long)]
        complete: bool,
        #[arg(long, default_value_t = 60_000)]
        timeout_ms: u64,
        #[arg(long, default_value_t = DEFAULT_PER_ATTEMPT_MS)]
        per_attempt_ms: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_PARTITIONS)]
        max_partitions: usize,
        /// Also write the cycle to this file.
        #[arg(long)]
        emit_schedule: Option<PathBuf>,
    },
    /// Build a proof directory for all instances with elements at least
    /// `--min` and density at most `--bound`.
    Prove {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        min: u64,
        #[arg(long, default_value = "84/100")]
        bound: String,
        #[arg(long, default_value_t = 12)]
        theta_min: u64,
        #[arg(long, default_value_t = 30)]
        theta_max: u64,
        /// Wall-clock budget per candidate; without it node limits alone
        /// bound the work and output is reproducible.
        #[arg(long)]
        budget_ms: Option<u64>,
        #[arg(long, default_value_t = 200_000)]
        attempt_nodes: u64,
        #[arg(long, default_value_t = 16)]
        max_attempts: usize,
        /// Enumerate only saturated base candidates.
        #[arg(long)]
        saturated: bool,
    },
    /// Check a proof directory without solving. Exit code 0 accept, 1 reject.
    Certify {
        #[arg(long)]
        dir: PathBuf,
    },
    /// List base candidates.
    Enumerate {
        #[arg(long)]
        theta: u64,
        #[arg(long)]
        min: u64,
        #[arg(long)]
        bound: String,
        #[arg(long)]
        saturated: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Unfold deferred instances to the next fold parameter.
    Unfold {
        #[arg(long)]
        theta: u64,
        #[arg(long)]
        bound: String,
        #[arg(long, default_value_t = 1)]
        min: u64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Raise at most one `theta - 1` element.
        #[arg(long)]
        single_change: bool,
    },
    /// First stage of a proof directory covering a fold of the instance.
    ThetaGen {
        #[arg(long)]
        dir: PathBuf,
        instance: String,
        /// Print the schedule obtained from the proof.
        #[arg(long)]
        schedule: bool,
    },
    /// Generate random instances.
    Gen {
        #[arg(long, value_enum)]
        mode: GenMode,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        max: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Race solvers on an instance file and write CSV records.
    Bench {
        #[arg(long)]
        instances: PathBuf,
        #[arg(long, default_value = "fast,foresight")]
        solvers: String,
        #[arg(long, default_value_t = 10_000)]
        timeout_ms: u64,
        #[arg(long)]
        out: PathBuf,
        /// Recorded with every row.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_param: Option<u64>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

fn parse_instance(text: &str) -> Result<Instance> {
    Ok(text.parse()?)
}

fn parse_bound(text: &str) -> Result<Rational> {
    text.trim()
        .parse()
        .map_err(|_| Error::Usage(format!("bound `{text}` is not a fraction like 84/100")))
}

fn write_or_print(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, body).map_err(io_at(p)),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn lines<'a>(instances: impl IntoIterator<Item = &'a Instance>) -> String {
    instances.into_iter().map(|a| format!("{}\n", pinwheel::artifacts::instance_text(a))).collect()
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve {
            instance,
            solver,
            complete,
            timeout_ms,
            per_attempt_ms,
            max_partitions,
            emit_schedule,
        } => {
            let a = parse_instance(&instance)?;
            let clock = StdClock::new();
            let outcome = match solver {
                SolverArg::Foresight => {
                    let cfg = SolveConfig {
                        complete,
                        ..SolveConfig::with_time_limit(timeout_ms)
                    };
                    solve(&a, &cfg, &clock)?
                }
                SolverArg::Fast => {
                    let cfg = FastConfig {
                        per_attempt_ms,
                        max_partitions,
                        ..FastConfig::with_time_limit(timeout_ms)
                    };
                    fast_solve(&a, &cfg, &clock)?
                }
            };
            println!("{}", outcome.label());
            Ok(match outcome {
                SolveOutcome::Schedulable(s) => {
                    println!("{s}");
                    if let Some(p) = emit_schedule {
                        fs::write(&p, format!("{s}\n")).map_err(io_at(&p))?;
                    }
                    ExitCode::from(0)
                }
                SolveOutcome::Unschedulable => ExitCode::from(1),
                SolveOutcome::Timeout { .. } => ExitCode::from(2),
            })
        }
        Command::Prove {
            out,
            min,
            bound,
            theta_min,
            theta_max,
            budget_ms,
            attempt_nodes,
            max_attempts,
            saturated,
        } => {
            let params = ProofParams::new(min, parse_bound(&bound)?, theta_min, theta_max)?;
            let mut opts = ProveOptions {
                wall_budget_ms: budget_ms,
                base: if saturated { BaseMode::Saturated } else { BaseMode::Exact },
                progress: true,
                ..ProveOptions::default()
            };
            opts.fast.attempt_node_limit = Some(attempt_nodes);
            opts.fast.max_attempts = Some(max_attempts);
            let chain = prove_to_dir(&out, &params, &opts)?;
            for s in &chain.stages {
                println!("theta={} lists={} removed={}", s.theta, s.lists.len(), s.removed.len());
            }
            let open = chain.stages.last().map_or(0, |s| s.removed.len());
            Ok(ExitCode::from(u8::from(open > 0)))
        }
        Command::Certify { dir } => {
            let report = certify_dir(&dir);
            if report.accepted() {
                println!("accept");
                Ok(ExitCode::from(0))
            } else {
                println!("reject");
                for r in &report.reasons {
                    println!("{r}");
                }
                Ok(ExitCode::from(1))
            }
        }
        Command::Enumerate {
            theta,
            min,
            bound,
            saturated,
            out,
        } => {
            let mode = if saturated { BaseMode::Saturated } else { BaseMode::Exact };
            let base = enumerate_base(theta, min, &parse_bound(&bound)?, mode)?;
            write_or_print(out.as_deref(), &lines(&base))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Unfold {
            theta,
            bound,
            min,
            input,
            out,
            single_change,
        } => {
            let removed = read_instances(&input)?;
            let rule = if single_change {
                UnfoldRule::SingleChange
            } else {
                UnfoldRule::AllChanges
            };
            let next = unfold(&removed, FoldParameter::new(theta)?, &parse_bound(&bound)?, min, rule)?;
            write_or_print(out.as_deref(), &lines(&next))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::ThetaGen { dir, instance, schedule } => {
            let a = parse_instance(&instance)?;
            let (chain, _) = read_chain(&dir)?;
            match theta_generator(&a, &chain)? {
                Some((theta, cover)) => {
                    println!("theta={theta} cover={cover}");
                    if schedule {
                        let s: Schedule = schedule_via_proof(&a, &chain)?;
                        println!("{s}");
                    }
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    println!("none");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Gen {
            mode,
            count,
            seed,
            max,
            out,
        } => {
            let xs = match mode {
                GenMode::Density => generate::gen_density(seed, count),
                GenMode::Scaling => {
                    let max = max.ok_or_else(|| Error::Usage("--max is required in scaling mode".into()))?;
                    generate::gen_scaling(max, seed, count)?
                }
            };
            write_instances(&out, &xs)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench {
            instances,
            solvers,
            timeout_ms,
            out,
            seed,
            max_param,
            workers,
        } => {
            let xs = read_instances(&instances)?;
            let solvers = solvers.split(',').map(str::parse).collect::<Result<Vec<SolverKind>>>()?;
            let spec = BenchSpec {
                solvers,
                time_limit_ms: timeout_ms,
                seed,
                max_param,
                workers,
            };
            let records = bench_run(&xs, &spec)?;
            let file = fs::File::create(&out).map_err(io_at(&out))?;
            write_csv(&records, file)?;
            let k = xs.len().div_ceil(4).max(1);
            for s in summarize(&records, &[k]) {
                let ttk = s.time_to_k[0].1.map_or("-".to_string(), |t| format!("{t:.3}"));
                println!(
                    "{}: solved {}/{} mean {:.3} ms median {:.3} ms time-to-{k} {ttk} ms",
                    s.solver, s.solved, s.runs, s.mean_ms, s.median_ms
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
