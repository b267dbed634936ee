use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use parplan_core::search::{search, DEFAULT_BUDGET};
use parplan_domains::{dataset_dir, generate, DomainInstance, DomainKind, Params};
use parplan_harness::config::{DEFAULT_TRAIN_COUNT, DEFAULT_TRAIN_SEED};
use parplan_harness::report::{
    coverage_table, cost_comparison, costs_csv, cumulative_coverage, cumulative_csv, scatter_csv, scatter_data,
    Comparison,
};
use parplan_harness::runner::read_records;
use parplan_harness::sources::{algorithm, Models};
use parplan_harness::{run_experiment, AlgoKind, Execution, ExperimentConfig, Guide, RunConfig, Source};

#[derive(Parser)]
#[command(name = "parplan", version, about = "Black-box planning with partial STRIPS models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write seeded instances as PDDL problems with JSON sidecars.
    Generate {
        #[arg(long)]
        domain: DomainKind,
        #[arg(long, default_value = "test")]
        dataset: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        count: usize,
        /// Instances go to `<out>/<domain>/<dataset>`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one instance.
    Solve {
        #[arg(long)]
        domain: DomainKind,
        /// Problem file; its annotation is read from the `.json` next to it.
        #[arg(long)]
        task: PathBuf,
        #[arg(long, default_value = "gbfs")]
        algo: AlgoKind,
        /// Guidance such as `h:ff-full` or `p:surrogate(default)`; one for
        /// gbfs, two otherwise.
        #[arg(long = "eval", required = true)]
        evals: Vec<Guide>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Write a JSON-lines search trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TRAIN_SEED)]
        train_seed: u64,
        #[arg(long, default_value_t = DEFAULT_TRAIN_COUNT)]
        train_count: usize,
    },
    /// Run a configuration grid over a suite.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        sequential: bool,
    },
    /// Coverage table; with `--alt`, the extra coverage of an alternative
    /// algorithm over the same grid.
    Table {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        alt: Option<PathBuf>,
        #[arg(long)]
        csv: bool,
    },
    /// Paired expansions of two configurations.
    Scatter {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Solved instances by expansion bound.
    Cumulative {
        #[arg(long)]
        records: PathBuf,
        #[arg(long = "config", required = true)]
        configs: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Plan cost wins and losses against a baseline.
    Costs {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        baseline: String,
        #[arg(long = "other", required = true)]
        others: Vec<String>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate { domain, dataset, seed, count, out } => {
            let dir = dataset_dir(&out, domain, &dataset);
            for inst in generate(&Params::dataset(domain, &dataset)?, seed, count)? {
                inst.write_to(&dir)?;
            }
            println!("{count} instances in {}", dir.display());
        }
        Command::Solve { domain, task, algo, evals, budget, trace, train_seed, train_count } => {
            let inst = read_instance(domain, &task)?;
            let run = RunConfig::new("solve", algo, evals)?;
            let mut models = Models::new(domain);
            let sets: Vec<String> = run
                .guides
                .iter()
                .filter_map(|g| match &g.source {
                    Source::Surrogate(d) => Some(d.clone()),
                    _ => None,
                })
                .collect();
            models.train(domain, &sets, train_seed, train_count)?;
            let algo = algorithm(&inst, &run, &models)?;
            let mut file = trace.as_ref().map(|p| fs::File::create(p).map(BufWriter::new)).transpose()?;
            let r = search(&inst.blackbox(), &algo, budget, file.as_mut().map(|f| f as &mut dyn Write))?;
            if let Some(f) = file.as_mut() {
                f.flush()?;
            }
            println!(
                "outcome={} expansions={} evaluations={} generated={}",
                r.outcome, r.expansions, r.evaluations, r.generated
            );
            if r.solved() {
                let cost = inst.task.validate_named_plan(&r.plan)?;
                println!("cost={cost}");
                for a in &r.plan {
                    println!("{a}");
                }
            }
        }
        Command::Experiment { config, out, sequential } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let cfg = ExperimentConfig::parse(&text)?;
            let mode = if sequential { Execution::Sequential } else { Execution::default() };
            let records = run_experiment(&cfg, Some(&out), mode)?;
            let table = coverage_table(&records);
            fs::write(out.join("coverage.md"), table.to_markdown())?;
            fs::write(out.join("coverage.csv"), table.to_csv())?;
            print!("{}", table.to_markdown());
        }
        Command::Table { records, alt, csv } => {
            let base = read_records(&records)?;
            let text = match alt {
                Some(alt) => {
                    let c = Comparison::new(&base, &read_records(&alt)?);
                    if csv {
                        c.to_csv()
                    } else {
                        c.to_markdown()
                    }
                }
                None => {
                    let t = coverage_table(&base);
                    for w in &t.warnings {
                        eprintln!("warning: {w}");
                    }
                    if csv {
                        t.to_csv()
                    } else {
                        t.to_markdown()
                    }
                }
            };
            print!("{text}");
        }
        Command::Scatter { records, a, b, budget } => {
            let pts = scatter_data(&read_records(&records)?, &a, &b, budget)?;
            print!("{}", scatter_csv(&pts, &a, &b));
        }
        Command::Cumulative { records, configs, budget } => {
            let curve = cumulative_coverage(&read_records(&records)?, &configs, budget);
            print!("{}", cumulative_csv(&curve, &configs));
        }
        Command::Costs { records, baseline, others } => {
            let s = cost_comparison(&read_records(&records)?, &baseline, &others)?;
            print!("{}", costs_csv(&baseline, &s));
        }
    }
    Ok(())
}

fn read_instance(domain: DomainKind, path: &Path) -> Result<DomainInstance> {
    let Some(id) = path.file_stem().and_then(|s| s.to_str()) else {
        bail!("bad task path {}", path.display());
    };
    let problem = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let sidecar = path.with_extension("json");
    let annotation =
        fs::read_to_string(&sidecar).with_context(|| format!("reading annotation {}", sidecar.display()))?;
    Ok(DomainInstance::from_parts(domain, id, &problem, &annotation)?)
}
