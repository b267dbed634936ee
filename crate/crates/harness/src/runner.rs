//! Batch execution of every (instance, configuration) pair.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use parplan_core::Outcome;
use parplan_domains::{generate, read_instances, DomainInstance, Params};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, RunConfig};
use crate::sources::{solve, Models};

/// One line of `records.csv`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub config: String,
    pub outcome: Outcome,
    pub expansions: u64,
    pub evaluations: u64,
    /// Empty unless solved.
    pub cost: Option<u64>,
}

impl RunRecord {
    pub fn solved(&self) -> bool {
        self.outcome == Outcome::Solved
    }
}

/// A record with the parts kept outside `records.csv`.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: RunRecord,
    pub plan: Vec<String>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Worker pool; falls back to sequential without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Calls `work` for `0..n` and hands the results to `sink` in index order.
pub fn execute<T, W, S>(n: usize, mode: Execution, work: W, mut sink: S) -> Result<()>
where
    T: Send,
    W: Fn(usize) -> T + Sync,
    S: FnMut(usize, T) -> Result<()>,
{
    match mode {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            use std::collections::BTreeMap;
            use std::sync::mpsc;
            let (tx, rx) = mpsc::channel();
            std::thread::scope(|scope| {
                let work = &work;
                scope.spawn(move || {
                    (0..n).into_par_iter().for_each_with(tx, |tx, i| {
                        let _ = tx.send((i, work(i)));
                    })
                });
                let mut pending = BTreeMap::new();
                let mut next = 0;
                let mut result = Ok(());
                for (i, t) in rx {
                    pending.insert(i, t);
                    while let Some(t) = pending.remove(&next) {
                        if result.is_ok() {
                            result = sink(next, t);
                        }
                        next += 1;
                    }
                }
                result
            })
        }
        _ => (0..n).try_for_each(|i| sink(i, work(i))),
    }
}

/// The suite named by `cfg`: read from disk or generated.
pub fn load_instances(cfg: &ExperimentConfig) -> Result<Vec<DomainInstance>> {
    match &cfg.instances {
        Some(dir) => Ok(read_instances(cfg.domain, dir)?),
        None => Ok(generate(&Params::dataset(cfg.domain, &cfg.dataset)?, cfg.seed, cfg.count)?),
    }
}

pub fn train_models(cfg: &ExperimentConfig) -> Result<Models> {
    let mut models = Models::new(cfg.domain);
    models.train(cfg.domain, &cfg.training_sets(), cfg.train_seed, cfg.train_count)?;
    Ok(models)
}

pub fn run_one(inst: &DomainInstance, run: &RunConfig, models: &Models, budget: u64) -> Result<RunOutput> {
    let start = Instant::now();
    let r = solve(inst, run, models, budget)?;
    let seconds = start.elapsed().as_secs_f64();
    Ok(RunOutput {
        record: RunRecord {
            instance: inst.id.clone(),
            config: run.id.clone(),
            outcome: r.outcome,
            expansions: r.expansions,
            evaluations: r.evaluations,
            cost: r.solved().then_some(r.cost),
        },
        plan: r.plan.iter().map(|l| l.to_string()).collect(),
        seconds,
    })
}

/// Runs every configuration on every instance, instance-major. Outputs are
/// passed to `sink` in that order as they complete.
pub fn run_grid(
    instances: &[DomainInstance],
    runs: &[RunConfig],
    models: &Models,
    budget: u64,
    mode: Execution,
    mut sink: impl FnMut(RunOutput) -> Result<()>,
) -> Result<()> {
    let k = runs.len();
    execute(
        instances.len() * k,
        mode,
        |i| run_one(&instances[i / k], &runs[i % k], models, budget),
        |_, out| sink(out?),
    )
}

/// Writes `records.csv`, `timings.csv`, `plans/<config>/<instance>.plan` and
/// the trained models under `dir`.
pub struct OutputDir {
    dir: PathBuf,
    records: csv::Writer<fs::File>,
    timings: csv::Writer<fs::File>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let records = csv::Writer::from_path(dir.join("records.csv"))?;
        let mut timings = csv::Writer::from_path(dir.join("timings.csv"))?;
        timings.write_record(["instance", "config", "seconds"])?;
        Ok(OutputDir { dir: dir.to_path_buf(), records, timings })
    }

    pub fn save_models(&self, models: &Models) -> Result<()> {
        let d = self.dir.join("models");
        fs::create_dir_all(&d)?;
        for (name, m) in &models.surrogates {
            fs::write(d.join(format!("{name}.json")), m.to_json())?;
        }
        Ok(())
    }

    pub fn write(&mut self, out: &RunOutput) -> Result<()> {
        self.records.serialize(&out.record)?;
        self.records.flush()?;
        self.timings.write_record([
            out.record.instance.as_str(),
            out.record.config.as_str(),
            &format!("{:.4}", out.seconds),
        ])?;
        self.timings.flush()?;
        if out.record.solved() {
            let d = plan_dir(&self.dir, &out.record.config);
            fs::create_dir_all(&d)?;
            let mut text = out.plan.join("\n");
            text.push('\n');
            fs::write(d.join(format!("{}.plan", out.record.instance)), text)?;
        }
        Ok(())
    }
}

pub fn plan_dir(root: &Path, config: &str) -> PathBuf {
    root.join("plans").join(config)
}

/// Reads a plan file: one action label per line.
pub fn read_plan(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

/// Trains, runs the whole grid and, with `out`, writes results as they come.
pub fn run_experiment(cfg: &ExperimentConfig, out: Option<&Path>, mode: Execution) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let runs = cfg.runs()?;
    let models = train_models(cfg)?;
    let instances = load_instances(cfg)?;
    let mut dir = out.map(OutputDir::create).transpose()?;
    if let Some(d) = &dir {
        d.save_models(&models)?;
    }
    let mut records = Vec::with_capacity(instances.len() * runs.len());
    run_grid(&instances, &runs, &models, cfg.budget, mode, |o| {
        if let Some(d) = dir.as_mut() {
            d.write(&o)?;
        }
        records.push(o.record);
        Ok(())
    })?;
    Ok(records)
}

pub fn write_records(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn execute_preserves_order() {
        for mode in [Execution::Sequential, Execution::Parallel] {
            let mut seen = Vec::new();
            execute(50, mode, |i| i * i, |i, v| {
                seen.push((i, v));
                Ok(())
            })
            .unwrap();
            assert_eq!(seen, (0..50).map(|i| (i, i * i)).collect::<Vec<_>>());
        }
    }

    #[test]
    fn execute_reports_the_first_sink_error() {
        let r = execute(10, Execution::Parallel, |i| i, |i, _| {
            anyhow::ensure!(i < 3, "stop at {i}");
            Ok(())
        });
        assert_eq!(r.unwrap_err().to_string(), "stop at 3");
    }

    #[test]
    fn records_round_trip_with_exact_header() {
        let dir = std::env::temp_dir().join(format!("parplan-records-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("records.csv");
        let recs = vec![
            RunRecord {
                instance: "1-0".into(),
                config: "none~h:ff-full".into(),
                outcome: Outcome::Solved,
                expansions: 12,
                evaluations: 40,
                cost: Some(7),
            },
            RunRecord {
                instance: "1-1".into(),
                config: "none~h:ff-full".into(),
                outcome: Outcome::BudgetExhausted,
                expansions: 10_000,
                evaluations: 50_000,
                cost: None,
            },
        ];
        write_records(&path, &recs).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("instance,config,outcome,expansions,evaluations,cost\n"));
        assert!(text.contains("1-1,none~h:ff-full,budget-exhausted,10000,50000,\n"));
        assert_eq!(read_records(&path).unwrap(), recs);
        fs::remove_dir_all(&dir).unwrap();
    }
}
