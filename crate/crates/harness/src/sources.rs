//! Building evaluators for one instance, and training surrogate models.

use std::collections::BTreeMap;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use parplan_core::blackbox::lift_heuristic;
use parplan_core::heuristics::{
    fit_surrogate, heuristic_ranker, ConstantEvaluator, FeatureExtractor, FfHeuristic, GoalCount,
    SurrogateHeuristic, SurrogateModel, TrainingSample,
};
use parplan_core::search::{search, Algorithm, Guidance, SearchResult};
use parplan_core::{BlackBoxTask, Evaluator, PartialModel, StripsHeuristic};
use parplan_domains::{generate, make_partial_model, DomainInstance, DomainKind, Params, PROBE_BUDGET};

use crate::config::{AlgoKind, Guide, Role, RunConfig, Source};

/// Trained surrogates by training dataset.
#[derive(Debug, Clone)]
pub struct Models {
    pub extractor: FeatureExtractor,
    pub surrogates: BTreeMap<String, Arc<SurrogateModel>>,
}

impl Models {
    pub fn new(domain: DomainKind) -> Self {
        Models { extractor: FeatureExtractor::new(domain.predicates()), surrogates: BTreeMap::new() }
    }

    /// Trains a model for each of `datasets` not trained yet.
    pub fn train(&mut self, domain: DomainKind, datasets: &[String], seed: u64, count: usize) -> Result<()> {
        for d in datasets {
            if !self.surrogates.contains_key(d) {
                let m = train_surrogate(domain, d, seed, count, &self.extractor)?;
                self.surrogates.insert(d.clone(), Arc::new(m));
            }
        }
        Ok(())
    }
}

fn ff(model: &PartialModel, name: String) -> Arc<dyn Evaluator> {
    let h = FfHeuristic::new(model.task.clone()).with_name(name.clone());
    Arc::new(lift_heuristic(Arc::new(h), model).with_name(name))
}

/// The evaluator behind `source` on `inst`.
pub fn evaluator(inst: &DomainInstance, source: &Source, models: &Models) -> Result<Arc<dyn Evaluator>> {
    let name = source.to_string();
    Ok(match source {
        Source::None => Arc::new(ConstantEvaluator::blind()),
        Source::FfFull => ff(&inst.full_model(), name),
        Source::FfPartial(k) => ff(&make_partial_model(inst, *k)?, name),
        Source::BiasedFf(d) => {
            let k = Source::biased_kind(inst.domain, d)
                .ok_or_else(|| anyhow!("no biased stand-in for {}/{d}", inst.domain))?;
            ff(&make_partial_model(inst, k)?, name)
        }
        Source::GoalCount => {
            let h: Arc<dyn StripsHeuristic> = Arc::new(GoalCount::new(inst.task.clone()));
            Arc::new(lift_heuristic(h, &inst.full_model()).with_name(name))
        }
        Source::Surrogate(d) => {
            let model = models.surrogates.get(d).ok_or_else(|| anyhow!("surrogate `{d}` is not trained"))?;
            let h = SurrogateHeuristic::new(name.clone(), model.clone(), &models.extractor, inst.task.clone())?;
            Arc::new(lift_heuristic(Arc::new(h), &inst.full_model()).with_name(name))
        }
    })
}

pub fn guidance(inst: &DomainInstance, guide: &Guide, models: &Models) -> Result<Guidance> {
    let e = evaluator(inst, &guide.source, models)?;
    Ok(match guide.role {
        Role::Heuristic => Guidance::heuristic(e),
        Role::Policy => Guidance::policy(Arc::new(heuristic_ranker(e))),
    })
}

pub fn algorithm(inst: &DomainInstance, run: &RunConfig, models: &Models) -> Result<Algorithm> {
    let mut g = run.guides.iter().map(|x| guidance(inst, x, models)).collect::<Result<Vec<_>>>()?;
    Ok(match run.algorithm {
        AlgoKind::Gbfs => Algorithm::Gbfs(g.remove(0)),
        AlgoKind::DoubleQueue => {
            let b = g.pop().expect("two guides");
            Algorithm::DoubleQueue(g.pop().expect("two guides"), b)
        }
        AlgoKind::TieBreak => {
            let secondary = g.pop().expect("two guides");
            Algorithm::TieBreak { primary: g.pop().expect("two guides"), secondary }
        }
    })
}

/// Runs `run` on `inst` and checks a found plan against the full task.
pub fn solve(inst: &DomainInstance, run: &RunConfig, models: &Models, budget: u64) -> Result<SearchResult> {
    let algo = algorithm(inst, run, models)?;
    let r = search(&inst.blackbox(), &algo, budget, None)?;
    if r.solved() {
        let cost = inst
            .task
            .validate_named_plan(&r.plan)
            .with_context(|| format!("{} on {}: invalid plan", run.id, inst.id))?;
        if cost != r.cost {
            bail!("{} on {}: plan cost {cost} but search reported {}", run.id, inst.id, r.cost);
        }
    }
    Ok(r)
}

/// Every state along a full-model FF plan, labelled with the remaining
/// plan length.
pub fn training_samples(inst: &DomainInstance, extractor: &FeatureExtractor) -> Result<Vec<TrainingSample>> {
    let bb = inst.blackbox();
    let h = ff(&inst.full_model(), "ff-full".into());
    let r = search(&bb, &Algorithm::Gbfs(Guidance::heuristic(h)), PROBE_BUDGET, None)?;
    if !r.solved() {
        bail!("training instance {} is not solved by full-model FF", inst.id);
    }
    let task = &inst.task;
    let mut s = task.init().clone();
    let n = r.plan.len();
    let mut out = Vec::with_capacity(n + 1);
    for (i, label) in r.plan.iter().enumerate() {
        out.push(TrainingSample { features: extractor.features(task, &s), target: (n - i) as f64 });
        let a = task.action_by_name(label).ok_or_else(|| anyhow!("unknown action {label}"))?;
        s = a.apply(&s)?;
    }
    out.push(TrainingSample { features: extractor.features(task, &s), target: 0.0 });
    debug_assert!(bb.is_goal(&bb.encode(&s)));
    Ok(out)
}

pub fn train_surrogate(
    domain: DomainKind,
    dataset: &str,
    seed: u64,
    count: usize,
    extractor: &FeatureExtractor,
) -> Result<SurrogateModel> {
    let insts = generate(&Params::dataset(domain, dataset)?, seed, count)?;
    let mut samples = Vec::new();
    for inst in &insts {
        samples.extend(training_samples(inst, extractor)?);
    }
    Ok(fit_surrogate(extractor.names(), &samples)?)
}
