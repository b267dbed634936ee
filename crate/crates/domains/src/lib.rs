//! Benchmark domains: seeded instance generators for Logistics, Grid and
//! Woodworking-PD, and the partial models used to guide black-box search on
//! them.
//!
//! Instances are written as PDDL problems plus a JSON annotation sidecar
//! carrying the semantic information (cities, key targets, part goals) that
//! partial-model mappings are built from.

mod grid;
mod logistics;
mod partial;
mod sigma;
mod woodworking;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use parplan_core::blackbox::{lift_heuristic, wrap_strips_as_blackbox, StripsBlackBox};
use parplan_core::heuristics::FfHeuristic;
use parplan_core::pddl::{ground, parse_domain, parse_problem, LiftedDomain, LiftedProblem, PddlError};
use parplan_core::search::{gbfs, Outcome};
use parplan_core::blackbox::MappingError;
use parplan_core::{PartialModel, StripsTask};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use grid::{gen_grid, GridAnnotation, GridParams};
pub use logistics::{gen_logistics, LogisticsAnnotation, LogisticsParams};
pub use partial::{make_partial_model, PartialKind};
pub use woodworking::{gen_woodworking_pd, PartGoal, WoodAnnotation, WoodParams};

/// Expansion cap of the solvability probe run on every generated instance.
pub const PROBE_BUDGET: u64 = 100_000;

/// Attempts per instance before a generator gives up.
const MAX_ATTEMPTS: u64 = 200;

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("parameter `{name}`: {message}")]
    InfeasibleRange { name: &'static str, message: String },
    #[error("unknown {what} `{name}`")]
    Unknown { what: &'static str, name: String },
    #[error("partial model `{kind}` does not apply to {domain} instances")]
    KindMismatch { kind: PartialKind, domain: DomainKind },
    #[error("no solvable instance after {0} attempts")]
    NoSolvableInstance(u64),
    #[error(transparent)]
    Pddl(#[from] PddlError),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error("partial model lacks fact `{0}`")]
    MissingFact(String),
    #[error("annotation: {0}")]
    Annotation(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DomainKind {
    #[serde(rename = "logistics")]
    Logistics,
    #[serde(rename = "grid")]
    Grid,
    #[serde(rename = "woodworking-pd")]
    Woodworking,
}

impl DomainKind {
    pub const ALL: [DomainKind; 3] = [DomainKind::Logistics, DomainKind::Grid, DomainKind::Woodworking];

    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Logistics => "logistics",
            DomainKind::Grid => "grid",
            DomainKind::Woodworking => "woodworking-pd",
        }
    }

    pub fn pddl(self) -> &'static str {
        match self {
            DomainKind::Logistics => include_str!("../pddl/logistics.pddl"),
            DomainKind::Grid => include_str!("../pddl/grid.pddl"),
            DomainKind::Woodworking => include_str!("../pddl/woodworking-pd.pddl"),
        }
    }

    /// The parsed domain, shared by all instances.
    pub fn lifted(self) -> Arc<LiftedDomain> {
        static CACHE: [OnceLock<Arc<LiftedDomain>>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
        CACHE[self as usize]
            .get_or_init(|| Arc::new(parse_domain(self.pddl()).expect("bundled domain parses")))
            .clone()
    }

    /// Predicate names in declaration order; the vocabulary of surrogate
    /// features.
    pub fn predicates(self) -> Vec<String> {
        self.lifted().predicates.iter().map(|p| p.name.clone()).collect()
    }

    pub fn datasets(self) -> &'static [&'static str] {
        match self {
            DomainKind::Logistics => &["test", "default", "hgn-one"],
            DomainKind::Grid => &["test", "default", "hgn-gridsize", "hgn-onelock"],
            DomainKind::Woodworking => &["test", "default", "hgn-oneloc", "hgn-move"],
        }
    }

    pub fn partial_kinds(self) -> &'static [PartialKind] {
        match self {
            DomainKind::Logistics => &[PartialKind::Air, PartialKind::Trucks],
            DomainKind::Grid => &[PartialKind::Robot, PartialKind::Keys],
            DomainKind::Woodworking => {
                &[PartialKind::Wood, PartialKind::Logistics, PartialKind::LogisticsUnprocessed]
            }
        }
    }
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DomainKind {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DomainKind::ALL
            .into_iter()
            .find(|d| d.name() == s || (s == "woodworking" && *d == DomainKind::Woodworking))
            .ok_or_else(|| DomainError::Unknown { what: "domain", name: s.to_string() })
    }
}

/// Inclusive integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Range {
    pub lo: usize,
    pub hi: usize,
}

impl Range {
    pub const fn new(lo: usize, hi: usize) -> Self {
        Range { lo, hi }
    }

    pub const fn exactly(v: usize) -> Self {
        Range { lo: v, hi: v }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.lo <= v && v <= self.hi
    }

    fn check(&self, name: &'static str, min: usize) -> Result<(), DomainError> {
        if self.lo > self.hi {
            return Err(DomainError::InfeasibleRange { name, message: format!("{} > {}", self.lo, self.hi) });
        }
        if self.lo < min {
            return Err(DomainError::InfeasibleRange { name, message: format!("must be at least {min}") });
        }
        Ok(())
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        rng.gen_range(self.lo..=self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "kebab-case")]
pub enum Params {
    Logistics(LogisticsParams),
    Grid(GridParams),
    #[serde(rename = "woodworking-pd")]
    Woodworking(WoodParams),
}

impl Params {
    pub fn domain(&self) -> DomainKind {
        match self {
            Params::Logistics(_) => DomainKind::Logistics,
            Params::Grid(_) => DomainKind::Grid,
            Params::Woodworking(_) => DomainKind::Woodworking,
        }
    }

    /// Named parameter sets: the test suite, the default training set and
    /// the biased training sets.
    pub fn dataset(domain: DomainKind, name: &str) -> Result<Params, DomainError> {
        let p = match (domain, name) {
            (DomainKind::Logistics, "test") => Params::Logistics(LogisticsParams::TEST),
            (DomainKind::Logistics, "default") => Params::Logistics(LogisticsParams::DEFAULT),
            (DomainKind::Logistics, "hgn-one") => {
                Params::Logistics(LogisticsParams { one_city: true, ..LogisticsParams::DEFAULT })
            }
            (DomainKind::Grid, "test") => Params::Grid(GridParams::TEST),
            (DomainKind::Grid, "default") => Params::Grid(GridParams::DEFAULT),
            (DomainKind::Grid, "hgn-gridsize") => Params::Grid(GridParams::GRIDSIZE),
            (DomainKind::Grid, "hgn-onelock") => {
                Params::Grid(GridParams { locks: Range::exactly(1), ..GridParams::DEFAULT })
            }
            (DomainKind::Woodworking, "test") => Params::Woodworking(WoodParams::TEST),
            (DomainKind::Woodworking, "default") => Params::Woodworking(WoodParams::DEFAULT),
            (DomainKind::Woodworking, "hgn-oneloc") => {
                Params::Woodworking(WoodParams { locations: Range::exactly(1), ..WoodParams::DEFAULT })
            }
            (DomainKind::Woodworking, "hgn-move") => {
                Params::Woodworking(WoodParams { pre_cut: true, ..WoodParams::DEFAULT })
            }
            _ => return Err(DomainError::Unknown { what: "dataset", name: format!("{domain}/{name}") }),
        };
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        match self {
            Params::Logistics(p) => p.validate(),
            Params::Grid(p) => p.validate(),
            Params::Woodworking(p) => p.validate(),
        }
    }
}

/// Generates `count` instances; instance `i` depends only on `(params, seed, i)`.
pub fn generate(params: &Params, seed: u64, count: usize) -> Result<Vec<DomainInstance>, DomainError> {
    match params {
        Params::Logistics(p) => gen_logistics(p, seed, count),
        Params::Grid(p) => gen_grid(p, seed, count),
        Params::Woodworking(p) => gen_woodworking_pd(p, seed, count),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "kebab-case")]
pub enum Annotation {
    Logistics(LogisticsAnnotation),
    Grid(GridAnnotation),
    #[serde(rename = "woodworking-pd")]
    Woodworking(WoodAnnotation),
}

/// A generated problem with its grounded task and annotation.
#[derive(Debug, Clone)]
pub struct DomainInstance {
    pub domain: DomainKind,
    /// `<seed>-<index>`.
    pub id: String,
    pub problem: LiftedProblem,
    pub annotation: Annotation,
    pub task: Arc<StripsTask>,
}

impl DomainInstance {
    fn new(domain: DomainKind, id: String, problem: LiftedProblem, annotation: Annotation) -> Self {
        let task = Arc::new(ground(&domain.lifted(), &problem));
        DomainInstance { domain, id, problem, annotation, task }
    }

    pub fn blackbox(&self) -> StripsBlackBox {
        wrap_strips_as_blackbox(self.task.clone())
    }

    pub fn full_model(&self) -> PartialModel {
        PartialModel::identity(self.task.clone())
    }

    pub fn problem_pddl(&self) -> String {
        self.problem.to_pddl(&self.domain.lifted())
    }

    pub fn annotation_json(&self) -> String {
        serde_json::to_string_pretty(&self.annotation).expect("annotation serializes")
    }

    /// Rebuilds an instance from its problem text and annotation sidecar.
    pub fn from_parts(
        domain: DomainKind,
        id: &str,
        problem_pddl: &str,
        annotation_json: &str,
    ) -> Result<Self, DomainError> {
        let problem = parse_problem(problem_pddl, &domain.lifted())?;
        let annotation: Annotation =
            serde_json::from_str(annotation_json).map_err(|e| DomainError::Annotation(e.to_string()))?;
        let matches = matches!(
            (&annotation, domain),
            (Annotation::Logistics(_), DomainKind::Logistics)
                | (Annotation::Grid(_), DomainKind::Grid)
                | (Annotation::Woodworking(_), DomainKind::Woodworking)
        );
        if !matches {
            return Err(DomainError::Annotation(format!("annotation is not for {domain}")));
        }
        Ok(DomainInstance::new(domain, id.to_string(), problem, annotation))
    }

    /// Writes `<dir>/<id>.pddl` and `<dir>/<id>.json`.
    pub fn write_to(&self, dir: &Path) -> Result<(), DomainError> {
        let io = |path: PathBuf| move |source| DomainError::Io { path, source };
        fs::create_dir_all(dir).map_err(io(dir.to_path_buf()))?;
        let pddl = dir.join(format!("{}.pddl", self.id));
        fs::write(&pddl, self.problem_pddl()).map_err(io(pddl.clone()))?;
        let json = dir.join(format!("{}.json", self.id));
        fs::write(&json, self.annotation_json()).map_err(io(json.clone()))?;
        Ok(())
    }
}

/// Reads every `<id>.pddl` with its `<id>.json` sidecar from `dir`, ordered
/// by id.
pub fn read_instances(domain: DomainKind, dir: &Path) -> Result<Vec<DomainInstance>, DomainError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| DomainError::Io { path, source }
    };
    let mut ids: Vec<String> = fs::read_dir(dir)
        .map_err(io(dir))?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().into_string().ok()?;
            name.strip_suffix(".pddl").map(str::to_string)
        })
        .collect();
    ids.sort_by(|a, b| natural_key(a).cmp(&natural_key(b)));
    ids.into_iter()
        .map(|id| {
            let p = dir.join(format!("{id}.pddl"));
            let j = dir.join(format!("{id}.json"));
            let problem = fs::read_to_string(&p).map_err(io(&p))?;
            let annotation = fs::read_to_string(&j).map_err(io(&j))?;
            DomainInstance::from_parts(domain, &id, &problem, &annotation)
        })
        .collect()
}

/// Orders `<seed>-<index>` ids numerically where possible.
fn natural_key(id: &str) -> (Vec<u64>, String) {
    let nums = id.split('-').map(|p| p.parse().unwrap_or(u64::MAX)).collect();
    (nums, id.to_string())
}

/// Layout of emitted instances: `<root>/<domain>/<dataset>`.
pub fn dataset_dir(root: &Path, domain: DomainKind, dataset: &str) -> PathBuf {
    root.join(domain.name()).join(dataset)
}

/// Full-model FF greedy best-first search with the probe budget.
pub fn probe_solvable(task: &Arc<StripsTask>) -> bool {
    let ff = Arc::new(FfHeuristic::new(task.clone()));
    let h = Arc::new(lift_heuristic(ff, &PartialModel::identity(task.clone())));
    let bb = wrap_strips_as_blackbox(task.clone());
    matches!(gbfs(&bb, h, PROBE_BUDGET), Ok(r) if r.outcome == Outcome::Solved)
}

/// Per-(seed, index, attempt) generator state.
fn instance_rng(seed: u64, index: usize, attempt: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut x = seed;
    for v in [index as u64, attempt] {
        x = splitmix(x ^ splitmix(v.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    ChaCha8Rng::seed_from_u64(x)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Shared retry loop: builds candidates until one passes the probe.
fn generate_with<F>(
    domain: DomainKind,
    seed: u64,
    count: usize,
    mut build: F,
) -> Result<Vec<DomainInstance>, DomainError>
where
    F: FnMut(&mut ChaCha8Rng, &str) -> Result<(LiftedProblem, Annotation), DomainError>,
{
    if count == 0 {
        return Err(DomainError::InfeasibleRange { name: "count", message: "must be at least 1".into() });
    }
    (0..count)
        .map(|index| {
            let id = format!("{seed}-{index}");
            for attempt in 0..MAX_ATTEMPTS {
                let mut rng = instance_rng(seed, index, attempt);
                let (problem, annotation) = build(&mut rng, &id)?;
                let inst = DomainInstance::new(domain, id.clone(), problem, annotation);
                if !inst.task.is_goal(inst.task.init()) && probe_solvable(&inst.task) {
                    return Ok(inst);
                }
            }
            Err(DomainError::NoSolvableInstance(MAX_ATTEMPTS))
        })
        .collect()
}

fn shuffle_pick<T: Clone>(rng: &mut impl Rng, items: &[T], k: usize) -> Vec<T> {
    let mut v = items.to_vec();
    for i in 0..k.min(v.len()) {
        let j = rng.gen_range(i..v.len());
        v.swap(i, j);
    }
    v.truncate(k);
    v
}

fn pick<'a, T>(rng: &mut impl Rng, items: &'a [T]) -> &'a T {
    &items[rng.gen_range(0..items.len())]
}

type NameMap = BTreeMap<String, String>;
