//! Expansion-bounded greedy best-first search over black-box tasks.
//!
//! One engine backs all variants: a single open list, two open lists in
//! strict alternation, or one list keyed by a primary and a secondary value.
//! Duplicates are detected when generated; the first path to a state is kept
//! and states are never reopened. The goal test runs when a node is popped.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use indexmap::IndexSet;
use serde_json::json;
use thiserror::Error;

use crate::blackbox::{BlackBoxState, BlackBoxTask, Label};
use crate::heuristics::{DiscrepancyEvaluator, EvalError, Evaluator, HValue, Ranker};

/// Expansion budget used throughout the experiments.
pub const DEFAULT_BUDGET: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Solved,
    BudgetExhausted,
    SpaceExhausted,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Solved => "solved",
            Outcome::BudgetExhausted => "budget-exhausted",
            Outcome::SpaceExhausted => "space-exhausted",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Outcome {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "solved" => Ok(Outcome::Solved),
            "budget-exhausted" => Ok(Outcome::BudgetExhausted),
            "space-exhausted" => Ok(Outcome::SpaceExhausted),
            other => Err(format!("unknown outcome {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    pub outcome: Outcome,
    /// Empty unless solved.
    pub plan: Vec<Label>,
    /// Unit action costs, so the plan length.
    pub cost: u64,
    pub expansions: u64,
    /// Successor states produced, duplicates included.
    pub generated: u64,
    /// Calls into heuristic evaluators, including those made by rankers.
    pub evaluations: u64,
}

impl SearchResult {
    pub fn solved(&self) -> bool {
        self.outcome == Outcome::Solved
    }
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("writing trace: {0}")]
    Trace(#[from] io::Error),
}

/// What orders one open list.
#[derive(Clone)]
pub enum Guidance {
    Heuristic(Arc<dyn Evaluator>),
    /// Path-dependent discrepancy values from a sibling ranking.
    Discrepancy(DiscrepancyEvaluator),
}

impl Guidance {
    pub fn heuristic(e: Arc<dyn Evaluator>) -> Self {
        Guidance::Heuristic(e)
    }

    pub fn policy(ranker: Arc<dyn Ranker>) -> Self {
        Guidance::Discrepancy(DiscrepancyEvaluator::new(ranker))
    }

    pub fn name(&self) -> &str {
        match self {
            Guidance::Heuristic(e) => e.name(),
            Guidance::Discrepancy(d) => d.name(),
        }
    }

    fn root_value(&self, s: &BlackBoxState, evals: &mut u64) -> Result<HValue, EvalError> {
        match self {
            Guidance::Heuristic(e) => {
                *evals += 1;
                e.evaluate(s)
            }
            Guidance::Discrepancy(d) => Ok(d.root_value()),
        }
    }

    /// Values for the fresh successors; entries for duplicates are unused.
    fn child_values(
        &self,
        parent: HValue,
        siblings: &[BlackBoxState],
        fresh: &[bool],
        evals: &mut u64,
    ) -> Result<Vec<HValue>, EvalError> {
        match self {
            Guidance::Heuristic(e) => siblings
                .iter()
                .zip(fresh)
                .map(|(s, &f)| {
                    if f {
                        *evals += 1;
                        e.evaluate(s)
                    } else {
                        Ok(HValue::INFINITE)
                    }
                })
                .collect(),
            Guidance::Discrepancy(d) => {
                *evals += siblings.len() as u64;
                d.child_values(parent, siblings)
            }
        }
    }
}

#[derive(Clone)]
pub enum Algorithm {
    Gbfs(Guidance),
    /// Strict alternation between two open lists, starting with the first.
    DoubleQueue(Guidance, Guidance),
    /// One open list keyed by `(primary, secondary, insertion order)`.
    TieBreak { primary: Guidance, secondary: Guidance },
}

impl Algorithm {
    fn channels(&self) -> Vec<&Guidance> {
        match self {
            Algorithm::Gbfs(g) => vec![g],
            Algorithm::DoubleQueue(a, b) => vec![a, b],
            Algorithm::TieBreak { primary, secondary } => vec![primary, secondary],
        }
    }
}

/// How discrepancy guidance is combined with a heuristic.
#[derive(Clone)]
pub enum Combine {
    None,
    DoubleQueue(Arc<dyn Evaluator>),
    /// The heuristic is primary and the discrepancy value breaks ties.
    TieBreak(Arc<dyn Evaluator>),
}

type Key = Reverse<(HValue, HValue, u32)>;

struct Node {
    parent: u32,
    label: Option<Label>,
    values: [HValue; 2],
}

const NO_PARENT: u32 = u32::MAX;

struct Engine<'a, 'w> {
    task: &'a dyn BlackBoxTask,
    algo: &'a Algorithm,
    budget: u64,
    trace: Option<&'w mut dyn Write>,
    states: IndexSet<BlackBoxState>,
    nodes: Vec<Node>,
    expanded: Vec<bool>,
    queues: [BinaryHeap<Key>; 2],
    turn: usize,
    expansions: u64,
    generated: u64,
    evaluations: u64,
}

impl Engine<'_, '_> {
    /// Queues a node under every finite value. The root is queued
    /// regardless, so a goal initial state is found even when an evaluator
    /// flags it as a dead end.
    fn push(&mut self, id: u32) {
        let mut v = self.nodes[id as usize].values;
        if id == 0 {
            v = v.map(|x| if x.is_infinite() { HValue::new(u64::MAX - 1) } else { x });
        }
        match self.algo {
            Algorithm::Gbfs(_) => {
                if !v[0].is_infinite() {
                    self.queues[0].push(Reverse((v[0], HValue::ZERO, id)));
                }
            }
            Algorithm::TieBreak { .. } => {
                if !v[0].is_infinite() {
                    self.queues[0].push(Reverse((v[0], v[1], id)));
                }
            }
            Algorithm::DoubleQueue(..) => {
                for q in 0..2 {
                    if !v[q].is_infinite() {
                        self.queues[q].push(Reverse((v[q], HValue::ZERO, id)));
                    }
                }
            }
        }
    }

    fn pop_from(&mut self, q: usize) -> Option<u32> {
        while let Some(Reverse((_, _, id))) = self.queues[q].pop() {
            if !self.expanded[id as usize] {
                return Some(id);
            }
        }
        None
    }

    fn pick(&mut self) -> Option<(u32, usize)> {
        if !matches!(self.algo, Algorithm::DoubleQueue(..)) {
            return self.pop_from(0).map(|id| (id, 0));
        }
        for attempt in 0..2 {
            let q = (self.turn + attempt) % 2;
            if let Some(id) = self.pop_from(q) {
                self.turn = q ^ 1;
                return Some((id, q));
            }
        }
        None
    }

    fn log(&mut self, event: &str, id: u32, queue: Option<usize>) -> io::Result<()> {
        let Some(w) = self.trace.as_deref_mut() else {
            return Ok(());
        };
        let n = &self.nodes[id as usize];
        let nv = self.algo.channels().len();
        let line = json!({
            "event": event,
            "state": format!("{:016x}", self.states[id as usize].stable_hash()),
            "values": &n.values[..nv],
            "queue": queue,
            "counter": self.expansions,
        });
        writeln!(w, "{line}")
    }

    fn plan(&self, mut id: u32) -> Vec<Label> {
        let mut plan = Vec::new();
        while let Some(n) = self.nodes.get(id as usize) {
            match &n.label {
                Some(l) => plan.push(l.clone()),
                None => break,
            }
            id = n.parent;
        }
        plan.reverse();
        plan
    }

    fn finish(&self, outcome: Outcome, plan: Vec<Label>) -> SearchResult {
        SearchResult {
            outcome,
            cost: plan.len() as u64,
            plan,
            expansions: self.expansions,
            generated: self.generated,
            evaluations: self.evaluations,
        }
    }

    fn run(mut self) -> Result<SearchResult, SearchError> {
        let channels = self.algo.channels();
        let root = self.task.initial_state();
        let mut values = [HValue::ZERO; 2];
        for (i, g) in channels.iter().enumerate() {
            values[i] = g.root_value(&root, &mut self.evaluations)?;
        }
        self.states.insert(root);
        self.nodes.push(Node { parent: NO_PARENT, label: None, values });
        self.expanded.push(false);
        self.push(0);

        loop {
            let Some((id, queue)) = self.pick() else {
                return Ok(self.finish(Outcome::SpaceExhausted, Vec::new()));
            };
            let state = self.states[id as usize].clone();
            if self.task.is_goal(&state) {
                self.log("solved", id, Some(queue))?;
                let plan = self.plan(id);
                return Ok(self.finish(Outcome::Solved, plan));
            }
            if self.expansions == self.budget {
                return Ok(self.finish(Outcome::BudgetExhausted, Vec::new()));
            }
            self.expansions += 1;
            self.expanded[id as usize] = true;
            self.log("expand", id, Some(queue))?;

            let (labels, succ): (Vec<Label>, Vec<BlackBoxState>) =
                self.task.successors(&state).into_iter().unzip();
            self.generated += succ.len() as u64;
            let mut fresh = Vec::with_capacity(succ.len());
            {
                let mut local = std::collections::HashSet::new();
                for s in &succ {
                    fresh.push(!self.states.contains(s) && local.insert(s));
                }
            }
            let parent_values = self.nodes[id as usize].values;
            let mut child_values = Vec::with_capacity(channels.len());
            for (i, g) in channels.iter().enumerate() {
                child_values.push(g.child_values(
                    parent_values[i],
                    &succ,
                    &fresh,
                    &mut self.evaluations,
                )?);
            }
            for (k, (label, s)) in labels.into_iter().zip(succ).enumerate() {
                if !fresh[k] {
                    continue;
                }
                let mut values = [HValue::ZERO; 2];
                for (i, cv) in child_values.iter().enumerate() {
                    values[i] = cv[k];
                }
                let (child, _) = self.states.insert_full(s);
                let child = child as u32;
                self.nodes.push(Node { parent: id, label: Some(label), values });
                self.expanded.push(false);
                self.log("generate", child, None)?;
                self.push(child);
            }
        }
    }
}

/// Runs `algo` on `task` with at most `budget` expansions. With `trace`,
/// one JSON object per line is written for every expansion, generation and
/// the final goal pop.
pub fn search(
    task: &dyn BlackBoxTask,
    algo: &Algorithm,
    budget: u64,
    trace: Option<&mut dyn Write>,
) -> Result<SearchResult, SearchError> {
    Engine {
        task,
        algo,
        budget,
        trace,
        states: IndexSet::new(),
        nodes: Vec::new(),
        expanded: Vec::new(),
        queues: [BinaryHeap::new(), BinaryHeap::new()],
        turn: 0,
        expansions: 0,
        generated: 0,
        evaluations: 0,
    }
    .run()
}

pub fn gbfs(
    task: &dyn BlackBoxTask,
    e: Arc<dyn Evaluator>,
    budget: u64,
) -> Result<SearchResult, SearchError> {
    search(task, &Algorithm::Gbfs(Guidance::Heuristic(e)), budget, None)
}

pub fn double_queue(
    task: &dyn BlackBoxTask,
    e1: Arc<dyn Evaluator>,
    e2: Arc<dyn Evaluator>,
    budget: u64,
) -> Result<SearchResult, SearchError> {
    let algo = Algorithm::DoubleQueue(Guidance::Heuristic(e1), Guidance::Heuristic(e2));
    search(task, &algo, budget, None)
}

pub fn tiebreak_gbfs(
    task: &dyn BlackBoxTask,
    primary: Arc<dyn Evaluator>,
    secondary: Arc<dyn Evaluator>,
    budget: u64,
) -> Result<SearchResult, SearchError> {
    let algo = Algorithm::TieBreak {
        primary: Guidance::Heuristic(primary),
        secondary: Guidance::Heuristic(secondary),
    };
    search(task, &algo, budget, None)
}

pub fn run_with_discrepancy(
    task: &dyn BlackBoxTask,
    ranker: Arc<dyn Ranker>,
    budget: u64,
    combine: Combine,
) -> Result<SearchResult, SearchError> {
    let policy = Guidance::policy(ranker);
    let algo = match combine {
        Combine::None => Algorithm::Gbfs(policy),
        Combine::DoubleQueue(e) => Algorithm::DoubleQueue(policy, Guidance::Heuristic(e)),
        Combine::TieBreak(e) => {
            Algorithm::TieBreak { primary: Guidance::Heuristic(e), secondary: policy }
        }
    };
    search(task, &algo, budget, None)
}
