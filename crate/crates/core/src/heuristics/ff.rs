use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::{Arc, Mutex};

use super::{HValue, StripsHeuristic};
use crate::strips::{ActionId, FactId, StripsState, StripsTask};

const UNREACHED: u64 = u64::MAX;
const NO_ACTION: u32 = u32::MAX;

/// Result of the delete-relaxed h_add fixpoint from one state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelaxedExploration {
    /// Per-fact h_add cost; infinite when unreachable under the relaxation.
    pub cost: Vec<HValue>,
    /// Per-fact cheapest achiever, ties broken by lowest action id. `None`
    /// for facts in the state and for unreachable facts.
    pub supporter: Vec<Option<ActionId>>,
}

#[derive(Default)]
struct Scratch {
    cost: Vec<u64>,
    supporter: Vec<u32>,
    unsat: Vec<u32>,
    acc: Vec<u64>,
    heap: BinaryHeap<Reverse<(u64, u32)>>,
    fact_mark: Vec<u32>,
    action_mark: Vec<u32>,
    stamp: u32,
    stack: Vec<u32>,
}

/// FF heuristic: size of a relaxed plan extracted through best supporters
/// of the h_add fixpoint.
///
/// Evaluation is reentrant: scratch buffers come from an internal pool, so
/// one instance may serve concurrent searches.
pub struct FfHeuristic {
    task: Arc<StripsTask>,
    name: String,
    pre_start: Vec<u32>,
    pre_of: Vec<u32>,
    add_start: Vec<u32>,
    adds: Vec<u32>,
    pre_len: Vec<u32>,
    no_pre: Vec<u32>,
    is_goal: Vec<bool>,
    pool: Mutex<Vec<Scratch>>,
}

fn csr(lists: &[Vec<u32>]) -> (Vec<u32>, Vec<u32>) {
    let mut start = Vec::with_capacity(lists.len() + 1);
    let mut flat = Vec::new();
    start.push(0);
    for l in lists {
        flat.extend_from_slice(l);
        start.push(flat.len() as u32);
    }
    (start, flat)
}

impl FfHeuristic {
    pub fn new(task: Arc<StripsTask>) -> Self {
        let nf = task.num_facts();
        let mut pre_of = vec![Vec::new(); nf];
        let mut adds = Vec::with_capacity(task.num_actions());
        let mut no_pre = Vec::new();
        let mut pre_len = Vec::with_capacity(task.num_actions());
        for a in task.actions() {
            for &f in &a.pre {
                pre_of[f.index()].push(a.id.0);
            }
            if a.pre.is_empty() {
                no_pre.push(a.id.0);
            }
            pre_len.push(a.pre.len() as u32);
            adds.push(a.add.iter().map(|f| f.0).collect::<Vec<_>>());
        }
        let (pre_start, pre_of) = csr(&pre_of);
        let (add_start, adds) = csr(&adds);
        let mut is_goal = vec![false; nf];
        for &g in task.goal() {
            is_goal[g.index()] = true;
        }
        FfHeuristic {
            task,
            name: "ff".into(),
            pre_start,
            pre_of,
            add_start,
            adds,
            pre_len,
            no_pre,
            is_goal,
            pool: Mutex::new(Vec::new()),
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn task(&self) -> &Arc<StripsTask> {
        &self.task
    }

    fn scratch(&self) -> Scratch {
        let mut sc = self.pool.lock().unwrap().pop().unwrap_or_default();
        let nf = self.task.num_facts();
        let na = self.task.num_actions();
        if sc.cost.len() != nf {
            sc.cost = vec![0; nf];
            sc.supporter = vec![0; nf];
            sc.fact_mark = vec![0; nf];
            sc.action_mark = vec![0; na];
            sc.stamp = 0;
        }
        sc
    }

    fn release(&self, sc: Scratch) {
        self.pool.lock().unwrap().push(sc);
    }

    fn fire(&self, a: u32, cost: u64, sc: &mut Scratch) {
        let (lo, hi) = (self.add_start[a as usize], self.add_start[a as usize + 1]);
        for &q in &self.adds[lo as usize..hi as usize] {
            let q = q as usize;
            if cost < sc.cost[q] {
                sc.cost[q] = cost;
                sc.supporter[q] = a;
                sc.heap.push(Reverse((cost, q as u32)));
            } else if cost == sc.cost[q] && a < sc.supporter[q] {
                sc.supporter[q] = a;
            }
        }
    }

    /// Generalized Dijkstra over the relaxed task. With `stop_at_goals`, stops
    /// once every goal fact is settled; all actions cheaper than or as cheap
    /// as the costliest goal have fired by then, so supporters of relevant
    /// facts are the same as in the full fixpoint. Returns whether every goal
    /// fact is reachable.
    fn explore(&self, s: &StripsState, sc: &mut Scratch, stop_at_goals: bool) -> bool {
        sc.cost.fill(UNREACHED);
        sc.supporter.fill(NO_ACTION);
        sc.unsat.clear();
        sc.unsat.extend_from_slice(&self.pre_len);
        sc.acc.clear();
        sc.acc.resize(self.pre_len.len(), 0);
        sc.heap.clear();

        let mut goals_left = self.task.goal().len();
        for f in s.iter() {
            sc.cost[f.index()] = 0;
            sc.heap.push(Reverse((0, f.0)));
        }
        for &a in &self.no_pre {
            self.fire(a, 1, sc);
        }
        while let Some(Reverse((c, f))) = sc.heap.pop() {
            let f = f as usize;
            if c > sc.cost[f] {
                continue;
            }
            if self.is_goal[f] {
                goals_left -= 1;
                if goals_left == 0 && stop_at_goals {
                    return true;
                }
            }
            let (lo, hi) = (self.pre_start[f] as usize, self.pre_start[f + 1] as usize);
            for i in lo..hi {
                let a = self.pre_of[i] as usize;
                sc.acc[a] = sc.acc[a].saturating_add(c);
                sc.unsat[a] -= 1;
                if sc.unsat[a] == 0 {
                    let ac = sc.acc[a].saturating_add(1);
                    self.fire(a as u32, ac, sc);
                }
            }
        }
        goals_left == 0
    }

    fn relaxed_plan_size(&self, s: &StripsState, sc: &mut Scratch) -> u64 {
        sc.stamp = sc.stamp.wrapping_add(1);
        if sc.stamp == 0 {
            sc.fact_mark.fill(0);
            sc.action_mark.fill(0);
            sc.stamp = 1;
        }
        let stamp = sc.stamp;
        let mut size = 0u64;
        sc.stack.clear();
        sc.stack.extend(self.task.goal().iter().map(|g| g.0));
        while let Some(f) = sc.stack.pop() {
            let fi = f as usize;
            if sc.fact_mark[fi] == stamp || s.contains(FactId(f)) {
                continue;
            }
            sc.fact_mark[fi] = stamp;
            let a = sc.supporter[fi];
            debug_assert_ne!(a, NO_ACTION);
            if sc.action_mark[a as usize] != stamp {
                sc.action_mark[a as usize] = stamp;
                size += 1;
                for &p in &self.task.actions()[a as usize].pre {
                    sc.stack.push(p.0);
                }
            }
        }
        size
    }

    pub fn exploration(&self, s: &StripsState) -> RelaxedExploration {
        let mut sc = self.scratch();
        self.explore(s, &mut sc, false);
        let out = RelaxedExploration {
            cost: sc
                .cost
                .iter()
                .map(|&c| if c == UNREACHED { HValue::INFINITE } else { HValue::new(c) })
                .collect(),
            supporter: sc
                .supporter
                .iter()
                .map(|&a| (a != NO_ACTION).then_some(ActionId(a)))
                .collect(),
        };
        self.release(sc);
        out
    }
}

impl StripsHeuristic for FfHeuristic {
    fn name(&self) -> &str {
        &self.name
    }

    fn evaluate(&self, s: &StripsState) -> HValue {
        if self.task.is_goal(s) {
            return HValue::ZERO;
        }
        let mut sc = self.scratch();
        let value = if self.explore(s, &mut sc, true) {
            HValue::new(self.relaxed_plan_size(s, &mut sc))
        } else {
            HValue::INFINITE
        };
        self.release(sc);
        value
    }
}

pub fn ff_heuristic(task: &Arc<StripsTask>, s: &StripsState) -> HValue {
    FfHeuristic::new(task.clone()).evaluate(s)
}

pub fn h_add(task: &Arc<StripsTask>, s: &StripsState) -> RelaxedExploration {
    FfHeuristic::new(task.clone()).exploration(s)
}
