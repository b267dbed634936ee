//! Brute-force reference implementations over small tasks, written against
//! plain bitmasks so they share no code with the library.

#![allow(dead_code)]

use std::collections::VecDeque;

use parplan_core::strips::ActionSpec;
use parplan_core::{FactId, StripsState, StripsTask};
use rand::Rng;

pub const MAX_FACTS: usize = 12;
pub const MAX_ACTIONS: usize = 10;

#[derive(Debug, Clone)]
pub struct MaskAction {
    pub pre: u32,
    pub add: u32,
    pub del: u32,
}

pub fn mask(facts: impl IntoIterator<Item = FactId>) -> u32 {
    facts.into_iter().fold(0, |m, f| m | (1 << f.0))
}

fn facts_of(m: u32) -> Vec<FactId> {
    (0..32).filter(|i| m & (1 << i) != 0).map(FactId).collect()
}

pub fn mask_actions(task: &StripsTask) -> Vec<MaskAction> {
    task.actions()
        .iter()
        .map(|a| MaskAction {
            pre: mask(a.pre.iter().copied()),
            add: mask(a.add.iter().copied()),
            del: mask(a.del.iter().copied()),
        })
        .collect()
}

fn random_subset(rng: &mut impl Rng, n: usize, lo: usize, hi: usize) -> Vec<FactId> {
    let k = rng.gen_range(lo..=hi.min(n));
    let mut v: Vec<u32> = (0..n as u32).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        v.swap(i, j);
    }
    v.truncate(k);
    v.into_iter().map(FactId).collect()
}

/// A random task with at most [`MAX_FACTS`] facts and [`MAX_ACTIONS`] actions.
pub fn random_task(rng: &mut impl Rng) -> StripsTask {
    let nf = rng.gen_range(2..=MAX_FACTS);
    let na = rng.gen_range(1..=MAX_ACTIONS);
    let names = (0..nf).map(|i| format!("p{i}")).collect();
    let actions = (0..na)
        .map(|i| ActionSpec {
            name: format!("a{i}"),
            pre: random_subset(rng, nf, 0, 3),
            add: random_subset(rng, nf, 1, 3),
            del: random_subset(rng, nf, 0, 2),
        })
        .collect();
    let init = random_subset(rng, nf, 1, 3);
    let goal = random_subset(rng, nf, 1, 4);
    StripsTask::new(names, actions, init, goal).unwrap()
}

pub fn random_state(rng: &mut impl Rng, task: &StripsTask) -> StripsState {
    let n = task.num_facts();
    task.state(&random_subset(rng, n, 0, n)).unwrap()
}

/// Facts reachable from `s` when deletes are ignored.
pub fn relaxed_closure(actions: &[MaskAction], s: u32) -> u32 {
    let mut reached = s;
    loop {
        let next = actions
            .iter()
            .filter(|a| a.pre & reached == a.pre)
            .fold(reached, |m, a| m | a.add);
        if next == reached {
            return reached;
        }
        reached = next;
    }
}

/// Optimal delete-relaxed plan length by breadth-first search over fact
/// sets; `None` if the goal is relaxed-unreachable.
pub fn h_plus(actions: &[MaskAction], s: u32, goal: u32) -> Option<u64> {
    if relaxed_closure(actions, s) & goal != goal {
        return None;
    }
    let mut dist = std::collections::HashMap::new();
    let mut queue = VecDeque::new();
    dist.insert(s, 0u64);
    queue.push_back(s);
    while let Some(m) = queue.pop_front() {
        let d = dist[&m];
        if m & goal == goal {
            return Some(d);
        }
        for a in actions {
            if a.pre & m == a.pre {
                let n = m | a.add;
                if n != m && !dist.contains_key(&n) {
                    dist.insert(n, d + 1);
                    queue.push_back(n);
                }
            }
        }
    }
    unreachable!("closure contains the goal")
}

/// h_add costs by value iteration to the least fixpoint.
pub fn h_add_costs(actions: &[MaskAction], s: u32, num_facts: usize) -> Vec<Option<u64>> {
    let mut cost: Vec<Option<u64>> =
        (0..num_facts).map(|i| (s & (1 << i) != 0).then_some(0)).collect();
    loop {
        let mut changed = false;
        for a in actions {
            let pre: Option<u64> = facts_of(a.pre).iter().map(|f| cost[f.index()]).sum();
            let Some(pre) = pre else { continue };
            for f in facts_of(a.add) {
                if cost[f.index()].map_or(true, |c| pre + 1 < c) {
                    cost[f.index()] = Some(pre + 1);
                    changed = true;
                }
            }
        }
        if !changed {
            return cost;
        }
    }
}

/// Replays a plan with plain set operations; `Some(len)` if it reaches the goal.
pub fn replay(actions: &[MaskAction], init: u32, goal: u32, plan: &[usize]) -> Option<u64> {
    let mut s = init;
    for &i in plan {
        let a = actions.get(i)?;
        if a.pre & s != a.pre {
            return None;
        }
        s = (s & !a.del) | a.add;
    }
    (s & goal == goal).then_some(plan.len() as u64)
}

/// A rooted tree of random branching whose goal is one random leaf. Node
/// facts are numbered in creation order and each edge deletes the parent.
pub fn random_tree_task(rng: &mut impl Rng, max_depth: u32, max_branch: usize) -> (StripsTask, u64) {
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    let mut depth = vec![0u32];
    let mut frontier = vec![0usize];
    while let Some(n) = frontier.pop() {
        if depth[n] >= max_depth {
            continue;
        }
        let k = if n == 0 { rng.gen_range(1..=max_branch) } else { rng.gen_range(0..=max_branch) };
        for _ in 0..k {
            let c = depth.len();
            depth.push(depth[n] + 1);
            children.push(Vec::new());
            children[n].push(c);
            frontier.push(c);
        }
    }
    let leaves: Vec<usize> = (0..depth.len()).filter(|&i| children[i].is_empty()).collect();
    let goal = leaves[rng.gen_range(0..leaves.len())];
    let names = (0..depth.len()).map(|i| format!("node{i}")).collect();
    let mut actions = Vec::new();
    for (p, cs) in children.iter().enumerate() {
        for &c in cs {
            actions.push(ActionSpec {
                name: format!("edge-{p}-{c}"),
                pre: vec![FactId(p as u32)],
                add: vec![FactId(c as u32)],
                del: vec![FactId(p as u32)],
            });
        }
    }
    let task = StripsTask::new(names, actions, vec![FactId(0)], vec![FactId(goal as u32)]).unwrap();
    (task, u64::from(depth[goal]))
}
