//! Ground STRIPS tasks.
//!
//! States are fixed-width bit vectors over the task's facts. Actions are
//! numbered densely in construction order and every iteration over actions
//! is id-ascending, which keeps searches reproducible.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FactId(pub u32);

impl FactId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for FactId {
    fn from(i: usize) -> Self {
        FactId(i as u32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionId(pub u32);

impl ActionId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for ActionId {
    fn from(i: usize) -> Self {
        ActionId(i as u32)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StripsError {
    #[error("fact {fact} is out of range for a task with {num_facts} facts")]
    FactOutOfRange { fact: usize, num_facts: usize },
    #[error("duplicate fact name `{0}`")]
    DuplicateFact(String),
    #[error("action `{0}` is not applicable")]
    NotApplicable(String),
    #[error("state encoding has {got} bytes, expected {expected}")]
    BadEncoding { got: usize, expected: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("plan step {0} is not applicable")]
    InapplicableStep(usize),
    #[error("plan step {0} names an unknown action")]
    UnknownAction(usize),
    #[error("plan does not reach the goal")]
    GoalNotReached,
}

/// A set of facts stored as a bit vector sized to the task.
///
/// Two states over the same fact vocabulary are equal iff they contain the
/// same facts; the byte encoding is canonical.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StripsState {
    words: Box<[u64]>,
    num_facts: u32,
}

impl StripsState {
    pub fn empty(num_facts: usize) -> Self {
        StripsState {
            words: vec![0; num_facts.div_ceil(64)].into_boxed_slice(),
            num_facts: num_facts as u32,
        }
    }

    pub fn from_facts<I>(num_facts: usize, facts: I) -> Result<Self, StripsError>
    where
        I: IntoIterator<Item = FactId>,
    {
        let mut s = Self::empty(num_facts);
        for f in facts {
            if f.index() >= num_facts {
                return Err(StripsError::FactOutOfRange { fact: f.index(), num_facts });
            }
            s.insert(f);
        }
        Ok(s)
    }

    #[inline]
    pub fn num_facts(&self) -> usize {
        self.num_facts as usize
    }

    #[inline]
    pub fn contains(&self, f: FactId) -> bool {
        let i = f.index();
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, f: FactId) {
        let i = f.index();
        debug_assert!(i < self.num_facts());
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, f: FactId) {
        let i = f.index();
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn contains_all(&self, facts: &[FactId]) -> bool {
        facts.iter().all(|&f| self.contains(f))
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_subset(&self, other: &StripsState) -> bool {
        self.words.iter().zip(other.words.iter()).all(|(a, b)| a & !b == 0)
    }

    /// True facts in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = FactId> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros();
                w &= w - 1;
                Some(FactId(wi as u32 * 64 + bit))
            })
        })
    }

    /// Canonical little-endian encoding of the bit vector.
    pub fn to_bytes(&self) -> Vec<u8> {
        let nbytes = self.num_facts().div_ceil(8);
        let mut out = Vec::with_capacity(self.words.len() * 8);
        for w in self.words.iter() {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out.truncate(nbytes);
        out
    }

    pub fn from_bytes(num_facts: usize, bytes: &[u8]) -> Result<Self, StripsError> {
        let expected = num_facts.div_ceil(8);
        if bytes.len() != expected {
            return Err(StripsError::BadEncoding { got: bytes.len(), expected });
        }
        let mut s = Self::empty(num_facts);
        for (wi, chunk) in bytes.chunks(8).enumerate() {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            s.words[wi] = u64::from_le_bytes(buf);
        }
        // Bits past num_facts would break canonicity.
        if num_facts % 64 != 0 {
            if let Some(last) = s.words.last() {
                if last >> (num_facts % 64) != 0 {
                    return Err(StripsError::FactOutOfRange {
                        fact: num_facts,
                        num_facts,
                    });
                }
            }
        }
        Ok(s)
    }
}

impl fmt::Debug for StripsState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|x| x.0)).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripsAction {
    pub id: ActionId,
    pub name: String,
    pub pre: Vec<FactId>,
    pub add: Vec<FactId>,
    pub del: Vec<FactId>,
    pub cost: u32,
}

impl StripsAction {
    #[inline]
    pub fn applicable(&self, s: &StripsState) -> bool {
        s.contains_all(&self.pre)
    }

    /// `(s \ del) ∪ add`; a fact in both lists ends up true.
    pub fn apply(&self, s: &StripsState) -> Result<StripsState, StripsError> {
        if !self.applicable(s) {
            return Err(StripsError::NotApplicable(self.name.clone()));
        }
        Ok(self.apply_unchecked(s))
    }

    #[inline]
    pub fn apply_unchecked(&self, s: &StripsState) -> StripsState {
        let mut next = s.clone();
        for &f in &self.del {
            next.remove(f);
        }
        for &f in &self.add {
            next.insert(f);
        }
        next
    }
}

/// Action description used to build a task; ids are assigned by position.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActionSpec {
    pub name: String,
    pub pre: Vec<FactId>,
    pub add: Vec<FactId>,
    pub del: Vec<FactId>,
}

#[derive(Debug, Clone)]
pub struct StripsTask {
    facts: Vec<String>,
    fact_index: HashMap<String, FactId>,
    actions: Vec<StripsAction>,
    init: StripsState,
    goal: Vec<FactId>,
    /// Each action with a precondition is filed under one of its precondition
    /// facts; a state only needs to look at the lists of its true facts.
    trigger: Vec<Vec<ActionId>>,
    no_pre: Vec<ActionId>,
}

impl PartialEq for StripsTask {
    fn eq(&self, other: &Self) -> bool {
        self.facts == other.facts
            && self.actions == other.actions
            && self.init == other.init
            && self.goal == other.goal
    }
}

fn normalize(mut v: Vec<FactId>) -> Vec<FactId> {
    v.sort_unstable();
    v.dedup();
    v
}

impl StripsTask {
    pub fn new(
        facts: Vec<String>,
        actions: Vec<ActionSpec>,
        init: Vec<FactId>,
        goal: Vec<FactId>,
    ) -> Result<Self, StripsError> {
        let n = facts.len();
        let mut fact_index = HashMap::with_capacity(n);
        for (i, name) in facts.iter().enumerate() {
            if fact_index.insert(name.clone(), FactId::from(i)).is_some() {
                return Err(StripsError::DuplicateFact(name.clone()));
            }
        }
        let check = |fs: &[FactId]| -> Result<(), StripsError> {
            match fs.iter().find(|f| f.index() >= n) {
                Some(f) => Err(StripsError::FactOutOfRange { fact: f.index(), num_facts: n }),
                None => Ok(()),
            }
        };
        let mut built = Vec::with_capacity(actions.len());
        for (i, a) in actions.into_iter().enumerate() {
            check(&a.pre)?;
            check(&a.add)?;
            check(&a.del)?;
            built.push(StripsAction {
                id: ActionId::from(i),
                name: a.name,
                pre: normalize(a.pre),
                add: normalize(a.add),
                del: normalize(a.del),
                cost: 1,
            });
        }
        check(&goal)?;
        let init = StripsState::from_facts(n, init)?;
        let goal = normalize(goal);

        let mut fluent = vec![false; n];
        let mut pre_count = vec![0usize; n];
        for a in &built {
            for &f in a.add.iter().chain(a.del.iter()) {
                fluent[f.index()] = true;
            }
            for &f in &a.pre {
                pre_count[f.index()] += 1;
            }
        }
        let mut trigger = vec![Vec::new(); n];
        let mut no_pre = Vec::new();
        for a in &built {
            let key = a
                .pre
                .iter()
                .min_by_key(|f| (!fluent[f.index()], pre_count[f.index()], f.0));
            match key {
                Some(f) => trigger[f.index()].push(a.id),
                None => no_pre.push(a.id),
            }
        }

        Ok(StripsTask {
            facts,
            fact_index,
            actions: built,
            init,
            goal,
            trigger,
            no_pre,
        })
    }

    pub fn num_facts(&self) -> usize {
        self.facts.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn fact_names(&self) -> &[String] {
        &self.facts
    }

    pub fn fact_name(&self, f: FactId) -> &str {
        &self.facts[f.index()]
    }

    pub fn fact(&self, name: &str) -> Option<FactId> {
        self.fact_index.get(name).copied()
    }

    pub fn actions(&self) -> &[StripsAction] {
        &self.actions
    }

    pub fn action(&self, id: ActionId) -> &StripsAction {
        &self.actions[id.index()]
    }

    pub fn action_by_name(&self, name: &str) -> Option<&StripsAction> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn init(&self) -> &StripsState {
        &self.init
    }

    pub fn goal(&self) -> &[FactId] {
        &self.goal
    }

    pub fn state(&self, facts: &[FactId]) -> Result<StripsState, StripsError> {
        StripsState::from_facts(self.num_facts(), facts.iter().copied())
    }

    pub fn is_goal(&self, s: &StripsState) -> bool {
        s.contains_all(&self.goal)
    }

    /// Ids of the actions applicable in `s`, ascending.
    pub fn applicable_actions(&self, s: &StripsState) -> Vec<ActionId> {
        let mut out: Vec<ActionId> = self.no_pre.clone();
        for f in s.iter() {
            for &a in &self.trigger[f.index()] {
                if self.actions[a.index()].applicable(s) {
                    out.push(a);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// One entry per applicable action, ordered by action id.
    pub fn successors(&self, s: &StripsState) -> Vec<(ActionId, StripsState)> {
        self.applicable_actions(s)
            .into_iter()
            .map(|a| (a, self.actions[a.index()].apply_unchecked(s)))
            .collect()
    }

    /// Replays `plan` from the initial state and returns its cost.
    pub fn validate_plan(&self, plan: &[ActionId]) -> Result<u64, PlanError> {
        let mut s = self.init.clone();
        let mut cost = 0u64;
        for (i, &a) in plan.iter().enumerate() {
            let action = self.actions.get(a.index()).ok_or(PlanError::UnknownAction(i))?;
            if !action.applicable(&s) {
                return Err(PlanError::InapplicableStep(i));
            }
            s = action.apply_unchecked(&s);
            cost += u64::from(action.cost);
        }
        if self.is_goal(&s) {
            Ok(cost)
        } else {
            Err(PlanError::GoalNotReached)
        }
    }

    /// Like [`validate_plan`](Self::validate_plan) for plans given as action names.
    pub fn validate_named_plan<S: AsRef<str>>(&self, plan: &[S]) -> Result<u64, PlanError> {
        let index: HashMap<&str, ActionId> =
            self.actions.iter().map(|a| (a.name.as_str(), a.id)).collect();
        let ids = plan
            .iter()
            .enumerate()
            .map(|(i, n)| index.get(n.as_ref()).copied().ok_or(PlanError::UnknownAction(i)))
            .collect::<Result<Vec<_>, _>>()?;
        self.validate_plan(&ids)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn f(i: u32) -> FactId {
        FactId(i)
    }

    fn action(pre: &[u32], add: &[u32], del: &[u32]) -> StripsAction {
        StripsAction {
            id: ActionId(0),
            name: "a".into(),
            pre: pre.iter().map(|&i| f(i)).collect(),
            add: add.iter().map(|&i| f(i)).collect(),
            del: del.iter().map(|&i| f(i)).collect(),
            cost: 1,
        }
    }

    fn state(facts: &[u32]) -> StripsState {
        StripsState::from_facts(4, facts.iter().map(|&i| f(i))).unwrap()
    }

    /// Chain f0 -> f1 -> ... -> fn with action i: pre {fi}, add {fi+1}.
    pub(crate) fn chain_task(n: usize) -> StripsTask {
        let facts = (0..=n).map(|i| format!("f{i}")).collect();
        let actions = (0..n)
            .map(|i| ActionSpec {
                name: format!("a{i}"),
                pre: vec![FactId::from(i)],
                add: vec![FactId::from(i + 1)],
                del: vec![],
            })
            .collect();
        StripsTask::new(facts, actions, vec![FactId(0)], vec![FactId::from(n)]).unwrap()
    }

    #[test]
    fn applicability() {
        assert!(action(&[0], &[], &[]).applicable(&state(&[0, 1])));
        assert!(!action(&[0, 2], &[], &[]).applicable(&state(&[0, 1])));
        assert!(action(&[], &[], &[]).applicable(&state(&[])));
    }

    #[test]
    fn apply_effects() {
        assert_eq!(action(&[], &[2], &[1]).apply(&state(&[0, 1])).unwrap(), state(&[0, 2]));
        assert_eq!(action(&[], &[1], &[1]).apply(&state(&[0])).unwrap(), state(&[0, 1]));
        assert_eq!(action(&[], &[], &[]).apply(&state(&[0])).unwrap(), state(&[0]));
        assert!(matches!(
            action(&[3], &[], &[]).apply(&state(&[0])),
            Err(StripsError::NotApplicable(_))
        ));
    }

    #[test]
    fn goal_membership() {
        let mk = |goal: Vec<FactId>| {
            StripsTask::new(vec!["f0".into(), "f1".into()], vec![], vec![], goal).unwrap()
        };
        let t = mk(vec![f(1)]);
        let s01 = StripsState::from_facts(2, [f(0), f(1)]).unwrap();
        let s0 = StripsState::from_facts(2, [f(0)]).unwrap();
        assert!(t.is_goal(&s01));
        assert!(!t.is_goal(&s0));
        assert!(mk(vec![]).is_goal(&StripsState::empty(2)));
    }

    #[test]
    fn successor_order_is_by_action_id() {
        let facts: Vec<String> = (0..3).map(|i| format!("f{i}")).collect();
        let mut actions = vec![ActionSpec::default(); 8];
        for (i, a) in actions.iter_mut().enumerate() {
            a.name = format!("a{i}");
            a.pre = vec![f(2)];
        }
        actions[3].pre = vec![f(0)];
        actions[7].pre = vec![f(1)];
        actions[7].add = vec![f(2)];
        let t = StripsTask::new(facts, actions, vec![f(0), f(1)], vec![]).unwrap();
        let ids: Vec<_> = t.successors(t.init()).into_iter().map(|(a, _)| a.0).collect();
        assert_eq!(ids, vec![3, 7]);

        let chain = chain_task(3);
        assert_eq!(chain.successors(chain.init()).len(), 1);
        let dead = StripsTask::new(vec!["x".into()], vec![], vec![], vec![]).unwrap();
        assert!(dead.successors(dead.init()).is_empty());
    }

    #[test]
    fn plan_validation() {
        let t = chain_task(3);
        assert_eq!(t.validate_plan(&[ActionId(0), ActionId(1), ActionId(2)]), Ok(3));
        assert_eq!(
            t.validate_plan(&[ActionId(0), ActionId(2)]),
            Err(PlanError::InapplicableStep(1))
        );
        assert_eq!(t.validate_plan(&[ActionId(0)]), Err(PlanError::GoalNotReached));
        let trivial = StripsTask::new(vec!["g".into()], vec![], vec![f(0)], vec![f(0)]).unwrap();
        assert_eq!(trivial.validate_plan(&[]), Ok(0));
        assert_eq!(t.validate_named_plan(&["a0", "a1", "a2"]), Ok(3));
    }

    #[test]
    fn bytes_roundtrip_and_canonicity() {
        let s = StripsState::from_facts(70, [f(0), f(9), f(69)]).unwrap();
        let b = s.to_bytes();
        assert_eq!(b.len(), 9);
        assert_eq!(StripsState::from_bytes(70, &b).unwrap(), s);
        let mut bad = b.clone();
        bad[8] |= 0x80;
        assert!(StripsState::from_bytes(70, &bad).is_err());
        assert!(StripsState::from_bytes(70, &b[..8]).is_err());
    }

    #[test]
    fn out_of_range_facts_are_rejected() {
        let err = StripsTask::new(vec!["a".into()], vec![], vec![f(1)], vec![]).unwrap_err();
        assert_eq!(err, StripsError::FactOutOfRange { fact: 1, num_facts: 1 });
        assert!(StripsTask::new(vec!["a".into(), "a".into()], vec![], vec![], vec![]).is_err());
    }
}
