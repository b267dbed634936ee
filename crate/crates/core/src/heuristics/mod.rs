//! State evaluators: FF and goal count over STRIPS tasks, regression
//! surrogates standing in for learned heuristics, and discrepancy values for
//! policy-style guidance.

mod discrepancy;
mod ff;
mod surrogate;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::blackbox::{BlackBoxState, MappingError};
use crate::strips::{StripsState, StripsTask};

pub use discrepancy::{heuristic_ranker, DiscrepancyEvaluator, HeuristicRanker, Ranker};
pub use ff::{ff_heuristic, h_add, FfHeuristic, RelaxedExploration};
pub use surrogate::{
    fit_surrogate, surrogate_value, FeatureExtractor, SurrogateError, SurrogateHeuristic,
    SurrogateModel, TrainingSample, RIDGE,
};

/// Heuristic value: a non-negative integer or a dead end.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HValue(u64);

impl HValue {
    pub const ZERO: HValue = HValue(0);
    pub const INFINITE: HValue = HValue(u64::MAX);

    pub const fn new(v: u64) -> Self {
        assert!(v != u64::MAX);
        HValue(v)
    }

    pub fn is_infinite(self) -> bool {
        self == Self::INFINITE
    }

    pub fn finite(self) -> Option<u64> {
        (!self.is_infinite()).then_some(self.0)
    }

    /// Saturates at [`HValue::INFINITE`].
    pub fn add(self, other: u64) -> HValue {
        if self.is_infinite() {
            return self;
        }
        HValue(self.0.saturating_add(other))
    }
}

impl fmt::Debug for HValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.finite() {
            Some(v) => write!(f, "{v}"),
            None => f.write_str("inf"),
        }
    }
}

impl fmt::Display for HValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl serde::Serialize for HValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.finite() {
            Some(v) => s.serialize_u64(v),
            None => s.serialize_none(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error(transparent)]
    Mapping(#[from] MappingError),
}

/// A deterministic value function over black-box states.
pub trait Evaluator: Send + Sync {
    fn name(&self) -> &str;
    fn evaluate(&self, state: &BlackBoxState) -> Result<HValue, EvalError>;
}

impl<E: Evaluator + ?Sized> Evaluator for Arc<E> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn evaluate(&self, state: &BlackBoxState) -> Result<HValue, EvalError> {
        (**self).evaluate(state)
    }
}

/// A heuristic over the states of one STRIPS task.
pub trait StripsHeuristic: Send + Sync {
    fn name(&self) -> &str;
    fn evaluate(&self, state: &StripsState) -> HValue;
}

/// Same value everywhere; "no guidance".
#[derive(Debug, Clone)]
pub struct ConstantEvaluator {
    pub name: String,
    pub value: HValue,
}

impl ConstantEvaluator {
    pub fn blind() -> Self {
        ConstantEvaluator { name: "blind".into(), value: HValue::ZERO }
    }
}

impl Evaluator for ConstantEvaluator {
    fn name(&self) -> &str {
        &self.name
    }
    fn evaluate(&self, _: &BlackBoxState) -> Result<HValue, EvalError> {
        Ok(self.value)
    }
}

/// Number of goal facts not in the state.
pub fn goal_count(task: &StripsTask, s: &StripsState) -> HValue {
    HValue::new(task.goal().iter().filter(|&&g| !s.contains(g)).count() as u64)
}

pub struct GoalCount {
    task: Arc<StripsTask>,
}

impl GoalCount {
    pub fn new(task: Arc<StripsTask>) -> Self {
        GoalCount { task }
    }
}

impl StripsHeuristic for GoalCount {
    fn name(&self) -> &str {
        "goal-count"
    }
    fn evaluate(&self, state: &StripsState) -> HValue {
        goal_count(&self.task, state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strips::FactId;

    #[test]
    fn hvalue_order_and_saturation() {
        assert!(HValue::new(5) < HValue::INFINITE);
        assert_eq!(HValue::INFINITE.add(3), HValue::INFINITE);
        assert_eq!(HValue::new(2).add(3), HValue::new(5));
        assert_eq!(HValue::new(u64::MAX - 1).add(1), HValue::INFINITE);
        assert_eq!(format!("{}", HValue::INFINITE), "inf");
    }

    #[test]
    fn goal_count_examples() {
        let names: Vec<String> = (0..4).map(|i| format!("f{i}")).collect();
        let t = StripsTask::new(names.clone(), vec![], vec![], vec![FactId(1), FactId(2), FactId(3)])
            .unwrap();
        let s = t.state(&[FactId(1), FactId(2), FactId(3)]).unwrap();
        assert_eq!(goal_count(&t, &s), HValue::ZERO);
        let s = t.state(&[FactId(1)]).unwrap();
        assert_eq!(goal_count(&t, &s), HValue::new(2));
        let empty = StripsTask::new(names, vec![], vec![], vec![]).unwrap();
        assert_eq!(goal_count(&empty, empty.init()), HValue::ZERO);
    }
}
