use std::sync::Arc;

use super::{EvalError, Evaluator, HValue};
use crate::blackbox::BlackBoxState;

/// Orders a sibling set by preference.
pub trait Ranker: Send + Sync {
    fn name(&self) -> &str;

    /// A permutation of `0..successors.len()`, most preferred first. Must be
    /// deterministic and stable under equal scores.
    fn order(&self, successors: &[BlackBoxState]) -> Result<Vec<usize>, EvalError>;
}

/// Prefers successors with lower heuristic value; equal values keep
/// generation order.
pub struct HeuristicRanker {
    name: String,
    evaluator: Arc<dyn Evaluator>,
}

pub fn heuristic_ranker(evaluator: Arc<dyn Evaluator>) -> HeuristicRanker {
    HeuristicRanker { name: format!("rank({})", evaluator.name()), evaluator }
}

impl HeuristicRanker {
    pub fn order_by_values(values: &[HValue]) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..values.len()).collect();
        idx.sort_by_key(|&i| values[i]);
        idx
    }
}

impl Ranker for HeuristicRanker {
    fn name(&self) -> &str {
        &self.name
    }

    fn order(&self, successors: &[BlackBoxState]) -> Result<Vec<usize>, EvalError> {
        let values = successors
            .iter()
            .map(|s| self.evaluator.evaluate(s))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::order_by_values(&values))
    }
}

/// Path-dependent node values: the root is 0 and a child is worth its
/// parent's value plus its rank (from 0) among all siblings generated with
/// it.
#[derive(Clone)]
pub struct DiscrepancyEvaluator {
    name: String,
    ranker: Arc<dyn Ranker>,
}

impl DiscrepancyEvaluator {
    pub fn new(ranker: Arc<dyn Ranker>) -> Self {
        DiscrepancyEvaluator { name: format!("disc({})", ranker.name()), ranker }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn root_value(&self) -> HValue {
        HValue::ZERO
    }

    pub fn child_values(
        &self,
        parent: HValue,
        siblings: &[BlackBoxState],
    ) -> Result<Vec<HValue>, EvalError> {
        let order = self.ranker.order(siblings)?;
        debug_assert_eq!(order.len(), siblings.len());
        let mut values = vec![HValue::INFINITE; siblings.len()];
        for (rank, &i) in order.iter().enumerate() {
            values[i] = parent.add(rank as u64);
        }
        Ok(values)
    }
}
