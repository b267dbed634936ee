//! Black-box tasks and partial models.
//!
//! Search code only ever sees [`BlackBoxTask`]: an initial state, a
//! successor function and a goal test over opaque [`BlackBoxState`]s. A
//! [`PartialModel`] attaches a STRIPS task that describes part of the
//! dynamics together with a mapping `sigma` from black-box states to its fact
//! sets, which is what lets STRIPS heuristics guide black-box search.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::heuristics::{EvalError, Evaluator, HValue, StripsHeuristic};
use crate::strips::{FactId, StripsState, StripsTask};

/// Action label reported by a black-box successor function.
pub type Label = Arc<str>;

/// An opaque state: equality and hashing are defined over its canonical
/// byte encoding and nothing else is visible.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BlackBoxState(Box<[u8]>);

impl BlackBoxState {
    pub fn from_bytes(bytes: impl Into<Box<[u8]>>) -> Self {
        BlackBoxState(bytes.into())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// 64-bit FNV-1a hash of the encoding; stable across runs and platforms.
    pub fn stable_hash(&self) -> u64 {
        self.0.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
            (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
        })
    }
}

impl fmt::Debug for BlackBoxState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BlackBoxState({:016x})", self.stable_hash())
    }
}

pub trait BlackBoxTask: Send + Sync {
    fn initial_state(&self) -> BlackBoxState;

    /// Deterministic: equal states yield equal lists in equal order.
    fn successors(&self, state: &BlackBoxState) -> Vec<(Label, BlackBoxState)>;

    fn is_goal(&self, state: &BlackBoxState) -> bool;
}

/// A STRIPS task exposed only through the black-box interface.
#[derive(Debug, Clone)]
pub struct StripsBlackBox {
    task: Arc<StripsTask>,
    labels: Vec<Label>,
}

pub fn wrap_strips_as_blackbox(task: Arc<StripsTask>) -> StripsBlackBox {
    let labels = task.actions().iter().map(|a| Label::from(a.name.as_str())).collect();
    StripsBlackBox { task, labels }
}

impl StripsBlackBox {
    pub fn task(&self) -> &Arc<StripsTask> {
        &self.task
    }

    pub fn encode(&self, s: &StripsState) -> BlackBoxState {
        BlackBoxState::from_bytes(s.to_bytes())
    }

    pub fn decode(&self, s: &BlackBoxState) -> StripsState {
        StripsState::from_bytes(self.task.num_facts(), s.as_bytes())
            .expect("state was produced by this task")
    }
}

impl BlackBoxTask for StripsBlackBox {
    fn initial_state(&self) -> BlackBoxState {
        self.encode(self.task.init())
    }

    fn successors(&self, state: &BlackBoxState) -> Vec<(Label, BlackBoxState)> {
        let s = self.decode(state);
        self.task
            .successors(&s)
            .into_iter()
            .map(|(a, next)| (self.labels[a.index()].clone(), self.encode(&next)))
            .collect()
    }

    fn is_goal(&self, state: &BlackBoxState) -> bool {
        self.task.is_goal(&self.decode(state))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MappingError {
    #[error("state mapping emitted fact {fact}, but the partial task has {num_facts} facts")]
    FactOutOfRange { fact: usize, num_facts: usize },
    #[error("state cannot be decoded: {0}")]
    Decode(String),
    #[error("sigma(init) does not match the partial task's initial state")]
    InitMismatch,
}

/// `sigma`: black-box states to fact sets of a partial task.
pub trait StateMapping: Send + Sync {
    fn map(&self, state: &BlackBoxState) -> Result<Vec<FactId>, MappingError>;
}

impl<F> StateMapping for F
where
    F: Fn(&BlackBoxState) -> Result<Vec<FactId>, MappingError> + Send + Sync,
{
    fn map(&self, state: &BlackBoxState) -> Result<Vec<FactId>, MappingError> {
        self(state)
    }
}

/// Decodes the state encoding of [`StripsBlackBox`]; the mapping of a full
/// model.
#[derive(Debug, Clone, Copy)]
pub struct IdentityMapping {
    pub num_facts: usize,
}

impl StateMapping for IdentityMapping {
    fn map(&self, state: &BlackBoxState) -> Result<Vec<FactId>, MappingError> {
        let s = StripsState::from_bytes(self.num_facts, state.as_bytes())
            .map_err(|e| MappingError::Decode(e.to_string()))?;
        Ok(s.iter().collect())
    }
}

/// Applies a mapping and checks its output against the partial task.
pub fn map_state(
    sigma: &dyn StateMapping,
    num_facts: usize,
    state: &BlackBoxState,
) -> Result<StripsState, MappingError> {
    let facts = sigma.map(state)?;
    StripsState::from_facts(num_facts, facts).map_err(|_| {
        let bad = sigma
            .map(state)
            .ok()
            .and_then(|v| v.into_iter().find(|f| f.index() >= num_facts))
            .map_or(num_facts, |f| f.index());
        MappingError::FactOutOfRange { fact: bad, num_facts }
    })
}

#[derive(Clone)]
pub struct PartialModel {
    pub task: Arc<StripsTask>,
    pub sigma: Arc<dyn StateMapping>,
}

impl fmt::Debug for PartialModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PartialModel")
            .field("facts", &self.task.num_facts())
            .field("actions", &self.task.num_actions())
            .finish()
    }
}

impl PartialModel {
    /// Checks that the partial task starts in `sigma(init)`.
    pub fn new(
        task: Arc<StripsTask>,
        sigma: Arc<dyn StateMapping>,
        blackbox: &dyn BlackBoxTask,
    ) -> Result<Self, MappingError> {
        let init = map_state(sigma.as_ref(), task.num_facts(), &blackbox.initial_state())?;
        if &init != task.init() {
            return Err(MappingError::InitMismatch);
        }
        Ok(PartialModel { task, sigma })
    }

    /// The full model of a wrapped STRIPS task: identity mapping.
    pub fn identity(task: Arc<StripsTask>) -> Self {
        let sigma = Arc::new(IdentityMapping { num_facts: task.num_facts() });
        PartialModel { task, sigma }
    }

    pub fn map(&self, state: &BlackBoxState) -> Result<StripsState, MappingError> {
        map_state(self.sigma.as_ref(), self.task.num_facts(), state)
    }
}

/// `h(s) = h_D(sigma(s))`.
pub struct LiftedHeuristic {
    name: String,
    heuristic: Arc<dyn StripsHeuristic>,
    model: PartialModel,
}

pub fn lift_heuristic(heuristic: Arc<dyn StripsHeuristic>, model: &PartialModel) -> LiftedHeuristic {
    LiftedHeuristic { name: heuristic.name().to_string(), heuristic, model: model.clone() }
}

impl LiftedHeuristic {
    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

impl Evaluator for LiftedHeuristic {
    fn name(&self) -> &str {
        &self.name
    }

    fn evaluate(&self, state: &BlackBoxState) -> Result<HValue, EvalError> {
        let s = self.model.map(state)?;
        Ok(self.heuristic.evaluate(&s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heuristics::FfHeuristic;
    use crate::strips::tests::chain_task;

    #[test]
    fn wrapper_exposes_strips_dynamics() {
        let t = Arc::new(chain_task(3));
        let bb = wrap_strips_as_blackbox(t.clone());
        let succ = bb.successors(&bb.initial_state());
        assert_eq!(succ.len(), 1);
        assert_eq!(&*succ[0].0, "a0");
        assert!(!bb.is_goal(&bb.initial_state()));

        let trivial = StripsTask::new(vec!["g".into()], vec![], vec![FactId(0)], vec![FactId(0)]).unwrap();
        let bb = wrap_strips_as_blackbox(Arc::new(trivial));
        assert!(bb.is_goal(&bb.initial_state()));
    }

    #[test]
    fn identity_lift_equals_direct_ff() {
        let t = Arc::new(chain_task(3));
        let bb = wrap_strips_as_blackbox(t.clone());
        let ff = Arc::new(FfHeuristic::new(t.clone()));
        let lifted = lift_heuristic(ff.clone(), &PartialModel::identity(t.clone()));
        let mut s = bb.initial_state();
        loop {
            let direct = ff.evaluate(&bb.decode(&s));
            assert_eq!(lifted.evaluate(&s).unwrap(), direct);
            if bb.is_goal(&s) {
                break;
            }
            s = bb.successors(&s).pop().unwrap().1;
        }
    }

    #[test]
    fn sigma_out_of_range_is_an_error() {
        let t = Arc::new(chain_task(2));
        let bb = wrap_strips_as_blackbox(t.clone());
        let sigma: Arc<dyn StateMapping> =
            Arc::new(|_: &BlackBoxState| Ok(vec![FactId(0), FactId(17)]));
        let pm = PartialModel { task: t.clone(), sigma };
        let lifted = lift_heuristic(Arc::new(FfHeuristic::new(t)), &pm);
        let err = lifted.evaluate(&bb.initial_state()).unwrap_err();
        assert_eq!(
            err,
            EvalError::Mapping(MappingError::FactOutOfRange { fact: 17, num_facts: 3 })
        );
    }

    #[test]
    fn partial_model_requires_matching_init() {
        let t = Arc::new(chain_task(2));
        let bb = wrap_strips_as_blackbox(t.clone());
        let sigma: Arc<dyn StateMapping> = Arc::new(|_: &BlackBoxState| Ok(vec![FactId(1)]));
        assert_eq!(
            PartialModel::new(t.clone(), sigma, &bb).unwrap_err(),
            MappingError::InitMismatch
        );
        let id: Arc<dyn StateMapping> = Arc::new(IdentityMapping { num_facts: 3 });
        assert!(PartialModel::new(t, id, &bb).is_ok());
    }
}
