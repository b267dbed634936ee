//! Rule-based state mappings from full tasks to partial tasks.
//!
//! Rules are first stated over fact names, which is how the partial
//! problem's initial state is derived, and then compiled to fact ids for
//! use during search.

use std::collections::BTreeSet;
use std::sync::Arc;

use parplan_core::blackbox::{MappingError, StateMapping};
use parplan_core::pddl::{ground, LiftedDomain, LiftedProblem};
use parplan_core::{BlackBoxState, FactId, PartialModel, StripsState, StripsTask};

use crate::{DomainError, DomainInstance};

/// A fact of a partial task written as `pred(a,b)`.
pub(crate) type Name = String;

pub(crate) fn atom(pred: &str, args: &[&str]) -> Name {
    format!("{pred}({})", args.join(","))
}

/// Splits `pred(a,b)` into its predicate and arguments.
pub(crate) fn split(name: &str) -> (&str, Vec<&str>) {
    let (pred, rest) = name.split_once('(').expect("fact names have an argument list");
    let inner = rest.strip_suffix(')').expect("fact names end with `)`");
    let args = if inner.is_empty() { Vec::new() } else { inner.split(',').collect() };
    (pred, args)
}

/// Emits `then` for each of `facts` that hold when every fact of `require`
/// holds, and `otherwise` when some does not.
pub(crate) struct Guard {
    pub require: Vec<FactId>,
    pub facts: Vec<(FactId, Name)>,
    pub otherwise: Vec<Name>,
}

/// Mapping rules over full-task facts. Facts covered by a guard must not
/// also have direct rules.
pub(crate) struct SigmaSpec {
    pub direct: Vec<Vec<Name>>,
    /// Per full fact: `(partner, out)` emitted when both hold.
    pub joins: Vec<Vec<(FactId, Name)>>,
    pub guards: Vec<Guard>,
}

impl SigmaSpec {
    pub fn new(full: &StripsTask) -> Self {
        SigmaSpec {
            direct: vec![Vec::new(); full.num_facts()],
            joins: vec![Vec::new(); full.num_facts()],
            guards: Vec::new(),
        }
    }

    /// Applies the rules to `s` at the name level.
    fn apply_names(&self, s: &StripsState) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        for f in s.iter() {
            out.extend(self.direct[f.index()].iter().cloned());
            for (partner, name) in &self.joins[f.index()] {
                if s.contains(*partner) {
                    out.insert(name.clone());
                }
            }
        }
        for g in &self.guards {
            if s.contains_all(&g.require) {
                out.extend(g.facts.iter().filter(|(f, _)| s.contains(*f)).map(|(_, n)| n.clone()));
            } else {
                out.extend(g.otherwise.iter().cloned());
            }
        }
        out
    }
}

/// Everything needed to build one partial model of one instance.
pub(crate) struct PartialSpec {
    pub domain: Arc<LiftedDomain>,
    pub objects: Vec<(String, &'static str)>,
    /// Initial facts the mapping does not produce: static relations.
    pub statics: Vec<Name>,
    pub goal: Vec<Name>,
    pub sigma: SigmaSpec,
}

struct GuardIds {
    require: Vec<FactId>,
    facts: Vec<(FactId, FactId)>,
    otherwise: Vec<FactId>,
}

/// Compiled mapping: decodes a full-task state and rewrites its facts.
pub(crate) struct RuleSigma {
    full_facts: usize,
    base: Vec<FactId>,
    direct: Vec<Vec<FactId>>,
    joins: Vec<Vec<(FactId, FactId)>>,
    guards: Vec<GuardIds>,
}

impl StateMapping for RuleSigma {
    fn map(&self, state: &BlackBoxState) -> Result<Vec<FactId>, MappingError> {
        let s = StripsState::from_bytes(self.full_facts, state.as_bytes())
            .map_err(|e| MappingError::Decode(e.to_string()))?;
        let mut out = self.base.clone();
        for f in s.iter() {
            out.extend_from_slice(&self.direct[f.index()]);
            for &(partner, o) in &self.joins[f.index()] {
                if s.contains(partner) {
                    out.push(o);
                }
            }
        }
        for g in &self.guards {
            if s.contains_all(&g.require) {
                out.extend(g.facts.iter().filter(|(f, _)| s.contains(*f)).map(|&(_, o)| o));
            } else {
                out.extend_from_slice(&g.otherwise);
            }
        }
        Ok(out)
    }
}

fn add_atom(
    b: &mut parplan_core::pddl::ProblemBuilder<'_>,
    name: &str,
    goal: bool,
) -> Result<(), DomainError> {
    let (pred, args) = split(name);
    if goal {
        b.goal(pred, &args)?;
    } else {
        b.init(pred, &args)?;
    }
    Ok(())
}

/// Grounds the partial problem, compiles the mapping and checks that the
/// partial task starts in the image of the full initial state.
pub(crate) fn assemble(inst: &DomainInstance, spec: PartialSpec) -> Result<PartialModel, DomainError> {
    let dynamic = spec.sigma.apply_names(inst.task.init());
    let mut b = LiftedProblem::builder(&spec.domain, &format!("{}-partial", inst.problem.name));
    for (name, ty) in &spec.objects {
        b.object(name, ty)?;
    }
    for n in spec.statics.iter().chain(dynamic.iter()) {
        add_atom(&mut b, n, false)?;
    }
    for n in &spec.goal {
        add_atom(&mut b, n, true)?;
    }
    let problem = b.build();
    let task = Arc::new(ground(&spec.domain, &problem));

    let id = |n: &Name| task.fact(n).ok_or_else(|| DomainError::MissingFact(n.clone()));
    let ids = |ns: &[Name]| ns.iter().map(id).collect::<Result<Vec<_>, _>>();
    let mut base = ids(&spec.statics)?;
    base.sort();
    base.dedup();
    let direct = spec.sigma.direct.iter().map(|v| ids(v)).collect::<Result<Vec<_>, _>>()?;
    let joins = spec
        .sigma
        .joins
        .iter()
        .map(|v| v.iter().map(|(p, n)| Ok((*p, id(n)?))).collect::<Result<Vec<_>, DomainError>>())
        .collect::<Result<Vec<_>, _>>()?;
    let guards = spec
        .sigma
        .guards
        .iter()
        .map(|g| {
            Ok(GuardIds {
                require: g.require.clone(),
                facts: g.facts.iter().map(|(f, n)| Ok((*f, id(n)?))).collect::<Result<_, DomainError>>()?,
                otherwise: ids(&g.otherwise)?,
            })
        })
        .collect::<Result<Vec<_>, DomainError>>()?;
    let sigma = RuleSigma { full_facts: inst.task.num_facts(), base, direct, joins, guards };
    Ok(PartialModel::new(task, Arc::new(sigma), &inst.blackbox())?)
}

/// Fact id of `pred(args)` in the full task.
pub(crate) fn full_fact(task: &StripsTask, pred: &str, args: &[&str]) -> FactId {
    let n = atom(pred, args);
    task.fact(&n).unwrap_or_else(|| panic!("full task lacks `{n}`"))
}
