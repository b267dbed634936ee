//! A typed-STRIPS subset of PDDL: `:strips` and `:typing` requirements,
//! conjunctive positive preconditions and goals, add/delete effects.
//!
//! Anything beyond that subset is reported as
//! [`ErrorKind::Unsupported`] with the offending feature named.

mod ground;
mod parse;
mod sexpr;
mod write;

use std::collections::HashMap;
use std::fmt;

pub use ground::ground;
pub use parse::{parse_domain, parse_problem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Syntax,
    Unsupported,
    Type,
    DomainMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind:?} error at {pos}: {message}")]
pub struct PddlError {
    pub kind: ErrorKind,
    pub message: String,
    pub pos: Pos,
}

impl PddlError {
    pub(crate) fn syntax(pos: Pos, msg: impl Into<String>) -> Self {
        PddlError { kind: ErrorKind::Syntax, message: msg.into(), pos }
    }

    pub(crate) fn unsupported(pos: Pos, feature: &str) -> Self {
        PddlError {
            kind: ErrorKind::Unsupported,
            message: format!("unsupported feature `{feature}`"),
            pos,
        }
    }

    pub(crate) fn type_error(pos: Pos, msg: impl Into<String>) -> Self {
        PddlError { kind: ErrorKind::Type, message: msg.into(), pos }
    }
}

pub type TypeId = usize;

/// The root type `object` always has id 0.
pub const OBJECT: TypeId = 0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub parent: Option<TypeId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub name: String,
    pub params: Vec<TypeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    /// Index into the schema's parameter list.
    Var(usize),
    /// Index into the domain's constants (which are also the first objects
    /// of every problem).
    Const(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub predicate: usize,
    pub args: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<(String, TypeId)>,
    pub pre: Vec<Atom>,
    pub add: Vec<Atom>,
    pub del: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedDomain {
    pub name: String,
    pub types: Vec<TypeDecl>,
    pub constants: Vec<(String, TypeId)>,
    pub predicates: Vec<Predicate>,
    pub actions: Vec<ActionSchema>,
}

impl LiftedDomain {
    pub fn type_id(&self, name: &str) -> Option<TypeId> {
        self.types.iter().position(|t| t.name == name)
    }

    pub fn predicate_id(&self, name: &str) -> Option<usize> {
        self.predicates.iter().position(|p| p.name == name)
    }

    pub fn is_subtype(&self, mut t: TypeId, ancestor: TypeId) -> bool {
        loop {
            if t == ancestor {
                return true;
            }
            match self.types[t].parent {
                Some(p) => t = p,
                None => return false,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub predicate: usize,
    /// Indices into the problem's object list.
    pub args: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedProblem {
    pub name: String,
    pub domain_name: String,
    /// Domain constants first, then declared objects, in declaration order.
    pub objects: Vec<(String, TypeId)>,
    pub init: Vec<GroundAtom>,
    pub goal: Vec<GroundAtom>,
}

impl LiftedProblem {
    pub fn builder<'d>(domain: &'d LiftedDomain, name: &str) -> ProblemBuilder<'d> {
        ProblemBuilder::new(domain, name)
    }

    pub fn object_id(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|(n, _)| n == name)
    }

    pub fn to_pddl(&self, domain: &LiftedDomain) -> String {
        write::problem_to_pddl(self, domain)
    }
}

/// Incrementally builds a well-typed problem; used by the parser and by
/// instance generators.
#[derive(Debug, Clone)]
pub struct ProblemBuilder<'d> {
    domain: &'d LiftedDomain,
    problem: LiftedProblem,
    index: HashMap<String, usize>,
}

impl<'d> ProblemBuilder<'d> {
    pub fn new(domain: &'d LiftedDomain, name: &str) -> Self {
        let mut index = HashMap::new();
        for (i, (c, _)) in domain.constants.iter().enumerate() {
            index.insert(c.clone(), i);
        }
        ProblemBuilder {
            domain,
            problem: LiftedProblem {
                name: name.to_string(),
                domain_name: domain.name.clone(),
                objects: domain.constants.clone(),
                init: Vec::new(),
                goal: Vec::new(),
            },
            index,
        }
    }

    pub fn domain(&self) -> &'d LiftedDomain {
        self.domain
    }

    pub fn object(&mut self, name: &str, type_name: &str) -> Result<&mut Self, PddlError> {
        self.object_at(name, type_name, Pos::default())
    }

    pub(crate) fn object_at(
        &mut self,
        name: &str,
        type_name: &str,
        pos: Pos,
    ) -> Result<&mut Self, PddlError> {
        let t = self
            .domain
            .type_id(type_name)
            .ok_or_else(|| PddlError::type_error(pos, format!("undeclared type `{type_name}`")))?;
        if self.index.contains_key(name) {
            return Err(PddlError::type_error(pos, format!("object `{name}` declared twice")));
        }
        self.index.insert(name.to_string(), self.problem.objects.len());
        self.problem.objects.push((name.to_string(), t));
        Ok(self)
    }

    pub(crate) fn atom_at(
        &self,
        predicate: &str,
        args: &[&str],
        pos: Pos,
    ) -> Result<GroundAtom, PddlError> {
        let pid = self.domain.predicate_id(predicate).ok_or_else(|| {
            PddlError::type_error(pos, format!("undeclared predicate `{predicate}`"))
        })?;
        let decl = &self.domain.predicates[pid];
        if decl.params.len() != args.len() {
            return Err(PddlError::type_error(
                pos,
                format!(
                    "predicate `{predicate}` expects {} arguments, got {}",
                    decl.params.len(),
                    args.len()
                ),
            ));
        }
        let mut ids = Vec::with_capacity(args.len());
        for (arg, &want) in args.iter().zip(&decl.params) {
            let &o = self
                .index
                .get(*arg)
                .ok_or_else(|| PddlError::type_error(pos, format!("unknown object `{arg}`")))?;
            let have = self.problem.objects[o].1;
            if !self.domain.is_subtype(have, want) {
                return Err(PddlError::type_error(
                    pos,
                    format!(
                        "object `{arg}` of type `{}` used where `{}` is expected",
                        self.domain.types[have].name, self.domain.types[want].name
                    ),
                ));
            }
            ids.push(o);
        }
        Ok(GroundAtom { predicate: pid, args: ids })
    }

    pub fn init(&mut self, predicate: &str, args: &[&str]) -> Result<&mut Self, PddlError> {
        let a = self.atom_at(predicate, args, Pos::default())?;
        self.problem.init.push(a);
        Ok(self)
    }

    pub fn goal(&mut self, predicate: &str, args: &[&str]) -> Result<&mut Self, PddlError> {
        let a = self.atom_at(predicate, args, Pos::default())?;
        self.problem.goal.push(a);
        Ok(self)
    }

    pub(crate) fn push_init(&mut self, a: GroundAtom) {
        self.problem.init.push(a);
    }

    pub(crate) fn push_goal(&mut self, a: GroundAtom) {
        self.problem.goal.push(a);
    }

    pub fn build(self) -> LiftedProblem {
        self.problem
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    pub const LOGISTICS_DOMAIN: &str = r#"
(define (domain logistics)
  (:requirements :strips :typing)
  (:types truck airplane - vehicle
          package vehicle - physobj
          airport location - place
          city place physobj - object)
  (:predicates (in-city ?loc - place ?city - city)
               (at ?obj - physobj ?loc - place)
               (in ?pkg - package ?veh - vehicle))
  (:action load-truck
    :parameters (?pkg - package ?truck - truck ?loc - place)
    :precondition (and (at ?truck ?loc) (at ?pkg ?loc))
    :effect (and (not (at ?pkg ?loc)) (in ?pkg ?truck)))
  (:action load-airplane
    :parameters (?pkg - package ?airplane - airplane ?loc - place)
    :precondition (and (at ?pkg ?loc) (at ?airplane ?loc))
    :effect (and (not (at ?pkg ?loc)) (in ?pkg ?airplane)))
  (:action unload-truck
    :parameters (?pkg - package ?truck - truck ?loc - place)
    :precondition (and (at ?truck ?loc) (in ?pkg ?truck))
    :effect (and (not (in ?pkg ?truck)) (at ?pkg ?loc)))
  (:action unload-airplane
    :parameters (?pkg - package ?airplane - airplane ?loc - place)
    :precondition (and (in ?pkg ?airplane) (at ?airplane ?loc))
    :effect (and (not (in ?pkg ?airplane)) (at ?pkg ?loc)))
  (:action drive-truck
    :parameters (?truck - truck ?loc-from - place ?loc-to - place ?city - city)
    :precondition (and (at ?truck ?loc-from) (in-city ?loc-from ?city) (in-city ?loc-to ?city))
    :effect (and (not (at ?truck ?loc-from)) (at ?truck ?loc-to)))
  (:action fly-airplane
    :parameters (?airplane - airplane ?loc-from - airport ?loc-to - airport)
    :precondition (at ?airplane ?loc-from)
    :effect (and (not (at ?airplane ?loc-from)) (at ?airplane ?loc-to))))
"#;

    pub const LOGISTICS_ONE_PACKAGE: &str = r#"
(define (problem log-1)
  (:domain logistics)
  (:objects c1 - city l1 - location t1 - truck p1 - package)
  (:init (in-city l1 c1) (at t1 l1) (at p1 l1))
  (:goal (and (in p1 t1))))
"#;
}
