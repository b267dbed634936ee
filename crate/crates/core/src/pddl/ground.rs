use std::collections::HashSet;

use super::{Atom, GroundAtom, LiftedDomain, LiftedProblem, Term};
use crate::strips::{ActionSpec, FactId, StripsTask};

/// Mixed-radix layout of all type-consistent groundings of each predicate.
struct FactLayout {
    offset: Vec<usize>,
    /// `slot[p][i][o]`: position of object `o` in the extension of the
    /// i-th parameter type of predicate `p`.
    slot: Vec<Vec<Vec<Option<u32>>>>,
    stride: Vec<Vec<usize>>,
}

impl FactLayout {
    fn fact(&self, pred: usize, args: &[usize]) -> FactId {
        let mut idx = self.offset[pred];
        for (i, &o) in args.iter().enumerate() {
            let s = self.slot[pred][i][o].expect("argument outside its parameter type");
            idx += s as usize * self.stride[pred][i];
        }
        FactId::from(idx)
    }
}

fn extensions(domain: &LiftedDomain, problem: &LiftedProblem) -> Vec<Vec<usize>> {
    (0..domain.types.len())
        .map(|t| {
            problem
                .objects
                .iter()
                .enumerate()
                .filter(|(_, (_, ot))| domain.is_subtype(*ot, t))
                .map(|(i, _)| i)
                .collect()
        })
        .collect()
}

fn cartesian(exts: &[&Vec<usize>], mut visit: impl FnMut(&[usize])) {
    if exts.iter().any(|e| e.is_empty()) {
        return;
    }
    let mut pos = vec![0usize; exts.len()];
    let mut cur: Vec<usize> = exts.iter().map(|e| e[0]).collect();
    loop {
        visit(&cur);
        // Last argument varies fastest.
        let mut i = exts.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            pos[i] += 1;
            if pos[i] < exts[i].len() {
                cur[i] = exts[i][pos[i]];
                break;
            }
            pos[i] = 0;
            cur[i] = exts[i][0];
        }
    }
}

/// Grounds a well-typed problem.
///
/// Facts are every type-consistent grounding of every predicate, predicates
/// in declaration order and arguments in object declaration order (first
/// argument outermost). Actions are enumerated the same way per schema and
/// dropped when a precondition fact is statically false: absent from the
/// initial state and added by no action.
pub fn ground(domain: &LiftedDomain, problem: &LiftedProblem) -> StripsTask {
    let ext = extensions(domain, problem);
    let nobj = problem.objects.len();

    let mut names = Vec::new();
    let mut layout = FactLayout { offset: Vec::new(), slot: Vec::new(), stride: Vec::new() };
    for p in &domain.predicates {
        layout.offset.push(names.len());
        let exts: Vec<&Vec<usize>> = p.params.iter().map(|&t| &ext[t]).collect();
        let mut slots = Vec::new();
        for e in &exts {
            let mut s = vec![None; nobj];
            for (k, &o) in e.iter().enumerate() {
                s[o] = Some(k as u32);
            }
            slots.push(s);
        }
        let mut stride = vec![1usize; exts.len()];
        for i in (0..exts.len().saturating_sub(1)).rev() {
            stride[i] = stride[i + 1] * exts[i + 1].len();
        }
        layout.slot.push(slots);
        layout.stride.push(stride);
        if exts.is_empty() {
            names.push(format!("{}()", p.name));
        } else {
            cartesian(&exts, |args| {
                let a: Vec<&str> = args.iter().map(|&o| problem.objects[o].0.as_str()).collect();
                names.push(format!("{}({})", p.name, a.join(",")));
            });
        }
    }

    let atom_fact = |a: &GroundAtom| layout.fact(a.predicate, &a.args);
    let init: Vec<FactId> = problem.init.iter().map(atom_fact).collect();
    let goal: Vec<FactId> = problem.goal.iter().map(atom_fact).collect();
    let init_set: HashSet<FactId> = init.iter().copied().collect();

    let mut changes = vec![false; domain.predicates.len()];
    for s in &domain.actions {
        for a in s.add.iter().chain(&s.del) {
            changes[a.predicate] = true;
        }
    }

    let mut actions = Vec::new();
    for schema in &domain.actions {
        ground_schema(problem, &ext, &layout, &changes, &init_set, schema, &mut actions);
    }

    let added: HashSet<FactId> = actions.iter().flat_map(|a| a.add.iter().copied()).collect();
    actions.retain(|a| a.pre.iter().all(|f| init_set.contains(f) || added.contains(f)));

    StripsTask::new(names, actions, init, goal).expect("grounding yields a consistent task")
}

#[allow(clippy::too_many_arguments)]
fn ground_schema(
    problem: &LiftedProblem,
    ext: &[Vec<usize>],
    layout: &FactLayout,
    changes: &[bool],
    init: &HashSet<FactId>,
    schema: &super::ActionSchema,
    out: &mut Vec<ActionSpec>,
) {
    let k = schema.params.len();
    let last_var = |a: &Atom| {
        a.args
            .iter()
            .filter_map(|t| match t {
                Term::Var(i) => Some(*i),
                Term::Const(_) => None,
            })
            .max()
    };
    // Static preconditions are checked as soon as their last variable is bound.
    let mut checks: Vec<Vec<&Atom>> = vec![Vec::new(); k + 1];
    for a in &schema.pre {
        if !changes[a.predicate] {
            checks[last_var(a).map_or(0, |v| v + 1)].push(a);
        }
    }
    let resolve = |a: &Atom, binding: &[usize]| {
        let args: Vec<usize> = a
            .args
            .iter()
            .map(|t| match *t {
                Term::Var(i) => binding[i],
                Term::Const(c) => c,
            })
            .collect();
        layout.fact(a.predicate, &args)
    };
    let holds = |binding: &[usize], depth: usize| {
        checks[depth].iter().all(|a| init.contains(&resolve(a, binding)))
    };

    if !holds(&[], 0) {
        return;
    }
    let mut binding = vec![0usize; k];
    let mut cursor = vec![0usize; k];
    let mut depth = 0usize;
    if k == 0 {
        out.push(ActionSpec {
            name: format!("{}()", schema.name),
            pre: schema.pre.iter().map(|a| resolve(a, &binding)).collect(),
            add: schema.add.iter().map(|a| resolve(a, &binding)).collect(),
            del: schema.del.iter().map(|a| resolve(a, &binding)).collect(),
        });
        return;
    }
    loop {
        let e = &ext[schema.params[depth].1];
        if cursor[depth] >= e.len() {
            if depth == 0 {
                return;
            }
            cursor[depth] = 0;
            depth -= 1;
            cursor[depth] += 1;
            continue;
        }
        binding[depth] = e[cursor[depth]];
        if !holds(&binding, depth + 1) {
            cursor[depth] += 1;
            continue;
        }
        if depth + 1 < k {
            depth += 1;
            continue;
        }
        let args: Vec<&str> = binding.iter().map(|&o| problem.objects[o].0.as_str()).collect();
        out.push(ActionSpec {
            name: format!("{}({})", schema.name, args.join(",")),
            pre: schema.pre.iter().map(|a| resolve(a, &binding)).collect(),
            add: schema.add.iter().map(|a| resolve(a, &binding)).collect(),
            del: schema.del.iter().map(|a| resolve(a, &binding)).collect(),
        });
        cursor[depth] += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::fixtures::*;
    use crate::pddl::{parse_domain, parse_problem};

    #[test]
    fn one_package_logistics() {
        let d = parse_domain(LOGISTICS_DOMAIN).unwrap();
        let p = parse_problem(LOGISTICS_ONE_PACKAGE, &d).unwrap();
        let t = ground(&d, &p);
        // in-city: 1 place x 1 city; at: 2 physobj x 1 place; in: 1 pkg x 1 vehicle
        assert_eq!(t.num_facts(), 4);
        assert_eq!(t.fact_names()[0], "in-city(l1,c1)");
        assert!(t.actions().iter().all(|a| !a.name.contains("airplane")));
        let names: Vec<_> = t.actions().iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["load-truck(p1,t1,l1)", "unload-truck(p1,t1,l1)", "drive-truck(t1,l1,l1,c1)"]);
        assert_eq!(t.validate_named_plan(&["load-truck(p1,t1,l1)"]), Ok(1));
    }

    #[test]
    fn unary_predicate_counts_objects_of_its_type() {
        let d = parse_domain(
            "(define (domain k) (:requirements :strips :typing) (:types key cell)
              (:predicates (holding ?k - key) (at ?k - key ?c - cell))
              (:action drop :parameters (?k - key ?c - cell)
                 :precondition (holding ?k) :effect (and (at ?k ?c) (not (holding ?k)))))",
        )
        .unwrap();
        let p = parse_problem(
            "(define (problem p) (:domain k) (:objects a b - key x - cell)
              (:init (holding a)) (:goal (at a x)))",
            &d,
        )
        .unwrap();
        let t = ground(&d, &p);
        let holding = t.fact_names().iter().filter(|n| n.starts_with("holding(")).count();
        assert_eq!(holding, 2);
        // drop(b, x) needs holding(b), which is statically false.
        assert_eq!(t.num_actions(), 1);
        assert_eq!(t.actions()[0].name, "drop(a,x)");
    }

    #[test]
    fn grounding_is_deterministic() {
        let d = parse_domain(LOGISTICS_DOMAIN).unwrap();
        let p = parse_problem(LOGISTICS_ONE_PACKAGE, &d).unwrap();
        assert_eq!(ground(&d, &p), ground(&d, &p));
    }
}
