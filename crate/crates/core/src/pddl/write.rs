use std::fmt::Write;

use super::{GroundAtom, LiftedDomain, LiftedProblem};

fn atom(out: &mut String, a: &GroundAtom, domain: &LiftedDomain, p: &LiftedProblem) {
    out.push('(');
    out.push_str(&domain.predicates[a.predicate].name);
    for &o in &a.args {
        out.push(' ');
        out.push_str(&p.objects[o].0);
    }
    out.push(')');
}

pub(super) fn problem_to_pddl(p: &LiftedProblem, domain: &LiftedDomain) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem {})", p.name);
    let _ = writeln!(out, "  (:domain {})", p.domain_name);
    out.push_str("  (:objects");
    for (name, t) in &p.objects[domain.constants.len()..] {
        let _ = write!(out, "\n    {} - {}", name, domain.types[*t].name);
    }
    out.push_str(")\n  (:init");
    for a in &p.init {
        out.push_str("\n    ");
        atom(&mut out, a, domain, p);
    }
    out.push_str(")\n  (:goal (and");
    for a in &p.goal {
        out.push_str("\n    ");
        atom(&mut out, a, domain, p);
    }
    out.push_str(")))\n");
    out
}
