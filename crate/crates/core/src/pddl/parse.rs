use std::collections::HashMap;

use super::sexpr::{self, SExpr};
use super::{
    ActionSchema, Atom, ErrorKind, LiftedDomain, LiftedProblem, PddlError, Pos, Predicate,
    ProblemBuilder, Term, TypeDecl, TypeId, OBJECT,
};

const SUPPORTED_REQUIREMENTS: &[&str] = &[":strips", ":typing"];
const UNSUPPORTED_CONNECTIVES: &[&str] =
    &["not", "or", "imply", "exists", "forall", "when", "increase", "decrease", "="];

fn expect_list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr], PddlError> {
    e.as_list()
        .ok_or_else(|| PddlError::syntax(e.pos(), format!("expected a list for {what}")))
}

fn expect_atom<'a>(e: &'a SExpr, what: &str) -> Result<&'a str, PddlError> {
    e.as_atom()
        .ok_or_else(|| PddlError::syntax(e.pos(), format!("expected a symbol for {what}")))
}

/// `(define (<kind> <name>) ...)` -> (name, remaining sections)
fn header<'a>(root: &'a SExpr, kind: &str) -> Result<(&'a str, &'a [SExpr]), PddlError> {
    let items = expect_list(root, "define")?;
    if items.first().and_then(SExpr::as_atom) != Some("define") {
        return Err(PddlError::syntax(root.pos(), "expected `(define ...)`"));
    }
    let head = items
        .get(1)
        .ok_or_else(|| PddlError::syntax(root.pos(), format!("missing `({kind} <name>)`")))?;
    let h = expect_list(head, kind)?;
    match h {
        [k, n] if k.as_atom() == Some(kind) => Ok((expect_atom(n, "name")?, &items[2..])),
        _ => Err(PddlError::syntax(head.pos(), format!("expected `({kind} <name>)`"))),
    }
}

/// Parses `a b - t c - u d` into (name, type name, pos) triples; untyped
/// entries get `object`.
fn typed_list(items: &[SExpr]) -> Result<Vec<(String, String, Pos)>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Pos)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let tok = expect_atom(&items[i], "typed list entry")?;
        if tok == "-" {
            let t = items
                .get(i + 1)
                .ok_or_else(|| PddlError::syntax(items[i].pos(), "missing type after `-`"))?;
            if t.head() == Some("either") {
                return Err(PddlError::unsupported(t.pos(), "either"));
            }
            let t = expect_atom(t, "type name")?;
            for (n, p) in pending.drain(..) {
                out.push((n, t.to_string(), p));
            }
            i += 2;
        } else {
            pending.push((tok.to_string(), items[i].pos()));
            i += 1;
        }
    }
    for (n, p) in pending {
        out.push((n, "object".to_string(), p));
    }
    Ok(out)
}

fn requirements(items: &[SExpr]) -> Result<(), PddlError> {
    for r in items {
        let name = expect_atom(r, "requirement")?;
        if !SUPPORTED_REQUIREMENTS.contains(&name) {
            return Err(PddlError::unsupported(r.pos(), name));
        }
    }
    Ok(())
}

/// Flattens a conjunction of atoms; `(and)` and a missing formula are empty.
fn conjunction(e: &SExpr) -> Result<Vec<&SExpr>, PddlError> {
    let items = expect_list(e, "formula")?;
    match items.first().and_then(SExpr::as_atom) {
        Some("and") => {
            let mut out = Vec::new();
            for sub in &items[1..] {
                out.extend(conjunction(sub)?);
            }
            Ok(out)
        }
        Some(k) if UNSUPPORTED_CONNECTIVES.contains(&k) => Err(PddlError::unsupported(
            e.pos(),
            if k == "not" { "negative-preconditions" } else { k },
        )),
        None if items.is_empty() => Ok(Vec::new()),
        _ => Ok(vec![e]),
    }
}

struct DomainParser {
    domain: LiftedDomain,
}

impl DomainParser {
    fn declare_type(&mut self, name: &str) -> TypeId {
        match self.domain.type_id(name) {
            Some(t) => t,
            None => {
                self.domain.types.push(TypeDecl { name: name.to_string(), parent: Some(OBJECT) });
                self.domain.types.len() - 1
            }
        }
    }

    fn lookup_type(&self, name: &str, pos: Pos) -> Result<TypeId, PddlError> {
        self.domain
            .type_id(name)
            .ok_or_else(|| PddlError::type_error(pos, format!("undeclared type `{name}`")))
    }

    fn types(&mut self, items: &[SExpr]) -> Result<(), PddlError> {
        for (name, parent, pos) in typed_list(items)? {
            if name == "object" {
                continue;
            }
            let p = self.declare_type(&parent);
            let t = self.declare_type(&name);
            if self.domain.is_subtype(p, t) {
                return Err(PddlError::type_error(pos, format!("cyclic type `{name}`")));
            }
            self.domain.types[t].parent = Some(p);
        }
        Ok(())
    }

    fn atom(
        &self,
        e: &SExpr,
        params: &[(String, TypeId)],
    ) -> Result<Atom, PddlError> {
        let items = expect_list(e, "atom")?;
        let name = items
            .first()
            .ok_or_else(|| PddlError::syntax(e.pos(), "empty atom"))
            .and_then(|h| expect_atom(h, "predicate"))?;
        let pid = self.domain.predicate_id(name).ok_or_else(|| {
            PddlError::type_error(e.pos(), format!("undeclared predicate `{name}`"))
        })?;
        let decl = &self.domain.predicates[pid];
        let args = &items[1..];
        if args.len() != decl.params.len() {
            return Err(PddlError::type_error(
                e.pos(),
                format!("predicate `{name}` expects {} arguments, got {}", decl.params.len(), args.len()),
            ));
        }
        let mut terms = Vec::with_capacity(args.len());
        for (a, &want) in args.iter().zip(&decl.params) {
            let tok = expect_atom(a, "argument")?;
            let (term, have) = if tok.starts_with('?') {
                let i = params.iter().position(|(n, _)| n == tok).ok_or_else(|| {
                    PddlError::type_error(a.pos(), format!("unbound variable `{tok}`"))
                })?;
                (Term::Var(i), params[i].1)
            } else {
                let i = self.domain.constants.iter().position(|(n, _)| n == tok).ok_or_else(
                    || PddlError::type_error(a.pos(), format!("unknown constant `{tok}`")),
                )?;
                (Term::Const(i), self.domain.constants[i].1)
            };
            if !self.domain.is_subtype(have, want) {
                return Err(PddlError::type_error(
                    a.pos(),
                    format!(
                        "`{tok}` has type `{}` but `{name}` expects `{}`",
                        self.domain.types[have].name, self.domain.types[want].name
                    ),
                ));
            }
            terms.push(term);
        }
        Ok(Atom { predicate: pid, args: terms })
    }

    fn action(&self, e: &SExpr) -> Result<ActionSchema, PddlError> {
        let items = expect_list(e, "action")?;
        let name = items
            .get(1)
            .ok_or_else(|| PddlError::syntax(e.pos(), "missing action name"))
            .and_then(|n| expect_atom(n, "action name"))?;
        let mut params = Vec::new();
        let mut pre = Vec::new();
        let mut add = Vec::new();
        let mut del = Vec::new();
        let mut i = 2;
        while i < items.len() {
            let key = expect_atom(&items[i], "action section")?;
            let val = items
                .get(i + 1)
                .ok_or_else(|| PddlError::syntax(items[i].pos(), format!("missing value for `{key}`")))?;
            match key {
                ":parameters" => {
                    for (n, t, pos) in typed_list(expect_list(val, "parameters")?)? {
                        if !n.starts_with('?') {
                            return Err(PddlError::syntax(pos, format!("parameter `{n}` must start with `?`")));
                        }
                        params.push((n, self.lookup_type(&t, pos)?));
                    }
                }
                ":precondition" => {
                    for a in conjunction(val)? {
                        pre.push(self.atom(a, &params)?);
                    }
                }
                ":effect" => {
                    for eff in effect_list(val)? {
                        match eff.head() {
                            Some("not") => {
                                let inner = expect_list(eff, "negated effect")?;
                                let [_, atom] = inner else {
                                    return Err(PddlError::syntax(eff.pos(), "malformed `not`"));
                                };
                                del.push(self.atom(atom, &params)?);
                            }
                            Some(k) if UNSUPPORTED_CONNECTIVES.contains(&k) => {
                                let feature = match k {
                                    "when" => "conditional-effects",
                                    "increase" | "decrease" => "numeric-fluents",
                                    other => other,
                                };
                                return Err(PddlError::unsupported(eff.pos(), feature));
                            }
                            _ => add.push(self.atom(eff, &params)?),
                        }
                    }
                }
                other => return Err(PddlError::unsupported(items[i].pos(), other)),
            }
            i += 2;
        }
        Ok(ActionSchema { name: name.to_string(), params, pre, add, del })
    }
}

fn effect_list(e: &SExpr) -> Result<Vec<&SExpr>, PddlError> {
    let items = expect_list(e, "effect")?;
    match items.first().and_then(SExpr::as_atom) {
        Some("and") => {
            let mut out = Vec::new();
            for sub in &items[1..] {
                out.extend(effect_list(sub)?);
            }
            Ok(out)
        }
        None if items.is_empty() => Ok(Vec::new()),
        _ => Ok(vec![e]),
    }
}

pub fn parse_domain(text: &str) -> Result<LiftedDomain, PddlError> {
    let root = sexpr::parse(text)?;
    let (name, sections) = header(&root, "domain")?;
    let mut p = DomainParser {
        domain: LiftedDomain {
            name: name.to_string(),
            types: vec![TypeDecl { name: "object".into(), parent: None }],
            constants: Vec::new(),
            predicates: Vec::new(),
            actions: Vec::new(),
        },
    };
    let mut actions = Vec::new();
    for sec in sections {
        let items = expect_list(sec, "domain section")?;
        let key = items
            .first()
            .ok_or_else(|| PddlError::syntax(sec.pos(), "empty section"))
            .and_then(|k| expect_atom(k, "section keyword"))?;
        match key {
            ":requirements" => requirements(&items[1..])?,
            ":types" => p.types(&items[1..])?,
            ":constants" => {
                for (n, t, pos) in typed_list(&items[1..])? {
                    let t = p.lookup_type(&t, pos)?;
                    p.domain.constants.push((n, t));
                }
            }
            ":predicates" => {
                for decl in &items[1..] {
                    let d = expect_list(decl, "predicate declaration")?;
                    let pname = d
                        .first()
                        .ok_or_else(|| PddlError::syntax(decl.pos(), "empty predicate"))
                        .and_then(|h| expect_atom(h, "predicate name"))?;
                    let mut params = Vec::new();
                    for (_, t, pos) in typed_list(&d[1..])? {
                        params.push(p.lookup_type(&t, pos)?);
                    }
                    if p.domain.predicate_id(pname).is_some() {
                        return Err(PddlError::type_error(
                            decl.pos(),
                            format!("predicate `{pname}` declared twice"),
                        ));
                    }
                    p.domain.predicates.push(Predicate { name: pname.to_string(), params });
                }
            }
            // Parsed after predicates regardless of their textual order.
            ":action" => actions.push(sec),
            other => return Err(PddlError::unsupported(sec.pos(), other)),
        }
    }
    for a in actions {
        let schema = p.action(a)?;
        p.domain.actions.push(schema);
    }
    Ok(p.domain)
}

pub fn parse_problem(text: &str, domain: &LiftedDomain) -> Result<LiftedProblem, PddlError> {
    let root = sexpr::parse(text)?;
    let (name, sections) = header(&root, "problem")?;
    let mut b = ProblemBuilder::new(domain, name);
    let mut init: Vec<&SExpr> = Vec::new();
    let mut goal: Option<&SExpr> = None;
    let mut objects: HashMap<String, Pos> = HashMap::new();
    for sec in sections {
        let items = expect_list(sec, "problem section")?;
        let key = items
            .first()
            .ok_or_else(|| PddlError::syntax(sec.pos(), "empty section"))
            .and_then(|k| expect_atom(k, "section keyword"))?;
        match key {
            ":domain" => {
                let dn = items
                    .get(1)
                    .ok_or_else(|| PddlError::syntax(sec.pos(), "missing domain name"))
                    .and_then(|d| expect_atom(d, "domain name"))?;
                if dn != domain.name {
                    return Err(PddlError {
                        kind: ErrorKind::DomainMismatch,
                        message: format!("problem is for domain `{dn}`, not `{}`", domain.name),
                        pos: sec.pos(),
                    });
                }
            }
            ":requirements" => requirements(&items[1..])?,
            ":objects" => {
                for (n, t, pos) in typed_list(&items[1..])? {
                    b.object_at(&n, &t, pos)?;
                    objects.insert(n, pos);
                }
            }
            ":init" => init.extend(&items[1..]),
            ":goal" => {
                let g = items
                    .get(1)
                    .ok_or_else(|| PddlError::syntax(sec.pos(), "missing goal formula"))?;
                goal = Some(g);
            }
            other => return Err(PddlError::unsupported(sec.pos(), other)),
        }
    }
    let ground = |b: &ProblemBuilder, e: &SExpr| {
        let items = expect_list(e, "atom")?;
        let pred = items
            .first()
            .ok_or_else(|| PddlError::syntax(e.pos(), "empty atom"))
            .and_then(|h| expect_atom(h, "predicate"))?;
        if pred == "=" {
            return Err(PddlError::unsupported(e.pos(), "equality"));
        }
        let args = items[1..]
            .iter()
            .map(|a| expect_atom(a, "object"))
            .collect::<Result<Vec<_>, _>>()?;
        b.atom_at(pred, &args, e.pos())
    };
    for e in init {
        if e.head() == Some("not") || e.head() == Some("=") {
            return Err(PddlError::unsupported(e.pos(), e.head().unwrap_or_default()));
        }
        let a = ground(&b, e)?;
        b.push_init(a);
    }
    let goal = goal.ok_or_else(|| PddlError::syntax(root.pos(), "missing `:goal`"))?;
    for e in conjunction(goal)? {
        let a = ground(&b, e)?;
        b.push_goal(a);
    }
    Ok(b.build())
}
