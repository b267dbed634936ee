use super::{PddlError, Pos};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum SExpr {
    Atom(String, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Atom(_, p) | SExpr::List(_, p) => *p,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(s, _) => Some(s),
            SExpr::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(v, _) => Some(v),
            SExpr::Atom(..) => None,
        }
    }

    /// Head keyword of a list, if the first element is an atom.
    pub fn head(&self) -> Option<&str> {
        self.as_list()?.first()?.as_atom()
    }
}

/// Parses exactly one top-level s-expression. Symbols are lower-cased.
pub(crate) fn parse(text: &str) -> Result<SExpr, PddlError> {
    let mut stack: Vec<(Vec<SExpr>, Pos)> = Vec::new();
    let mut done: Option<SExpr> = None;
    let mut line = 1u32;
    let mut col = 1u32;
    let mut chars = text.chars().peekable();
    let mut sym = String::new();
    let mut sym_pos = Pos { line, col };

    macro_rules! flush {
        () => {
            if !sym.is_empty() {
                let atom = SExpr::Atom(std::mem::take(&mut sym).to_lowercase(), sym_pos);
                match stack.last_mut() {
                    Some((items, _)) => items.push(atom),
                    None => {
                        return Err(PddlError::syntax(sym_pos, "expected `(` at top level"));
                    }
                }
            }
        };
    }

    while let Some(c) = chars.next() {
        let here = Pos { line, col };
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
        match c {
            ';' => {
                flush!();
                while let Some(&n) = chars.peek() {
                    if n == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '(' => {
                flush!();
                if done.is_some() {
                    return Err(PddlError::syntax(here, "trailing input after expression"));
                }
                stack.push((Vec::new(), here));
            }
            ')' => {
                flush!();
                let (items, open) = stack
                    .pop()
                    .ok_or_else(|| PddlError::syntax(here, "unbalanced `)`"))?;
                let list = SExpr::List(items, open);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => done = Some(list),
                }
            }
            c if c.is_whitespace() => flush!(),
            c => {
                if done.is_some() && stack.is_empty() {
                    return Err(PddlError::syntax(here, "trailing input after expression"));
                }
                if sym.is_empty() {
                    sym_pos = here;
                }
                sym.push(c);
            }
        }
    }
    if !sym.is_empty() {
        return Err(PddlError::syntax(sym_pos, "expected `(` at top level"));
    }
    if let Some((_, open)) = stack.last() {
        return Err(PddlError::syntax(*open, "unclosed `(`"));
    }
    done.ok_or_else(|| PddlError::syntax(Pos { line, col }, "empty input"))
}
