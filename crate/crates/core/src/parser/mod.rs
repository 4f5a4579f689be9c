//! BDDL problem files: lexing, parsing into a validated [`Activity`],
//! pretty-printing back to text, and kinematic-only classification.
//!
//! Accepted grammar:
//!
//! ```text
//! (define (problem NAME)
//!     (:domain NAME)
//!     (:objects TERM+ - SYNSET ...)
//!     (:init LITERAL+)
//!     (:goal CONDITION))
//! ```
//!
//! Conditions are atoms plus `and`, `or`, `not`, `imply`, `forall`,
//! `exists` and `forn`. Any other compound form is rejected with a
//! semantic error naming it.

mod ast;
mod classify;
mod lexer;
mod write;

use std::collections::HashMap;

pub use ast::{Activity, Atom, Condition, Literal, ObjectDecl, INROOM};
pub use classify::{classify_kinematic, default_supported, KinematicClassification};
pub use lexer::{tokenize, Token, TokenKind};
pub use write::serialize_activity;

use crate::predicates::PredicateKind;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{column}: illegal character")]
    IllegalCharacter { line: usize, column: usize },
    #[error("{line}:{column}: syntax error, expected {expected}")]
    Syntax { line: usize, column: usize, expected: String },
    #[error("{line}:{column}: {message} `{term}`")]
    Semantic { line: usize, column: usize, term: String, message: String },
}

impl ParseError {
    pub fn position(&self) -> (usize, usize) {
        match *self {
            ParseError::IllegalCharacter { line, column }
            | ParseError::Syntax { line, column, .. }
            | ParseError::Semantic { line, column, .. } => (line, column),
        }
    }

    fn syntax(at: (usize, usize), expected: impl Into<String>) -> Self {
        ParseError::Syntax { line: at.0, column: at.1, expected: expected.into() }
    }

    fn semantic(tok: &Token, term: impl Into<String>, message: impl Into<String>) -> Self {
        ParseError::Semantic {
            line: tok.line,
            column: tok.column,
            term: term.into(),
            message: message.into(),
        }
    }
}

enum SExpr {
    Leaf(Token),
    List { open: Token, items: Vec<SExpr> },
}

impl SExpr {
    fn token(&self) -> &Token {
        match self {
            SExpr::Leaf(t) => t,
            SExpr::List { open, .. } => open,
        }
    }

    fn pos(&self) -> (usize, usize) {
        let t = self.token();
        (t.line, t.column)
    }
}

/// Position just past the last character of `source`.
fn end_position(source: &str) -> (usize, usize) {
    let line = source.matches('\n').count() + 1;
    let last = source.rsplit('\n').next().unwrap_or("");
    (line, last.chars().count() + 1)
}

fn read_forms(tokens: Vec<Token>, eof: (usize, usize)) -> Result<Vec<SExpr>, ParseError> {
    let mut stack: Vec<(Token, Vec<SExpr>)> = Vec::new();
    let mut top = Vec::new();
    for tok in tokens {
        match tok.kind {
            TokenKind::Open => stack.push((tok, Vec::new())),
            TokenKind::Close => {
                let (open, items) = stack
                    .pop()
                    .ok_or_else(|| ParseError::syntax((tok.line, tok.column), "'(' before ')'"))?;
                let list = SExpr::List { open, items };
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(list),
                    None => top.push(list),
                }
            }
            _ => match stack.last_mut() {
                Some((_, parent)) => parent.push(SExpr::Leaf(tok)),
                None => return Err(ParseError::syntax((tok.line, tok.column), "'('")),
            },
        }
    }
    if !stack.is_empty() {
        return Err(ParseError::syntax(eof, "')'"));
    }
    Ok(top)
}

fn list<'a>(e: &'a SExpr, expected: &str) -> Result<(&'a Token, &'a [SExpr]), ParseError> {
    match e {
        SExpr::List { open, items } => Ok((open, items)),
        SExpr::Leaf(t) => Err(ParseError::syntax((t.line, t.column), expected)),
    }
}

fn leaf<'a>(e: &'a SExpr, kind: TokenKind, expected: &str) -> Result<&'a Token, ParseError> {
    match e {
        SExpr::Leaf(t) if t.kind == kind => Ok(t),
        other => Err(ParseError::syntax(other.pos(), expected)),
    }
}

/// Checks that a list has exactly `n` items; errors point at the first
/// surplus item or at the list's opening paren.
fn arity(open: &Token, items: &[SExpr], n: usize, what: &str) -> Result<(), ParseError> {
    if items.len() == n {
        Ok(())
    } else if items.len() > n {
        Err(ParseError::syntax(items[n].pos(), format!("')' closing {what}")))
    } else {
        Err(ParseError::syntax((open.line, open.column), format!("{n} elements in {what}")))
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Init,
    Goal,
}

struct Checker {
    declared: HashMap<String, String>,
}

impl Checker {
    fn atom(&self, head: &Token, args: &[SExpr], vars: &[String], section: Section) -> Result<Atom, ParseError> {
        let predicate = head.folded();
        if args.is_empty() {
            return Err(ParseError::semantic(head, predicate, "atom without arguments"));
        }
        let fixed_arity = predicate == INROOM || PredicateKind::from_name(&predicate).is_some();
        if fixed_arity && args.len() != 2 {
            return Err(ParseError::semantic(head, predicate, "predicate takes exactly 2 arguments"));
        }
        if predicate == INROOM && section == Section::Goal {
            return Err(ParseError::semantic(head, predicate, "room directive outside :init"));
        }
        let mut out = Vec::with_capacity(args.len());
        for (i, arg) in args.iter().enumerate() {
            let tok = match arg {
                SExpr::Leaf(t) => t,
                SExpr::List { open, .. } => {
                    return Err(ParseError::semantic(open, predicate, "unsupported construct"));
                }
            };
            match tok.kind {
                TokenKind::Variable => {
                    if !vars.iter().any(|v| v == &tok.text) {
                        // `?term` outside any quantifier refers to a declared object
                        let term = &tok.text[1..];
                        if self.declared.contains_key(term) {
                            out.push(term.to_string());
                            continue;
                        }
                        return Err(ParseError::semantic(tok, &tok.text, "unbound variable"));
                    }
                }
                TokenKind::Symbol => {
                    // the second inroom argument names a room type, not a term
                    let room_type = predicate == INROOM && i == 1;
                    if !room_type && !self.declared.contains_key(&tok.text) {
                        return Err(ParseError::semantic(tok, &tok.text, "undeclared term"));
                    }
                }
                _ => return Err(ParseError::syntax((tok.line, tok.column), "term or variable")),
            }
            out.push(tok.text.clone());
        }
        Ok(Atom { predicate, args: out })
    }

    fn quantified_param<'a>(&self, e: &'a SExpr) -> Result<(String, String), ParseError> {
        let (open, items) = list(e, "'(' opening a variable declaration")?;
        arity(open, items, 3, "variable declaration")?;
        let var = leaf(&items[0], TokenKind::Variable, "variable")?;
        let dash = leaf(&items[1], TokenKind::Symbol, "'-'")?;
        if dash.text != "-" {
            return Err(ParseError::syntax((dash.line, dash.column), "'-'"));
        }
        let synset = leaf(&items[2], TokenKind::Symbol, "synset")?;
        Ok((var.text.clone(), synset.text.clone()))
    }

    fn condition(&self, e: &SExpr, vars: &mut Vec<String>, section: Section) -> Result<Condition, ParseError> {
        let (open, items) = list(e, "'(' opening a condition")?;
        let Some(first) = items.first() else {
            return Err(ParseError::syntax((open.line, open.column), "predicate or connective"));
        };
        let head = leaf(first, TokenKind::Symbol, "predicate or connective")?;
        let rest = &items[1..];
        let name = head.folded();
        let cond = match name.as_str() {
            "and" | "or" => {
                if rest.is_empty() {
                    return Err(ParseError::semantic(head, name, "connective needs at least one operand"));
                }
                let children = rest
                    .iter()
                    .map(|c| self.condition(c, vars, section))
                    .collect::<Result<Vec<_>, _>>()?;
                if name == "and" {
                    Condition::And(children)
                } else {
                    Condition::Or(children)
                }
            }
            "not" => {
                arity(open, items, 2, "not")?;
                Condition::Not(Box::new(self.condition(&rest[0], vars, section)?))
            }
            "imply" => {
                arity(open, items, 3, "imply")?;
                let a = self.condition(&rest[0], vars, section)?;
                let c = self.condition(&rest[1], vars, section)?;
                Condition::Imply(Box::new(a), Box::new(c))
            }
            "forall" | "exists" => {
                arity(open, items, 3, &name)?;
                let (var, synset) = self.quantified_param(&rest[0])?;
                vars.push(var.clone());
                let body = self.condition(&rest[1], vars, section);
                vars.pop();
                let body = Box::new(body?);
                if name == "forall" {
                    Condition::ForAll { var, synset, body }
                } else {
                    Condition::Exists { var, synset, body }
                }
            }
            "forn" => {
                arity(open, items, 4, "forn")?;
                let (nopen, nitems) = list(&rest[0], "'(' opening the forn count")?;
                arity(nopen, nitems, 1, "forn count")?;
                let ntok = leaf(&nitems[0], TokenKind::Symbol, "positive integer")?;
                let n: u32 = ntok
                    .text
                    .parse()
                    .ok()
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| ParseError::syntax((ntok.line, ntok.column), "positive integer"))?;
                let (var, synset) = self.quantified_param(&rest[1])?;
                vars.push(var.clone());
                let body = self.condition(&rest[2], vars, section);
                vars.pop();
                Condition::ForN { n, var, synset, body: Box::new(body?) }
            }
            _ => {
                if rest.iter().any(|c| matches!(c, SExpr::List { .. })) {
                    return Err(ParseError::semantic(head, name, "unsupported construct"));
                }
                Condition::Atom(self.atom(head, rest, vars, section)?)
            }
        };
        Ok(cond)
    }

    fn literal(&self, e: &SExpr) -> Result<Literal, ParseError> {
        let (open, items) = list(e, "'(' opening an init literal")?;
        let Some(first) = items.first() else {
            return Err(ParseError::syntax((open.line, open.column), "predicate"));
        };
        let head = leaf(first, TokenKind::Symbol, "predicate")?;
        if head.folded() == "not" {
            arity(open, items, 2, "not")?;
            let (iopen, inner) = list(&items[1], "'(' opening a negated atom")?;
            let Some(ifirst) = inner.first() else {
                return Err(ParseError::syntax((iopen.line, iopen.column), "predicate"));
            };
            let ihead = leaf(ifirst, TokenKind::Symbol, "predicate")?;
            let atom = self.plain_atom(ihead, &inner[1..])?;
            if atom.is_inroom() {
                return Err(ParseError::semantic(ihead, INROOM, "negated room directive"));
            }
            Ok(Literal::negative(atom))
        } else {
            Ok(Literal::positive(self.plain_atom(head, &items[1..])?))
        }
    }

    fn plain_atom(&self, head: &Token, args: &[SExpr]) -> Result<Atom, ParseError> {
        let name = head.folded();
        if matches!(name.as_str(), "and" | "or" | "not" | "imply" | "forall" | "exists" | "forn") {
            return Err(ParseError::semantic(head, name, "init entries must be atoms or negated atoms"));
        }
        if args.iter().any(|c| matches!(c, SExpr::List { .. })) {
            return Err(ParseError::semantic(head, name, "unsupported construct"));
        }
        self.atom(head, args, &[], Section::Init)
    }
}

fn parse_objects(items: &[SExpr]) -> Result<(Vec<ObjectDecl>, HashMap<String, String>), ParseError> {
    let mut decls = Vec::new();
    let mut declared = HashMap::new();
    let mut pending: Vec<&Token> = Vec::new();
    let mut iter = items.iter();
    while let Some(e) = iter.next() {
        let tok = leaf(e, TokenKind::Symbol, "object term")?;
        if tok.text == "-" {
            if pending.is_empty() {
                return Err(ParseError::semantic(tok, "-", "type marker without terms"));
            }
            let synset = match iter.next() {
                Some(s) => leaf(s, TokenKind::Symbol, "synset")?,
                None => return Err(ParseError::syntax((tok.line, tok.column), "synset after '-'")),
            };
            if synset.text == "-" {
                return Err(ParseError::syntax((synset.line, synset.column), "synset"));
            }
            for term in pending.drain(..) {
                if declared.insert(term.text.clone(), synset.text.clone()).is_some() {
                    return Err(ParseError::semantic(term, &term.text, "duplicate declaration"));
                }
                decls.push(ObjectDecl { term: term.text.clone(), synset: synset.text.clone() });
            }
        } else {
            pending.push(tok);
        }
    }
    if let Some(t) = pending.first() {
        return Err(ParseError::semantic(t, &t.text, "term without a synset"));
    }
    Ok((decls, declared))
}

/// Parses and validates one BDDL problem.
pub fn parse_activity(source: &str) -> Result<Activity, ParseError> {
    let eof = end_position(source);
    let forms = read_forms(tokenize(source)?, eof)?;
    let mut forms = forms.into_iter();
    let root = forms.next().ok_or_else(|| ParseError::syntax(eof, "'(define'"))?;
    if let Some(extra) = forms.next() {
        return Err(ParseError::syntax(extra.pos(), "end of input"));
    }

    let (open, items) = list(&root, "'(define'")?;
    let define = items
        .first()
        .ok_or_else(|| ParseError::syntax((open.line, open.column), "'define'"))?;
    let define = leaf(define, TokenKind::Symbol, "'define'")?;
    if define.folded() != "define" {
        return Err(ParseError::syntax((define.line, define.column), "'define'"));
    }

    let header = items
        .get(1)
        .ok_or_else(|| ParseError::syntax((open.line, open.column), "'(problem NAME)'"))?;
    let (hopen, hitems) = list(header, "'(problem NAME)'")?;
    arity(hopen, hitems, 2, "problem header")?;
    let ptok = leaf(&hitems[0], TokenKind::Symbol, "'problem'")?;
    if ptok.folded() != "problem" {
        return Err(ParseError::syntax((ptok.line, ptok.column), "'problem'"));
    }
    let problem_name = leaf(&hitems[1], TokenKind::Symbol, "problem name")?.text.clone();

    let mut sections: HashMap<String, (&Token, &[SExpr])> = HashMap::new();
    for sec in &items[2..] {
        let (sopen, sitems) = list(sec, "'(' opening a section")?;
        let key = sitems
            .first()
            .ok_or_else(|| ParseError::syntax((sopen.line, sopen.column), "section keyword"))?;
        let key = leaf(key, TokenKind::Keyword, "section keyword")?;
        let name = key.folded();
        if !matches!(name.as_str(), ":domain" | ":objects" | ":init" | ":goal") {
            return Err(ParseError::semantic(key, name, "unknown section"));
        }
        if sections.insert(name.clone(), (key, &sitems[1..])).is_some() {
            return Err(ParseError::semantic(key, name, "repeated section"));
        }
    }
    let close_pos = eof;
    let missing = |name: &str| ParseError::Semantic {
        line: close_pos.0,
        column: close_pos.1,
        term: name.to_string(),
        message: "missing section".to_string(),
    };

    let (dkey, ditems) = *sections.get(":domain").ok_or_else(|| missing(":domain"))?;
    let domain_name = match ditems {
        [one] => leaf(one, TokenKind::Symbol, "domain name")?.text.clone(),
        _ => return Err(ParseError::syntax((dkey.line, dkey.column), "single domain name")),
    };

    let (_, oitems) = *sections.get(":objects").ok_or_else(|| missing(":objects"))?;
    let (objects, declared) = parse_objects(oitems)?;
    let checker = Checker { declared };

    let (ikey, iitems) = *sections.get(":init").ok_or_else(|| missing(":init"))?;
    if iitems.is_empty() {
        return Err(ParseError::semantic(ikey, ":init", "empty init list"));
    }
    let init = iitems.iter().map(|e| checker.literal(e)).collect::<Result<Vec<_>, _>>()?;

    let (gkey, gitems) = *sections.get(":goal").ok_or_else(|| missing(":goal"))?;
    let goal = match gitems {
        [one] => checker.condition(one, &mut Vec::new(), Section::Goal)?,
        [] => return Err(ParseError::syntax((gkey.line, gkey.column), "goal condition")),
        [_, extra, ..] => return Err(ParseError::syntax(extra.pos(), "')' closing :goal")),
    };

    Ok(Activity { problem_name, domain_name, objects, init, goal })
}
