use std::collections::BTreeSet;
use std::fmt;

/// Predicate application. `predicate` is lower-cased; arguments are
/// declared terms, quantifier variables (`?x`), or for `inroom` a room type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Atom {
            predicate: predicate.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_inroom(&self) -> bool {
        self.predicate == INROOM
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

pub const INROOM: &str = "inroom";

/// An init entry: an atom or a single negation of one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
}

impl Literal {
    pub fn positive(atom: Atom) -> Self {
        Literal { atom, negated: false }
    }

    pub fn negative(atom: Atom) -> Self {
        Literal { atom, negated: true }
    }

    pub fn to_condition(&self) -> Condition {
        let a = Condition::Atom(self.atom.clone());
        if self.negated {
            Condition::Not(Box::new(a))
        } else {
            a
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "(not {})", self.atom)
        } else {
            write!(f, "{}", self.atom)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    Atom(Atom),
    Not(Box<Condition>),
    And(Vec<Condition>),
    Or(Vec<Condition>),
    Imply(Box<Condition>, Box<Condition>),
    ForAll { var: String, synset: String, body: Box<Condition> },
    Exists { var: String, synset: String, body: Box<Condition> },
    ForN { n: u32, var: String, synset: String, body: Box<Condition> },
}

impl Condition {
    /// Visits every atom in the tree in document order.
    pub fn for_each_atom<'a>(&'a self, f: &mut impl FnMut(&'a Atom)) {
        match self {
            Condition::Atom(a) => f(a),
            Condition::Not(c) => c.for_each_atom(f),
            Condition::And(cs) | Condition::Or(cs) => cs.iter().for_each(|c| c.for_each_atom(f)),
            Condition::Imply(a, c) => {
                a.for_each_atom(f);
                c.for_each_atom(f);
            }
            Condition::ForAll { body, .. } | Condition::Exists { body, .. } | Condition::ForN { body, .. } => {
                body.for_each_atom(f)
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Condition::Atom(_) => 0,
            Condition::Not(c) => 1 + c.depth(),
            Condition::And(cs) | Condition::Or(cs) => 1 + cs.iter().map(Condition::depth).max().unwrap_or(0),
            Condition::Imply(a, c) => 1 + a.depth().max(c.depth()),
            Condition::ForAll { body, .. } | Condition::Exists { body, .. } | Condition::ForN { body, .. } => {
                1 + body.depth()
            }
        }
    }
}

/// `term - synset` declaration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectDecl {
    pub term: String,
    pub synset: String,
}

/// A parsed and validated BDDL problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Activity {
    pub problem_name: String,
    pub domain_name: String,
    pub objects: Vec<ObjectDecl>,
    pub init: Vec<Literal>,
    pub goal: Condition,
}

impl Activity {
    pub fn synset_of(&self, term: &str) -> Option<&str> {
        self.objects.iter().find(|o| o.term == term).map(|o| o.synset.as_str())
    }

    /// Every predicate name used in init and goal.
    pub fn predicates(&self) -> BTreeSet<&str> {
        let mut out: BTreeSet<&str> = self.init.iter().map(|l| l.atom.predicate.as_str()).collect();
        self.goal.for_each_atom(&mut |a| {
            out.insert(a.predicate.as_str());
        });
        out
    }
}
