//! Compilation of condition trees against a grounding, truth evaluation,
//! and the partial-success (Q) score.
//!
//! Quantifiers expand at compile time over [`candidate_instances`] of their
//! synset, so a compiled condition is tied to the scene's object universe.
//!
//! # Q score
//!
//! A [`GoalReport`] lists leaves and their outcome; `q_score` is the
//! satisfied fraction. Leaf selection:
//!
//! * atoms report their truth; a negated atom is one leaf reporting the
//!   literal's truth;
//! * `and`, `or`, `forall` and `forn` contribute all of their children's leaves;
//! * `exists` contributes only its best disjunct: the child with the most
//!   satisfied leaves, ties to the lowest index;
//! * `imply` contributes its consequent's leaves when the antecedent holds,
//!   otherwise a single satisfied leaf;
//! * negation over a compound is pushed inward (De Morgan, quantifier duality)
//!   before selecting leaves.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::parser::{Activity, Atom, Condition};
use crate::predicates::{eval_ground, EvalError, PredicateKind, PredicateParams};
use crate::scene::SceneState;
use crate::taxonomy::{candidate_instances, GroundScope, Taxonomy, TaxonomyError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LogicError {
    #[error("unbound term `{0}`")]
    UnboundTerm(String),
    #[error("unknown synset `{0}`")]
    UnknownSynset(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl From<TaxonomyError> for LogicError {
    fn from(e: TaxonomyError) -> Self {
        match e {
            TaxonomyError::UnknownSynset(s) => LogicError::UnknownSynset(s),
            other => LogicError::UnknownSynset(other.to_string()),
        }
    }
}

/// An atom whose arguments are concrete instance ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<String>,
    /// Rendering used in reports: declared terms where the atom named them,
    /// instance ids where a quantifier substituted them.
    pub expr: String,
}

impl GroundAtom {
    pub fn eval(&self, scene: &SceneState, params: &PredicateParams) -> Result<bool, EvalError> {
        let kind = PredicateKind::from_name(&self.predicate)
            .ok_or_else(|| EvalError::UnknownPredicate(self.predicate.clone()))?;
        let args: Vec<&str> = self.args.iter().map(String::as_str).collect();
        eval_ground(kind, &args, scene, params)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CompiledCondition {
    /// Quantifier over an empty domain.
    Const { value: bool, expr: String },
    Leaf(GroundAtom),
    Not(Box<CompiledCondition>),
    And(Vec<CompiledCondition>),
    Or(Vec<CompiledCondition>),
    Imply(Box<CompiledCondition>, Box<CompiledCondition>),
    /// Expanded `forall`; never empty.
    ForAll(Vec<CompiledCondition>),
    /// Expanded `exists`; never empty.
    Exists(Vec<CompiledCondition>),
    /// Expanded `forn`: at least `n` children hold.
    AtLeast { n: usize, children: Vec<CompiledCondition> },
}

impl CompiledCondition {
    /// Every leaf atom in document order (duplicates included).
    pub fn atoms(&self) -> Vec<&GroundAtom> {
        fn walk<'a>(c: &'a CompiledCondition, out: &mut Vec<&'a GroundAtom>) {
            match c {
                CompiledCondition::Const { .. } => {}
                CompiledCondition::Leaf(a) => out.push(a),
                CompiledCondition::Not(c) => walk(c, out),
                CompiledCondition::Imply(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                CompiledCondition::And(cs)
                | CompiledCondition::Or(cs)
                | CompiledCondition::ForAll(cs)
                | CompiledCondition::Exists(cs)
                | CompiledCondition::AtLeast { children: cs, .. } => cs.iter().for_each(|c| walk(c, out)),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, op: &str, cs: &[CompiledCondition]) -> fmt::Result {
    write!(f, "({op}")?;
    for c in cs {
        write!(f, " {c}")?;
    }
    write!(f, ")")
}

impl fmt::Display for CompiledCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompiledCondition::Const { expr, .. } => f.write_str(expr),
            CompiledCondition::Leaf(a) => f.write_str(&a.expr),
            CompiledCondition::Not(c) => write!(f, "(not {c})"),
            CompiledCondition::And(cs) => write_list(f, "and", cs),
            CompiledCondition::Or(cs) => write_list(f, "or", cs),
            CompiledCondition::ForAll(cs) => write_list(f, "forall", cs),
            CompiledCondition::Exists(cs) => write_list(f, "exists", cs),
            CompiledCondition::AtLeast { n, children } => write_list(f, &format!("atleast {n}"), children),
            CompiledCondition::Imply(a, c) => write!(f, "(imply {a} {c})"),
        }
    }
}

struct Compiler<'a> {
    scope: &'a GroundScope,
    taxonomy: &'a Taxonomy,
    scene: &'a SceneState,
}

impl Compiler<'_> {
    fn atom(&self, atom: &Atom, env: &[(String, String)]) -> Result<GroundAtom, LogicError> {
        let mut args = Vec::with_capacity(atom.args.len());
        let mut shown = Vec::with_capacity(atom.args.len());
        for a in &atom.args {
            if a.starts_with('?') {
                let (_, id) = env
                    .iter()
                    .rev()
                    .find(|(v, _)| v == a)
                    .ok_or_else(|| LogicError::UnboundTerm(a.clone()))?;
                args.push(id.clone());
                shown.push(id.clone());
            } else {
                let id = self.scope.get(a).ok_or_else(|| LogicError::UnboundTerm(a.clone()))?;
                args.push(id.to_string());
                shown.push(a.clone());
            }
        }
        let expr = format!("({} {})", atom.predicate, shown.join(" "));
        Ok(GroundAtom { predicate: atom.predicate.clone(), args, expr })
    }

    fn expand(
        &self,
        var: &str,
        synset: &str,
        body: &Condition,
        env: &mut Vec<(String, String)>,
    ) -> Result<Vec<CompiledCondition>, LogicError> {
        let domain = candidate_instances(self.taxonomy, synset, self.scene)?;
        let mut out = Vec::with_capacity(domain.len());
        for id in domain {
            env.push((var.to_string(), id));
            let c = self.compile(body, env);
            env.pop();
            out.push(c?);
        }
        Ok(out)
    }

    fn compile(&self, cond: &Condition, env: &mut Vec<(String, String)>) -> Result<CompiledCondition, LogicError> {
        Ok(match cond {
            Condition::Atom(a) => CompiledCondition::Leaf(self.atom(a, env)?),
            Condition::Not(c) => CompiledCondition::Not(Box::new(self.compile(c, env)?)),
            Condition::And(cs) => {
                CompiledCondition::And(cs.iter().map(|c| self.compile(c, env)).collect::<Result<_, _>>()?)
            }
            Condition::Or(cs) => {
                CompiledCondition::Or(cs.iter().map(|c| self.compile(c, env)).collect::<Result<_, _>>()?)
            }
            Condition::Imply(a, c) => {
                CompiledCondition::Imply(Box::new(self.compile(a, env)?), Box::new(self.compile(c, env)?))
            }
            Condition::ForAll { var, synset, body } => {
                let children = self.expand(var, synset, body, env)?;
                if children.is_empty() {
                    CompiledCondition::Const { value: true, expr: format!("(forall ({var} - {synset}) <empty>)") }
                } else {
                    CompiledCondition::ForAll(children)
                }
            }
            Condition::Exists { var, synset, body } => {
                let children = self.expand(var, synset, body, env)?;
                if children.is_empty() {
                    CompiledCondition::Const { value: false, expr: format!("(exists ({var} - {synset}) <empty>)") }
                } else {
                    CompiledCondition::Exists(children)
                }
            }
            Condition::ForN { n, var, synset, body } => {
                let children = self.expand(var, synset, body, env)?;
                if children.is_empty() {
                    CompiledCondition::Const { value: false, expr: format!("(forn ({n}) ({var} - {synset}) <empty>)") }
                } else {
                    CompiledCondition::AtLeast { n: *n as usize, children }
                }
            }
        })
    }
}

/// Grounds `condition` through `scope` and expands its quantifiers over the
/// scene's candidate instances.
pub fn compile(
    condition: &Condition,
    scope: &GroundScope,
    taxonomy: &Taxonomy,
    scene: &SceneState,
) -> Result<CompiledCondition, LogicError> {
    Compiler { scope, taxonomy, scene }.compile(condition, &mut Vec::new())
}

/// Truth of a compiled condition under an arbitrary atom valuation.
pub fn evaluate_with<F>(compiled: &CompiledCondition, atom: &F) -> Result<bool, EvalError>
where
    F: Fn(&GroundAtom) -> Result<bool, EvalError>,
{
    Ok(match compiled {
        CompiledCondition::Const { value, .. } => *value,
        CompiledCondition::Leaf(a) => atom(a)?,
        CompiledCondition::Not(c) => !evaluate_with(c, atom)?,
        CompiledCondition::And(cs) | CompiledCondition::ForAll(cs) => {
            for c in cs {
                if !evaluate_with(c, atom)? {
                    return Ok(false);
                }
            }
            true
        }
        CompiledCondition::Or(cs) | CompiledCondition::Exists(cs) => {
            for c in cs {
                if evaluate_with(c, atom)? {
                    return Ok(true);
                }
            }
            false
        }
        CompiledCondition::Imply(a, c) => !evaluate_with(a, atom)? || evaluate_with(c, atom)?,
        CompiledCondition::AtLeast { n, children } => {
            let mut count = 0;
            for c in children {
                if evaluate_with(c, atom)? {
                    count += 1;
                }
            }
            count >= *n
        }
    })
}

pub fn evaluate(compiled: &CompiledCondition, scene: &SceneState, p: &PredicateParams) -> Result<bool, EvalError> {
    evaluate_with(compiled, &|a: &GroundAtom| a.eval(scene, p))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafResult {
    pub expr: String,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalReport {
    pub satisfied: bool,
    pub q_score: f64,
    pub leaves: Vec<LeafResult>,
}

impl GoalReport {
    pub fn failed_leaves(&self) -> impl Iterator<Item = &LeafResult> {
        self.leaves.iter().filter(|l| !l.ok)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn satisfied_count(leaves: &[LeafResult]) -> usize {
    leaves.iter().filter(|l| l.ok).count()
}

fn best_disjunct<F>(children: &[CompiledCondition], negated: bool, atom: &F) -> Result<Vec<LeafResult>, EvalError>
where
    F: Fn(&GroundAtom) -> Result<bool, EvalError>,
{
    let mut best: Option<Vec<LeafResult>> = None;
    for c in children {
        let leaves = select_leaves(c, negated, atom)?;
        if best.as_ref().is_none_or(|b| satisfied_count(&leaves) > satisfied_count(b)) {
            best = Some(leaves);
        }
    }
    Ok(best.unwrap_or_default())
}

fn concat<F>(children: &[CompiledCondition], negated: bool, atom: &F) -> Result<Vec<LeafResult>, EvalError>
where
    F: Fn(&GroundAtom) -> Result<bool, EvalError>,
{
    let mut out = Vec::new();
    for c in children {
        out.extend(select_leaves(c, negated, atom)?);
    }
    Ok(out)
}

/// Leaves contributing to the Q score. `negated` tracks whether an odd
/// number of negations sits above `node`.
fn select_leaves<F>(node: &CompiledCondition, negated: bool, atom: &F) -> Result<Vec<LeafResult>, EvalError>
where
    F: Fn(&GroundAtom) -> Result<bool, EvalError>,
{
    use CompiledCondition as C;
    Ok(match (node, negated) {
        (C::Const { value, expr }, neg) => {
            let expr = if neg { format!("(not {expr})") } else { expr.clone() };
            vec![LeafResult { expr, ok: *value != neg }]
        }
        (C::Leaf(a), false) => vec![LeafResult { expr: a.expr.clone(), ok: atom(a)? }],
        (C::Leaf(a), true) => vec![LeafResult { expr: format!("(not {})", a.expr), ok: !atom(a)? }],
        (C::Not(c), neg) => select_leaves(c, !neg, atom)?,
        // conjunction-like under either polarity
        (C::And(cs), _) | (C::Or(cs), _) | (C::AtLeast { children: cs, .. }, _) => concat(cs, negated, atom)?,
        (C::ForAll(cs), false) | (C::Exists(cs), true) => concat(cs, negated, atom)?,
        // existential under either polarity
        (C::Exists(cs), false) | (C::ForAll(cs), true) => best_disjunct(cs, negated, atom)?,
        (C::Imply(a, c), false) => {
            if evaluate_with(a, atom)? {
                select_leaves(c, false, atom)?
            } else {
                vec![LeafResult { expr: format!("{node} [antecedent false]"), ok: true }]
            }
        }
        // not (a -> c) == a and not c
        (C::Imply(a, c), true) => {
            let mut out = select_leaves(a, false, atom)?;
            out.extend(select_leaves(c, true, atom)?);
            out
        }
    })
}

/// Goal report under an arbitrary atom valuation.
pub fn score_with<F>(compiled: &CompiledCondition, atom: &F) -> Result<GoalReport, EvalError>
where
    F: Fn(&GroundAtom) -> Result<bool, EvalError>,
{
    let satisfied = evaluate_with(compiled, atom)?;
    let leaves = select_leaves(compiled, false, atom)?;
    debug_assert!(!leaves.is_empty());
    let q_score = satisfied_count(&leaves) as f64 / leaves.len() as f64;
    Ok(GoalReport { satisfied, q_score, leaves })
}

pub fn score_goal(compiled: &CompiledCondition, scene: &SceneState, p: &PredicateParams) -> Result<GoalReport, EvalError> {
    score_with(compiled, &|a: &GroundAtom| a.eval(scene, p))
}

/// Compiles the init literals as a conjunction; `inroom` directives are
/// binding constraints and are not evaluated here.
pub fn compile_init(
    activity: &Activity,
    scope: &GroundScope,
    taxonomy: &Taxonomy,
    scene: &SceneState,
) -> Result<CompiledCondition, LogicError> {
    let parts: Vec<Condition> = activity
        .init
        .iter()
        .filter(|l| !l.atom.is_inroom())
        .map(|l| l.to_condition())
        .collect();
    if parts.is_empty() {
        return Ok(CompiledCondition::Const { value: true, expr: "(init: room directives only)".into() });
    }
    compile(&Condition::And(parts), scope, taxonomy, scene)
}

/// Scores the init conditions of `activity` on `scene`.
pub fn check_init(
    activity: &Activity,
    scope: &GroundScope,
    taxonomy: &Taxonomy,
    scene: &SceneState,
    p: &PredicateParams,
) -> Result<GoalReport, LogicError> {
    let compiled = compile_init(activity, scope, taxonomy, scene)?;
    Ok(score_goal(&compiled, scene, p)?)
}
