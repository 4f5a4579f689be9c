mod common;

use std::collections::{BTreeMap, BTreeSet};

use bddl_core::logic::{compile, evaluate_with, score_goal, score_with, CompiledCondition, GroundAtom};
use bddl_core::parser::Condition;
use bddl_core::predicates::{EvalError, PredicateParams};
use bddl_core::sampler::{sample_instance, SamplerParams, SamplingContext};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KINEMATIC: [&str; 6] = [
    "collect_misplaced_items",
    "packing_toys",
    "putting_away_dishes",
    "setting_table",
    "storing_food",
    "tidying_bedroom",
];

fn compiled_goals() -> Vec<(String, Condition, CompiledCondition)> {
    let (tax, lib, scene) = (common::taxonomy(), common::library(), common::apartment());
    let ctx = SamplingContext { taxonomy: &tax, library: &lib, predicate_params: PredicateParams::default() };
    KINEMATIC
        .iter()
        .map(|name| {
            let act = common::activity(name);
            let inst = sample_instance(&act, &scene, ctx, SamplerParams::default()).unwrap();
            let compiled = compile(&act.goal, &inst.scope, &tax, &inst.scene).unwrap();
            (name.to_string(), act.goal, compiled)
        })
        .collect()
}

fn distinct_atoms(c: &CompiledCondition) -> Vec<String> {
    let set: BTreeSet<String> = c.atoms().iter().map(|a| a.expr.clone()).collect();
    set.into_iter().collect()
}

type Valuation = BTreeMap<String, bool>;

fn lookup(v: &Valuation) -> impl Fn(&GroundAtom) -> Result<bool, EvalError> + '_ {
    move |a: &GroundAtom| Ok(v[&a.expr])
}

/// Conjunctions, universals and existentials of positive atoms.
fn negation_free_conjunctive(c: &Condition) -> bool {
    match c {
        Condition::Atom(_) => true,
        Condition::And(cs) => cs.iter().all(negation_free_conjunctive),
        Condition::ForAll { body, .. } | Condition::Exists { body, .. } => negation_free_conjunctive(body),
        _ => false,
    }
}

fn valuations(atoms: &[String], rng: &mut ChaCha8Rng) -> Vec<Valuation> {
    if atoms.len() <= 12 {
        (0u32..1 << atoms.len())
            .map(|bits| atoms.iter().enumerate().map(|(i, a)| (a.clone(), bits >> i & 1 == 1)).collect())
            .collect()
    } else {
        (0..4096).map(|_| atoms.iter().map(|a| (a.clone(), rng.random_bool(0.5))).collect()).collect()
    }
}

#[test]
fn corpus_goals_are_small() {
    for (name, _, compiled) in compiled_goals() {
        assert!(distinct_atoms(&compiled).len() <= 12, "{name}");
    }
}

#[test]
fn score_properties_over_all_valuations() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (name, goal, compiled) in compiled_goals() {
        let atoms = distinct_atoms(&compiled);
        let shape = negation_free_conjunctive(&goal);
        for v in valuations(&atoms, &mut rng) {
            let report = score_with(&compiled, &lookup(&v)).unwrap();
            assert!((0.0..=1.0).contains(&report.q_score), "{name}");
            assert_eq!(report.satisfied, evaluate_with(&compiled, &lookup(&v)).unwrap(), "{name}");
            if shape {
                assert_eq!(report.q_score == 1.0, report.satisfied, "{name} {v:?}");
            }
            // make one reported leaf true by setting its atom
            for leaf in report.failed_leaves() {
                let (expr, value) = match leaf.expr.strip_prefix("(not ").and_then(|s| s.strip_suffix(')')) {
                    Some(inner) => (inner.to_string(), false),
                    None => (leaf.expr.clone(), true),
                };
                let mut flipped = v.clone();
                *flipped.get_mut(&expr).unwrap_or_else(|| panic!("{name}: leaf {expr} is not an atom")) = value;
                let after = score_with(&compiled, &lookup(&flipped)).unwrap();
                assert!(after.q_score >= report.q_score, "{name}: {expr} lowered q");
            }
        }
    }
}

#[test]
fn scoring_is_pure() {
    let (tax, lib, scene) = (common::taxonomy(), common::library(), common::apartment());
    let ctx = SamplingContext { taxonomy: &tax, library: &lib, predicate_params: PredicateParams::default() };
    let p = PredicateParams::default();
    for name in KINEMATIC {
        let act = common::activity(name);
        let inst = sample_instance(&act, &scene, ctx, SamplerParams { seed: 5, ..SamplerParams::default() }).unwrap();
        let compiled = compile(&act.goal, &inst.scope, &tax, &inst.scene).unwrap();
        let first = score_goal(&compiled, &inst.scene, &p).unwrap();
        assert_eq!(first, score_goal(&compiled, &inst.scene, &p).unwrap(), "{name}");
        assert!(!first.leaves.is_empty());
    }
}
