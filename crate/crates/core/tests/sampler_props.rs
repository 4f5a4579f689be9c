mod common;

use bddl_core::parser::{Atom, Literal};
use bddl_core::predicates::{PredicateKind, PredicateParams};
use bddl_core::sampler::{
    load_presampled, order_constraints, sample_instance, SampledInstance, SamplerError, SamplerParams, SamplingContext,
};
use bddl_core::scene::{gap_distance, world_aabb};
use proptest::prelude::*;

const KINEMATIC: [&str; 6] = [
    "collect_misplaced_items",
    "packing_toys",
    "putting_away_dishes",
    "setting_table",
    "storing_food",
    "tidying_bedroom",
];

fn sample(name: &str, seed: u64) -> Result<SampledInstance, SamplerError> {
    let (tax, lib, scene) = (common::taxonomy(), common::library(), common::apartment());
    let ctx = SamplingContext { taxonomy: &tax, library: &lib, predicate_params: PredicateParams::default() };
    sample_instance(&common::activity(name), &scene, ctx, SamplerParams { seed, ..SamplerParams::default() })
}

/// Random acyclic placement lists: atom `i` places object `i + 1` relative
/// to an object with a smaller index, listed in shuffled order.
fn arb_forest_atoms() -> impl Strategy<Value = Vec<Literal>> {
    (1usize..8)
        .prop_flat_map(|n| {
            let refs: Vec<_> = (0..n).map(|i| 0..=i).collect();
            (refs, prop::sample::select(PredicateKind::ALL.to_vec()), Just(n))
        })
        .prop_flat_map(|(refs, kind, n)| {
            let atoms: Vec<Literal> = refs
                .iter()
                .enumerate()
                .map(|(i, r)| Literal::positive(Atom::new(kind.name(), [format!("o{}", i + 1), format!("o{r}")])))
                .collect();
            Just(atoms).prop_shuffle().prop_map(move |a| {
                assert_eq!(a.len(), n);
                a
            })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn supporters_come_first(atoms in arb_forest_atoms()) {
        let ordered = order_constraints(&atoms).unwrap();
        prop_assert_eq!(ordered.len(), atoms.len());
        for (i, lit) in ordered.iter().enumerate() {
            let reference = &lit.atom.args[1];
            prop_assert!(ordered[i + 1..].iter().all(|later| &later.atom.args[0] != reference));
        }
    }
}

#[test]
fn sampled_objects_do_not_interpenetrate() {
    for name in KINEMATIC {
        let act = common::activity(name);
        for seed in 0..8 {
            let inst = sample(name, seed).unwrap();
            let related = |x: &str, y: &str| {
                act.init.iter().any(|l| {
                    !l.negated
                        && matches!(l.atom.predicate.as_str(), "inside" | "ontop")
                        && l.atom.args.iter().map(|t| inst.scope.get(t).unwrap()).collect::<Vec<_>>() == [x, y]
                })
            };
            let movable: Vec<&str> = act
                .init
                .iter()
                .filter(|l| !l.negated && !l.atom.is_inroom())
                .map(|l| inst.scope.get(&l.atom.args[0]).unwrap())
                .collect();
            for (i, a) in movable.iter().enumerate() {
                for b in &movable[i + 1..] {
                    if a == b || related(a, b) || related(b, a) {
                        continue;
                    }
                    let (ba, bb) = (world_aabb(inst.scene.object(a).unwrap()), world_aabb(inst.scene.object(b).unwrap()));
                    assert!(ba.intersection_volume(&bb) <= 1e-12, "{name}/{seed}: {a} and {b}");
                    assert!(gap_distance(&ba, &bb) >= 0.0);
                }
            }
        }
    }
}

#[test]
fn same_seed_same_bytes() {
    for name in KINEMATIC {
        let (a, b) = (sample(name, 42).unwrap(), sample(name, 42).unwrap());
        assert_eq!(a.scene.to_json(), b.scene.to_json(), "{name}");
        assert_eq!(a.scope.to_json(), b.scope.to_json(), "{name}");
    }
    assert_ne!(sample("storing_food", 1).unwrap().scene.to_json(), sample("storing_food", 2).unwrap().scene.to_json());
}

#[test]
fn cyclic_support_in_activity() {
    let mut act = common::activity("tidying_bedroom");
    act.init.push(Literal::positive(Atom::new("ontop", ["bed.n.01_1", "book.n.02_1"])));
    let (tax, lib, scene) = (common::taxonomy(), common::library(), common::apartment());
    let ctx = SamplingContext { taxonomy: &tax, library: &lib, predicate_params: PredicateParams::default() };
    let err = sample_instance(&act, &scene, ctx, SamplerParams::default()).unwrap_err();
    assert!(matches!(err, SamplerError::CyclicSupport(_)), "{err}");
}

#[test]
fn impossible_placement_exhausts_budget() {
    let mut act = common::activity("tidying_bedroom");
    // a teddy bear cannot fit inside a shoe
    act.init.push(Literal::positive(Atom::new("inside", ["teddy.n.01_1", "shoe.n.01_1"])));
    act.init.retain(|l| l.atom.predicate != "onfloor");
    let (tax, lib, scene) = (common::taxonomy(), common::library(), common::apartment());
    let ctx = SamplingContext { taxonomy: &tax, library: &lib, predicate_params: PredicateParams::default() };
    let params = SamplerParams { max_attempts_per_atom: 7, ..SamplerParams::default() };
    match sample_instance(&act, &scene, ctx, params).unwrap_err() {
        SamplerError::SamplingFailed { atom, attempts } => {
            assert_eq!(attempts, 7);
            assert!(atom.contains("inside"), "{atom}");
        }
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn missing_library_entry() {
    let (tax, scene) = (common::taxonomy(), common::apartment());
    let lib = bddl_core::sampler::ObjectLibrary::default();
    let ctx = SamplingContext { taxonomy: &tax, library: &lib, predicate_params: PredicateParams::default() };
    let err = sample_instance(&common::activity("storing_food"), &scene, ctx, SamplerParams::default()).unwrap_err();
    assert!(matches!(err, SamplerError::MissingLibraryEntry(_)), "{err}");
}

#[test]
fn presampled_episode_loads_strictly() {
    let act = common::activity("tidying_bedroom");
    let tax = common::taxonomy();
    let p = PredicateParams::default();
    let scene = common::read("episodes/tidying_bedroom/scene.json");
    let scope = common::read("episodes/tidying_bedroom/scope.json");
    let loaded = load_presampled(&scene, &scope, &act, &tax, &p, true).unwrap();
    assert_eq!(loaded.report.q_score, 1.0);
    assert!(loaded.warnings.is_empty());
    assert_eq!(loaded.instance.seed, None);

    // the apartment without spawned objects does not bind the activity's terms
    let bare = common::read("scenes/apartment.json");
    assert!(matches!(load_presampled(&bare, &scope, &act, &tax, &p, true), Err(SamplerError::Format(_))));

    // moving the book off the bed violates init: strict fails, lenient warns
    let moved = scene.replacen("0.625", "2.625", 1);
    assert!(matches!(load_presampled(&moved, &scope, &act, &tax, &p, true), Err(SamplerError::InitViolated(_))));
    let lenient = load_presampled(&moved, &scope, &act, &tax, &p, false).unwrap();
    assert!(lenient.report.q_score < 1.0);
    assert_eq!(lenient.warnings.len(), 1);
}
