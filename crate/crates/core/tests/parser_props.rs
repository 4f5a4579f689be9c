mod common;

use std::collections::BTreeSet;

use bddl_core::parser::{
    classify_kinematic, default_supported, parse_activity, serialize_activity, tokenize, Condition, ParseError,
};
use proptest::prelude::*;

#[test]
fn corpus_round_trips() {
    for (name, src) in common::corpus() {
        let first = parse_activity(&src).unwrap_or_else(|e| panic!("{name}: {e}"));
        let again = parse_activity(&serialize_activity(&first)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(first, again, "{name}");
    }
}

#[test]
fn corpus_tokens_are_strictly_increasing() {
    for (name, src) in common::corpus() {
        let toks = tokenize(&src).unwrap();
        assert!(toks.windows(2).all(|w| (w[0].line, w[0].column) < (w[1].line, w[1].column)), "{name}");
    }
}

fn line_lengths(src: &str) -> Vec<usize> {
    src.split('\n').map(|l| l.chars().count()).collect()
}

fn within_bounds(src: &str, e: &ParseError) -> bool {
    let (line, col) = e.position();
    let lens = line_lengths(src);
    line >= 1 && line <= lens.len() && col >= 1 && col <= lens[line - 1] + 1
}

fn mutate(src: &str, cut: usize, insert: &str) -> String {
    let chars: Vec<char> = src.chars().collect();
    let cut = cut.min(chars.len());
    chars[..cut].iter().collect::<String>() + insert + &chars[cut..].iter().collect::<String>()
}

fn conjuncts(goal: &Condition) -> Vec<Condition> {
    match goal {
        Condition::And(parts) => parts.clone(),
        other => vec![other.clone()],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn errors_point_inside_the_source(
        pick in 0usize..10,
        cut in 0usize..2000,
        insert in prop::sample::select(vec!["", "(", ")", "#", "?", ":", "(forall", "(not", " x ", "\n"]),
        truncate in any::<bool>(),
    ) {
        let corpus = common::corpus();
        let src = &corpus[pick % corpus.len()].1;
        let broken = if truncate {
            src.chars().take(cut % (src.len() + 1)).collect()
        } else {
            mutate(src, cut, insert)
        };
        if let Err(e) = parse_activity(&broken) {
            prop_assert!(within_bounds(&broken, &e), "{e:?} outside {:?}", line_lengths(&broken));
        }
    }

    #[test]
    fn arbitrary_text_tokens_increase(src in "[()a-z?:;# \n\t.\\-]{0,200}") {
        if let Ok(toks) = tokenize(&src) {
            prop_assert!(toks.windows(2).all(|w| (w[0].line, w[0].column) < (w[1].line, w[1].column)));
        } else if let Err(e) = parse_activity(&src) {
            prop_assert!(within_bounds(&src, &e));
        }
    }

    #[test]
    fn classification_ignores_order(pick in 0usize..10, seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let corpus = common::corpus();
        let act = parse_activity(&corpus[pick % corpus.len()].1).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut shuffled = act.clone();
        shuffled.init.shuffle(&mut rng);
        let mut parts = conjuncts(&act.goal);
        parts.shuffle(&mut rng);
        shuffled.goal = Condition::And(parts);
        let supported: BTreeSet<String> = default_supported();
        prop_assert_eq!(classify_kinematic(&act, &supported), classify_kinematic(&shuffled, &supported));
    }
}
