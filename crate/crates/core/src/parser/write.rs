use std::fmt::Write;

use super::ast::{Activity, Condition};

const INDENT: &str = "    ";

/// Renders an activity as BDDL text. Consecutive terms sharing a synset
/// are grouped on one `- synset` line; declaration order is preserved.
pub fn serialize_activity(activity: &Activity) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem {})", activity.problem_name);
    let _ = writeln!(out, "{INDENT}(:domain {})", activity.domain_name);
    out.push('\n');

    let _ = writeln!(out, "{INDENT}(:objects");
    let mut i = 0;
    while i < activity.objects.len() {
        let synset = &activity.objects[i].synset;
        let run = activity.objects[i..].iter().take_while(|o| &o.synset == synset).count();
        let terms: Vec<&str> = activity.objects[i..i + run].iter().map(|o| o.term.as_str()).collect();
        let _ = writeln!(out, "{INDENT}{INDENT}{} - {synset}", terms.join(" "));
        i += run;
    }
    let _ = writeln!(out, "{INDENT})");
    out.push('\n');

    let _ = writeln!(out, "{INDENT}(:init");
    for lit in &activity.init {
        let _ = writeln!(out, "{INDENT}{INDENT}{lit}");
    }
    let _ = writeln!(out, "{INDENT})");
    out.push('\n');

    let _ = writeln!(out, "{INDENT}(:goal");
    write_condition(&mut out, &activity.goal, 2);
    let _ = writeln!(out, "{INDENT})");
    out.push_str(")\n");
    out
}

fn write_condition(out: &mut String, cond: &Condition, depth: usize) {
    let pad = INDENT.repeat(depth);
    match cond {
        Condition::Atom(a) => {
            let _ = writeln!(out, "{pad}{a}");
        }
        Condition::Not(c) => {
            if let Condition::Atom(a) = c.as_ref() {
                let _ = writeln!(out, "{pad}(not {a})");
            } else {
                let _ = writeln!(out, "{pad}(not");
                write_condition(out, c, depth + 1);
                let _ = writeln!(out, "{pad})");
            }
        }
        Condition::And(cs) | Condition::Or(cs) => {
            let op = if matches!(cond, Condition::And(_)) { "and" } else { "or" };
            let _ = writeln!(out, "{pad}({op}");
            for c in cs {
                write_condition(out, c, depth + 1);
            }
            let _ = writeln!(out, "{pad})");
        }
        Condition::Imply(a, c) => {
            let _ = writeln!(out, "{pad}(imply");
            write_condition(out, a, depth + 1);
            write_condition(out, c, depth + 1);
            let _ = writeln!(out, "{pad})");
        }
        Condition::ForAll { var, synset, body } | Condition::Exists { var, synset, body } => {
            let op = if matches!(cond, Condition::ForAll { .. }) { "forall" } else { "exists" };
            let _ = writeln!(out, "{pad}({op}");
            let _ = writeln!(out, "{pad}{INDENT}({var} - {synset})");
            write_condition(out, body, depth + 1);
            let _ = writeln!(out, "{pad})");
        }
        Condition::ForN { n, var, synset, body } => {
            let _ = writeln!(out, "{pad}(forn");
            let _ = writeln!(out, "{pad}{INDENT}({n})");
            let _ = writeln!(out, "{pad}{INDENT}({var} - {synset})");
            write_condition(out, body, depth + 1);
            let _ = writeln!(out, "{pad})");
        }
    }
}
