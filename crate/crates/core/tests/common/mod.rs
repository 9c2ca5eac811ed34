#![allow(dead_code)]

use std::collections::HashMap;

use dynck_core::{Agent, EventKind, EventSym, Formula, Group};
use rand::Rng;

/// A random formula over the whole surface syntax, including named atoms
/// and custom events.
pub fn any_formula<R: Rng>(rng: &mut R, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..7) {
            0 => Formula::mu(rng.gen_range(1..5)),
            1 => Formula::lambda(rng.gen_range(0..5)),
            2 => Formula::eps(rng.gen_range(0..5)),
            3 => Formula::True,
            4 => Formula::False,
            5 => Formula::named(["rain", "wet", "x1"][rng.gen_range(0..3)], true),
            _ => Formula::named("mood", false),
        };
    }
    let group = |rng: &mut R| {
        let n = rng.gen_range(1..4);
        Group::new((0..n).map(|_| Agent(rng.gen_range(1..6))).collect::<std::collections::BTreeSet<_>>())
            .unwrap()
    };
    let event = |rng: &mut R| match rng.gen_range(0..4) {
        0 => EventSym::star(),
        1 => EventSym::point(),
        2 => EventSym::epistemic("ask"),
        _ => EventSym::new("paint", EventKind::Ontic),
    };
    let sub = |rng: &mut R| any_formula(rng, depth - 1);
    match rng.gen_range(0..9) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::imp(sub(rng), sub(rng)),
        4 => Formula::k(Agent(rng.gen_range(1..6)), sub(rng)),
        5 => Formula::e(group(rng), sub(rng)),
        6 => Formula::c(group(rng), sub(rng)),
        _ => Formula::boxed(event(rng), sub(rng)),
    }
}

/// Truth value of the boolean structure of `f`, with every other
/// subformula looked up in `val` (missing entries are false).
pub fn truth(f: &Formula, val: &HashMap<Formula, bool>) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Not(a) => !truth(a, val),
        Formula::And(a, b) => truth(a, val) && truth(b, val),
        Formula::Or(a, b) => truth(a, val) || truth(b, val),
        Formula::Imp(a, b) => !truth(a, val) || truth(b, val),
        other => *val.get(other).unwrap_or(&false),
    }
}

/// Tautology by direct enumeration of the given leaves.
pub fn tautology_over(f: &Formula, leaves: &[Formula]) -> bool {
    (0..1u32 << leaves.len()).all(|bits| {
        let val = leaves
            .iter()
            .enumerate()
            .map(|(k, l)| (l.clone(), bits >> k & 1 == 1))
            .collect();
        truth(f, &val)
    })
}

/// Four pairwise distinct modal and atomic placeholders.
pub fn placeholders() -> Vec<Formula> {
    use dynck_core::parse_formula as p;
    vec![
        p("K 1 mu 1").unwrap(),
        p("[*] lambda 2").unwrap(),
        p("E {1,2} C {1} eps 0").unwrap(),
        p("mu 3").unwrap(),
    ]
}
